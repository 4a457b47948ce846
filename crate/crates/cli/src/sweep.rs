//! Cartesian sweeps over configuration overrides, one isolated output
//! directory per run, fanned out over a fixed pool of scoped threads.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::config::{self, Experiment, ExperimentConfig};
use crate::report::emit_report;
use crate::{run_experiment, CliError};

pub const INDEX_FILE: &str = "sweep.tsv";

/// Splits `v1,v2,...` at commas outside brackets and quotes, so TOML arrays
/// such as `[5.0,8.0]` stay whole.
fn split_values(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut current = String::new();
    for c in raw.chars() {
        match c {
            '"' => quoted = !quoted,
            '[' | '{' if !quoted => depth += 1,
            ']' | '}' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                out.push(std::mem::take(&mut current).trim().to_string());
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    out.push(current.trim().to_string());
    out
}

/// Expands `key=v1,v2` specifications into every combination of assignments.
/// The first key varies slowest.
pub fn expand(vary: &[String]) -> Result<Vec<Vec<String>>, CliError> {
    let mut combos = vec![Vec::new()];
    for spec in vary {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--vary `{spec}` is not of the form key=v1,v2")))?;
        let values = split_values(values);
        if values.iter().any(|v| v.is_empty()) {
            return Err(CliError::Config(format!("--vary `{spec}` has an empty value")));
        }
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(format!("{}={v}", key.trim()));
                    next
                })
            })
            .collect();
    }
    Ok(combos)
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub dir: PathBuf,
    pub overrides: Vec<String>,
    pub config: ExperimentConfig,
}

/// Loads and validates every run up front; an invalid combination aborts the
/// sweep before anything is computed or written.
pub fn plan(
    config_path: Option<&Path>,
    sets: &[String],
    vary: &[String],
    experiment: Option<Experiment>,
    out: &Path,
) -> Result<Vec<SweepRun>, CliError> {
    let mut runs = Vec::new();
    for (i, combo) in expand(vary)?.into_iter().enumerate() {
        let all: Vec<String> = sets.iter().cloned().chain(combo.iter().cloned()).collect();
        let mut cfg = config::load(config_path, &all)?;
        if experiment.is_some() {
            cfg.experiment = experiment;
        }
        let dir = out.join(format!("run-{i:03}"));
        cfg.output_dir = Some(dir.clone());
        cfg.prepare()
            .map_err(|e| CliError::Config(format!("run {i} ({}): {e}", combo.join(" "))))?;
        runs.push(SweepRun {
            dir,
            overrides: combo,
            config: cfg,
        });
    }
    Ok(runs)
}

/// Exit code of one run: the artifact's, or the error's.
fn execute(run: &SweepRun) -> (i32, String) {
    let outcome = run_experiment(&run.config).and_then(|artifact| {
        emit_report(&artifact, &run.dir)?;
        Ok(artifact.exit_code())
    });
    match outcome {
        Ok(code) => (code, String::new()),
        Err(e) => (e.exit_code(), e.to_string()),
    }
}

/// Runs every planned configuration on `jobs` workers and writes the index.
/// Returns the largest exit code.
pub fn run_sweep(runs: &[SweepRun], out: &Path, jobs: usize) -> Result<i32, CliError> {
    let next = AtomicUsize::new(0);
    let results = Mutex::new(vec![(0, String::new()); runs.len()]);
    thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(runs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(run) = runs.get(i) else { break };
                let outcome = execute(run);
                results.lock().expect("worker panicked")[i] = outcome;
            });
        }
    });
    let results = results.into_inner().expect("worker panicked");

    let mut index = String::from("# run\texit_code\toverrides\terror\n");
    for (run, (code, err)) in runs.iter().zip(&results) {
        let name = run.dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        index.push_str(&format!("{name}\t{code}\t{}\t{err}\n", run.overrides.join(" ")));
    }
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let path = out.join(INDEX_FILE);
    fs::write(&path, index).map_err(|source| CliError::Io { path, source })?;
    Ok(results.iter().map(|(c, _)| *c).max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_survive_splitting() {
        assert_eq!(split_values("[5.0,8.0], [4,6]"), vec!["[5.0,8.0]", "[4,6]"]);
        assert_eq!(split_values("1,2,3"), vec!["1", "2", "3"]);
        assert_eq!(split_values("\"a,b\",c"), vec!["\"a,b\"", "c"]);
    }

    #[test]
    fn expansion_is_cartesian() {
        let combos = expand(&["a=1,2".into(), "b=x,y,z".into()]).unwrap();
        assert_eq!(combos.len(), 6);
        assert_eq!(combos[0], vec!["a=1", "b=x"]);
        assert_eq!(combos[5], vec!["a=2", "b=z"]);
        assert_eq!(expand(&[]).unwrap(), vec![Vec::<String>::new()]);
        assert!(expand(&["nokey".into()]).is_err());
    }
}
