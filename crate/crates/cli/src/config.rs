//! Experiment configuration: a TOML document, dotted `key=value` overrides on
//! top, then validation into ready-to-run inputs.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use dnlslab_core::modspace::WindowSpec;
use dnlslab_core::solver::{Mode, ModelParams, Nonlinearity};
use dnlslab_core::spectral::{Field, Grid, Space};
use dnlslab_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Bumped whenever a field is renamed or its meaning changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    ScatterRate,
    SdgeCheck,
    ModspaceDemo,
    MdfmCheck,
    ElemlemCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::ScatterRate => "scatter-rate",
            Experiment::SdgeCheck => "sdge-check",
            Experiment::ModspaceDemo => "modspace-demo",
            Experiment::MdfmCheck => "mdfm-check",
            Experiment::ElemlemCheck => "elemlem-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Defocusing,
    Focusing,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Sigma,
    M11,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Sigma => Mode::Sigma,
            ModeName::M11 => Mode::M11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub power: f64,
    pub damping: f64,
    pub nonlinearity: Sign,
    /// ε in the decay hypothesis; `0.01·damping` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub mode: ModeName,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            power: 3.0,
            damping: 1.0,
            nonlinearity: Sign::Defocusing,
            margin: None,
            mode: ModeName::Sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            points: 4096,
            length: 256.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub final_time: f64,
    pub dt: f64,
    pub cadence: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            final_time: 16.0,
            dt: 1e-3,
            cadence: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude · exp(-|x - center|²/width²)`; `center` defaults to the origin.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `amplitude` times the unit-L² band-limited bump of Fourier radius `radius`.
    BandLimitedBump { amplitude: f64, radius: f64 },
    /// Whitespace-separated `re im` pairs, one sample per line in grid order.
    /// Blank lines and lines starting with `#` are skipped.
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Gaussian {
            amplitude: 0.1,
            width: 1.0,
            center: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub fit_window: [f64; 2],
    /// Error curves are trusted up to this fraction of the extraction time.
    pub trust_fraction: f64,
    pub extraction_tol: f64,
    pub sandwich_tol: f64,
    /// Record the `M^{1,1}` lattice estimate at every monitor time.
    pub m11_monitor: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fit_window: [5.0, 8.0],
            trust_fraction: 0.5,
            extraction_tol: 1e-6,
            sandwich_tol: 0.1,
            m11_monitor: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PicardNorm {
    L2,
    H1,
    Sigma,
    M11,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub iterations: usize,
    pub dt: f64,
    /// Defaults to `time.final_time`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// The comparison run starts from the initial data times this factor.
    pub compare_scale: f64,
    pub norm: PicardNorm,
    pub residual_every: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            iterations: 7,
            dt: 0.01,
            horizon: None,
            compare_scale: 0.5,
            norm: PicardNorm::L2,
            residual_every: 10,
        }
    }
}

/// The partial-sum family lives on its own grid of length `2π·cells`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModspaceConfig {
    pub points: usize,
    pub cells: usize,
    pub terms: Vec<usize>,
    pub bump_radius: f64,
    pub window_sigma: f64,
    /// Random fields drawn for the product estimate (uses `seed`).
    pub random_fields: usize,
}

impl Default for ModspaceConfig {
    fn default() -> Self {
        Self {
            points: 32768,
            cells: 64,
            terms: vec![16, 32, 64, 128],
            bump_radius: 0.25,
            window_sigma: 1.0,
            random_fields: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdfmConfig {
    pub times: Vec<f64>,
}

impl Default for MdfmConfig {
    fn default() -> Self {
        Self {
            times: vec![0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElemlemConfig {
    /// `(α, β)` pairs.
    pub pairs: Vec<[f64; 2]>,
    /// Samples at `t = (start + i)/β` for `i = 0..count`.
    pub start: f64,
    pub count: usize,
    /// `r·β` must be within `limit_tol` of 1 at `t = limit_at/β`.
    pub limit_at: f64,
    pub limit_tol: f64,
}

impl Default for ElemlemConfig {
    fn default() -> Self {
        Self {
            pairs: vec![[-1.0, 2.0], [0.0, 1.0], [3.0, 1.0]],
            start: 10.0,
            count: 91,
            limit_at: 30.0,
            limit_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Set by the subcommand; required for sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub initial_data: InitialData,
    pub analysis: AnalysisConfig,
    pub picard: PicardConfig,
    pub modspace: ModspaceConfig,
    pub mdfm: MdfmConfig,
    pub elemlem: ElemlemConfig,
}


fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses an override value as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Recursively lays `over` onto `base`. A table whose `kind` tag changes is
/// replaced rather than merged, so fields of the old variant do not linger.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if b.get("kind") == o.get("kind") || !o.contains_key("kind") => {
                merge(b, o)
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Applies `a.b.c=value` to `table`, creating intermediate tables. Setting a
/// `kind` tag to a new value clears the other fields of its table.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(format!("override `{assignment}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(invalid(format!("override key `{key}` has an empty component")));
    }
    let (last, parents) = path.split_last().expect("split yields one element");
    let mut node = table;
    for part in parents {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| invalid(format!("override `{key}`: `{part}` is not a table")))?;
    }
    let value = parse_value(raw.trim());
    if *last == "kind" && node.get("kind") != Some(&value) {
        node.clear();
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Reads `path` over the reference defaults, applies overrides and
/// deserializes. Relative `file` initial data resolves against the config's
/// directory.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut table = toml::Table::try_from(ExperimentConfig::default()).expect("defaults serialize");
    if let Some(p) = path {
        let text = fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?;
        let file = text
            .parse::<toml::Table>()
            .map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        merge(&mut table, file);
    }
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let mut cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| invalid(e.to_string()))?;
    if let (Some(p), InitialData::File { path: data }) = (path, &mut cfg.initial_data) {
        if data.is_relative() {
            if let Some(dir) = p.parent() {
                *data = dir.join(&*data);
            }
        }
    }
    Ok(cfg)
}

/// Inputs derived from a validated configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub experiment: Experiment,
    pub params: ModelParams,
    pub mode: Mode,
    pub grid: Grid,
    pub u0: Field,
}

fn positive(v: f64, what: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

fn whole_steps(span: f64, dt: f64, what: &str) -> Result<(), CliError> {
    let steps = (span / dt).round();
    if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(invalid(format!("{what} {span} is not a whole number of steps of {dt}")));
    }
    Ok(())
}

fn read_samples(path: &Path, expected: usize) -> Result<Vec<Complex64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("initial data file {}: {e}", path.display())))?;
    let mut out = Vec::with_capacity(expected);
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match parts.as_slice() {
            [re, im] => match (parse(re), parse(im)) {
                (Some(re), Some(im)) => out.push(Complex64::new(re, im)),
                _ => return Err(invalid(format!("{}:{}: not two finite numbers", path.display(), line_no + 1))),
            },
            _ => return Err(invalid(format!("{}:{}: expected `re im`", path.display(), line_no + 1))),
        }
    }
    if out.len() != expected {
        return Err(invalid(format!(
            "{} holds {} samples, the grid has {expected}",
            path.display(),
            out.len()
        )));
    }
    Ok(out)
}

fn initial_field(data: &InitialData, grid: &Grid) -> Result<Field, CliError> {
    match data {
        InitialData::Gaussian {
            amplitude,
            width,
            center,
        } => {
            positive(*width, "initial_data.width")?;
            if !amplitude.is_finite() {
                return Err(invalid("initial_data.amplitude must be finite"));
            }
            let mut c = center.clone();
            if c.is_empty() {
                c = vec![0.0; grid.dim()];
            }
            if c.len() != grid.dim() {
                return Err(invalid(format!(
                    "initial_data.center has {} entries, the grid has dimension {}",
                    c.len(),
                    grid.dim()
                )));
            }
            let w2 = width * width;
            Ok(Field::from_fn(grid, |x| {
                let r2: f64 = x.iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum();
                Complex64::new(amplitude * (-r2 / w2).exp(), 0.0)
            })?)
        }
        InitialData::BandLimitedBump { amplitude, radius } => {
            positive(*radius, "initial_data.radius")?;
            if !amplitude.is_finite() {
                return Err(invalid("initial_data.amplitude must be finite"));
            }
            let bump = WindowSpec::BandLimitedBump { radius: *radius }.sample(grid)?;
            Ok(bump.scale(Complex64::new(*amplitude, 0.0)))
        }
        InitialData::File { path } => {
            let samples = read_samples(path, grid.len())?;
            Ok(Field::new(grid.clone(), Space::Physical, samples)?)
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> ModelParams {
        let nonlinearity = match self.model.nonlinearity {
            Sign::Defocusing => Nonlinearity::Defocusing,
            Sign::Focusing => Nonlinearity::Focusing,
            Sign::Off => Nonlinearity::Off,
        };
        let mut params = ModelParams::new(self.grid.dim, self.model.power, self.model.damping, nonlinearity);
        if let Some(m) = self.model.margin {
            params.margin = m;
        }
        params
    }

    /// Checks everything that can be checked without running the experiment.
    /// Nothing is written and nothing expensive is computed.
    pub fn prepare(&self) -> Result<Prepared, CliError> {
        let experiment = self
            .experiment
            .ok_or_else(|| invalid("no experiment selected"))?;
        let params = self.params();
        let mode: Mode = self.model.mode.into();
        params.validate_for(mode).map_err(|e| invalid(e.to_string()))?;
        let grid = Grid::new(self.grid.dim, self.grid.points, self.grid.length).map_err(|e| invalid(e.to_string()))?;
        let u0 = match experiment {
            Experiment::Simulate | Experiment::ScatterRate | Experiment::SdgeCheck | Experiment::MdfmCheck => {
                initial_field(&self.initial_data, &grid).map_err(|e| match e {
                    CliError::Core(c) => invalid(c.to_string()),
                    other => other,
                })?
            }
            _ => Field::zeros(&grid, Space::Physical),
        };

        match experiment {
            Experiment::Simulate | Experiment::ScatterRate => {
                let t = &self.time;
                positive(t.final_time, "time.final_time")?;
                positive(t.dt, "time.dt")?;
                positive(t.cadence, "time.cadence")?;
                whole_steps(t.cadence, t.dt, "time.cadence")?;
                whole_steps(t.final_time, t.cadence, "time.final_time")?;
                if experiment == Experiment::ScatterRate {
                    let a = &self.analysis;
                    let [lo, hi] = a.fit_window;
                    if !(lo > 0.0 && hi > lo) {
                        return Err(invalid(format!("analysis.fit_window [{lo}, {hi}] must satisfy 0 < lo < hi")));
                    }
                    if !(a.trust_fraction > 0.0 && a.trust_fraction <= 1.0) {
                        return Err(invalid("analysis.trust_fraction must lie in (0, 1]"));
                    }
                    if hi > a.trust_fraction * t.final_time + 1e-9 {
                        return Err(invalid(format!(
                            "analysis.fit_window ends at {hi}, past the trusted range {}",
                            a.trust_fraction * t.final_time
                        )));
                    }
                    positive(a.extraction_tol, "analysis.extraction_tol")?;
                    positive(a.sandwich_tol, "analysis.sandwich_tol")?;
                }
            }
            Experiment::SdgeCheck => {
                let p = &self.picard;
                if p.iterations < 2 {
                    return Err(invalid("picard.iterations must be at least 2"));
                }
                positive(p.dt, "picard.dt")?;
                let horizon = p.horizon.unwrap_or(self.time.final_time);
                positive(horizon, "picard.horizon")?;
                whole_steps(horizon, p.dt, "picard.horizon")?;
                positive(p.compare_scale, "picard.compare_scale")?;
                if p.compare_scale >= 1.0 {
                    return Err(invalid("picard.compare_scale must be below 1"));
                }
                if p.residual_every == 0 {
                    return Err(invalid("picard.residual_every must be positive"));
                }
            }
            Experiment::ModspaceDemo => {
                let m = &self.modspace;
                if m.terms.len() < 2 || m.terms.windows(2).any(|w| w[1] <= w[0]) || m.terms[0] == 0 {
                    return Err(invalid("modspace.terms needs at least two positive increasing counts"));
                }
                positive(m.bump_radius, "modspace.bump_radius")?;
                positive(m.window_sigma, "modspace.window_sigma")?;
                if m.cells == 0 {
                    return Err(invalid("modspace.cells must be positive"));
                }
                let g = self.modspace_grid()?;
                let need = *m.terms.last().expect("checked nonempty") as f64 + 1.0 + m.bump_radius;
                if g.max_frequency() < need {
                    return Err(invalid(format!(
                        "modspace grid reaches frequency {:.3}, the longest partial sum needs {need:.3}",
                        g.max_frequency()
                    )));
                }
            }
            Experiment::MdfmCheck => {
                if self.mdfm.times.is_empty() {
                    return Err(invalid("mdfm.times is empty"));
                }
                for &t in &self.mdfm.times {
                    positive(t, "mdfm time")?;
                }
            }
            Experiment::ElemlemCheck => {
                let e = &self.elemlem;
                if e.pairs.is_empty() || e.count == 0 {
                    return Err(invalid("elemlem needs at least one pair and one sample"));
                }
                for [alpha, beta] in &e.pairs {
                    positive(*beta, "elemlem β")?;
                    if !alpha.is_finite() {
                        return Err(invalid("elemlem α must be finite"));
                    }
                }
                positive(e.start, "elemlem.start")?;
                positive(e.limit_at, "elemlem.limit_at")?;
                positive(e.limit_tol, "elemlem.limit_tol")?;
            }
        }
        Ok(Prepared {
            experiment,
            params,
            mode,
            grid,
            u0,
        })
    }

    pub fn modspace_grid(&self) -> Result<Grid, CliError> {
        Grid::new(1, self.modspace.points, 2.0 * PI * self.modspace.cells as f64).map_err(|e| invalid(e.to_string()))
    }
}
