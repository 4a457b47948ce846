mod common;

use common::{gaussian, integrate, rel_l2, Reference};
use dnlslab_core::propagators::free_propagate;
use dnlslab_core::solver::{
    decay_check, phase_weight, picard_iterate, simulate, strang_step, ModelParams, Mode, Nonlinearity,
    PicardOptions, RunSpec, WorkingNorm,
};
use dnlslab_core::spectral::{fourier_transform, norm, Direction, Field, Grid, NormSpec, Space};
use dnlslab_core::{Complex64, Error};

fn cubic() -> ModelParams {
    ModelParams::new(1, 3.0, 1.0, Nonlinearity::Defocusing)
}

fn linear() -> ModelParams {
    ModelParams::new(1, 3.0, 1.0, Nonlinearity::Off)
}

fn run(final_time: f64, dt: f64) -> RunSpec {
    RunSpec {
        final_time,
        dt,
        cadence: 0.1,
        m11: None,
    }
}

#[test]
fn phase_weight_matches_quadrature() {
    for (rate, t, dt) in [(2.0, 0.0, 1e-3), (2.0, 3.7, 0.05), (0.5, 10.0, 1.0), (1e-9, 1.0, 0.1)] {
        let exact = integrate(&|s: f64| (-rate * s).exp(), t, t + dt, 1e-15);
        let w = phase_weight(rate, t, dt);
        assert!((w - exact).abs() <= 1e-14 * exact, "{rate} {t} {dt}: {w} vs {exact}");
    }
    assert_eq!(phase_weight(0.0, 5.0, 0.25), 0.25);
}

#[test]
fn strang_step_special_cases() {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let z = Field::zeros(&g, Space::Physical);
    assert!(strang_step(&z, 0.0, 0.01, &cubic()).unwrap().is_zero());

    let f = gaussian(&g, 0.5);
    let step = strang_step(&f, 1.0, 0.01, &linear()).unwrap();
    let free = free_propagate(&f, 0.01).unwrap();
    assert!(rel_l2(step.samples(), free.samples()) < 1e-14);

    let out = strang_step(&f, 0.0, 0.01, &cubic()).unwrap();
    let a = norm(&f, NormSpec::L2);
    assert!((norm(&out, NormSpec::L2) - a).abs() < 1e-14 * a);

    assert!(strang_step(&f, 0.0, 0.0, &cubic()).is_err());
    let hat = fourier_transform(&f, Direction::Forward).unwrap();
    assert!(matches!(strang_step(&hat, 0.0, 0.01, &cubic()), Err(Error::SpaceMismatch { .. })));
}

#[test]
fn linear_time_reversal() {
    let g = Grid::new(1, 512, 64.0).unwrap();
    let u0 = gaussian(&g, 1.0);
    let mut v = u0.clone();
    for j in 0..200 {
        v = strang_step(&v, j as f64 * 0.01, 0.01, &linear()).unwrap();
    }
    let back = free_propagate(&v, -2.0).unwrap();
    assert!(rel_l2(back.samples(), u0.samples()) < 1e-11);

    let traj = simulate(&u0, &linear(), &run(2.0, 0.01)).unwrap();
    let back = free_propagate(&traj.states[traj.states.len() - 1], -2.0).unwrap();
    assert!(rel_l2(back.samples(), u0.samples()) < 1e-11);
}

#[test]
fn linear_run_follows_damping_law() {
    let g = Grid::new(1, 512, 64.0).unwrap();
    let u0 = gaussian(&g, 0.3);
    let traj = simulate(&u0, &linear(), &run(4.0, 0.01)).unwrap();
    let a = norm(&u0, NormSpec::L2);
    for j in 0..traj.times.len() {
        let u = traj.ungauged(j);
        let expect = (-traj.times[j]).exp() * a;
        assert!((norm(&u, NormSpec::L2) - expect).abs() <= 1e-12 * expect);
    }
    // pullback of a free flow never moves
    let s0 = traj.monitors.sigma_pullback[0];
    assert!(traj.monitors.sigma_pullback.iter().all(|s| (s - s0).abs() <= 1e-13 * s0));
    let report = decay_check(&traj, Mode::Sigma).unwrap();
    assert!(report.ratio.iter().all(|r| (r - s0).abs() <= 1e-13 * s0));
}

#[test]
fn zero_run_is_zero() {
    let g = Grid::new(1, 128, 32.0).unwrap();
    let traj = simulate(&Field::zeros(&g, Space::Physical), &cubic(), &run(1.0, 0.01)).unwrap();
    assert!(traj.states.iter().all(Field::is_zero));
    assert!(traj.monitors.l2.iter().chain(&traj.monitors.linf).all(|m| *m == 0.0));
    assert_eq!(decay_check(&traj, Mode::Sigma).unwrap().sup(), 0.0);
}

#[test]
fn records_at_cadence_and_final_time() {
    let g = Grid::new(1, 128, 32.0).unwrap();
    let spec = RunSpec {
        final_time: 1.05,
        dt: 0.01,
        cadence: 0.2,
        m11: None,
    };
    let traj = simulate(&gaussian(&g, 0.1), &cubic(), &spec).unwrap();
    assert_eq!(traj.times.len(), 7);
    assert!((traj.final_time() - 1.05).abs() < 1e-12);
    assert!((traj.times[5] - 1.0).abs() < 1e-12);
    let bad = RunSpec {
        cadence: 0.015,
        ..spec
    };
    assert!(simulate(&gaussian(&g, 0.1), &cubic(), &bad).is_err());
}

#[test]
fn hypotheses_are_validated() {
    let even = ModelParams::new(1, 2.0, 1.0, Nonlinearity::Defocusing);
    match even.validate_for(Mode::M11) {
        Err(Error::Hypothesis(msg)) => assert!(msg.contains("odd"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(even.validate_for(Mode::Sigma).is_ok());
    let planar = ModelParams::new(2, 2.0, 1.0, Nonlinearity::Defocusing);
    assert!(matches!(planar.validate_for(Mode::Sigma), Err(Error::Hypothesis(_))));
    assert!(ModelParams::new(2, 2.5, 1.0, Nonlinearity::Defocusing).validate_for(Mode::Sigma).is_ok());
    assert!(ModelParams::new(1, 1.0, 1.0, Nonlinearity::Defocusing).validate().is_err());
    assert!(ModelParams::new(1, 3.0, 0.0, Nonlinearity::Defocusing).validate().is_err());
}

/// Integrating-factor RK4 for the undamped-gauge form
/// `i∂_t u + Δu + iau = μ|u|^{p-1}u`, written for `ŵ = e^{(it|ξ|² + at)} û`.
fn rk4_original(u0: &Field, params: &ModelParams, t_end: f64, dt: f64) -> Field {
    let grid = u0.grid().clone();
    let xi2: Vec<f64> = grid.axis_frequencies().iter().map(|k| k * k).collect();
    let a = params.damping;
    let mu = params.nonlinearity.sign();
    let p = params.power;
    let rhs = |t: f64, w: &[Complex64]| -> Vec<Complex64> {
        let u_hat: Vec<Complex64> = w
            .iter()
            .zip(&xi2)
            .map(|(z, k2)| z * Complex64::from_polar((-a * t).exp(), -t * k2))
            .collect();
        let u = fourier_transform(&Field::new(grid.clone(), Space::Frequency, u_hat).unwrap(), Direction::Inverse).unwrap();
        let f = u.map(|z| z * z.norm().powf(p - 1.0));
        let f_hat = fourier_transform(&f, Direction::Forward).unwrap();
        f_hat
            .samples()
            .iter()
            .zip(&xi2)
            .map(|(z, k2)| -Complex64::i() * mu * z * Complex64::from_polar((a * t).exp(), t * k2))
            .collect()
    };
    let mut w = fourier_transform(u0, Direction::Forward).unwrap().into_samples();
    let steps = (t_end / dt).round() as usize;
    for j in 0..steps {
        let t = j as f64 * dt;
        let axpy = |x: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> {
            x.iter().zip(k).map(|(a, b)| a + b * h).collect()
        };
        let k1 = rhs(t, &w);
        let k2 = rhs(t + dt / 2.0, &axpy(&w, &k1, dt / 2.0));
        let k3 = rhs(t + dt / 2.0, &axpy(&w, &k2, dt / 2.0));
        let k4 = rhs(t + dt, &axpy(&w, &k3, dt));
        for i in 0..w.len() {
            w[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
    let u_hat: Vec<Complex64> = w
        .iter()
        .zip(&xi2)
        .map(|(z, k2)| z * Complex64::from_polar((-a * t_end).exp(), -t_end * k2))
        .collect();
    fourier_transform(&Field::new(grid, Space::Frequency, u_hat).unwrap(), Direction::Inverse).unwrap()
}

#[test]
fn gauge_consistency_against_direct_integration() {
    let g = Grid::new(1, 512, 64.0).unwrap();
    let params = ModelParams::new(1, 3.0, 1.0, Nonlinearity::Defocusing);
    let u0 = gaussian(&g, 0.8);
    let traj = simulate(&u0, &params, &run(2.0, 1e-3)).unwrap();
    for t in [1.0, 2.0] {
        let direct = rk4_original(&u0, &params, t, 1e-3);
        let gauged = traj.ungauged(traj.index_near(t));
        let err = rel_l2(gauged.samples(), direct.samples());
        assert!(err < 1e-6, "t = {t}: {err:e}");
    }
}

#[test]
fn small_data_monitor_is_bounded_and_self_converged() {
    let params = Reference::params();
    let coarse_grid = Grid::new(1, 4096, 256.0).unwrap();
    let fine_grid = Grid::new(1, 8192, 256.0).unwrap();
    let coarse = simulate(&gaussian(&coarse_grid, 0.1), &params, &run(10.0, 1e-3)).unwrap();
    let fine = simulate(&gaussian(&fine_grid, 0.1), &params, &run(10.0, 5e-4)).unwrap();
    assert_eq!(coarse.times.len(), fine.times.len());
    // ‖u‖_∞ ⟨t⟩^{1/2} e^{at} = ‖v‖_∞ ⟨t⟩^{1/2}
    let monitor = |traj: &dnlslab_core::solver::Trajectory| -> Vec<f64> {
        traj.times
            .iter()
            .zip(&traj.monitors.linf)
            .map(|(t, m)| m * (1.0 + t * t).sqrt().sqrt())
            .collect()
    };
    let (mc, mf) = (monitor(&coarse), monitor(&fine));
    let sup = mc.iter().cloned().fold(0.0, f64::max);
    assert!(sup.is_finite() && sup < 0.2, "{sup}");
    for (a, b) in mc.iter().zip(&mf) {
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
    // late-time plateau: the monitor settles as the solution disperses
    let late = &mc[mc.len() - 20..];
    let (lo, hi) = late.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
    assert!(hi / lo - 1.0 < 0.02, "{lo} {hi}");
}

#[test]
fn sigma_decay_check_settles() {
    let grid = Reference::grid();
    let traj = simulate(&gaussian(&grid, 0.1), &Reference::params(), &run(10.0, 1e-3)).unwrap();
    let report = decay_check(&traj, Mode::Sigma).unwrap();
    assert!(report.sup().is_finite());
    let growth = report.growth(5.0, 10.0);
    assert!(growth < 0.05, "{growth}");
}

#[test]
fn picard_fixed_point_matches_splitting() {
    let g = Grid::new(1, 1024, 64.0).unwrap();
    let params = cubic();
    let u0 = gaussian(&g, 0.3);
    let opts = PicardOptions {
        iterations: 8,
        horizon: 1.0,
        dt: 0.002,
        norm: WorkingNorm::Spectral(NormSpec::L2),
        residual_every: 5,
    };
    let report = picard_iterate(&u0, &params, &opts).unwrap();
    assert_eq!(report.iterates.len(), 9);
    assert_eq!(report.residuals.len(), 8);
    assert!(report.contraction_factor < 1.0);
    let traj = simulate(&u0, &params, &run(1.0, 1e-3)).unwrap();
    let fixed = report.iterates.last().unwrap();
    let err = rel_l2(fixed.samples(), traj.states.last().unwrap().samples());
    assert!(err <= 1e-4, "{err:e}");
}

#[test]
fn picard_reports_divergence() {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let params = ModelParams::new(1, 3.0, 0.1, Nonlinearity::Focusing);
    let opts = PicardOptions {
        iterations: 4,
        horizon: 4.0,
        dt: 0.01,
        norm: WorkingNorm::Spectral(NormSpec::L2),
        residual_every: 10,
    };
    let report = picard_iterate(&gaussian(&g, 4.0), &params, &opts).unwrap();
    assert!(report.contraction_factor > 1.0, "{:?}", report.residuals);
    assert!(report.residuals.iter().all(|r| r.is_finite()));
}
