//! Scattering-state extraction, the error curve `E(t) = ‖v(t) - e^{itΔ}φ‖`,
//! its leading profile, and rate fitting.
//!
//! Everything here works in gauged variables: for `v = e^{at}u` the
//! ungauged error is `e^{-at}E(t)`, so a gauged decay `t^{-γ}e^{-a(p-1)t}`
//! is the ungauged `t^{-γ}e^{-apt}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gamma::upper_gamma_scaled;
use crate::modspace::{power_nonlinearity, M11Estimator, WindowSpec};
use crate::propagators::free_propagate;
use crate::solver::{ModelParams, Mode, Trajectory};
use crate::spectral::{fourier_transform, norm, Direction, Field, NormSpec};

/// Fraction of the extraction time up to which the error curve is trusted.
pub const DEFAULT_TRUST_FRACTION: f64 = 0.5;

/// `e^{-itΔ} v(t)`; the limit as `t → ∞` is the scattering state.
pub fn pullback_state(v: &Field, t: f64) -> Result<Field> {
    free_propagate(v, -t)
}

#[derive(Debug, Clone)]
pub struct ScatteringState {
    pub phi: Field,
    pub extraction_time: f64,
    /// `‖φ_T - φ_{T/2}‖ / ‖φ_T‖` in the working norm of `mode` (zero for `φ = 0`).
    pub cauchy_gap: f64,
    pub mode: Mode,
}

fn working_norm(f: &Field, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Sigma => Ok(norm(f, NormSpec::Sigma)),
        Mode::M11 => M11Estimator::full(f.grid(), WindowSpec::default()).estimate(f),
    }
}

/// Pulls back the final state and certifies it with the relative Cauchy gap
/// against the pullback at half the final time.
pub fn extract_phi(traj: &Trajectory, mode: Mode, tol: f64) -> Result<ScatteringState> {
    let last = traj.times.len() - 1;
    let t_end = traj.times[last];
    let mid = traj.index_near(t_end / 2.0);
    let phi = pullback_state(&traj.states[last], t_end)?;
    let earlier = pullback_state(&traj.states[mid], traj.times[mid])?;
    let size = working_norm(&phi, mode)?;
    let gap = if size == 0.0 {
        0.0
    } else {
        working_norm(&phi.sub(&earlier)?, mode)? / size
    };
    if !(gap <= tol) {
        return Err(Error::NotConverged { gap, tol });
    }
    Ok(ScatteringState {
        phi,
        extraction_time: t_end,
        cauchy_gap: gap,
        mode,
    })
}

/// `∫_t^∞ s^α e^{-βs} ds = β^{-(α+1)} Γ(α+1, βt)`.
pub fn tail_integral(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    let r = tail_ratio(alpha, beta, t)?;
    Ok(r * (alpha * t.ln() - beta * t).exp())
}

/// `∫_t^∞ s^α e^{-βs} ds / (t^α e^{-βt})`, computed without forming either
/// exponentially small factor.
pub fn tail_ratio(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    if !(beta > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail integral needs β > 0 and t > 0, got β = {beta}, t = {t}"
        )));
    }
    // Γ(α+1, βt) = (βt)^{α+1} e^{-βt} S
    Ok(t * upper_gamma_scaled(alpha + 1.0, beta * t)?)
}

/// `r(t) = ∫_t^∞ s^α e^{-βs} ds / (t^α e^{-βt})` on each grid time; `r → 1/β`.
pub fn elemlem_check(alpha: f64, beta: f64, times: &[f64]) -> Result<Vec<f64>> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be increasing".into()));
    }
    times.iter().map(|&t| tail_ratio(alpha, beta, t)).collect()
}

/// `‖|φ̂|^p‖_{L²}`, the size of the leading profile `F(φ̂)`.
pub fn profile_norm(phi: &Field, power: f64) -> Result<f64> {
    let spectrum = fourier_transform(phi, Direction::Forward)?;
    Ok(norm(&power_nonlinearity(&spectrum, power), NormSpec::L2))
}

/// Constant `2^{-n(p-1)/2}` from `|(2is)^{-n/2}|^{p-1}` in the dilation.
pub fn dilation_constant(params: &ModelParams) -> f64 {
    2f64.powf(-params.dispersive_exponent())
}

/// `‖I₂(t)‖_{L²} = 2^{-n(p-1)/2} ∫_t^∞ e^{-a(p-1)s} s^{-n(p-1)/2} ds · ‖|φ̂|^p‖_{L²}`.
pub fn i2_norm(phi: &Field, t: f64, params: &ModelParams) -> Result<f64> {
    let tail = tail_integral(-params.dispersive_exponent(), params.gauge_rate(), t)?;
    Ok(dilation_constant(params) * tail * profile_norm(phi, params.power)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub norm_spec: NormSpec,
}

impl ErrorCurve {
    /// `e^{-at}E(t)`, the error of the undamped-variable solution `u`.
    pub fn ungauged(&self, damping: f64) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(t, e)| (-damping * t).exp() * e)
            .collect()
    }

    /// Samples with `lo ≤ t ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo - 1e-9 && **t <= hi + 1e-9)
            .map(|(t, e)| (*t, *e))
            .unzip()
    }
}

/// `E(t_j) = ‖v(t_j) - e^{it_jΔ}φ‖` at every record up to
/// `trust · extraction_time`.
pub fn error_curve(traj: &Trajectory, phi: &ScatteringState, spec: NormSpec, trust: f64) -> Result<ErrorCurve> {
    let cutoff = trust * phi.extraction_time;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, v) in traj.times.iter().zip(&traj.states) {
        if *t > cutoff + 1e-9 {
            break;
        }
        let linear = free_propagate(&phi.phi, *t)?;
        times.push(*t);
        values.push(norm(&v.sub(&linear)?, spec));
    }
    Ok(ErrorCurve {
        times,
        values,
        norm_spec: spec,
    })
}

/// Fitted `E(t) ≈ C t^{-γ} e^{-δt}` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub c: f64,
    pub gamma: f64,
    pub delta: f64,
    /// RMS misfit of `log E`.
    pub residual: f64,
    /// Largest misfit of `log E` over the window.
    pub max_deviation: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

impl RateFit {
    pub fn model(&self, t: f64) -> f64 {
        self.c * t.powf(-self.gamma) * (-self.delta * t).exp()
    }
}

/// Least squares for `log E = log C - γ log t - δ t` over `window`.
pub fn fit_rate(curve: &ErrorCurve, window: (f64, f64)) -> Result<RateFit> {
    let (times, values) = curve.window(window.0, window.1);
    fit_samples(&times, &values, window)
}

/// [`fit_rate`] on raw samples.
pub fn fit_samples(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() < 10 {
        return Err(Error::Fit(format!("need at least 10 samples in the window, got {}", times.len())));
    }
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Fit(format!("nonpositive value {bad} in the window")));
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Fit("window must lie in t > 0".into()));
    }
    let m = times.len();
    let design = DMatrix::from_fn(m, 3, |i, j| match j {
        0 => 1.0,
        1 => -times[i].ln(),
        _ => -times[i],
    });
    let rhs = DVector::from_iterator(m, values.iter().map(|v| v.ln()));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let misfit = &design * &coef - &rhs;
    let residual = (misfit.norm_squared() / m as f64).sqrt();
    let max_deviation = misfit.amax();
    Ok(RateFit {
        c: coef[0].exp(),
        gamma: coef[1],
        delta: coef[2],
        residual,
        max_deviation,
        window,
        samples: m,
    })
}

/// Earliest record time from which `|log E - log model| ≤ tol` holds for
/// every later sample of the curve.
pub fn earliest_sandwich_time(curve: &ErrorCurve, fit: &RateFit, tol: f64) -> Option<f64> {
    let mut earliest = None;
    for (t, e) in curve.times.iter().zip(&curve.values).rev() {
        if *t <= 0.0 || *e <= 0.0 || (e.ln() - fit.model(*t).ln()).abs() > tol {
            break;
        }
        earliest = Some(*t);
    }
    earliest
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_integral_elementary_cases() {
        for (beta, t) in [(1.0, 0.5), (2.0, 3.0), (0.5, 10.0)] {
            let v = tail_integral(0.0, beta, t).unwrap();
            let exact = (-beta * t).exp() / beta;
            assert!((v / exact - 1.0).abs() < 1e-13);
        }
        let v = tail_integral(1.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
        assert!(tail_integral(1.0, 0.0, 1.0).is_err());
        assert!(tail_integral(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn elemlem_constant_for_alpha_zero() {
        let r = elemlem_check(0.0, 4.0, &[0.5, 1.0, 10.0, 100.0]).unwrap();
        for v in r {
            assert!((v - 0.25).abs() < 1e-14);
        }
        assert!(elemlem_check(0.0, 1.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn exact_model_recovery() {
        let times: Vec<f64> = (0..40).map(|i| 1.0 + 0.25 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 / t * (-2.0 * t).exp()).collect();
        let fit = fit_samples(&times, &values, (1.0, 10.75)).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-10);
        assert!((fit.gamma - 1.0).abs() < 1e-10);
        assert!((fit.delta - 2.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let times: Vec<f64> = (1..=5).map(f64::from).collect();
        assert!(fit_samples(&times, &[1.0; 5], (1.0, 5.0)).is_err());
        let times: Vec<f64> = (1..=12).map(f64::from).collect();
        let mut values = vec![1.0; 12];
        values[3] = 0.0;
        assert!(matches!(fit_samples(&times, &values, (1.0, 12.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn sandwich_time_scans_from_the_end() {
        let times: Vec<f64> = (1..=20).map(f64::from).collect();
        let mut values: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        values[4] *= 2.0;
        let curve = ErrorCurve {
            times,
            values,
            norm_spec: NormSpec::L2,
        };
        let fit = RateFit {
            c: 1.0,
            gamma: 0.0,
            delta: 1.0,
            residual: 0.0,
            max_deviation: 0.0,
            window: (1.0, 20.0),
            samples: 20,
        };
        assert_eq!(earliest_sandwich_time(&curve, &fit, 0.1), Some(6.0));
    }
}
