//! Time integration of the gauged equation
//! `i∂_t v + Δv = μ e^{-a(p-1)t} |v|^{p-1} v`, `v = e^{at} u`, by Strang
//! splitting, plus the Picard iteration of its Duhamel form.
//!
//! Both substeps are exact flows: the kinetic half-steps are the Fourier
//! multiplier `e^{-iτ|ξ|²}`, and the nonlinear substep is a pointwise phase
//! rotation since `|v|` is constant along it. The discrete `L²` norm of `v` is
//! therefore conserved to rounding.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modspace::{modulus_power, M11Estimator};
use crate::propagators::{kinetic_factor, propagate_in_place};
use crate::spectral::{
    apply_separable, norm, sigma_index, transform_in_place, Direction, Field, Grid, NormSpec,
    Space,
};

/// Which scattering setting a run is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Data and solution in the Feichtinger algebra `M^{1,1}`.
    M11,
    /// Data and solution in `Σ = H^{[n/2]+1} ∩ FH^{[n/2]+1}`.
    Sigma,
}

/// Sign of the nonlinearity. `Off` drops it entirely (linear flow).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Defocusing,
    Focusing,
    Off,
}

impl Nonlinearity {
    pub fn sign(self) -> f64 {
        match self {
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Focusing => -1.0,
            Nonlinearity::Off => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub dim: usize,
    pub power: f64,
    pub damping: f64,
    pub nonlinearity: Nonlinearity,
    /// Margin ε in the decay hypothesis on `‖u(t)‖_{M^{1,1}}`.
    pub margin: f64,
}

impl ModelParams {
    /// Parameters with ε defaulting to `0.01·a`.
    pub fn new(dim: usize, power: f64, damping: f64, nonlinearity: Nonlinearity) -> Self {
        Self {
            dim,
            power,
            damping,
            nonlinearity,
            margin: 0.01 * damping,
        }
    }

    pub fn is_odd_power(&self) -> bool {
        self.power.fract() == 0.0 && (self.power as i64) % 2 == 1
    }

    /// `a(p-1)`, the decay rate of the gauged coefficient.
    pub fn gauge_rate(&self) -> f64 {
        self.damping * (self.power - 1.0)
    }

    /// `(ap + ε)/(2p - 1)`.
    pub fn hypothesis_rate(&self) -> f64 {
        (self.damping * self.power + self.margin) / (2.0 * self.power - 1.0)
    }

    /// `n(p-1)/2`, the algebraic part of the sharp rate.
    pub fn dispersive_exponent(&self) -> f64 {
        self.dim as f64 * (self.power - 1.0) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(self.power > 1.0 && self.power.is_finite()) {
            return Err(Error::InvalidArgument(format!("power p must exceed 1, got {}", self.power)));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(Error::InvalidArgument(format!("damping a must be positive, got {}", self.damping)));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidArgument(format!("margin must be nonnegative, got {}", self.margin)));
        }
        Ok(())
    }

    /// Checks the power against the hypothesis of the given setting.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        self.validate()?;
        match mode {
            Mode::M11 if !self.is_odd_power() => Err(Error::Hypothesis(format!(
                "M11 setting requires p to be an odd integer, got p = {}",
                self.power
            ))),
            Mode::Sigma
                if !self.is_odd_power() && self.power <= sigma_index(self.dim) as f64 =>
            {
                Err(Error::Hypothesis(format!(
                    "Sigma setting requires p odd or p > [n/2]+1 = {}, got p = {}",
                    sigma_index(self.dim),
                    self.power
                )))
            }
            _ => Ok(()),
        }
    }
}

/// `∫_t^{t+dt} e^{-cs} ds` with `c = a(p-1)`.
pub fn phase_weight(rate: f64, t: f64, dt: f64) -> f64 {
    if rate == 0.0 {
        return dt;
    }
    (-rate * t).exp() * -(-rate * dt).exp_m1() / rate
}

fn apply_nonlinear_phase(data: &mut [Complex64], params: &ModelParams, weight: f64) {
    let mu = params.nonlinearity.sign();
    if mu == 0.0 || weight == 0.0 {
        return;
    }
    let q = params.power - 1.0;
    for z in data.iter_mut() {
        let phase = -mu * modulus_power(*z, q) * weight;
        *z *= Complex64::from_polar(1.0, phase);
    }
}

/// One Strang step `K(dt/2) ∘ N_{[t, t+dt]} ∘ K(dt/2)` of the gauged flow.
pub fn strang_step(v: &Field, t: f64, dt: f64, params: &ModelParams) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    v.expect_space(Space::Physical)?;
    let grid = v.grid();
    let mut data = v.samples().to_vec();
    propagate_in_place(grid, &mut data, dt / 2.0);
    apply_nonlinear_phase(&mut data, params, phase_weight(params.gauge_rate(), t, dt));
    propagate_in_place(grid, &mut data, dt / 2.0);
    Ok(Field::from_parts(grid.clone(), Space::Physical, data))
}

/// Strang stepping carried in the interaction picture `ŵ = F(e^{-itΔ} v)`.
///
/// With `t_m = t + dt/2` and `z = e^{it_mΔ} w` (the state after the first
/// kinetic half-step), the step `K(dt/2) N K(dt/2)` is exactly
/// `w ← w + e^{-it_mΔ}[z(e^{iθ} - 1)]`. Only the small nonlinear increment is
/// transformed, so rounding does not build up in `w` along the free flow.
struct Stepper<'a> {
    grid: &'a Grid,
    params: &'a ModelParams,
    dt: f64,
    /// `ŵ`
    spectrum: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &'a Grid, params: &'a ModelParams, dt: f64, u0: &Field) -> Self {
        let mut spectrum = u0.samples().to_vec();
        transform_in_place(grid, &mut spectrum, Direction::Forward);
        Self {
            grid,
            params,
            dt,
            work: vec![Complex64::new(0.0, 0.0); spectrum.len()],
            spectrum,
        }
    }

    /// `v(t) = e^{itΔ} w` in physical space.
    fn state(&self, t: f64) -> Vec<Complex64> {
        let mut data = self.spectrum.clone();
        apply_separable(&mut data, self.grid.dim(), self.grid.points_per_axis(), &kinetic_factor(self.grid, t));
        transform_in_place(self.grid, &mut data, Direction::Inverse);
        data
    }

    /// `e^{-itΔ} v(t) = w` in physical space.
    fn pullback(&self) -> Vec<Complex64> {
        let mut data = self.spectrum.clone();
        transform_in_place(self.grid, &mut data, Direction::Inverse);
        data
    }

    fn step(&mut self, t: f64) -> bool {
        let mu = self.params.nonlinearity.sign();
        let weight = phase_weight(self.params.gauge_rate(), t, self.dt);
        if mu == 0.0 || weight == 0.0 {
            return true;
        }
        let (n, len) = (self.grid.dim(), self.grid.points_per_axis());
        let mid = t + 0.5 * self.dt;
        self.work.copy_from_slice(&self.spectrum);
        apply_separable(&mut self.work, n, len, &kinetic_factor(self.grid, mid));
        transform_in_place(self.grid, &mut self.work, Direction::Inverse);
        let q = self.params.power - 1.0;
        for z in self.work.iter_mut() {
            let theta = -mu * modulus_power(*z, q) * weight;
            let half = 0.5 * theta;
            // e^{iθ} - 1 without cancellation
            let rotor = Complex64::new(-2.0 * half.sin().powi(2), theta.sin());
            *z *= rotor;
        }
        transform_in_place(self.grid, &mut self.work, Direction::Forward);
        apply_separable(&mut self.work, n, len, &kinetic_factor(self.grid, -mid));
        let mut finite = true;
        for (w, d) in self.spectrum.iter_mut().zip(&self.work) {
            *w += d;
            finite &= w.re.is_finite() && w.im.is_finite();
        }
        finite
    }
}

/// Time grid and monitoring choices for [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub final_time: f64,
    pub dt: f64,
    /// Interval between recorded states; must be a whole number of steps.
    pub cadence: f64,
    /// Estimator for the `M^{1,1}` monitor; `None` skips it.
    pub m11: Option<M11Estimator>,
}

/// Monitored norms of the gauged solution `v(t_j)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitors {
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    /// `‖v‖_{H^{[n/2]+1}}`
    pub sobolev: Vec<f64>,
    /// `‖e^{-itΔ} v(t)‖_Σ = e^{at}‖e^{-itΔ} u(t)‖_Σ`
    pub sigma_pullback: Vec<f64>,
    /// Lattice estimate of `‖v(t)‖_{M^{1,1}}`.
    pub m11: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ModelParams,
    pub grid: Grid,
    pub times: Vec<f64>,
    /// Gauged states `v(t_j)`.
    pub states: Vec<Field>,
    pub monitors: Monitors,
}

impl Trajectory {
    /// `u(t_j) = e^{-at_j} v(t_j)`.
    pub fn ungauged(&self, j: usize) -> Field {
        let c = (-self.params.damping * self.times[j]).exp();
        self.states[j].scale(Complex64::new(c, 0.0))
    }

    /// Index of the recorded time closest to `t`.
    pub fn index_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (j, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = j;
            }
        }
        best
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one record")
    }
}

fn whole_steps(span: f64, dt: f64, what: &str) -> Result<usize> {
    let steps = (span / dt).round();
    if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span.abs().max(dt) {
        return Err(Error::InvalidArgument(format!(
            "{what} {span} is not a whole number of steps of {dt}"
        )));
    }
    Ok(steps as usize)
}

fn record(traj: &mut Trajectory, t: f64, stepper: &Stepper<'_>, m11: Option<&M11Estimator>) -> Result<()> {
    let v = Field::from_parts(traj.grid.clone(), Space::Physical, stepper.state(t));
    let pulled = Field::from_parts(traj.grid.clone(), Space::Physical, stepper.pullback());
    let s = sigma_index(traj.grid.dim());
    traj.monitors.l2.push(norm(&v, NormSpec::L2));
    traj.monitors.linf.push(norm(&v, NormSpec::Linf));
    traj.monitors.sobolev.push(norm(&v, NormSpec::Hs(s)));
    traj.monitors.sigma_pullback.push(norm(&pulled, NormSpec::Sigma));
    if let (Some(est), Some(series)) = (m11, traj.monitors.m11.as_mut()) {
        series.push(est.estimate(&v)?);
    }
    traj.times.push(t);
    traj.states.push(v);
    Ok(())
}

/// Integrates from `v(0) = u0` to `run.final_time`, recording states and
/// monitors every `run.cadence` (and at the final time).
///
/// A non-finite sample aborts with [`Error::BlowUp`] carrying the last time at
/// which the state was finite.
pub fn simulate(u0: &Field, params: &ModelParams, run: &RunSpec) -> Result<Trajectory> {
    params.validate()?;
    u0.expect_space(Space::Physical)?;
    if !(run.dt > 0.0) || !(run.final_time > 0.0) {
        return Err(Error::InvalidArgument("final time and step must be positive".into()));
    }
    let steps = whole_steps(run.final_time, run.dt, "final time")?;
    let every = whole_steps(run.cadence, run.dt, "monitor cadence")?;
    let grid = u0.grid().clone();
    let mut traj = Trajectory {
        params: *params,
        grid: grid.clone(),
        times: Vec::new(),
        states: Vec::new(),
        monitors: Monitors {
            m11: run.m11.map(|_| Vec::new()),
            ..Monitors::default()
        },
    };
    let mut stepper = Stepper::new(&grid, params, run.dt, u0);
    record(&mut traj, 0.0, &stepper, run.m11.as_ref())?;
    for j in 0..steps {
        let t = j as f64 * run.dt;
        if !stepper.step(t) {
            return Err(Error::BlowUp { last_good_time: t });
        }
        if (j + 1) % every == 0 || j + 1 == steps {
            record(&mut traj, (j + 1) as f64 * run.dt, &stepper, run.m11.as_ref())?;
        }
    }
    Ok(traj)
}

/// Norm in which Picard residuals are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WorkingNorm {
    Spectral(NormSpec),
    M11(M11Estimator),
}

impl WorkingNorm {
    fn measure(&self, f: &Field) -> Result<f64> {
        match self {
            WorkingNorm::Spectral(spec) => Ok(norm(f, *spec)),
            WorkingNorm::M11(est) => est.estimate(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    /// Number of applications of the Duhamel map.
    pub iterations: usize,
    pub horizon: f64,
    pub dt: f64,
    pub norm: WorkingNorm,
    /// Residuals are sampled every this many time steps (and at the horizon).
    pub residual_every: usize,
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    /// `v^{(k)}` at the horizon, `k = 0..=K`; empty after divergence.
    pub iterates: Vec<Field>,
    /// `sup_t ⟨t⟩^{-n/2} ‖v^{(k+1)}(t) - v^{(k)}(t)‖`, `k = 0..K`.
    pub residuals: Vec<f64>,
    /// Geometric mean of successive residual ratios above the rounding floor.
    /// Values above one are reported as-is.
    pub contraction_factor: f64,
    /// The successive ratios `residuals[k+1] / residuals[k]` above the floor.
    pub ratios: Vec<f64>,
    /// Time at which an iterate stopped being finite; residuals cover the
    /// horizon up to that point and the factor is reported as infinite.
    pub diverged_at: Option<f64>,
}

impl PicardReport {
    /// Geometric mean of the first `count` residual ratios.
    pub fn factor_over(&self, count: usize) -> Option<f64> {
        if count == 0 || count > self.ratios.len() {
            return None;
        }
        let log_sum: f64 = self.ratios[..count].iter().map(|r| r.ln()).sum();
        Some((log_sum / count as f64).exp())
    }
}

/// Iterates `v ↦ Φ(v)`, `Φ(v)(t) = e^{itΔ}u0 - i∫_0^t e^{-a(p-1)s} e^{i(t-s)Δ} F(v(s)) ds`,
/// starting from `v^{(0)}(t) = e^{itΔ} u0`, with the trapezoid rule on step `dt`.
///
/// All iterates are advanced together in time, so memory is `O(K·N^n)`
/// rather than `O(K·steps·N^n)`: iterate `k+1` at time `t_j` only needs the
/// running Duhamel sum of iterate `k` up to `t_j`.
pub fn picard_iterate(u0: &Field, params: &ModelParams, opts: &PicardOptions) -> Result<PicardReport> {
    params.validate()?;
    u0.expect_space(Space::Physical)?;
    if opts.iterations < 2 {
        return Err(Error::InvalidArgument("need at least two Picard iterations".into()));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument("quadrature step must be positive".into()));
    }
    let steps = whole_steps(opts.horizon, opts.dt, "horizon")?;
    let every = opts.residual_every.max(1);
    let grid = u0.grid();
    let (n, len) = (grid.dim(), grid.points_per_axis());
    let levels = opts.iterations + 1;
    let mu = params.nonlinearity.sign();
    let rate = params.gauge_rate();
    let q = params.power - 1.0;

    let mut u0_hat = u0.samples().to_vec();
    transform_in_place(grid, &mut u0_hat, Direction::Forward);

    let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
    // running Duhamel sums for levels 1..=K, and last integrand of levels 0..K
    let mut sums = vec![zero.clone(); levels];
    let mut prev_integrand = vec![zero.clone(); levels];
    let mut residuals = vec![0.0f64; opts.iterations];
    let mut finals = Vec::new();
    let mut current = vec![zero.clone(); levels];
    let mut diverged_at = None;

    for j in 0..=steps {
        let t = j as f64 * opts.dt;
        let forward = kinetic_factor(grid, t);
        let backward = kinetic_factor(grid, -t);
        let decay = (-rate * t).exp();
        // level k-1 closes the trapezoid panel of S_k before level k is evaluated
        for k in 0..levels {
            // v^{(k)}(t) = e^{itΔ}(û0 - i S_k)
            let spec = &mut current[k];
            spec.copy_from_slice(&u0_hat);
            if k > 0 {
                for (s, acc) in spec.iter_mut().zip(&sums[k]) {
                    *s -= Complex64::i() * acc;
                }
            }
            apply_separable(spec, n, len, &forward);
            transform_in_place(grid, spec, Direction::Inverse);
            if k + 1 < levels {
                // integrand e^{-cs} e^{-isΔ} F(v^{(k)}(s)) in frequency space
                let mut g: Vec<Complex64> = spec
                    .iter()
                    .map(|&z| z * (mu * modulus_power(z, q)))
                    .collect();
                transform_in_place(grid, &mut g, Direction::Forward);
                apply_separable(&mut g, n, len, &backward);
                g.iter_mut().for_each(|z| *z *= decay);
                if j > 0 {
                    let half = 0.5 * opts.dt;
                    for ((acc, a), b) in sums[k + 1].iter_mut().zip(&prev_integrand[k]).zip(&g) {
                        *acc += (a + b) * half;
                    }
                }
                prev_integrand[k] = g;
            }
        }
        if current.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            // divergence is a valid outcome; keep what was measured before it
            diverged_at = Some(t);
            break;
        }
        if j % every == 0 || j == steps {
            let weight = (1.0 + t * t).powf(-(n as f64) / 4.0);
            for k in 0..opts.iterations {
                // v^{(k+1)} - v^{(k)} = e^{itΔ}(-i(S_{k+1} - S_k)), formed before
                // transforming so the difference does not cancel in physical space
                let mut diff: Vec<Complex64> = sums[k + 1]
                    .iter()
                    .zip(&sums[k])
                    .map(|(a, b)| -Complex64::i() * (a - b))
                    .collect();
                apply_separable(&mut diff, n, len, &forward);
                transform_in_place(grid, &mut diff, Direction::Inverse);
                let d = opts
                    .norm
                    .measure(&Field::from_parts(grid.clone(), Space::Physical, diff))?;
                residuals[k] = residuals[k].max(weight * d);
            }
        }
        if j == steps {
            finals = current
                .iter()
                .map(|d| Field::from_parts(grid.clone(), Space::Physical, d.clone()))
                .collect();
        }
    }

    // residuals are differences of Duhamel sums of size ~residuals[0], which
    // are resolved to a few thousand ulps of that size at best
    let floor = 1e3 * f64::EPSILON * residuals[0];
    let mut ratios = Vec::new();
    for w in residuals.windows(2) {
        if w[0] > floor && w[1] > floor && w[0].is_finite() && w[1].is_finite() {
            ratios.push(w[1] / w[0]);
        } else {
            break;
        }
    }
    let contraction_factor = if diverged_at.is_some() {
        f64::INFINITY
    } else if ratios.is_empty() {
        0.0
    } else {
        (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
    };
    Ok(PicardReport {
        iterates: finals,
        residuals,
        contraction_factor,
        ratios,
        diverged_at,
    })
}

/// Monitored quantity divided by its envelope, with its running supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub ratio: Vec<f64>,
    pub running_sup: Vec<f64>,
}

impl DecayReport {
    fn from_series(times: &[f64], ratio: Vec<f64>) -> Self {
        let mut running_sup = Vec::with_capacity(ratio.len());
        let mut best: f64 = 0.0;
        for &r in &ratio {
            best = best.max(r);
            running_sup.push(best);
        }
        Self {
            times: times.to_vec(),
            ratio,
            running_sup,
        }
    }

    pub fn sup(&self) -> f64 {
        self.running_sup.last().copied().unwrap_or(0.0)
    }

    /// Relative increase of the running supremum between the records nearest
    /// `from` and `to`.
    pub fn growth(&self, from: f64, to: f64) -> f64 {
        let at = |t: f64| {
            let j = nearest(&self.times, t);
            self.running_sup[j]
        };
        let (a, b) = (at(from), at(to));
        if a == 0.0 {
            return if b == 0.0 { 0.0 } else { f64::INFINITY };
        }
        b / a - 1.0
    }

    /// Relative increase of the supremum over `[mid, end]` against `[start, mid]`.
    pub fn window_growth(&self, start: f64, end: f64) -> f64 {
        let mid = 0.5 * (start + end);
        let sup_in = |lo: f64, hi: f64| {
            self.times
                .iter()
                .zip(&self.ratio)
                .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
                .map(|(_, r)| *r)
                .fold(0.0, f64::max)
        };
        let (first, second) = (sup_in(start, mid), sup_in(mid, end));
        if first == 0.0 {
            return if second == 0.0 { 0.0 } else { f64::INFINITY };
        }
        second / first - 1.0
    }
}

fn nearest(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (j, &s) in times.iter().enumerate() {
        if (s - t).abs() < (times[best] - t).abs() {
            best = j;
        }
    }
    best
}

fn m11_series(traj: &Trajectory) -> Result<&[f64]> {
    traj.monitors
        .m11
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("trajectory has no M11 monitor".into()))
}

/// Global-existence bounds: `‖u(t)‖_{M^{1,1}} / (⟨t⟩^{n/2} e^{-at})` or
/// `‖e^{-itΔ}u(t)‖_Σ / e^{-at}`, which should stay bounded for small data.
pub fn decay_check(traj: &Trajectory, mode: Mode) -> Result<DecayReport> {
    let n = traj.grid.dim() as f64;
    let ratio = match mode {
        Mode::M11 => m11_series(traj)?
            .iter()
            .zip(&traj.times)
            .map(|(m, t)| m * (1.0 + t * t).powf(-n / 4.0))
            .collect(),
        Mode::Sigma => traj.monitors.sigma_pullback.clone(),
    };
    Ok(DecayReport::from_series(&traj.times, ratio))
}

/// Decay hypotheses of the sharp-rate results:
/// `‖u(t)‖_{M^{1,1}} e^{((ap+ε)/(2p-1))t}` or `‖e^{-itΔ}u(t)‖_Σ e^{at}`.
pub fn hypothesis_check(traj: &Trajectory, mode: Mode) -> Result<DecayReport> {
    let ratio = match mode {
        Mode::M11 => {
            let exponent = traj.params.hypothesis_rate() - traj.params.damping;
            m11_series(traj)?
                .iter()
                .zip(&traj.times)
                .map(|(m, t)| m * (exponent * t).exp())
                .collect()
        }
        Mode::Sigma => traj.monitors.sigma_pullback.clone(),
    };
    Ok(DecayReport::from_series(&traj.times, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::free_propagate;

    fn params() -> ModelParams {
        ModelParams::new(1, 3.0, 1.0, Nonlinearity::Defocusing)
    }

    fn gaussian(grid: &Grid, amp: f64) -> Field {
        Field::from_fn(grid, |x| Complex64::new(amp * (-x[0] * x[0]).exp(), 0.0)).unwrap()
    }

    #[test]
    fn hypotheses_per_mode() {
        let mut p = params();
        assert!(p.validate_for(Mode::M11).is_ok());
        p.power = 4.0;
        let err = p.validate_for(Mode::M11).unwrap_err();
        assert!(err.to_string().contains("odd"));
        // n = 1: [n/2]+1 = 1, so any p > 1 is allowed in Σ
        assert!(p.validate_for(Mode::Sigma).is_ok());
        p.dim = 3;
        p.power = 2.0;
        assert!(p.validate_for(Mode::Sigma).is_err());
        p.power = 2.5;
        assert!(p.validate_for(Mode::Sigma).is_ok());
        p.power = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn default_margin_and_rates() {
        let p = params();
        assert_eq!(p.margin, 0.01);
        assert_eq!(p.gauge_rate(), 2.0);
        assert!((p.hypothesis_rate() - 3.01 / 5.0).abs() < 1e-15);
        assert_eq!(p.dispersive_exponent(), 1.0);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let z = Field::zeros(&g, Space::Physical);
        assert!(strang_step(&z, 0.0, 0.1, &params()).unwrap().is_zero());
    }

    #[test]
    fn linear_step_is_free_propagation() {
        let g = Grid::new(1, 128, 20.0).unwrap();
        let f = gaussian(&g, 1.0);
        let mut p = params();
        p.nonlinearity = Nonlinearity::Off;
        let a = strang_step(&f, 0.3, 0.05, &p).unwrap();
        let b = free_propagate(&f, 0.05).unwrap();
        let err = norm(&a.sub(&b).unwrap(), NormSpec::L2);
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn step_conserves_l2() {
        let g = Grid::new(1, 256, 32.0).unwrap();
        let f = gaussian(&g, 2.0);
        let out = strang_step(&f, 0.0, 0.01, &params()).unwrap();
        let (a, b) = (norm(&f, NormSpec::L2), norm(&out, NormSpec::L2));
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn phase_weight_limits() {
        assert_eq!(phase_weight(0.0, 3.0, 0.25), 0.25);
        // exact antiderivative
        let (c, t, dt): (f64, f64, f64) = (2.0, 0.7, 0.3);
        let exact = ((-c * t).exp() - (-c * (t + dt)).exp()) / c;
        assert!((phase_weight(c, t, dt) - exact).abs() < 1e-16);
        // tiny c·dt: W ≈ dt e^{-ct}
        let w = phase_weight(2.0, 1.0, 1e-9);
        assert!((w / (1e-9 * (-2.0f64).exp()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn whole_step_validation() {
        assert_eq!(whole_steps(16.0, 1e-3, "t").unwrap(), 16000);
        assert!(whole_steps(1.0, 0.3, "t").is_err());
    }

    #[test]
    fn zero_data_run() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let run = RunSpec {
            final_time: 1.0,
            dt: 0.1,
            cadence: 0.5,
            m11: None,
        };
        let traj = simulate(&Field::zeros(&g, Space::Physical), &params(), &run).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0]);
        assert!(traj.states.iter().all(Field::is_zero));
        assert!(traj.monitors.l2.iter().all(|v| *v == 0.0));
        let report = decay_check(&traj, Mode::Sigma).unwrap();
        assert_eq!(report.sup(), 0.0);
        assert!(decay_check(&traj, Mode::M11).is_err());
    }

    #[test]
    fn focusing_blowup_is_caught() {
        // absurd amplitude and step make the phase overflow to NaN
        let g = Grid::new(1, 64, 16.0).unwrap();
        let f = gaussian(&g, 1e200);
        let p = ModelParams::new(1, 3.0, 1.0, Nonlinearity::Focusing);
        let run = RunSpec {
            final_time: 0.2,
            dt: 0.1,
            cadence: 0.1,
            m11: None,
        };
        match simulate(&f, &p, &run) {
            Err(Error::BlowUp { last_good_time }) => assert_eq!(last_good_time, 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn picard_of_zero() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let opts = PicardOptions {
            iterations: 3,
            horizon: 1.0,
            dt: 0.1,
            norm: WorkingNorm::Spectral(NormSpec::L2),
            residual_every: 1,
        };
        let rep = picard_iterate(&Field::zeros(&g, Space::Physical), &params(), &opts).unwrap();
        assert!(rep.residuals.iter().all(|r| *r == 0.0));
        assert!(rep.iterates.iter().all(Field::is_zero));
        assert_eq!(rep.contraction_factor, 0.0);
    }

    #[test]
    fn running_sup_growth() {
        let r = DecayReport::from_series(&[0.0, 1.0, 2.0, 3.0], vec![1.0, 0.5, 1.2, 1.1]);
        assert_eq!(r.running_sup, vec![1.0, 1.0, 1.2, 1.2]);
        assert!((r.growth(0.0, 3.0) - 0.2).abs() < 1e-15);
        assert!((r.window_growth(0.0, 3.0) - 0.2).abs() < 1e-15);
    }
}
