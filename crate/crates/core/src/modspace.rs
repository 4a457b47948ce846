//! Short-time Fourier transform, a lattice estimate of the `M^{1,1}` norm, the
//! Kato–Ponce ratio, and the partial sums `f_N = φ Σ_{k≤N} k^{-3/2} e^{ikx₁}`
//! that lie in `M^{1,1}` but not in `H¹`.
//!
//! The `M^{1,1}` estimate is a Riemann sum without certified frame bounds, so
//! its absolute value depends on the window and lattice; comparisons should be
//! made with both held fixed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::{
    for_each_multi, fourier_transform, norm, transform_axes, Direction, Field, Grid, NormSpec,
    Space,
};

/// Relative window amplitude treated as zero when sizing the analysis block.
const WINDOW_CUTOFF: f64 = 1e-16;
/// Energy fraction allowed outside the lattice.
pub const COVERAGE_TOL: f64 = 1e-8;

/// Analysis window, normalized to unit `L²` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    /// `(πσ²)^{-n/4} e^{-|x|²/(2σ²)}`
    Gaussian { sigma: f64 },
    /// Fourier transform `exp(-1/(1-(|ξ|/R)²))` on `|ξ| < R`, zero outside.
    BandLimitedBump { radius: f64 },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Gaussian { sigma: 1.0 }
    }
}

/// The standard bump `exp(-1/(1-r²))` for `r < 1`.
pub fn bump_profile(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

impl WindowSpec {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WindowSpec::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            WindowSpec::BandLimitedBump { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate window {self:?}")))
        }
    }

    /// The window sampled on `grid`, centred at the origin.
    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        self.validate()?;
        let n = grid.dim() as f64;
        match *self {
            WindowSpec::Gaussian { sigma } => {
                let c = (PI * sigma * sigma).powf(-n / 4.0);
                Field::from_fn(grid, |x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    Complex64::new(c * (-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
                })
            }
            WindowSpec::BandLimitedBump { radius } => {
                let inside = (radius / grid.dual_spacing()).floor() as usize;
                if inside < 2 {
                    return Err(Error::InvalidGrid(format!(
                        "dual spacing {} does not resolve a bump of radius {radius}",
                        grid.dual_spacing()
                    )));
                }
                let spectrum = Field::from_frequency_fn(grid, |k| {
                    let r = k.iter().map(|v| v * v).sum::<f64>().sqrt() / radius;
                    Complex64::new(bump_profile(r), 0.0)
                })?;
                let s = norm(&spectrum, NormSpec::L2);
                let physical = fourier_transform(&spectrum, Direction::Inverse)?;
                Ok(physical.scale(Complex64::new(1.0 / s, 0.0)))
            }
        }
    }
}

/// Sampling lattice of phase space: centres every `x_step` within
/// `|x_a| ≤ x_extent` and frequencies every `xi_step` within `|ξ_a| ≤ xi_extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TFLattice {
    pub x_step: f64,
    pub xi_step: f64,
    pub x_extent: f64,
    pub xi_extent: f64,
}

impl TFLattice {
    /// Lattice over the whole box and the whole dual lattice, with spacing
    /// matched to `window`.
    pub fn full(grid: &Grid, window: &WindowSpec) -> Self {
        let dx = grid.spacing();
        let n = grid.points_per_axis();
        let (x_step, block) = match *window {
            WindowSpec::Gaussian { sigma } => {
                let stride = ((0.5 * sigma / dx).round() as usize).max(1);
                let reach = sigma * (-2.0 * WINDOW_CUTOFF.ln()).sqrt();
                let block = ((2.0 * reach / dx).ceil() as usize).next_power_of_two().min(n);
                (stride as f64 * dx, block)
            }
            WindowSpec::BandLimitedBump { radius } => {
                let stride = ((0.25 / radius / dx).round() as usize).max(1);
                (stride as f64 * dx, n)
            }
        };
        TFLattice {
            x_step,
            xi_step: 2.0 * PI / (block as f64 * dx),
            x_extent: grid.box_length() / 2.0,
            xi_extent: grid.max_frequency(),
        }
    }
}

/// Window and lattice bundled for repeated norm estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M11Estimator {
    pub window: WindowSpec,
    pub lattice: TFLattice,
}

impl M11Estimator {
    pub fn full(grid: &Grid, window: WindowSpec) -> Self {
        Self {
            window,
            lattice: TFLattice::full(grid, &window),
        }
    }

    pub fn estimate(&self, f: &Field) -> Result<f64> {
        m11_norm(f, &self.window, &self.lattice)
    }
}

fn energy_outside(values: &[Complex64], grid: &Grid, axis: &[f64], extent: f64) -> f64 {
    let total: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut outside = 0.0;
    for_each_multi(grid.dim(), grid.points_per_axis(), |flat, idx| {
        if idx.iter().take(grid.dim()).any(|&i| axis[i].abs() > extent * (1.0 + 1e-12)) {
            outside += values[flat].norm_sqr();
        }
    });
    outside / total
}

/// Riemann-sum estimate of `∬ |V_g f(x, ξ)| dx dξ`.
///
/// Each lattice centre costs one windowed FFT over a block of `M` samples per
/// axis, where `M = 2π/(xi_step Δx)`. Centres snap to grid points.
pub fn m11_norm(f: &Field, window: &WindowSpec, lattice: &TFLattice) -> Result<f64> {
    f.expect_space(Space::Physical)?;
    let grid = f.grid();
    let (n, len, dx) = (grid.dim(), grid.points_per_axis(), grid.spacing());
    if !(lattice.x_step > 0.0 && lattice.xi_step > 0.0 && lattice.x_extent > 0.0 && lattice.xi_extent > 0.0) {
        return Err(Error::InvalidArgument(format!("degenerate lattice {lattice:?}")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }

    let frac = energy_outside(f.samples(), grid, &grid.axis_points(), lattice.x_extent);
    if frac > COVERAGE_TOL {
        return Err(Error::Coverage { axis: "x", fraction: frac });
    }
    let spectrum = fourier_transform(f, Direction::Forward)?;
    let frac = energy_outside(spectrum.samples(), grid, &grid.axis_frequencies(), lattice.xi_extent);
    if frac > COVERAGE_TOL {
        return Err(Error::Coverage { axis: "xi", fraction: frac });
    }

    let stride = ((lattice.x_step / dx).round() as usize).max(1);
    let mut block = (2.0 * PI / (lattice.xi_step * dx)).round() as usize;
    block += block % 2;
    if block < 2 || block > len {
        return Err(Error::InvalidArgument(format!(
            "xi_step {} implies a {block}-point window block on a {len}-point axis",
            lattice.xi_step
        )));
    }
    let x_step = stride as f64 * dx;
    let xi_step = 2.0 * PI / (block as f64 * dx);

    let g = window.sample(grid)?;
    let g_block = extract_centered_block(&g, block);
    let kept: f64 = g_block.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
    let all = norm(&g, NormSpec::L2).powi(2);
    if 1.0 - kept / all > COVERAGE_TOL {
        return Err(Error::Coverage {
            axis: "window",
            fraction: 1.0 - kept / all,
        });
    }
    let g_conj: Vec<Complex64> = g_block.iter().map(|z| z.conj()).collect();

    let centres = centre_indices(len, stride, lattice.x_extent, dx, grid.box_length());
    let freq_ok: Vec<bool> = (0..block)
        .map(|m| {
            let signed = if m < block / 2 { m as f64 } else { m as f64 - block as f64 };
            (signed * xi_step).abs() <= lattice.xi_extent * (1.0 + 1e-12)
        })
        .collect();

    let fft = FftPlanner::new().plan_fft_forward(block);
    let scale = (dx / (2.0 * PI).sqrt()).powi(n as i32);
    let mut buf = vec![Complex64::new(0.0, 0.0); g_conj.len()];
    let samples = f.samples();
    let mut total = 0.0;
    let c = centres.len();
    let mut centre_counter = vec![0usize; n];
    for _ in 0..c.pow(n as u32) {
        for_each_multi(n, block, |local, idx| {
            let mut flat = 0;
            for a in 0..n {
                let i = (centres[centre_counter[a]] + len + idx[a] - block / 2) % len;
                flat = flat * len + i;
            }
            buf[local] = g_conj[local] * samples[flat];
        });
        transform_axes(&mut buf, n, block, fft.as_ref());
        for_each_multi(n, block, |local, idx| {
            if idx.iter().take(n).all(|&m| freq_ok[m]) {
                total += buf[local].norm();
            }
        });
        for a in (0..n).rev() {
            centre_counter[a] += 1;
            if centre_counter[a] < c {
                break;
            }
            centre_counter[a] = 0;
        }
    }
    Ok(total * scale * (x_step * xi_step).powi(n as i32))
}

/// Per-axis grid indices of the lattice centres.
fn centre_indices(len: usize, stride: usize, extent: f64, dx: f64, box_length: f64) -> Vec<usize> {
    let origin = len / 2;
    if 2.0 * extent >= box_length * (1.0 - 1e-12) {
        // whole periodic box: every stride-th point once
        let count = len.div_ceil(stride);
        return (0..count).map(|m| (origin + m * stride) % len).collect();
    }
    let reach = (extent / (stride as f64 * dx)).floor() as isize;
    (-reach..=reach)
        .map(|m| ((origin as isize + m * stride as isize).rem_euclid(len as isize)) as usize)
        .collect()
}

/// The `block^n` samples of a physical field around the origin.
fn extract_centered_block(f: &Field, block: usize) -> Vec<Complex64> {
    let grid = f.grid();
    let (n, len) = (grid.dim(), grid.points_per_axis());
    let mut out = vec![Complex64::new(0.0, 0.0); block.pow(n as u32)];
    for_each_multi(n, block, |local, idx| {
        let mut flat = 0;
        for &i in idx.iter().take(n) {
            flat = flat * len + (len / 2 + len + i - block / 2) % len;
        }
        out[local] = f.samples()[flat];
    });
    out
}

/// Partial sum `f_N(x) = φ(x) Σ_{k=1}^{N} k^{-3/2} e^{ikx₁}` with `φ` the
/// unit-`L²` band-limited bump.
///
/// The box length must be a multiple of `2π` so that each modulation shifts the
/// spectrum by a whole number of dual cells, and the dual lattice must reach
/// past frequency `N + 1`.
pub fn counterexample_field(grid: &Grid, terms: usize, bump: &WindowSpec) -> Result<Field> {
    let WindowSpec::BandLimitedBump { radius } = *bump else {
        return Err(Error::InvalidArgument("counterexample needs a band-limited bump".into()));
    };
    if terms == 0 {
        return Ok(Field::zeros(grid, Space::Physical));
    }
    let cells = grid.box_length() / (2.0 * PI);
    if (cells - cells.round()).abs() > 1e-9 * cells {
        return Err(Error::InvalidGrid(format!(
            "box length {} is not a multiple of 2π",
            grid.box_length()
        )));
    }
    if grid.max_frequency() < terms as f64 + 1.0 || grid.max_frequency() < terms as f64 + radius + grid.dual_spacing() {
        return Err(Error::InvalidGrid(format!(
            "dual lattice reaches {} but frequency {} is needed",
            grid.max_frequency(),
            terms + 1
        )));
    }
    let phi = bump.sample(grid)?;
    let x = grid.axis_points();
    let series: Vec<Complex64> = x
        .iter()
        .map(|&x1| {
            (1..=terms)
                .map(|k| Complex64::from_polar((k as f64).powf(-1.5), k as f64 * x1))
                .sum()
        })
        .collect();
    let samples = phi
        .samples()
        .iter()
        .enumerate()
        .map(|(flat, p)| p * series[grid.multi_index(flat)[0]])
        .collect();
    Ok(Field::from_parts(grid.clone(), Space::Physical, samples))
}

/// `‖ξ₁ f̂‖²_{L²}`.
pub fn xi1_moment_sq(f: &Field) -> Result<f64> {
    let spectrum = fourier_transform(f, Direction::Forward)?;
    let grid = f.grid();
    let xi = grid.axis_frequencies();
    let mut sum = 0.0;
    for (flat, z) in spectrum.samples().iter().enumerate() {
        let k = xi[grid.multi_index(flat)[0]];
        sum += k * k * z.norm_sqr();
    }
    Ok(sum * grid.dual_cell_volume())
}

/// `|u|^{p-1} u` pointwise.
pub fn power_nonlinearity(u: &Field, p: f64) -> Field {
    u.map(|z| z * modulus_power(z, p - 1.0))
}

/// `|z|^q`, using integer powers of `|z|²` when `q` is an even integer.
pub(crate) fn modulus_power(z: Complex64, q: f64) -> f64 {
    let half = q / 2.0;
    if half.fract() == 0.0 && half.abs() < 64.0 {
        z.norm_sqr().powi(half as i32)
    } else {
        z.norm().powf(q)
    }
}

/// `‖F(u)‖_{H^s} / (‖u‖_{L∞}^{p-1} ‖u‖_{H^s})`.
pub fn kato_ponce_ratio(u: &Field, p: f64, s: u32) -> Result<f64> {
    u.expect_space(Space::Physical)?;
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("power must exceed 1, got {p}")));
    }
    let odd = p.fract() == 0.0 && (p as i64) % 2 == 1;
    if !odd && p <= s as f64 {
        return Err(Error::Hypothesis(format!(
            "p = {p} is neither odd nor larger than s = {s}"
        )));
    }
    let sup = norm(u, NormSpec::Linf);
    if sup == 0.0 {
        return Err(Error::ZeroField);
    }
    let numerator = norm(&power_nonlinearity(u, p), NormSpec::Hs(s));
    Ok(numerator / (sup.powf(p - 1.0) * norm(u, NormSpec::Hs(s))))
}
