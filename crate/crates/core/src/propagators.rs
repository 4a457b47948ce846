//! The free Schrödinger group `e^{itΔ}` in Fourier-multiplier form and in the
//! factorized form `M(t) D(t) F M(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    apply_separable, fourier_transform, norm, transform_in_place, Direction, Field, Grid,
    NormSpec, Space,
};

/// Spectral magnitude (relative to the peak) below which a mode counts as empty
/// when locating the reach of the dilated profile.
const BAND_THRESHOLD: f64 = 1e-11;

/// `e^{itΔ} f` via the exact multiplier `e^{-it|ξ|²}`.
pub fn free_propagate(f: &Field, t: f64) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    let grid = f.grid();
    let mut data = f.samples().to_vec();
    propagate_in_place(grid, &mut data, t);
    Ok(Field::from_parts(grid.clone(), Space::Physical, data))
}

/// Per-axis factor `e^{-itξ²}` of the free multiplier.
pub(crate) fn kinetic_factor(grid: &Grid, t: f64) -> Vec<Complex64> {
    grid.axis_frequencies()
        .iter()
        .map(|k| Complex64::from_polar(1.0, -t * k * k))
        .collect()
}

pub(crate) fn propagate_in_place(grid: &Grid, data: &mut [Complex64], t: f64) {
    if t == 0.0 {
        return;
    }
    let factor = kinetic_factor(grid, t);
    transform_in_place(grid, data, Direction::Forward);
    apply_separable(data, grid.dim(), grid.points_per_axis(), &factor);
    transform_in_place(grid, data, Direction::Inverse);
}

/// `e^{itΔ} f` sampled on the dilated lattice `x_k = 2tξ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedField {
    base_grid: Grid,
    time: f64,
    samples: Vec<Complex64>,
}

impl DilatedField {
    pub fn base_grid(&self) -> &Grid {
        &self.base_grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Coordinates `2tξ_k` along one axis.
    pub fn axis_points(&self) -> Vec<f64> {
        self.base_grid
            .axis_frequencies()
            .iter()
            .map(|k| 2.0 * self.time * k)
            .collect()
    }

    /// ℓ² norm with the dilated cell volume `(2tΔξ)^n`.
    pub fn l2_norm(&self) -> f64 {
        let cell = (2.0 * self.time * self.base_grid.dual_spacing()).powi(self.base_grid.dim() as i32);
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt()
    }
}

/// `(2it)^{-n/2}` on the principal branch, `(2t)^{-n/2} e^{-inπ/4}`.
pub fn dilation_prefactor(dim: usize, t: f64) -> Complex64 {
    Complex64::from_polar((2.0 * t).powf(-(dim as f64) / 2.0), -(dim as f64) * PI / 4.0)
}

/// Spectrum of `M(t) f` with the chirp `M(t) = e^{i|x|²/(4t)}`.
fn chirped_spectrum(f: &Field, t: f64) -> Result<Field> {
    let grid = f.grid();
    let r2 = grid.position_sq();
    let chirped = Field::from_parts(
        grid.clone(),
        Space::Physical,
        f.samples()
            .iter()
            .zip(&r2)
            .map(|(z, &r)| z * Complex64::from_polar(1.0, r / (4.0 * t)))
            .collect(),
    );
    fourier_transform(&chirped, Direction::Forward)
}

/// `e^{itΔ} f = M(t) D(t) F M(t) f`, evaluated exactly at the points `2tξ_k`
/// where `M(t)` at `x = 2tξ` reduces to `e^{it|ξ|²}`.
pub fn mdfm_propagate(f: &Field, t: f64) -> Result<DilatedField> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation time must be positive, got {t}")));
    }
    f.expect_space(Space::Physical)?;
    let grid = f.grid();
    let spectrum = chirped_spectrum(f, t)?;
    let prefactor = dilation_prefactor(grid.dim(), t);
    let xi2 = grid.frequency_sq();
    let samples = spectrum
        .samples()
        .iter()
        .zip(&xi2)
        .map(|(g, &k2)| g * prefactor * Complex64::from_polar(1.0, t * k2))
        .collect();
    Ok(DilatedField {
        base_grid: grid.clone(),
        time: t,
        samples,
    })
}

/// Largest per-axis `|ξ|` carrying spectral weight above the threshold.
fn spectral_reach(spectrum: &Field) -> f64 {
    let grid = spectrum.grid();
    let peak = spectrum.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let xi = grid.axis_frequencies();
    let mut reach: f64 = 0.0;
    for (flat, z) in spectrum.samples().iter().enumerate() {
        if z.norm() > BAND_THRESHOLD * peak {
            let idx = grid.multi_index(flat);
            for &i in idx.iter().take(grid.dim()) {
                reach = reach.max(xi[i].abs());
            }
        }
    }
    reach
}

/// Contracts one axis of a row-major array of shape `shape` with the matrix
/// whose row `r` is produced by `row`; rows are built one at a time.
fn contract_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    rows: usize,
    row: impl Fn(usize, &mut [Complex64]),
) -> (Vec<Complex64>, Vec<usize>) {
    let cols = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * rows * inner];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); cols];
    for r in 0..rows {
        row(r, &mut coeffs);
        for o in 0..outer {
            for i in 0..inner {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, m) in coeffs.iter().enumerate() {
                    acc += m * data[(o * cols + c) * inner + i];
                }
                out[(o * rows + r) * inner + i] = acc;
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// Evaluates the trigonometric interpolant of a physical field at the tensor
/// product of `points` along every axis.
pub fn trig_interpolate(f: &Field, points: &[f64]) -> Result<Vec<Complex64>> {
    let spectrum = fourier_transform(f, Direction::Forward)?;
    let grid = f.grid();
    let xi = grid.axis_frequencies();
    let w = grid.dual_spacing() / (2.0 * PI).sqrt();
    let row = |r: usize, out: &mut [Complex64]| {
        for (o, &k) in out.iter_mut().zip(&xi) {
            *o = Complex64::from_polar(w, points[r] * k);
        }
    };
    let mut data = spectrum.into_samples();
    let mut shape = vec![grid.points_per_axis(); grid.dim()];
    for axis in 0..grid.dim() {
        let (next, next_shape) = contract_axis(&data, &shape, axis, points.len(), row);
        data = next;
        shape = next_shape;
    }
    Ok(data)
}

/// Max discrepancy between the factorized propagator and the band-limited
/// interpolant of the multiplier propagator, over the dilated points inside
/// the box.
///
/// Fails with [`Error::DilationOutsideBox`] when the dilated profile of `f`
/// reaches past the box, and rejects `t < Δx²/(4π)` where the chirp is not
/// resolved.
pub fn mdfm_consistency(f: &Field, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    f.expect_space(Space::Physical)?;
    let grid = f.grid();
    let min_t = grid.spacing().powi(2) / (4.0 * PI);
    if t < min_t {
        return Err(Error::InvalidArgument(format!(
            "chirp unresolved: t = {t} below Δx²/(4π) = {min_t}"
        )));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let half = grid.box_length() / 2.0;
    let reach = 2.0 * t * spectral_reach(&chirped_spectrum(f, t)?);
    if reach > half {
        return Err(Error::DilationOutsideBox {
            reach,
            half_width: half,
        });
    }
    let dilated = mdfm_propagate(f, t)?;
    let axis = dilated.axis_points();
    let inside: Vec<usize> = (0..axis.len()).filter(|&i| axis[i].abs() <= half).collect();
    let points: Vec<f64> = inside.iter().map(|&i| axis[i]).collect();
    let reference = trig_interpolate(&free_propagate(f, t)?, &points)?;

    let m = inside.len();
    let mut worst: f64 = 0.0;
    let mut counter = vec![0usize; grid.dim()];
    for value in &reference {
        let mut flat = 0;
        for &c in &counter {
            flat = flat * grid.points_per_axis() + inside[c];
        }
        worst = worst.max((value - dilated.samples[flat]).norm());
        for a in (0..grid.dim()).rev() {
            counter[a] += 1;
            if counter[a] < m {
                break;
            }
            counter[a] = 0;
        }
    }
    Ok(worst)
}

/// `‖e^{itΔ}f‖_{L∞} (4πt)^{n/2} / ‖f‖_{L¹}`, which the kernel bound keeps at or below one.
pub fn dispersive_ratio(f: &Field, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    let l1 = norm(f, NormSpec::L1);
    if l1 == 0.0 {
        return Err(Error::ZeroField);
    }
    let evolved = free_propagate(f, t)?;
    let n = f.grid().dim() as f64;
    Ok(norm(&evolved, NormSpec::Linf) * (4.0 * PI * t).powf(n / 2.0) / l1)
}
