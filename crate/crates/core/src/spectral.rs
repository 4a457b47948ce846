//! Periodic grids, fields sampled on them, the unitary Fourier transform and
//! the norm functionals used throughout the crate.
//!
//! The continuum transform is `f̂(ξ) = (2π)^{-n/2} ∫ f(x) e^{-ix·ξ} dx`. On a
//! grid with sample points `x_j = -L/2 + jΔx` and dual points
//! `ξ_k = (k - N/2)Δξ` the Riemann sum of that integral is a DFT up to a
//! checkerboard sign on both sides, so samples of a well-resolved function
//! map onto samples of its continuum transform.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Default cap on the spatial dimension.
pub const DEFAULT_MAX_DIM: usize = 3;

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic sampling of the box `[-L/2, L/2)^n` with `N` points per axis.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
    plans: Plans,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points_per_axis", &self.points)
            .field("box_length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.length == other.length
    }
}

impl Grid {
    /// Builds a grid with the default dimension cap.
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        Self::with_max_dim(dim, points, length, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim(dim: usize, points: usize, length: f64, max_dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if dim > max_dim {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} exceeds the configured cap {max_dim}"
            )));
        }
        if !points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("points per axis must be even, got {points}")));
        }
        if points < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 points per axis, got {points}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        points
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidGrid("grid point count overflows".into()))?;
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        };
        Ok(Self {
            dim,
            points,
            length,
            plans,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn box_length(&self) -> f64 {
        self.length
    }

    /// Δx = L/N.
    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Δξ = 2π/L.
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `Δx^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Quadrature weight `Δξ^n`.
    pub fn dual_cell_volume(&self) -> f64 {
        self.dual_spacing().powi(self.dim as i32)
    }

    /// Largest frequency magnitude on one axis, `NΔξ/2 = π/Δx`.
    pub fn max_frequency(&self) -> f64 {
        self.points as f64 * self.dual_spacing() / 2.0
    }

    /// Sample coordinates along one axis.
    pub fn axis_points(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.points)
            .map(|j| -self.length / 2.0 + j as f64 * dx)
            .collect()
    }

    /// Dual-lattice coordinates along one axis, ascending from `-NΔξ/2`.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let dxi = self.dual_spacing();
        let half = (self.points / 2) as isize;
        (0..self.points as isize)
            .map(|k| (k - half) as f64 * dxi)
            .collect()
    }

    /// The grid whose sample points coincide with this grid's dual lattice.
    pub fn dual(&self) -> Grid {
        Grid {
            dim: self.dim,
            points: self.points,
            length: self.points as f64 * self.dual_spacing(),
            plans: self.plans.clone(),
        }
    }

    /// Splits a flat (row-major, last axis fastest) index into per-axis indices.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis.min(2)] = rem % self.points;
            rem /= self.points;
        }
        out
    }

    /// Per-point sum over axes of `h(axis_value)`, e.g. `|x|²` or `|ξ|²`.
    pub(crate) fn radial_sum(&self, axis: &[f64], h: impl Fn(f64) -> f64) -> Vec<f64> {
        let per_axis: Vec<f64> = axis.iter().map(|&v| h(v)).collect();
        let mut out = vec![0.0; self.len()];
        for_each_multi(self.dim, self.points, |flat, idx| {
            out[flat] = idx.iter().take(self.dim).map(|&i| per_axis[i]).sum();
        });
        out
    }

    /// `|x|²` at every sample point.
    pub fn position_sq(&self) -> Vec<f64> {
        self.radial_sum(&self.axis_points(), |x| x * x)
    }

    /// `|ξ|²` at every dual point.
    pub fn frequency_sq(&self) -> Vec<f64> {
        self.radial_sum(&self.axis_frequencies(), |k| k * k)
    }

    pub(crate) fn forward_plan(&self) -> &dyn Fft<f64> {
        self.plans.forward.as_ref()
    }

    pub(crate) fn inverse_plan(&self) -> &dyn Fft<f64> {
        self.plans.inverse.as_ref()
    }
}

/// Visits every multi-index of an `N^dim` array in row-major order.
pub(crate) fn for_each_multi(dim: usize, len: usize, mut visit: impl FnMut(usize, &[usize; 3])) {
    let total = len.pow(dim as u32);
    let mut idx = [0usize; 3];
    for flat in 0..total {
        visit(flat, &idx);
        for axis in (0..dim).rev() {
            idx[axis] += 1;
            if idx[axis] < len {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Applies a one-dimensional transform along every axis of an `N^dim` array.
pub(crate) fn transform_axes(data: &mut [Complex64], dim: usize, len: usize, fft: &dyn Fft<f64>) {
    debug_assert_eq!(fft.len(), len);
    let total = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // contiguous last axis
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for axis in 0..dim - 1 {
        let stride = len.pow((dim - 1 - axis) as u32);
        let block = stride * len;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, value) in line.iter().enumerate() {
                    data[base + i * stride] = *value;
                }
            }
        }
    }
}

/// Multiplies an `N^dim` array by `Π_axis factor[i_axis]`.
pub(crate) fn apply_separable(data: &mut [Complex64], dim: usize, len: usize, factor: &[Complex64]) {
    match dim {
        1 => data.iter_mut().zip(factor).for_each(|(d, f)| *d *= f),
        _ => for_each_multi(dim, len, |flat, idx| {
            let mut w = factor[idx[0]];
            for &i in idx.iter().take(dim).skip(1) {
                w *= factor[i];
            }
            data[flat] *= w;
        }),
    }
}

fn checkerboard(dim: usize, len: usize, data: &mut [Complex64], scale: f64) {
    // (-1)^{Σ j_a}; for a single axis this is simply the parity of the index
    match dim {
        1 => data.iter_mut().enumerate().for_each(|(j, d)| {
            *d *= if j % 2 == 0 { scale } else { -scale };
        }),
        _ => for_each_multi(dim, len, |flat, idx| {
            let parity: usize = idx.iter().take(dim).sum();
            data[flat] *= if parity.is_multiple_of(2) { scale } else { -scale };
        }),
    }
}

/// Which domain a [`Field`]'s samples live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Frequency,
}

impl Space {
    fn name(self) -> &'static str {
        match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Complex samples on a [`Grid`], tagged with their domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    space: Space,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, space: Space, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("field samples must be finite".into()));
        }
        Ok(Self {
            grid,
            space,
            samples,
        })
    }

    /// Internal constructor for results of finite arithmetic on valid fields.
    pub(crate) fn from_parts(grid: Grid, space: Space, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self {
            grid,
            space,
            samples,
        }
    }

    pub fn zeros(grid: &Grid, space: Space) -> Self {
        Self::from_parts(grid.clone(), space, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Samples `f(x)` at every physical grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        Self::sample_with(grid, Space::Physical, &grid.axis_points(), f)
    }

    /// Samples `g(ξ)` at every dual lattice point.
    pub fn from_frequency_fn(grid: &Grid, g: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        Self::sample_with(grid, Space::Frequency, &grid.axis_frequencies(), g)
    }

    fn sample_with(
        grid: &Grid,
        space: Space,
        axis: &[f64],
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(grid.len());
        let mut coords = vec![0.0; grid.dim()];
        for_each_multi(grid.dim(), grid.points_per_axis(), |_, idx| {
            for (c, &i) in coords.iter_mut().zip(idx.iter()) {
                *c = axis[i];
            }
            samples.push(f(&coords));
        });
        Self::new(grid.clone(), space, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub(crate) fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: expected.name(),
                found: self.space.name(),
            })
        }
    }

    fn expect_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.name(),
                found: other.space.name(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_parts(
            self.grid.clone(),
            self.space,
            self.samples.iter().map(|&z| f(z)).collect(),
        )
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        self.expect_compatible(other)?;
        Ok(Field::from_parts(
            self.grid.clone(),
            self.space,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Reads the samples as a physical field on `grid` (same shape, new coordinates).
    ///
    /// Used to treat a spectrum as a function of ξ on [`Grid::dual`].
    pub fn reinterpret(&self, grid: &Grid, space: Space) -> Result<Field> {
        if grid.dim() != self.grid.dim() || grid.points_per_axis() != self.grid.points_per_axis() {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(grid.clone(), space, self.samples.clone()))
    }
}

/// Unitary Fourier transform with the `(2π)^{-n/2}` convention.
pub fn fourier_transform(f: &Field, direction: Direction) -> Result<Field> {
    let grid = f.grid();
    let (from, to) = match direction {
        Direction::Forward => (Space::Physical, Space::Frequency),
        Direction::Inverse => (Space::Frequency, Space::Physical),
    };
    f.expect_space(from)?;
    let mut data = f.samples.clone();
    transform_in_place(grid, &mut data, direction);
    Ok(Field::from_parts(grid.clone(), to, data))
}

/// In-place version of [`fourier_transform`] on raw samples.
pub(crate) fn transform_in_place(grid: &Grid, data: &mut [Complex64], direction: Direction) {
    let (n, len) = (grid.dim(), grid.points_per_axis());
    let (plan, step) = match direction {
        Direction::Forward => (grid.forward_plan(), grid.spacing()),
        Direction::Inverse => (grid.inverse_plan(), grid.dual_spacing()),
    };
    let mut scale = (step / (2.0 * PI).sqrt()).powi(n as i32);
    // (-1)^{N/2} per axis from the centering of the output index
    if (len / 2) % 2 == 1 && n % 2 == 1 {
        scale = -scale;
    }
    checkerboard(n, len, data, 1.0);
    transform_axes(data, n, len, plan);
    checkerboard(n, len, data, scale);
}

/// Norm functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    L1,
    L2,
    Linf,
    /// `‖⟨ξ⟩^s f̂‖_{L²}`
    Hs(u32),
    /// `‖⟨x⟩^s f‖_{L²}`
    FHs(u32),
    /// `max(H^s, FH^s)` with `s = [n/2] + 1`.
    Sigma,
}

/// Regularity index of the Σ space, `[n/2] + 1`.
pub fn sigma_index(dim: usize) -> u32 {
    (dim / 2 + 1) as u32
}

/// Discretized norm of `f`. Frequency-space fields are measured with the dual
/// weight for `L1`/`L2`/`Linf` and transformed back for the Sobolev norms.
pub fn norm(f: &Field, spec: NormSpec) -> f64 {
    let grid = f.grid();
    let weight = match f.space() {
        Space::Physical => grid.cell_volume(),
        Space::Frequency => grid.dual_cell_volume(),
    };
    match spec {
        NormSpec::L1 => f.samples.iter().map(|z| z.norm()).sum::<f64>() * weight,
        NormSpec::L2 => (f.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * weight).sqrt(),
        NormSpec::Linf => f.samples.iter().map(|z| z.norm()).fold(0.0, f64::max),
        NormSpec::Hs(s) => {
            let spectrum = match f.space() {
                Space::Physical => fourier_transform(f, Direction::Forward).expect("physical field"),
                Space::Frequency => f.clone(),
            };
            weighted_l2(&spectrum, &grid.frequency_sq(), s, grid.dual_cell_volume())
        }
        NormSpec::FHs(s) => {
            let physical = match f.space() {
                Space::Physical => f.clone(),
                Space::Frequency => fourier_transform(f, Direction::Inverse).expect("frequency field"),
            };
            weighted_l2(&physical, &grid.position_sq(), s, grid.cell_volume())
        }
        NormSpec::Sigma => {
            let s = sigma_index(grid.dim());
            norm(f, NormSpec::Hs(s)).max(norm(f, NormSpec::FHs(s)))
        }
    }
}

fn weighted_l2(f: &Field, radius_sq: &[f64], s: u32, weight: f64) -> f64 {
    let sum: f64 = f
        .samples
        .iter()
        .zip(radius_sq)
        .map(|(z, &r2)| z.norm_sqr() * (1.0 + r2).powi(s as i32))
        .sum();
    (sum * weight).sqrt()
}
