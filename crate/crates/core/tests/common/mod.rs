//! Test-only oracles, independent of the library's numerics.
#![allow(dead_code)]

use dnlslab_core::solver::{ModelParams, Nonlinearity, RunSpec};
use dnlslab_core::spectral::{Field, Grid};
use dnlslab_core::Complex64;

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod on `[a, b]` to relative tolerance `tol`.
///
/// Each panel stops once its error estimate is below `tol` relative to itself
/// or below its length share of `tol` times a coarse estimate of the whole
/// integral, so panels where the integrand underflows do not recurse forever.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: (f64, f64), tol: f64, density: f64, depth: u32) -> f64 {
        let floor = tol * density * (b - a);
        if whole.1 <= tol * whole.0.abs() || whole.1 <= floor || depth > 60 {
            return whole.0;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, left, tol, density, depth + 1) + rec(f, m, b, right, tol, density, depth + 1)
    }
    let panels = 64;
    let h = (b - a) / panels as f64;
    let coarse: f64 = (0..panels)
        .map(|i| gk15(f, a + i as f64 * h, a + (i + 1) as f64 * h).0.abs())
        .sum();
    let density = 0.1 * coarse / (b - a);
    rec(f, a, b, gk15(f, a, b), tol, density, 0)
}

/// `∫_t^∞ f(s) ds` via `s = t + u/(1-u)`.
pub fn integrate_tail(f: &dyn Fn(f64) -> f64, t: f64, tol: f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        f(t + u / w) / (w * w)
    };
    // split the map so the mass near u = 0 is resolved
    let cuts = [0.0, 0.05, 0.2, 0.5, 0.8, 0.95, 1.0];
    cuts.windows(2).map(|c| integrate(&g, c[0], c[1], tol)).sum()
}

/// Reference configuration of the acceptance runs.
pub struct Reference;

impl Reference {
    pub const POINTS: usize = 4096;
    pub const LENGTH: f64 = 256.0;
    pub const DT: f64 = 1e-3;
    pub const FINAL_TIME: f64 = 16.0;
    pub const CADENCE: f64 = 0.1;
    pub const AMPLITUDE: f64 = 0.1;

    pub fn params() -> ModelParams {
        ModelParams::new(1, 3.0, 1.0, Nonlinearity::Defocusing)
    }

    pub fn grid() -> Grid {
        Grid::new(1, Self::POINTS, Self::LENGTH).unwrap()
    }

    pub fn run() -> RunSpec {
        RunSpec {
            final_time: Self::FINAL_TIME,
            dt: Self::DT,
            cadence: Self::CADENCE,
            m11: None,
        }
    }
}

/// `amplitude · e^{-|x|²}`.
pub fn gaussian(grid: &Grid, amplitude: f64) -> Field {
    Field::from_fn(grid, |x| {
        Complex64::new(amplitude * (-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })
    .unwrap()
}

/// `e^{-|x|²/(2σ²)}`.
pub fn bump(grid: &Grid, sigma: f64) -> Field {
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
    })
    .unwrap()
}

/// Closed-form free evolution of `e^{-x²/2}` in one dimension:
/// `(1+2it)^{-1/2} exp(-x²/(2(1+2it)))`.
pub fn gaussian_evolution(x: f64, t: f64) -> Complex64 {
    let z = Complex64::new(1.0, 2.0 * t);
    z.sqrt().inv() * (-(x * x) / (2.0 * z)).exp()
}

/// A smooth random field: a few modulated Gaussians with random complex
/// amplitudes, widths in `[0.8, 2]` and centres within `|x| ≤ spread`.
pub fn random_field(grid: &Grid, rng: &mut impl rand::RngExt, spread: f64) -> Field {
    let bumps: Vec<(f64, f64, f64, Complex64)> = (0..4)
        .map(|_| {
            let centre = rng.random_range(-spread..=spread);
            let width = rng.random_range(0.8..2.0);
            let freq = rng.random_range(-2.0..2.0);
            let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (centre, width, freq, amp)
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, k, a)| {
                let r2: f64 = x.iter().map(|v| (v - c) * (v - c)).sum();
                a * Complex64::from_polar((-r2 / (2.0 * w * w)).exp(), k * x[0])
            })
            .sum()
    })
    .unwrap()
}

pub fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
