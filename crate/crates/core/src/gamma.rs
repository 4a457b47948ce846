//! Upper incomplete gamma function `Γ(s, x) = ∫_x^∞ τ^{s-1} e^{-τ} dτ` for real
//! `s` and `x > 0`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 20_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Γ(s, x)·e^x·x^{-s}`, finite and well scaled for every `x > 0`.
pub fn upper_gamma_scaled(s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() || !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "upper incomplete gamma needs finite s and x > 0, got s = {s}, x = {x}"
        )));
    }
    if x >= s + 1.0 && x >= 0.5 {
        return continued_fraction(s, x);
    }
    let value = if s > 0.0 {
        libm::tgamma(s) - lower_series(s, x)
    } else {
        small_x_nonpositive(s, x)
    };
    Ok(value * x.exp() * x.powf(-s))
}

/// `Γ(s, x)`. At `x = 0` this is the complete gamma function for `s > 0`.
pub fn upper_gamma(s: f64, x: f64) -> Result<f64> {
    if x == 0.0 && s > 0.0 {
        return Ok(libm::tgamma(s));
    }
    let scaled = upper_gamma_scaled(s, x)?;
    Ok(scaled * (s * x.ln() - x).exp())
}

/// Modified Lentz evaluation of
/// `Γ(s,x) = e^{-x} x^s / (x+1-s - 1(1-s)/(x+3-s - 2(2-s)/(x+5-s - …)))`.
fn continued_fraction(s: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::InvalidArgument(format!(
        "continued fraction for Γ({s}, {x}) did not converge"
    )))
}

/// Lower incomplete gamma `γ(s, x) = e^{-x} x^s Σ_k x^k / (s(s+1)…(s+k))` for `s > 0`.
fn lower_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut denom = s;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (s * x.ln() - x).exp()
}

/// `E₁(x) = Γ(0, x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)`.
fn exp_integral_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..MAX_ITER {
        power *= -x / k as f64;
        let term = power / k as f64;
        sum += term;
        if term.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `Γ(s, x)` for `s ≤ 0` and small `x` by downward recurrence
/// `Γ(s-1, x) = (Γ(s, x) - x^{s-1} e^{-x}) / (s-1)` from a base in `[0, 1)`.
fn small_x_nonpositive(s: f64, x: f64) -> f64 {
    let steps = (-s).ceil();
    let mut order = s + steps;
    let mut value = if order == 0.0 {
        exp_integral_series(x)
    } else {
        libm::tgamma(order) - lower_series(order, x)
    };
    for _ in 0..steps as usize {
        order -= 1.0;
        value = (value - x.powf(order) * (-x).exp()) / order;
    }
    value
}
