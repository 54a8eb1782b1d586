//! Incomplete gamma and Kummer's confluent hypergeometric function.
//!
//! The lower incomplete gamma function uses the Kummer series
//! `gamma(s,x) = x^s e^{-x} M(1, 1+s, x) / s` while `x < s + 12`, and the
//! continued fraction of the upper function beyond that point.

use crate::error::{check_finite, domain, Error, Result};

/// Term cap for the power series.
pub const SERIES_MAX_TERMS: usize = 500;
/// Iteration cap for the continued fraction.
pub const CF_MAX_ITERATIONS: usize = 300;

const CF_TOLERANCE: f64 = 1e-15;
const SERIES_SWITCH: f64 = 12.0;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `x (x+1) ... (x+n-1)`, equal to 1 for `n = 0`.
pub fn raising_factorial(x: f64, n: u32) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

fn check_gamma_args(s: f64, x: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(domain(format!("incomplete gamma needs s > 0, got {s}")));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    Ok(())
}

/// `M(1, 1+s, x) = sum_n x^n / (s+1)^{(n)}`.
fn kummer_one(s: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=SERIES_MAX_TERMS {
        term *= x / (s + n as f64);
        sum += term;
        if term <= sum * f64::EPSILON * 0.25 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        iterations: SERIES_MAX_TERMS,
        last_change: term / sum,
    })
}

/// Continued fraction for `Gamma(s,x) e^x x^{-s}` (modified Lentz).
fn upper_fraction(s: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut change = f64::INFINITY;
    for i in 1..=CF_MAX_ITERATIONS {
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
        change = (delta - 1.0).abs();
        if change < CF_TOLERANCE {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "upper incomplete gamma continued fraction",
        iterations: CF_MAX_ITERATIONS,
        last_change: change,
    })
}

fn uses_series(s: f64, x: f64) -> bool {
    x < s + SERIES_SWITCH
}

/// Regularized lower incomplete gamma `P(s,x) = gamma(s,x) / Gamma(s)`.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let p = if uses_series(s, x) {
        let prefactor = (s * x.ln() - x - ln_gamma(s + 1.0)).exp();
        prefactor * kummer_one(s, x)?
    } else {
        let prefactor = (s * x.ln() - x - ln_gamma(s)).exp();
        1.0 - prefactor * upper_fraction(s, x)?
    };
    check_finite("regularized lower gamma", p)
}

/// Regularized upper incomplete gamma `Q(s,x) = 1 - P(s,x)`, accurate in the tail.
pub fn regularized_upper_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if uses_series(s, x) {
        Ok(1.0 - regularized_lower_gamma(s, x)?)
    } else {
        let prefactor = (s * x.ln() - x - ln_gamma(s)).exp();
        check_finite("regularized upper gamma", prefactor * upper_fraction(s, x)?)
    }
}

/// Lower incomplete gamma `gamma(s,x) = int_0^x t^{s-1} e^{-t} dt`.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args(s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return check_finite("Gamma(s)", gamma(s));
    }
    let value = if uses_series(s, x) {
        (s * x.ln() - x - s.ln()).exp() * kummer_one(s, x)?
    } else {
        let upper = (s * x.ln() - x).exp() * upper_fraction(s, x)?;
        gamma(s) - upper
    };
    check_finite("lower incomplete gamma", value)
}

/// Kummer's confluent hypergeometric function `M(a, b, x) = 1F1(a; b; x)` for `x >= 0`.
pub fn kummer_m(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain(format!("Kummer M needs finite parameters, got a={a}, b={b}")));
    }
    if b <= 0.0 && b == b.floor() {
        return Err(domain(format!("Kummer M diverges for nonpositive integer b = {b}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(domain(format!("Kummer M is evaluated for finite x >= 0, got {x}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * x / (nf + 1.0);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Numeric(format!("Kummer M({a}, {b}, {x}) overflowed")));
        }
        if term == 0.0 || term.abs() <= sum.abs() * f64::EPSILON * 0.25 && nf + 1.0 > x {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "Kummer series",
        iterations: SERIES_MAX_TERMS,
        last_change: (term / sum).abs(),
    })
}
