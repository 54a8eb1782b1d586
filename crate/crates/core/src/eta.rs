//! Coefficient functions `eta_k = rho^k d_rho^k alpha / alpha`.
//!
//! The combinatorial route expands `(rho d_rho)^k alpha = sum_l d_kl x_l` with
//! `x_l` the sum of `alpha` over all ordered `l`-tuples of directions, converts to
//! `rho^k d_rho^k` with Stirling numbers of the first kind and divides by `alpha`.
//! The tables are exact rationals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::ball::{alpha_batch, MultiIndex, Spectrum};
use crate::error::{domain, Error, Result};
use crate::report::Report;
use crate::special::{binomial, gamma, multinomial, raising_factorial, stirling_first_unsigned, stirling_second};

/// Largest table order.
pub const TABLE_K_MAX: usize = 32;
/// Largest order evaluated numerically.
pub const EVAL_K_MAX: usize = 6;
/// Largest order of the finite-difference oracle.
pub const FD_K_MAX: usize = 4;
/// Relative noise of a quadrature value of `alpha`, as seen by difference stencils.
pub const FD_NOISE: f64 = 1e-13;

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub v: u32,
    pub k_max: usize,
    /// `phi_0 = 1`, `phi_k = (v - 2k + 2) phi_{k-1}`.
    pub phi: Vec<BigInt>,
    pub c: Vec<Vec<BigRational>>,
    pub d: Vec<Vec<BigRational>>,
}

fn build_table(v: u32, k_max: usize) -> CoefficientTable {
    let mut phi = vec![BigInt::one()];
    for k in 1..=k_max {
        let f = v as i64 - 2 * k as i64 + 2;
        phi.push(&phi[k - 1] * f);
    }
    let half_pow = |t: usize| BigRational::new(BigInt::one(), BigInt::one() << t);
    let sign = |l: usize| if l % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let c = (0..=k_max)
        .map(|k| {
            (0..=k)
                .map(|l| {
                    half_pow(k) * rat(sign(l) * &phi[k - l] * BigInt::from(binomial(k as u32, l as u32)))
                })
                .collect()
        })
        .collect();
    let d = (0..=k_max)
        .map(|k| {
            (0..=k)
                .map(|l| {
                    let mut acc = BigRational::zero();
                    for t in l..=k {
                        let n = sign(l)
                            * &phi[t - l]
                            * BigInt::from(stirling_second(k, t))
                            * BigInt::from(binomial(t as u32, l as u32));
                        acc += half_pow(t) * rat(n);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    CoefficientTable { v, k_max, phi, c, d }
}

/// Exact tables through `k_max`, memoized per `(v, k_max)`.
pub fn coefficient_table(v: u32, k_max: usize) -> Result<Arc<CoefficientTable>> {
    if k_max > TABLE_K_MAX {
        return Err(domain(format!("coefficient tables go up to k = {TABLE_K_MAX}, asked for {k_max}")));
    }
    if v == 0 {
        return Err(domain("dimension must be positive"));
    }
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<CoefficientTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Ok(guard.entry((v, k_max)).or_insert_with(|| Arc::new(build_table(v, k_max))).clone())
}

impl CoefficientTable {
    pub fn c_at(&self, k: usize, l: usize) -> BigRational {
        if l > k || k > self.k_max {
            BigRational::zero()
        } else {
            self.c[k][l].clone()
        }
    }

    pub fn d_at(&self, k: usize, l: usize) -> BigRational {
        if l > k || k > self.k_max {
            BigRational::zero()
        } else {
            self.d[k][l].clone()
        }
    }

    /// `d_{(k+1)l} = (v/2 + l) d_kl - d_{k(l-1)}/2` for every entry.
    pub fn recurrence_holds(&self) -> bool {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let v_half = rat(self.v) * &half;
        (0..self.k_max).all(|k| {
            (0..=k + 1).all(|l| {
                let prev = if l == 0 { BigRational::zero() } else { self.d_at(k, l - 1) };
                let rhs = (&v_half + rat(l as u64)) * self.d_at(k, l) - &half * prev;
                self.d_at(k + 1, l) == rhs
            })
        })
    }

    /// `c_kl = sum_j (-1)^(k-j) [k brack j] d_jl` for `k <= k_cap`.
    pub fn composition_closes(&self, k_cap: usize) -> bool {
        (0..=k_cap.min(self.k_max)).all(|k| {
            (0..=k).all(|l| {
                let mut acc = BigRational::zero();
                for j in l..=k {
                    let s = rat(BigInt::from(stirling_first_unsigned(k, j)));
                    let term = s * self.d_at(j, l);
                    if (k - j) % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                acc == self.c_at(k, l)
            })
        })
    }

    /// `sum_l c_kl x_l` with `x_l` replaced by its `rho -> infinity` value `v (v+2) ... (v+2l-2)`.
    pub fn limit_eta(&self, k: usize) -> BigRational {
        let mut acc = BigRational::zero();
        for l in 0..=k {
            let x: BigInt = (0..l).map(|i| BigInt::from(self.v as u64 + 2 * i as u64)).product();
            acc += self.c_at(k, l) * rat(x);
        }
        acc
    }
}

/// `x_l / alpha` for `l = 0..=k_max`, where `x_l = sum_{|m| = l} multinomial(m) alpha_m`.
pub fn moment_sums(k_max: usize, rho: f64, spectrum: &Spectrum) -> Result<Vec<f64>> {
    let v = spectrum.dim();
    let indices = MultiIndex::all_up_to(v, k_max as u32);
    let vals = alpha_batch(&indices, rho, spectrum)?;
    let a0 = vals[indices.iter().position(|i| i.order() == 0).expect("zero index")].value;
    if !(a0 > 0.0) {
        return Err(Error::Numeric(format!("ball probability underflows at rho = {rho}")));
    }
    let mut x = vec![0.0; k_max + 1];
    for (idx, val) in indices.iter().zip(&vals) {
        let w = multinomial(idx.counts()).to_f64().unwrap_or(f64::INFINITY);
        x[idx.order() as usize] += w * val.value / a0;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Combinatorial,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaTable {
    pub rho: f64,
    pub spectrum: Spectrum,
    /// `values[k] = eta_k`, with `values[0] = 1`.
    pub values: Vec<f64>,
    pub method: Method,
}

pub fn eta_table(k_max: usize, rho: f64, spectrum: &Spectrum) -> Result<EtaTable> {
    if k_max > EVAL_K_MAX {
        return Err(domain(format!("eta is evaluated up to k = {EVAL_K_MAX}, asked for {k_max}")));
    }
    let table = coefficient_table(spectrum.dim() as u32, k_max)?;
    let x = moment_sums(k_max, rho, spectrum)?;
    let mut values = vec![1.0];
    for k in 1..=k_max {
        values.push((0..=k).map(|l| to_f64(&table.c[k][l]) * x[l]).sum());
    }
    Ok(EtaTable { rho, spectrum: spectrum.clone(), values, method: Method::Combinatorial })
}

pub fn eta_combinatorial(k: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    Ok(eta_table(k, rho, spectrum)?.values[k])
}

/// `(rho d_rho)^k alpha = sum_l d_kl x_l`, in units of `alpha`.
pub fn log_derivative_combinatorial(k: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    let table = coefficient_table(spectrum.dim() as u32, k)?;
    let x = moment_sums(k, rho, spectrum)?;
    Ok((0..=k).map(|l| to_f64(&table.d[k][l]) * x[l]).sum())
}

/// Central stencils for the `k`-th derivative on offsets `-2..=2`, all `O(h^2)`.
fn stencil(k: usize) -> [f64; 5] {
    match k {
        1 => [0.0, -0.5, 0.0, 0.5, 0.0],
        2 => [0.0, 1.0, -2.0, 1.0, 0.0],
        3 => [-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => [1.0, -4.0, 6.0, -4.0, 1.0],
        _ => unreachable!("stencil order checked by caller"),
    }
}

fn richardson<F: FnMut(f64) -> Result<f64>>(k: usize, h: f64, mut f: F) -> Result<f64> {
    let w = stencil(k);
    let mut at = |step: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (j, &wj) in w.iter().enumerate() {
            if wj != 0.0 {
                acc += wj * f((j as f64 - 2.0) * step)?;
            }
        }
        Ok(acc / step.powi(k as i32))
    };
    let coarse = at(h)?;
    let fine = at(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Step of the finite-difference oracle: the variation scale of `alpha`
/// (`min(rho, 2 lambda_max)`) times `(FD_NOISE / (1 - alpha))^{1/(k+4)}`, which balances
/// rounding of `alpha` against the `h^4` error left after one extrapolation. Near
/// `alpha = 1` the derivatives only see the tail mass `1 - alpha`.
pub fn fd_step(k: usize, rho: f64, spectrum: &Spectrum) -> f64 {
    let tail = alpha0(rho, spectrum).map(|a| (1.0 - a).clamp(1e-12, 1.0)).unwrap_or(1.0);
    rho.min(2.0 * spectrum.max()) * (FD_NOISE / tail).powf(1.0 / (k as f64 + 4.0)).min(0.1)
}

fn check_fd(k: usize, rho: f64, h: f64) -> Result<()> {
    if k == 0 || k > FD_K_MAX {
        return Err(domain(format!("finite-difference oracle handles 1 <= k <= {FD_K_MAX}, got {k}")));
    }
    if !(h > 1e-10 * rho) || rho - 2.0 * h <= 0.0 {
        return Err(Error::Numeric(format!("finite-difference step {h} unusable at rho = {rho}")));
    }
    Ok(())
}

fn alpha0(rho: f64, spectrum: &Spectrum) -> Result<f64> {
    Ok(alpha_batch(&[MultiIndex::zeros(spectrum.dim())], rho, spectrum)?[0].value)
}

/// `rho^k d_rho^k alpha / alpha` by central differences in `rho`.
pub fn eta_fd_oracle(k: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    eta_fd_with_step(k, rho, spectrum, fd_step(k, rho, spectrum))
}

pub fn eta_fd_with_step(k: usize, rho: f64, spectrum: &Spectrum, h: f64) -> Result<f64> {
    check_fd(k, rho, h)?;
    let a = alpha0(rho, spectrum)?;
    let der = richardson(k, h, |t| alpha0(rho + t, spectrum))?;
    Ok(rho.powi(k as i32) * der / a)
}

/// `(rho d_rho)^k alpha / alpha` by central differences in `log rho`.
pub fn log_derivative_fd(k: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    let h = fd_step(k, rho, spectrum) / rho;
    check_fd(k, 1.0, h)?;
    let a = alpha0(rho, spectrum)?;
    Ok(richardson(k, h, |t| alpha0(rho * t.exp(), spectrum))? / a)
}

/// `eta_0..=eta_kmax` from the finite-difference oracle.
pub fn eta_fd_table(k_max: usize, rho: f64, spectrum: &Spectrum) -> Result<EtaTable> {
    let mut values = vec![1.0];
    for k in 1..=k_max {
        values.push(eta_fd_oracle(k, rho, spectrum)?);
    }
    Ok(EtaTable { rho, spectrum: spectrum.clone(), values, method: Method::FiniteDifference })
}

/// `Q_k(x, a) = sum_l C(k, l) a^(rising l) x^(k-l)`.
pub fn q_polynomial(k: u32, x: f64, a: f64) -> f64 {
    (0..=k)
        .map(|l| binomial(k, l).to_f64().unwrap_or(f64::INFINITY) * raising_factorial(a, l) * x.powi((k - l) as i32))
        .sum()
}

/// Term-wise bound `sum_l C(k, l) |a^(rising l)| x^(k-l)` of `|Q_k(y, a)|` for `0 <= y <= x`.
pub fn q_polynomial_abs_bound(k: u32, x: f64, a: f64) -> f64 {
    (0..=k)
        .map(|l| {
            binomial(k, l).to_f64().unwrap_or(f64::INFINITY) * raising_factorial(a, l).abs() * x.powi((k - l) as i32)
        })
        .sum()
}

/// Upper bound on `|rho^k d_rho^k alpha|` for `k >= 1`: the exponential damping
/// `e^{-rho/2 lambda_max}` with the angular average of `|Q_{k-1}|` bounded at
/// `rho / 2 lambda_min`.
pub fn damping_envelope(k: usize, rho: f64, spectrum: &Spectrum) -> f64 {
    let v = spectrum.dim() as f64;
    let det_sqrt: f64 = spectrum.lambdas().iter().map(|l| l.sqrt()).product();
    let phi = v / 2.0 - 1.0;
    let pre = rho.powf(v / 2.0) / (2f64.powf(v / 2.0) * gamma(v / 2.0) * det_sqrt);
    let q = q_polynomial_abs_bound(k as u32 - 1, rho / (2.0 * spectrum.min()), -phi);
    pre * q * (-rho / (2.0 * spectrum.max())).exp()
}

fn expected_sign(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Tail behaviour of `eta_1..eta_{k_max}` along an increasing `rho` schedule:
/// `|eta_k|` decreasing over the schedule, the sign settled to `(-1)^{k-1}` at its
/// end, and `|rho^k d^k alpha|` below the damping envelope at every point.
pub fn asymptotic_checks(spectrum: &Spectrum, k_max: usize, schedule: &[f64]) -> Result<Report> {
    if schedule.windows(2).any(|w| !(w[1] > w[0])) || schedule.is_empty() {
        return Err(domain("rho schedule must be non-empty and strictly increasing"));
    }
    let tables: Vec<EtaTable> = schedule.iter().map(|&r| eta_table(k_max, r, spectrum)).collect::<Result<_>>()?;
    let alphas: Vec<f64> = schedule.iter().map(|&r| alpha0(r, spectrum)).collect::<Result<_>>()?;
    let mut report = Report::new("asymptotic");
    let tag = format!("lambda={:?}", spectrum.lambdas());
    for k in 1..=k_max {
        let mags: Vec<f64> = tables.iter().map(|t| t.values[k].abs()).collect();
        let decreasing = mags.windows(2).all(|w| w[1] < w[0]);
        report.flag(format!("|eta_{k}| decreasing along rho={schedule:?} [{tag}]"), decreasing, *mags.last().unwrap());
        let last = tables.last().unwrap().values[k];
        report.flag(
            format!("sign eta_{k} = {:+} at rho={} [{tag}]", expected_sign(k), schedule.last().unwrap()),
            last * expected_sign(k) > 0.0,
            last,
        );
        for (i, &rho) in schedule.iter().enumerate() {
            let value = (tables[i].values[k] * alphas[i]).abs();
            let env = damping_envelope(k, rho, spectrum);
            let err = 1e-12 * alphas[i] * tables[i].values.iter().map(|e| e.abs()).sum::<f64>().max(1.0);
            report.bound(format!("|rho^{k} d^{k} alpha| below damping envelope at rho={rho} [{tag}]"), env - value, err);
        }
    }
    let far = 1e3 * spectrum.max();
    let t = eta_table(k_max, far, spectrum)?;
    for k in 1..=k_max {
        report.identity(format!("eta_{k} vanishes at rho={far} [{tag}]"), t.values[k].abs(), 1e-9);
    }
    Ok(report)
}

/// The oracle battery: three spectra of dimension 1 to 3 plus one skewed
/// three-dimensional spectrum, each at `rho` in {1, 5, 12}.
pub fn oracle_battery_points() -> Vec<(f64, Spectrum)> {
    let spectra = [vec![1.0], vec![1.0, 2.0], vec![1.0, 2.0, 3.0], vec![0.5, 1.5, 4.0]];
    let mut out = Vec::new();
    for s in spectra {
        for rho in [1.0, 5.0, 12.0] {
            out.push((rho, Spectrum::new(s.clone()).expect("valid spectrum")));
        }
    }
    out
}

pub const ORACLE_TOL: f64 = 1e-3;

/// Combinatorial against finite-difference `eta_k`, `k <= 3`, on the battery.
pub fn oracle_equivalence() -> Result<Report> {
    let mut report = Report::new("eta");
    for (rho, s) in oracle_battery_points() {
        let t = eta_table(3, rho, &s)?;
        for k in 1..=3 {
            let fd = eta_fd_oracle(k, rho, &s)?;
            let comb = t.values[k];
            let rel = (comb - fd).abs() / comb.abs().max(1e-10);
            report.identity(format!("eta_{k} combinatorial vs finite difference [rho={rho}, lambda={:?}]", s.lambdas()), rel, ORACLE_TOL);
        }
    }
    Ok(report)
}
