//! Conditional moments of `X ~ N(0, diag(lambda))` given `|X|^2 < rho`, the
//! correlations of the squared components and the inequality battery.

use rayon::prelude::*;
use serde::Serialize;

use crate::ball::{alpha_1d, alpha_batch, alpha_mc_batch, IntegralValue, MultiIndex, Spectrum};
use crate::error::{domain, Error, Result};
use crate::quadrature;
use crate::report::Report;

/// Fixed-point damping for [`rho_star`].
pub const RHO_STAR_DAMPING: f64 = 0.5;
pub const RHO_STAR_MAX_ITERATIONS: usize = 200;
const ROUNDING: f64 = 8.0 * f64::EPSILON;

/// A value with a propagated absolute error, rounding included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

/// Sum of products `c * prod(factors)`, each factor a ratio carrying a relative error.
fn combine(terms: &[(f64, &[Ratio])]) -> Estimate {
    let mut value = 0.0;
    let mut err = 0.0;
    let mut size = 0.0;
    for (c, factors) in terms {
        let t = c * factors.iter().map(|r| r.value).product::<f64>();
        let rel: f64 = factors.iter().map(|r| r.rel).sum();
        value += t;
        err += t.abs() * rel;
        size += t.abs();
    }
    Estimate { value, err: err + ROUNDING * size }
}

#[derive(Debug, Clone, Copy)]
struct Ratio {
    value: f64,
    rel: f64,
}

fn rel(a: &IntegralValue) -> f64 {
    a.est_abs_error / a.value.abs().max(f64::MIN_POSITIVE)
}

/// `alpha`, `alpha_n` and `alpha_nm` at one point, kept as ratios to `alpha`.
#[derive(Debug, Clone)]
pub struct PointIntegrals {
    pub rho: f64,
    pub spectrum: Spectrum,
    pub alpha: IntegralValue,
    single: Vec<Ratio>,
    double: Vec<Vec<Ratio>>,
}

impl PointIntegrals {
    pub fn new(rho: f64, spectrum: &Spectrum) -> Result<Self> {
        Self::build(rho, spectrum, true)
    }

    /// Only `alpha`, `alpha_n` and `alpha_nn`.
    pub fn diagonal(rho: f64, spectrum: &Spectrum) -> Result<Self> {
        Self::build(rho, spectrum, false)
    }

    fn build(rho: f64, spectrum: &Spectrum, cross: bool) -> Result<Self> {
        let v = spectrum.dim();
        let mut indices = vec![MultiIndex::zeros(v)];
        indices.extend((0..v).map(|n| MultiIndex::single(v, n, 1)));
        let mut pairs = Vec::new();
        for n in 0..v {
            for m in n..v {
                if cross || m == n {
                    pairs.push((n, m));
                    indices.push(MultiIndex::pair(v, n, m));
                }
            }
        }
        let vals = alpha_batch(&indices, rho, spectrum)?;
        let a = vals[0];
        if !(a.value > 0.0) {
            return Err(Error::Numeric(format!("ball probability underflows at rho = {rho}")));
        }
        let ratio = |x: &IntegralValue| Ratio { value: x.value / a.value, rel: rel(x) + rel(&a) };
        let single = vals[1..=v].iter().map(ratio).collect();
        let nan = Ratio { value: f64::NAN, rel: f64::NAN };
        let mut double = vec![vec![nan; v]; v];
        for (&(n, m), x) in pairs.iter().zip(&vals[v + 1..]) {
            double[n][m] = ratio(x);
            double[m][n] = ratio(x);
        }
        Ok(PointIntegrals { rho, spectrum: spectrum.clone(), alpha: a, single, double })
    }

    fn lam(&self, n: usize) -> f64 {
        self.spectrum.get(n)
    }

    /// `alpha_n / alpha`.
    pub fn ratio_n(&self, n: usize) -> f64 {
        self.single[n].value
    }

    /// `alpha_nm / alpha`.
    pub fn ratio_nm(&self, n: usize, m: usize) -> f64 {
        self.double[n][m].value
    }

    pub fn second(&self, n: usize) -> Estimate {
        combine(&[(self.lam(n), &[self.single[n]])])
    }

    pub fn fourth(&self, n: usize) -> Estimate {
        combine(&[(self.lam(n) * self.lam(n), &[self.double[n][n]])])
    }

    /// `Delta_n = (lambda_n^2/rho^2)[alpha_nn/alpha - (alpha_n/alpha)^2 - 2 alpha_n/alpha]`.
    pub fn delta(&self, n: usize) -> Estimate {
        let s = (self.lam(n) / self.rho).powi(2);
        let r = self.single[n];
        combine(&[(s, &[self.double[n][n]]), (-s, &[r, r]), (-2.0 * s, &[r])])
    }

    /// `Gamma_nm = (lambda_n lambda_m / rho^2)[alpha_nm/alpha - (alpha_n/alpha)(alpha_m/alpha)]`.
    pub fn gamma(&self, n: usize, m: usize) -> Estimate {
        let s = self.lam(n) * self.lam(m) / (self.rho * self.rho);
        combine(&[(s, &[self.double[n][m]]), (-s, &[self.single[n], self.single[m]])])
    }

    /// `var(X_n^2)` for `n == m`, `cov(X_n^2, X_m^2)` otherwise.
    pub fn covariance(&self, n: usize, m: usize) -> Estimate {
        let s = self.lam(n) * self.lam(m);
        combine(&[(s, &[self.double[n][m]]), (-s, &[self.single[n], self.single[m]])])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSet {
    pub second: Vec<f64>,
    pub fourth: Vec<f64>,
    pub cross: Vec<Vec<f64>>,
}

pub fn conditional_moments(rho: f64, spectrum: &Spectrum) -> Result<MomentSet> {
    let p = PointIntegrals::new(rho, spectrum)?;
    let v = spectrum.dim();
    let cross = (0..v)
        .map(|n| (0..v).map(|m| spectrum.get(n) * spectrum.get(m) * p.ratio_nm(n, m)).collect())
        .collect();
    Ok(MomentSet {
        second: (0..v).map(|n| p.second(n).value).collect(),
        fourth: (0..v).map(|n| p.fourth(n).value).collect(),
        cross,
    })
}

/// Monte Carlo `E[X_n^2 | ball]` with standard errors, from the kept samples.
pub fn conditional_second_moments_mc(
    rho: f64,
    spectrum: &Spectrum,
    n_total: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let v = spectrum.dim();
    let mut indices = vec![MultiIndex::zeros(v)];
    indices.extend((0..v).map(|n| MultiIndex::single(v, n, 1)));
    indices.extend((0..v).map(|n| MultiIndex::single(v, n, 2)));
    let est = alpha_mc_batch(&indices, rho, spectrum, n_total, seed)?;
    let kept = est[0].n_kept as f64;
    let p = est[0].mean;
    Ok((0..v)
        .map(|n| {
            let lam = spectrum.get(n);
            let m1 = est[1 + n].mean / p;
            let m2 = est[1 + v + n].mean / p;
            let sd = (m2 - m1 * m1).max(0.0).sqrt();
            Estimate { value: lam * m1, err: lam * sd / kept.sqrt() }
        })
        .collect())
}

pub fn delta_n(n: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    check_dim(n, spectrum)?;
    Ok(PointIntegrals::diagonal(rho, spectrum)?.delta(n).value)
}

fn check_dim(n: usize, spectrum: &Spectrum) -> Result<()> {
    if n >= spectrum.dim() {
        return Err(domain(format!("direction {n} outside a spectrum of dimension {}", spectrum.dim())));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationSet {
    pub gamma: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub gamma_err: Vec<Vec<f64>>,
    pub delta_err: Vec<f64>,
}

pub fn correlation_set(rho: f64, spectrum: &Spectrum) -> Result<CorrelationSet> {
    let p = PointIntegrals::new(rho, spectrum)?;
    let v = spectrum.dim();
    let g: Vec<Vec<Estimate>> = (0..v).map(|n| (0..v).map(|m| p.gamma(n, m)).collect()).collect();
    let d: Vec<Estimate> = (0..v).map(|n| p.delta(n)).collect();
    Ok(CorrelationSet {
        gamma: g.iter().map(|row| row.iter().map(|e| e.value).collect()).collect(),
        gamma_err: g.iter().map(|row| row.iter().map(|e| e.err).collect()).collect(),
        delta: d.iter().map(|e| e.value).collect(),
        delta_err: d.iter().map(|e| e.err).collect(),
    })
}

fn gaussian(x: f64, lambda: f64) -> f64 {
    (-0.5 * x * x / lambda).exp() / (2.0 * std::f64::consts::PI * lambda).sqrt()
}

/// Density of `X_n` under the truncated law; zero outside `(-sqrt(rho), sqrt(rho))`.
pub fn marginal_density(n: usize, x: f64, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    check_dim(n, spectrum)?;
    let total = alpha_batch(&[MultiIndex::zeros(spectrum.dim())], rho, spectrum)?[0].value;
    marginal_with_total(n, x, rho, spectrum, total)
}

fn marginal_with_total(n: usize, x: f64, rho: f64, spectrum: &Spectrum, total: f64) -> Result<f64> {
    let rest = rho - x * x;
    if rest <= 0.0 {
        return Ok(0.0);
    }
    let lam = spectrum.get(n);
    let slice = match spectrum.without(n) {
        None => 1.0,
        Some(reduced) => alpha_batch(&[MultiIndex::zeros(reduced.dim())], rest, &reduced)?[0].value,
    };
    Ok(slice * gaussian(x, lam) / total)
}

/// Integral of [`marginal_density`] over its support, by a 64-node rule in the angle.
pub fn marginal_normalization(n: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    check_dim(n, spectrum)?;
    let total = alpha_batch(&[MultiIndex::zeros(spectrum.dim())], rho, spectrum)?[0].value;
    let sqrt_rho = rho.sqrt();
    let mut acc = 0.0;
    for (theta, w) in quadrature::rule(64).on_interval(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2) {
        let x = sqrt_rho * theta.sin();
        acc += w * sqrt_rho * theta.cos() * marginal_with_total(n, x, rho, spectrum, total)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `rho <= lambda_n`
    Strong,
    /// `rho > 2 lambda_n`
    Weak,
    Crossover,
}

impl Region {
    pub fn classify(rho: f64, lambda: f64) -> Region {
        if rho <= lambda {
            Region::Strong
        } else if rho > 2.0 * lambda {
            Region::Weak
        } else {
            Region::Crossover
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub region: Region,
    pub bound_holds: bool,
}

pub fn holder_report(n: usize, rho: f64, spectrum: &Spectrum) -> Result<HolderReport> {
    check_dim(n, spectrum)?;
    let p = PointIntegrals::diagonal(rho, spectrum)?;
    let e2 = p.second(n);
    let var = p.covariance(n, n);
    let h1 = rho - e2.value;
    let h2 = e2.value;
    let h = h1.max(h2);
    let margin = 2.0 * h * e2.value - var.value;
    let err = var.err + 2.0 * h * e2.err + ROUNDING * (2.0 * h * e2.value);
    Ok(HolderReport {
        h,
        h1,
        h2,
        region: Region::classify(rho, spectrum.get(n)),
        bound_holds: margin >= -crate::report::VIOLATION_FACTOR * err,
    })
}

/// Margin of `E[X_n^4] <= lambda_n (2 lambda_n + E[X_n^2])`.
fn loose_margin(p: &PointIntegrals, n: usize) -> Estimate {
    let lam = p.lam(n);
    let e4 = p.fourth(n);
    let e2 = p.second(n);
    let bound = lam * (2.0 * lam + e2.value);
    Estimate { value: bound - e4.value, err: e4.err + lam * e2.err + ROUNDING * bound }
}

pub fn loose_bound_check(n: usize, rho: f64, spectrum: &Spectrum) -> Result<bool> {
    check_dim(n, spectrum)?;
    let m = loose_margin(&PointIntegrals::diagonal(rho, spectrum)?, n);
    Ok(m.value >= -crate::report::VIOLATION_FACTOR * m.err)
}

/// Solves `rho = 2(lambda_n + E[X_n^2 | ball(rho)])` by damped iteration from `3 lambda_n`.
pub fn rho_star(n: usize, spectrum: &Spectrum, tol: f64) -> Result<f64> {
    check_dim(n, spectrum)?;
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let lam = spectrum.get(n);
    let target = |rho: f64| -> Result<f64> {
        Ok(2.0 * (lam + PointIntegrals::diagonal(rho, spectrum)?.second(n).value))
    };
    let mut rho = 3.0 * lam;
    let mut change = f64::INFINITY;
    for _ in 0..RHO_STAR_MAX_ITERATIONS {
        let g = target(rho)?;
        change = (g - rho).abs();
        if change < tol {
            return Ok(rho);
        }
        rho += RHO_STAR_DAMPING * (g - rho);
    }
    Err(Error::NoConvergence { what: "rho_star fixed point", iterations: RHO_STAR_MAX_ITERATIONS, last_change: change })
}

/// Every inequality of the battery at one point. Claims that the theory does not
/// establish are reported as `ViolatedClaim`, proven bounds as `Fail`.
pub fn inequality_battery(rho: f64, spectrum: &Spectrum) -> Result<Report> {
    let p = PointIntegrals::new(rho, spectrum)?;
    let v = spectrum.dim();
    let mut report = Report::new("inequalities");
    let tag = |s: &str| format!("{s} [rho={rho}, lambda={:?}]", spectrum.lambdas());

    for n in 0..v {
        let lam = spectrum.get(n);
        let d = p.delta(n);
        report.claim(tag(&format!("Delta_{} <= 0", n + 1)), -d.value, d.err);

        let e2 = p.second(n);
        let e4 = p.fourth(n);
        let b1 = e2.value * (2.0 * lam + e2.value);
        let b2 = lam * (2.0 * lam + e2.value);
        let b3 = 3.0 * lam * lam;
        let e_b1 = e2.err * (2.0 * lam + 2.0 * e2.value) + ROUNDING * b1;
        report.claim(tag(&format!("chain E[X_{0}^4] <= E[X_{0}^2](2 lambda + E[X_{0}^2])", n + 1)), b1 - e4.value, e4.err + e_b1);
        let l = loose_margin(&p, n);
        report.bound(tag(&format!("loose bound E[X_{0}^4] <= lambda (2 lambda + E[X_{0}^2])", n + 1)), l.value, l.err);
        report.bound(tag(&format!("chain ordering bound1 <= bound2 for n={}", n + 1)), b2 - b1, e_b1 + lam * e2.err);
        report.bound(tag(&format!("chain ordering bound2 <= 3 lambda^2 for n={}", n + 1)), b3 - b2, lam * e2.err + ROUNDING * b3);
        report.bound(tag(&format!("E[X_{}^2] <= lambda", n + 1)), lam - e2.value, e2.err + ROUNDING * lam);
        report.bound(tag(&format!("E[X_{}^4] <= 3 lambda^2", n + 1)), b3 - e4.value, e4.err + ROUNDING * b3);

        let var = p.covariance(n, n);
        let mut off = 0.0;
        let mut off_err = 0.0;
        for m in (0..v).filter(|&m| m != n) {
            let c = p.covariance(n, m);
            off += c.value.abs();
            off_err += c.err;
            if m > n {
                let g = p.gamma(n, m);
                report.claim(tag(&format!("Gamma_{}{} <= 0", n + 1, m + 1)), -g.value, g.err);
            }
        }
        if v > 1 {
            report.claim(tag(&format!("diagonal dominance row {}", n + 1)), var.value - off, var.err + off_err);
        }
    }

    let mut lowest = 0.0;
    let mut lowest_err = 0.0;
    let mut logconc = -2.0 * v as f64;
    let mut logconc_err = ROUNDING * 2.0 * v as f64;
    for n in 0..v {
        let e2 = p.second(n);
        lowest += e2.value / spectrum.get(n);
        lowest_err += e2.err / spectrum.get(n);
        for m in 0..v {
            let c = p.covariance(n, m);
            let s = spectrum.get(n) * spectrum.get(m);
            logconc += c.value / s;
            logconc_err += c.err / s;
        }
    }
    report.bound(tag("sum E[X_k^2]/lambda_k <= v"), v as f64 - lowest, lowest_err + ROUNDING * v as f64);
    report.bound(tag("log-concavity combination <= 0"), -logconc, logconc_err);
    Ok(report)
}

/// `points` values from `min` to `max`, geometric.
pub fn log_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub lambdas: Vec<f64>,
    pub delta: Vec<Estimate>,
}

/// Figure grid convention: `rho = 1` and every variance on the same log grid,
/// so that `rho / lambda` spans `[0.1, 50]`.
pub const SWEEP_RHO: f64 = 1.0;
pub const SWEEP_RATIO_MIN: f64 = 0.1;
pub const SWEEP_RATIO_MAX: f64 = 50.0;

pub fn sweep_lambdas(points: usize) -> Vec<f64> {
    log_grid(SWEEP_RHO / SWEEP_RATIO_MAX, SWEEP_RHO / SWEEP_RATIO_MIN, points)
}

/// `Delta_n` for all `n` on the Cartesian product of `axis` in `v` dimensions,
/// in row-major order with the first variance slowest.
pub fn delta_sweep(v: usize, axis: &[f64], rho: f64) -> Result<Vec<SweepPoint>> {
    let total = axis.len().pow(v as u32);
    (0..total)
        .into_par_iter()
        .map(|mut cell| {
            let mut lambdas = vec![0.0; v];
            for slot in lambdas.iter_mut().rev() {
                *slot = axis[cell % axis.len()];
                cell /= axis.len();
            }
            let s = Spectrum::new(lambdas.clone())?;
            let p = PointIntegrals::diagonal(rho, &s)?;
            Ok(SweepPoint { lambdas, delta: (0..v).map(|n| p.delta(n)).collect() })
        })
        .collect()
}

/// One-dimensional `Gamma_nn` in closed form.
pub fn gamma_nn_one_dim(rho: f64, lambda: f64) -> Result<f64> {
    let a0 = alpha_1d(0, rho, lambda)?.value;
    let a1 = alpha_1d(1, rho, lambda)?.value;
    let a2 = alpha_1d(2, rho, lambda)?.value;
    Ok((lambda / rho).powi(2) * (a2 / a0 - (a1 / a0).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn spec(l: &[f64]) -> Spectrum {
        Spectrum::new(l.to_vec()).unwrap()
    }

    #[test]
    fn unconstrained_limit() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let m = conditional_moments(2000.0, &s).unwrap();
        for n in 0..3 {
            let l = s.get(n);
            assert!((m.second[n] - l).abs() < 1e-12 * l);
            assert!((m.fourth[n] - 3.0 * l * l).abs() < 1e-11 * l * l);
        }
        assert!((m.cross[0][1] - 2.0).abs() < 1e-11);
    }

    #[test]
    fn one_dimension_closed_form() {
        let s = spec(&[1.0]);
        let m = conditional_moments(1.0, &s).unwrap();
        let want = alpha_1d(1, 1.0, 1.0).unwrap().value / alpha_1d(0, 1.0, 1.0).unwrap().value;
        assert!((m.second[0] - want).abs() < 1e-15);
    }

    #[test]
    fn moment_set_invariants() {
        let s = spec(&[1.0, 2.0, 3.0]);
        for rho in [0.2, 1.0, 5.0, 30.0] {
            let m = conditional_moments(rho, &s).unwrap();
            for n in 0..3 {
                let l = s.get(n);
                assert!(m.second[n] > 0.0 && m.second[n] <= l && m.second[n] < rho);
                assert!(m.fourth[n] > 0.0 && m.fourth[n] <= 3.0 * l * l && m.fourth[n] < rho * rho);
            }
        }
    }

    #[test]
    fn delta_limits_and_strong_region() {
        let s = spec(&[1.0, 2.0]);
        assert!(delta_n(0, 200.0, &s).unwrap().abs() < 1e-12);
        for rho in [0.1, 0.5, 1.0, 2.0] {
            assert!(delta_n(0, rho, &s).unwrap() <= 0.0);
        }
        assert!(delta_n(2, 1.0, &s).is_err());
    }

    #[test]
    fn delta_matches_variance_definition() {
        let s = spec(&[1.5, 0.7, 2.0]);
        let rho = 3.0;
        let m = conditional_moments(rho, &s).unwrap();
        for n in 0..3 {
            let var = m.fourth[n] - m.second[n].powi(2);
            let want = (var - 2.0 * s.get(n) * m.second[n]) / (rho * rho);
            assert!((delta_n(n, rho, &s).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_matrix() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let c = correlation_set(4.0, &s).unwrap();
        for n in 0..3 {
            assert!(c.gamma[n][n] >= 0.0);
            for m in 0..3 {
                assert_eq!(c.gamma[n][m], c.gamma[m][n]);
                if m != n {
                    assert!(c.gamma[n][m] <= 0.0);
                }
            }
        }
        let far = correlation_set(300.0, &s).unwrap();
        let scaled = far.gamma[0][0] * (300.0f64 / 1.0).powi(2);
        assert!((scaled - 2.0).abs() < 0.05);
    }

    #[test]
    fn one_dim_gamma_tends_to_two() {
        let g = gamma_nn_one_dim(1000.0, 1.0).unwrap() * 1e6;
        assert!((g - 2.0).abs() < 1e-9);
    }

    #[test]
    fn marginal_density_properties() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let rho = 4.0;
        assert_eq!(marginal_density(0, 2.0, rho, &s).unwrap(), 0.0);
        assert_eq!(marginal_density(0, -3.0, rho, &s).unwrap(), 0.0);
        let a = marginal_density(1, 0.7, rho, &s).unwrap();
        let b = marginal_density(1, -0.7, rho, &s).unwrap();
        assert_eq!(a, b);
        for n in 0..3 {
            assert!((marginal_normalization(n, rho, &s).unwrap() - 1.0).abs() < 1e-8);
        }
        let one = spec(&[2.0]);
        let d = marginal_density(0, 0.3, 1.5, &one).unwrap();
        let want = gaussian(0.3, 2.0) / alpha_1d(0, 1.5, 2.0).unwrap().value;
        assert!((d - want).abs() < 1e-15);
    }

    #[test]
    fn holder_regions() {
        let s = spec(&[1.0, 2.0]);
        let r = holder_report(0, 0.8, &s).unwrap();
        assert_eq!(r.region, Region::Strong);
        assert!(r.h <= 1.0 && r.bound_holds);
        let r = holder_report(0, 5.0, &s).unwrap();
        assert_eq!(r.region, Region::Weak);
        assert_eq!(r.h, r.h1);
        assert!(r.h > 1.0 && r.bound_holds);
        assert_eq!(holder_report(0, 1.5, &s).unwrap().region, Region::Crossover);
    }

    #[test]
    fn loose_bound_examples() {
        assert!(loose_bound_check(0, 0.5, &spec(&[1.0])).unwrap());
        let s = spec(&[1.0, 2.0, 3.0]);
        for n in 0..3 {
            assert!(loose_bound_check(n, 8.0, &s).unwrap());
        }
        assert!(loose_bound_check(0, 5000.0, &spec(&[1.0])).unwrap());
    }

    fn bisect_rho_star(lam: f64, s: &Spectrum, n: usize) -> f64 {
        let g = |rho: f64| rho - 2.0 * (lam + PointIntegrals::diagonal(rho, s).unwrap().second(n).value);
        let (mut lo, mut hi) = (2.0 * lam, 4.0 * lam);
        assert!(g(lo) < 0.0 && g(hi) >= 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rho_star_against_bisection() {
        let s = spec(&[1.0]);
        let r = rho_star(0, &s, 1e-10).unwrap();
        assert!(r > 2.0 && r <= 4.0);
        assert!((r - bisect_rho_star(1.0, &s, 0)).abs() < 1e-8);
        let s3 = spec(&[1.0, 2.0, 3.0]);
        for n in 0..3 {
            let r = rho_star(n, &s3, 1e-10).unwrap();
            let l = s3.get(n);
            assert!(r > 2.0 * l && r <= 4.0 * l);
        }
        assert!(rho_star(0, &s, 0.0).is_err());
    }

    #[test]
    fn battery_at_reference_points() {
        let r = inequality_battery(5.0, &spec(&[1.0, 2.0, 3.0])).unwrap();
        for c in &r.checks {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
        let r = inequality_battery(1e4, &spec(&[1.0, 2.0])).unwrap();
        let lowest = r.checks.iter().find(|c| c.name.starts_with("sum E")).unwrap();
        assert!(lowest.margin.abs() < 1e-10);
    }

    #[test]
    fn mc_second_moments() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let mc = conditional_second_moments_mc(10.0, &s, 400_000, 11).unwrap();
        let m = conditional_moments(10.0, &s).unwrap();
        for n in 0..3 {
            assert!((mc[n].value - m.second[n]).abs() < 3.0 * mc[n].err, "n={n}");
        }
    }

    #[test]
    fn sweep_layout() {
        let axis = [0.5, 1.0];
        let pts = delta_sweep(2, &axis, 1.0).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1].lambdas, vec![0.5, 1.0]);
        assert_eq!(pts[2].lambdas, vec![1.0, 0.5]);
        let g = sweep_lambdas(60);
        assert!((g[0] - 0.02).abs() < 1e-15 && (g[59] - 10.0).abs() < 1e-12);
    }
}
