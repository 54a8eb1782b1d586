//! Weak-truncation expansions in powers of `lambda_n / rho` and the
//! convergence estimate `C(p)` with its power-law fit.

use rayon::prelude::*;
use serde::Serialize;

use crate::ball::{alpha_1d, alpha_batch, MultiIndex, Spectrum};
use crate::error::{domain, Error, Result};
use crate::eta::{eta_table, q_polynomial};
use crate::moments::{gamma_nn_one_dim, PointIntegrals};
use crate::report::Report;
use crate::special::{gamma, ln_gamma, odd_double_factorial_f64};

/// Largest expansion order.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Target {
    /// `alpha_{n:k}`; `k = 0` is `alpha` itself.
    Single { k: u32 },
    /// `alpha_{n:a, m:b}`, sliced along both directions.
    Pair { m: usize, a: u32, b: u32 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionPartialSum {
    pub target: Target,
    pub n: usize,
    pub order: usize,
    pub value: f64,
    pub terms: Vec<f64>,
}

fn factorial_f64(q: usize) -> f64 {
    (1..=q).map(|i| i as f64).product()
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    factorial_f64(n) / (factorial_f64(k) * factorial_f64(n - k))
}

fn reduced_alpha(rho: f64, spectrum: &Spectrum) -> Result<f64> {
    Ok(alpha_batch(&[MultiIndex::zeros(spectrum.dim())], rho, spectrum)?[0].value)
}

/// Partial sum through `order` of the expansion of `target` in direction `n`.
pub fn expand_alpha(target: Target, n: usize, order: usize, rho: f64, spectrum: &Spectrum) -> Result<ExpansionPartialSum> {
    if order > MAX_ORDER {
        return Err(domain(format!("expansion order up to {MAX_ORDER}, asked for {order}")));
    }
    let v = spectrum.dim();
    if n >= v {
        return Err(domain(format!("direction {n} outside dimension {v}")));
    }
    let terms = match target {
        Target::Single { k } => {
            let reduced = spectrum
                .without(n)
                .ok_or_else(|| domain("single-direction expansion needs v >= 2"))?;
            let lam = spectrum.get(n);
            let base = reduced_alpha(rho, &reduced)?;
            let eta = eta_table(order, rho, &reduced)?.values;
            (0..=order)
                .map(|q| {
                    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                    let a1 = alpha_1d(k + q as u32, rho, lam)?.value;
                    Ok(sign / factorial_f64(q) * (lam / rho).powi(q as i32) * a1 * base * eta[q])
                })
                .collect::<Result<Vec<f64>>>()?
        }
        Target::Pair { m, a, b } => {
            if m >= v || m == n {
                return Err(domain(format!("second direction {m} must differ from {n} and lie below {v}")));
            }
            let reduced = spectrum
                .without_pair(n, m)
                .ok_or_else(|| domain("two-direction expansion needs v >= 3"))?;
            let (ln, lm) = (spectrum.get(n), spectrum.get(m));
            let base = reduced_alpha(rho, &reduced)?;
            let eta = eta_table(order, rho, &reduced)?.values;
            let an: Vec<f64> = (0..=order).map(|i| Ok(alpha_1d(a + i as u32, rho, ln)?.value)).collect::<Result<_>>()?;
            let am: Vec<f64> = (0..=order).map(|i| Ok(alpha_1d(b + i as u32, rho, lm)?.value)).collect::<Result<_>>()?;
            (0..=order)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let inner: f64 = (0..=j)
                        .map(|i| {
                            binomial_f64(j, i)
                                * (ln / rho).powi(i as i32)
                                * (lm / rho).powi((j - i) as i32)
                                * an[i]
                                * am[j - i]
                        })
                        .sum();
                    sign / factorial_f64(j) * inner * base * eta[j]
                })
                .collect()
        }
    };
    Ok(ExpansionPartialSum { target, n, order, value: terms.iter().sum(), terms })
}

/// The exact integral the expansion approximates.
pub fn expansion_target_value(target: Target, n: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    let v = spectrum.dim();
    let idx = match target {
        Target::Single { k } => MultiIndex::single(v, n, k),
        Target::Pair { m, a, b } => {
            let mut c = vec![0; v];
            c[n] = a;
            c[m] = b;
            MultiIndex::new(c)
        }
    };
    Ok(alpha_batch(&[idx], rho, spectrum)?[0].value)
}

/// `alpha^{(1)}_{n:k} / alpha^{(1)}` ratios `r_0..=r_kmax`.
fn one_dim_ratios(k_max: u32, rho: f64, lambda: f64) -> Result<Vec<f64>> {
    let a0 = alpha_1d(0, rho, lambda)?.value;
    (0..=k_max).map(|k| Ok(alpha_1d(k, rho, lambda)?.value / a0)).collect()
}

/// The bracket `r_3 - 3 r_2 r_1 + 2 r_1^3` multiplying `-(lambda_n/rho)^3 eta_1` in the
/// expansion of `Gamma_nn`; its `rho -> infinity` value is `15 - 9 + 2 = 8`.
pub fn gamma_nn_expansion_coeff(limit: bool, n: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    if n >= spectrum.dim() {
        return Err(domain(format!("direction {n} outside dimension {}", spectrum.dim())));
    }
    let r: Vec<f64> = if limit {
        (0..=3).map(odd_double_factorial_f64).collect()
    } else {
        one_dim_ratios(3, rho, spectrum.get(n))?
    };
    Ok(r[3] - 3.0 * r[2] * r[1] + 2.0 * r[1].powi(3))
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaNnConvergence {
    pub rho: f64,
    pub gamma_v: f64,
    pub gamma_1: f64,
    /// `Gamma^{(1)} - (lambda_n/rho)^3 B eta_1`.
    pub first_order: f64,
}

pub fn gamma_nn_convergence(n: usize, rho: f64, spectrum: &Spectrum) -> Result<GammaNnConvergence> {
    let reduced = spectrum.without(n).ok_or_else(|| domain("Gamma_nn expansion needs v >= 2"))?;
    let lam = spectrum.get(n);
    let gamma_v = PointIntegrals::diagonal(rho, spectrum)?.gamma(n, n).value;
    let gamma_1 = gamma_nn_one_dim(rho, lam)?;
    let eta1 = eta_table(1, rho, &reduced)?.values[1];
    let b = gamma_nn_expansion_coeff(false, n, rho, spectrum)?;
    Ok(GammaNnConvergence { rho, gamma_v, gamma_1, first_order: gamma_1 - (lam / rho).powi(3) * b * eta1 })
}

/// Power series in a bookkeeping parameter, truncated at a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated(pub Vec<f64>);

impl Truncated {
    pub fn mul(&self, other: &Truncated) -> Truncated {
        let n = self.0.len();
        Truncated((0..n).map(|k| (0..=k).map(|i| self.0[i] * other.0[k - i]).sum()).collect())
    }

    pub fn div(&self, other: &Truncated) -> Result<Truncated> {
        let n = self.0.len();
        if other.0[0] == 0.0 {
            return Err(Error::Numeric("truncated series division by a series with zero constant term".into()));
        }
        let mut q = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (0..k).map(|i| q[i] * other.0[k - i]).sum();
            q[k] = (self.0[k] - s) / other.0[0];
        }
        Ok(Truncated(q))
    }
}

/// `alpha_{n:a, m:b}` sliced along `n` and `m`, as a series in the bookkeeping
/// parameter `t` with `lambda/rho -> t lambda/rho`, through `t^order`. The common
/// factor `alpha^{(v-2)}` is dropped.
fn pair_series(a: u32, b: u32, rn: &[f64], rm: &[f64], en: f64, em: f64, eta: &[f64], order: usize) -> Truncated {
    Truncated(
        (0..=order)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let inner: f64 = (0..=j)
                    .map(|i| {
                        binomial_f64(j, i) * en.powi(i as i32) * em.powi((j - i) as i32) * rn[a as usize + i] * rm[b as usize + j - i]
                    })
                    .sum();
                sign / factorial_f64(j) * inner * eta[j]
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CancellationSeries {
    /// Coefficients of `alpha_nm/alpha` through first order.
    pub joint: Vec<f64>,
    /// Coefficients of `(alpha_n/alpha)(alpha_m/alpha)` through first order.
    pub product: Vec<f64>,
}

pub fn gamma_nm_series(n: usize, m: usize, rho: f64, spectrum: &Spectrum) -> Result<CancellationSeries> {
    let v = spectrum.dim();
    if n == m || n >= v || m >= v {
        return Err(domain(format!("need two distinct directions below {v}, got {n} and {m}")));
    }
    let reduced = spectrum.without_pair(n, m).ok_or_else(|| domain("Gamma_nm expansion needs v >= 3"))?;
    let order = 1;
    let eta = eta_table(order, rho, &reduced)?.values;
    let rn = one_dim_ratios(3, rho, spectrum.get(n))?;
    let rm = one_dim_ratios(3, rho, spectrum.get(m))?;
    let (en, em) = (spectrum.get(n) / rho, spectrum.get(m) / rho);
    let s = |a, b| pair_series(a, b, &rn, &rm, en, em, &eta, order);
    let a0 = s(0, 0);
    let joint = s(1, 1).div(&a0)?;
    let product = s(1, 0).div(&a0)?.mul(&s(0, 1).div(&a0)?);
    Ok(CancellationSeries { joint: joint.0, product: product.0 })
}

/// Exact cancellation of the order-0 and order-1 terms of `Gamma_nm`, and its size
/// against the order-1 term.
pub fn gamma_nm_cancellation_check(n: usize, m: usize, rho: f64, spectrum: &Spectrum) -> Result<Report> {
    let series = gamma_nm_series(n, m, rho, spectrum)?;
    let mut report = Report::new("gamma-nm-cancellation");
    let tag = format!("n={} m={} rho={rho} lambda={:?}", n + 1, m + 1, spectrum.lambdas());
    for q in 0..2 {
        let scale = series.joint[q].abs().max(series.product[q].abs()).max(f64::MIN_POSITIVE);
        let diff = (series.joint[q] - series.product[q]).abs() / scale;
        report.identity(format!("order-{q} terms cancel [{tag}]"), diff, 64.0 * f64::EPSILON);
    }
    let nominal = spectrum.get(n) * spectrum.get(m) / (rho * rho) * (spectrum.max() / rho);
    let g = PointIntegrals::new(rho, spectrum)?.gamma(n, m).value.abs();
    report.identity(format!("|Gamma_nm| an order below lambda_n lambda_m lambda / rho^3 [{tag}]"), g / nominal, 0.1);
    Ok(report)
}

/// One-index bound `alpha^{(1)}_{n:k} < (rho/lambda)^{k+1/2} / (sqrt(2 pi) k)`, `k >= 1`.
pub fn one_index_bound(k: u32, rho: f64, lambda: f64) -> f64 {
    (rho / lambda).powf(k as f64 + 0.5) / ((2.0 * std::f64::consts::PI).sqrt() * k as f64)
}

pub const CP_GRID_POINTS: usize = 400;
pub const CP_X_MIN: f64 = 1e-3;
pub const CP_X_MAX: f64 = 1e3;
const GOLDEN_TOL: f64 = 1e-10;

/// `ln |S_p(x)| - x` where `S_p(x) = sum_{l<p} (-phi)^(rising l) x^{p-l+phi} / (l! (p-1-l)!)`.
fn log_cp_objective(p: usize, phi: f64, log_x: f64) -> f64 {
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    let mut log_rise = 0.0;
    let mut rise_sign = 1.0;
    for l in 0..p {
        if l > 0 {
            let f = -phi + (l - 1) as f64;
            if f == 0.0 {
                break;
            }
            log_rise += f.abs().ln();
            if f < 0.0 {
                rise_sign = -rise_sign;
            }
        }
        let lt = log_rise + (p as f64 - l as f64 + phi) * log_x - ln_gamma(l as f64 + 1.0) - ln_gamma((p - l) as f64);
        if rise_sign > 0.0 {
            pos.push(lt);
        } else {
            neg.push(lt);
        }
    }
    let lse = |v: &[f64]| -> f64 {
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    };
    let (lp, ln_) = (lse(&pos), lse(&neg));
    let (big, small) = if lp >= ln_ { (lp, ln_) } else { (ln_, lp) };
    let log_abs = if small == f64::NEG_INFINITY { big } else { big + (-(small - big).exp()).ln_1p() };
    log_abs - log_x.exp()
}

/// `C^{(v)}(p)` for `2 <= v <= 6`.
pub fn convergence_c(v: u32, p: usize) -> Result<f64> {
    if !(2..=6).contains(&v) || p == 0 {
        return Err(domain(format!("C(p) is defined here for 2 <= v <= 6 and p >= 1, got v={v}, p={p}")));
    }
    let phi = (v as f64 - 3.0) / 2.0;
    let f = |t: f64| log_cp_objective(p, phi, t);
    let (a, b) = (CP_X_MIN.ln(), CP_X_MAX.ln());
    let grid: Vec<f64> = (0..CP_GRID_POINTS).map(|i| a + (b - a) * i as f64 / (CP_GRID_POINTS - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let best = vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Numeric(format!("C({p}) objective not finite on the grid")))?;
    if best == 0 || best == CP_GRID_POINTS - 1 {
        return Err(Error::Numeric(format!("maximizer of C({p}) at v={v} not bracketed by the grid")));
    }
    let (mut lo, mut hi) = (grid[best - 1], grid[best + 1]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (hi - lo) > GOLDEN_TOL * lo.abs().max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let h = (hi - lo).max(1e-6);
    let (fm, f0, fp) = (f(t - h), f(t), f(t + h));
    let curv = fm - 2.0 * f0 + fp;
    if curv < 0.0 {
        let step = 0.5 * h * (fm - fp) / curv;
        if step.abs() <= h && f(t + step) >= f0 {
            t += step;
        }
    }
    Ok(f(t).exp() / p as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceEstimate {
    pub v: u32,
    pub p_values: Vec<usize>,
    pub c_values: Vec<f64>,
    pub fit_a: f64,
    pub fit_eps: f64,
    /// Residual sum of squares of `C - A p^{-eps}` divided by the degrees of freedom.
    pub fit_chi2: f64,
}

/// `C(p)` on `p_min..=p_max` and the unweighted log-log least-squares fit of `A p^{-eps}`.
pub fn convergence_estimate(v: u32, p_min: usize, p_max: usize) -> Result<ConvergenceEstimate> {
    if !(1 <= p_min && p_min < p_max && p_max <= 200) {
        return Err(domain(format!("need 1 <= p_min < p_max <= 200, got {p_min}..{p_max}")));
    }
    let p_values: Vec<usize> = (p_min..=p_max).collect();
    let c_values: Vec<f64> = p_values.par_iter().map(|&p| convergence_c(v, p)).collect::<Result<_>>()?;
    let xs: Vec<f64> = p_values.iter().map(|&p| (p as f64).ln()).collect();
    let ys: Vec<f64> = c_values.iter().map(|c| c.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let fit_a = (my - slope * mx).exp();
    let fit_eps = -slope;
    let rss: f64 = p_values
        .iter()
        .zip(&c_values)
        .map(|(&p, c)| (c - fit_a * (p as f64).powf(-fit_eps)).powi(2))
        .sum();
    Ok(ConvergenceEstimate { v, p_values, c_values, fit_a, fit_eps, fit_chi2: rss / (n - 2.0) })
}

/// Absolute bound on the full expansion of `alpha_{n:k}`, summing `C(p)/p` up to `p_max`.
pub fn expansion_bound(n: usize, k: u32, rho: f64, spectrum: &Spectrum, p_max: usize) -> Result<f64> {
    let v = spectrum.dim() as u32;
    let reduced = spectrum.without(n).ok_or_else(|| domain("bound needs v >= 2"))?;
    let mut sum = 0.0;
    for p in 1..=p_max {
        sum += convergence_c(v, p)? / p as f64;
    }
    let vm = (v as f64 - 1.0) / 2.0;
    Ok((reduced.max() / reduced.min()).powf(vm) * (rho / spectrum.get(n)).powf(k as f64 + 0.5) * sum
        / ((2.0 * std::f64::consts::PI).sqrt() * gamma(vm)))
}

/// `Q_k(x, a)`.
pub fn q_poly(k: u32, x: f64, a: f64) -> f64 {
    q_polynomial(k, x, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l: &[f64]) -> Spectrum {
        Spectrum::new(l.to_vec()).unwrap()
    }

    #[test]
    fn order_zero_is_factorized() {
        let s = spec(&[1.0, 4.0]);
        let e = expand_alpha(Target::Single { k: 2 }, 0, 0, 7.0, &s).unwrap();
        let want = alpha_1d(2, 7.0, 1.0).unwrap().value * alpha_1d(0, 7.0, 4.0).unwrap().value;
        assert!((e.value - want).abs() < 1e-15);
        assert_eq!(e.terms.len(), 1);
    }

    #[test]
    fn higher_order_improves() {
        let s = spec(&[1.0, 4.0]);
        let exact = expansion_target_value(Target::Single { k: 0 }, 0, 40.0, &s).unwrap();
        let r0 = (expand_alpha(Target::Single { k: 0 }, 0, 0, 40.0, &s).unwrap().value - exact).abs();
        let r2 = (expand_alpha(Target::Single { k: 0 }, 0, 2, 40.0, &s).unwrap().value - exact).abs();
        assert!(r2 < r0, "{r2} vs {r0}");
    }

    #[test]
    fn residual_sign_opposes_first_omitted_term() {
        for (l, rho) in [(vec![1.0, 2.0, 3.0], 30.0), (vec![1.0, 4.0], 60.0), (vec![3.0, 1.0, 2.0], 10.0)] {
            let s = spec(&l);
            for k in 0..=1 {
                let t = Target::Single { k };
                let exact = expansion_target_value(t, 0, rho, &s).unwrap();
                let full = expand_alpha(t, 0, 3, rho, &s).unwrap();
                for p in 0..3 {
                    let partial: f64 = full.terms[..=p].iter().sum();
                    assert!((partial - exact) * full.terms[p + 1] < 0.0, "{l:?} rho={rho} k={k} P={p}");
                }
            }
        }
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn residual_scales_with_the_sliced_variance() {
        // rho and the remaining variance fixed, lambda_n / rho shrinking
        let rho = 40.0;
        let ratios = [1.0 / 80.0, 1.0 / 160.0, 1.0 / 320.0];
        for p in 0..=2usize {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for r in ratios {
                let s = spec(&[r * rho, 4.0]);
                let exact = expansion_target_value(Target::Single { k: 0 }, 0, rho, &s).unwrap();
                let part = expand_alpha(Target::Single { k: 0 }, 0, p, rho, &s).unwrap().value;
                xs.push(r.ln());
                ys.push((part - exact).abs().ln());
            }
            let sl = slope(&xs, &ys);
            assert!((sl - (p as f64 + 1.0)).abs() < 0.3, "P={p}: slope {sl}");
        }
    }

    #[test]
    fn pair_expansion() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let t = Target::Pair { m: 1, a: 1, b: 1 };
        let exact = expansion_target_value(t, 0, 30.0, &s).unwrap();
        let r0 = (expand_alpha(t, 0, 0, 30.0, &s).unwrap().value - exact).abs();
        let r2 = (expand_alpha(t, 0, 2, 30.0, &s).unwrap().value - exact).abs();
        assert!(r2 < r0);
        assert!(expand_alpha(t, 0, 1, 5.0, &spec(&[1.0, 2.0])).is_err());
        assert!(expand_alpha(Target::Pair { m: 0, a: 1, b: 1 }, 0, 1, 5.0, &s).is_err());
    }

    #[test]
    fn expansion_errors() {
        assert!(expand_alpha(Target::Single { k: 0 }, 0, 1, 5.0, &spec(&[1.0])).is_err());
        assert!(expand_alpha(Target::Single { k: 0 }, 0, 5, 5.0, &spec(&[1.0, 2.0])).is_err());
        assert!(expand_alpha(Target::Single { k: 0 }, 2, 1, 5.0, &spec(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn gamma_bracket_limit() {
        let s = spec(&[1.0, 2.0]);
        assert_eq!(gamma_nn_expansion_coeff(true, 0, 1.0, &s).unwrap(), 8.0);
        let finite = gamma_nn_expansion_coeff(false, 0, 400.0, &s).unwrap();
        assert!((finite - 8.0).abs() < 1e-10);
    }

    #[test]
    fn gamma_nn_first_order_improves_and_converges() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let mut prev = f64::INFINITY;
        for rho in [10.0, 20.0, 40.0] {
            let c = gamma_nn_convergence(0, rho, &s).unwrap();
            let gap = (c.gamma_v - c.gamma_1).abs();
            assert!((c.gamma_v - c.first_order).abs() < gap);
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn gamma_nm_cancels() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let r = gamma_nm_cancellation_check(0, 1, 30.0, &s).unwrap();
        for c in &r.checks {
            assert_eq!(c.status, crate::report::Status::Pass, "{c:?}");
        }
        let series = gamma_nm_series(0, 2, 30.0, &s).unwrap();
        assert_eq!(series.joint[0], series.product[0]);
    }

    #[test]
    fn truncated_series_algebra() {
        let a = Truncated(vec![2.0, 1.0, 3.0]);
        let b = Truncated(vec![1.0, -1.0, 0.5]);
        let prod = a.mul(&b);
        assert_eq!(prod.0, vec![2.0, -1.0, 3.0 - 1.0 + 1.0]);
        let back = prod.div(&b).unwrap();
        for (x, y) in back.0.iter().zip(&a.0) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(a.div(&Truncated(vec![0.0, 1.0, 0.0])).is_err());
    }

    #[test]
    fn one_index_bound_grid() {
        for k in 1..=6u32 {
            for i in 1..=50 {
                let ratio = i as f64;
                let a = alpha_1d(k, ratio, 1.0).unwrap().value;
                assert!(a < one_index_bound(k, ratio, 1.0), "k={k} ratio={ratio}");
            }
        }
    }

    #[test]
    fn q_poly_examples() {
        assert_eq!(q_poly(0, 5.0, 2.0), 1.0);
        assert!((q_poly(1, 5.0, 2.0) - 7.0).abs() < 1e-15);
        assert!((q_poly(2, 5.0, 2.0) - (25.0 + 20.0 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn c_three_dimensions_closed_form() {
        // phi = 0 leaves x^p / (p-1)!, maximal at x = p
        for p in [1usize, 5, 40] {
            let want = ((p as f64) * (p as f64).ln() - p as f64 - ln_gamma(p as f64)).exp() / p as f64;
            let got = convergence_c(3, p).unwrap();
            assert!(((got - want) / want).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn c_monotonicity() {
        for v in 2..=6 {
            let e = convergence_estimate(v, 50, 100).unwrap();
            let inc = e.c_values.windows(2).all(|w| w[1] > w[0]);
            let dec = e.c_values.windows(2).all(|w| w[1] < w[0]);
            if v <= 5 {
                assert!(dec, "v={v}");
            } else {
                assert!(inc, "v={v}");
            }
        }
    }

    #[test]
    fn cp_errors() {
        assert!(convergence_c(7, 10).is_err());
        assert!(convergence_c(2, 0).is_err());
        assert!(convergence_estimate(2, 100, 50).is_err());
        assert!(convergence_estimate(2, 50, 201).is_err());
    }

    #[test]
    fn expansion_bound_dominates_alpha() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let b = expansion_bound(0, 1, 10.0, &s, 60).unwrap();
        assert!(b > expansion_target_value(Target::Single { k: 1 }, 0, 10.0, &s).unwrap());
    }
}
