//! Gaussian ball integrals
//! `alpha_k(rho; lambda) = int_{|x|^2 < rho} prod_j (x_j^2 / lambda_j)^{k_j} delta(x_j, lambda_j) dx`.
//!
//! One dimension is closed form through the incomplete gamma function. Up to
//! six dimensions the integral is sliced along the last coordinate and
//! integrated by nested Gauss–Legendre quadrature in the angle `x = sqrt(r) sin(theta)`,
//! which keeps the integrand analytic up to the sphere. Monte Carlo works in any
//! dimension and serves as the independent oracle.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature;
use crate::report::Report;
use crate::special::{odd_double_factorial_f64, regularized_lower_gamma};

/// Largest dimension handled by quadrature.
pub const MAX_QUADRATURE_DIM: usize = 6;
/// Smallest Monte Carlo budget accepted.
pub const MIN_MC_SAMPLES: u64 = 10_000;
const MC_CHUNK: u64 = 1 << 16;
const TAIL_CUT: f64 = 45.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    lambdas: Vec<f64>,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(domain("spectrum needs at least one variance"));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(domain(format!("variances must be finite and positive, got {bad}")));
        }
        Ok(Spectrum { lambdas })
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn get(&self, n: usize) -> f64 {
        self.lambdas[n]
    }

    pub fn max(&self) -> f64 {
        self.lambdas.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.lambdas.iter().cloned().fold(f64::MAX, f64::min)
    }

    /// `lambda_(n)`: the spectrum with entry `n` removed. `None` if nothing is left.
    pub fn without(&self, n: usize) -> Option<Spectrum> {
        self.without_all(&[n])
    }

    /// `lambda_(nm)`.
    pub fn without_pair(&self, n: usize, m: usize) -> Option<Spectrum> {
        self.without_all(&[n, m])
    }

    fn without_all(&self, drop: &[usize]) -> Option<Spectrum> {
        let rest: Vec<f64> = self
            .lambdas
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, &l)| l)
            .collect();
        (!rest.is_empty()).then_some(Spectrum { lambdas: rest })
    }

    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum { lambdas: self.lambdas.iter().map(|l| l * factor).collect() }
    }

    pub fn with_entry(&self, n: usize, value: f64) -> Spectrum {
        let mut lambdas = self.lambdas.clone();
        lambdas[n] = value;
        Spectrum { lambdas }
    }
}

/// Per-dimension multiplicities `(k_1, ..., k_v)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(counts: Vec<u32>) -> Self {
        MultiIndex(counts)
    }

    pub fn zeros(v: usize) -> Self {
        MultiIndex(vec![0; v])
    }

    /// `k` units on dimension `n` (0-based).
    pub fn single(v: usize, n: usize, k: u32) -> Self {
        let mut c = vec![0; v];
        c[n] = k;
        MultiIndex(c)
    }

    pub fn pair(v: usize, n: usize, m: usize) -> Self {
        let mut c = vec![0; v];
        c[n] += 1;
        c[m] += 1;
        MultiIndex(c)
    }

    /// Parses `"i:k,j:k"` with 1-based dimensions; repeated dimensions add up and
    /// the empty string is the zero index.
    pub fn parse(spec: &str, v: usize) -> Result<Self> {
        let mut counts = vec![0u32; v];
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (dim, k) = part
                .split_once(':')
                .ok_or_else(|| domain(format!("index entry '{part}' is not of the form i:k")))?;
            let dim: usize = dim
                .trim()
                .parse()
                .map_err(|_| domain(format!("bad dimension in index entry '{part}'")))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| domain(format!("bad multiplicity in index entry '{part}'")))?;
            if dim == 0 || dim > v {
                return Err(domain(format!("index dimension {dim} outside 1..={v}")));
            }
            counts[dim - 1] += k;
        }
        Ok(MultiIndex(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn bumped(&self, n: usize) -> Self {
        let mut c = self.0.clone();
        c[n] += 1;
        MultiIndex(c)
    }

    /// The `rho -> infinity` value `prod_j (2k_j - 1)!!`.
    pub fn limit(&self) -> f64 {
        self.0.iter().map(|&k| odd_double_factorial_f64(k)).product()
    }

    /// All indices of dimension `v` with total order at most `max_order`.
    pub fn all_up_to(v: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; v];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if pos == cur.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for k in 0..=left {
                cur[pos] = k;
                rec(pos + 1, left - k, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, max_order, &mut cur, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValue {
    pub value: f64,
    pub est_abs_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_kept: u64,
    pub n_total: u64,
    pub seed: u64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

fn one_dim(k: u32, rho: f64, lambda: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Ok(0.0);
    }
    Ok(odd_double_factorial_f64(k) * regularized_lower_gamma(k as f64 + 0.5, rho / (2.0 * lambda))?)
}

/// `alpha^{(1)}_{n:k}(rho; lambda) = (2k-1)!! P(k + 1/2, rho / 2 lambda)`.
pub fn alpha_1d(k: u32, rho: f64, lambda: f64) -> Result<IntegralValue> {
    check_rho(rho)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(domain(format!("variance must be positive, got {lambda}")));
    }
    let value = if rho.is_infinite() { odd_double_factorial_f64(k) } else { one_dim(k, rho, lambda)? };
    Ok(IntegralValue { value, est_abs_error: 1e-14 * value })
}

fn node_count(v: usize) -> usize {
    if v <= 4 {
        48
    } else {
        24
    }
}

/// `(x^2/lambda)^k delta(x, lambda)`.
fn weight(x: f64, lambda: f64, k: u32) -> f64 {
    let u = x * x / lambda;
    let g = (-0.5 * u).exp() / (2.0 * PI * lambda).sqrt();
    if k == 0 {
        g
    } else {
        g * u.powi(k as i32)
    }
}

struct Slice {
    prefixes: Vec<Vec<u32>>,
    /// Per entry: (prefix id, multiplicity in the sliced dimension).
    entries: Vec<(usize, u32)>,
    k_max: u32,
}

fn split_last(set: &[Vec<u32>]) -> Slice {
    let last = set[0].len() - 1;
    let mut ids: BTreeMap<&[u32], usize> = BTreeMap::new();
    let mut prefixes = Vec::new();
    let mut entries = Vec::with_capacity(set.len());
    for idx in set {
        let p = &idx[..last];
        let id = *ids.entry(p).or_insert_with(|| {
            prefixes.push(p.to_vec());
            prefixes.len() - 1
        });
        entries.push((id, idx[last]));
    }
    let k_max = set.iter().map(|i| i[last]).max().unwrap_or(0);
    Slice { prefixes, entries, k_max }
}

fn angular_nodes(r: f64, lambda: f64, k_max: u32, n: usize) -> Vec<(f64, f64)> {
    let sqrt_r = r.sqrt();
    let x_cut = (2.0 * lambda * (TAIL_CUT + 3.0 * k_max as f64)).sqrt();
    let theta_max = if x_cut >= sqrt_r { FRAC_PI_2 } else { (x_cut / sqrt_r).asin() };
    quadrature::rule(n).on_interval(0.0, theta_max)
}

fn slice_contribution(
    lambdas: &[f64],
    r: f64,
    slice: &Slice,
    theta: f64,
    w: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let d = lambdas.len();
    let lambda = lambdas[d - 1];
    let sqrt_r = r.sqrt();
    let (s, c) = theta.sin_cos();
    let x = sqrt_r * s;
    let inner = nested(&lambdas[..d - 1], r * c * c, &slice.prefixes, n)?;
    let base = 2.0 * w * sqrt_r * c;
    Ok(slice
        .entries
        .iter()
        .map(|&(pid, k)| base * weight(x, lambda, k) * inner[pid])
        .collect())
}

/// Values for a set of distinct indices, all of dimension `lambdas.len()`.
fn nested(lambdas: &[f64], r: f64, set: &[Vec<u32>], n: usize) -> Result<Vec<f64>> {
    if r <= 0.0 {
        return Ok(vec![0.0; set.len()]);
    }
    let d = lambdas.len();
    if d == 1 {
        return set.iter().map(|idx| one_dim(idx[0], r, lambdas[0])).collect();
    }
    let slice = split_last(set);
    let mut acc = vec![0.0; set.len()];
    for (theta, w) in angular_nodes(r, lambdas[d - 1], slice.k_max, n) {
        for (a, t) in acc.iter_mut().zip(slice_contribution(lambdas, r, &slice, theta, w, n)?) {
            *a += t;
        }
    }
    Ok(acc)
}

/// Outer level with `outer_n` nodes, parallel over nodes and reduced in node order.
fn outer(lambdas: &[f64], r: f64, set: &[Vec<u32>], inner_n: usize, outer_n: usize) -> Result<Vec<f64>> {
    let d = lambdas.len();
    let slice = split_last(set);
    let nodes = angular_nodes(r, lambdas[d - 1], slice.k_max, outer_n);
    let parts: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&(theta, w)| slice_contribution(lambdas, r, &slice, theta, w, inner_n))
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0; set.len()];
    for part in parts {
        for (a, t) in acc.iter_mut().zip(part) {
            *a += t;
        }
    }
    Ok(acc)
}

/// Evaluates several indices at one point, sharing the nested slices.
pub fn alpha_batch(indices: &[MultiIndex], rho: f64, spectrum: &Spectrum) -> Result<Vec<IntegralValue>> {
    check_rho(rho)?;
    let v = spectrum.dim();
    if let Some(bad) = indices.iter().find(|i| i.dim() != v) {
        return Err(domain(format!("index of length {} for a spectrum of dimension {v}", bad.dim())));
    }
    if rho.is_infinite() {
        return Ok(indices
            .iter()
            .map(|i| {
                let value = i.limit();
                IntegralValue { value, est_abs_error: 1e-15 * value }
            })
            .collect());
    }
    if v > MAX_QUADRATURE_DIM {
        return Err(Error::Capability(v));
    }
    let mut distinct: Vec<Vec<u32>> = indices.iter().map(|i| i.0.clone()).collect();
    distinct.sort();
    distinct.dedup();
    if v == 1 {
        return indices.iter().map(|i| alpha_1d(i.0[0], rho, spectrum.get(0))).collect();
    }
    let n = node_count(v);
    let fine = outer(spectrum.lambdas(), rho, &distinct, n, n)?;
    let coarse = outer(spectrum.lambdas(), rho, &distinct, n, 2 * n / 3)?;
    let mut out = Vec::with_capacity(indices.len());
    for idx in indices {
        let pos = distinct.binary_search(&idx.0).expect("index present");
        let value = fine[pos];
        if !value.is_finite() {
            return Err(Error::Numeric(format!("non-finite ball integral at rho = {rho}")));
        }
        let rounding = 16.0 * f64::EPSILON * v as f64 * value.abs();
        out.push(IntegralValue { value, est_abs_error: (fine[pos] - coarse[pos]).abs() + rounding });
    }
    Ok(out)
}

pub fn alpha(index: &MultiIndex, rho: f64, spectrum: &Spectrum) -> Result<IntegralValue> {
    Ok(alpha_batch(std::slice::from_ref(index), rho, spectrum)?[0])
}

#[derive(Clone, Copy, Default)]
struct Sums {
    kept: u64,
    w: f64,
    w2: f64,
}

/// Monte Carlo estimates for several indices from one shared sample.
pub fn alpha_mc_batch(
    indices: &[MultiIndex],
    rho: f64,
    spectrum: &Spectrum,
    n_total: u64,
    seed: u64,
) -> Result<Vec<MCEstimate>> {
    check_rho(rho)?;
    if n_total < MIN_MC_SAMPLES {
        return Err(domain(format!("Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n_total}")));
    }
    let v = spectrum.dim();
    if let Some(bad) = indices.iter().find(|i| i.dim() != v) {
        return Err(domain(format!("index of length {} for a spectrum of dimension {v}", bad.dim())));
    }
    let sd: Vec<f64> = spectrum.lambdas().iter().map(|l| l.sqrt()).collect();
    let chunks = n_total.div_ceil(MC_CHUNK);
    let per_chunk: Vec<Vec<Sums>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = MC_CHUNK.min(n_total - c * MC_CHUNK);
            let mut sums = vec![Sums::default(); indices.len()];
            let mut u = vec![0.0; v];
            for _ in 0..len {
                let mut r2 = 0.0;
                for j in 0..v {
                    let z: f64 = rng.sample(StandardNormal);
                    let x = z * sd[j];
                    r2 += x * x;
                    u[j] = z * z;
                }
                if r2 < rho {
                    for (s, idx) in sums.iter_mut().zip(indices) {
                        let w: f64 = idx.0.iter().zip(&u).map(|(&k, &uj)| uj.powi(k as i32)).product();
                        s.kept += 1;
                        s.w += w;
                        s.w2 += w * w;
                    }
                }
            }
            sums
        })
        .collect();
    let mut total = vec![Sums::default(); indices.len()];
    for chunk in per_chunk {
        for (t, s) in total.iter_mut().zip(chunk) {
            t.kept += s.kept;
            t.w += s.w;
            t.w2 += s.w2;
        }
    }
    let n = n_total as f64;
    total
        .into_iter()
        .map(|t| {
            if t.kept == 0 {
                return Err(Error::DegenerateAcceptance { rho, n_total });
            }
            let mean = t.w / n;
            let var = (t.w2 / n - mean * mean).max(0.0) * n / (n - 1.0);
            Ok(MCEstimate { mean, std_error: (var / n).sqrt(), n_kept: t.kept, n_total, seed })
        })
        .collect()
}

pub fn alpha_mc(index: &MultiIndex, rho: f64, spectrum: &Spectrum, n_total: u64, seed: u64) -> Result<MCEstimate> {
    Ok(alpha_mc_batch(std::slice::from_ref(index), rho, spectrum, n_total, seed)?[0])
}

/// Relative step of the structural finite differences.
pub const FD_STEP: f64 = 1e-5;
/// Residual bound for the structural identities.
pub const IDENTITY_TOL: f64 = 1e-6;

/// `d/dt f(e^t)` at `t = 0` by central differences, Richardson-extrapolated once.
pub(crate) fn log_derivative<F>(mut f: F, h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let d = |fp: Vec<f64>, fm: Vec<f64>, step: f64| -> Vec<f64> {
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
    };
    let coarse = d(f(h.exp())?, f((-h).exp())?, h);
    let fine = d(f((0.5 * h).exp())?, f((-0.5 * h).exp())?, 0.5 * h);
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

fn values(indices: &[MultiIndex], rho: f64, spectrum: &Spectrum) -> Result<Vec<f64>> {
    Ok(alpha_batch(indices, rho, spectrum)?.into_iter().map(|a| a.value).collect())
}

/// Differential identities by finite differences and the hierarchy inequalities
/// directly, for every index up to `order_cap`.
pub fn verify_structural(rho: f64, spectrum: &Spectrum, order_cap: u32) -> Result<Report> {
    check_rho(rho)?;
    if order_cap > 4 {
        return Err(domain(format!("structural checks support order_cap <= 4, got {order_cap}")));
    }
    let v = spectrum.dim();
    let base = MultiIndex::all_up_to(v, order_cap);
    let mut all = MultiIndex::all_up_to(v, order_cap + 1);
    all.sort();
    let pos = |i: &MultiIndex| all.binary_search(i).expect("index enumerated");
    let at = values(&all, rho, spectrum)?;
    let rho_d = log_derivative(|s| values(&base, rho * s, spectrum), FD_STEP)?;
    let lambda_d: Vec<Vec<f64>> = (0..v)
        .map(|j| log_derivative(|s| values(&base, rho, &spectrum.with_entry(j, spectrum.get(j) * s)), FD_STEP))
        .collect::<Result<_>>()?;

    let mut report = Report::new("structural");
    let mut worst = [0.0f64; 3];
    for (b, idx) in base.iter().enumerate() {
        let a = at[pos(idx)];
        let lam_sum: f64 = lambda_d.iter().map(|d| d[b]).sum();
        let scale = a.abs().max(f64::MIN_POSITIVE);
        worst[0] = worst[0].max((rho_d[b] + lam_sum).abs() / scale);
        let up: f64 = (0..v).map(|j| at[pos(&idx.bumped(j))]).sum();
        let rhs = 0.5 * (v as f64 + 2.0 * idx.order() as f64) * a - 0.5 * up;
        worst[1] = worst[1].max((rho_d[b] - rhs).abs() / scale);
        for j in 0..v {
            let rhs = 0.5 * (at[pos(&idx.bumped(j))] - (2.0 * idx.counts()[j] as f64 + 1.0) * a);
            worst[2] = worst[2].max((lambda_d[j][b] - rhs).abs() / scale);
        }
    }
    report.identity("scaling: rho d_rho alpha + sum lambda_r d_r alpha = 0", worst[0], IDENTITY_TOL);
    report.identity("recursion: rho d_rho alpha = (v+2n)/2 alpha - 1/2 sum alpha_+k", worst[1], IDENTITY_TOL);
    report.identity("lambda derivative: lambda_k d_k alpha = (alpha_+k - (2n_k+1) alpha)/2", worst[2], IDENTITY_TOL);

    for n in 0..v {
        let lam = spectrum.get(n);
        for k in 1..=order_cap {
            let upper = at[pos(&MultiIndex::single(v, n, k))];
            let lower = at[pos(&MultiIndex::single(v, n, k - 1))];
            let err = 1e-13 * upper.abs().max(lower.abs());
            report.bound(format!("hierarchy: alpha_{{{n1}:{k}}} <= (2k-1) alpha_{{{n1}:{km}}}", n1 = n + 1, km = k - 1),
                (2.0 * k as f64 - 1.0) * lower - upper, err);
            for p in 0..k {
                let lower = at[pos(&MultiIndex::single(v, n, p))];
                let bound = (rho / lam).powi((k - p) as i32) * lower;
                report.bound(format!("low dominance: alpha_{{{}:{k}}} <= (rho/lambda)^{} alpha_{{{}:{p}}}", n + 1, k - p, n + 1),
                    bound - upper, 1e-13 * bound.abs().max(upper.abs()));
            }
        }
    }

    let far = 100.0 * spectrum.max();
    let far_d = log_derivative(|s| values(&base, far * s, spectrum), FD_STEP)?;
    let worst_far = far_d.iter().zip(&base).map(|(d, i)| d.abs() / i.limit()).fold(0.0, f64::max);
    report.identity(format!("rho d_rho alpha vanishes at rho = {far}"), worst_far, IDENTITY_TOL);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::erf;

    fn spec(l: &[f64]) -> Spectrum {
        Spectrum::new(l.to_vec()).unwrap()
    }

    #[test]
    fn one_dim_limits() {
        assert!((alpha_1d(0, 1e9, 1.0).unwrap().value - 1.0).abs() < 1e-15);
        assert!((alpha_1d(2, 1e9, 1.0).unwrap().value - 3.0).abs() < 1e-14);
        assert_eq!(alpha_1d(3, f64::INFINITY, 2.0).unwrap().value, 15.0);
        for (rho, lam) in [(0.3, 1.0), (1.0, 2.0), (7.0, 0.5)] {
            let v = alpha_1d(0, rho, lam).unwrap().value;
            assert!((v - erf((rho / (2.0 * lam) as f64).sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn one_dim_errors() {
        assert!(alpha_1d(0, 0.0, 1.0).is_err());
        assert!(alpha_1d(0, -1.0, 1.0).is_err());
        assert!(alpha_1d(0, 1.0, 0.0).is_err());
        assert!(Spectrum::new(vec![1.0, -2.0]).is_err());
        assert!(Spectrum::new(vec![]).is_err());
    }

    #[test]
    fn equal_variance_plane_is_chi_square() {
        let s = spec(&[1.0, 1.0]);
        for rho in [0.01, 0.5, 2.0, 10.0, 60.0] {
            let a = alpha(&MultiIndex::zeros(2), rho, &s).unwrap();
            let want = -(-rho / 2.0 as f64).exp_m1();
            assert!((a.value - want).abs() < 1e-13, "rho={rho}: {} vs {want}", a.value);
        }
    }

    #[test]
    fn equal_variance_moments_in_three_dimensions() {
        // chi^2_3 CDF and E[x_1^2 1{ball}] = P(chi^2_5 < rho) for unit variances
        let s = spec(&[1.0, 1.0, 1.0]);
        let rho = 4.0;
        let a = alpha_batch(&[MultiIndex::zeros(3), MultiIndex::single(3, 0, 1)], rho, &s).unwrap();
        let p3 = regularized_lower_gamma(1.5, rho / 2.0).unwrap();
        let p5 = regularized_lower_gamma(2.5, rho / 2.0).unwrap();
        assert!((a[0].value - p3).abs() < 1e-13);
        assert!((a[1].value - p5).abs() < 1e-13);
    }

    #[test]
    fn error_estimate_is_small_and_honest() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let a = alpha(&MultiIndex::new(vec![0, 1, 1]), 10.0, &s).unwrap();
        assert!(a.est_abs_error < 1e-12 * a.value);
    }

    #[test]
    fn bounded_by_factorized_limit() {
        let s = spec(&[1.0, 2.0, 0.5, 3.0]);
        let all = MultiIndex::all_up_to(4, 2);
        for rho in [0.5, 5.0, 50.0] {
            for (idx, a) in all.iter().zip(alpha_batch(&all, rho, &s).unwrap()) {
                assert!(a.value > 0.0 && a.value <= idx.limit());
            }
        }
    }

    #[test]
    fn large_rho_factorizes() {
        let s = spec(&[1.0, 2.0, 3.0]);
        let idx = MultiIndex::new(vec![2, 1, 0]);
        let a = alpha(&idx, 400.0, &s).unwrap().value;
        assert!((a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn five_and_six_dimensions() {
        let s = spec(&[1.0; 6]);
        let rho = 5.0;
        let a = alpha(&MultiIndex::zeros(6), rho, &s).unwrap().value;
        assert!((a - regularized_lower_gamma(3.0, rho / 2.0).unwrap()).abs() < 1e-12);
        let s5 = spec(&[1.0; 5]);
        let a = alpha(&MultiIndex::zeros(5), rho, &s5).unwrap().value;
        assert!((a - regularized_lower_gamma(2.5, rho / 2.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn seven_dimensions_need_monte_carlo() {
        let s = spec(&[1.0; 7]);
        assert!(matches!(alpha(&MultiIndex::zeros(7), 3.0, &s), Err(Error::Capability(7))));
        assert!(alpha_mc(&MultiIndex::zeros(7), 3.0, &s, 20_000, 1).is_ok());
    }

    #[test]
    fn index_parsing() {
        assert_eq!(MultiIndex::parse("1:2", 1).unwrap().counts(), &[2]);
        assert_eq!(MultiIndex::parse("", 2).unwrap().counts(), &[0, 0]);
        assert_eq!(MultiIndex::parse("2:1, 3:1", 3).unwrap().counts(), &[0, 1, 1]);
        assert_eq!(MultiIndex::parse("1:1,1:1", 2).unwrap().counts(), &[2, 0]);
        for bad in ["1", "0:1", "3:1", "a:1", "1:x", "1:-1"] {
            assert!(MultiIndex::parse(bad, 2).is_err(), "{bad}");
        }
    }

    #[test]
    fn enumerates_indices() {
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(3, 4).len(), 35);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_unbiased() {
        let s = spec(&[1.0]);
        let idx = MultiIndex::single(1, 0, 1);
        let a = alpha_mc(&idx, 1.0, &s, 200_000, 7).unwrap();
        let b = alpha_mc(&idx, 1.0, &s, 200_000, 7).unwrap();
        assert_eq!(a, b);
        let exact = alpha_1d(1, 1.0, 1.0).unwrap().value;
        assert!((a.mean - exact).abs() < 3.0 * a.std_error);
        assert!(a.n_kept <= a.n_total);
    }

    #[test]
    fn monte_carlo_unconstrained() {
        let s = spec(&[1.0, 2.0]);
        let m = alpha_mc(&MultiIndex::zeros(2), f64::INFINITY, &s, 10_000, 3).unwrap();
        assert_eq!(m.n_kept, m.n_total);
        assert_eq!(m.mean, 1.0);
    }

    #[test]
    fn monte_carlo_errors() {
        let s = spec(&[1.0, 1.0]);
        assert!(alpha_mc(&MultiIndex::zeros(2), 1.0, &s, 100, 0).is_err());
        assert!(matches!(
            alpha_mc(&MultiIndex::zeros(2), 1e-12, &s, 10_000, 0),
            Err(Error::DegenerateAcceptance { .. })
        ));
    }

    #[test]
    fn structural_report_at_reference_point() {
        let r = verify_structural(3.0, &spec(&[1.0, 2.0]), 4).unwrap();
        for c in &r.checks {
            assert_eq!(c.status, crate::report::Status::Pass, "{c:?}");
        }
    }

    #[test]
    fn structural_hierarchy_in_one_dimension() {
        let r = verify_structural(2.0, &spec(&[1.0]), 4).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.checks.iter().filter(|c| c.name.starts_with("hierarchy")).count() == 4);
    }
}
