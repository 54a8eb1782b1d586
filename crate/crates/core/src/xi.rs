//! Coefficient algebra of the weak-truncation expansion.
//!
//! An observable `f` is expanded as
//! `f = sum_q (-1)^q (lambda_n/rho)^q sum_e Xi_f^{(q;e)} eta_0^{e_0} ... eta_q^{e_q}`
//! with `eta_k` the coefficient functions of the reduced spectrum. Coefficients are
//! kept in maps keyed by `(q, e)`; products of observables convolve the maps.
//! The common factors `alpha^{(1)} alpha^{(v-1)}` are divided out, so finite-rho
//! coefficients are relative to them and the `rho -> infinity` limit uses
//! `alpha^{(1)}_{n:j} -> (2j-1)!!`.

use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ball::{alpha_1d, Spectrum};
use crate::error::{domain, Result};
use crate::eta::eta_table;
use crate::report::{Report, Status};
use crate::special::{double_factorial, factorial, multinomial};

/// Largest order handled by the exponent enumeration.
pub const MAX_Q: usize = 12;
/// Largest order of the finite-rho coefficient maps.
pub const FINITE_Q_MAX: usize = 2;

pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(i: i64) -> Self;
}

impl Scalar for f64 {
    fn from_int(i: i64) -> Self {
        i as f64
    }
}

impl Scalar for BigRational {
    fn from_int(i: i64) -> Self {
        BigRational::from_integer(BigInt::from(i))
    }
}

fn big(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Exponent vector `(e_0, ..., e_q)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector {
    pub entries: Vec<u32>,
}

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        ExponentVector { entries }
    }

    pub fn from_tail(e0: u32, tail: &[u32]) -> Self {
        let mut entries = vec![e0];
        entries.extend_from_slice(tail);
        ExponentVector { entries }
    }

    pub fn q(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn tail(&self) -> &[u32] {
        &self.entries[1.min(self.entries.len())..]
    }

    pub fn power_count(&self) -> usize {
        power_count(self.tail())
    }
}

/// `sum_k k e_k` over a tail `(e_1, ..., e_q)`.
pub fn power_count(tail: &[u32]) -> usize {
    tail.iter().enumerate().map(|(i, &e)| (i + 1) * e as usize).sum()
}

/// All tails `(e_1, ..., e_q)` with `sum_k k e_k = m`, in lexicographic order.
pub fn enumerate_exponents(q: usize, m: usize) -> Result<Vec<Vec<u32>>> {
    if q > MAX_Q {
        return Err(domain(format!("exponent enumeration handles q <= {MAX_Q}, got {q}")));
    }
    fn rec(k: usize, q: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k > q {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left / k {
            cur.push(e as u32);
            rec(k + 1, q, left - e * k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, q, m, &mut Vec::with_capacity(q), &mut out);
    Ok(out)
}

/// Number of integer partitions of `n`.
pub fn partition_count(n: usize) -> u64 {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for s in part..=n {
            p[s] += p[s - part];
        }
    }
    p[n]
}

fn trimmed(e: &[u32]) -> Vec<u32> {
    let mut v = e.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0);
    }
    v
}

fn add_vectors(a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)).collect()
}

fn multinomial_of(tail: &[u32]) -> BigInt {
    BigInt::from(multinomial(tail))
}

/// Coefficient map `(q, e) -> Xi^{(q;e)}` through order `q_max`; trailing zeros of `e` are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct XiMap<T> {
    pub q_max: usize,
    pub coeffs: BTreeMap<(usize, Vec<u32>), T>,
}

impl<T: Scalar> XiMap<T> {
    pub fn new(q_max: usize) -> Self {
        XiMap { q_max, coeffs: BTreeMap::new() }
    }

    /// The constant observable `1`.
    pub fn identity(q_max: usize) -> Self {
        let mut m = Self::new(q_max);
        m.add(0, &[0], T::one());
        m
    }

    pub fn add(&mut self, q: usize, e: &[u32], value: T) {
        if q > self.q_max {
            return;
        }
        let key = (q, trimmed(e));
        let next = match self.coeffs.remove(&key) {
            Some(v) => v + value,
            None => value,
        };
        if next != T::zero() {
            self.coeffs.insert(key, next);
        }
    }

    pub fn get(&self, q: usize, e: &[u32]) -> T {
        self.coeffs.get(&(q, trimmed(e))).cloned().unwrap_or_else(T::zero)
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut m = Self::new(self.q_max);
        for ((q, e), v) in &self.coeffs {
            m.add(*q, e, c.clone() * v.clone());
        }
        m
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.q_max = self.q_max.min(other.q_max);
        m.coeffs.retain(|(q, _), _| *q <= m.q_max);
        for ((q, e), v) in &other.coeffs {
            m.add(*q, e, v.clone());
        }
        m
    }

    pub fn product(&self, other: &Self) -> Self {
        let q_max = self.q_max.min(other.q_max);
        let mut m = Self::new(q_max);
        for ((l, c), x) in &self.coeffs {
            for ((k, d), y) in &other.coeffs {
                if l + k <= q_max {
                    m.add(l + k, &add_vectors(c, d), x.clone() * y.clone());
                }
            }
        }
        m
    }

    /// `sum_{e_0} Xi^{(q; e_0, tail)}`.
    pub fn sum_over_e0(&self, q: usize, tail: &[u32]) -> T {
        let t = trimmed(&[&[0], tail].concat());
        self.coeffs
            .iter()
            .filter(|((qq, e), _)| *qq == q && e.len() == t.len().max(1) && e[1..] == t[1..])
            .fold(T::zero(), |acc, (_, v)| acc + v.clone())
    }
}

/// Single entry of the convolution of two maps.
pub fn xi_product<T: Scalar>(f: &XiMap<T>, g: &XiMap<T>, q: usize, e: &[u32]) -> T {
    let target = trimmed(e);
    let mut acc = T::zero();
    for ((l, c), x) in &f.coeffs {
        for ((k, d), y) in &g.coeffs {
            if l + k == q && trimmed(&add_vectors(c, d)) == target {
                acc = acc + x.clone() * y.clone();
            }
        }
    }
    acc
}

pub fn xi_sum<T: Scalar>(f: &XiMap<T>, g: &XiMap<T>, q: usize, e: &[u32]) -> T {
    f.get(q, e) + g.get(q, e)
}

fn factorial_scalar<T: Scalar>(j: usize) -> T {
    (1..=j as i64).fold(T::one(), |acc, i| acc * T::from_int(i))
}

fn unit(q: usize) -> Vec<u32> {
    let mut e = vec![0; q + 1];
    e[q] = 1;
    e
}

/// Map of `alpha_{n:k}` from the one-index values `a(j) = alpha^{(1)}_{n:j} / alpha^{(1)}`.
pub fn alpha_nk_map<T: Scalar>(k: u32, q_max: usize, a: &dyn Fn(u32) -> T) -> XiMap<T> {
    let mut m = XiMap::new(q_max);
    for q in 0..=q_max {
        m.add(q, &unit(q), a(k + q as u32) / factorial_scalar(q));
    }
    m
}

/// Map of `alpha^{-1}`: `(-1)^{sum e} delta_{e_0,0} multinomial(e) prod_j [a(j)/j!]^{e_j}`.
pub fn alpha_inverse_map<T: Scalar>(q_max: usize, a: &dyn Fn(u32) -> T) -> Result<XiMap<T>> {
    let mut m = XiMap::new(q_max);
    for q in 0..=q_max {
        for tail in enumerate_exponents(q, q)? {
            let total: u32 = tail.iter().sum();
            let sign = if total % 2 == 0 { T::one() } else { -T::one() };
            let mult = T::from_int(multinomial_of(&tail).to_i64().expect("multinomial fits i64 for q <= 12"));
            let mut v = sign * mult;
            for (i, &ej) in tail.iter().enumerate() {
                let j = i + 1;
                let f = a(j as u32) / factorial_scalar(j);
                for _ in 0..ej {
                    v = v * f.clone();
                }
            }
            m.add(q, &[&[0], tail.as_slice()].concat(), v);
        }
    }
    Ok(m)
}

/// Maps of `D_n = alpha_nn alpha - alpha_n^2 - 2 alpha_n alpha`, `D_d = alpha^{-2}` and `Delta_n = D_n D_d`.
pub struct DeltaMaps<T> {
    pub dn: XiMap<T>,
    pub dd: XiMap<T>,
    pub delta: XiMap<T>,
}

pub fn delta_maps<T: Scalar>(q_max: usize, a: &dyn Fn(u32) -> T) -> Result<DeltaMaps<T>> {
    let a0 = alpha_nk_map(0, q_max, a);
    let a1 = alpha_nk_map(1, q_max, a);
    let a2 = alpha_nk_map(2, q_max, a);
    let dn = a2
        .product(&a0)
        .sum(&a1.product(&a1).scaled(-T::one()))
        .sum(&a1.product(&a0).scaled(T::from_int(-2)));
    let inv = alpha_inverse_map(q_max, a)?;
    let dd = inv.product(&inv);
    let delta = dn.product(&dd);
    Ok(DeltaMaps { dn, dd, delta })
}

fn limit_a(j: u32) -> BigRational {
    big(double_factorial(2 * j as i64 - 1).expect("odd double factorial"))
}

/// `(2j-1)!!/j!`.
fn limit_weight(j: usize) -> BigRational {
    limit_a(j as u32) / big(BigInt::from(factorial(j as u32)))
}

/// `rho -> infinity` limit of `Xi^{(q;e)}_{alpha_{n:k}}`: `(2(k+q)-1)!!/q!` at `e = unit_q`, else 0.
pub fn xi_alpha_nk_limit(q: usize, e: &[u32], k: u32) -> BigRational {
    if trimmed(e) == trimmed(&unit(q)) {
        limit_a(k + q as u32) / big(BigInt::from(factorial(q as u32)))
    } else {
        BigRational::zero()
    }
}

/// `Psi^{(p; e)}` by enumerating splits `e = c + d` with `P(c) = l`, `P(d) = p - l`.
pub fn psi(p: usize, tail: &[u32]) -> Result<BigInt> {
    let q = tail.len();
    if power_count(tail) != p {
        return Ok(BigInt::zero());
    }
    let mut acc = BigInt::zero();
    for l in 0..=p {
        for c in enumerate_exponents(q, l)? {
            if c.iter().zip(tail).all(|(ci, ei)| ci <= ei) {
                let d: Vec<u32> = tail.iter().zip(&c).map(|(e, c)| e - c).collect();
                acc += multinomial_of(&c) * multinomial_of(&d);
            }
        }
    }
    Ok(acc)
}

/// `Psi^{(p; e)}` summing over every sub-vector `0 <= c <= e`, the empty one included.
pub fn psi_theta(p: usize, tail: &[u32]) -> BigInt {
    if power_count(tail) != p {
        return BigInt::zero();
    }
    let mut acc = BigInt::zero();
    let mut c = vec![0u32; tail.len()];
    loop {
        let d: Vec<u32> = tail.iter().zip(&c).map(|(e, c)| e - c).collect();
        acc += multinomial_of(&c) * multinomial_of(&d);
        let mut i = 0;
        while i < c.len() && c[i] == tail[i] {
            c[i] = 0;
            i += 1;
        }
        if i == c.len() {
            return acc;
        }
        c[i] += 1;
    }
}

fn dec(tail: &[u32], idx: &[usize]) -> Vec<u32> {
    let mut t = tail.to_vec();
    for &i in idx {
        t[i - 1] -= 1;
    }
    t
}

fn check_tail(q: usize, tail: &[u32]) -> Result<()> {
    if tail.len() != q || power_count(tail) != q {
        return Err(domain(format!("tail {tail:?} is not in S_{q}^{q}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega {
    Zero,
    One,
}

/// `Omega_0` or `Omega_1` for a tail with `P(e) = q`.
pub fn omega(which: Omega, q: usize, tail: &[u32]) -> Result<BigInt> {
    check_tail(q, tail)?;
    let mut acc = BigInt::zero();
    match which {
        Omega::Zero => {
            for l in 1..=q {
                for s in 1..l {
                    let r = l - s;
                    if s >= r || tail[s - 1] == 0 || tail[r - 1] == 0 {
                        continue;
                    }
                    let w = ((r - s) * (r - s)) as i64;
                    acc += psi(q - l, &dec(tail, &[s, r]))? * w;
                }
            }
        }
        Omega::One => {
            for l in 1..=q {
                if tail[l - 1] >= 1 {
                    acc += psi(q - l, &dec(tail, &[l]))? * (l * l) as i64;
                }
            }
        }
    }
    Ok(acc)
}

/// Closed form of `lim sum_{e_0} Xi^{(q;e)}_{Delta_n}`:
/// `4 (-1)^{sum e} prod_k [(2k-1)!!/k!]^{e_k} (Omega_0 - Omega_1)`.
pub fn theorem51_limit(q: usize, tail: &[u32]) -> Result<BigRational> {
    check_tail(q, tail)?;
    let total: u32 = tail.iter().sum();
    let mut w = big(if total % 2 == 0 { 4 } else { -4 });
    for (i, &ek) in tail.iter().enumerate() {
        for _ in 0..ek {
            w *= limit_weight(i + 1);
        }
    }
    let diff = omega(Omega::Zero, q, tail)? - omega(Omega::One, q, tail)?;
    Ok(w * big(diff))
}

/// Closed form of `lim Xi^{(q;e)}_{D_n}`.
pub fn xi_dn_limit(q: usize, e: &[u32]) -> BigRational {
    let e = trimmed(e);
    let mut acc = BigRational::zero();
    for l in 0..=q {
        for m in 0..l {
            if l + m != q {
                continue;
            }
            let mut want = vec![0u32; q + 1];
            want[l] = 1;
            want[m] = 1;
            if trimmed(&want) == e {
                acc += big(4 * ((l - m) * (l - m)) as i64) * limit_weight(l) * limit_weight(m);
            }
        }
    }
    acc
}

/// Closed form of `lim Xi^{(q;e)}_{D_d}`.
pub fn xi_dd_limit(q: usize, e: &[u32]) -> Result<BigRational> {
    let ev = ExponentVector::new(e.to_vec());
    if e.first().copied().unwrap_or(0) != 0 || ev.power_count() != q {
        return Ok(BigRational::zero());
    }
    let mut tail = ev.tail().to_vec();
    tail.resize(q.max(tail.len()), 0);
    let total: u32 = tail.iter().sum();
    let mut w = big(if total % 2 == 0 { 1 } else { -1 });
    for (i, &ej) in tail.iter().enumerate() {
        for _ in 0..ej {
            w *= limit_weight(i + 1);
        }
    }
    Ok(w * big(psi(q, &tail)?))
}

pub fn limit_delta_maps(q_max: usize) -> Result<DeltaMaps<BigRational>> {
    delta_maps(q_max, &limit_a)
}

fn tail_name(tail: &[u32]) -> String {
    format!("({})", tail.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
}

fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn push_claim(report: &mut Report, name: String, ok: bool, margin: f64) {
    report.push(name, if ok { Status::Pass } else { Status::ViolatedClaim }, margin, margin);
}

/// Exhaustive check of `Omega_0 < Omega_1`, the pointwise weight inequality behind it,
/// and the sign law `sign = (-1)^{sum e - 1}` for every tail up to `q_max`.
pub fn omega_inequality_scan(q_max: usize) -> Result<Report> {
    if q_max > 8 {
        return Err(domain(format!("omega scan handles q <= 8, got {q_max}")));
    }
    let mut report = Report::new("omega-inequality");
    for q in 1..=q_max {
        for tail in enumerate_exponents(q, q)? {
            let o0 = omega(Omega::Zero, q, &tail)?;
            let o1 = omega(Omega::One, q, &tail)?;
            let gap = (&o1 - &o0).to_f64().unwrap_or(f64::NAN);
            push_claim(&mut report, format!("Omega_0 < Omega_1 q={q} e={}", tail_name(&tail)), o0 < o1, gap);
            let lim = theorem51_limit(q, &tail)?;
            let total: u32 = tail.iter().sum();
            let want_positive = total % 2 == 1;
            let ok = if want_positive { lim.is_positive() } else { lim.is_negative() };
            push_claim(&mut report, format!("limit sign q={q} e={}", tail_name(&tail)), ok, rat_f64(&lim));
        }
        for t in 1..=q {
            for c in enumerate_exponents(q, t)? {
                let n: i64 = c.iter().map(|&x| x as i64).sum();
                let mut lhs = 0i64;
                for r in 1..=q {
                    for s in 1..r {
                        if r + s <= q {
                            lhs += ((r - s) * (r - s)) as i64 * c[s - 1] as i64 * c[r - 1] as i64;
                        }
                    }
                }
                let rhs: i64 = (1..=q).map(|l| (l * l) as i64 * c[l - 1] as i64).sum::<i64>() * (n - 1);
                let name = format!("weight inequality q={q} c={}", tail_name(&c));
                if n == 1 {
                    push_claim(&mut report, format!("{name} (single part, both sides zero)"), lhs == 0 && rhs == 0, 0.0);
                } else {
                    push_claim(&mut report, name, lhs < rhs, (rhs - lhs) as f64);
                }
            }
        }
    }
    Ok(report)
}

/// The limit of `sum_{e_0} Xi_{Delta_n}` by explicit convolution of the `D_n` and `D_d`
/// maps, against the closed form; plus the closed forms of `D_n`, `D_d` themselves.
pub fn xi_dn_dd_convolution_check(q_max: usize) -> Result<Report> {
    if q_max > 6 {
        return Err(domain(format!("convolution check handles q <= 6, got {q_max}")));
    }
    let maps = limit_delta_maps(q_max)?;
    let mut report = Report::new("xi-convolution");
    for q in 0..=q_max {
        for tail in enumerate_exponents(q, q)? {
            let conv = maps.delta.sum_over_e0(q, &tail);
            let closed = if q == 0 { BigRational::zero() } else { theorem51_limit(q, &tail)? };
            let resid = rat_f64(&(conv.clone() - closed).abs());
            report.identity(format!("Delta_n limit q={q} e={}", tail_name(&tail)), resid, 0.0);
        }
    }
    let mut dn_ok = true;
    let mut dd_ok = true;
    for ((q, e), v) in &maps.dn.coeffs {
        dn_ok &= *v == xi_dn_limit(*q, e);
    }
    for q in 0..=q_max {
        for e0 in 0..=2u32 {
            for tail in enumerate_exponents(q, q)? {
                let e = ExponentVector::from_tail(e0, &tail).entries;
                dn_ok &= maps.dn.get(q, &e) == xi_dn_limit(q, &e);
                dd_ok &= maps.dd.get(q, &e) == xi_dd_limit(q, &e)?;
            }
        }
    }
    let dd_e0 = maps.dd.coeffs.keys().all(|(_, e)| e[0] == 0);
    report.flag("D_n convolution equals closed form", dn_ok, 0.0);
    report.flag("D_d convolution equals closed form", dd_ok, 0.0);
    report.flag("D_d vanishes unless e_0 = 0", dd_e0, 0.0);
    Ok(report)
}

/// `alpha^{-1} * alpha` summed over `e_0` is the identity observable through `q_max`.
pub fn alpha_inverse_check(q_max: usize) -> Result<Report> {
    let inv = alpha_inverse_map(q_max, &limit_a)?;
    let prod = inv.product(&alpha_nk_map(0, q_max, &limit_a));
    let mut report = Report::new("alpha-inverse");
    for q in 0..=q_max {
        for tail in enumerate_exponents(q, q)? {
            let want = if q == 0 { BigRational::one() } else { BigRational::zero() };
            let got = prod.sum_over_e0(q, &tail);
            report.identity(
                format!("alpha^-1 alpha q={q} e={}", tail_name(&tail)),
                rat_f64(&(got - want).abs()),
                0.0,
            );
        }
    }
    Ok(report)
}

/// Finite-rho maps through `q <= 2`, relative to `alpha^{(1)} alpha^{(v-1)}`.
pub fn delta_maps_finite(rho: f64, lambda_n: f64, q_max: usize) -> Result<DeltaMaps<f64>> {
    if q_max > FINITE_Q_MAX {
        return Err(domain(format!("finite-rho coefficients are available for q <= {FINITE_Q_MAX}, got {q_max}")));
    }
    let a0 = alpha_1d(0, rho, lambda_n)?.value;
    let vals: Vec<f64> = (0..=q_max as u32 + 2)
        .map(|j| Ok(alpha_1d(j, rho, lambda_n)?.value / a0))
        .collect::<Result<_>>()?;
    delta_maps(q_max, &|j| vals[j as usize])
}

/// `Delta_n` from the finite-rho maps through `order`, with `eta_0 = 1` and
/// `eta_k` of the spectrum without direction `n`.
pub fn delta_weak_partial_sum(n: usize, order: usize, rho: f64, spectrum: &Spectrum) -> Result<f64> {
    let reduced = spectrum.without(n).ok_or_else(|| domain("weak expansion of Delta_n needs v >= 2"))?;
    let lam = spectrum.get(n);
    let maps = delta_maps_finite(rho, lam, order)?;
    let eta = eta_table(order, rho, &reduced)?.values;
    let eps = lam / rho;
    let mut acc = 0.0;
    for ((q, e), v) in &maps.delta.coeffs {
        let mut t = v * (-eps).powi(*q as i32);
        for (j, &ej) in e.iter().enumerate().skip(1) {
            t *= eta[j].powi(ej as i32);
        }
        acc += t;
    }
    Ok(eps * eps * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::PointIntegrals;

    fn r(n: i64) -> BigRational {
        big(n)
    }

    #[test]
    fn enumeration() {
        assert_eq!(enumerate_exponents(1, 1).unwrap(), vec![vec![1]]);
        assert_eq!(enumerate_exponents(2, 2).unwrap(), vec![vec![0, 1], vec![2, 0]]);
        for q in 0..=12 {
            assert_eq!(enumerate_exponents(q, q).unwrap().len() as u64, partition_count(q), "q={q}");
        }
        assert_eq!(partition_count(12), 77);
        assert!(enumerate_exponents(13, 1).is_err());
        let e3 = enumerate_exponents(3, 2).unwrap();
        assert!(e3.iter().all(|t| t[2] == 0));
        let mut sorted = e3.clone();
        sorted.sort();
        assert_eq!(sorted, e3);
    }

    #[test]
    fn exponent_vector() {
        let e = ExponentVector::from_tail(5, &[1, 0, 2]);
        assert_eq!(e.q(), 3);
        assert_eq!(e.power_count(), 7);
        assert_eq!(e.tail(), &[1, 0, 2]);
    }

    #[test]
    fn alpha_nk_limits() {
        assert_eq!(xi_alpha_nk_limit(0, &[1], 0), r(1));
        assert_eq!(xi_alpha_nk_limit(1, &[0, 1], 1), r(3));
        assert_eq!(xi_alpha_nk_limit(2, &[0, 0, 1], 1), r(15) / r(2));
        assert_eq!(xi_alpha_nk_limit(2, &[0, 2, 0], 0), r(0));
        assert_eq!(xi_alpha_nk_limit(2, &[0, 0, 2], 0), r(0));
    }

    #[test]
    fn identity_is_neutral() {
        let one = XiMap::<BigRational>::identity(4);
        let sq = one.product(&one);
        assert_eq!(sq.coeffs.len(), 1);
        assert_eq!(sq.get(0, &[0]), r(1));
        let a = alpha_nk_map(1, 4, &limit_a);
        assert_eq!(a.product(&one), a);
    }

    #[test]
    fn product_grouping() {
        let (rr, ss) = (1u32, 2u32);
        let p = alpha_nk_map(rr, 4, &limit_a).product(&alpha_nk_map(ss, 4, &limit_a));
        for ((q, e), v) in &p.coeffs {
            let ones = e.iter().filter(|&&x| x == 1).count();
            let twos = e.iter().filter(|&&x| x == 2).count();
            let total: u32 = e.iter().sum();
            assert_eq!(total, 2);
            let mut want = BigRational::zero();
            for l in 0..=*q {
                let m = q - l;
                let mut ev = vec![0u32; q + 1];
                ev[l] += 1;
                ev[m] += 1;
                if trimmed(&ev) == *e {
                    want += xi_alpha_nk_limit(l, &unit(l), rr) * xi_alpha_nk_limit(m, &unit(m), ss);
                }
            }
            assert_eq!(*v, want);
            assert!(ones == 2 || (twos == 1 && q % 2 == 0));
        }
        assert_eq!(xi_product(&alpha_nk_map(rr, 4, &limit_a), &alpha_nk_map(ss, 4, &limit_a), 1, &[1, 1]), r(1 * 15 + 3 * 3));
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0, &[]).unwrap(), BigInt::from(1));
        assert_eq!(psi(1, &[1]).unwrap(), BigInt::from(2));
        assert_eq!(psi(2, &[2, 0]).unwrap(), BigInt::from(3));
        assert_eq!(psi(2, &[1]).unwrap(), BigInt::from(0));
        for q in 0..=8 {
            for t in enumerate_exponents(q, q).unwrap() {
                assert_eq!(psi(q, &t).unwrap(), psi_theta(q, &t), "q={q} {t:?}");
            }
        }
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega(Omega::Zero, 1, &[1]).unwrap(), BigInt::from(0));
        assert_eq!(omega(Omega::One, 1, &[1]).unwrap(), BigInt::from(1));
        assert_eq!(omega(Omega::Zero, 2, &[2, 0]).unwrap(), BigInt::from(0));
        assert_eq!(omega(Omega::One, 2, &[2, 0]).unwrap(), BigInt::from(2));
        assert_eq!(omega(Omega::Zero, 2, &[0, 1]).unwrap(), BigInt::from(0));
        assert_eq!(omega(Omega::One, 2, &[0, 1]).unwrap(), BigInt::from(4));
        assert!(omega(Omega::One, 2, &[1, 0]).is_err());
        assert!(theorem51_limit(3, &[1, 1]).is_err());
    }

    #[test]
    fn theorem_values() {
        assert_eq!(theorem51_limit(1, &[1]).unwrap(), r(4));
        assert_eq!(theorem51_limit(2, &[2, 0]).unwrap(), r(-8));
        assert_eq!(theorem51_limit(2, &[0, 1]).unwrap(), r(24));
    }

    #[test]
    fn zero_omega0_magnitude() {
        for q in 1..=6 {
            for t in enumerate_exponents(q, q).unwrap() {
                if omega(Omega::Zero, q, &t).unwrap().is_zero() {
                    let mut w = r(4);
                    for (i, &ek) in t.iter().enumerate() {
                        for _ in 0..ek {
                            w *= limit_weight(i + 1);
                        }
                    }
                    let o1 = big(omega(Omega::One, q, &t).unwrap());
                    assert_eq!(theorem51_limit(q, &t).unwrap().abs(), w * o1);
                }
            }
        }
    }

    #[test]
    fn scan_small_orders() {
        let rep = omega_inequality_scan(4).unwrap();
        assert!(rep.checks.iter().all(|c| c.status == Status::Pass));
        assert!(omega_inequality_scan(9).is_err());
    }

    #[test]
    fn convolution_routes_agree() {
        let rep = xi_dn_dd_convolution_check(4).unwrap();
        for c in &rep.checks {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
        let maps = limit_delta_maps(1).unwrap();
        assert_eq!(maps.delta.sum_over_e0(1, &[1]), r(4));
        assert!(xi_dn_dd_convolution_check(7).is_err());
    }

    #[test]
    fn inverse_is_inverse() {
        assert!(alpha_inverse_check(4).unwrap().all_pass());
    }

    #[test]
    fn finite_maps_tend_to_limit() {
        let lim = limit_delta_maps(2).unwrap();
        let fin = delta_maps_finite(2000.0, 1.0, 2).unwrap();
        for q in 0..=2 {
            for t in enumerate_exponents(q, q).unwrap() {
                let a = rat_f64(&lim.delta.sum_over_e0(q, &t));
                let b = fin.delta.sum_over_e0(q, &t);
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "q={q} {t:?}: {a} {b}");
            }
        }
        assert!(delta_maps_finite(10.0, 1.0, 3).is_err());
    }

    #[test]
    fn finite_expansion_approximates_delta() {
        let s = Spectrum::new(vec![1.0, 2.0, 3.0]).unwrap();
        let rho = 25.0;
        let exact = PointIntegrals::diagonal(rho, &s).unwrap().delta(0).value;
        let e0 = (delta_weak_partial_sum(0, 0, rho, &s).unwrap() - exact).abs();
        let e2 = (delta_weak_partial_sum(0, 2, rho, &s).unwrap() - exact).abs();
        assert!(e2 < e0, "{e2} {e0}");
    }

    #[test]
    fn map_sum_and_scale() {
        let a = alpha_nk_map(0, 2, &|j| j as f64 + 1.0);
        let b = a.scaled(-1.0);
        assert!(a.sum(&b).coeffs.is_empty());
        assert_eq!(xi_sum(&a, &a, 1, &[0, 1]), 4.0);
    }
}
