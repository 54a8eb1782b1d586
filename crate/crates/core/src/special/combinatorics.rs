//! Exact integer combinatorics.
//!
//! Everything here returns arbitrary-precision integers. Stirling tables are
//! built once up to index 64 and shared read-only afterwards; larger indices
//! are computed on demand by the same recurrences.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{domain, Result};

/// Largest index kept in the memoized Stirling tables.
pub const TABLE_MAX: usize = 64;

/// `n!!` with the conventions `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<BigInt> {
    if n < -1 {
        return Err(domain(format!("double factorial needs n >= -1, got {n}")));
    }
    let mut acc = BigInt::one();
    let mut m = n;
    while m > 1 {
        acc *= m;
        m -= 2;
    }
    Ok(acc)
}

/// `(2k-1)!!` as a float, the `rho -> infinity` limit of the one-index ball integral.
pub fn odd_double_factorial_f64(k: u32) -> f64 {
    (1..=k).map(|j| (2 * j - 1) as f64).product()
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `(sum parts)! / prod(parts!)`.
pub fn multinomial(parts: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    let mut total = 0u32;
    for &p in parts {
        total += p;
        acc *= binomial(total, p);
    }
    acc
}

#[derive(Clone, Copy)]
enum Kind {
    SecondKind,
    FirstKindUnsigned,
}

fn build_rows(kind: Kind, max: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max + 1);
    rows.push(vec![BigUint::one()]);
    for n in 0..max {
        let prev = &rows[n];
        let mut next = vec![BigUint::zero(); n + 2];
        for m in 1..=n + 1 {
            let carried = if m <= n { prev[m].clone() } else { BigUint::zero() };
            let factor = match kind {
                // {n+1, m} = m {n, m} + {n, m-1}
                Kind::SecondKind => m,
                // [n+1, m] = n [n, m] + [n, m-1]
                Kind::FirstKindUnsigned => n,
            };
            next[m] = carried * factor + &prev[m - 1];
        }
        rows.push(next);
    }
    rows
}

fn table(kind: Kind) -> &'static [Vec<BigUint>] {
    static SECOND: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    static FIRST: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    match kind {
        Kind::SecondKind => SECOND.get_or_init(|| build_rows(kind, TABLE_MAX)),
        Kind::FirstKindUnsigned => FIRST.get_or_init(|| build_rows(kind, TABLE_MAX)),
    }
}

fn lookup(kind: Kind, n: usize, m: usize) -> BigUint {
    if m > n {
        return BigUint::zero();
    }
    if n <= TABLE_MAX {
        return table(kind)[n][m].clone();
    }
    build_rows(kind, n).swap_remove(n).swap_remove(m)
}

/// Stirling number of the second kind `{k brace t}`.
pub fn stirling_second(k: usize, t: usize) -> BigUint {
    lookup(Kind::SecondKind, k, t)
}

/// Unsigned Stirling number of the first kind `[k brack j]`.
pub fn stirling_first_unsigned(k: usize, j: usize) -> BigUint {
    lookup(Kind::FirstKindUnsigned, k, j)
}

/// Whether `sum_t (-1)^(t-k) {j brace t} [t brack k] = delta_jk` holds exactly.
pub fn stirling_inversion_holds(j: usize, k: usize) -> bool {
    let mut acc = BigInt::zero();
    for t in 0..=j.max(k) {
        let term = BigInt::from(stirling_second(j, t) * stirling_first_unsigned(t, k));
        if (t + k) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc == if j == k { BigInt::one() } else { BigInt::zero() }
}
