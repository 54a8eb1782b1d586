//! Gauss–Legendre rules.
//!
//! Nodes are the roots of `P_n`, found by Newton iteration on the three-term
//! recurrence from the Tricomi initial guess. Rules are built once per order
//! and cached for the lifetime of the process.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// A rule on `[-1, 1]`, stored as the nonnegative half: `nodes[i] >= 0` with the
/// mirrored node implied. For odd `n` the centre node appears once with its full weight.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build(n: usize) -> GaussLegendre {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    if n == 1 {
        return GaussLegendre { n, nodes: vec![0.0], weights: vec![2.0] };
    }
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut nodes = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    for i in 1..=half {
        let theta = PI * (4.0 * i as f64 - 1.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        if n % 2 == 1 && i == half {
            nodes.push(0.0);
            weights.push(w);
        } else {
            nodes.push(x);
            weights.push(w);
        }
    }
    GaussLegendre { n, nodes, weights }
}

/// The cached `n`-point rule.
pub fn rule(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    *guard.entry(n).or_insert_with(|| Box::leak(Box::new(build(n))))
}

impl GaussLegendre {
    /// Nodes and weights mapped to `[a, b]`, full (not half) rule.
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut out = Vec::with_capacity(self.n);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            if x == 0.0 {
                out.push((mid, w * half));
            } else {
                out.push((mid - half * x, w * half));
                out.push((mid + half * x, w * half));
            }
        }
        out
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }
}
