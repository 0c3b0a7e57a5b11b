//! Gauss rules and a panel-doubling composite integrator.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Hermite rule for the weight e^{-y²} on (-∞, ∞).
///
/// Exact for polynomial integrands of degree ≤ 2n − 1. Nodes come from
/// Newton iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let (p, d) = orthonormal_hermite_with_derivative(n, z);
            pp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = orthonormal_hermite_with_derivative(n, z);
        if d != 0.0 {
            pp = d;
        }
        nodes[i] = z;
        weights[i] = 2.0 / (pp * pp);
    }
    // mirror: nodes[0..m] hold the positive roots in descending order
    let positive: Vec<(f64, f64)> = nodes[..m].iter().copied().zip(weights[..m].iter().copied()).collect();
    let mut all: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &(x, w) in &positive {
        if x.abs() < 1e-300 {
            all.push((0.0, w));
        } else {
            all.push((x, w));
            all.push((-x, w));
        }
    }
    all.truncate(n);
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: all.iter().map(|p| p.0).collect(),
        weights: all.iter().map(|p| p.1).collect(),
    }
}

// p_n(x) = H_n(x) / sqrt(2^n n! sqrt(pi)); returns (p_n, p_n')
fn orthonormal_hermite_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = PI.powf(-0.25);
    for j in 1..=n {
        let jf = j as f64;
        let next = x * (2.0 / jf).sqrt() * p - ((jf - 1.0) / jf).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, (2.0 * n as f64).sqrt() * p_prev)
}

/// The 32-node Legendre rule shared by the composite integrator.
pub fn legendre32() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(32))
}

/// Something that can be accumulated by a quadrature.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Fixed 32-point Gauss–Legendre over [a, b].
pub fn gauss32<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64) -> T {
    let rule = legendre32();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = T::zero();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc + f(mid + half * x) * (w * half);
    }
    acc
}

/// Panel counts are doubled until successive estimates agree to `tol`
/// (absolute, scaled by max(1, |I|)).
pub const MAX_PANEL_DOUBLINGS: u32 = 16;

/// Composite 32-point Gauss–Legendre over `[edges[0], edges[last]]`, with
/// panels never straddling an edge. Panels per piece double until two
/// successive estimates differ by less than `tol·max(1, |I|)`.
pub fn composite<T: Integrand>(f: impl Fn(f64) -> T, edges: &[f64], tol: f64) -> T {
    let pieces: Vec<(f64, f64)> = edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if pieces.is_empty() {
        return T::zero();
    }
    let estimate = |panels: usize| {
        let mut acc = T::zero();
        for &(a, b) in &pieces {
            let h = (b - a) / panels as f64;
            for k in 0..panels {
                let lo = a + h * k as f64;
                let hi = if k + 1 == panels { b } else { lo + h };
                acc = acc + gauss32(&f, lo, hi);
            }
        }
        acc
    };
    let mut panels = 1usize;
    let mut prev = estimate(panels);
    for _ in 0..MAX_PANEL_DOUBLINGS {
        panels *= 2;
        let next = estimate(panels);
        if (next - prev).magnitude() < tol * next.magnitude().max(1.0) {
            return next;
        }
        prev = next;
    }
    prev
}

/// Edges `[lo, breakpoints in (lo, hi)..., hi]`.
pub fn edges_between(lo: f64, hi: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut edges = vec![lo];
    edges.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    edges.push(hi);
    edges
}
