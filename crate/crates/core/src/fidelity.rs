//! First-order perturbation theory for the quartic correction −u·x⁴/(2w̃²)
//! and the fidelity bounds built on it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::Control;
use crate::ermakov::{lewis_phase, ScalingTrajectory};
use crate::error::{Error, Result};
use crate::quadrature::{composite, edges_between, gauss_hermite, legendre32};

/// Quadrature tolerance for the real integrals behind F_b and V̄₁.
const BOUND_TOLERANCE: f64 = 1e-13;
/// Quadrature tolerance for β.
const BETA_TOLERANCE: f64 = 1e-11;
const MAX_BETA_DOUBLINGS: u32 = 14;
/// Above this n + n' the amplitude prefactor is refused.
pub const MAX_QUANTUM_SUM: usize = 60;

/// λ̃ = (3/(4w̃²))(n² + n + ½).
pub fn lambda_tilde(n: usize, w_tilde: f64) -> f64 {
    let n = n as f64;
    0.75 / (w_tilde * w_tilde) * (n * n + n + 0.5)
}

/// Physicists' Hermite polynomials H_0..=H_n at y.
fn hermite_polynomials(n: usize, y: f64) -> Vec<f64> {
    let mut h = vec![1.0];
    if n >= 1 {
        h.push(2.0 * y);
    }
    for k in 1..n {
        h.push(2.0 * y * h[k] - 2.0 * k as f64 * h[k - 1]);
    }
    h
}

/// α_{n,n'} = ∫ e^{−y²} H_n(y) H_{n'}(y) y⁴ dy.
pub fn hermite_alpha(n: usize, nprime: usize) -> f64 {
    let gap = n.abs_diff(nprime);
    if gap % 2 == 1 || gap > 4 {
        return 0.0;
    }
    let rule = gauss_hermite((n + nprime + 5).div_ceil(2));
    let top = n.max(nprime);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&y, &w)| {
            let h = hermite_polynomials(top, y);
            w * h[n] * h[nprime] * y.powi(4)
        })
        .sum()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn sorted_edges(traj: &ScalingTrajectory, u: &dyn Control, tau: f64) -> Vec<f64> {
    let mut breaks = traj.breakpoints();
    breaks.extend(u.breakpoints());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    edges_between(0.0, tau, &breaks)
}

/// β_{n,n'}(τ) = ∫₀^τ b⁴u·e^{−i(n'−n)θ} dτ₁ plus the contributions of any
/// impulses of `u` in [0, τ], where θ is the Lewis phase.
pub fn beta_integral(traj: &ScalingTrajectory, u: &dyn Control, n: usize, nprime: usize, tau: f64) -> Complex64 {
    let freq = nprime as f64 - n as f64;
    let tau = tau.clamp(0.0, traj.tau_f());
    let edges = sorted_edges(traj, u, tau);
    let pieces: Vec<(f64, f64)> = edges.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
    let rule = legendre32();
    let inv_b2 = |t: f64| traj.eval(t).b.powi(-2);
    let panel32 = |a: f64, b: f64| -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * half * inv_b2(mid + half * x)).sum()
    };

    let estimate = |panels: usize| -> Complex64 {
        let mut theta = 0.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(a, b) in &pieces {
            let piece = u.piece_at(0.5 * (a + b));
            let h = (b - a) / panels as f64;
            for k in 0..panels {
                let lo = a + h * k as f64;
                let hi = if k + 1 == panels { b } else { lo + h };
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (lo + hi);
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let t = mid + half * x;
                    let weight = traj.eval(t).b.powi(4) * u.value_in(piece, t) * w * half;
                    if freq == 0.0 {
                        acc += weight;
                    } else {
                        let th = theta + panel32(lo, t);
                        acc += Complex64::from_polar(weight, -freq * th);
                    }
                }
                if freq != 0.0 {
                    theta += panel32(lo, hi);
                }
            }
        }
        acc
    };

    let mut panels = 1usize;
    let mut value = estimate(panels);
    for _ in 0..MAX_BETA_DOUBLINGS {
        panels *= 2;
        let next = estimate(panels);
        let done = (next - value).norm() < BETA_TOLERANCE * next.norm().max(1.0);
        value = next;
        if done {
            break;
        }
    }

    for imp in u.impulses() {
        if imp.tau >= 0.0 && imp.tau <= tau {
            let b4 = traj.eval(imp.tau).b.powi(4);
            let th = if freq == 0.0 { 0.0 } else { lewis_phase(traj, imp.tau) };
            value += Complex64::from_polar(imp.strength * b4, -freq * th);
        }
    }
    value
}

/// f⁽¹⁾_{n,n'} = i·α·β(τ_f) / (2w̃²·√(π·2^{n+n'}·n!·n'!)).
pub fn first_order_amplitude(
    traj: &ScalingTrajectory,
    u: &dyn Control,
    n: usize,
    nprime: usize,
    w_tilde: f64,
    tau_f: f64,
) -> Result<Complex64> {
    if n + nprime > MAX_QUANTUM_SUM {
        return Err(Error::Range(format!(
            "n + n' = {} exceeds {MAX_QUANTUM_SUM}",
            n + nprime
        )));
    }
    if !(w_tilde > 0.0) {
        return Err(Error::Domain(format!("w_tilde must be positive, got {w_tilde}")));
    }
    let alpha = hermite_alpha(n, nprime);
    if alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ln_norm = 0.5 * (PI.ln() + (n + nprime) as f64 * 2f64.ln() + ln_factorial(n) + ln_factorial(nprime));
    let beta = beta_integral(traj, u, n, nprime, tau_f);
    Ok(Complex64::i() * beta * (alpha * (-ln_norm).exp() / (2.0 * w_tilde * w_tilde)))
}

/// Second-order fidelity with its breakdown flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderFidelity {
    pub value: f64,
    /// Σ|f⁽¹⁾|² exceeded 1 and the value was clamped to 0.
    pub breakdown: bool,
}

/// F = √(1 − Σ_{n'∈{n±2, n±4}} |f⁽¹⁾_{n,n'}|²).
pub fn fidelity_second_order(
    traj: &ScalingTrajectory,
    u: &dyn Control,
    n: usize,
    w_tilde: f64,
    tau_f: f64,
) -> Result<SecondOrderFidelity> {
    let mut loss = 0.0;
    for shift in [-4i64, -2, 2, 4] {
        let np = n as i64 + shift;
        if np < 0 {
            continue;
        }
        loss += first_order_amplitude(traj, u, n, np as usize, w_tilde, tau_f)?.norm_sqr();
    }
    Ok(if loss > 1.0 {
        SecondOrderFidelity {
            value: 0.0,
            breakdown: true,
        }
    } else {
        SecondOrderFidelity {
            value: (1.0 - loss).sqrt(),
            breakdown: false,
        }
    })
}

/// ∫₀^τ_f ḃ²b² dτ.
pub fn kinetic_moment(traj: &ScalingTrajectory, tau_f: f64) -> f64 {
    let edges = edges_between(0.0, tau_f, &traj.breakpoints());
    composite(
        |t| {
            let k = traj.eval(t);
            k.bdot * k.bdot * k.b * k.b
        },
        &edges,
        BOUND_TOLERANCE,
    )
}

/// F_b = 1 − λ̃τ_f − 3λ̃∫ḃ²b² dτ.
pub fn fidelity_bound(traj: &ScalingTrajectory, w_tilde: f64, n: usize, tau_f: f64) -> f64 {
    let lam = lambda_tilde(n, w_tilde);
    1.0 - lam * tau_f - 3.0 * lam * kinetic_moment(traj, tau_f)
}

/// 1 − (3/(8w̃²))[τ_f + 3(γ² − 1)²/(4τ_f)], the bound of the unconstrained
/// optimum for n = 0.
pub fn f_el_bound(tau_f: f64, gamma: f64, w_tilde: f64) -> f64 {
    let g = gamma * gamma - 1.0;
    1.0 - 3.0 / (8.0 * w_tilde * w_tilde) * (tau_f + 3.0 * g * g / (4.0 * tau_f))
}

/// V̄₁ = (λ̃/τ_f)[∫u·b⁴ dτ + Σ impulses·b⁴], in units of ħω₀.
pub fn avg_perturbation_energy(traj: &ScalingTrajectory, u: &dyn Control, w_tilde: f64, n: usize, tau_f: f64) -> f64 {
    let edges = sorted_edges(traj, u, tau_f);
    let mut total = 0.0;
    for w in edges.windows(2).filter(|w| w[1] > w[0]) {
        let piece = u.piece_at(0.5 * (w[0] + w[1]));
        total += composite(|t| traj.eval(t).b.powi(4) * u.value_in(piece, t), w, BOUND_TOLERANCE);
    }
    for imp in u.impulses() {
        if imp.tau >= 0.0 && imp.tau <= tau_f {
            total += imp.strength * traj.eval(imp.tau).b.powi(4);
        }
    }
    lambda_tilde(n, w_tilde) * total / tau_f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub n: usize,
    pub tau_f: f64,
    pub w_tilde: f64,
    pub lambda_tilde: f64,
    pub f_b: f64,
    /// Only for the unconstrained family.
    pub f_el: Option<f64>,
    pub f_second_order: f64,
    pub perturbation_breakdown: bool,
    pub v1_avg: f64,
    /// Filled in by a simulation.
    pub f_exact: Option<f64>,
    pub edge_leak: Option<f64>,
}

impl FidelityReport {
    pub fn compute(
        traj: &ScalingTrajectory,
        u: &dyn Control,
        gamma: f64,
        w_tilde: f64,
        n: usize,
        unconstrained: bool,
    ) -> Result<FidelityReport> {
        let tau_f = traj.tau_f();
        let second = fidelity_second_order(traj, u, n, w_tilde, tau_f)?;
        Ok(FidelityReport {
            n,
            tau_f,
            w_tilde,
            lambda_tilde: lambda_tilde(n, w_tilde),
            f_b: fidelity_bound(traj, w_tilde, n, tau_f),
            f_el: (unconstrained && n == 0).then(|| f_el_bound(tau_f, gamma, w_tilde)),
            f_second_order: second.value,
            perturbation_breakdown: second.breakdown,
            v1_avg: if tau_f > 0.0 {
                avg_perturbation_energy(traj, u, w_tilde, n, tau_f)
            } else {
                0.0
            },
            f_exact: None,
            edge_leak: None,
        })
    }
}
