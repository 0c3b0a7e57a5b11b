//! Lewis–Riesenfeld dynamical modes and the quadratic invariant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wavefunction::{SpatialGrid, Spectral, WaveFunction};

/// Tolerated deviation of the analytic grid norm from 1 before the grid is
/// declared too small or too coarse.
const GRID_NORM_TOLERANCE: f64 = 1e-6;

/// Hermite functions φ_0..=φ_n at ξ, H_k(ξ)e^{−ξ²/2}/√(2^k k! √π).
pub(crate) fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let g = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(g);
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * xi * g);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Minimum points per local oscillation demanded of a grid.
pub const POINTS_PER_OSCILLATION: f64 = 16.0;

/// ψ_n(x, τ) = b^{-1/2} φ_n(x/b) · exp(iḃx²/(2b)) · exp(−i(n + ½)θ).
///
/// `phase` is the Lewis phase θ(τ) = ∫₀^τ dτ'/b². The sample is
/// renormalized on the grid after checking the analytic norm survives
/// sampling.
pub fn mode_wavefunction(
    n: usize,
    b: f64,
    bdot: f64,
    phase: f64,
    grid: &SpatialGrid,
) -> Result<WaveFunction> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("mode width b must be positive, got {b}")));
    }
    let spread = (2.0 * n as f64 + 1.0).sqrt();
    let k_max = spread * (1.0 / b + bdot.abs());
    let points = 2.0 * PI / (k_max * grid.dx());
    if points < POINTS_PER_OSCILLATION {
        return Err(Error::Grid(format!(
            "mode n={n} (b={b}, bdot={bdot}) needs dx <= {:.3e}, grid has {:.3e}",
            2.0 * PI / (k_max * POINTS_PER_OSCILLATION),
            grid.dx()
        )));
    }
    let global = Complex64::from_polar(1.0, -(n as f64 + 0.5) * phase);
    let scale = b.powf(-0.5);
    let amps = grid
        .positions()
        .iter()
        .map(|&x| {
            let phi = hermite_functions(n, x / b)[n];
            let chirp = Complex64::from_polar(1.0, 0.5 * bdot / b * x * x);
            global * chirp * (scale * phi)
        })
        .collect();
    let mut psi = WaveFunction::new(amps, *grid)?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > GRID_NORM_TOLERANCE {
        return Err(Error::Grid(format!(
            "mode n={n} (b={b}) has grid norm {norm}; box half-width {} too small",
            grid.half_width
        )));
    }
    psi.normalize();
    Ok(psi)
}

/// ⟨I⟩ with I = ½(x²/b² + (b·p − ḃ·x)²); p applied spectrally.
pub fn invariant_expectation(psi: &WaveFunction, b: f64, bdot: f64) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Contract(format!(
            "invariant expectation needs a normalized state, norm = {norm}"
        )));
    }
    let grid = psi.grid;
    let dpsi = Spectral::new(grid.n_points).derivative(psi);
    let mut acc = 0.0;
    for (j, (a, d)) in psi.amplitudes.iter().zip(&dpsi).enumerate() {
        let x = grid.x(j);
        let pi_psi = Complex64::new(0.0, -b) * d - a * (bdot * x);
        acc += x * x / (b * b) * a.norm_sqr() + pi_psi.norm_sqr();
    }
    Ok(0.5 * acc * grid.dx())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(2048, 40.0).unwrap()
    }

    #[test]
    fn ground_mode_is_static_gaussian() {
        let g = grid();
        let psi = mode_wavefunction(0, 1.0, 0.0, 0.0, &g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        for (j, a) in psi.amplitudes.iter().enumerate() {
            let x = g.x(j);
            let exact = PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((a.re - exact).abs() < 1e-10 && a.im.abs() < 1e-14);
        }
    }

    #[test]
    fn wide_mode_matches_final_trap_ground_state() {
        let g = SpatialGrid::new(4096, 80.0).unwrap();
        let psi = mode_wavefunction(0, 10.0, 0.0, 0.0, &g).unwrap();
        let j = 2048; // x = 0
        assert!((psi.amplitudes[j].re - PI.powf(-0.25) / 10f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn modes_are_orthonormal_even_with_chirp_and_phase() {
        let g = grid();
        for &(b, bdot) in &[(1.0, 0.0), (2.3, 0.7), (0.8, -1.5)] {
            let modes: Vec<_> = (0..=5)
                .map(|n| mode_wavefunction(n, b, bdot, 0.37, &g).unwrap())
                .collect();
            for i in 0..=5 {
                for k in 0..=5 {
                    let s = modes[i].inner(&modes[k]).unwrap();
                    let target = if i == k { 1.0 } else { 0.0 };
                    assert!((s - target).norm() < 1e-8, "({i},{k}) at b={b}: {s}");
                }
            }
        }
    }

    #[test]
    fn n2_orthogonal_to_n0() {
        let g = grid();
        let a = mode_wavefunction(0, 1.0, 0.0, 0.0, &g).unwrap();
        let c = mode_wavefunction(2, 1.0, 0.0, 0.0, &g).unwrap();
        assert!(a.inner(&c).unwrap().norm() < 1e-10);
    }

    #[test]
    fn too_small_box_is_a_grid_error() {
        let g = SpatialGrid::new(256, 2.0).unwrap();
        assert!(matches!(mode_wavefunction(0, 1.0, 0.0, 0.0, &g), Err(Error::Grid(_))));
        let coarse = SpatialGrid::new(256, 200.0).unwrap();
        assert!(matches!(mode_wavefunction(3, 1.0, 0.0, 0.0, &coarse), Err(Error::Grid(_))));
    }

    #[test]
    fn invariant_eigenvalues() {
        let g = grid();
        for &(b, bdot) in &[(1.0, 0.0), (3.0, 1.2), (0.9, -0.4)] {
            for n in 0..4 {
                let psi = mode_wavefunction(n, b, bdot, 1.1, &g).unwrap();
                let i = invariant_expectation(&psi, b, bdot).unwrap();
                assert!((i - (n as f64 + 0.5)).abs() < 1e-9, "n={n} b={b}: {i}");
            }
        }
    }

    #[test]
    fn invariant_rejects_unnormalized_state() {
        let g = grid();
        let mut psi = mode_wavefunction(0, 1.0, 0.0, 0.0, &g).unwrap();
        for a in &mut psi.amplitudes {
            *a *= 1.1;
        }
        assert!(matches!(invariant_expectation(&psi, 1.0, 0.0), Err(Error::Contract(_))));
    }
}
