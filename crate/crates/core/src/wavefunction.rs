//! Uniform spatial grids and wave functions sampled on them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// x_j = −L + j·dx, j = 0..N, with dx = 2L/N (periodic box).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n_points: usize,
    pub half_width: f64,
}

impl SpatialGrid {
    pub fn new(n_points: usize, half_width: f64) -> Result<Self> {
        if n_points < 256 || !n_points.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n_points must be a power of two >= 256, got {n_points}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!("half_width must be positive, got {half_width}")));
        }
        Ok(SpatialGrid { n_points, half_width })
    }

    /// Default box for an expansion by γ: half-width min(8γ, 0.69·w̃₀),
    /// 4096 points. The cap keeps the box inside the quartic turnover at
    /// w̃₀/√2.
    pub fn for_expansion(gamma: f64, w_tilde: Option<f64>) -> Result<Self> {
        let mut half = 8.0 * gamma.max(1.0);
        if let Some(w) = w_tilde {
            half = half.min(0.69 * w);
        }
        SpatialGrid::new(4096, half)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + self.dx() * j as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (n as f64 * self.dx());
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
            .collect()
    }

    /// A grid with twice the points over the same box.
    pub fn refined(&self) -> Self {
        SpatialGrid {
            n_points: self.n_points * 2,
            half_width: self.half_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub amplitudes: Vec<Complex64>,
    pub grid: SpatialGrid,
}

impl WaveFunction {
    pub fn new(amplitudes: Vec<Complex64>, grid: SpatialGrid) -> Result<Self> {
        if amplitudes.len() != grid.n_points {
            return Err(Error::Contract(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points
            )));
        }
        Ok(WaveFunction { amplitudes, grid })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let s = self.norm().sqrt();
        if s > 0.0 {
            for a in &mut self.amplitudes {
                *a /= s;
            }
        }
    }

    /// ⟨other|self⟩ = Σ conj(other)·self·dx.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Contract("wave functions live on different grids".into()));
        }
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| b.conj() * a)
            .sum();
        Ok(s * self.grid.dx())
    }

    /// ⟨x⟩
    pub fn mean_position(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a.norm_sqr() * self.grid.x(j))
            .sum::<f64>()
            * self.grid.dx()
    }

    /// Probability in the outer `fraction` of the box on either side.
    pub fn edge_probability(&self, fraction: f64) -> f64 {
        let cut = self.grid.half_width * (1.0 - fraction);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(j, _)| self.grid.x(*j).abs() > cut)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
    }
}

/// Forward/inverse FFT pair for one grid size. Inverse is normalized.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Spectral {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let s = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// dψ/dx by Fourier differentiation.
    pub fn derivative(&mut self, psi: &WaveFunction) -> Vec<Complex64> {
        let k = psi.grid.momenta();
        let mut d = psi.amplitudes.clone();
        self.forward(&mut d);
        for (v, kj) in d.iter_mut().zip(&k) {
            *v *= Complex64::new(0.0, *kj);
        }
        self.inverse(&mut d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = SpatialGrid::new(1024, 10.0).unwrap();
        assert!((g.dx() * 1024.0 - 20.0).abs() < 1e-12);
        assert_eq!(g.x(0), -10.0);
        assert!(SpatialGrid::new(1000, 10.0).is_err());
        assert!(SpatialGrid::new(128, 10.0).is_err());
        assert!(SpatialGrid::new(512, 0.0).is_err());
        let k = g.momenta();
        assert_eq!(k[0], 0.0);
        assert!(k[512] < 0.0 && k[511] > 0.0);
    }

    #[test]
    fn default_box_respects_quartic_turnover() {
        let g = SpatialGrid::for_expansion(10.0, Some(100.0)).unwrap();
        assert!((g.half_width - 69.0).abs() < 1e-12);
        let g = SpatialGrid::for_expansion(10.0, None).unwrap();
        assert_eq!(g.half_width, 80.0);
    }

    #[test]
    fn spectral_derivative_of_gaussian() {
        let g = SpatialGrid::new(512, 12.0).unwrap();
        let amps = g.positions().iter().map(|&x| Complex64::new((-x * x / 2.0).exp(), 0.0)).collect();
        let psi = WaveFunction::new(amps, g).unwrap();
        let d = Spectral::new(512).derivative(&psi);
        for (j, v) in d.iter().enumerate() {
            let x = g.x(j);
            assert!((v.re + x * (-x * x / 2.0).exp()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let a = WaveFunction::new(vec![Complex64::new(1.0, 0.0); 256], SpatialGrid::new(256, 1.0).unwrap()).unwrap();
        let b = WaveFunction::new(vec![Complex64::new(1.0, 0.0); 256], SpatialGrid::new(256, 2.0).unwrap()).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::Contract(_))));
    }
}
