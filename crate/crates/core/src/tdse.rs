//! Split-operator propagation of the 1D Schrödinger equation in a trap
//! whose strength follows u(τ).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::Control;
use crate::error::{Error, Result};
use crate::modes::mode_wavefunction;
use crate::protocol::Protocol;
use crate::wavefunction::{SpatialGrid, Spectral, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialModel {
    Harmonic,
    #[default]
    Quartic,
    Gaussian,
}

impl PotentialModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PotentialModel::Harmonic => "harmonic",
            PotentialModel::Quartic => "quartic",
            PotentialModel::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for PotentialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(PotentialModel::Harmonic),
            "quartic" => Ok(PotentialModel::Quartic),
            "gaussian" => Ok(PotentialModel::Gaussian),
            other => Err(Error::Config(format!("unknown potential model `{other}`"))),
        }
    }
}

pub const DEFAULT_DT: f64 = 5e-4;
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-6;
/// Outer share of the box, on each side, watched for leaking probability.
pub const EDGE_FRACTION: f64 = 0.05;
/// Largest tolerated change of the norm over a run.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;
/// Fidelity change under refinement above which a run is unconverged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: PotentialModel,
    pub dt: f64,
    pub grid: SpatialGrid,
    pub leak_threshold: f64,
}

impl SimConfig {
    pub fn new(model: PotentialModel, dt: f64, grid: SpatialGrid, leak_threshold: f64) -> Result<Self> {
        let cfg = SimConfig {
            model,
            dt,
            grid,
            leak_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default step, threshold and box for an expansion by γ.
    pub fn for_expansion(model: PotentialModel, gamma: f64, w_tilde: f64) -> Result<Self> {
        let w = match model {
            PotentialModel::Harmonic => None,
            _ => Some(w_tilde),
        };
        SimConfig::new(model, DEFAULT_DT, SpatialGrid::for_expansion(gamma, w)?, DEFAULT_LEAK_THRESHOLD)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.leak_threshold > 0.0 && self.leak_threshold <= 1e-3) {
            return Err(Error::Config(format!(
                "leak_threshold must lie in (0, 1e-3], got {}",
                self.leak_threshold
            )));
        }
        SpatialGrid::new(self.grid.n_points, self.grid.half_width)?;
        Ok(())
    }
}

/// V(x) for u = 1; every model is linear in u.
fn potential_shape(grid: &SpatialGrid, w_tilde: f64, model: PotentialModel) -> Vec<f64> {
    let w2 = w_tilde * w_tilde;
    grid.positions()
        .into_iter()
        .map(|x| match model {
            PotentialModel::Harmonic => 0.5 * x * x,
            PotentialModel::Quartic => 0.5 * (x * x - x.powi(4) / w2),
            PotentialModel::Gaussian => 0.25 * w2 * (1.0 - (-2.0 * x * x / w2).exp()),
        })
        .collect()
}

/// Harmonic ½u·x², quartic ½u(x² − x⁴/w̃²) or Gaussian (u·w̃²/4)(1 − e^{−2x²/w̃²}).
pub fn potential_values(grid: &SpatialGrid, u: f64, w_tilde: f64, model: PotentialModel) -> Vec<f64> {
    potential_shape(grid, w_tilde, model).into_iter().map(|v| u * v).collect()
}

/// Eigenstate n of the harmonic trap with ω/ω₀ = `omega_ratio`.
pub fn stationary_state(grid: &SpatialGrid, omega_ratio: f64, n: usize) -> Result<WaveFunction> {
    if !(omega_ratio > 0.0) {
        return Err(Error::Domain(format!("omega_ratio must be positive, got {omega_ratio}")));
    }
    let width = omega_ratio.powf(-0.5);
    let extent = width * (2.0 * n as f64 + 1.0).sqrt();
    if grid.half_width < 6.0 * extent {
        return Err(Error::Grid(format!(
            "half_width {} is below six state widths ({})",
            grid.half_width,
            6.0 * extent
        )));
    }
    if grid.dx() > width / 16.0 {
        return Err(Error::Grid(format!(
            "dx = {} does not give 16 points per width {width}",
            grid.dx()
        )));
    }
    mode_wavefunction(n, width, 0.0, 0.0, grid)
}

/// |⟨target|psi⟩|.
pub fn overlap_fidelity(psi: &WaveFunction, target: &WaveFunction) -> Result<f64> {
    Ok(psi.inner(target)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimDiagnostics {
    pub norm_drift: f64,
    /// Largest probability seen in the edge region.
    pub max_edge_probability: f64,
    pub max_abs_control: f64,
    pub steps: usize,
}

/// Propagates with second-order Strang splitting. See [`evolve_observed`].
pub fn evolve(
    psi0: &WaveFunction,
    u: &dyn Control,
    cfg: &SimConfig,
    w_tilde: f64,
) -> Result<(WaveFunction, SimDiagnostics)> {
    evolve_observed(psi0, u, cfg, w_tilde, |_, _| {})
}

/// Propagates `psi0` over [0, τ_f] and calls `observer(τ, ψ)` after every
/// step, and once at τ = 0.
///
/// Each smooth piece of `u` is cut into equal steps no longer than
/// `cfg.dt`, and u is sampled at the step midpoint. Impulses of `u` are
/// applied as instantaneous kicks exp(−i·strength·V₁(x)).
pub fn evolve_observed(
    psi0: &WaveFunction,
    u: &dyn Control,
    cfg: &SimConfig,
    w_tilde: f64,
    mut observer: impl FnMut(f64, &WaveFunction),
) -> Result<(WaveFunction, SimDiagnostics)> {
    cfg.validate()?;
    if psi0.grid != cfg.grid {
        return Err(Error::Contract("initial state is not on the simulation grid".into()));
    }
    if cfg.model != PotentialModel::Harmonic && !(w_tilde > 0.0) {
        return Err(Error::Domain(format!("w_tilde must be positive, got {w_tilde}")));
    }
    let grid = cfg.grid;
    let shape = potential_shape(&grid, w_tilde, cfg.model);
    let kinetic: Vec<f64> = grid.momenta().iter().map(|k| 0.5 * k * k).collect();
    let mut spectral = Spectral::new(grid.n_points);
    let mut psi = psi0.clone();
    let norm0 = psi.norm();
    let impulses = u.impulses();

    let kick = |psi: &mut WaveFunction, phase_per_shape: f64| {
        for (a, v) in psi.amplitudes.iter_mut().zip(&shape) {
            *a *= Complex64::from_polar(1.0, -phase_per_shape * v);
        }
    };

    let mut diag = SimDiagnostics {
        norm_drift: 0.0,
        max_edge_probability: psi.edge_probability(EDGE_FRACTION),
        max_abs_control: 0.0,
        steps: 0,
    };
    let check_leak = |psi: &WaveFunction, tau: f64, diag: &mut SimDiagnostics| -> Result<()> {
        let p = psi.edge_probability(EDGE_FRACTION);
        diag.max_edge_probability = diag.max_edge_probability.max(p);
        if p > cfg.leak_threshold {
            return Err(Error::Leak {
                tau,
                probability: p,
                threshold: cfg.leak_threshold,
            });
        }
        Ok(())
    };

    for imp in impulses.iter().filter(|i| i.tau <= 0.0) {
        kick(&mut psi, imp.strength);
    }
    observer(0.0, &psi);

    let edges = u.edges();
    let mut kinetic_phase = Vec::new();
    let mut kinetic_dt = f64::NAN;
    for (piece, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let steps = ((b - a) / cfg.dt).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        if h != kinetic_dt {
            kinetic_phase = kinetic.iter().map(|t| Complex64::from_polar(1.0, -t * h)).collect();
            kinetic_dt = h;
        }
        for s in 0..steps {
            let t0 = a + h * s as f64;
            let value = u.value_in(piece, t0 + 0.5 * h);
            diag.max_abs_control = diag.max_abs_control.max(value.abs());
            kick(&mut psi, 0.5 * value * h);
            spectral.forward(&mut psi.amplitudes);
            for (x, k) in psi.amplitudes.iter_mut().zip(&kinetic_phase) {
                *x *= k;
            }
            spectral.inverse(&mut psi.amplitudes);
            kick(&mut psi, 0.5 * value * h);
            diag.steps += 1;
            let tau = if s + 1 == steps { b } else { t0 + h };
            for imp in impulses.iter().filter(|i| i.tau > 0.0 && i.tau >= tau - h && i.tau < tau) {
                kick(&mut psi, imp.strength);
            }
            check_leak(&psi, tau, &mut diag)?;
            observer(tau, &psi);
        }
    }
    let tau_f = u.tau_f();
    for imp in impulses.iter().filter(|i| i.tau > 0.0 && i.tau >= tau_f) {
        kick(&mut psi, imp.strength);
    }

    diag.norm_drift = (psi.norm() - norm0).abs();
    if diag.norm_drift > UNITARITY_TOLERANCE {
        return Err(Error::Unitarity { drift: diag.norm_drift });
    }
    Ok((psi, diag))
}

/// Propagation plus `tau,x,prob` rows every `stride` steps and every
/// `x_stride` grid points.
pub fn evolve_with_snapshots(
    psi0: &WaveFunction,
    u: &dyn Control,
    cfg: &SimConfig,
    w_tilde: f64,
    stride: usize,
    x_stride: usize,
) -> Result<(WaveFunction, SimDiagnostics, String)> {
    let stride = stride.max(1);
    let x_stride = x_stride.max(1);
    let mut csv = String::from("tau,x,prob\n");
    let mut count = 0usize;
    let out = evolve_observed(psi0, u, cfg, w_tilde, |tau, psi| {
        if count % stride == 0 {
            for j in (0..psi.grid.n_points).step_by(x_stride) {
                csv.push_str(&format!("{},{},{}\n", tau, psi.grid.x(j), psi.amplitudes[j].norm_sqr()));
            }
        }
        count += 1;
    })?;
    Ok((out.0, out.1, csv))
}

/// Fidelity of evolving eigenstate `n` of the initial trap against
/// eigenstate `n` of the final trap (ω/ω₀ = 1/γ²).
pub fn transfer_fidelity(
    protocol: &Protocol,
    n: usize,
    cfg: &SimConfig,
    w_tilde: f64,
) -> Result<(f64, SimDiagnostics)> {
    let psi0 = stationary_state(&cfg.grid, 1.0, n)?;
    let target = stationary_state(&cfg.grid, protocol.gamma.powi(-2), n)?;
    let (psi, diag) = evolve(&psi0, protocol, cfg, w_tilde)?;
    Ok((overlap_fidelity(&psi, &target)?, diag))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub fidelity: f64,
    pub fidelity_half_dt: f64,
    pub fidelity_fine_grid: f64,
    pub dt_delta: f64,
    pub grid_delta: f64,
    pub converged: bool,
    pub dt: f64,
}

/// Repeats [`transfer_fidelity`] with half the step and with twice the
/// grid points.
pub fn convergence_check(protocol: &Protocol, n: usize, cfg: &SimConfig, w_tilde: f64) -> Result<ConvergenceReport> {
    let (base, _) = transfer_fidelity(protocol, n, cfg, w_tilde)?;
    let half = SimConfig { dt: cfg.dt / 2.0, ..*cfg };
    let (f_dt, _) = transfer_fidelity(protocol, n, &half, w_tilde)?;
    let fine = SimConfig {
        grid: cfg.grid.refined(),
        ..*cfg
    };
    let (f_grid, _) = transfer_fidelity(protocol, n, &fine, w_tilde)?;
    let dt_delta = (f_dt - base).abs();
    let grid_delta = (f_grid - base).abs();
    Ok(ConvergenceReport {
        fidelity: base,
        fidelity_half_dt: f_dt,
        fidelity_fine_grid: f_grid,
        dt_delta,
        grid_delta,
        converged: dt_delta <= CONVERGENCE_TOLERANCE && grid_delta <= CONVERGENCE_TOLERANCE,
        dt: cfg.dt,
    })
}

/// Halves `cfg.dt` until [`convergence_check`] passes, at most
/// `max_halvings` times. Returns the last report either way.
pub fn converge(
    protocol: &Protocol,
    n: usize,
    cfg: &SimConfig,
    w_tilde: f64,
    max_halvings: u32,
) -> Result<ConvergenceReport> {
    let mut cfg = *cfg;
    let mut report = convergence_check(protocol, n, &cfg, w_tilde)?;
    for _ in 0..max_halvings {
        if report.converged {
            break;
        }
        cfg.dt /= 2.0;
        report = convergence_check(protocol, n, &cfg, w_tilde)?;
    }
    Ok(report)
}
