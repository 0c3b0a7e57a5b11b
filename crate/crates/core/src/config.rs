//! JSON run configuration for the command-line front end.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Family;
use crate::tdse::{PotentialModel, SimConfig, DEFAULT_DT, DEFAULT_LEAK_THRESHOLD};
use crate::units::{ControlBound, DimensionlessTrap, TrapSpec, ATOMIC_MASS_UNIT, DEFAULT_MASS_AMU, HBAR};
use crate::wavefunction::SpatialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnits {
    Seconds,
    Dimensionless,
}

/// Trap parameters in SI units. `mass` may be omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    /// rad/s
    pub omega0: f64,
    /// rad/s
    pub omega_f: f64,
    /// m
    pub waist: f64,
    /// kg
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub family: Family,
    /// Not needed for bang-bang.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_f: Option<f64>,
    /// Required whenever `tau_f` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<TimeUnits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimOverrides {
    pub model: PotentialModel,
    pub dt: f64,
    pub n_points: usize,
    /// Defaults to min(8γ, 0.69·w̃₀).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub leak_threshold: f64,
    pub quantum_number: usize,
    /// Run the refinement check (three simulations instead of one).
    pub check_convergence: bool,
}

impl Default for SimOverrides {
    fn default() -> Self {
        SimOverrides {
            model: PotentialModel::Quartic,
            dt: DEFAULT_DT,
            n_points: 4096,
            half_width: None,
            leak_threshold: DEFAULT_LEAK_THRESHOLD,
            quantum_number: 0,
            check_convergence: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Duration; values carry `units`.
    #[serde(rename = "t_f")]
    Duration,
    /// Beam waist in metres.
    Waist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: SweepScale,
    /// Required for a duration axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<TimeUnits>,
    #[serde(default = "all_families")]
    pub families: Vec<Family>,
    /// Also run the TDSE at every point.
    #[serde(default = "yes")]
    pub simulate: bool,
}

fn all_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn yes() -> bool {
    true
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("sweep needs at least one point".into()));
        }
        if !(self.start > 0.0 && self.stop.is_finite()) {
            return Err(Error::Config(format!("sweep range must be positive, got start {}", self.start)));
        }
        if self.stop < self.start || (self.points > 1 && self.stop == self.start) {
            return Err(Error::Config(format!(
                "sweep range must be ordered, got {} .. {}",
                self.start, self.stop
            )));
        }
        if self.axis == SweepAxis::Duration && self.units.is_none() {
            return Err(Error::Config("a t_f sweep needs an explicit `units` field".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("sweep needs at least one family".into()));
        }
        Ok(())
    }

    /// The axis values in sweep order.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if k + 1 == n {
                    self.stop
                } else {
                    match self.scale {
                        SweepScale::Linear => self.start + (self.stop - self.start) * s,
                        SweepScale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * s).exp(),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trap: TrapConfig,
    pub bound: BoundConfig,
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub sim: SimOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// λ = 1060 nm, w₀ = 20λ, ω₀ = 2π·2500 Hz, ω_f = 2π·25 Hz, δ = 1 and a
/// bang-singular-bang protocol of duration τ_f = 5.
impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trap: TrapConfig {
                omega0: 2.0 * PI * 2500.0,
                omega_f: 2.0 * PI * 25.0,
                waist: 20.0 * 1060e-9,
                mass: None,
            },
            bound: BoundConfig { delta: 1.0 },
            protocol: ProtocolConfig {
                family: Family::BangSingularBang,
                tau_f: Some(5.0),
                units: Some(TimeUnits::Dimensionless),
            },
            sim: SimOverrides::default(),
            sweep: None,
        }
    }
}

/// A configuration turned into dimensionless inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub spec: TrapSpec,
    pub trap: DimensionlessTrap,
    pub delta: f64,
    pub family: Family,
    pub tau_f: Option<f64>,
    /// Human-readable warnings, e.g. an assumed mass.
    pub notices: Vec<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn spec(&self) -> Result<(TrapSpec, Vec<String>)> {
        let mut notices = Vec::new();
        let mass = match self.trap.mass {
            Some(m) => m,
            None => {
                notices.push(format!(
                    "NOTICE: trap.mass not given; assuming {DEFAULT_MASS_AMU} u. Absolute fidelities depend on this choice."
                ));
                DEFAULT_MASS_AMU * ATOMIC_MASS_UNIT
            }
        };
        let spec = TrapSpec {
            omega0: self.trap.omega0,
            omega_f: self.trap.omega_f,
            waist: self.trap.waist,
            mass,
            hbar: HBAR,
        };
        spec.validate()?;
        Ok((spec, notices))
    }

    /// Converts a duration in the given units to τ.
    pub fn to_tau(value: f64, units: Option<TimeUnits>, spec: &TrapSpec) -> Result<f64> {
        match units {
            Some(TimeUnits::Dimensionless) => Ok(value),
            Some(TimeUnits::Seconds) => Ok(value * spec.omega0),
            None => Err(Error::Config(
                "durations need an explicit `units` field (seconds or dimensionless)".into(),
            )),
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let (spec, notices) = self.spec()?;
        let trap = crate::units::to_dimensionless(&spec)?;
        if self.protocol.family.is_bounded() {
            ControlBound::new(self.bound.delta, trap.gamma)?;
        }
        let tau_f = match self.protocol.tau_f {
            Some(v) => {
                let tau = RunConfig::to_tau(v, self.protocol.units, &spec)?;
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(Error::Config(format!("protocol.tau_f must be positive, got {v}")));
                }
                Some(tau)
            }
            None => None,
        };
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(Resolved {
            spec,
            trap,
            delta: self.bound.delta,
            family: self.protocol.family,
            tau_f,
            notices,
        })
    }

    /// Simulation settings for a trap with the given γ and w̃₀.
    pub fn sim_config(&self, gamma: f64, w_tilde: f64) -> Result<SimConfig> {
        let s = &self.sim;
        let grid = match s.half_width {
            Some(h) => SpatialGrid::new(s.n_points, h)?,
            None => {
                let d = SpatialGrid::for_expansion(
                    gamma,
                    (s.model != PotentialModel::Harmonic).then_some(w_tilde),
                )?;
                SpatialGrid::new(s.n_points, d.half_width)?
            }
        };
        SimConfig::new(s.model, s.dt, grid, s.leak_threshold)
    }
}
