//! Physical trap parameters and the dimensionless frame.
//!
//! Everything below this module works with ħ = m = ω₀ = 1: time in units of
//! 1/ω₀, length in units of the initial oscillator length a₀ = √(ħ/(mω₀)),
//! energy in units of ħω₀. SI values only appear at the configuration
//! boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass assumed when a configuration does not name one (⁸⁷Rb-like), in u.
pub const DEFAULT_MASS_AMU: f64 = 87.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// Initial trap angular frequency, rad/s.
    pub omega0: f64,
    /// Final trap angular frequency, rad/s.
    pub omega_f: f64,
    /// Gaussian beam waist, m.
    pub waist: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Reduced Planck constant, J·s.
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    HBAR
}

impl TrapSpec {
    pub fn new(omega0: f64, omega_f: f64, waist: f64, mass: f64) -> Result<Self> {
        let spec = TrapSpec {
            omega0,
            omega_f,
            waist,
            mass,
            hbar: HBAR,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("omega0", self.omega0),
            ("omega_f", self.omega_f),
            ("waist", self.waist),
            ("mass", self.mass),
            ("hbar", self.hbar),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidSpec { field, value });
            }
        }
        Ok(())
    }

    /// γ = √(ω₀/ω_f), the final-to-initial width ratio.
    pub fn gamma(&self) -> f64 {
        (self.omega0 / self.omega_f).sqrt()
    }

    /// Initial oscillator length a₀ = √(ħ/(mω₀)), m.
    pub fn oscillator_length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega0)).sqrt()
    }

    /// w̃₀ = w₀/a₀.
    pub fn dimensionless_waist(&self) -> f64 {
        self.waist * (self.mass * self.omega0 / self.hbar).sqrt()
    }
}

/// Dimensionless view of a [`TrapSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessTrap {
    pub gamma: f64,
    pub w_tilde: f64,
    /// τ = tau_per_second · t, i.e. ω₀ in 1/s.
    pub tau_per_second: f64,
}

pub fn to_dimensionless(spec: &TrapSpec) -> Result<DimensionlessTrap> {
    spec.validate()?;
    Ok(DimensionlessTrap {
        gamma: spec.gamma(),
        w_tilde: spec.dimensionless_waist(),
        tau_per_second: spec.omega0,
    })
}

/// Bound δ on |u(τ)| = |ω²(τ)/ω₀²| over the open interval (0, τ_f).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlBound {
    pub delta: f64,
}

impl ControlBound {
    /// Requires δ > 0 and, for a genuine expansion or compression, δγ⁴ > 1.
    pub fn new(delta: f64, gamma: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InfeasibleParameters {
                reason: "control bound delta must be positive".into(),
                argument: delta,
            });
        }
        let product = delta * gamma.powi(4);
        if product <= 1.0 && gamma != 1.0 {
            return Err(Error::InfeasibleParameters {
                reason: "delta * gamma^4 must exceed 1".into(),
                argument: product,
            });
        }
        Ok(ControlBound { delta })
    }
}

/// Conventions of the dimensionless frame (ħ = m = ω₀ = 1, K = ω₀).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DimensionlessFrame;

impl DimensionlessFrame {
    /// The Ermakov constant K in units of ω₀.
    pub const ERMAKOV_K: f64 = 1.0;

    pub fn time_unit(spec: &TrapSpec) -> f64 {
        1.0 / spec.omega0
    }

    pub fn length_unit(spec: &TrapSpec) -> f64 {
        spec.oscillator_length()
    }

    pub fn energy_unit(spec: &TrapSpec) -> f64 {
        spec.hbar * spec.omega0
    }

    pub fn tau_from_seconds(spec: &TrapSpec, t: f64) -> f64 {
        t * spec.omega0
    }

    pub fn seconds_from_tau(spec: &TrapSpec, tau: f64) -> f64 {
        tau / spec.omega0
    }

    pub fn length_to_dimensionless(spec: &TrapSpec, x: f64) -> f64 {
        x / spec.oscillator_length()
    }

    pub fn length_to_si(spec: &TrapSpec, x: f64) -> f64 {
        x * spec.oscillator_length()
    }

    pub fn energy_to_dimensionless(spec: &TrapSpec, e: f64) -> f64 {
        e / Self::energy_unit(spec)
    }

    pub fn energy_to_si(spec: &TrapSpec, e: f64) -> f64 {
        e * Self::energy_unit(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rb87(omega0: f64, omega_f: f64, waist: f64) -> TrapSpec {
        TrapSpec::new(omega0, omega_f, waist, DEFAULT_MASS_AMU * ATOMIC_MASS_UNIT).unwrap()
    }

    #[test]
    fn identity_trap_has_unit_gamma() {
        let spec = rb87(100.0, 100.0, 1e-5);
        assert_eq!(to_dimensionless(&spec).unwrap().gamma, 1.0);
    }

    #[test]
    fn lab_frequencies_give_gamma_ten() {
        let spec = rb87(2.0 * PI * 2500.0, 2.0 * PI * 25.0, 20.0 * 1060e-9);
        let d = to_dimensionless(&spec).unwrap();
        assert!((d.gamma - 10.0).abs() < 1e-12);
        assert_eq!(d.tau_per_second, 2.0 * PI * 2500.0);
    }

    #[test]
    fn dimensionless_waist_matches_hand_evaluation() {
        let spec = rb87(2.0 * PI * 2500.0, 2.0 * PI * 25.0, 20.0 * 1060e-9);
        // hand evaluation: m = 87 * 1.6605390666e-27 = 1.444669e-25 kg,
        // m*omega0 = 2.269273e-21, hbar/(m*omega0) = 4.647213e-14 m^2,
        // a0 = 2.155740e-7 m, w0/a0 = 2.12e-5 / 2.155740e-7
        let m = 87.0 * 1.660_539_066_60e-27;
        let omega0 = 2.0 * PI * 2500.0;
        let a0 = (1.054_571_817e-34 / (m * omega0)).sqrt();
        assert!((a0 - 2.155_74e-7).abs() / a0 < 1e-5);
        let expected = 2.12e-5 / a0;
        let w = spec.dimensionless_waist();
        assert!((w - expected).abs() / expected < 1e-13);
        assert!((w - 98.34).abs() < 0.01, "w_tilde = {w}");
    }

    #[test]
    fn rejects_non_positive_fields() {
        let m = ATOMIC_MASS_UNIT;
        assert!(matches!(
            TrapSpec::new(0.0, 1.0, 1.0, m),
            Err(Error::InvalidSpec { field: "omega0", .. })
        ));
        assert!(matches!(
            TrapSpec::new(1.0, -1.0, 1.0, m),
            Err(Error::InvalidSpec { field: "omega_f", .. })
        ));
        assert!(matches!(
            TrapSpec::new(1.0, 1.0, f64::NAN, m),
            Err(Error::InvalidSpec { field: "waist", .. })
        ));
        assert!(matches!(
            TrapSpec::new(1.0, 1.0, 1.0, 0.0),
            Err(Error::InvalidSpec { field: "mass", .. })
        ));
    }

    #[test]
    fn control_bound_requires_delta_gamma4_above_one() {
        assert!(ControlBound::new(1.0, 10.0).is_ok());
        assert!(ControlBound::new(0.5, 1.1).is_err());
        assert!(ControlBound::new(0.5, 1.0).is_ok());
        assert!(ControlBound::new(-1.0, 10.0).is_err());
        assert!(ControlBound::new(1e-4, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn time_round_trip_is_identity(omega0 in 1.0f64..1e6, t in 1e-9f64..10.0) {
            let spec = rb87(omega0, omega0 / 4.0, 1e-5);
            let back = DimensionlessFrame::seconds_from_tau(
                &spec, DimensionlessFrame::tau_from_seconds(&spec, t));
            prop_assert!(((back - t) / t).abs() < 1e-14);
        }

        #[test]
        fn length_and_energy_round_trip(x in 1e-9f64..1e-3, e in 1e-35f64..1e-25) {
            let spec = rb87(2.0 * PI * 2500.0, 2.0 * PI * 25.0, 2e-5);
            let xb = DimensionlessFrame::length_to_si(
                &spec, DimensionlessFrame::length_to_dimensionless(&spec, x));
            let eb = DimensionlessFrame::energy_to_si(
                &spec, DimensionlessFrame::energy_to_dimensionless(&spec, e));
            prop_assert!(((xb - x) / x).abs() < 1e-14);
            prop_assert!(((eb - e) / e).abs() < 1e-14);
        }

        #[test]
        fn gamma_is_scale_invariant(omega0 in 1.0f64..1e5, ratio in 1.0f64..1e3, c in 1e-3f64..1e3) {
            let a = rb87(omega0, omega0 / ratio, 1e-5);
            let b = rb87(c * omega0, c * omega0 / ratio, 1e-5);
            prop_assert!(((a.gamma() - b.gamma()) / a.gamma()).abs() < 1e-14);
        }
    }
}
