use serde::{Deserialize, Serialize};

use super::{ControlLaw, ControlSegment, Family, Protocol, SegmentKind};
use crate::ermakov::{BoundaryFlags, Curve, ScalingTrajectory};
use crate::error::{Error, Result};
use crate::units::ControlBound;

/// Durations of the expulsive (u = −δ) and confining (u = +δ) bangs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BangBangTimes {
    pub tau1: f64,
    pub tau2: f64,
}

impl BangBangTimes {
    pub fn total(&self) -> f64 {
        self.tau1 + self.tau2
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidSpec {
            field: "gamma",
            value: gamma,
        });
    }
    Ok(())
}

/// Minimum-time bang-bang switching times for expansion factor γ and bound δ.
pub fn bangbang_times(gamma: f64, delta: f64) -> Result<BangBangTimes> {
    check_gamma(gamma)?;
    ControlBound::new(delta, gamma)?;
    if gamma == 1.0 {
        return Ok(BangBangTimes { tau1: 0.0, tau2: 0.0 });
    }
    let g2 = gamma * gamma;
    let g4 = g2 * g2;
    let root = delta.sqrt();

    if (g2 - 1.0) * (delta * g2 - 1.0) < 0.0 {
        return Err(Error::InfeasibleParameters {
            reason: "(gamma^2 - 1)(delta gamma^2 - 1) must be non-negative".into(),
            argument: (g2 - 1.0) * (delta * g2 - 1.0),
        });
    }
    let a1 = (delta * g4 + 1.0) / (g2 * (delta + 1.0));
    if !(a1 >= 1.0 - 1e-14) {
        return Err(Error::InfeasibleParameters {
            reason: "acosh argument of the first bang is below 1".into(),
            argument: a1,
        });
    }
    let a2 = g2 * (delta - 1.0) / (delta * g4 - 1.0);
    if !(a2.abs() <= 1.0 + 1e-14) {
        return Err(Error::InfeasibleParameters {
            reason: "acos argument of the second bang is outside [-1, 1]".into(),
            argument: a2,
        });
    }
    Ok(BangBangTimes {
        tau1: a1.max(1.0).acosh() / (2.0 * root),
        tau2: a2.clamp(-1.0, 1.0).acos() / (2.0 * root),
    })
}

/// The minimum-time protocol: u = −δ on [0, τ₁], u = +δ on [τ₁, τ_min].
pub fn bangbang_protocol(gamma: f64, delta: f64) -> Result<(Protocol, ScalingTrajectory)> {
    let t = bangbang_times(gamma, delta)?;
    let tau_min = t.total();
    let flags = BoundaryFlags {
        bdot: true,
        bddot: false,
    };
    let segments = vec![
        ControlSegment {
            kind: SegmentKind::BangLow,
            start: 0.0,
            end: t.tau1,
            law: ControlLaw::Constant { value: -delta },
        },
        ControlSegment {
            kind: SegmentKind::BangHigh,
            start: t.tau1,
            end: tau_min,
            law: ControlLaw::Constant { value: delta },
        },
    ];
    let traj = if tau_min == 0.0 {
        ScalingTrajectory::closed_form(vec![(0.0, 0.0, Curve::Static { b: 1.0 })], flags)
    } else {
        ScalingTrajectory::closed_form(
            vec![
                (0.0, t.tau1, Curve::constant_control(-delta, 0.0, 1.0, 0.0)?),
                (t.tau1, tau_min, Curve::constant_control(delta, tau_min, gamma, 0.0)?),
            ],
            flags,
        )
    };
    let protocol = Protocol::assemble(Family::BangBang, gamma, Some(delta), segments, Vec::new());
    Ok((protocol, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Control;
    use crate::ermakov::ermakov_residual;

    #[test]
    fn symmetric_bound_at_gamma_ten() {
        let t = bangbang_times(10.0, 1.0).unwrap();
        assert!((t.tau1 - 2.302585).abs() < 1e-6, "{}", t.tau1);
        assert!((t.tau2 - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((t.total() - 3.087983).abs() < 1e-6);
    }

    #[test]
    fn identity_expansion_takes_no_time() {
        let t = bangbang_times(1.0, 1.0).unwrap();
        assert_eq!(t.total(), 0.0);
        let (p, traj) = bangbang_protocol(1.0, 1.0).unwrap();
        assert_eq!(p.tau_f, 0.0);
        assert_eq!(traj.eval(0.0).b, 1.0);
    }

    #[test]
    fn infeasible_bound_is_reported() {
        assert!(matches!(
            bangbang_times(2.0, 0.05),
            Err(Error::InfeasibleParameters { .. })
        ));
        assert!(matches!(bangbang_times(10.0, -1.0), Err(Error::InfeasibleParameters { .. })));
        assert!(matches!(bangbang_times(f64::NAN, 1.0), Err(Error::InvalidSpec { .. })));
    }

    #[test]
    fn trajectory_is_continuous_and_hits_both_ends() {
        for &(g, d) in &[(10.0, 1.0), (3.0, 2.5), (5.0, 0.3)] {
            let (p, traj) = bangbang_protocol(g, d).unwrap();
            p.check_tiling().unwrap();
            let (db, dbdot) = traj.continuity_defect();
            assert!(db < 1e-9 && dbdot < 1e-9, "γ={g} δ={d}: {db} {dbdot}");
            let start = traj.eval(0.0);
            let end = traj.eval(p.tau_f);
            assert!((start.b - 1.0).abs() < 1e-12 && start.bdot.abs() < 1e-12);
            assert!((end.b - g).abs() < 1e-12 && end.bdot.abs() < 1e-12);
            assert!(ermakov_residual(&traj, &p) < 1e-8);
        }
    }

    #[test]
    fn control_saturates_the_bound() {
        let (p, _) = bangbang_protocol(10.0, 2.0).unwrap();
        assert_eq!(p.value(0.1), -2.0);
        assert_eq!(p.value(p.tau_f - 0.1), 2.0);
        assert!(p.metadata.expulsive);
        assert!(!p.exceeds_bound(2.0));
    }
}
