use super::bang::check_gamma;
use super::{ControlLaw, ControlSegment, Family, ImpulseRecord, Protocol, SegmentKind};
use crate::ermakov::{BoundaryFlags, Curve, ScalingTrajectory};
use crate::error::{Error, Result};

fn check_duration(tau_f: f64) -> Result<()> {
    if !(tau_f.is_finite() && tau_f > 0.0) {
        return Err(Error::InvalidSpec {
            field: "tau_f",
            value: tau_f,
        });
    }
    Ok(())
}

fn single_segment(curve: Curve, tau_f: f64) -> Vec<ControlSegment> {
    vec![ControlSegment {
        kind: SegmentKind::Analytic,
        start: 0.0,
        end: tau_f,
        law: ControlLaw::FromCurve { curve },
    }]
}

/// The unbounded optimum b² = (γ² − 1)τ/τ_f + 1.
///
/// ḃ jumps at both ends, so the protocol carries impulses of strength −c₁
/// at τ = 0 and c₁/γ² at τ_f, with c₁ = (γ² − 1)/(2τ_f).
pub fn unconstrained_protocol(tau_f: f64, gamma: f64) -> Result<(Protocol, ScalingTrajectory)> {
    check_gamma(gamma)?;
    check_duration(tau_f)?;
    let g2 = gamma * gamma;
    let c1 = (g2 - 1.0) / (2.0 * tau_f);
    let curve = Curve::SqrtLinear {
        slope: 2.0 * c1,
        offset: 1.0,
    };
    let traj = ScalingTrajectory::closed_form(
        vec![(0.0, tau_f, curve)],
        BoundaryFlags {
            bdot: false,
            bddot: false,
        },
    );
    let impulses = if c1 == 0.0 {
        Vec::new()
    } else {
        vec![
            ImpulseRecord { tau: 0.0, strength: -c1 },
            ImpulseRecord {
                tau: tau_f,
                strength: c1 / g2,
            },
        ]
    };
    let mut p = Protocol::assemble(Family::Unconstrained, gamma, None, single_segment(curve, tau_f), impulses);
    p.c1 = Some(c1);
    p.c2 = Some(1.0);
    Ok((p, traj))
}

/// b = 1 + (γ − 1)(10s³ − 15s⁴ + 6s⁵), s = τ/τ_f: ḃ and b̈ vanish at both ends.
pub fn polynomial_protocol(tau_f: f64, gamma: f64) -> Result<(Protocol, ScalingTrajectory)> {
    check_gamma(gamma)?;
    check_duration(tau_f)?;
    let curve = Curve::Quintic { gamma, tau_f };
    let traj = ScalingTrajectory::closed_form(
        vec![(0.0, tau_f, curve)],
        BoundaryFlags {
            bdot: true,
            bddot: true,
        },
    );
    let g = gamma - 1.0;
    let mut p = Protocol::assemble(Family::Polynomial, gamma, None, single_segment(curve, tau_f), Vec::new());
    p.polynomial = Some(vec![
        1.0,
        0.0,
        0.0,
        10.0 * g / tau_f.powi(3),
        -15.0 * g / tau_f.powi(4),
        6.0 * g / tau_f.powi(5),
    ]);
    Ok((p, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Control;
    use crate::ermakov::ermakov_residual;

    #[test]
    fn unconstrained_endpoints_and_impulses() {
        let (p, traj) = unconstrained_protocol(5.0, 10.0).unwrap();
        assert!((traj.eval(0.0).b - 1.0).abs() < 1e-14);
        assert!((traj.eval(5.0).b - 10.0).abs() < 1e-12);
        let c1 = 99.0 / 10.0;
        assert_eq!(p.impulses[0].strength, -c1);
        assert!((p.impulses[1].strength - c1 / 100.0).abs() < 1e-15);
        assert_eq!(p.impulses().len(), 2);
        assert!(ermakov_residual(&traj, &p) < 1e-10);
        assert!(!p.metadata.expulsive);
    }

    #[test]
    fn unconstrained_control_is_singular_form() {
        let (p, _) = unconstrained_protocol(4.0, 3.0).unwrap();
        let c1 = 8.0 / 8.0;
        for &t in &[0.0, 1.0, 3.9] {
            let y: f64 = 2.0 * c1 * t + 1.0;
            assert!((p.value(t) - (1.0 + c1 * c1) / (y * y)).abs() < 1e-12);
        }
    }

    #[test]
    fn polynomial_boundary_conditions() {
        let (p, traj) = polynomial_protocol(7.854, 10.0).unwrap();
        let a = traj.eval(0.0);
        let z = traj.eval(7.854);
        assert_eq!((a.b, a.bdot, a.bddot), (1.0, 0.0, 0.0));
        assert!((z.b - 10.0).abs() < 1e-12 && z.bdot.abs() < 1e-12 && z.bddot.abs() < 1e-12);
        assert!((p.value(0.0) - 1.0).abs() < 1e-12);
        assert!((p.value(7.854) - 1e-4).abs() < 1e-12);
        let coeffs = p.polynomial.as_ref().unwrap();
        let tau: f64 = 2.3;
        let b: f64 = coeffs.iter().enumerate().map(|(j, a)| a * tau.powi(j as i32)).sum();
        assert!((b - traj.eval(tau).b).abs() < 1e-12);
        assert!(ermakov_residual(&traj, &p) < 1e-10);
    }

    #[test]
    fn short_polynomial_protocols_are_expulsive() {
        let (p, _) = polynomial_protocol(7.854, 10.0).unwrap();
        assert!(p.metadata.expulsive);
        assert!((p.metadata.min_control + 0.375).abs() < 5e-3, "{}", p.metadata.min_control);
        let (slow, _) = polynomial_protocol(200.0, 10.0).unwrap();
        assert!(!slow.metadata.expulsive);
    }

    #[test]
    fn zero_duration_is_rejected() {
        assert!(unconstrained_protocol(0.0, 2.0).is_err());
        assert!(polynomial_protocol(-1.0, 2.0).is_err());
    }
}
