use serde::{Deserialize, Serialize};

use super::bang::{bangbang_times, check_gamma};
use super::{ControlLaw, ControlSegment, Family, Protocol, SegmentKind};
use crate::ermakov::{BoundaryFlags, Curve, ScalingTrajectory};
use crate::error::{Error, Result};
use crate::units::ControlBound;

/// Values of y = b² where the singular arc meets the two bangs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Junctions {
    pub y1: f64,
    pub y12: f64,
}

/// Durations of the expulsive bang, the singular arc and the confining bang.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalTimes {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl IntervalTimes {
    pub fn total(&self) -> f64 {
        self.tau1 + self.tau2 + self.tau3
    }
}

/// Largest c₁ with a real second junction: (δγ⁴ − 1)/(2√δ·γ²).
pub fn c1_max(gamma: f64, delta: f64) -> f64 {
    let g2 = gamma * gamma;
    (delta * g2 * g2 - 1.0) / (2.0 * delta.sqrt() * g2)
}

/// Lower end of the c₁ search bracket, (γ² − 1)/(2·10⁶).
pub fn c1_floor(gamma: f64) -> f64 {
    (gamma * gamma - 1.0) / 2e6
}

/// Upper end of the c₁ search bracket.
///
/// For δ > 1 the singular arc shrinks to zero length before c₁ reaches
/// `c1_max`, at the c₁ of the arc through the bang-bang switching point.
pub fn c1_upper(gamma: f64, delta: f64) -> f64 {
    let top = c1_max(gamma, delta);
    if delta <= 1.0 {
        return top;
    }
    let g2 = gamma * gamma;
    let y = (delta * g2 * g2 + 1.0 + g2 * (delta - 1.0)) / (2.0 * delta * g2);
    let c_sq = y * ((1.0 - delta) + delta * y) - 1.0;
    let mut c = c_sq.max(0.0).sqrt().min(top);
    // y₁₂ has a square-root singularity at c1_max, so when the two are close
    // a rounding error of a few ulps in c puts the junctions out of order
    for _ in 0..256 {
        match bsb_junctions(c, gamma, delta) {
            Ok(j) if j.y12 >= j.y1 => break,
            _ => c *= 1.0 - 4.0 * f64::EPSILON,
        }
    }
    c
}

pub fn bsb_junctions(c1: f64, gamma: f64, delta: f64) -> Result<Junctions> {
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::Domain(format!("singular arc needs c1 > 0, got {c1}")));
    }
    let g2 = gamma * gamma;
    let dg4 = delta * g2 * g2;
    let c_sq = c1 * c1;
    let disc1 = delta * delta + (4.0 * c_sq + 2.0) * delta + 1.0;
    // (δγ⁴ − 1)² − 4c₁²δγ⁴ in factored form; the expanded difference loses
    // about half the digits of y₁₂ when c₁ is close to c1_max
    let top = c1_max(gamma, delta);
    let mut disc2 = 4.0 * dg4 * (top - c1) * (top + c1);
    if disc2 < 0.0 {
        if disc2 > -1e-12 * dg4 * dg4 {
            disc2 = 0.0;
        } else {
            return Err(Error::C1TooLarge {
                c1,
                c1_max: top,
            });
        }
    }
    Ok(Junctions {
        y1: (delta - 1.0 + disc1.sqrt()) / (2.0 * delta),
        y12: (dg4 + 1.0 + disc2.sqrt()) / (2.0 * delta * g2),
    })
}

pub fn bsb_interval_times(c1: f64, gamma: f64, delta: f64) -> Result<IntervalTimes> {
    let j = bsb_junctions(c1, gamma, delta)?;
    let g2 = gamma * gamma;
    let dg4 = delta * g2 * g2;
    let root = delta.sqrt();

    let a1 = (2.0 * delta * j.y1 - delta + 1.0) / (delta + 1.0);
    if !(a1 >= 1.0 - 1e-12) {
        return Err(Error::InfeasibleParameters {
            reason: "acosh argument of the first bang is below 1".into(),
            argument: a1,
        });
    }
    let a3 = (2.0 * delta * g2 * j.y12 - dg4 - 1.0) / (dg4 - 1.0);
    if !(a3.abs() <= 1.0 + 1e-12) {
        return Err(Error::InfeasibleParameters {
            reason: "acos argument of the last bang is outside [-1, 1]".into(),
            argument: a3,
        });
    }
    let tau2 = (j.y12 - j.y1) / (2.0 * c1);
    if tau2 < -1e-12 * j.y12 / c1 {
        return Err(Error::InfeasibleParameters {
            reason: "singular arc would run backwards (junctions out of order)".into(),
            argument: tau2,
        });
    }
    Ok(IntervalTimes {
        tau1: a1.max(1.0).acosh() / (2.0 * root),
        tau2: tau2.max(0.0),
        tau3: a3.clamp(-1.0, 1.0).acos() / (2.0 * root),
    })
}

/// Control on the singular arc, u_s = (1 + x₁²x₂²)/x₁⁴.
pub fn singular_control(x1: f64, x2: f64) -> Result<f64> {
    if !(x1 > 0.0) {
        return Err(Error::Domain(format!("singular control needs x1 > 0, got {x1}")));
    }
    let p = x1 * x2;
    Ok((1.0 + p * p) / x1.powi(4))
}

/// Points at which the duration is checked for monotonicity in c₁.
const MONOTONICITY_PROBES: usize = 33;
const MAX_BISECTIONS: usize = 200;

/// Finds c₁ such that τ₁ + τ₂ + τ₃ = τ_f by bisection on a log scale.
///
/// The duration decreases from very long at [`c1_floor`] to its shortest at
/// [`c1_upper`]. Bisection runs to machine precision, well past the
/// required |T(c₁) − τ_f| < 10⁻¹⁰·τ_f.
pub fn solve_c1(tau_f: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_gamma(gamma)?;
    ControlBound::new(delta, gamma)?;
    if !(gamma > 1.0) {
        return Err(Error::Domain(format!("solve_c1 needs an expansion (gamma > 1), got {gamma}")));
    }
    if !(tau_f.is_finite() && tau_f > 0.0) {
        return Err(Error::InvalidSpec {
            field: "tau_f",
            value: tau_f,
        });
    }
    let tau_min = bangbang_times(gamma, delta)?.total();
    let equal_tol = 1e-12 * tau_min;
    if tau_f < tau_min - equal_tol {
        return Err(Error::InfeasibleDuration { tau_f, tau_min });
    }
    let hi = c1_upper(gamma, delta);
    let lo = c1_floor(gamma);
    // exp(ln c) can overshoot the bracket by an ulp, and just above c1_upper
    // the singular arc has negative length
    let duration = |c: f64| bsb_interval_times(c.clamp(lo, hi), gamma, delta).map(|t| t.total());
    let t_hi = duration(hi)?;
    let t_lo = duration(lo)?;
    if tau_f > t_lo {
        return Err(Error::UnsupportedDuration { tau_f, tau_max: t_lo });
    }
    if (tau_f - t_hi).abs() <= equal_tol || tau_f < t_hi {
        return Ok(hi);
    }

    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut prev = t_lo;
    for k in 1..MONOTONICITY_PROBES {
        let c = (llo + (lhi - llo) * k as f64 / (MONOTONICITY_PROBES - 1) as f64).exp();
        let t = duration(c)?;
        if t > prev * (1.0 + 1e-12) {
            return Err(Error::MonotonicityViolation {
                lo,
                hi,
                t_lo,
                t_hi,
                target: tau_f,
            });
        }
        prev = t;
    }

    let (mut a, mut b) = (llo, lhi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if duration(mid.exp())? > tau_f {
            a = mid;
        } else {
            b = mid;
        }
    }
    let (ca, cb) = (a.exp(), b.exp());
    let (ca, cb) = (ca.clamp(lo, hi), cb.clamp(lo, hi));
    let c = if (duration(ca)? - tau_f).abs() <= (duration(cb)? - tau_f).abs() { ca } else { cb };
    let residual = (duration(c)? - tau_f).abs();
    if residual >= 1e-10 * tau_f {
        return Err(Error::Contract(format!(
            "c1 bisection stalled with |T(c1) - tau_f| = {residual:e}"
        )));
    }
    Ok(c)
}

/// The bounded protocol of duration τ_f ≥ τ_min: expulsive bang, singular
/// arc b² = 2c₁τ + c₂, confining bang.
pub fn bsb_protocol(tau_f: f64, gamma: f64, delta: f64) -> Result<(Protocol, ScalingTrajectory)> {
    check_gamma(gamma)?;
    ControlBound::new(delta, gamma)?;
    if !(tau_f.is_finite() && tau_f > 0.0) {
        return Err(Error::InvalidSpec {
            field: "tau_f",
            value: tau_f,
        });
    }
    let flags = BoundaryFlags {
        bdot: true,
        bddot: false,
    };
    if gamma == 1.0 {
        let segments = vec![
            bang(SegmentKind::BangLow, 0.0, 0.0, -delta),
            ControlSegment {
                kind: SegmentKind::Singular,
                start: 0.0,
                end: tau_f,
                law: ControlLaw::Singular { c1: 0.0, c2: 1.0 },
            },
            bang(SegmentKind::BangHigh, tau_f, tau_f, delta),
        ];
        let traj = ScalingTrajectory::closed_form(vec![(0.0, tau_f, Curve::Static { b: 1.0 })], flags);
        let mut p = Protocol::assemble(Family::BangSingularBang, gamma, Some(delta), segments, Vec::new());
        p.c1 = Some(0.0);
        p.c2 = Some(1.0);
        p.metadata.singular_arc_within_bound = Some(delta >= 1.0);
        return Ok((p, traj));
    }

    let bb = bangbang_times(gamma, delta)?;
    let tau_min = bb.total();
    let (c1, tau1, tau2, c2) = if delta >= 1.0 && (tau_f - tau_min).abs() <= 1e-12 * tau_min {
        let c1 = c1_upper(gamma, delta);
        let first = Curve::constant_control(-delta, 0.0, 1.0, 0.0)?.eval(bb.tau1);
        (c1, bb.tau1, 0.0, first.b * first.b - 2.0 * c1 * bb.tau1)
    } else {
        let c1 = solve_c1(tau_f, gamma, delta)?;
        let t = bsb_interval_times(c1, gamma, delta)?;
        let j = bsb_junctions(c1, gamma, delta)?;
        (c1, t.tau1, t.tau2, j.y1 - 2.0 * c1 * t.tau1)
    };
    let t12 = (tau1 + tau2).min(tau_f);

    let segments = vec![
        bang(SegmentKind::BangLow, 0.0, tau1, -delta),
        ControlSegment {
            kind: SegmentKind::Singular,
            start: tau1,
            end: t12,
            law: ControlLaw::Singular { c1, c2 },
        },
        bang(SegmentKind::BangHigh, t12, tau_f, delta),
    ];
    let mut pieces = vec![(0.0, tau1, Curve::constant_control(-delta, 0.0, 1.0, 0.0)?)];
    if t12 > tau1 {
        pieces.push((
            tau1,
            t12,
            Curve::SqrtLinear {
                slope: 2.0 * c1,
                offset: c2,
            },
        ));
    }
    pieces.push((t12, tau_f, Curve::constant_control(delta, tau_f, gamma, 0.0)?));
    let traj = ScalingTrajectory::closed_form(pieces, flags);

    let mut p = Protocol::assemble(Family::BangSingularBang, gamma, Some(delta), segments, Vec::new());
    p.c1 = Some(c1);
    p.c2 = Some(c2);
    // u_s falls along the arc, so its largest value is at the first junction.
    let peak = ControlLaw::Singular { c1, c2 }.eval(tau1);
    p.metadata.singular_arc_within_bound = Some(peak <= delta * (1.0 + 1e-12));
    Ok((p, traj))
}

fn bang(kind: SegmentKind, start: f64, end: f64, value: f64) -> ControlSegment {
    ControlSegment {
        kind,
        start,
        end,
        law: ControlLaw::Constant { value },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Control;
    use crate::ermakov::ermakov_residual;
    use proptest::prelude::*;

    #[test]
    fn bracket_top_is_usable_when_it_nearly_meets_c1_max() {
        for (g, d) in [(13.969883100337983, 1.0034058543566755), (17.31404672599368, 1.0031970814460232)] {
            let hi = c1_upper(g, d);
            assert!(bsb_interval_times(hi, g, d).is_ok());
            let tau_min = bangbang_times(g, d).unwrap().total();
            let tau = tau_min * 1.0001;
            let back = bsb_interval_times(solve_c1(tau, g, d).unwrap(), g, d).unwrap().total();
            assert!((back - tau).abs() < 1e-9 * tau);
        }
    }

    #[test]
    fn first_bang_vanishes_as_c1_goes_to_zero() {
        let t = bsb_interval_times(1e-9, 10.0, 1.0).unwrap();
        assert!(t.tau1 < 1e-6, "{}", t.tau1);
    }

    #[test]
    fn upper_bracket_reproduces_bang_bang() {
        for &(g, d) in &[(10.0, 1.0), (10.0, 3.0), (4.0, 1.7)] {
            let c = c1_upper(g, d);
            let t = bsb_interval_times(c, g, d).unwrap();
            let bb = bangbang_times(g, d).unwrap();
            assert!(t.tau2.abs() < 1e-7, "γ={g} δ={d}: τ₂ = {}", t.tau2);
            assert!((t.total() - bb.total()).abs() < 1e-7);
            assert!((t.tau1 - bb.tau1).abs() < 1e-6);
        }
    }

    #[test]
    fn beyond_c1_max_is_rejected() {
        let top = c1_max(10.0, 1.0);
        assert!(matches!(
            bsb_junctions(top * 1.01, 10.0, 1.0),
            Err(Error::C1TooLarge { .. })
        ));
    }

    #[test]
    fn below_tau_min_is_infeasible() {
        assert!(matches!(
            solve_c1(3.0, 10.0, 1.0),
            Err(Error::InfeasibleDuration { .. })
        ));
    }

    #[test]
    fn very_long_durations_are_unsupported() {
        assert!(matches!(
            solve_c1(1e9, 10.0, 1.0),
            Err(Error::UnsupportedDuration { .. })
        ));
    }

    #[test]
    fn solved_c1_hits_duration() {
        for &tau_f in &[3.1, 4.0, 7.854, 50.0, 1000.0] {
            let c = solve_c1(tau_f, 10.0, 1.0).unwrap();
            let t = bsb_interval_times(c, 10.0, 1.0).unwrap().total();
            assert!((t - tau_f).abs() < 1e-10 * tau_f);
        }
    }

    #[test]
    fn long_protocols_approach_the_unconstrained_ramp() {
        let tau_f = 1000.0;
        let c = solve_c1(tau_f, 10.0, 1.0).unwrap();
        let ramp = (100.0 - 1.0) / (2.0 * tau_f);
        assert!((c / ramp - 1.0).abs() < 1e-2, "{c} vs {ramp}");
    }

    #[test]
    fn protocol_is_continuous_and_solves_ermakov() {
        for &(tau_f, g, d) in &[(7.854, 10.0, 1.0), (5.0, 10.0, 2.0), (20.0, 3.0, 1.0)] {
            let (p, traj) = bsb_protocol(tau_f, g, d).unwrap();
            p.check_tiling().unwrap();
            let (db, dbdot) = traj.continuity_defect();
            assert!(db < 1e-9 && dbdot < 1e-9, "{db} {dbdot}");
            let end = traj.eval(tau_f);
            assert!((end.b - g).abs() < 1e-9 && end.bdot.abs() < 1e-9);
            assert!(ermakov_residual(&traj, &p) < 1e-8);
            assert_eq!(p.metadata.singular_arc_within_bound, Some(true));
            assert!(!p.exceeds_bound(d));
        }
    }

    #[test]
    fn weak_bound_makes_the_arc_inadmissible() {
        let (p, _) = bsb_protocol(5.0, 2.0, 0.5).unwrap();
        assert_eq!(p.metadata.singular_arc_within_bound, Some(false));
    }

    #[test]
    fn exact_minimum_duration_degenerates_to_bang_bang() {
        let bb = bangbang_times(10.0, 1.0).unwrap();
        let (p, traj) = bsb_protocol(bb.total(), 10.0, 1.0).unwrap();
        assert_eq!(p.segments[1].start, p.segments[1].end);
        assert_eq!(p.value(1.0), -1.0);
        assert_eq!(p.value(3.0), 1.0);
        assert!(traj.continuity_defect().0 < 1e-9);
    }

    #[test]
    fn singular_control_at_static_traps() {
        assert_eq!(singular_control(1.0, 0.0).unwrap(), 1.0);
        assert!((singular_control(10.0, 0.0).unwrap() - 1e-4).abs() < 1e-18);
        assert!(singular_control(0.0, 1.0).is_err());
    }

    #[test]
    fn identity_is_a_static_singular_arc() {
        let (p, traj) = bsb_protocol(4.0, 1.0, 1.0).unwrap();
        assert_eq!(p.value(2.0), 1.0);
        assert_eq!(traj.eval(3.0).b, 1.0);
    }

    proptest! {
        #[test]
        fn duration_decreases_with_c1(g in 1.5f64..20.0, d in 1.0f64..4.0, s in 0.01f64..0.98) {
            let hi = c1_upper(g, d);
            let c = hi * s;
            let a = bsb_interval_times(c, g, d).unwrap().total();
            let b = bsb_interval_times(c * 1.01, g, d).unwrap().total();
            prop_assert!(b < a);
        }

        #[test]
        fn singular_control_decreases_along_arc(c1 in 0.01f64..50.0, c2 in 0.5f64..5.0, t in 0.0f64..5.0) {
            let on_arc = |tau: f64| {
                let x1 = (2.0 * c1 * tau + c2).sqrt();
                singular_control(x1, c1 / x1).unwrap()
            };
            let law = ControlLaw::Singular { c1, c2 };
            prop_assert!(((on_arc(t) - law.eval(t)) / law.eval(t)).abs() < 1e-12);
            prop_assert!(on_arc(t + 0.1) < on_arc(t));
        }
    }
}
