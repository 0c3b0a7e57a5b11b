//! The invariant suite behind `validate`: one pass/fail entry per property.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::commands::{write_file, CommandOutput};
use crate::config::RunConfig;
use crate::ermakov::{ermakov_residual, integrate_ermakov, OctState, ScalingTrajectory};
use crate::error::{Error, Result};
use crate::fidelity::{avg_perturbation_energy, fidelity_bound, hermite_alpha};
use crate::protocol::{bangbang_times, design, ControlLaw, Family, Protocol};
use crate::tdse::{transfer_fidelity, PotentialModel, SimConfig};
use crate::units::ControlBound;

pub const CLOSED_FORM_RESIDUAL: f64 = 1e-9;
pub const INTEGRATED_RESIDUAL: f64 = 1e-6;
pub const INTEGRATION_STEP: f64 = 2.5e-4;
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
pub const FIRST_INTEGRAL_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const ALPHA_TOLERANCE: f64 = 1e-12;
pub const TRANSITIONLESS_FIDELITY: f64 = 0.9999;
const ALPHA_MAX_N: usize = 8;
const ARC_SAMPLES: usize = 64;
const COMPARE_SAMPLES: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured quantity; its meaning depends on the check.
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            passed: value.is_finite() && value < tolerance,
            value,
            tolerance,
            detail: String::new(),
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Check {
        Check {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            tolerance: 0.0,
            detail: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub gamma: f64,
    pub delta: f64,
    pub w_tilde: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect()
    }
}

/// ∫ e^{−y²} y^{2k} dy = Γ(k + ½).
fn gaussian_moment(k: usize) -> f64 {
    let mut m = PI.sqrt();
    for j in 0..k {
        m *= (2 * j + 1) as f64 / 2.0;
    }
    m
}

/// Integer coefficients of the physicists' Hermite polynomial, lowest power
/// first.
fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 2.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, c) in prev.iter().enumerate() {
            next[j] -= 2.0 * k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// ∫ e^{−y²} H_n H_{n'} y⁴ dy from polynomial coefficients and moments.
pub fn alpha_by_moments(n: usize, nprime: usize) -> f64 {
    let a = hermite_coefficients(n);
    let b = hermite_coefficients(nprime);
    let mut acc = 0.0;
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            let p = i + j + 4;
            if p % 2 == 0 && *ca != 0.0 && *cb != 0.0 {
                acc += ca * cb * gaussian_moment(p / 2);
            }
        }
    }
    acc
}

fn alpha_checks() -> Vec<Check> {
    let mut worst_match: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    for n in 0..=ALPHA_MAX_N {
        for np in 0..=ALPHA_MAX_N {
            let got = hermite_alpha(n, np);
            let d = n.abs_diff(np);
            if d % 2 == 1 || d > 4 {
                worst_zero = worst_zero.max(got.abs());
            } else {
                let want = alpha_by_moments(n, np);
                worst_match = worst_match.max((got - want).abs() / want.abs().max(1.0));
            }
        }
    }
    vec![
        Check::below("alpha/gaussian-moments", worst_match, ALPHA_TOLERANCE),
        Check::below("alpha/selection-rule", worst_zero, f64::MIN_POSITIVE),
    ]
}

/// max over segments of the spread of the segment's conserved quantity,
/// relative to its size.
pub fn first_integral_spread(p: &Protocol, traj: &ScalingTrajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for seg in p.segments.iter().filter(|s| s.end > s.start) {
        let quantity = |tau: f64| -> Option<f64> {
            let k = traj.eval(tau);
            match seg.law {
                ControlLaw::Constant { value } => Some(k.bdot * k.bdot + value * k.b * k.b + 1.0 / (k.b * k.b)),
                ControlLaw::Singular { .. } => Some(k.b * k.bdot),
                ControlLaw::FromCurve { .. } if p.family == Family::Unconstrained => Some(k.b * k.bdot),
                ControlLaw::FromCurve { .. } => None,
            }
        };
        let h = (seg.end - seg.start) / (ARC_SAMPLES + 1) as f64;
        let values: Vec<f64> = (1..=ARC_SAMPLES)
            .filter_map(|i| quantity(seg.start + h * i as f64))
            .collect();
        if let Some(&first) = values.first() {
            let scale = first.abs().max(1.0);
            for v in values {
                worst = worst.max((v - first).abs() / scale);
            }
        }
    }
    worst
}

pub fn boundary_defect(traj: &ScalingTrajectory, gamma: f64) -> f64 {
    let tau_f = traj.tau_f();
    let start = traj.eval_on(0, 0.0);
    let end = traj.eval_on(traj.piece_count() - 1, tau_f);
    let mut d = (start.b - 1.0).abs().max((end.b - gamma).abs());
    if traj.flags.bdot {
        d = d.max(start.bdot.abs()).max(end.bdot.abs());
    }
    if traj.flags.bddot {
        d = d.max(start.bddot.abs()).max(end.bddot.abs());
    }
    d
}

/// Largest |b| difference between the closed form and an RK4 integration
/// of the same control.
pub fn integrated_deviation(p: &Protocol, traj: &ScalingTrajectory) -> Result<f64> {
    let tau_f = p.tau_f;
    if tau_f == 0.0 {
        return Ok(0.0);
    }
    let numeric = integrate_ermakov(p, OctState::new(1.0, 0.0)?, tau_f, INTEGRATION_STEP)?;
    let mut worst: f64 = 0.0;
    for k in 0..COMPARE_SAMPLES {
        let tau = tau_f * k as f64 / (COMPARE_SAMPLES - 1) as f64;
        worst = worst.max((numeric.eval(tau).b - traj.eval(tau).b).abs());
    }
    Ok(worst)
}

fn family_checks(family: Family, tau_f: Option<f64>, gamma: f64, delta: f64, w: f64) -> Vec<Check> {
    let tag = |what: &str| format!("{family}/{what}");
    let (p, traj) = match design(family, tau_f, gamma, delta) {
        Ok(v) => v,
        Err(e) => return vec![Check::failed(tag("design"), &e)],
    };
    let mut checks = vec![
        Check::below(tag("ermakov-residual"), ermakov_residual(&traj, &p), CLOSED_FORM_RESIDUAL),
        Check::below(tag("continuity"), {
            let (db, dbdot) = traj.continuity_defect();
            db.max(dbdot)
        }, CLOSED_FORM_RESIDUAL),
        Check::below(tag("boundary-conditions"), boundary_defect(&traj, gamma), BOUNDARY_TOLERANCE),
        Check::below(tag("first-integrals"), first_integral_spread(&p, &traj), FIRST_INTEGRAL_TOLERANCE),
    ];
    checks.push(match integrated_deviation(&p, &traj) {
        Ok(d) => Check::below(tag("integrated-trajectory"), d, INTEGRATED_RESIDUAL),
        Err(e) => Check::failed(tag("integrated-trajectory"), &e),
    });
    if let Err(e) = p.check_tiling() {
        checks.push(Check::failed(tag("tiling"), &e));
    } else {
        checks.push(Check::below(tag("tiling"), 0.0, f64::MIN_POSITIVE));
    }
    if p.tau_f > 0.0 {
        let f_b = fidelity_bound(&traj, w, 0, p.tau_f);
        let v1 = avg_perturbation_energy(&traj, &p, w, 0, p.tau_f);
        checks.push(Check::below(
            tag("bound-energy-identity"),
            (f_b - (1.0 - v1 * p.tau_f)).abs(),
            IDENTITY_TOLERANCE,
        ));
    }
    checks
}

fn transitionless_check(tau_f: f64, gamma: f64, w: f64, cfg: &RunConfig) -> Check {
    let name = "polynomial/harmonic-transitionless";
    let run = || -> Result<f64> {
        let (p, _) = design(Family::Polynomial, Some(tau_f), gamma, cfg.bound.delta)?;
        let base = SimConfig::for_expansion(PotentialModel::Harmonic, gamma, w)?;
        let sim = SimConfig::new(PotentialModel::Harmonic, cfg.sim.dt, base.grid, cfg.sim.leak_threshold)?;
        Ok(transfer_fidelity(&p, cfg.sim.quantum_number, &sim, w)?.0)
    };
    match run() {
        Ok(f) => Check {
            name: name.into(),
            passed: f >= TRANSITIONLESS_FIDELITY,
            value: f,
            tolerance: TRANSITIONLESS_FIDELITY,
            detail: "final fidelity must reach the tolerance".into(),
        },
        Err(e) => Check::failed(name, &e),
    }
}

/// Runs every check. Only an infeasible (δ, γ) pair is an error; everything
/// else is reported as a failed check.
pub fn validate(cfg: &RunConfig, protocol_json: Option<&str>) -> Result<ValidationReport> {
    let r = cfg.resolve()?;
    let (gamma, w) = (r.trap.gamma, r.trap.w_tilde);
    ControlBound::new(r.delta, gamma)?;
    let tau_min = bangbang_times(gamma, r.delta)?.total();
    let tau_f = r.tau_f.unwrap_or(2.0 * tau_min.max(1.0));

    let mut checks = Vec::new();
    for family in Family::ALL {
        checks.extend(family_checks(family, Some(tau_f), gamma, r.delta, w));
    }
    checks.extend(alpha_checks());
    checks.push(transitionless_check(tau_f, gamma, w, cfg));
    if let Some(text) = protocol_json {
        let name = "input-protocol/tiling";
        checks.push(match Protocol::from_json(text).and_then(|p| p.check_tiling()) {
            Ok(()) => Check::below(name, 0.0, f64::MIN_POSITIVE),
            Err(e) => Check::failed(name, &e),
        });
    }
    Ok(ValidationReport {
        gamma,
        delta: r.delta,
        w_tilde: w,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// validation.json; failing checks are listed in `failures`.
pub fn cmd_validate(cfg: &RunConfig, out: &Path, protocol: Option<&Path>) -> Result<CommandOutput> {
    let text = match protocol {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?),
        None => None,
    };
    let report = validate(cfg, text.as_deref())?;
    let file = write_file(out, "validation.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(CommandOutput {
        files: vec![file],
        notices: cfg.resolve()?.notices,
        failures: report.failures(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_coefficients_are_the_textbook_ones() {
        assert_eq!(hermite_coefficients(2), vec![-2.0, 0.0, 4.0]);
        assert_eq!(hermite_coefficients(3), vec![0.0, -12.0, 0.0, 8.0]);
    }

    #[test]
    fn moment_oracle_reproduces_known_alphas() {
        assert!((alpha_by_moments(0, 0) - 0.75 * PI.sqrt()).abs() < 1e-14);
        assert!((alpha_by_moments(0, 2) - 6.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn default_configuration_passes_every_check() {
        let report = validate(&RunConfig::default(), None).unwrap();
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:#?}");
        assert!(report.checks.len() > 20);
    }

    #[test]
    fn overlapping_protocol_fails_tiling() {
        let (mut p, _) = design(Family::BangBang, None, 10.0, 1.0).unwrap();
        p.segments[1].start -= 0.1;
        let report = validate(&RunConfig::default(), Some(&p.to_json())).unwrap();
        assert!(!report.passed);
        assert_eq!(report.failures(), vec!["input-protocol/tiling".to_string()]);
    }

    #[test]
    fn infeasible_bound_is_an_error() {
        let mut cfg = RunConfig::default();
        cfg.bound.delta = 1e-5;
        let err = validate(&cfg, None).unwrap_err();
        assert_eq!(err.kind(), "infeasible-parameters");
        assert_eq!(err.exit_code(), 2);
    }
}
