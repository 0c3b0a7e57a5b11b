//! The work behind each subcommand, independent of argument parsing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{Resolved, RunConfig};
use crate::error::{Error, Result};
use crate::fidelity::{f_el_bound, FidelityReport};
use crate::protocol::{bangbang_times, design, trajectory_csv, Family, Protocol};
use crate::tdse::{convergence_check, transfer_fidelity, ConvergenceReport, PotentialModel, SimDiagnostics};

pub const CONTROL_SAMPLES: usize = 2001;
pub const TRAJECTORY_SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Files written by a command plus anything worth telling the user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub notices: Vec<String>,
    /// Non-empty means the command should exit non-zero.
    pub failures: Vec<String>,
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Machine-readable description of an error for standard error.
pub fn error_json(err: &Error) -> serde_json::Value {
    let mut v = json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    });
    match err {
        Error::InfeasibleDuration { tau_f, tau_min } => {
            v["tau_f"] = json!(tau_f);
            v["tau_min"] = json!(tau_min);
        }
        Error::UnsupportedDuration { tau_f, tau_max } => {
            v["tau_f"] = json!(tau_f);
            v["tau_max"] = json!(tau_max);
        }
        Error::InfeasibleParameters { argument, .. } => v["argument"] = json!(argument),
        Error::Leak { tau, probability, .. } => {
            v["tau"] = json!(tau);
            v["probability"] = json!(probability);
        }
        _ => {}
    }
    v
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub struct Design {
    pub protocol: Protocol,
    pub protocol_json: String,
    pub control_csv: String,
    pub trajectory_csv: String,
}

pub fn design_from(r: &Resolved) -> Result<Design> {
    let (protocol, traj) = design(r.family, r.tau_f, r.trap.gamma, r.delta)?;
    Ok(Design {
        protocol_json: protocol.to_json() + "\n",
        control_csv: protocol.control_csv(CONTROL_SAMPLES),
        trajectory_csv: trajectory_csv(&traj, &protocol, TRAJECTORY_SAMPLES),
        protocol,
    })
}

/// protocol.json, control.csv and trajectory.csv.
pub fn cmd_design(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let d = design_from(&r)?;
    Ok(CommandOutput {
        files: vec![
            write_file(out, "protocol.json", &d.protocol_json)?,
            write_file(out, "control.csv", &d.control_csv)?,
            write_file(out, "trajectory.csv", &d.trajectory_csv)?,
        ],
        notices: r.notices,
        failures: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub family: Family,
    pub tau_f: Option<f64>,
    pub gamma: f64,
    pub w_tilde: f64,
    pub lambda_tilde: f64,
    pub f_b: Option<f64>,
    pub f_el: Option<f64>,
    pub v1_avg: Option<f64>,
    pub status: String,
}

/// F_b and V̄₁ for every family at the configured duration; bang-bang always
/// runs at its minimum time.
pub fn bound_rows(r: &Resolved) -> Vec<BoundRow> {
    let (g, w) = (r.trap.gamma, r.trap.w_tilde);
    Family::ALL
        .iter()
        .map(|&family| {
            let mut row = BoundRow {
                family,
                tau_f: None,
                gamma: g,
                w_tilde: w,
                lambda_tilde: crate::fidelity::lambda_tilde(0, w),
                f_b: None,
                f_el: None,
                v1_avg: None,
                status: "ok".into(),
            };
            let built = design(family, r.tau_f, g, r.delta).and_then(|(p, traj)| {
                let rep = FidelityReport::compute(&traj, &p, g, w, 0, family == Family::Unconstrained)?;
                Ok((p, rep))
            });
            match built {
                Ok((p, rep)) => {
                    row.tau_f = Some(p.tau_f);
                    row.f_b = Some(rep.f_b);
                    row.v1_avg = Some(rep.v1_avg);
                    if family == Family::Unconstrained {
                        row.f_el = Some(f_el_bound(p.tau_f, g, w));
                    }
                }
                Err(e) => {
                    row.tau_f = r.tau_f;
                    row.status = e.kind().to_string();
                }
            }
            row
        })
        .collect()
}

pub fn bound_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("family,tau_f,gamma,w_tilde,lambda_tilde,F_b,F_EL,V1_avg,status\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.family,
            opt(r.tau_f),
            r.gamma,
            r.w_tilde,
            r.lambda_tilde,
            opt(r.f_b),
            opt(r.f_el),
            opt(r.v1_avg),
            r.status
        );
    }
    s
}

/// report.csv (or report.json).
pub fn cmd_bound(cfg: &RunConfig, out: &Path, format: OutputFormat) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let rows = bound_rows(&r);
    let file = match format {
        OutputFormat::Csv => write_file(out, "report.csv", &bound_csv(&rows))?,
        OutputFormat::Json => write_file(out, "report.json", &(serde_json::to_string_pretty(&rows)? + "\n"))?,
    };
    Ok(CommandOutput {
        files: vec![file],
        notices: r.notices,
        failures: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub family: Family,
    pub model: PotentialModel,
    pub gamma: f64,
    pub delta: Option<f64>,
    pub w_tilde: f64,
    pub tau_f: f64,
    pub n: usize,
    pub f_exact: f64,
    pub f_b: f64,
    pub f_second_order: f64,
    pub perturbation_breakdown: bool,
    pub f_el: Option<f64>,
    pub v1_avg: f64,
    pub max_abs_control: f64,
    pub diagnostics: SimDiagnostics,
    pub convergence: Option<ConvergenceReport>,
}

pub fn simulate_resolved(cfg: &RunConfig, r: &Resolved) -> Result<SimulationReport> {
    let (g, w) = (r.trap.gamma, r.trap.w_tilde);
    let (p, traj) = design(r.family, r.tau_f, g, r.delta)?;
    let n = cfg.sim.quantum_number;
    let sim = cfg.sim_config(g, w)?;
    let rep = FidelityReport::compute(&traj, &p, g, w, n, r.family == Family::Unconstrained)?;
    let (f_exact, diagnostics) = transfer_fidelity(&p, n, &sim, w)?;
    let convergence = if cfg.sim.check_convergence {
        Some(convergence_check(&p, n, &sim, w)?)
    } else {
        None
    };
    Ok(SimulationReport {
        family: r.family,
        model: sim.model,
        gamma: g,
        delta: p.delta,
        w_tilde: w,
        tau_f: p.tau_f,
        n,
        f_exact,
        f_b: rep.f_b,
        f_second_order: rep.f_second_order,
        perturbation_breakdown: rep.perturbation_breakdown,
        f_el: rep.f_el,
        v1_avg: rep.v1_avg,
        max_abs_control: p.max_abs_control(),
        diagnostics,
        convergence,
    })
}

/// fidelity.json.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let r = cfg.resolve()?;
    let report = simulate_resolved(cfg, &r)?;
    let mut notices = r.notices;
    if report.perturbation_breakdown {
        notices.push("WARNING: perturbation sum exceeded 1; second-order fidelity clamped to 0".into());
    }
    if let Some(c) = &report.convergence {
        if !c.converged {
            notices.push(format!(
                "WARNING: simulation not converged (dt delta {:.2e}, grid delta {:.2e})",
                c.dt_delta, c.grid_delta
            ));
        }
    }
    Ok(CommandOutput {
        files: vec![write_file(out, "fidelity.json", &(serde_json::to_string_pretty(&report)? + "\n"))?],
        notices,
        failures: Vec::new(),
    })
}

/// τ_min for the configured trap, for messages.
pub fn minimum_time(r: &Resolved) -> Result<f64> {
    Ok(bangbang_times(r.trap.gamma, r.delta)?.total())
}
