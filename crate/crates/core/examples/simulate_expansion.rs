//! Solve the Schrödinger equation for a bang-singular-bang expansion in the
//! anharmonic trap and compare the result with the bound.

use sta_expansion::config::RunConfig;
use sta_expansion::fidelity::fidelity_bound;
use sta_expansion::tdse::transfer_fidelity;
use sta_expansion::{design, Family};

fn main() -> sta_expansion::Result<()> {
    let cfg = RunConfig::default();
    let r = cfg.resolve()?;
    let (gamma, w) = (r.trap.gamma, r.trap.w_tilde);
    let sim = cfg.sim_config(gamma, w)?;
    for family in [Family::BangBang, Family::BangSingularBang] {
        let tau = if family == Family::BangBang { None } else { Some(0.5e-3 * r.trap.tau_per_second) };
        let (p, traj) = design(family, tau, gamma, r.delta)?;
        let (f, diag) = transfer_fidelity(&p, 0, &sim, w)?;
        println!(
            "{family:>8}: tau_f = {:.4}  F = {f:.6}  F_b = {:.6}  steps = {}  edge = {:.1e}",
            p.tau_f,
            fidelity_bound(&traj, w, 0, p.tau_f),
            diag.steps,
            diag.max_edge_probability
        );
    }
    Ok(())
}
