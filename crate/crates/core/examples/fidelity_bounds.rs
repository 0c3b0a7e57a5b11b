//! Lower bounds on the transfer fidelity for every family at one duration.

use sta_expansion::config::RunConfig;
use sta_expansion::fidelity::FidelityReport;
use sta_expansion::{design, Family};

fn main() -> sta_expansion::Result<()> {
    let r = RunConfig::default().resolve()?;
    let (gamma, w) = (r.trap.gamma, r.trap.w_tilde);
    let tau = 0.5e-3 * r.trap.tau_per_second;
    println!("tau_f = {tau:.4}, w_tilde = {w:.4}");
    for family in Family::ALL {
        let (p, traj) = design(family, Some(tau), gamma, r.delta)?;
        for n in [0, 1, 2] {
            let rep = FidelityReport::compute(&traj, &p, gamma, w, n, family == Family::Unconstrained)?;
            println!(
                "{family:>14} n={n}  F_b = {:.6}  second order = {:.6}  mean V1 = {:.3e}",
                rep.f_b, rep.f_second_order, rep.v1_avg
            );
        }
    }
    Ok(())
}
