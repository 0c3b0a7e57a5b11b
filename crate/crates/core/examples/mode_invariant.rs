//! In a harmonic trap the evolved ground state stays an instantaneous
//! eigenstate of the Lewis-Riesenfeld invariant along the whole protocol.

use sta_expansion::ermakov::lewis_phase;
use sta_expansion::modes::{invariant_expectation, mode_wavefunction};
use sta_expansion::tdse::{evolve_observed, overlap_fidelity, stationary_state, PotentialModel, SimConfig};
use sta_expansion::{design, Family};

fn main() -> sta_expansion::Result<()> {
    let gamma = 4.0;
    let (p, traj) = design(Family::Polynomial, Some(6.0), gamma, 1.0)?;
    let cfg = SimConfig::for_expansion(PotentialModel::Harmonic, gamma, 0.0)?;
    let psi0 = stationary_state(&cfg.grid, 1.0, 0)?;
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    let (psi, _) = evolve_observed(&psi0, &p, &cfg, 0.0, |tau, psi| {
        count += 1;
        if count % 500 == 0 {
            let k = traj.eval(tau);
            if let Ok(i) = invariant_expectation(psi, k.b, k.bdot) {
                worst = worst.max((i - 0.5).abs());
            }
        }
    })?;
    let end = traj.eval(p.tau_f);
    let mode = mode_wavefunction(0, end.b, end.bdot, lewis_phase(&traj, p.tau_f), &cfg.grid)?;
    let overlap = overlap_fidelity(&psi, &mode)?;
    println!("largest |<I> - 1/2| along the way: {worst:.2e}");
    println!("overlap with the scaled mode at the end: {overlap:.12}");
    Ok(())
}
