//! Minimum-time bang-bang expansion of the default trap.

use sta_expansion::config::RunConfig;
use sta_expansion::protocol::{bangbang_protocol, bangbang_times};

fn main() -> sta_expansion::Result<()> {
    let r = RunConfig::default().resolve()?;
    let gamma = r.trap.gamma;
    let times = bangbang_times(gamma, r.delta)?;
    let (protocol, traj) = bangbang_protocol(gamma, r.delta)?;
    let seconds = protocol.tau_f / r.trap.tau_per_second;
    println!("gamma = {gamma}, delta = {}", r.delta);
    println!("tau_min = {:.6} ({:.3} ms)", protocol.tau_f, seconds * 1e3);
    println!("first bang {:.6}, second bang {:.6}", times.tau1, times.tau2);
    for s in &protocol.segments {
        println!("  {:?} on [{:.6}, {:.6}]", s.kind, s.start, s.end);
    }
    let end = traj.eval(protocol.tau_f);
    println!("b(tau_f) = {:.12}, b'(tau_f) = {:.3e}", end.b, end.bdot);
    Ok(())
}
