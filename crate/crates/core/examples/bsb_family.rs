//! How the bang-singular-bang protocol changes with the allotted duration.

use sta_expansion::protocol::{bangbang_times, bsb_protocol};

fn main() -> sta_expansion::Result<()> {
    let (gamma, delta) = (10.0, 1.0);
    let tau_min = bangbang_times(gamma, delta)?.total();
    println!("{:>10} {:>12} {:>12} {:>12}", "tau_f", "c1", "first bang", "last bang");
    for stretch in [1.0, 1.05, 1.25, 1.6, 2.5, 5.0, 10.0] {
        let tau = stretch * tau_min;
        let (p, _) = bsb_protocol(tau, gamma, delta)?;
        let first = p.segments.first().map(|s| s.end - s.start).unwrap_or(0.0);
        let last = p.segments.last().map(|s| s.end - s.start).unwrap_or(0.0);
        println!("{tau:>10.4} {:>12.6} {first:>12.6} {last:>12.6}", p.c1.unwrap_or(f64::NAN));
    }
    Ok(())
}
