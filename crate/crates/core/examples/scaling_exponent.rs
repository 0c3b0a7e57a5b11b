//! Log-log slope of the time-averaged anharmonic energy against duration.

use sta_expansion::fidelity::avg_perturbation_energy;
use sta_expansion::{design, Family};

fn slope(family: Family, lo: f64, hi: f64) -> sta_expansion::Result<f64> {
    let (gamma, w) = (10.0, 98.3426);
    let pts = 16;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..pts {
        let tau = lo * (hi / lo).powf(k as f64 / (pts - 1) as f64);
        let (p, traj) = design(family, Some(tau), gamma, 1.0)?;
        let (x, y) = (tau.ln(), avg_perturbation_energy(&traj, &p, w, 0, tau).ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let n = pts as f64;
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

fn main() -> sta_expansion::Result<()> {
    for (lo, hi) in [(0.3, 2.0), (5.0, 20.0), (50.0, 200.0), (500.0, 2000.0), (4.7, 31.4), (785.0, 3140.0)] {
        let u = slope(Family::Unconstrained, lo, hi)?;
        let line = match slope(Family::BangSingularBang, lo, hi) {
            Ok(b) => format!("bsb {b:+.3}"),
            Err(e) => format!("bsb unavailable ({})", e.kind()),
        };
        println!("tau in [{lo}, {hi}]: unconstrained {u:+.3}, {line}");
    }
    Ok(())
}
