//! Bounds against trap waist at a fixed 0.5 ms duration, without simulation.

use sta_expansion::config::{RunConfig, SweepAxis, SweepConfig, SweepScale, TimeUnits};
use sta_expansion::sweep::{rows_csv, sweep_point};
use sta_expansion::Family;

fn main() -> sta_expansion::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.protocol.tau_f = Some(0.5e-3);
    cfg.protocol.units = Some(TimeUnits::Seconds);
    let sweep = SweepConfig {
        axis: SweepAxis::Waist,
        start: 1.908e-5,
        stop: 4.24e-5,
        points: 6,
        scale: SweepScale::Linear,
        units: None,
        families: Family::ALL.to_vec(),
        simulate: false,
    };
    let mut rows = Vec::new();
    for i in 0..sweep.points {
        let waist = sweep.start + (sweep.stop - sweep.start) * i as f64 / (sweep.points - 1) as f64;
        for &family in &sweep.families {
            rows.push(sweep_point(&cfg, &sweep, i, waist, family));
        }
    }
    print!("{}", rows_csv(&rows));
    Ok(())
}
