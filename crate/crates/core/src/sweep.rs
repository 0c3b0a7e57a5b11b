//! Parameter sweeps over duration or waist.
//!
//! Points are evaluated in parallel but rows are always written sorted by
//! (point index, family), so output does not depend on the thread count.
//! An existing sweep file in the output directory is read back and its rows
//! are kept, which makes interrupted sweeps resumable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{write_file, CommandOutput, OutputFormat};
use crate::config::{RunConfig, SweepAxis, SweepConfig};
use crate::error::{Error, Result};
use crate::fidelity::{avg_perturbation_energy, fidelity_bound};
use crate::protocol::{design, Family};
use crate::tdse::transfer_fidelity;
use crate::units::to_dimensionless;

pub const SWEEP_HEADER: &str = "index,axis,value,family,tau_f,w_tilde,F_b,F_exact,V1_avg,status";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis: SweepAxis,
    pub value: f64,
    pub family: Family,
    pub tau_f: Option<f64>,
    pub w_tilde: Option<f64>,
    pub f_b: Option<f64>,
    pub f_exact: Option<f64>,
    pub v1_avg: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn key(&self) -> (usize, Family) {
        (self.index, self.family)
    }

    fn csv_line(&self) -> String {
        let o = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let axis = match self.axis {
            SweepAxis::Duration => "t_f",
            SweepAxis::Waist => "waist",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.index,
            axis,
            self.value,
            self.family,
            o(self.tau_f),
            o(self.w_tilde),
            o(self.f_b),
            o(self.f_exact),
            o(self.v1_avg),
            self.status
        )
    }

    fn parse(line: &str) -> Result<SweepRow> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(Error::Config(format!("malformed sweep row `{line}`")));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| Error::Config(format!("bad number `{s}` in sweep row")))
            }
        };
        let axis = match f[1] {
            "t_f" => SweepAxis::Duration,
            "waist" => SweepAxis::Waist,
            other => return Err(Error::Config(format!("bad axis `{other}` in sweep row"))),
        };
        Ok(SweepRow {
            index: f[0].parse().map_err(|_| Error::Config(format!("bad index in `{line}`")))?,
            axis,
            value: num(f[2])?.unwrap_or(f64::NAN),
            family: f[3].parse()?,
            tau_f: num(f[4])?,
            w_tilde: num(f[5])?,
            f_b: num(f[6])?,
            f_exact: num(f[7])?,
            v1_avg: num(f[8])?,
            status: f[9].to_string(),
        })
    }
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.csv_line());
    }
    s
}

pub fn parse_rows_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SWEEP_HEADER => {}
        _ => return Err(Error::Config("existing sweep file has an unexpected header".into())),
    }
    lines.filter(|l| !l.trim().is_empty()).map(SweepRow::parse).collect()
}

/// Evaluates one (point, family) pair. Failures become a status, not an
/// error.
pub fn sweep_point(cfg: &RunConfig, sweep: &SweepConfig, index: usize, value: f64, family: Family) -> SweepRow {
    let mut row = SweepRow {
        index,
        axis: sweep.axis,
        value,
        family,
        tau_f: None,
        w_tilde: None,
        f_b: None,
        f_exact: None,
        v1_avg: None,
        status: "ok".into(),
    };
    if let Err(e) = fill_point(cfg, sweep, value, &mut row) {
        row.status = e.kind().to_string();
    }
    row
}

fn fill_point(cfg: &RunConfig, sweep: &SweepConfig, value: f64, row: &mut SweepRow) -> Result<()> {
    let (mut spec, _) = cfg.spec()?;
    let tau_f = match sweep.axis {
        SweepAxis::Duration => {
            if row.family == Family::BangBang {
                row.status = "fixed-duration".into();
                return Ok(());
            }
            Some(RunConfig::to_tau(value, sweep.units, &spec)?)
        }
        SweepAxis::Waist => {
            spec.waist = value;
            cfg.resolve()?.tau_f
        }
    };
    let trap = to_dimensionless(&spec)?;
    let (g, w) = (trap.gamma, trap.w_tilde);
    row.w_tilde = Some(w);
    let (p, traj) = design(row.family, tau_f, g, cfg.bound.delta)?;
    row.tau_f = Some(p.tau_f);
    let n = cfg.sim.quantum_number;
    row.f_b = Some(fidelity_bound(&traj, w, n, p.tau_f));
    row.v1_avg = Some(avg_perturbation_energy(&traj, &p, w, n, p.tau_f));
    if sweep.simulate {
        let sim = cfg.sim_config(g, w)?;
        row.f_exact = Some(transfer_fidelity(&p, n, &sim, w)?.0);
    }
    Ok(())
}

fn family_rank(f: Family) -> usize {
    Family::ALL.iter().position(|&x| x == f).unwrap_or(usize::MAX)
}

/// Runs the sweep, writing after every batch of points. `threads = 0`
/// uses all available cores.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path, format: OutputFormat, threads: usize) -> Result<CommandOutput> {
    let resolved = cfg.resolve()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep command needs a `sweep` section".into()))?;
    let csv_path = out.join("sweep.csv");
    let mut done: BTreeMap<(usize, usize), SweepRow> = BTreeMap::new();
    if csv_path.exists() {
        let text = fs::read_to_string(&csv_path).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
        for row in parse_rows_csv(&text)? {
            done.insert((row.index, family_rank(row.family)), row);
        }
    }
    let values = sweep.values();
    let mut pending = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        for &f in &sweep.families {
            if !done.contains_key(&(i, family_rank(f))) {
                pending.push((i, v, f));
            }
        }
    }
    let resumed = done.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let batch = pool.current_num_threads().max(1) * 2;
    let write = |done: &BTreeMap<(usize, usize), SweepRow>| -> Result<()> {
        let rows: Vec<SweepRow> = done.values().cloned().collect();
        write_file(out, "sweep.csv", &rows_csv(&rows))?;
        Ok(())
    };
    for chunk in pending.chunks(batch) {
        let rows: Vec<SweepRow> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(i, v, f)| sweep_point(cfg, sweep, i, v, f))
                .collect()
        });
        for row in rows {
            let k = row.key();
            done.insert((k.0, family_rank(k.1)), row);
        }
        write(&done)?;
    }
    if pending.is_empty() {
        write(&done)?;
    }

    let rows: Vec<SweepRow> = done.into_values().collect();
    let mut files = vec![csv_path];
    if format == OutputFormat::Json {
        files.push(write_file(out, "sweep.json", &(serde_json::to_string_pretty(&rows)? + "\n"))?);
    }
    let mut notices = resolved.notices;
    if resumed > 0 {
        notices.push(format!("resumed: kept {resumed} existing rows"));
    }
    let failed = rows.iter().filter(|r| r.status != "ok" && r.status != "fixed-duration").count();
    if failed > 0 {
        notices.push(format!("{failed} sweep points did not complete; see the status column"));
    }
    Ok(CommandOutput {
        files,
        notices,
        failures: Vec::new(),
    })
}
