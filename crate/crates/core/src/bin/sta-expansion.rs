use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sta_expansion::commands::{cmd_bound, cmd_design, cmd_simulate, error_json, CommandOutput, OutputFormat};
use sta_expansion::config::{RunConfig, TimeUnits};
use sta_expansion::sweep::cmd_sweep;
use sta_expansion::tdse::PotentialModel;
use sta_expansion::validation::cmd_validate;
use sta_expansion::{Error, Family, Result};

#[derive(Parser)]
#[command(name = "sta-expansion", version, about = "Fast expansions of atoms in Gaussian optical traps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a protocol and write protocol.json, control.csv, trajectory.csv.
    Design(Common),
    /// Fidelity bounds for every family.
    Bound(Common),
    /// Run the Schrödinger solver on the configured protocol.
    Simulate(Common),
    /// Evaluate families over a range of durations or waists.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Run the invariant suite.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also check the segment tiling of this protocol file.
        #[arg(long)]
        protocol: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    Seconds,
    Dimensionless,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; built-in defaults if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    tau_f: Option<f64>,
    /// Units of --tau-f.
    #[arg(long, value_enum)]
    units: Option<Units>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    model: Option<PotentialModel>,
    #[arg(long)]
    dt: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(f) = self.family {
            cfg.protocol.family = f;
        }
        if let Some(t) = self.tau_f {
            cfg.protocol.tau_f = Some(t);
            if self.units.is_none() {
                return Err(Error::Config("--tau-f needs --units seconds|dimensionless".into()));
            }
        }
        if let Some(u) = self.units {
            cfg.protocol.units = Some(match u {
                Units::Seconds => TimeUnits::Seconds,
                Units::Dimensionless => TimeUnits::Dimensionless,
            });
        }
        if let Some(d) = self.delta {
            cfg.bound.delta = d;
        }
        if let Some(m) = self.model {
            cfg.sim.model = m;
        }
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
        }
        Ok(cfg)
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn run(command: &Command) -> Result<CommandOutput> {
    match command {
        Command::Design(c) => cmd_design(&c.load()?, &c.out),
        Command::Bound(c) => cmd_bound(&c.load()?, &c.out, c.format()),
        Command::Simulate(c) => cmd_simulate(&c.load()?, &c.out),
        Command::Sweep { common, threads } => cmd_sweep(&common.load()?, &common.out, common.format(), *threads),
        Command::Validate { common, protocol } => cmd_validate(&common.load()?, &common.out, protocol.as_deref()),
    }
}

fn out_dir(command: &Command) -> &Path {
    match command {
        Command::Design(c) | Command::Bound(c) | Command::Simulate(c) => &c.out,
        Command::Sweep { common, .. } | Command::Validate { common, .. } => &common.out,
    }
}

fn write_log(dir: &Path, status: &str) {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let args: Vec<String> = std::env::args().collect();
    let line = format!("unix_time={secs} status={status} args={:?}\n", args);
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("run.log"), line);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = out_dir(&cli.command).to_path_buf();
    match run(&cli.command) {
        Ok(out) => {
            for n in &out.notices {
                eprintln!("{n}");
            }
            for f in &out.files {
                println!("{}", f.display());
            }
            if out.failures.is_empty() {
                write_log(&dir, "ok");
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", out.failures.join(", "));
                write_log(&dir, "failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            write_log(&dir, e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
