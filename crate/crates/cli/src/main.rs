#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use detumble::exec::Execution;
use detumble::sim::{
    emit_series, field_compare, rank_sweep_for, run_suite, write_field_comparison, write_rank_sweep, ControllerKind,
    RunConfig, TruthModel,
};
use detumble::Error;
use nalgebra::Vector3;

/// Single-axis magnetorquer detumbling simulations.
#[derive(Debug, Parser)]
#[command(name = "detumble", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one case.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Simulate every *.toml in a directory, or a list of configs.
    Suite {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Dipole vs IGRF field over one orbit.
    FieldCompare {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Controllability rank along one orbit.
    RankSweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Field model for the analyzer.
        #[arg(long, value_enum)]
        truth_model: Option<TruthArg>,
    },
}

#[derive(Debug, Args)]
struct RunOpts {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    #[arg(long, value_enum)]
    truth_model: Option<TruthArg>,
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,
    #[arg(long)]
    max_minutes: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TruthArg {
    Igrf,
    Dipole,
}

impl From<TruthArg> for TruthModel {
    fn from(t: TruthArg) -> Self {
        match t {
            TruthArg::Igrf => TruthModel::Igrf,
            TruthArg::Dipole => TruthModel::Dipole,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ControllerArg {
    Bdot,
    Nmpc,
    None,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Bdot => ControllerKind::Bdot,
            ControllerArg::Nmpc => ControllerKind::Nmpc,
            ControllerArg::None => ControllerKind::None,
        }
    }
}

/// Exit status: usage/config problems vs failures while running.
enum Failure {
    Usage(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Run(_) => 2,
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn run_err(e: Error) -> Failure {
    Failure::Run(e.to_string())
}

fn load(path: &Path, opts: Option<&RunOpts>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path).map_err(usage)?;
    if let Some(o) = opts {
        if let Some(t) = o.truth_model {
            cfg.truth_model = t.into();
        }
        if let Some(c) = o.controller {
            cfg.controller = c.into();
        }
        if let Some(m) = o.max_minutes {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Failure::Usage(format!("--max-minutes must be non-negative, got {m}")));
            }
            cfg.max_duration = m * 60.0;
        }
        cfg.validate().map_err(usage)?;
    }
    Ok(cfg)
}

fn collect_configs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    if let [dir] = inputs {
        if dir.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            files.sort();
            if files.is_empty() {
                return Err(Failure::Usage(format!("no .toml configs in {}", dir.display())));
            }
            return Ok(files);
        }
    }
    Ok(inputs.to_vec())
}

fn simulate(paths: &[PathBuf], opts: &RunOpts) -> Result<(), Failure> {
    let configs = paths
        .iter()
        .map(|p| load(p, Some(opts)))
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_suite(&configs, Execution::default()).map_err(usage)?;
    print!("{}", report.summary_table());
    for entry in &report.entries {
        match &entry.result {
            Ok(r) => {
                let files = emit_series(r, &opts.out, opts.plot).map_err(run_err)?;
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            Err(e) => eprintln!("{}: {e}", entry.name),
        }
    }
    let summary = opts.out.join("summary.txt");
    std::fs::write(&summary, report.summary_table())
        .map_err(|e| Failure::Run(format!("{}: {e}", summary.display())))?;
    if report.exit_code() != 0 {
        return Err(Failure::Run("one or more runs failed".into()));
    }
    Ok(())
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, opts } => simulate(&[config], &opts),
        Command::Suite { configs, opts } => simulate(&collect_configs(&configs)?, &opts),
        Command::FieldCompare { config, out } => {
            let cfg = load(&config, None)?;
            let rows = field_compare(&cfg, Execution::default()).map_err(usage)?;
            create_out(&out)?;
            let path = out.join(format!("{}_field_compare.csv", cfg.name));
            write_field_comparison(&rows, &path).map_err(run_err)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::RankSweep {
            config,
            out,
            truth_model,
        } => {
            let mut cfg = load(&config, None)?;
            if let Some(t) = truth_model {
                cfg.rank.field_model = t.into();
            }
            create_out(&out)?;
            for (tag, omega) in [("rest", Vector3::zeros()), ("initial", cfg.initial_omega())] {
                let report = rank_sweep_for(&cfg, &omega, Execution::default()).map_err(run_err)?;
                let path = out.join(format!("{}_rank_{tag}.csv", cfg.name));
                write_rank_sweep(&report, &path).map_err(run_err)?;
                println!(
                    "{tag}: samples {} min rank {} max rank {} deficient {} min sigma3/sigma1 {:.3e}{}",
                    report.samples.len(),
                    report.min_rank,
                    report.max_rank,
                    report.deficient.len(),
                    report.min_sigma3_relative,
                    if report.g3_vanishes {
                        " (g3 vanishes along the orbit)"
                    } else {
                        ""
                    }
                );
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Run(m) => eprintln!("run failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
