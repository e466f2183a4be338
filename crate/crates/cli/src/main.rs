//! `specwave`: run damped-wave experiments from a JSON config.
//!
//! Exit status is 0 when every criterion of the invoked experiment passes,
//! 2 for configuration errors and 3 when a criterion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use specwave::config::ExperimentConfig;
use specwave::evolution::EvolutionTrace;
use specwave::experiments::{self, Outcome};
use specwave::output::{report_json, snapshots_csv, trace_csv, write_text};
use specwave::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_CRITERION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "specwave", version, about = "Spectral experiments for abstract damped wave equations")]
struct Cli {
    /// JSON experiment config; defaults are used for absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set p=4 --set backend.modes=2048`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,

    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    /// Worker threads; results do not depend on this.
    #[arg(long, env = "SPECWAVE_THREADS", global = true)]
    threads: Option<usize>,

    /// Allow small-data runs outside the admissible exponent range.
    #[arg(long, global = true)]
    exploratory: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Kernel bound scans and a CSV table of D, ∂tD and the difference symbol.
    KernelScan,
    /// Exact linear flow at the configured times.
    Linear {
        /// Also write the sampled solution at every output time.
        #[arg(long)]
        snapshots: bool,
    },
    /// Heat flow of u0 + u1 at the configured times.
    Heat {
        #[arg(long)]
        snapshots: bool,
    },
    /// Semilinear evolution with the configured nonlinearity.
    Nonlinear {
        #[arg(long)]
        snapshots: bool,
    },
    /// Fitted linear decay rates against their predictions.
    VerifyMatsumura,
    /// Decay of the difference between the damped wave and heat flows.
    VerifyDiffusion,
    /// Sobolev, Gagliardo–Nirenberg and heat-semigroup ratio scans.
    CheckInequalities,
    /// Small-data run with weighted-norm and decay checks.
    Smalldata,
    /// Phase table over (p, q, ε, form).
    Sweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::KernelScan => "kernel-scan",
            Command::Linear { .. } => "linear",
            Command::Heat { .. } => "heat",
            Command::Nonlinear { .. } => "nonlinear",
            Command::VerifyMatsumura => "verify-matsumura",
            Command::VerifyDiffusion => "verify-diffusion",
            Command::CheckInequalities => "check-inequalities",
            Command::Smalldata => "smalldata",
            Command::Sweep => "sweep",
        }
    }
}

fn load_config(cli: &Cli) -> specwave::Result<ExperimentConfig> {
    let (cfg, _applied) = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path, &cli.overrides)?,
        None => ExperimentConfig::from_value(json!({}), &cli.overrides)?,
    };
    Ok(cfg)
}

struct Writer<'a> {
    dir: &'a Path,
}

impl Writer<'_> {
    fn put(&self, name: &str, text: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        write_text(&path, text)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn trace(&self, stem: &str, trace: &EvolutionTrace) -> anyhow::Result<()> {
        self.put(&format!("{stem}_trace.csv"), &trace_csv(trace)?)?;
        if !trace.snapshots.is_empty() {
            self.put(&format!("{stem}_snapshots.csv"), &snapshots_csv(trace)?)?;
        }
        Ok(())
    }

    fn outcome<R: serde::Serialize>(&self, stem: &str, out: &Outcome<R>) -> anyhow::Result<()> {
        self.put(&format!("{stem}.json"), &report_json(&out.report)?)?;
        for (name, trace) in &out.traces {
            self.trace(&format!("{stem}_{name}"), trace)?;
        }
        Ok(())
    }
}

/// Runs the command; `Ok(false)` means a criterion failed.
fn run(cli: &Cli, cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    let w = Writer { dir: &cli.out };
    w.put("config.json", &report_json(cfg)?)?;
    let seed = cli.seed;
    let passed = match cli.command {
        Command::KernelScan => {
            let report = experiments::run_kernel_scan(cfg)?;
            w.put("kernel_bounds.json", &report_json(&report)?)?;
            w.put("kernel_scan.csv", &experiments::kernel_table(cfg)?)?;
            println!(
                "sup|D| = {:.6}, sup|dtD| = {:.6}, difference constant {:.6}",
                report.sup_d.value, report.sup_dt_d.value, report.diff_constant
            );
            report.passed()
        }
        Command::Linear { snapshots } => {
            let trace = experiments::linear_trace(cfg, seed, snapshots)?;
            w.trace("linear", &trace)?;
            true
        }
        Command::Heat { snapshots } => {
            let trace = experiments::heat_trace(cfg, seed, snapshots)?;
            w.trace("heat", &trace)?;
            true
        }
        Command::Nonlinear { snapshots } => {
            let mut cfg = cfg.clone();
            if snapshots && cfg.snapshot_every.is_none() {
                cfg.snapshot_every = Some(specwave::evolution::DEFAULT_SNAPSHOT_STRIDE);
            }
            let trace = experiments::nonlinear_trace(&cfg, seed)?;
            if let Some(b) = trace.blowup {
                println!("numerical blow-up at t = {}", b.time);
            }
            w.trace("nonlinear", &trace)?;
            true
        }
        Command::VerifyMatsumura => {
            let out = experiments::verify_matsumura(cfg, seed)?;
            w.outcome("matsumura", &out)?;
            summarize(&out.report.criteria);
            out.report.passed
        }
        Command::VerifyDiffusion => {
            let out = experiments::verify_diffusion(cfg, seed)?;
            w.outcome("diffusion", &out)?;
            summarize(&out.report.criteria);
            out.report.passed
        }
        Command::CheckInequalities => {
            let report = experiments::run_inequalities(cfg, seed)?;
            w.put("inequalities.json", &report_json(&report)?)?;
            for r in &report.results {
                match &r.skipped {
                    Some(why) => println!("{:<22} skipped: {why}", r.inequality),
                    None => println!(
                        "{:<22} {} max ratio {:.6}, change across levels {:.2}%",
                        r.inequality,
                        if r.bounded { "PASS" } else { "FAIL" },
                        r.max_ratio,
                        100.0 * r.max_relative_change
                    ),
                }
            }
            report.passed()
        }
        Command::Smalldata => {
            let out = experiments::smalldata_global(cfg, seed, cli.exploratory)?;
            w.outcome("smalldata", &out)?;
            summarize(&out.report.criteria);
            out.report.passed
        }
        Command::Sweep => {
            let out = experiments::critical_sweep(cfg, seed)?;
            w.put("sweep.json", &report_json(&out.report)?)?;
            w.put("sweep_phase.csv", &out.report.phase_table()?)?;
            for pt in &out.report.points {
                println!("p={} q={} eps={} {:?}: {:?}", pt.p, pt.q, pt.eps, pt.form, pt.class);
            }
            out.report.passed
        }
    };
    Ok(passed)
}

fn summarize(criteria: &[experiments::Criterion]) {
    for c in criteria {
        println!("{:<12} {} {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
}

fn is_config_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::Config { .. } | Error::Parameter { .. } | Error::Construction(_) | Error::Domain { .. })
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    match run(&cli, &cfg).with_context(|| format!("{} failed", cli.command.name())) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: one or more criteria failed", cli.command.name());
            ExitCode::from(EXIT_CRITERION)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
