//! `ksbox` command line: `check`, `simulate`, `sweep`, `verify` and
//! `estimate-cs`.
//!
//! Exit codes: 0 ok, 1 configuration or input error, 2 geometric condition
//! fails, 3 smallness condition fails, 4 blowup, 5 a verification check
//! failed. `KS_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{Equation, RunConfig};
use crate::diagnostics::csv::{component_names, write_energy_csv};
use crate::diagnostics::{decay_fit, dissipation_ledger};
use crate::dump::save_dump;
use crate::dynamics::{simulate_observed, RunStatus, State};
use crate::error::{KsError, Result};
use crate::experiments::{run_sweep, write_sweep_csv, write_sweep_jsonl, SweepSpec};
use crate::geometry::{damping_margin, smallness_check, ConditionReport};
use crate::verify::{estimate_embedding_constant, run_suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_GEOMETRIC: i32 = 2;
pub const EXIT_SMALLNESS: i32 = 3;
pub const EXIT_BLOWUP: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "ksbox",
    version,
    about = "Kuramoto-Sivashinsky decay checks on box domains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `initial.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Only print machine-readable output.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the geometric and smallness conditions.
    Check,
    /// Run one simulation and write energies, decay report and final state.
    Simulate,
    /// Run the length x amplitude sweep of the `[sweep]` section.
    Sweep,
    /// Run the inequality verification suite.
    Verify,
    /// Estimate the sup-norm embedding constant.
    EstimateCs,
}

struct Ctx {
    cfg: RunConfig,
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn out_dir(&self, default: &str) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_CONFIG;
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("KS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("KS_THREADS must be a positive integer, got `{raw}`"))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    let path = cli.common.config.clone().ok_or_else(|| KsError::Config {
        path: "<args>".into(),
        message: "--config <path> is required".into(),
    })?;
    let cfg = RunConfig::load(&path)?;
    let ctx = Ctx {
        seed: cli.common.seed.unwrap_or(cfg.file.initial.seed),
        out: cli.common.out.clone().or_else(|| cfg.output_dir()),
        quiet: cli.common.quiet,
        cfg,
    };
    match cli.command {
        Command::Check => cmd_check(&ctx),
        Command::Simulate => cmd_simulate(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Verify => cmd_verify(&ctx),
        Command::EstimateCs => cmd_estimate_cs(&ctx),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn describe(report: &ConditionReport) -> Vec<String> {
    let mut lines = vec![
        format!("a = {:.10}", report.a),
        format!("theta = {:.10}", report.theta),
        format!(
            "geometric condition: {}",
            if report.geometric_ok {
                "holds"
            } else {
                "FAILS (theta <= 0)"
            }
        ),
    ];
    if report.geometric_ok {
        lines.push(format!("predicted decay rate = {:.10}", report.decay_rate));
    }
    if let Some(m) = report.smallness_margin {
        lines.push(format!(
            "smallness margin = {m:.6e} (E0 = {:.6e}, cs = {:.6e}, {})",
            report.initial_energy.unwrap_or(f64::NAN),
            report.cs_used.unwrap_or(f64::NAN),
            report.exponent_mode.as_str()
        ));
        lines.push(format!(
            "smallness condition: {}",
            if report.smallness_ok {
                "holds"
            } else {
                "FAILS"
            }
        ));
    }
    lines
}

fn cmd_check(ctx: &Ctx) -> Result<i32> {
    let domain = ctx.cfg.domain()?;
    let resolution = ctx.cfg.resolution()?;
    let init =
        ctx.cfg
            .shape()?
            .gradient_data(&domain, &resolution, ctx.cfg.amplitude()?, ctx.seed)?;
    let e0 = init.total_lap_energy();
    let geometric = damping_margin(&domain);
    let (report, code) = if geometric.geometric_ok {
        let (cs, _) = ctx.cfg.resolve_cs(ctx.seed)?;
        let r = smallness_check(&domain, e0, cs, ctx.cfg.exponent_mode())?;
        let code = if r.smallness_ok {
            EXIT_OK
        } else {
            EXIT_SMALLNESS
        };
        (r, code)
    } else {
        let mut r = geometric;
        r.initial_energy = Some(e0);
        (r, EXIT_GEOMETRIC)
    };
    for line in describe(&report) {
        ctx.say(line);
    }
    let value = serde_json::to_value(&report)?;
    println!("{}", serde_json::to_string(&value)?);
    if let Some(dir) = &ctx.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("condition.json"), &value)?;
    }
    Ok(code)
}

fn cmd_simulate(ctx: &Ctx) -> Result<i32> {
    let domain = ctx.cfg.domain()?;
    let resolution = ctx.cfg.resolution()?;
    let solver = ctx.cfg.solver()?;
    let amplitude = ctx.cfg.amplitude()?;
    let shape = ctx.cfg.shape()?;
    let grad = shape.gradient_data(&domain, &resolution, amplitude, ctx.seed)?;
    let (initial, names): (State, Vec<String>) = match ctx.cfg.file.solver.equation {
        Equation::Gradient => (grad.into(), component_names(domain.n())),
        Equation::Scalar => {
            let phi = shape.potential(&domain, &resolution, ctx.seed)?;
            let scale = amplitude * shape.unit_scale(&phi)?;
            (phi.scaled(scale).into(), vec!["phi".to_string()])
        }
    };
    let dir = ctx.out_dir("ksbox-out")?;

    let mut log = BufWriter::new(File::create(dir.join("log.jsonl"))?);
    serde_json::to_writer(
        &mut log,
        &json!({"event": "start", "lengths": domain.lengths(), "resolution": resolution,
                "seed": ctx.seed, "solver": solver, "equation": format!("{:?}", ctx.cfg.file.solver.equation).to_lowercase()}),
    )?;
    writeln!(log)?;
    let mut io_error = None;
    let run = simulate_observed(initial, &solver, |_, r| {
        let line = json!({"event": "record", "t": r.t, "energy": r.energy(), "dissipation": r.totals.bilap});
        if let Err(e) = writeln!(log, "{line}") {
            io_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    serde_json::to_writer(
        &mut log,
        &json!({"event": "end", "status": run.status, "steps": run.steps}),
    )?;
    writeln!(log)?;
    log.flush()?;

    let mut csv = BufWriter::new(File::create(dir.join("energy.csv"))?);
    write_energy_csv(&mut csv, &run.records, &names)?;
    csv.flush()?;

    let geometric = damping_margin(&domain);
    let e0 = run.records[0].energy();
    let fit = decay_fit(&run.records, geometric.decay_rate).ok();
    let ledger = dissipation_ledger(&run.records, e0)?;
    let report = json!({
        "status": run.status,
        "steps": run.steps,
        "initial_energy": e0,
        "final_energy": ledger.final_energy,
        "condition": geometric,
        "decay": fit,
        "bound_violation": crate::diagnostics::bound_violation(&run.records, geometric.decay_rate),
        "monotone": crate::diagnostics::is_monotone(&run.records),
        "ledger": ledger,
    });
    write_json(&dir.join("decay.json"), &report)?;

    for (field, name) in run.final_state.fields().iter().zip(&names) {
        save_dump(&dir.join(format!("final_{name}.txt")), field)?;
    }

    ctx.say(format!("status: {:?}, steps: {}", run.status, run.steps));
    ctx.say(format!("E0 = {e0:.6e}, E(T) = {:.6e}", ledger.final_energy));
    if let Some(f) = &fit {
        ctx.say(format!(
            "fitted rate = {:.6}, predicted = {:.6}, bound violation = {:.6}, monotone = {}",
            f.fitted_rate, f.predicted_rate, f.bound_violation, f.monotone
        ));
    }
    ctx.say(format!("outputs in {}", dir.display()));
    Ok(if run.status == RunStatus::Blowup {
        EXIT_BLOWUP
    } else {
        EXIT_OK
    })
}

fn cmd_sweep(ctx: &Ctx) -> Result<i32> {
    let sweep = ctx.cfg.file.sweep.clone().ok_or_else(|| KsError::Config {
        path: "sweep".into(),
        message: "a [sweep] section is required".into(),
    })?;
    if sweep.lengths.len() != ctx.cfg.domain()?.n() {
        return Err(KsError::Config {
            path: "sweep.lengths".into(),
            message: "one length list per axis is required".into(),
        });
    }
    let (cs, _) = ctx.cfg.resolve_cs(ctx.seed)?;
    let spec = SweepSpec {
        lengths: sweep.lengths,
        amplitudes: sweep.amplitudes,
        shape: ctx.cfg.shape()?,
        resolution: ctx.cfg.resolution()?,
        solver: ctx.cfg.solver()?,
        cs,
        exponent_mode: ctx.cfg.exponent_mode(),
        classification: ctx.cfg.classification(),
        seed: ctx.seed,
    };
    spec.validate().map_err(|e| KsError::Config {
        path: "sweep".into(),
        message: e.to_string(),
    })?;
    let rows = run_sweep(&spec)?;
    let dir = ctx.out_dir("ksbox-sweep")?;
    let mut csv = BufWriter::new(File::create(dir.join("sweep.csv"))?);
    write_sweep_csv(&mut csv, spec.lengths.len(), &rows)?;
    csv.flush()?;
    let mut jsonl = BufWriter::new(File::create(dir.join("sweep.jsonl"))?);
    write_sweep_jsonl(&mut jsonl, &spec, &rows)?;
    jsonl.flush()?;
    for r in &rows {
        ctx.say(format!(
            "L = {:?}, amplitude = {}: {} (bound violation {})",
            r.lengths,
            r.amplitude,
            r.status.as_str(),
            r.bound_violation
                .map_or("n/a".to_string(), |b| format!("{b:.4}"))
        ));
    }
    ctx.say(format!(
        "{} rows written to {}",
        rows.len(),
        dir.join("sweep.csv").display()
    ));
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &Ctx) -> Result<i32> {
    let domain = ctx.cfg.domain()?;
    let suite = ctx.cfg.suite(ctx.seed)?;
    let report = run_suite(&domain, &suite)?;
    let text = report.to_text();
    if !ctx.quiet {
        print!("{text}");
    }
    if let Some(dir) = &ctx.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify.txt"), &text)?;
        write_json(&dir.join("verify.json"), &report.to_json())?;
    } else if ctx.quiet {
        println!("{}", serde_json::to_string(&report.to_json())?);
    }
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn cmd_estimate_cs(ctx: &Ctx) -> Result<i32> {
    let domain = ctx.cfg.domain()?;
    let resolution = ctx.cfg.resolution()?;
    let trials = ctx.cfg.file.constants.estimate_trials;
    if trials == 0 {
        return Err(KsError::Config {
            path: "constants.estimate_trials".into(),
            message: "must be at least 1".into(),
        });
    }
    let est = estimate_embedding_constant(&domain, &resolution, trials, ctx.seed)?;
    ctx.say(format!(
        "cs_hat = {:.10e} (trial {}, seed {})",
        est.cs_hat, est.argmax_trial, est.argmax_seed
    ));
    ctx.say(format!("recommended cs = {:.10e}", est.recommended()));
    let value = json!({
        "cs_hat": est.cs_hat,
        "recommended": est.recommended(),
        "trials": trials,
        "argmax_trial": est.argmax_trial,
        "argmax_seed": est.argmax_seed,
    });
    println!("{}", serde_json::to_string(&value)?);
    if let Some(dir) = &ctx.out {
        std::fs::create_dir_all(dir)?;
        let mut full = value.clone();
        full["running_max"] = json!(est.running_max);
        write_json(&dir.join("cs_estimate.json"), &full)?;
    }
    Ok(EXIT_OK)
}
