//! `popdyn`: run biased-logit population experiments from a JSON config,
//! check gain conditions, and sweep mechanism gains.
//!
//! Exit codes: 0 success, 1 certificate failure under `--strict`, 2 config or
//! validation error, 3 aborted run (partial trajectory still written).

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use output::RunSummary;
use popdyn::certify::{self, CertificateReport, CertificateVerdict};
use popdyn::mechanism::GainVerdict;
use popdyn::sim::{self, Scenario, SweepRow};
use popdyn::Error;

const EXIT_STRICT: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_ABORTED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "popdyn",
    version,
    about = "Biased logit population dynamics: simulation, inducement, and \
             runtime passivity certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; write trajectory, certificates, and summary
    Run(RunArgs),
    /// Print the gain-condition verdict for the configured pairing (no run)
    CheckGains(CheckGainsArgs),
    /// Rerun the scenario for each sweep gain and tabulate the outcomes
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel work (default: all cores)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Exit 1 if any certificate fails or violates its tolerance
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CheckGainsArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Reuse row artifacts from a previous partial sweep
    #[arg(long)]
    resume: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::CheckGains(args) => cmd_check_gains(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_CONFIG);
        }
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Only fails if a global pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses and materializes the config, then builds the validated scenario.
/// Tabulated curve paths resolve relative to the config file.
fn load(config_path: &Path) -> anyhow::Result<(ExperimentConfig, Scenario)> {
    let cfg = ExperimentConfig::from_path(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let scenario = cfg.to_scenario(base_dir)?;
    Ok((cfg, scenario))
}

fn write_config(out: &Path, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let file = fs::File::create(out.join("config.json"))?;
    serde_json::to_writer_pretty(file, cfg)?;
    Ok(())
}

fn final_distance(traj: &sim::TrajectoryRecord) -> Option<f64> {
    let target = traj.scenario.target.as_ref()?;
    let last = traj.samples.last()?;
    Some(
        last.pi
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
    )
}

/// A certificate counts against `--strict` when it failed outright or its
/// worst residual violates the tolerance even though the analytic side
/// condition was unmet.
fn strict_violation(r: &CertificateReport) -> bool {
    matches!(r.verdict, CertificateVerdict::Fail) || r.worst_residual < -r.tolerance
}

fn verdict_tag(v: CertificateVerdict) -> &'static str {
    match v {
        CertificateVerdict::Pass => "PASS",
        CertificateVerdict::Fail => "FAIL",
        CertificateVerdict::ConditionUnmet => "UNMET",
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<i32> {
    init_threads(args.common.threads);
    let (cfg, scenario) = load(&args.common.config)?;
    let out = &args.common.out;
    fs::create_dir_all(out)?;
    write_config(out, &cfg)?;

    let gain = scenario.gain_condition().ok();
    let traj = match sim::run(&scenario) {
        Ok(traj) => traj,
        Err(Error::AbortedRun { t, reason, partial }) => {
            output::write_trajectory_csv(&out.join("trajectory.csv"), &partial)?;
            output::write_summary(
                &out.join("summary.json"),
                &RunSummary {
                    reports: &[],
                    gain: gain.as_ref(),
                    converged: None,
                    convergence_time: None,
                    final_distance: None,
                    aborted: true,
                    abort_reason: Some(format!("t = {t}: {reason}")),
                },
            )?;
            eprintln!("run aborted at t = {t}: {reason} (partial trajectory written)");
            return Ok(EXIT_ABORTED);
        }
        Err(e) => return Err(e.into()),
    };

    output::write_trajectory_csv(&out.join("trajectory.csv"), &traj)?;
    let reports = certify::certify_all(&traj)?;
    output::write_certificates(&out.join("certificates.json"), &reports)?;

    let (converged, convergence_time) = if scenario.target.is_some() {
        let (epsilon, window) = cfg.convergence_settings();
        let (c, t) = sim::detect_convergence(&traj, epsilon, window)?;
        (Some(c), t)
    } else {
        (None, None)
    };
    let distance = final_distance(&traj);
    output::write_summary(
        &out.join("summary.json"),
        &RunSummary {
            reports: &reports,
            gain: gain.as_ref(),
            converged,
            convergence_time,
            final_distance: distance,
            aborted: false,
            abort_reason: None,
        },
    )?;

    for r in &reports {
        println!(
            "[{}] {}: worst_residual={:+.3e} tolerance={:.3e} samples={}",
            verdict_tag(r.verdict),
            r.id.label(),
            r.worst_residual,
            r.tolerance,
            r.samples_checked,
        );
    }
    if let Some(converged) = converged {
        match (converged, convergence_time, distance) {
            (true, Some(t), Some(d)) => {
                println!("converged: yes (from t = {t:.4}, final distance {d:.3e})")
            }
            _ => println!(
                "converged: no (final distance {:.3e})",
                distance.unwrap_or(f64::NAN)
            ),
        }
    }

    if args.strict && reports.iter().any(strict_violation) {
        eprintln!("strict mode: a certificate failed");
        return Ok(EXIT_STRICT);
    }
    Ok(0)
}

fn cmd_check_gains(args: CheckGainsArgs) -> anyhow::Result<i32> {
    let (_cfg, scenario) = load(&args.common.config)?;
    match scenario.gain_condition()? {
        GainVerdict::Satisfied { threshold, margin } => {
            println!("gain condition: PASS threshold={threshold} margin={margin}")
        }
        GainVerdict::Violated { threshold, margin } => {
            println!("gain condition: FAIL threshold={threshold} margin={margin}")
        }
        GainVerdict::Infeasible => {
            println!("gain condition: INFEASIBLE for all kappa (w_lo <= 2 v_hi)")
        }
    }
    Ok(0)
}

fn row_path(out: &Path, index: usize) -> PathBuf {
    out.join("sweep_rows").join(format!("kappa_{index}.json"))
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<i32> {
    init_threads(args.common.threads);
    let (cfg, scenario) = load(&args.common.config)?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| anyhow::anyhow!("config has no \"sweep\" section"))?;
    let epsilon = sweep.epsilon.expect("materialized");
    let window = sweep.window.expect("materialized");
    let out = &args.common.out;
    fs::create_dir_all(out.join("sweep_rows"))?;
    write_config(out, &cfg)?;

    let mut rows: Vec<Option<SweepRow>> = vec![None; sweep.kappas.len()];
    if args.resume {
        for (i, &kappa) in sweep.kappas.iter().enumerate() {
            let Ok(text) = fs::read_to_string(row_path(out, i)) else {
                continue;
            };
            match serde_json::from_str::<SweepRow>(&text) {
                Ok(row) if row.kappa == kappa => rows[i] = Some(row),
                _ => {} // stale or corrupt artifact: recompute
            }
        }
    }

    let missing: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_none()).collect();
    if !missing.is_empty() {
        let kappas: Vec<f64> = missing.iter().map(|&i| sweep.kappas[i]).collect();
        let computed = sim::gain_sweep(&scenario, &kappas, epsilon, window)?;
        for (&i, row) in missing.iter().zip(computed) {
            let file = fs::File::create(row_path(out, i))?;
            serde_json::to_writer_pretty(file, &row)?;
            rows[i] = Some(row);
        }
    }
    let rows: Vec<SweepRow> = rows.into_iter().map(|r| r.expect("filled above")).collect();
    output::write_sweep_csv(&out.join("sweep.csv"), &rows)?;

    for (i, row) in rows.iter().enumerate() {
        let gain = match row.gain_satisfied {
            Some(true) => "satisfied",
            Some(false) => "violated",
            None => "n/a",
        };
        let reused = if args.resume && !missing.contains(&i) { " (resumed)" } else { "" };
        match &row.error {
            Some(e) => println!("kappa={}: error: {e}{reused}", row.kappa),
            None => println!(
                "kappa={}: gain {gain}, converged={}, worst_residual={}{reused}",
                row.kappa,
                row.converged,
                row.worst_residual
                    .map(|r| format!("{r:+.3e}"))
                    .unwrap_or_else(|| "n/a".into()),
            ),
        }
    }

    if rows.iter().any(|r| r.aborted) {
        eprintln!("at least one sweep run aborted");
        return Ok(EXIT_ABORTED);
    }
    Ok(0)
}
