//! Artifact writers: the trajectory CSV, certificate reports, the run
//! summary, and sweep outputs. Floats are printed with 17 significant digits
//! so parsing a CSV back reproduces the exact bit pattern.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use popdyn::certify::CertificateReport;
use popdyn::mechanism::GainVerdict;
use popdyn::sim::{SweepRow, TrajectoryRecord};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-sample event flags: one '0'/'1' per strategy for the saturation
/// branch, a trailing 'c' when the storage dual argument was clamped, and
/// '-' when there is nothing to report.
fn event_flags(branch: &[bool], clamped: bool) -> String {
    let mut s = String::new();
    for &b in branch {
        s.push(if b { '1' } else { '0' });
    }
    if clamped {
        s.push('c');
    }
    if s.is_empty() {
        s.push('-');
    }
    s
}

/// Writes `t, pi_*, tau_*, T_*, mu_*, S, H_or_U, V, event_flags` rows, one
/// per recorded sample.
pub fn write_trajectory_csv(path: &Path, traj: &TrajectoryRecord) -> anyhow::Result<()> {
    let n = traj.n();
    let mut text = String::from("t");
    for group in ["pi", "tau", "T", "mu"] {
        for k in 1..=n {
            write!(text, ",{group}_{k}").unwrap();
        }
    }
    text.push_str(",S,H_or_U,V,event_flags\n");
    for s in &traj.samples {
        text.push_str(&fmt(s.t));
        for column in [&s.pi, &s.tau, &s.cost, &s.mu] {
            for &v in column.iter() {
                text.push(',');
                text.push_str(&fmt(v));
            }
        }
        for v in [s.storage, s.mech_storage, s.lyapunov] {
            text.push(',');
            text.push_str(&fmt(v));
        }
        text.push(',');
        text.push_str(&event_flags(&s.branch, s.clamped));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

pub fn write_certificates(path: &Path, reports: &[CertificateReport]) -> anyhow::Result<()> {
    let file = fs::File::create(path)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    serde_json::to_writer_pretty(file, reports)?;
    Ok(())
}

pub struct RunSummary<'a> {
    pub reports: &'a [CertificateReport],
    pub gain: Option<&'a GainVerdict>,
    pub converged: Option<bool>,
    pub convergence_time: Option<f64>,
    pub final_distance: Option<f64>,
    pub aborted: bool,
    pub abort_reason: Option<String>,
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> anyhow::Result<()> {
    let certificates: Vec<serde_json::Value> = summary
        .reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.id,
                "verdict": r.verdict,
                "worst_residual": r.worst_residual,
                "tolerance": r.tolerance,
            })
        })
        .collect();
    let value = serde_json::json!({
        "converged": summary.converged,
        "convergence_time": summary.convergence_time,
        "final_distance": summary.final_distance,
        "gain_condition": summary.gain,
        "certificates": certificates,
        "aborted": summary.aborted,
        "abort_reason": summary.abort_reason,
    });
    let file = fs::File::create(path)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?;
    serde_json::to_writer_pretty(file, &value)?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut text = String::from(
        "kappa,gain_satisfied,converged,convergence_time,worst_residual,aborted,error\n",
    );
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for row in rows {
        let gain = row
            .gain_satisfied
            .map(|b| b.to_string())
            .unwrap_or_default();
        let error = row.error.as_deref().unwrap_or("").replace(',', ";");
        writeln!(
            text,
            "{},{gain},{},{},{},{},{error}",
            fmt(row.kappa),
            row.converged,
            opt(row.convergence_time),
            opt(row.worst_residual),
            row.aborted,
        )
        .unwrap();
    }
    fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}
