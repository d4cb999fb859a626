//! CSV and JSON artifact writers.
//!
//! Identical inputs must produce byte-identical files, so every float is
//! printed with 17 significant digits through one formatter, collections
//! are emitted in their already-deterministic order, and nothing
//! wall-clock-dependent enters an artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::flow::Trajectory;
use crate::spectral::EigenPair;
use crate::verify::{EntropySeries, SuiteOutcome, VerificationReport};

/// 17 significant digits: round-trips f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)?;
    Ok(())
}

/// One row per snapshot and grid point, grouped by snapshot.
pub fn write_trajectory_csv(dir: &Path, traj: &Trajectory) -> Result<PathBuf> {
    let path = dir.join("trajectory.csv");
    let mut out = String::from("t,x,a,b,p\n");
    for state in &traj.states {
        for j in 0..state.grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_float(state.t),
                fmt_float(state.grid.x(j)),
                fmt_float(state.metric.a[j]),
                fmt_float(state.metric.b[j]),
                fmt_float(state.dilaton.p[j]),
            );
        }
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

/// One spectrum row: eigenvalue with its sector, list position, and
/// near-degeneracy flag.
#[derive(Clone, Debug)]
pub struct SpectrumRow {
    pub t: f64,
    pub mode: u32,
    pub index: usize,
    pub lambda: f64,
    pub gap_flag: bool,
}

impl SpectrumRow {
    pub fn from_pairs(pairs: &[EigenPair], flags: &[bool]) -> Vec<SpectrumRow> {
        pairs
            .iter()
            .zip(flags)
            .enumerate()
            .map(|(index, (p, &gap_flag))| SpectrumRow {
                t: p.t,
                mode: p.mode,
                index,
                lambda: p.lambda,
                gap_flag,
            })
            .collect()
    }
}

pub fn write_spectrum_csv(dir: &Path, rows: &[SpectrumRow]) -> Result<PathBuf> {
    let path = dir.join("spectrum.csv");
    let mut out = String::from("t,mode,index,lambda,gap_flag\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(row.t),
            row.mode,
            row.index,
            fmt_float(row.lambda),
            row.gap_flag,
        );
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

pub fn write_entropy_csv(dir: &Path, es: &EntropySeries) -> Result<PathBuf> {
    let path = dir.join("entropy.csv");
    let mut out =
        String::from("t,tau,mass,F_k,W_k,dF_dt_fd,dF_rhs_A,dF_rhs_B,dW_dt_fd,dW_rhs_A,dW_rhs_B\n");
    let df_fd = es.df_dt_fd();
    let dw_fd = es.dw_dt_fd();
    for i in 0..es.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(es.times[i]),
            fmt_float(es.tau[i]),
            fmt_float(es.mass[i]),
            fmt_float(es.f_k[i]),
            fmt_float(es.w_k[i]),
            fmt_float(df_fd[i]),
            fmt_float(es.df_rhs_a[i]),
            fmt_float(es.df_rhs_b[i]),
            fmt_float(dw_fd[i]),
            fmt_float(es.dw_rhs_a[i]),
            fmt_float(es.dw_rhs_b[i]),
        );
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

/// File name of a check's series CSV inside the output directory.
pub fn series_file_name(check_name: &str) -> String {
    format!("{}.csv", check_name.replace('/', "__"))
}

pub fn write_check_series_csv(dir: &Path, report: &VerificationReport) -> Result<PathBuf> {
    let path = dir.join(series_file_name(&report.check.name));
    let mut out = String::from("t,lhs,rhs,residual,hypothesis_ok,degenerate\n");
    for i in 0..report.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(report.times[i]),
            fmt_float(report.lhs[i]),
            fmt_float(report.rhs[i]),
            fmt_float(report.residuals[i]),
            report.hypothesis_flags[i],
            report.degenerate_flags[i],
        );
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Short human-readable account of how the samples were treated.
pub fn flags_summary(report: &VerificationReport) -> String {
    let total = report.times.len();
    let asserted = report.asserted_samples();
    let degenerate = report.degenerate_flags.iter().filter(|&&d| d).count();
    let mut summary = if report.report_only() {
        format!("report-only (hypothesis false), {total} samples recorded")
    } else {
        format!("asserted {asserted} of {total} samples")
    };
    if degenerate > 0 {
        let _ = write!(summary, ", {degenerate} near-degenerate excluded");
    }
    summary
}

/// report.json: one object per check plus the exercised hypothesis
/// regimes, in sorted order. Series files are written alongside.
pub fn write_report_json(dir: &Path, outcome: &SuiteOutcome) -> Result<PathBuf> {
    for report in &outcome.reports {
        write_check_series_csv(dir, report)?;
    }
    let path = dir.join("report.json");
    let mut out = String::from("{\n  \"pass\": ");
    out.push_str(if outcome.pass { "true" } else { "false" });
    out.push_str(",\n  \"checks\": [\n");
    for (i, report) in outcome.reports.iter().enumerate() {
        let order = match report.order_estimate {
            Some(o) => fmt_float(o),
            None => "null".to_string(),
        };
        let _ = write!(
            out,
            "    {{\"name\": \"{}\", \"kind\": \"{}\", \"pass\": {}, \"residual_max\": {}, \"order_estimate\": {}, \"tolerance\": {}, \"flags_summary\": \"{}\", \"series_file\": \"{}\"}}",
            escape_json(&report.check.name),
            report.check.kind.label(),
            report.pass,
            fmt_float(report.residual_max),
            order,
            fmt_float(report.check.tolerance),
            escape_json(&flags_summary(report)),
            escape_json(&series_file_name(&report.check.name)),
        );
        out.push_str(if i + 1 < outcome.reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"regimes\": {\n");
    for (i, (regime, labels)) in outcome.regimes.iter().enumerate() {
        let quoted: Vec<String> = labels
            .iter()
            .map(|l| format!("\"{}\"", escape_json(l)))
            .collect();
        let _ = write!(
            out,
            "    \"{}\": [{}]",
            escape_json(regime),
            quoted.join(", ")
        );
        out.push_str(if i + 1 < outcome.regimes.len() { ",\n" } else { "\n" });
    }
    out.push_str("  }\n}\n");
    write_atomic(&path, &out)?;
    Ok(path)
}
