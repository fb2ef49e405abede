//! Run output: diagnostics CSV, plain-text snapshots, machine-readable run
//! summary, and a sidecar metadata file. Data files are deterministic given
//! the configuration; wall-clock information lives only in the sidecar.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use muskat_core::diagnostics::{BalanceReport, DiagnosticsRecord};
use muskat_core::spectral::GridFunction;
use muskat_core::timestepping::{SimAbort, SimOutput};

use crate::config::RunConfig;

fn fmt(v: f64) -> String {
    format!("{v:.15e}")
}

/// Column definitions emitted as comment lines above the CSV header.
const COLUMN_DOCS: &[(&str, &str)] = &[
    ("t", "sample time"),
    ("sup_f", "max_x f (interface height units)"),
    ("inf_f", "min_x f"),
    ("sup_slope", "max_x |f_x| (dimensionless)"),
    ("l2_sq", "int f^2 dx"),
    ("l1", "int |f| dx"),
    ("wiener1", "sum_k |xi_k| |f_hat_k|"),
    ("wiener2d", "sum_k |xi_k|^(2+delta) |f_hat_k|"),
    ("dissipation", "int int ln(1 + ((f(x)-f(y))/(x-y))^2) dx dy"),
    ("mean", "mean of f over the torus"),
    ("balance_lhs", "l2_sq + (rho2-rho1)/(2 pi) * int_0^t dissipation ds"),
    ("balance_rhs", "l2_sq at t = 0"),
    ("balance_residual", "balance_lhs - balance_rhs"),
    ("balance_relative_residual", "balance_residual / balance_rhs"),
];

pub fn write_diagnostics_csv(
    path: &Path,
    records: &[DiagnosticsRecord],
    balance: &[BalanceReport],
) -> Result<()> {
    assert_eq!(records.len(), balance.len());
    let mut out = String::new();
    for (name, doc) in COLUMN_DOCS {
        out.push_str(&format!("# {name}: {doc}\n"));
    }
    out.push_str(
        "t,sup_f,inf_f,sup_slope,l2_sq,l1,wiener1,wiener2d,dissipation,mean,\
         balance_lhs,balance_rhs,balance_residual,balance_relative_residual\n",
    );
    for (r, b) in records.iter().zip(balance) {
        let row = [
            r.t,
            r.sup_f,
            r.inf_f,
            r.sup_slope,
            r.l2_sq,
            r.l1,
            r.wiener1,
            r.wiener2d,
            r.dissipation,
            r.mean,
            b.lhs,
            b.rhs,
            b.residual,
            b.relative_residual,
        ];
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_snapshot(path: &Path, t: f64, state: &GridFunction) -> Result<()> {
    let spec = state.spec();
    let mut out = String::with_capacity(state.values().len() * 48);
    out.push_str(&format!("# t = {}\n", fmt(t)));
    for (j, &v) in state.values().iter().enumerate() {
        out.push_str(&fmt(spec.x(j)));
        out.push(' ');
        out.push_str(&fmt(v));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Write everything a finished run produces into `dir`.
pub fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    out: &SimOutput,
    balance: &[BalanceReport],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_diagnostics_csv(&dir.join("diagnostics.csv"), &out.records, balance)?;

    if cfg.write_snapshots {
        let snapdir = dir.join("snapshots");
        fs::create_dir_all(&snapdir)?;
        for (i, (t, state)) in out
            .trajectory
            .times()
            .iter()
            .zip(out.trajectory.states())
            .enumerate()
        {
            write_snapshot(&snapdir.join(format!("snapshot_{i:05}.txt")), *t, state)?;
        }
    }

    let mut summary = String::new();
    summary.push_str("status = completed\n");
    summary.push_str(&format!("n = {}\n", cfg.grid.n()));
    summary.push_str(&format!("half_period = {}\n", fmt(cfg.grid.half_period())));
    summary.push_str(&format!("dx = {}\n", fmt(cfg.grid.dx())));
    summary.push_str(&format!("rho1 = {}\n", fmt(cfg.phys.rho1())));
    summary.push_str(&format!("rho2 = {}\n", fmt(cfg.phys.rho2())));
    if let Some(reg) = &cfg.reg {
        summary.push_str(&format!("eps = {}\n", fmt(reg.eps())));
        summary.push_str(&format!("big_c = {}\n", fmt(reg.big_c())));
    }
    summary.push_str(&format!("form = {:?}\n", cfg.form));
    summary.push_str(&format!("scheme = {:?}\n", cfg.stepper.scheme));
    summary.push_str(&format!("dt = {}\n", fmt(out.dt)));
    summary.push_str(&format!("n_steps = {}\n", out.n_steps));
    summary.push_str(&format!("t_final = {}\n", fmt(cfg.stepper.t_final)));
    summary.push_str(&format!("cadence = {}\n", cfg.diag.cadence));
    summary.push_str(&format!("snapshots = {}\n", out.trajectory.len()));
    if let (Some(first), Some(last)) = (out.records.first(), out.records.last()) {
        summary.push_str(&format!("initial_sup_f = {}\n", fmt(first.sup_f)));
        summary.push_str(&format!("final_sup_f = {}\n", fmt(last.sup_f)));
        summary.push_str(&format!("initial_l2_sq = {}\n", fmt(first.l2_sq)));
        summary.push_str(&format!("final_l2_sq = {}\n", fmt(last.l2_sq)));
    }
    if let Some(b) = balance.last() {
        summary.push_str(&format!(
            "final_balance_relative_residual = {}\n",
            fmt(b.relative_residual)
        ));
    }
    fs::write(dir.join("summary.txt"), summary)?;

    write_metadata(dir)?;
    Ok(())
}

/// Wall-clock sidecar; the only non-deterministic file of a run.
pub fn write_metadata(dir: &Path) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = fs::File::create(dir.join("metadata.txt"))?;
    writeln!(f, "unix_timestamp = {now}")?;
    writeln!(f, "tool_version = {}", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

/// Dump the last finite state after an abort.
pub fn write_abort_dump(dir: &Path, abort: &SimAbort) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_snapshot(&dir.join("dump_state.txt"), abort.t, &abort.last_state)?;
    let mut summary = String::new();
    summary.push_str("status = aborted\n");
    summary.push_str(&format!("reason = {abort}\n"));
    fs::write(dir.join("summary.txt"), summary)?;
    write_metadata(dir)?;
    Ok(())
}
