//! CSV and JSON serialization of campaign results.
//!
//! Main table columns (exact header):
//! `scenario_id,iteration,receiver,traffic,n_sim,n_reported,transmitted,succeeded,success_rate,throughput_pps,goodput_pps,master_seed`.
//! Ratios and rates are printed with 6 decimals; an undefined success rate
//! (nothing transmitted) is an empty field in CSV and `null` in JSON.
//!
//! Companion files next to `results.csv`:
//! - `results_summary.csv`: one aggregate line per scenario
//! - `results_nodes.csv`: per-node tallies (with `--per-node`)
//! - `results_trace.csv`: per-fragment trace (with `--trace`)

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::campaign::{CampaignResult, ResultRow};
use crate::config::OutputFormat;
use crate::protocol::TraceRecord;
use crate::Error;

pub const RESULTS_HEADER: &str = "scenario_id,iteration,receiver,traffic,n_sim,n_reported,transmitted,succeeded,success_rate,throughput_pps,goodput_pps,master_seed";
pub const NODES_HEADER: &str = "scenario_id,iteration,node_id,transmitted,succeeded,success_rate";
pub const SUMMARY_HEADER: &str = "scenario_id,receiver,traffic,n_sim,n_reported,iterations,transmitted,succeeded,mean_success,success_stddev,pooled_success,mean_throughput_pps,mean_goodput_pps";
pub const TRACE_HEADER: &str = "scenario_id,iteration,packet_id,node_id,kind,index,channel,start,end,status";

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

fn opt_fixed(x: Option<f64>) -> String {
    x.map(fixed).unwrap_or_default()
}

fn round6(x: f64) -> Value {
    if x.is_finite() {
        json!((x * 1e6).round() / 1e6)
    } else {
        Value::Null
    }
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario_id,
            r.iteration,
            r.receiver,
            r.traffic,
            r.n_sim,
            r.n_reported,
            r.transmitted,
            r.succeeded,
            opt_fixed(r.success_rate),
            fixed(r.throughput_pps),
            fixed(r.goodput_pps),
            r.master_seed
        )
        .expect("writing to a String");
    }
    out
}

pub fn nodes_csv(result: &CampaignResult) -> String {
    let mut out = String::new();
    out.push_str(NODES_HEADER);
    out.push('\n');
    for s in &result.scenarios {
        for run in &s.runs {
            for n in &run.per_node {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.scenario_id,
                    run.iteration,
                    n.node_id,
                    n.transmitted,
                    n.succeeded,
                    opt_fixed(n.success())
                )
                .expect("writing to a String");
            }
        }
    }
    out
}

pub fn summary_csv(result: &CampaignResult) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for s in &result.scenarios {
        let a = &s.aggregate;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.scenario_id,
            result.receiver,
            result.traffic,
            a.n_sim,
            a.n_reported,
            a.iterations,
            a.transmitted,
            a.succeeded,
            fixed(a.mean_success),
            fixed(a.success_stddev),
            fixed(a.pooled_success),
            fixed(a.mean_throughput_pps),
            fixed(a.mean_goodput_pps)
        )
        .expect("writing to a String");
    }
    out
}

pub fn trace_csv(result: &CampaignResult) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &result.scenarios {
        for (run, trace) in s.runs.iter().zip(&s.traces) {
            for t in trace.iter().flatten() {
                write_trace_line(&mut out, &s.scenario_id, run.iteration, t);
            }
        }
    }
    out
}

fn write_trace_line(out: &mut String, scenario: &str, iteration: u32, t: &TraceRecord) {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        scenario,
        iteration,
        t.packet_id,
        t.node_id,
        t.kind.as_str(),
        t.index,
        t.channel,
        t.start.ticks(),
        t.end.ticks(),
        t.status.as_str()
    )
    .expect("writing to a String");
}

/// `{"rows": [...], "aggregates": [...]}`, with the row objects carrying the
/// same fields as the CSV columns.
pub fn results_json(result: &CampaignResult) -> String {
    let rows: Vec<Value> = result
        .rows()
        .iter()
        .map(|r| {
            json!({
                "scenario_id": r.scenario_id,
                "iteration": r.iteration,
                "receiver": r.receiver,
                "traffic": r.traffic,
                "n_sim": r.n_sim,
                "n_reported": r.n_reported,
                "transmitted": r.transmitted,
                "succeeded": r.succeeded,
                "success_rate": r.success_rate.map(round6).unwrap_or(Value::Null),
                "throughput_pps": round6(r.throughput_pps),
                "goodput_pps": round6(r.goodput_pps),
                "master_seed": r.master_seed,
            })
        })
        .collect();
    let aggregates: Vec<Value> = result
        .scenarios
        .iter()
        .map(|s| {
            let a = &s.aggregate;
            json!({
                "scenario_id": s.scenario_id,
                "receiver": result.receiver,
                "traffic": result.traffic,
                "n_sim": a.n_sim,
                "n_reported": a.n_reported,
                "iterations": a.iterations,
                "transmitted": a.transmitted,
                "succeeded": a.succeeded,
                "mean_success": round6(a.mean_success),
                "success_stddev": round6(a.success_stddev),
                "pooled_success": round6(a.pooled_success),
                "mean_throughput_pps": round6(a.mean_throughput_pps),
                "mean_goodput_pps": round6(a.mean_goodput_pps),
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({ "rows": rows, "aggregates": aggregates }))
        .expect("JSON values serialize");
    text.push('\n');
    text
}

/// `dir/stem.ext` -> `dir/stem_<suffix>.<ext>`.
pub fn companion_path(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmitOptions {
    pub per_node: bool,
    pub trace: bool,
}

/// Writes results to `path`, or returns the main document when `path` is
/// `None` (companion files need a path).
pub fn emit(
    result: &CampaignResult,
    format: OutputFormat,
    path: Option<&Path>,
    opts: EmitOptions,
) -> Result<Option<String>, Error> {
    let main = match format {
        OutputFormat::Csv => results_csv(&result.rows()),
        OutputFormat::Json => results_json(result),
    };
    let Some(path) = path else {
        if opts.per_node || opts.trace {
            return Err(Error::Config("--per-node and --trace need --output".into()));
        }
        return Ok(Some(main));
    };
    write_file(path, &main)?;
    if format == OutputFormat::Csv {
        write_file(&companion_path(path, "summary", "csv"), &summary_csv(result))?;
    }
    if opts.per_node {
        write_file(&companion_path(path, "nodes", "csv"), &nodes_csv(result))?;
    }
    if opts.trace {
        write_file(&companion_path(path, "trace", "csv"), &trace_csv(result))?;
    }
    Ok(None)
}
