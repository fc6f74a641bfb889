//! Cartesian parameter sweeps on a bounded worker pool.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use rhythmkit::rng::derive_seed;
use serde::Serialize;
use toml::{Table, Value};

use crate::config::{self, Axis, ConfigError};
use crate::output::{self, SUMMARY_HEADER};
use crate::presets::{self, SummaryRow};
use crate::RunError;

pub const MAX_RUNS: usize = 100_000;

/// Outcome of one child run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChildRow {
    pub run_id: String,
    pub seed: u64,
    pub values: BTreeMap<String, String>,
    pub error: Option<String>,
    #[serde(skip)]
    pub summary: Vec<SummaryRow>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub master_seed: u64,
    pub axes: Vec<Axis>,
    pub children: Vec<ChildRow>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.children.iter().filter(|c| c.error.is_some()).count()
    }
}

/// Child `i` runs the base configuration with axis values substituted and
/// seed `derive_seed(master_seed, i)`. Results are written under
/// `out/runs/rNNNNN`; summary.csv and runs.csv are sorted by run id.
pub fn sweep(
    base_text: &str,
    axes: &[Axis],
    master_seed: u64,
    jobs: usize,
    out: &Path,
    command: &[String],
) -> Result<SweepReport, RunError> {
    let base: Table = base_text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    // the base document must be valid on its own
    config::from_table(base.clone(), Some(base_text))?;
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total > MAX_RUNS {
        return Err(ConfigError::Invalid {
            key: "axis".into(),
            line: None,
            reason: format!("sweep expands to {total} runs, limit {MAX_RUNS}"),
        }
        .into());
    }
    let children = config::expand(&base, axes)?;
    fs::create_dir_all(out).map_err(RunError::Io)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Io(io::Error::other(e)))?;
    let rows: Vec<ChildRow> = pool.install(|| {
        children
            .into_par_iter()
            .enumerate()
            .map(|(i, (picks, table))| run_child(i, picks, table, master_seed, out, command))
            .collect()
    });
    let report = SweepReport {
        master_seed,
        axes: axes.to_vec(),
        children: rows,
    };
    write_report(out, &report).map_err(RunError::Io)?;
    Ok(report)
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn run_child(
    index: usize,
    picks: BTreeMap<String, Value>,
    table: Table,
    master_seed: u64,
    out: &Path,
    command: &[String],
) -> ChildRow {
    let run_id = format!("r{index:05}");
    let seed = derive_seed(master_seed, index as u64);
    let values = picks.iter().map(|(k, v)| (k.clone(), fmt_value(v))).collect();
    let result = (|| -> Result<Vec<SummaryRow>, RunError> {
        let mut loaded = config::from_table(table, None)?;
        loaded.config.seed = seed;
        let output = presets::run_experiment(&loaded.config)?;
        let dir = out.join("runs").join(&run_id);
        output::write_experiment(&dir, &loaded, &output, command).map_err(RunError::Io)?;
        Ok(output
            .summary
            .into_iter()
            .map(|mut r| {
                r.run_id = if r.run_id.is_empty() {
                    run_id.clone()
                } else {
                    format!("{run_id}/{}", r.run_id)
                };
                r
            })
            .collect())
    })();
    match result {
        Ok(summary) => ChildRow {
            run_id,
            seed,
            values,
            error: None,
            summary,
        },
        Err(e) => {
            log::warn!("sweep child {run_id} failed: {e}");
            ChildRow {
                run_id,
                seed,
                values,
                error: Some(e.to_string()),
                summary: Vec::new(),
            }
        }
    }
}

fn write_report(out: &Path, report: &SweepReport) -> io::Result<()> {
    let mut children: Vec<&ChildRow> = report.children.iter().collect();
    children.sort_by(|a, b| a.run_id.cmp(&b.run_id));

    let mut summary: Vec<&SummaryRow> = children.iter().flat_map(|c| &c.summary).collect();
    summary.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let mut w = BufWriter::new(fs::File::create(out.join("summary.csv"))?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in summary {
        writeln!(w, "{}", output::summary_line(r))?;
    }
    w.flush()?;

    let paths: Vec<&str> = report.axes.iter().map(|a| a.path.as_str()).collect();
    let mut w = BufWriter::new(fs::File::create(out.join("runs.csv"))?);
    let mut header = vec!["run_id", "seed", "status"];
    header.extend(&paths);
    header.push("error");
    writeln!(w, "{}", header.join(","))?;
    for c in children {
        let mut cells = vec![
            c.run_id.clone(),
            c.seed.to_string(),
            if c.error.is_some() { "failed" } else { "ok" }.to_string(),
        ];
        cells.extend(paths.iter().map(|p| c.values.get(*p).cloned().unwrap_or_default()));
        cells.push(c.error.clone().unwrap_or_default().replace([',', '\n'], ";"));
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    output::write_json(&out.join("manifest.json"), &SweepManifest {
        artifact: "rhythmkit",
        version: env!("CARGO_PKG_VERSION"),
        seed_rule: "child seed = derive_seed(master_seed, run_index)",
        report,
    })
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    artifact: &'static str,
    version: &'static str,
    seed_rule: &'static str,
    #[serde(flatten)]
    report: &'a SweepReport,
}
