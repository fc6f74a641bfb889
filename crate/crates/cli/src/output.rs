//! CSV artifacts and run manifests.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{LoadedConfig, Source};
use crate::presets::{num, Claim, ExperimentOutput, RunRecord, SummaryRow, Table};

pub const SUMMARY_HEADER: &str = "run_id,frequency_hz,synchrony_index,participation";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_table(dir: &Path, table: &Table) -> io::Result<PathBuf> {
    let path = dir.join(&table.file);
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "{}", table.header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","))?;
    for row in &table.rows {
        writeln!(w, "{}", row.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","))?;
    }
    w.flush()?;
    Ok(path)
}

/// `neuron_id,time_ms`, neurons in index order, spikes in time order.
pub fn write_spikes(path: &Path, trains: &[Vec<f64>]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "neuron_id,time_ms")?;
    for (i, train) in trains.iter().enumerate() {
        for &t in train {
            writeln!(w, "{i},{}", num(t))?;
        }
    }
    w.flush()
}

pub fn summary_line(row: &SummaryRow) -> String {
    format!(
        "{},{},{},{}",
        csv_field(&row.run_id),
        row.frequency_hz.map(num).unwrap_or_default(),
        num(row.synchrony_index),
        num(row.participation)
    )
}

/// Rows sorted by run id so the file does not depend on completion order.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> io::Result<()> {
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in sorted {
        writeln!(w, "{}", summary_line(r))?;
    }
    w.flush()
}

/// Directory name for a run id (`tau=5/rep=0` -> `tau=5_rep=0`).
pub fn run_dir_name(run_id: &str) -> String {
    run_id.replace(['/', '\\', ' '], "_")
}

#[derive(Debug, Serialize)]
pub struct Parameter {
    pub key: String,
    pub value: serde_json::Value,
    pub source: Source,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub experiment: String,
    pub seed: u64,
    pub parameters: Vec<Parameter>,
    pub runs: Vec<RunRecord>,
    pub claims: Vec<Claim>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn parameters(loaded: &LoadedConfig) -> Vec<Parameter> {
    loaded
        .parameters()
        .into_iter()
        .map(|(key, value, source)| Parameter { key, value, source })
        .collect()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Writes every artifact of one experiment into `dir`: its tables,
/// summary.csv, spikes (spikes.csv for a single run, runs/<id>/spikes.csv
/// otherwise) and manifest.json.
pub fn write_experiment(
    dir: &Path,
    loaded: &LoadedConfig,
    output: &ExperimentOutput,
    command: &[String],
) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::new();
    let rel = |p: &Path| p.strip_prefix(dir).unwrap_or(p).display().to_string();
    for t in &output.tables {
        outputs.push(rel(&write_table(dir, t)?));
    }
    if !output.summary.is_empty() {
        let p = dir.join("summary.csv");
        write_summary(&p, &output.summary)?;
        outputs.push(rel(&p));
    }
    match output.runs.as_slice() {
        [] => {}
        [single] => {
            let p = dir.join("spikes.csv");
            write_spikes(&p, &single.spikes)?;
            outputs.push(rel(&p));
        }
        runs => {
            for r in runs {
                let sub = dir.join("runs").join(run_dir_name(&r.run_id));
                fs::create_dir_all(&sub)?;
                let p = sub.join("spikes.csv");
                write_spikes(&p, &r.spikes)?;
                outputs.push(rel(&p));
            }
        }
    }
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        artifact: "rhythmkit",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_vec(),
        experiment: loaded.config.experiment.clone(),
        seed: loaded.config.seed,
        parameters: parameters(loaded),
        runs: output.runs.clone(),
        claims: output.claims.clone(),
        warnings: output.warnings.clone(),
        outputs,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
