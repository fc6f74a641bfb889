//! Experiment configuration: a TOML document with a top-level `experiment`
//! key and one section per experiment family. Every key has a default, so
//! an empty document plus an experiment name is a complete configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

use crate::presets;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid value for `{key}`{}: {reason}", line_suffix(*.line))]
    Invalid {
        key: String,
        line: Option<usize>,
        reason: String,
    },
    #[error("unknown experiment `{0}` (see `list-presets`)")]
    UnknownExperiment(String),
    #[error("bad override `{0}`: expected key=value")]
    BadOverride(String),
    #[error("{0}")]
    Io(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Preset name, or `ing` / `ping` for a single custom network run.
    pub experiment: String,
    pub seed: u64,
    pub out_dir: String,
    pub run: RunSection,
    pub theta: ThetaSection,
    pub river: RiverSection,
    pub ing: IngSection,
    pub ping: PingSection,
    pub sparse: SparseSection,
    pub prc: PrcSection,
    pub fi: FiSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: "ing".into(),
            seed: 0,
            out_dir: "out".into(),
            run: RunSection::default(),
            theta: ThetaSection::default(),
            river: RiverSection::default(),
            ing: IngSection::default(),
            ping: PingSection::default(),
            sparse: SparseSection::default(),
            prc: PrcSection::default(),
            fi: FiSection::default(),
        }
    }
}

/// Shared settings of network simulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub duration_ms: f64,
    pub dt_ms: f64,
    /// Start of the analysis window; earlier spikes are transient.
    pub transient_ms: f64,
    /// Independent network realizations averaged per data point.
    pub repeats: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            duration_ms: 600.0,
            dt_ms: 0.01,
            transient_ms: 200.0,
            repeats: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaSection {
    pub drives: Vec<f64>,
    /// Negative drive checked for quiescence at the stable fixed point.
    pub quiescent_drive: f64,
    pub dt_ms: f64,
    pub periods: usize,
}

impl Default for ThetaSection {
    fn default() -> Self {
        Self {
            drives: vec![0.25, 1.0, 4.0],
            quiescent_drive: -0.5,
            dt_ms: 0.01,
            periods: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiverSection {
    pub bias: f64,
    pub tau_ms: f64,
    pub g_values: Vec<f64>,
    pub ensemble_size: usize,
    pub spread0: f64,
}

impl Default for RiverSection {
    fn default() -> Self {
        Self {
            bias: 0.5,
            tau_ms: 10.0,
            g_values: vec![0.0, 1.0, 2.0, 4.0],
            ensemble_size: 64,
            spread0: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadKind {
    None,
    UniformHalfwidth,
    GaussianSigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    AllToAll,
    Bernoulli,
    FixedInDegree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngSection {
    pub n: usize,
    pub drive: f64,
    /// Drive spread as a fraction of the mean drive.
    pub drive_spread: f64,
    pub spread_kind: SpreadKind,
    pub tau_decay: f64,
    /// Total inhibitory conductance onto each cell (mS/cm^2).
    pub g_ii: f64,
    pub connectivity: Connectivity,
    pub p: f64,
    pub in_degree: usize,
    /// Decay times scanned by `ing-freq-vs-tau`.
    pub taus: Vec<f64>,
    /// Drives giving roughly 40 Hz and 15 Hz homogeneous rhythms.
    pub gamma_drive: f64,
    pub low_drive: f64,
    /// Spreads scanned by `ing-heterogeneity`.
    pub spreads: Vec<f64>,
}

impl Default for IngSection {
    fn default() -> Self {
        Self {
            n: 50,
            drive: presets::ING_GAMMA_DRIVE,
            drive_spread: 0.0,
            spread_kind: SpreadKind::UniformHalfwidth,
            tau_decay: 10.0,
            g_ii: presets::ING_G_II,
            connectivity: Connectivity::AllToAll,
            p: 0.5,
            in_degree: 10,
            taus: vec![5.0, 10.0, 20.0],
            gamma_drive: presets::ING_GAMMA_DRIVE,
            low_drive: presets::ING_LOW_DRIVE,
            spreads: vec![0.0, 0.05, 0.1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PingSection {
    pub n_e: usize,
    pub n_i: usize,
    pub drive_e: f64,
    pub drive_e_spread: f64,
    pub spread_kind: SpreadKind,
    pub drive_i: f64,
    pub connectivity: Connectivity,
    pub p_ei: f64,
    pub p_ie: f64,
    pub g_ei: f64,
    pub g_ie: f64,
    /// Total I->I conductance; 0 disables the block.
    pub g_ii: f64,
    pub tau_exc: f64,
    pub tau_inh: f64,
    /// Poisson pulse rate per I-cell (events/ms); 0 disables noise.
    pub noise_rate: f64,
    pub noise_amplitude: f64,
    /// E-drives giving a sub-30 Hz and a gamma PING rhythm.
    pub low_drive_e: f64,
    pub gamma_drive_e: f64,
    /// I->I conductance used by `ping-noise-ii`.
    pub protective_g_ii: f64,
}

impl Default for PingSection {
    fn default() -> Self {
        Self {
            n_e: 80,
            n_i: 20,
            drive_e: presets::PING_LOW_DRIVE_E,
            drive_e_spread: 0.1,
            spread_kind: SpreadKind::UniformHalfwidth,
            drive_i: 0.0,
            connectivity: Connectivity::Bernoulli,
            p_ei: 0.5,
            p_ie: 0.5,
            g_ei: presets::PING_G_EI,
            g_ie: presets::PING_G_IE,
            g_ii: 0.0,
            tau_exc: 2.0,
            tau_inh: 10.0,
            noise_rate: 0.0,
            noise_amplitude: presets::PING_NOISE_AMPLITUDE,
            low_drive_e: presets::PING_LOW_DRIVE_E,
            gamma_drive_e: presets::PING_GAMMA_DRIVE_E,
            protective_g_ii: presets::PING_PROTECTIVE_G_II,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SparseSection {
    /// Mean number of inputs per cell in each E<->I block.
    pub in_degree: usize,
    pub n_e: usize,
    pub n_i: usize,
    pub drive_e: f64,
    pub g_ei: f64,
    pub g_ie: f64,
    /// Run length and discarded transient for this preset; fixed in-degree
    /// networks take a few hundred ms longer to settle than the others.
    pub duration_ms: f64,
    pub transient_ms: f64,
}

impl Default for SparseSection {
    fn default() -> Self {
        Self {
            in_degree: 10,
            n_e: presets::SPARSE_N_E,
            n_i: presets::SPARSE_N_I,
            drive_e: presets::SPARSE_DRIVE_E,
            g_ei: presets::SPARSE_G_EI,
            g_ie: presets::SPARSE_G_IE,
            duration_ms: 1000.0,
            transient_ms: 400.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    Theta,
    FastFiring,
    Excitatory,
    ExcitatoryAdapted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Excitation,
    Inhibition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrcSection {
    pub cell: CellKind,
    pub drive: f64,
    pub coupling: Coupling,
    pub tau_decay: f64,
    pub strength: f64,
    pub n_phases: usize,
    /// Also run the direct two-cell simulation.
    pub pair_check: bool,
}

impl Default for PrcSection {
    fn default() -> Self {
        Self {
            cell: CellKind::FastFiring,
            drive: 1.0,
            coupling: Coupling::Inhibition,
            tau_decay: 10.0,
            strength: 0.05,
            n_phases: 50,
            pair_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiSection {
    pub cells: Vec<CellKind>,
    pub n_steps: usize,
}

impl Default for FiSection {
    fn default() -> Self {
        Self {
            cells: vec![CellKind::Theta, CellKind::FastFiring, CellKind::ExcitatoryAdapted],
            n_steps: 11,
        }
    }
}

/// Where a parameter value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    User,
}

/// Parsed configuration plus the user-set keys (dotted paths).
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub user_keys: Vec<String>,
}

impl LoadedConfig {
    /// Every leaf parameter with its value and source, in key order.
    pub fn parameters(&self) -> Vec<(String, serde_json::Value, Source)> {
        // JSON rather than TOML: derived seeds exceed TOML's i64 range
        let full = serde_json::to_value(&self.config).expect("config serializes");
        let mut out = Vec::new();
        flatten("", &full, &mut out);
        out.into_iter()
            .map(|(k, v)| {
                let src = if self.user_keys.contains(&k) {
                    Source::User
                } else {
                    Source::Default
                };
                (k, v, src)
            })
            .collect()
    }
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, serde_json::Value)>) {
    match v {
        serde_json::Value::Object(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

/// Parses a configuration document strictly: unknown keys, type mismatches
/// and out-of-range values are errors naming the key and line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    load(text, &[]).map(|l| l.config)
}

/// Parses `text`, applies `key=value` overrides and validates the result.
pub fn load(text: &str, overrides: &[String]) -> Result<LoadedConfig, ConfigError> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    if !overrides.is_empty() {
        // report problems in the file against its own line numbers first
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        validate_ranges(&config, text)?;
    }
    for o in overrides {
        let (key, value) = parse_override(o)?;
        set_path(&mut table, &key, value)?;
    }
    from_table(table, Some(text))
}

/// Validates an already-assembled table (sweep children).
pub fn from_table(table: Table, text: Option<&str>) -> Result<LoadedConfig, ConfigError> {
    let mut user_keys = Vec::new();
    collect_keys("", &table, &mut user_keys);
    // Round-tripping through a string keeps toml's line-numbered messages
    // for documents read from disk.
    let rendered;
    let source = match text {
        Some(t) if table_matches(t, &table) => t,
        _ => {
            rendered = toml::to_string(&table).map_err(|e| ConfigError::Parse(e.to_string()))?;
            rendered.as_str()
        }
    };
    let config: ExperimentConfig = toml::from_str(source).map_err(|e| ConfigError::Parse(e.to_string()))?;
    validate(&config, source)?;
    Ok(LoadedConfig { config, user_keys })
}

fn table_matches(text: &str, table: &Table) -> bool {
    text.parse::<Table>().map(|t| &t == table).unwrap_or(false)
}

fn collect_keys(prefix: &str, t: &Table, out: &mut Vec<String>) {
    for (k, v) in t {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) => collect_keys(&key, inner, out),
            _ => out.push(key),
        }
    }
}

pub fn parse_override(s: &str) -> Result<(String, Value), ConfigError> {
    let (key, raw) = s.split_once('=').ok_or_else(|| ConfigError::BadOverride(s.into()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::BadOverride(s.into()));
    }
    Ok((key.to_string(), parse_value(raw.trim())))
}

/// A TOML value, or a bare string when `raw` is not valid TOML
/// (`--set experiment=ping`).
pub fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Sets a dotted path, creating intermediate tables.
pub fn set_path(table: &mut Table, path: &str, value: Value) -> Result<(), ConfigError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let leaf = parts.pop().expect("split yields one part");
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => {
                return Err(ConfigError::Invalid {
                    key: path.into(),
                    line: None,
                    reason: format!("`{p}` is not a section"),
                })
            }
        };
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}

/// Line (1-based) of `key = ...` inside its section, if present in `text`.
fn line_of(text: &str, path: &str) -> Option<usize> {
    let (section, key) = match path.rsplit_once('.') {
        Some((s, k)) => (s, k),
        None => ("", path),
    };
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn validate_ranges(c: &ExperimentConfig, text: &str) -> Result<(), ConfigError> {
    let mut errors: Vec<(&str, String)> = Vec::new();
    let mut check = |ok: bool, key: &'static str, reason: &str| {
        if !ok {
            errors.push((key, reason.to_string()));
        }
    };
    let positive = |x: f64| x > 0.0 && x.is_finite();
    let nonneg = |x: f64| x >= 0.0 && x.is_finite();
    let prob = |x: f64| (0.0..=1.0).contains(&x);

    check(positive(c.run.duration_ms), "run.duration_ms", "must be > 0");
    check(positive(c.run.dt_ms), "run.dt_ms", "must be > 0");
    check(
        nonneg(c.run.transient_ms) && c.run.transient_ms < c.run.duration_ms,
        "run.transient_ms",
        "must be >= 0 and below run.duration_ms",
    );
    check(c.run.repeats >= 1, "run.repeats", "must be >= 1");
    check(!c.theta.drives.is_empty(), "theta.drives", "must not be empty");
    check(c.theta.drives.iter().all(|&i| positive(i)), "theta.drives", "drives must be > 0");
    check(c.theta.quiescent_drive < 0.0, "theta.quiescent_drive", "must be < 0");
    check(positive(c.theta.dt_ms), "theta.dt_ms", "must be > 0");
    check(c.theta.periods >= 2, "theta.periods", "must be >= 2");
    check(positive(c.river.bias), "river.bias", "must be > 0");
    check(positive(c.river.tau_ms), "river.tau_ms", "must be > 0");
    check(c.river.g_values.iter().all(|&g| nonneg(g)), "river.g_values", "must be >= 0");
    check(c.river.ensemble_size >= 2, "river.ensemble_size", "must be >= 2");
    check(positive(c.river.spread0), "river.spread0", "must be > 0");
    check(c.ing.n >= 1, "ing.n", "must be >= 1");
    check(nonneg(c.ing.drive_spread), "ing.drive_spread", "must be >= 0");
    check(positive(c.ing.tau_decay), "ing.tau_decay", "must be > 0");
    check(nonneg(c.ing.g_ii), "ing.g_ii", "must be >= 0");
    check(prob(c.ing.p), "ing.p", "must lie in [0, 1]");
    check(c.ing.taus.iter().all(|&t| positive(t)), "ing.taus", "must be > 0");
    check(c.ing.spreads.iter().all(|&s| nonneg(s)), "ing.spreads", "must be >= 0");
    check(c.ping.n_e >= 1, "ping.n_e", "must be >= 1");
    check(c.ping.n_i >= 1, "ping.n_i", "must be >= 1");
    check(nonneg(c.ping.drive_e_spread), "ping.drive_e_spread", "must be >= 0");
    check(prob(c.ping.p_ei), "ping.p_ei", "must lie in [0, 1]");
    check(prob(c.ping.p_ie), "ping.p_ie", "must lie in [0, 1]");
    check(nonneg(c.ping.g_ei), "ping.g_ei", "must be >= 0");
    check(nonneg(c.ping.g_ie), "ping.g_ie", "must be >= 0");
    check(nonneg(c.ping.g_ii), "ping.g_ii", "must be >= 0");
    check(positive(c.ping.tau_exc), "ping.tau_exc", "must be > 0");
    check(positive(c.ping.tau_inh), "ping.tau_inh", "must be > 0");
    check(nonneg(c.ping.noise_rate), "ping.noise_rate", "must be >= 0");
    check(nonneg(c.ping.protective_g_ii), "ping.protective_g_ii", "must be >= 0");
    check(c.sparse.in_degree >= 1, "sparse.in_degree", "must be >= 1");
    check(c.sparse.in_degree <= c.sparse.n_e.min(c.sparse.n_i), "sparse.in_degree", "exceeds a population size");
    check(positive(c.sparse.duration_ms), "sparse.duration_ms", "must be > 0");
    check(
        nonneg(c.sparse.transient_ms) && c.sparse.transient_ms < c.sparse.duration_ms,
        "sparse.transient_ms",
        "must be >= 0 and below sparse.duration_ms",
    );
    check(positive(c.prc.tau_decay), "prc.tau_decay", "must be > 0");
    check(nonneg(c.prc.strength), "prc.strength", "must be >= 0");
    check(c.prc.n_phases >= 16, "prc.n_phases", "must be >= 16");
    check(!c.fi.cells.is_empty(), "fi.cells", "must not be empty");
    check(c.fi.n_steps >= 2, "fi.n_steps", "must be >= 2");

    if let Some((key, reason)) = errors.into_iter().next() {
        return Err(ConfigError::Invalid {
            key: key.into(),
            line: line_of(text, key),
            reason,
        });
    }
    Ok(())
}

fn validate(c: &ExperimentConfig, text: &str) -> Result<(), ConfigError> {
    validate_ranges(c, text)?;
    if !presets::is_experiment(&c.experiment) {
        return Err(ConfigError::UnknownExperiment(c.experiment.clone()));
    }
    Ok(())
}

/// Sweep axes file: `[[axis]]` tables with a dotted `path` and `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesFile {
    #[serde(rename = "axis", default)]
    pub axes: Vec<Axis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

pub fn parse_axes(text: &str) -> Result<Vec<Axis>, ConfigError> {
    let f: AxesFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    for a in &f.axes {
        if a.values.is_empty() {
            return Err(ConfigError::Invalid {
                key: a.path.clone(),
                line: None,
                reason: "axis has no values".into(),
            });
        }
    }
    Ok(f.axes)
}

/// Cartesian expansion of `axes` over a base document, last axis fastest.
/// Each child is the base table with one value per axis substituted.
pub fn expand(base: &Table, axes: &[Axis]) -> Result<Vec<(BTreeMap<String, Value>, Table)>, ConfigError> {
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let mut out = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut picks = BTreeMap::new();
        let mut child = base.clone();
        for a in axes.iter().rev() {
            let v = a.values[rem % a.values.len()].clone();
            rem /= a.values.len();
            set_path(&mut child, &a.path, v.clone())?;
            picks.insert(a.path.clone(), v);
        }
        out.push((picks, child));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn misspelled_key_named_with_line() {
        let err = parse_config("experiment = \"ing\"\n[ing]\nn = 10\ntau_decya = 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("tau_decya"), "{msg}");
        assert!(msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn type_mismatch_names_key() {
        let msg = parse_config("[run]\ndt_ms = \"fast\"\n").unwrap_err().to_string();
        assert!(msg.contains("dt_ms") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn out_of_range_names_key_and_line() {
        let msg = parse_config("[ping]\n\np_ei = 1.5\n").unwrap_err().to_string();
        assert!(msg.contains("ping.p_ei") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn unknown_experiment() {
        assert!(matches!(
            parse_config("experiment = \"pong\""),
            Err(ConfigError::UnknownExperiment(_))
        ));
    }

    #[test]
    fn overrides_are_user_keys() {
        let l = load("", &["ing.tau_decay=20".into(), "experiment=ping".into()]).unwrap();
        assert_eq!(l.config.ing.tau_decay, 20.0);
        assert_eq!(l.config.experiment, "ping");
        let params = l.parameters();
        let src = |k: &str| params.iter().find(|p| p.0 == k).unwrap().2;
        assert_eq!(src("ing.tau_decay"), Source::User);
        assert_eq!(src("ing.n"), Source::Default);
    }

    #[test]
    fn sweep_children_differ_in_one_key() {
        let axes = parse_axes("[[axis]]\npath = \"ping.tau_inh\"\nvalues = [5.0, 10.0, 20.0]\n").unwrap();
        let kids = expand(&Table::new(), &axes).unwrap();
        assert_eq!(kids.len(), 3);
        let configs: Vec<ExperimentConfig> = kids
            .into_iter()
            .map(|(_, t)| from_table(t, None).unwrap().config)
            .collect();
        for (c, tau) in configs.iter().zip([5.0, 10.0, 20.0]) {
            let mut expected = ExperimentConfig::default();
            expected.ping.tau_inh = tau;
            assert_eq!(*c, expected);
        }
    }

    #[test]
    fn two_axes_give_product() {
        let axes = parse_axes(
            "[[axis]]\npath = \"ing.g_ii\"\nvalues = [0.1, 0.2, 0.3]\n[[axis]]\npath = \"ing.tau_decay\"\nvalues = [5, 10, 15, 20]\n",
        )
        .unwrap();
        assert_eq!(expand(&Table::new(), &axes).unwrap().len(), 12);
    }
}
