//! Preset registry and experiment runners. Each runner is a pure function of
//! its configuration; per-run seeds are `derive_seed(config.seed, k)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rhythmkit::analysis::{
    build_spike_time_map, classify_excitability, pair_synchronizes, river_compression, river_first_spikes,
    spike_time_response, synchrony_report, ExcitabilityClass, Window,
};
use rhythmkit::cells::{self, NeuronSpec, SynapseSpec};
use rhythmkit::dynamics::{simulate, RecordingOptions, Simulator};
use rhythmkit::network::{
    build_ing, build_ping, probe_mechanism, ConnectivityRule, HeterogeneitySpec, IngParams, NetworkBuilder,
    NetworkSystem, PingNoise, PingParams, Population, LABEL_E,
};
use rhythmkit::rng::derive_seed;
use serde::Serialize;

use crate::config::{CellKind, Connectivity, Coupling, ExperimentConfig, IngSection, PingSection, SpreadKind};

pub const ING_G_II: f64 = 0.15;
pub const ING_GAMMA_DRIVE: f64 = 1.25;
pub const ING_LOW_DRIVE: f64 = 0.435;

pub const PING_G_EI: f64 = 0.5;
pub const PING_G_IE: f64 = 1.5;
pub const PING_LOW_DRIVE_E: f64 = 1.0;
pub const PING_GAMMA_DRIVE_E: f64 = 5.0;
pub const PING_NOISE_AMPLITUDE: f64 = 3.0;
pub const PING_NOISE_RATE: f64 = 0.05;
pub const PING_PROTECTIVE_G_II: f64 = 0.25;

pub const SPARSE_N_E: usize = 100;
pub const SPARSE_N_I: usize = 25;
pub const SPARSE_DRIVE_E: f64 = 1.0;
pub const SPARSE_G_EI: f64 = 0.5;
pub const SPARSE_G_IE: f64 = 1.0;

/// Registered presets with one-line descriptions.
pub const PRESETS: &[(&str, &str)] = &[
    ("theta-period", "theta cell period against the analytic value pi/sqrt(I)"),
    ("theta-river", "first-spike compression of a theta ensemble under decaying inhibition"),
    ("ing-freq-vs-tau", "ING frequency over inhibitory decay times"),
    ("ing-heterogeneity", "ING coherence under drive spread at gamma and 15 Hz bias"),
    ("ping-minimal", "one E-cell and one I-cell PING cycle"),
    ("ping-heterogeneity", "PING against ING coherence at matched drive spread"),
    ("ping-noise", "noise on I-cells at low-frequency and gamma PING"),
    ("ping-noise-ii", "low-frequency PING noise sensitivity with and without I-I coupling"),
    ("sparse-ping", "sparse PING with fixed in-degree against Bernoulli coupling"),
    ("prc-map", "spike-time response curve, spike-time map and pair simulation"),
    ("fi-classify", "f-I curves and Type I / Type II classification"),
];

/// Single-network experiments, used directly or as sweep children.
pub const NETWORK_KINDS: &[(&str, &str)] = &[
    ("ing", "one ING network from the [ing] section"),
    ("ping", "one PING network from the [ping] section"),
];

pub fn is_experiment(name: &str) -> bool {
    PRESETS.iter().chain(NETWORK_KINDS).any(|(n, _)| *n == name)
}

#[derive(Debug, thiserror::Error)]
#[error("{experiment}: {source}")]
pub struct ExperimentError {
    pub experiment: String,
    #[source]
    pub source: rhythmkit::Error,
}

impl ExperimentError {
    /// Parameter problems surfaced by the library, as opposed to numerical
    /// failures.
    pub fn is_config(&self) -> bool {
        matches!(self.source, rhythmkit::Error::Config(_) | rhythmkit::Error::Template(_))
    }
}

/// A CSV artifact: file name, header and rows of already formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: &str, header: &[&str]) -> Self {
        Self {
            file: file.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Formats a number with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

/// One line of summary.csv. A run without a detectable rhythm has no
/// frequency and index 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub run_id: String,
    pub frequency_hz: Option<f64>,
    pub synchrony_index: f64,
    pub participation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: u64,
    #[serde(skip)]
    pub spikes: Vec<Vec<f64>>,
}

/// A named pass/fail statement about the outcome of a preset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summary: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
    pub claims: Vec<Claim>,
    pub warnings: Vec<String>,
}

impl ExperimentOutput {
    fn claim(&mut self, name: &str, holds: bool, detail: String) {
        self.claims.push(Claim {
            name: name.into(),
            holds,
            detail,
        });
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn summary_row(&self, run_id: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.run_id == run_id)
    }
}

type Res<T> = rhythmkit::Result<T>;

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let name = config.experiment.as_str();
    let out = match name {
        "theta-period" => theta_period(config),
        "theta-river" => theta_river(config),
        "ing-freq-vs-tau" => ing_freq_vs_tau(config),
        "ing-heterogeneity" => ing_heterogeneity(config),
        "ping-minimal" => ping_minimal(config),
        "ping-heterogeneity" => ping_heterogeneity(config),
        "ping-noise" => ping_noise(config),
        "ping-noise-ii" => ping_noise_ii(config),
        "sparse-ping" => sparse_ping(config),
        "prc-map" => prc_map(config),
        "fi-classify" => fi_classify(config),
        "ing" => single_ing(config),
        "ping" => single_ping(config),
        other => Err(rhythmkit::Error::Config(format!("unknown experiment `{other}`"))),
    };
    out.map_err(|source| ExperimentError {
        experiment: name.to_string(),
        source,
    })
}

// ---- shared network plumbing ----

pub fn neuron(kind: CellKind) -> NeuronSpec {
    match kind {
        CellKind::Theta => cells::make_theta_cell(),
        CellKind::FastFiring => cells::make_fast_firing_interneuron(),
        CellKind::Excitatory => cells::make_excitatory_cell(false),
        CellKind::ExcitatoryAdapted => cells::make_excitatory_cell(true),
    }
}

fn cell_name(kind: CellKind) -> &'static str {
    match kind {
        CellKind::Theta => "theta",
        CellKind::FastFiring => "fast-firing",
        CellKind::Excitatory => "excitatory",
        CellKind::ExcitatoryAdapted => "excitatory-adapted",
    }
}

/// Drive interval used to classify each template: wide enough to straddle
/// the onset, narrow enough that 1% of it stays close to onset.
pub fn classification_interval(kind: CellKind) -> (f64, f64) {
    match kind {
        CellKind::Theta => (-0.01, 0.01),
        CellKind::FastFiring | CellKind::Excitatory => (0.0, 1.0),
        CellKind::ExcitatoryAdapted => (2.0, 3.5),
    }
}

fn drive_spec(kind: SpreadKind, mean: f64, fraction: f64, seed: u64) -> HeterogeneitySpec {
    let width = fraction * mean.abs();
    match kind {
        _ if fraction == 0.0 => HeterogeneitySpec::homogeneous(mean),
        SpreadKind::None => HeterogeneitySpec::homogeneous(mean),
        SpreadKind::UniformHalfwidth => HeterogeneitySpec::uniform(mean, width, seed),
        SpreadKind::GaussianSigma => HeterogeneitySpec::gaussian(mean, width, seed),
    }
}

fn rule(kind: Connectivity, p: f64, k: usize) -> ConnectivityRule {
    match kind {
        Connectivity::AllToAll => ConnectivityRule::AllToAll,
        Connectivity::Bernoulli => ConnectivityRule::Bernoulli { p },
        Connectivity::FixedInDegree => ConnectivityRule::FixedInDegree { k },
    }
}

/// Coherence statistics of one run over the post-transient window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rhythm {
    pub frequency_hz: Option<f64>,
    pub synchrony_index: f64,
    pub participation: f64,
}

pub fn rhythm(trains: &[Vec<f64>], config: &ExperimentConfig) -> Res<Rhythm> {
    let window = Window::new(config.run.transient_ms, config.run.duration_ms);
    match synchrony_report(trains, window) {
        Ok(r) => Ok(Rhythm {
            frequency_hz: Some(r.frequency_hz),
            synchrony_index: r.synchrony_index,
            participation: r.participation,
        }),
        Err(rhythmkit::Error::UndefinedFrequency) => Ok(Rhythm {
            frequency_hz: None,
            synchrony_index: 0.0,
            participation: 0.0,
        }),
        Err(e) => Err(e),
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Mean over repeats; frequency averaged over the runs that have one.
fn mean_rhythm(rs: &[Rhythm]) -> Rhythm {
    let freqs: Vec<f64> = rs.iter().filter_map(|r| r.frequency_hz).collect();
    Rhythm {
        frequency_hz: (!freqs.is_empty()).then(|| mean(freqs)),
        synchrony_index: mean(rs.iter().map(|r| r.synchrony_index)),
        participation: mean(rs.iter().map(|r| r.participation)),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A network run queued by a preset: built lazily so runs can execute in
/// parallel.
struct Job {
    run_id: String,
    seed: u64,
    build: Box<dyn Fn(u64) -> Res<(NetworkSystem, Vec<String>)> + Send + Sync>,
    /// Population analysed for coherence; all cells when `None`.
    analysed: Option<&'static str>,
}

struct Done {
    rhythm: Rhythm,
    record: RunRecord,
    warnings: Vec<String>,
}

fn execute(jobs: Vec<Job>, config: &ExperimentConfig) -> Res<Vec<Done>> {
    jobs.into_par_iter()
        .map(|job| {
            let (system, warnings) = (job.build)(job.seed)?;
            let result = simulate(
                &system,
                config.run.duration_ms,
                config.run.dt_ms,
                &RecordingOptions::spikes_only(),
                job.seed,
            )?;
            let trains = match job.analysed {
                Some(label) => system
                    .population_trains(label, &result.spike_trains)
                    .expect("population exists")
                    .to_vec(),
                None => result.spike_trains.clone(),
            };
            Ok(Done {
                rhythm: rhythm(&trains, config)?,
                record: RunRecord {
                    run_id: job.run_id,
                    seed: job.seed,
                    spikes: result.spike_trains,
                },
                warnings,
            })
        })
        .collect()
}

fn record(out: &mut ExperimentOutput, done: Vec<Done>) -> Vec<Rhythm> {
    let mut rhythms = Vec::with_capacity(done.len());
    for d in done {
        out.summary.push(SummaryRow {
            run_id: d.record.run_id.clone(),
            frequency_hz: d.rhythm.frequency_hz,
            synchrony_index: d.rhythm.synchrony_index,
            participation: d.rhythm.participation,
        });
        for w in d.warnings {
            if !out.warnings.contains(&w) {
                out.warnings.push(w);
            }
        }
        out.runs.push(d.record);
        rhythms.push(d.rhythm);
    }
    rhythms
}

pub fn ing_params(c: &IngSection, drive: f64, spread: f64, tau: f64, seed: u64) -> IngParams {
    IngParams {
        n: c.n,
        drive: drive_spec(c.spread_kind, drive, spread, derive_seed(seed, 7)),
        tau_decay: tau,
        g_ii: c.g_ii,
        rule: rule(c.connectivity, c.p, c.in_degree),
        seed,
    }
}

fn ing_job(c: &IngSection, run_id: String, seed: u64, drive: f64, spread: f64, tau: f64) -> Job {
    let c = c.clone();
    Job {
        run_id,
        seed,
        build: Box::new(move |s| Ok((build_ing(&ing_params(&c, drive, spread, tau, s))?, Vec::new()))),
        analysed: None,
    }
}

pub fn ping_params(c: &PingSection, drive_e: f64, seed: u64) -> PingParams {
    PingParams {
        n_e: c.n_e,
        n_i: c.n_i,
        drive_e: drive_spec(c.spread_kind, drive_e, c.drive_e_spread, derive_seed(seed, 7)),
        drive_i: HeterogeneitySpec::homogeneous(c.drive_i),
        rule_ei: rule(c.connectivity, c.p_ei, (c.p_ei * c.n_e as f64).round() as usize),
        rule_ie: rule(c.connectivity, c.p_ie, (c.p_ie * c.n_i as f64).round() as usize),
        g_ei: c.g_ei,
        g_ie: c.g_ie,
        g_ii: (c.g_ii > 0.0).then_some(c.g_ii),
        rule_ii: ConnectivityRule::AllToAll,
        tau_exc: c.tau_exc,
        tau_inh: c.tau_inh,
        noise: (c.noise_rate > 0.0).then_some(PingNoise {
            rate: c.noise_rate,
            amplitude: c.noise_amplitude,
        }),
        seed,
    }
}

fn ping_job_from(params: impl Fn(u64) -> PingParams + Send + Sync + 'static, run_id: String, seed: u64) -> Job {
    Job {
        run_id,
        seed,
        build: Box::new(move |s| {
            let built = build_ping(&params(s))?;
            Ok((built.system, built.warnings))
        }),
        analysed: Some(LABEL_E),
    }
}

fn ping_job(c: &PingSection, run_id: String, seed: u64, drive_e: f64) -> Job {
    let c = c.clone();
    ping_job_from(move |s| ping_params(&c, drive_e, s), run_id, seed)
}

fn seed_for(config: &ExperimentConfig, k: usize) -> u64 {
    derive_seed(config.seed, k as u64)
}

// ---- presets ----

fn theta_period(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.theta;
    let mut out = ExperimentOutput::default();
    let mut table = Table::new(
        "period.csv",
        &["drive", "measured_period_ms", "analytic_period_ms", "relative_error"],
    );
    let mut worst: f64 = 0.0;
    for (k, &drive) in c.drives.iter().enumerate() {
        let analytic = PI / drive.sqrt();
        let system = theta_cell(drive)?;
        let seed = seed_for(config, k);
        let r = simulate(
            &system,
            (c.periods as f64 + 1.0) * analytic,
            c.dt_ms,
            &RecordingOptions::spikes_only(),
            seed,
        )?;
        let train = &r.spike_trains[0];
        let measured = if train.len() >= 2 {
            (train[train.len() - 1] - train[0]) / (train.len() - 1) as f64
        } else {
            f64::NAN
        };
        let err = (measured - analytic).abs() / analytic;
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        table.push(vec![num(drive), num(measured), num(analytic), num(err)]);
        out.runs.push(RunRecord {
            run_id: format!("drive={drive}"),
            seed,
            spikes: r.spike_trains,
        });
    }
    out.claim("period within 1e-3 of pi/sqrt(I)", worst < 1e-3, format!("max relative error {worst:e}"));

    // quiescence: start at the stable fixed point and check it stays put
    let i = c.quiescent_drive;
    let fixed = 2.0 * PI - ((1.0 + i) / (1.0 - i)).acos();
    let system = theta_cell(i)?;
    let mut sim = Simulator::with_state(&system, vec![fixed], c.dt_ms, config.seed)?;
    sim.run_until(100.0)?;
    let last = sim.state()[0];
    let spikes = sim.spikes()[0].len();
    let mut q = Table::new("quiescence.csv", &["drive", "fixed_point_rad", "final_phase_rad", "spikes"]);
    q.push(vec![num(i), num(fixed), num(last), spikes.to_string()]);
    out.claim(
        "quiescent at the stable fixed point",
        spikes == 0 && (last - fixed).abs() < 1e-9,
        format!("drift {:e} rad, {spikes} spikes", (last - fixed).abs()),
    );
    out.tables.push(table);
    out.tables.push(q);
    Ok(out)
}

fn theta_cell(drive: f64) -> Res<NetworkSystem> {
    NetworkBuilder::new()
        .population(Population::new(
            "theta",
            cells::make_theta_cell(),
            1,
            &HeterogeneitySpec::homogeneous(drive),
        )?)
        .build()
}

fn theta_river(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.river;
    let mut out = ExperimentOutput::default();
    let mut ratios = Table::new("river.csv", &["g", "compression_ratio"]);
    let mut spikes = Table::new("first_spikes.csv", &["g", "member", "theta0_rad", "first_spike_ms"]);
    let mut values = Vec::new();
    for &g in &c.g_values {
        let ratio = river_compression(c.bias, g, c.tau_ms, c.ensemble_size, c.spread0)?;
        ratios.push(vec![num(g), num(ratio)]);
        values.push((g, ratio));
        for (k, t) in river_first_spikes(c.bias, g, c.tau_ms, c.ensemble_size, c.spread0)?
            .into_iter()
            .enumerate()
        {
            let theta0 = c.spread0 * ((k as f64 + 0.5) / c.ensemble_size as f64 - 0.5);
            spikes.push(vec![num(g), k.to_string(), num(theta0), num(t)]);
        }
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    out.claim(
        "compression nonincreasing in g",
        monotone,
        format!("{:?}", sorted.iter().map(|p| p.1).collect::<Vec<_>>()),
    );
    out.tables.push(ratios);
    out.tables.push(spikes);
    Ok(out)
}

fn ing_freq_vs_tau(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.ing;
    let mut jobs = Vec::new();
    for &tau in &c.taus {
        for r in 0..config.run.repeats {
            let id = format!("tau={tau}/rep={r}");
            jobs.push(ing_job(c, id, seed_for(config, r), c.drive, c.drive_spread, tau));
        }
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let mut table = Table::new("freq_vs_tau.csv", &["tau_ms", "frequency_hz", "synchrony_index", "participation"]);
    let mut freqs = Vec::new();
    for (i, &tau) in c.taus.iter().enumerate() {
        let m = mean_rhythm(&rhythms[i * config.run.repeats..(i + 1) * config.run.repeats]);
        table.push(vec![num(tau), opt(m.frequency_hz), num(m.synchrony_index), num(m.participation)]);
        freqs.push((tau, m.frequency_hz.unwrap_or(f64::NAN)));
    }
    freqs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = freqs.windows(2).all(|w| w[1].1 < w[0].1);
    out.claim(
        "frequency strictly decreasing in tau",
        decreasing,
        format!("{:?}", freqs.iter().map(|f| f.1).collect::<Vec<_>>()),
    );
    out.tables.push(table);
    Ok(out)
}

fn ing_heterogeneity(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.ing;
    let biases = [("gamma", c.gamma_drive), ("low", c.low_drive)];
    let reps = config.run.repeats;
    let mut jobs = Vec::new();
    for (name, drive) in biases {
        for &spread in &c.spreads {
            for r in 0..reps {
                // repeats share seeds across conditions (paired comparison)
                let id = format!("{name}/spread={spread}/rep={r}");
                jobs.push(ing_job(c, id, seed_for(config, r), drive, spread, c.tau_decay));
            }
        }
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let mut table = Table::new(
        "heterogeneity.csv",
        &["bias", "drive", "spread", "frequency_hz", "synchrony_index", "participation"],
    );
    let mut chunks = rhythms.chunks(reps);
    let mut by_bias = Vec::new();
    for (name, drive) in biases {
        let mut series = Vec::new();
        for &spread in &c.spreads {
            let m = mean_rhythm(chunks.next().expect("one chunk per condition"));
            table.push(vec![
                name.into(),
                num(drive),
                num(spread),
                opt(m.frequency_hz),
                num(m.synchrony_index),
                num(m.participation),
            ]);
            series.push((spread, m.synchrony_index));
        }
        by_bias.push(series);
    }
    // degradation = homogeneous index minus index at the largest spread
    let degradation = |s: &Vec<(f64, f64)>| {
        let lo = s.iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|p| p.1).unwrap_or(f64::NAN);
        let hi = s.iter().max_by(|a, b| a.0.total_cmp(&b.0)).map(|p| p.1).unwrap_or(f64::NAN);
        lo - hi
    };
    let (dg, dl) = (degradation(&by_bias[0]), degradation(&by_bias[1]));
    out.claim(
        "coherence degrades faster at 15 Hz bias than at gamma bias",
        dl > dg,
        format!("index loss gamma {dg:.3}, low {dl:.3}"),
    );
    out.tables.push(table);
    Ok(out)
}

fn ping_minimal(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.ping;
    let params = PingParams {
        n_e: 1,
        n_i: 1,
        drive_e: HeterogeneitySpec::homogeneous(c.drive_e),
        drive_i: HeterogeneitySpec::homogeneous(c.drive_i),
        rule_ei: ConnectivityRule::AllToAll,
        rule_ie: ConnectivityRule::AllToAll,
        g_ei: c.g_ei,
        g_ie: c.g_ie,
        g_ii: None,
        rule_ii: ConnectivityRule::AllToAll,
        tau_exc: c.tau_exc,
        tau_inh: c.tau_inh,
        noise: None,
        seed: config.seed,
    };
    let mut out = ExperimentOutput::default();
    let mechanism = probe_mechanism(&params, config.run.duration_ms)?;
    let built = build_ping(&params)?;
    out.warnings.extend(built.warnings);
    let r = simulate(
        &built.system,
        config.run.duration_ms,
        config.run.dt_ms,
        &RecordingOptions::spikes_only(),
        config.seed,
    )?;
    let (e, i) = (&r.spike_trains[0], &r.spike_trains[1]);
    let mut table = Table::new("minimal.csv", &["e_spike_ms", "i_spike_ms", "e_to_i_delay_ms", "e_period_ms"]);
    let mut delays = Vec::new();
    for (k, &te) in e.iter().enumerate() {
        let ti = i.iter().copied().find(|&t| t >= te);
        let next = e.get(k + 1).map(|&n| n - te);
        if let Some(ti) = ti {
            if next.is_none_or(|_| ti < e[k + 1]) {
                delays.push(ti - te);
            }
        }
        table.push(vec![num(te), opt(ti), opt(ti.map(|t| t - te)), opt(next)]);
    }
    let paced = e.len() >= 3 && delays.len() + 1 >= e.len() && delays.iter().all(|&d| d < 10.0);
    out.claim(
        "each E spike recruits the I-cell within a few ms",
        paced,
        format!("{} E spikes, delays {:?}", e.len(), delays),
    );
    out.claim(
        "I-cell silent without E input",
        mechanism == rhythmkit::network::Mechanism::Ping,
        format!("{mechanism:?}"),
    );
    out.summary.push(SummaryRow {
        run_id: "minimal".into(),
        frequency_hz: (e.len() >= 2).then(|| 1000.0 * (e.len() - 1) as f64 / (e[e.len() - 1] - e[0])),
        synchrony_index: 1.0,
        participation: 1.0,
    });
    out.runs.push(RunRecord {
        run_id: "minimal".into(),
        seed: config.seed,
        spikes: r.spike_trains.clone(),
    });
    out.tables.push(table);
    Ok(out)
}

fn ping_heterogeneity(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let (p, i) = (&config.ping, &config.ing);
    let spread = p.drive_e_spread;
    let reps = config.run.repeats;
    let mut jobs = Vec::new();
    for r in 0..reps {
        jobs.push(ping_job(p, format!("ping/rep={r}"), seed_for(config, r), p.drive_e));
    }
    let mut matched = i.clone();
    matched.spread_kind = p.spread_kind;
    for r in 0..reps {
        jobs.push(ing_job(&matched, format!("ing/rep={r}"), seed_for(config, r), i.low_drive, spread, i.tau_decay));
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let ping = mean_rhythm(&rhythms[..reps]);
    let ing = mean_rhythm(&rhythms[reps..]);
    let mut table = Table::new(
        "contrast.csv",
        &["network", "drive", "spread", "frequency_hz", "synchrony_index", "participation"],
    );
    table.push(vec!["ping".into(), num(p.drive_e), num(spread), opt(ping.frequency_hz), num(ping.synchrony_index), num(ping.participation)]);
    table.push(vec!["ing".into(), num(i.low_drive), num(spread), opt(ing.frequency_hz), num(ing.synchrony_index), num(ing.participation)]);
    out.claim(
        "PING stays coherent under drive spread",
        ping.synchrony_index >= 0.8,
        format!("index {:.3}", ping.synchrony_index),
    );
    out.claim(
        "PING more coherent than ING at matched spread",
        ping.synchrony_index - ing.synchrony_index >= 0.2,
        format!("PING {:.3} ING {:.3}", ping.synchrony_index, ing.synchrony_index),
    );
    out.tables.push(table);
    Ok(out)
}

/// Clean and noisy runs at one E-drive; returns (clean, noisy).
fn noise_pair(
    config: &ExperimentConfig,
    section: &PingSection,
    label: &str,
    drive_e: f64,
    jobs: &mut Vec<Job>,
) {
    let rate = if section.noise_rate > 0.0 { section.noise_rate } else { PING_NOISE_RATE };
    for (variant, noisy) in [("clean", false), ("noisy", true)] {
        for r in 0..config.run.repeats {
            let mut s = section.clone();
            s.noise_rate = if noisy { rate } else { 0.0 };
            jobs.push(ping_job(&s, format!("{label}/{variant}/rep={r}"), seed_for(config, r), drive_e));
        }
    }
}

fn ping_noise(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let p = &config.ping;
    let reps = config.run.repeats;
    let regimes = [("low-frequency", p.low_drive_e), ("gamma", p.gamma_drive_e)];
    let mut jobs = Vec::new();
    for (label, drive) in regimes {
        noise_pair(config, p, label, drive, &mut jobs);
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let mut table = Table::new(
        "noise.csv",
        &["regime", "drive_e", "frequency_hz", "index_clean", "index_noisy", "drop"],
    );
    let mut drops = Vec::new();
    for (k, (label, drive)) in regimes.into_iter().enumerate() {
        let base = 2 * k * reps;
        let clean = mean_rhythm(&rhythms[base..base + reps]);
        let noisy = mean_rhythm(&rhythms[base + reps..base + 2 * reps]);
        let drop = clean.synchrony_index - noisy.synchrony_index;
        drops.push(drop);
        table.push(vec![label.into(), num(drive), opt(clean.frequency_hz), num(clean.synchrony_index), num(noisy.synchrony_index), num(drop)]);
    }
    out.claim(
        "noise breaks low-frequency PING (drop >= 0.4) but not gamma PING (drop <= 0.1)",
        drops[0] >= 0.4 && drops[1] <= 0.1,
        format!("drop low {:.3}, gamma {:.3}", drops[0], drops[1]),
    );
    out.tables.push(table);
    Ok(out)
}

fn ping_noise_ii(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let p = &config.ping;
    let reps = config.run.repeats;
    let mut with_ii = p.clone();
    with_ii.g_ii = p.protective_g_ii;
    let mut without = p.clone();
    without.g_ii = 0.0;
    let variants = [("without-ii", &without), ("with-ii", &with_ii)];
    let mut jobs = Vec::new();
    for (label, s) in variants {
        noise_pair(config, s, label, p.low_drive_e, &mut jobs);
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let mut table = Table::new(
        "noise_ii.csv",
        &["variant", "g_ii", "frequency_hz", "index_clean", "index_noisy", "drop"],
    );
    let mut drops = Vec::new();
    for (k, (label, s)) in variants.into_iter().enumerate() {
        let base = 2 * k * reps;
        let clean = mean_rhythm(&rhythms[base..base + reps]);
        let noisy = mean_rhythm(&rhythms[base + reps..base + 2 * reps]);
        let drop = clean.synchrony_index - noisy.synchrony_index;
        drops.push(drop);
        table.push(vec![label.into(), num(s.g_ii), opt(clean.frequency_hz), num(clean.synchrony_index), num(noisy.synchrony_index), num(drop)]);
    }
    out.claim(
        "I-I coupling reduces the noise-induced drop",
        drops[1] < drops[0],
        format!("drop without {:.3}, with {:.3}", drops[0], drops[1]),
    );
    out.tables.push(table);
    Ok(out)
}

fn sparse_ping(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let mut settled = config.clone();
    settled.run.duration_ms = config.sparse.duration_ms;
    settled.run.transient_ms = config.sparse.transient_ms;
    let config = &settled;
    let s = &config.sparse;
    let reps = config.run.repeats;
    let base = PingParams {
        n_e: s.n_e,
        n_i: s.n_i,
        drive_e: HeterogeneitySpec::homogeneous(s.drive_e),
        drive_i: HeterogeneitySpec::homogeneous(config.ping.drive_i),
        g_ei: s.g_ei,
        g_ie: s.g_ie,
        tau_exc: config.ping.tau_exc,
        tau_inh: config.ping.tau_inh,
        ..PingParams::default()
    };
    let k = s.in_degree;
    let rules = [
        ("fixed-in-degree", ConnectivityRule::FixedInDegree { k }, ConnectivityRule::FixedInDegree { k }),
        (
            "bernoulli",
            ConnectivityRule::Bernoulli { p: k as f64 / s.n_e as f64 },
            ConnectivityRule::Bernoulli { p: k as f64 / s.n_i as f64 },
        ),
    ];
    let mut jobs = Vec::new();
    for (label, ei, ie) in rules {
        for r in 0..reps {
            let b = base.clone();
            jobs.push(ping_job_from(
                move |seed| PingParams {
                    rule_ei: ei,
                    rule_ie: ie,
                    seed,
                    ..b.clone()
                },
                format!("{label}/rep={r}"),
                seed_for(config, r),
            ));
        }
    }
    let mut out = ExperimentOutput::default();
    let rhythms = record(&mut out, execute(jobs, config)?);
    let mut table = Table::new(
        "sparse.csv",
        &["rule", "mean_in_degree_e", "in_degree_variance_e", "frequency_hz", "synchrony_index", "participation"],
    );
    let mut indices = Vec::new();
    for (j, (label, _, ie)) in rules.into_iter().enumerate() {
        let m = mean_rhythm(&rhythms[j * reps..(j + 1) * reps]);
        // in-degree statistics of the I->E block of the first realization
        let (mu, var) = in_degree_stats(ie, s.n_i, s.n_e, seed_for(config, 0))?;
        table.push(vec![label.into(), num(mu), num(var), opt(m.frequency_hz), num(m.synchrony_index), num(m.participation)]);
        indices.push(m.synchrony_index);
    }
    out.claim(
        "fixed in-degree keeps coherence",
        indices[0] >= 0.8,
        format!("index {:.3}", indices[0]),
    );
    out.claim(
        "Bernoulli coupling is less coherent",
        indices[1] < indices[0],
        format!("fixed {:.3}, bernoulli {:.3}", indices[0], indices[1]),
    );
    out.tables.push(table);
    Ok(out)
}

fn in_degree_stats(rule: ConnectivityRule, n_source: usize, n_target: usize, seed: u64) -> Res<(f64, f64)> {
    // build_ping seeds the I->E block with derive_seed(seed, 2)
    let edges = rhythmkit::network::sample_connectivity(rule, n_source, n_target, derive_seed(seed, 2), false)?;
    let mut deg = vec![0.0; n_target];
    for (_, t) in edges {
        deg[t] += 1.0;
    }
    let mu = mean(deg.iter().copied());
    let var = mean(deg.iter().map(|d| (d - mu).powi(2)));
    Ok((mu, var))
}

fn prc_map(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.prc;
    let cell = neuron(c.cell);
    let synapse = match c.coupling {
        Coupling::Excitation => SynapseSpec::excitatory(c.strength, c.tau_decay),
        Coupling::Inhibition => SynapseSpec::inhibitory(c.strength, c.tau_decay),
    };
    let prc = spike_time_response(&cell, c.drive, &synapse, c.strength, c.n_phases)?;
    let map = build_spike_time_map(&prc, &prc, prc.period)?;
    let mut out = ExperimentOutput::default();
    let mut t = Table::new("prc.csv", &["phase", "shift_ms"]);
    let mut d = Table::new("prc_detail.csv", &["phase", "shift_ms", "second_order_ms", "asymptotic_ms"]);
    for s in &prc.samples {
        t.push(vec![num(s.phase), num(s.shift_ms)]);
        d.push(vec![num(s.phase), num(s.shift_ms), num(s.second_order_ms), num(s.asymptotic_ms)]);
    }
    let mut m = Table::new("map.csv", &["delta_in_ms", "delta_out_ms"]);
    for &(a, b) in &map.samples {
        m.push(vec![num(a), num(b)]);
    }
    let mut f = Table::new("fixed_points.csv", &["delta_ms", "slope", "stable"]);
    for fp in &map.fixed_points {
        f.push(vec![num(fp.delta_ms), num(fp.slope), fp.stable.to_string()]);
    }
    let map_stable = map.synchronous().is_some_and(|fp| fp.stable);
    out.tables.extend([t, d, m, f]);
    if c.pair_check {
        let pair = pair_synchronizes(&cell, c.drive, &synapse)?;
        let mut p = Table::new("pair.csv", &["synchronized", "final_delta_ms", "period_ms", "map_stable"]);
        p.push(vec![
            pair.synchronized.to_string(),
            num(pair.final_delta_ms),
            num(pair.period_ms),
            map_stable.to_string(),
        ]);
        out.claim(
            "map stability agrees with pair simulation",
            pair.synchronized == map_stable,
            format!("map stable {map_stable}, pair synchronized {}", pair.synchronized),
        );
        out.tables.push(p);
    }
    Ok(out)
}

fn fi_classify(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.fi;
    let reports = c
        .cells
        .par_iter()
        .map(|&kind| classify_excitability(&neuron(kind), classification_interval(kind), c.n_steps).map(|r| (kind, r)))
        .collect::<Res<Vec<_>>>()?;
    let mut out = ExperimentOutput::default();
    let mut cls = Table::new(
        "classification.csv",
        &["cell", "class", "onset_drive", "onset_rate_hz", "interval_low", "interval_high"],
    );
    let mut fi = Table::new("fi.csv", &["cell", "drive", "rate_hz"]);
    for (kind, r) in &reports {
        let (lo, hi) = classification_interval(*kind);
        let class = match r.class {
            ExcitabilityClass::TypeI => "type-i",
            ExcitabilityClass::TypeII => "type-ii",
            ExcitabilityClass::Indeterminate => "indeterminate",
        };
        cls.push(vec![cell_name(*kind).into(), class.into(), num(r.onset_drive), num(r.onset_rate_hz), num(lo), num(hi)]);
        for &(d, rate) in &r.fi_curve {
            fi.push(vec![cell_name(*kind).into(), num(d), num(rate)]);
        }
        let expected = match kind {
            CellKind::ExcitatoryAdapted => ExcitabilityClass::TypeII,
            _ => ExcitabilityClass::TypeI,
        };
        out.claim(
            &format!("{} classified {:?}", cell_name(*kind), expected),
            r.class == expected,
            format!("{:?}, onset {:.4}, {:.1} Hz", r.class, r.onset_drive, r.onset_rate_hz),
        );
    }
    out.tables.extend([cls, fi]);
    Ok(out)
}

fn single_ing(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let c = &config.ing;
    let job = ing_job(c, "ing".into(), config.seed, c.drive, c.drive_spread, c.tau_decay);
    let mut out = ExperimentOutput::default();
    record(&mut out, execute(vec![job], config)?);
    Ok(out)
}

fn single_ping(config: &ExperimentConfig) -> Res<ExperimentOutput> {
    let p = &config.ping;
    let job = ping_job(p, "ping".into(), config.seed, p.drive_e);
    let mut out = ExperimentOutput::default();
    record(&mut out, execute(vec![job], config)?);
    Ok(out)
}
