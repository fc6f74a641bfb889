//! Populations, seeded connectivity, noise sources and the assembled
//! [`NetworkSystem`]; canonical ING and PING constructions.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::OnceLock;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cells::{self, NeuronKind, NeuronSpec, Polarity, SynapseSpec};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Spread {
    None,
    UniformHalfwidth(f64),
    GaussianSigma(f64),
}

/// Distribution of constant drives across a population.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneitySpec {
    pub mean: f64,
    pub spread: Spread,
    pub seed: u64,
}

impl HeterogeneitySpec {
    pub fn homogeneous(mean: f64) -> Self {
        Self {
            mean,
            spread: Spread::None,
            seed: 0,
        }
    }

    pub fn uniform(mean: f64, halfwidth: f64, seed: u64) -> Self {
        Self {
            mean,
            spread: Spread::UniformHalfwidth(halfwidth),
            seed,
        }
    }

    pub fn gaussian(mean: f64, sigma: f64, seed: u64) -> Self {
        Self {
            mean,
            spread: Spread::GaussianSigma(sigma),
            seed,
        }
    }

    /// Per-cell drives, drawn in cell order from stream 0 of `seed`.
    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        let mut rng = rng::stream(self.seed, 0);
        match self.spread {
            Spread::None => Ok(vec![self.mean; n]),
            Spread::UniformHalfwidth(w) => {
                if !(w >= 0.0) {
                    return Err(Error::Config("drive spread must be >= 0".into()));
                }
                Ok((0..n)
                    .map(|_| self.mean + w * (2.0 * rng.random::<f64>() - 1.0))
                    .collect())
            }
            Spread::GaussianSigma(s) => {
                if !(s >= 0.0) {
                    return Err(Error::Config("drive spread must be >= 0".into()));
                }
                let normal = Normal::new(self.mean, s).map_err(|e| Error::Config(e.to_string()))?;
                Ok((0..n).map(|_| normal.sample(&mut rng)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub label: String,
    pub spec: NeuronSpec,
    /// Constant drive per cell (uA/cm^2, or bias for theta cells).
    pub drive: Vec<f64>,
}

impl Population {
    pub fn new(label: impl Into<String>, spec: NeuronSpec, n: usize, drive: &HeterogeneitySpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("population size must be >= 1".into()));
        }
        Ok(Self {
            label: label.into(),
            spec,
            drive: drive.sample(n)?,
        })
    }

    pub fn with_drives(label: impl Into<String>, spec: NeuronSpec, drive: Vec<f64>) -> Result<Self> {
        if drive.is_empty() {
            return Err(Error::Config("population size must be >= 1".into()));
        }
        Ok(Self {
            label: label.into(),
            spec,
            drive,
        })
    }

    pub fn len(&self) -> usize {
        self.drive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drive.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ConnectivityRule {
    AllToAll,
    Bernoulli { p: f64 },
    FixedInDegree { k: usize },
}

impl ConnectivityRule {
    /// Mean number of inputs per target cell.
    pub fn expected_in_degree(&self, n_source: usize, same_population: bool) -> f64 {
        let candidates = if same_population { n_source - 1 } else { n_source } as f64;
        match *self {
            ConnectivityRule::AllToAll => candidates,
            ConnectivityRule::Bernoulli { p } => p * candidates,
            ConnectivityRule::FixedInDegree { k } => k as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityBlock {
    pub source: String,
    pub target: String,
    pub rule: ConnectivityRule,
    /// `g_max` is the total conductance a target receives at its expected
    /// in-degree; each synapse carries `g_max / expected_in_degree`.
    pub synapse: SynapseSpec,
    pub seed: u64,
}

/// Directed edges `(source_cell, target_cell)` sorted by target, then source.
/// Draws come from stream 0 of `seed` in target-major order. Self-edges are
/// excluded when `same_population` is set.
pub fn sample_connectivity(
    rule: ConnectivityRule,
    n_source: usize,
    n_target: usize,
    seed: u64,
    same_population: bool,
) -> Result<Vec<(usize, usize)>> {
    if n_source == 0 || n_target == 0 {
        return Err(Error::Config("population sizes must be >= 1".into()));
    }
    if same_population && n_source != n_target {
        return Err(Error::Config("recurrent block with mismatched sizes".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let mut edges = Vec::new();
    match rule {
        ConnectivityRule::AllToAll => {
            for t in 0..n_target {
                for s in 0..n_source {
                    if !(same_population && s == t) {
                        edges.push((s, t));
                    }
                }
            }
        }
        ConnectivityRule::Bernoulli { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("connection probability {p} outside [0, 1]")));
            }
            for t in 0..n_target {
                for s in 0..n_source {
                    if same_population && s == t {
                        continue;
                    }
                    if rng.random::<f64>() < p {
                        edges.push((s, t));
                    }
                }
            }
        }
        ConnectivityRule::FixedInDegree { k } => {
            let candidates = if same_population { n_source - 1 } else { n_source };
            if k > candidates {
                return Err(Error::Config(format!(
                    "in-degree {k} exceeds the {candidates} available sources"
                )));
            }
            for t in 0..n_target {
                let mut chosen: Vec<usize> = sample(&mut rng, candidates, k)
                    .into_iter()
                    .map(|s| if same_population && s >= t { s + 1 } else { s })
                    .collect();
                chosen.sort_unstable();
                edges.extend(chosen.into_iter().map(|s| (s, t)));
            }
        }
    }
    Ok(edges)
}

/// Poisson train of rectangular current pulses delivered to every cell of a
/// population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSource {
    pub target: String,
    /// Events per ms per cell.
    pub rate: f64,
    /// Pulse amplitude (uA/cm^2 or theta bias units); negative values give
    /// hyperpolarizing pulses.
    pub amplitude: f64,
    /// Pulse width (ms).
    pub pulse_width: f64,
    pub seed: u64,
}

impl NoiseSource {
    pub const DEFAULT_PULSE_WIDTH: f64 = 1.0;

    pub fn new(target: impl Into<String>, rate: f64, amplitude: f64, seed: u64) -> Self {
        Self {
            target: target.into(),
            rate,
            amplitude,
            pulse_width: Self::DEFAULT_PULSE_WIDTH,
            seed,
        }
    }
}

/// Externally timed synaptic input onto one cell, e.g. a probe pulse.
/// The synapse conductance is applied unnormalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub target: String,
    pub cell: usize,
    pub synapse: SynapseSpec,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Conductance cells at their zero-drive rest; theta cells at their
    /// stable phase (or 0 when they have none).
    #[default]
    Rest,
    /// Voltages uniform in `[low, high]` with gates at steady state; theta
    /// phases uniform on the circle.
    RandomVoltage { low: f64, high: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellLayout {
    pub population: usize,
    pub index: usize,
    pub offset: usize,
    pub drive: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synapse {
    /// `None` for stimulus synapses.
    pub source: Option<usize>,
    pub target: usize,
    pub weight: f64,
    pub reversal: f64,
    pub tau_decay: f64,
    /// +1 for excitatory and -1 for inhibitory input onto theta cells.
    pub theta_sign: f64,
    pub spec: SynapseSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ResolvedNoise {
    pub population: usize,
    pub rate: f64,
    pub amplitude: f64,
    pub pulse_width: f64,
    pub seed: u64,
}

/// Compressed adjacency lists.
#[derive(Clone, Debug, Default, PartialEq)]
struct Csr {
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl Csr {
    fn build(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> Self {
        let mut buckets = vec![Vec::new(); n];
        for (key, item) in pairs {
            buckets[key].push(item);
        }
        let mut starts = Vec::with_capacity(n + 1);
        let mut items = Vec::new();
        starts.push(0);
        for b in buckets {
            items.extend(b);
            starts.push(items.len());
        }
        Self { starts, items }
    }

    fn get(&self, key: usize) -> &[usize] {
        &self.items[self.starts[key]..self.starts[key + 1]]
    }
}

/// Immutable network ODE system.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSystem {
    populations: Vec<Population>,
    blocks: Vec<ConnectivityBlock>,
    block_edges: Vec<usize>,
    cells: Vec<CellLayout>,
    synapses: Vec<Synapse>,
    synapse_offset: usize,
    incoming: Csr,
    outgoing: Csr,
    noise: Vec<ResolvedNoise>,
    noise_specs: Vec<NoiseSource>,
    stimulus_synapses: Vec<usize>,
    stimulus_times: Vec<Vec<f64>>,
    initial: InitialCondition,
}

impl NetworkSystem {
    pub fn dim(&self) -> usize {
        self.synapse_offset + self.synapses.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[CellLayout] {
        &self.cells
    }

    #[inline]
    pub fn spec_of(&self, cell: usize) -> &NeuronSpec {
        &self.populations[self.cells[cell].population].spec
    }

    pub fn populations(&self) -> &[Population] {
        &self.populations
    }

    /// Blocks in canonical order.
    pub fn blocks(&self) -> &[ConnectivityBlock] {
        &self.blocks
    }

    /// Realized edge count of each canonical block.
    pub fn block_edge_counts(&self) -> &[usize] {
        &self.block_edges
    }

    pub fn population_index(&self, label: &str) -> Option<usize> {
        self.populations.iter().position(|p| p.label == label)
    }

    pub fn population_cells(&self, population: usize) -> Range<usize> {
        let start: usize = self.populations[..population].iter().map(Population::len).sum();
        start..start + self.populations[population].len()
    }

    pub fn synapse_offset(&self) -> usize {
        self.synapse_offset
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    /// Number of synapses between cells (stimulus synapses excluded).
    pub fn network_synapse_count(&self) -> usize {
        self.synapses.len() - self.stimulus_synapses.len()
    }

    #[inline]
    pub fn incoming(&self, cell: usize) -> &[usize] {
        self.incoming.get(cell)
    }

    #[inline]
    pub fn outgoing(&self, cell: usize) -> &[usize] {
        self.outgoing.get(cell)
    }

    pub fn noise_specs(&self) -> &[NoiseSource] {
        &self.noise_specs
    }

    pub(crate) fn noise_sources(&self) -> &[ResolvedNoise] {
        &self.noise
    }

    pub fn stimulus_synapse(&self, stimulus: usize) -> usize {
        self.stimulus_synapses[stimulus]
    }

    pub fn stimulus_events(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.stimulus_synapses
            .iter()
            .zip(&self.stimulus_times)
            .flat_map(|(&s, times)| times.iter().map(move |&t| (s, t)))
    }

    pub fn initial_condition(&self) -> &InitialCondition {
        &self.initial
    }

    pub fn with_initial_condition(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    /// Cell that owns state entry `i` (synapse entries map to their target).
    pub fn owner_of(&self, i: usize) -> usize {
        if i >= self.synapse_offset {
            return self.synapses[i - self.synapse_offset].target;
        }
        match self.cells.binary_search_by(|c| c.offset.cmp(&i)) {
            Ok(c) => c,
            Err(c) => c - 1,
        }
    }

    /// Spike trains of one population, sliced from a full result.
    pub fn population_trains<'a>(&self, label: &str, trains: &'a [Vec<f64>]) -> Option<&'a [Vec<f64>]> {
        let p = self.population_index(label)?;
        Some(&trains[self.population_cells(p)])
    }
}

#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    populations: Vec<Population>,
    blocks: Vec<ConnectivityBlock>,
    noise: Vec<NoiseSource>,
    stimuli: Vec<Stimulus>,
    initial: InitialCondition,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn population(mut self, p: Population) -> Self {
        self.populations.push(p);
        self
    }

    pub fn block(mut self, b: ConnectivityBlock) -> Self {
        self.blocks.push(b);
        self
    }

    pub fn noise(mut self, n: NoiseSource) -> Self {
        self.noise.push(n);
        self
    }

    pub fn stimulus(mut self, s: Stimulus) -> Self {
        self.stimuli.push(s);
        self
    }

    pub fn initial(mut self, ic: InitialCondition) -> Self {
        self.initial = ic;
        self
    }

    pub fn build(self) -> Result<NetworkSystem> {
        let NetworkBuilder {
            populations,
            mut blocks,
            noise,
            stimuli,
            initial,
        } = self;
        if populations.is_empty() {
            return Err(Error::EmptySystem);
        }
        let mut index = HashMap::new();
        for (i, p) in populations.iter().enumerate() {
            p.spec.validate()?;
            if p.is_empty() {
                return Err(Error::Config(format!("population '{}' is empty", p.label)));
            }
            if index.insert(p.label.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate population label '{}'", p.label)));
            }
        }
        let resolve = |label: &str| {
            index
                .get(label)
                .copied()
                .ok_or_else(|| Error::Config(format!("unresolved population label '{label}'")))
        };
        if let InitialCondition::RandomVoltage { low, high } = initial {
            if !(low <= high) {
                return Err(Error::Config("initial voltage range is empty".into()));
            }
        }

        let mut cells = Vec::new();
        let mut offset = 0;
        let mut first_cell = Vec::with_capacity(populations.len());
        for (pi, p) in populations.iter().enumerate() {
            first_cell.push(cells.len());
            for (k, &drive) in p.drive.iter().enumerate() {
                cells.push(CellLayout {
                    population: pi,
                    index: k,
                    offset,
                    drive,
                });
                offset += p.spec.state_dim();
            }
        }
        let synapse_offset = offset;

        // Canonical block order makes the layout independent of declaration
        // order.
        let mut keyed = Vec::with_capacity(blocks.len());
        for b in blocks.drain(..) {
            b.synapse.validate()?;
            let key = (resolve(&b.source)?, resolve(&b.target)?);
            keyed.push((key, b));
        }
        keyed.sort_by(|(ka, a), (kb, b)| {
            ka.cmp(kb)
                .then(a.seed.cmp(&b.seed))
                .then(a.synapse.tau_decay.total_cmp(&b.synapse.tau_decay))
                .then(a.synapse.g_max.total_cmp(&b.synapse.g_max))
                .then(a.synapse.reversal.total_cmp(&b.synapse.reversal))
        });

        let mut synapses = Vec::new();
        let mut block_edges = Vec::with_capacity(keyed.len());
        for ((src, tgt), b) in &keyed {
            let same = src == tgt;
            let n_s = populations[*src].len();
            let n_t = populations[*tgt].len();
            let edges = sample_connectivity(b.rule, n_s, n_t, b.seed, same)?;
            let expected = b.rule.expected_in_degree(n_s, same);
            let weight = if expected > 0.0 { b.synapse.g_max / expected } else { 0.0 };
            let target_spec = &populations[*tgt].spec;
            let sign = theta_sign(&b.synapse, target_spec);
            block_edges.push(edges.len());
            for (s, t) in edges {
                synapses.push(Synapse {
                    source: Some(first_cell[*src] + s),
                    target: first_cell[*tgt] + t,
                    weight,
                    reversal: b.synapse.reversal,
                    tau_decay: b.synapse.tau_decay,
                    theta_sign: sign,
                    spec: b.synapse,
                });
            }
        }

        let mut stimulus_synapses = Vec::new();
        let mut stimulus_times = Vec::new();
        for st in &stimuli {
            st.synapse.validate()?;
            let p = resolve(&st.target)?;
            if st.cell >= populations[p].len() {
                return Err(Error::Config(format!(
                    "stimulus cell {} out of range for '{}'",
                    st.cell, st.target
                )));
            }
            stimulus_synapses.push(synapses.len());
            stimulus_times.push(st.times.clone());
            synapses.push(Synapse {
                source: None,
                target: first_cell[p] + st.cell,
                weight: st.synapse.g_max,
                reversal: st.synapse.reversal,
                tau_decay: st.synapse.tau_decay,
                theta_sign: theta_sign(&st.synapse, &populations[p].spec),
                spec: st.synapse,
            });
        }

        let mut resolved_noise = Vec::new();
        for n in &noise {
            if !(n.rate >= 0.0) || !n.rate.is_finite() {
                return Err(Error::Config("noise rate must be >= 0".into()));
            }
            if !(n.pulse_width > 0.0) {
                return Err(Error::Config("noise pulse width must be > 0".into()));
            }
            resolved_noise.push(ResolvedNoise {
                population: resolve(&n.target)?,
                rate: n.rate,
                amplitude: n.amplitude,
                pulse_width: n.pulse_width,
                seed: n.seed,
            });
        }

        let n_cells = cells.len();
        let incoming = Csr::build(n_cells, synapses.iter().enumerate().map(|(i, s)| (s.target, i)));
        let outgoing = Csr::build(
            n_cells,
            synapses
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.source.map(|src| (src, i))),
        );

        Ok(NetworkSystem {
            populations,
            blocks: keyed.into_iter().map(|(_, b)| b).collect(),
            block_edges,
            cells,
            synapses,
            synapse_offset,
            incoming,
            outgoing,
            noise: resolved_noise,
            noise_specs: noise,
            stimulus_synapses,
            stimulus_times,
            initial,
        })
    }
}

fn theta_sign(syn: &SynapseSpec, target: &NeuronSpec) -> f64 {
    if target.kind != NeuronKind::Theta {
        return 0.0;
    }
    match syn.polarity_for(target) {
        Polarity::Excitatory => 1.0,
        Polarity::Inhibitory => -1.0,
    }
}

pub fn assemble_network(
    populations: Vec<Population>,
    blocks: Vec<ConnectivityBlock>,
    noise: Vec<NoiseSource>,
) -> Result<NetworkSystem> {
    let mut b = NetworkBuilder::new();
    for p in populations {
        b = b.population(p);
    }
    for k in blocks {
        b = b.block(k);
    }
    for n in noise {
        b = b.noise(n);
    }
    b.build()
}

/// Random initial voltages used by the network presets.
pub const RANDOM_START: InitialCondition = InitialCondition::RandomVoltage {
    low: -75.0,
    high: -50.0,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngParams {
    pub n: usize,
    pub drive: HeterogeneitySpec,
    pub tau_decay: f64,
    /// Total I->I conductance per cell (mS/cm^2).
    pub g_ii: f64,
    pub rule: ConnectivityRule,
    pub seed: u64,
}

impl Default for IngParams {
    fn default() -> Self {
        Self {
            n: 50,
            drive: HeterogeneitySpec::homogeneous(1.25),
            tau_decay: cells::TAU_INHIBITION_FAST,
            g_ii: 0.15,
            rule: ConnectivityRule::AllToAll,
            seed: 0,
        }
    }
}

pub const LABEL_E: &str = "E";
pub const LABEL_I: &str = "I";

/// Interneuron network gamma: one intrinsically firing fast-firing
/// population with recurrent inhibition.
pub fn build_ing(params: &IngParams) -> Result<NetworkSystem> {
    if params.n == 0 {
        return Err(Error::Config("n_I must be >= 1".into()));
    }
    let pop = Population::new(LABEL_I, cells::make_fast_firing_interneuron(), params.n, &params.drive)?;
    let mut b = NetworkBuilder::new().population(pop).initial(RANDOM_START);
    if params.n > 1 {
        b = b.block(ConnectivityBlock {
            source: LABEL_I.into(),
            target: LABEL_I.into(),
            rule: params.rule,
            synapse: SynapseSpec::inhibitory(params.g_ii, params.tau_decay),
            seed: rng::derive_seed(params.seed, 1),
        });
    }
    b.build()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PingParams {
    pub n_e: usize,
    pub n_i: usize,
    pub drive_e: HeterogeneitySpec,
    pub drive_i: HeterogeneitySpec,
    pub rule_ei: ConnectivityRule,
    pub rule_ie: ConnectivityRule,
    /// Total E->I conductance per I-cell.
    pub g_ei: f64,
    /// Total I->E conductance per E-cell.
    pub g_ie: f64,
    pub g_ii: Option<f64>,
    pub rule_ii: ConnectivityRule,
    pub tau_exc: f64,
    pub tau_inh: f64,
    pub noise: Option<PingNoise>,
    pub seed: u64,
}

/// Poisson pulses delivered to the I-cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PingNoise {
    pub rate: f64,
    pub amplitude: f64,
}

impl Default for PingParams {
    fn default() -> Self {
        Self {
            n_e: 80,
            n_i: 20,
            drive_e: HeterogeneitySpec::homogeneous(1.0),
            drive_i: HeterogeneitySpec::homogeneous(0.0),
            rule_ei: ConnectivityRule::AllToAll,
            rule_ie: ConnectivityRule::AllToAll,
            g_ei: 0.5,
            g_ie: 1.0,
            g_ii: None,
            rule_ii: ConnectivityRule::AllToAll,
            tau_exc: 2.0,
            tau_inh: cells::TAU_INHIBITION_FAST,
            noise: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltNetwork {
    pub system: NetworkSystem,
    pub warnings: Vec<String>,
}

/// Rheobases of the fast-firing and plain excitatory templates, computed
/// once per process (the templates are compiled in).
fn template_rheobases() -> Result<(f64, f64)> {
    static CACHE: OnceLock<(f64, f64)> = OnceLock::new();
    if let Some(r) = CACHE.get() {
        return Ok(*r);
    }
    let i = crate::analysis::rheobase(&cells::make_fast_firing_interneuron(), (0.0, 2.0))?;
    let e = crate::analysis::rheobase(&cells::make_excitatory_cell(false), (0.0, 2.0))?;
    Ok(*CACHE.get_or_init(|| (i, e)))
}

/// Pyramidal-interneuron gamma: E-cells driven above rheobase recruit
/// subthreshold I-cells, whose inhibition paces the E-cells.
pub fn build_ping(params: &PingParams) -> Result<BuiltNetwork> {
    if params.n_e == 0 || params.n_i == 0 {
        return Err(Error::Config("PING needs at least one E- and one I-cell".into()));
    }
    let e_spec = cells::make_excitatory_cell(false);
    let i_spec = cells::make_fast_firing_interneuron();
    let mut warnings = Vec::new();
    let (i_rheobase, e_rheobase) = template_rheobases()?;
    if params.drive_i.mean > i_rheobase {
        let msg = format!(
            "I-cell drive {} exceeds rheobase {:.3}: I-cells fire without E input (ING-like regime)",
            params.drive_i.mean, i_rheobase
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    if params.drive_e.mean < e_rheobase {
        let msg = format!(
            "E-cell drive {} is below rheobase {:.3}: no PING rhythm expected",
            params.drive_e.mean, e_rheobase
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let e = Population::new(LABEL_E, e_spec, params.n_e, &params.drive_e)?;
    let i = Population::new(LABEL_I, i_spec, params.n_i, &params.drive_i)?;
    let mut b = NetworkBuilder::new()
        .population(e)
        .population(i)
        .initial(RANDOM_START)
        .block(ConnectivityBlock {
            source: LABEL_E.into(),
            target: LABEL_I.into(),
            rule: params.rule_ei,
            synapse: SynapseSpec::excitatory(params.g_ei, params.tau_exc),
            seed: rng::derive_seed(params.seed, 1),
        })
        .block(ConnectivityBlock {
            source: LABEL_I.into(),
            target: LABEL_E.into(),
            rule: params.rule_ie,
            synapse: SynapseSpec::inhibitory(params.g_ie, params.tau_inh),
            seed: rng::derive_seed(params.seed, 2),
        });
    if let Some(g_ii) = params.g_ii {
        if params.n_i > 1 && g_ii > 0.0 {
            b = b.block(ConnectivityBlock {
                source: LABEL_I.into(),
                target: LABEL_I.into(),
                rule: params.rule_ii,
                synapse: SynapseSpec::inhibitory(g_ii, params.tau_inh),
                seed: rng::derive_seed(params.seed, 3),
            });
        }
    }
    if let Some(noise) = params.noise {
        b = b.noise(NoiseSource::new(LABEL_I, noise.rate, noise.amplitude, rng::derive_seed(params.seed, 4)));
    }
    Ok(BuiltNetwork {
        system: b.build()?,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Ping,
    Ing,
}

/// Whether the I-cells of a PING configuration fire without E input: a
/// probe simulation of the isolated I population (I->I block kept, noise
/// dropped) over `probe_ms`. Only spikes in the second half count, so a
/// single spike off the random initial voltage is ignored.
pub fn probe_mechanism(params: &PingParams, probe_ms: f64) -> Result<Mechanism> {
    let i = Population::new(LABEL_I, cells::make_fast_firing_interneuron(), params.n_i, &params.drive_i)?;
    let mut b = NetworkBuilder::new().population(i).initial(RANDOM_START);
    if let (Some(g_ii), true) = (params.g_ii, params.n_i > 1) {
        b = b.block(ConnectivityBlock {
            source: LABEL_I.into(),
            target: LABEL_I.into(),
            rule: params.rule_ii,
            synapse: SynapseSpec::inhibitory(g_ii, params.tau_inh),
            seed: rng::derive_seed(params.seed, 3),
        });
    }
    let system = b.build()?;
    let result = crate::dynamics::simulate(
        &system,
        probe_ms,
        crate::dynamics::DEFAULT_DT_CONDUCTANCE,
        &Default::default(),
        params.seed,
    )?;
    let late = result.spike_trains.iter().flatten().any(|&t| t >= 0.5 * probe_ms);
    Ok(if late {
        Mechanism::Ing
    } else {
        Mechanism::Ping
    })
}
