//! Spike-time response curves, the pair spike-time map built from them, and
//! the direct two-cell simulation the map is checked against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{NeuronSpec, SynapseSpec};
use crate::dynamics::{Simulator, StateVector};
use crate::error::{Error, Result};
use crate::network::{
    ConnectivityBlock, ConnectivityRule, HeterogeneitySpec, NetworkBuilder, NetworkSystem, Population,
    Stimulus,
};

const PRC_DT: f64 = 0.01;
const MIN_SETTLE_SPIKES: usize = 20;
const MIN_SETTLE_MS: f64 = 500.0;
const MAX_SETTLE_MS: f64 = 20_000.0;
/// Largest relative spread of the final inter-spike intervals accepted as
/// periodic.
const PERIODIC_TOLERANCE: f64 = 5e-3;
const MIN_PHASES: usize = 16;
/// Spikes followed after a perturbation; the shift of the last one is taken
/// as the asymptotic phase shift.
const FOLLOWING_SPIKES: usize = 6;

/// Initial lag of the second cell in a pair run, as a fraction of the period.
pub const PAIR_INITIAL_OFFSET: f64 = 0.2;
/// A pair counts as synchronized when its final lag is below this fraction
/// of the period.
pub const PAIR_SYNC_TOLERANCE: f64 = 0.05;
/// Periods simulated in a pair run.
pub const PAIR_PERIODS: f64 = 60.0;

/// Cell state captured on a periodic orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitCycle {
    pub drive: f64,
    /// Unperturbed period (ms).
    pub period: f64,
    /// Cell state (without synapse slots) one step after a spike.
    pub state: StateVector,
    /// Time from that spike to `state` (ms).
    pub lag: f64,
}

struct Settled {
    state: StateVector,
    lag: f64,
    period: f64,
    /// Unperturbed spike times after the reference spike.
    spikes: Vec<f64>,
}

/// Runs `system` (whose cell 0 is the cell of interest) onto its limit cycle
/// and captures the state right after a spike, along with the two following
/// unperturbed intervals.
fn settle(system: &NetworkSystem, drive: f64) -> Result<Settled> {
    let mut sim = Simulator::new(system, PRC_DT, 0)?;
    let enough = |sim: &Simulator| sim.spikes()[0].len() >= MIN_SETTLE_SPIKES && sim.time() >= MIN_SETTLE_MS;
    while !enough(&sim) {
        if sim.time() >= MAX_SETTLE_MS {
            return Err(Error::NotPeriodic { drive });
        }
        sim.step()?;
    }
    let train = &sim.spikes()[0];
    let isis: Vec<f64> = train[train.len() - 6..].windows(2).map(|w| w[1] - w[0]).collect();
    let mean = isis.iter().sum::<f64>() / isis.len() as f64;
    let (lo, hi) = isis
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if (hi - lo) / mean > PERIODIC_TOLERANCE {
        return Err(Error::NotPeriodic { drive });
    }
    loop {
        sim.step()?;
        if let Some(&(_, ts)) = sim.last_step_spikes().first() {
            let state = sim.state().to_vec();
            let lag = sim.time() - ts;
            let spikes = following_spikes(system, state.clone(), lag, None, mean)?
                .ok_or(Error::NotPeriodic { drive })?;
            return Ok(Settled {
                state,
                lag,
                period: spikes[0],
                spikes,
            });
        }
        if sim.time() >= MAX_SETTLE_MS + 10.0 * mean {
            return Err(Error::NotPeriodic { drive });
        }
    }
}

/// Spikes following the reference spike, measured from it, when starting
/// from `state` (taken `lag` ms after the spike) with an optional stimulus
/// at `stim` ms. `None` if the cell does not fire [`FOLLOWING_SPIKES`]
/// times within that many periods of slack.
fn following_spikes(
    system: &NetworkSystem,
    state: StateVector,
    lag: f64,
    stim: Option<f64>,
    period: f64,
) -> Result<Option<Vec<f64>>> {
    let mut sim = Simulator::with_state(system, state, PRC_DT, 0)?;
    if let Some(t) = stim {
        sim.inject(0, t - lag);
    }
    let limit = 4.0 * FOLLOWING_SPIKES as f64 * period;
    while sim.spikes()[0].len() < FOLLOWING_SPIKES {
        if sim.time() > limit {
            return Ok(None);
        }
        sim.step()?;
    }
    Ok(Some(sim.spikes()[0].iter().map(|s| s + lag).collect()))
}

/// Places the cell on its periodic orbit at constant `drive`.
pub fn limit_cycle(neuron: &NeuronSpec, drive: f64) -> Result<LimitCycle> {
    let system = crate::analysis::single_cell(neuron, drive)?;
    let s = settle(&system, drive)?;
    Ok(LimitCycle {
        drive,
        period: s.period,
        state: s.state,
        lag: s.lag,
    })
}

impl LimitCycle {
    /// Cell state `t` ms after the reference spike (to the nearest step).
    pub fn state_after(&self, neuron: &NeuronSpec, t: f64) -> Result<StateVector> {
        let system = crate::analysis::single_cell(neuron, self.drive)?;
        let mut sim = Simulator::with_state(&system, self.state.clone(), PRC_DT, 0)?;
        sim.run_until((t - self.lag).max(0.0))?;
        Ok(sim.state().to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrcSample {
    /// Phase of the perturbation within the unperturbed cycle, in [0, 1).
    pub phase: f64,
    /// Advance of the next spike (ms); negative values are delays.
    pub shift_ms: f64,
    /// Advance of the spike after that, relative to an unperturbed interval.
    pub second_order_ms: f64,
    /// Lasting advance of the spike train once the perturbation has worn off.
    pub asymptotic_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseResponseCurve {
    pub samples: Vec<PrcSample>,
    /// Unperturbed period (ms).
    pub period: f64,
    pub drive: f64,
    /// Perturbing synapse, with `g_max` set to the strength used.
    pub synapse: SynapseSpec,
}

impl PhaseResponseCurve {
    fn interpolate(&self, phase: f64, value: impl Fn(&PrcSample) -> f64) -> f64 {
        let phase = phase.rem_euclid(1.0);
        let n = self.samples.len();
        let k = self.samples.partition_point(|s| s.phase <= phase);
        let (p0, v0, p1, v1) = if k == 0 {
            let last = &self.samples[n - 1];
            (last.phase - 1.0, value(last), self.samples[0].phase, value(&self.samples[0]))
        } else if k == n {
            let last = &self.samples[n - 1];
            (last.phase, value(last), self.samples[0].phase + 1.0, value(&self.samples[0]))
        } else {
            let (a, b) = (&self.samples[k - 1], &self.samples[k]);
            (a.phase, value(a), b.phase, value(b))
        };
        v0 + (v1 - v0) * (phase - p0) / (p1 - p0)
    }

    /// First-order shift at `phase`, linearly interpolated and periodic.
    pub fn shift(&self, phase: f64) -> f64 {
        self.interpolate(phase, |s| s.shift_ms)
    }

    /// Lasting advance of the spike train at `phase`, linearly interpolated
    /// and periodic.
    pub fn asymptotic_shift(&self, phase: f64) -> f64 {
        self.interpolate(phase, |s| s.asymptotic_ms)
    }
}

/// Spike-time response of a periodically firing cell to one synaptic event
/// of the given strength, at `n_phases` evenly spaced phases.
pub fn spike_time_response(
    neuron: &NeuronSpec,
    drive: f64,
    synapse: &SynapseSpec,
    strength: f64,
    n_phases: usize,
) -> Result<PhaseResponseCurve> {
    if n_phases < MIN_PHASES {
        return Err(Error::Config(format!("need at least {MIN_PHASES} phases, got {n_phases}")));
    }
    let synapse = synapse.with_strength(strength);
    let system = NetworkBuilder::new()
        .population(Population::new("cell", neuron.clone(), 1, &HeterogeneitySpec::homogeneous(drive))?)
        .stimulus(Stimulus {
            target: "cell".into(),
            cell: 0,
            synapse,
            times: Vec::new(),
        })
        .build()?;
    let base = settle(&system, drive)?;
    let samples = (0..n_phases)
        .into_par_iter()
        .map(|i| {
            let phase = i as f64 / n_phases as f64;
            let spikes = following_spikes(&system, base.state.clone(), base.lag, Some(phase * base.period), base.period)?
                .ok_or(Error::NotPeriodic { drive })?;
            let free = &base.spikes;
            let k = FOLLOWING_SPIKES - 1;
            Ok(PrcSample {
                phase,
                shift_ms: free[0] - spikes[0],
                second_order_ms: (free[1] - free[0]) - (spikes[1] - spikes[0]),
                asymptotic_ms: free[k] - spikes[k],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseResponseCurve {
        samples,
        period: base.period,
        drive,
        synapse,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub delta_ms: f64,
    pub slope: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeTimeMap {
    pub period: f64,
    /// `(delta_in, delta_out)` in ms over one period centred on zero.
    pub samples: Vec<(f64, f64)>,
    pub fixed_points: Vec<FixedPoint>,
}

impl SpikeTimeMap {
    /// The fixed point at zero lag, if the map has one.
    pub fn synchronous(&self) -> Option<&FixedPoint> {
        let tol = 1e-3 * self.period;
        self.fixed_points.iter().find(|f| f.delta_ms.abs() < tol)
    }
}

const MAP_SAMPLES: usize = 400;

/// Maps the lag `delta` of cell B's spike after cell A's spike to the lag
/// one cycle later. Each cell's upcoming spike is shifted by its lasting
/// response to the other cell's most recent spike: A receives B's spike at
/// phase `delta / T0`, B receives A's at phase `1 - delta / T0`.
/// `prc_a` describes A's response to B and `prc_b` B's response to A.
pub fn build_spike_time_map(
    prc_a: &PhaseResponseCurve,
    prc_b: &PhaseResponseCurve,
    period: f64,
) -> Result<SpikeTimeMap> {
    if prc_a.samples.is_empty() || prc_b.samples.is_empty() {
        return Err(Error::Config("empty phase response curve".into()));
    }
    if !(period > 0.0) {
        return Err(Error::Config("map period must be > 0".into()));
    }
    let step = |d: f64| d + prc_a.asymptotic_shift(d / period) - prc_b.asymptotic_shift(1.0 - d / period);
    let g = |d: f64| step(d) - d;

    let grid: Vec<f64> = (0..=MAP_SAMPLES)
        .map(|k| period * (k as f64 / MAP_SAMPLES as f64 - 0.5))
        .collect();
    let samples: Vec<(f64, f64)> = grid[..MAP_SAMPLES].iter().map(|&d| (d, step(d))).collect();

    let zero_tol = 1e-9 * period;
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga.abs() <= zero_tol {
            roots.push(a);
        } else if gb.abs() > zero_tol && ga.signum() != gb.signum() {
            roots.push(bisect(&g, a, b, ga, zero_tol));
        }
    }

    let h = period / 200.0;
    let fixed_points = roots
        .into_iter()
        .map(|d| {
            let slope = (step(d + h) - step(d - h)) / (2.0 * h);
            FixedPoint {
                delta_ms: d,
                slope,
                stable: slope.abs() < 1.0,
            }
        })
        .collect();
    Ok(SpikeTimeMap {
        period,
        samples,
        fixed_points,
    })
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, tol: f64) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm.abs() <= tol || b - a <= tol {
            return m;
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub synchronized: bool,
    /// Lag between the two cells' last spikes, wrapped to half a period (ms).
    pub final_delta_ms: f64,
    /// Period of the coupled pair at the end of the run, or the uncoupled
    /// period if a cell stopped firing (ms).
    pub period_ms: f64,
}

/// Two identical cells with reciprocal `synapse` coupling, started with the
/// second cell lagging by a fifth of a period, and run for
/// [`PAIR_PERIODS`] periods.
pub fn pair_synchronizes(neuron: &NeuronSpec, drive: f64, synapse: &SynapseSpec) -> Result<PairOutcome> {
    let cycle = limit_cycle(neuron, drive)?;
    let t0 = cycle.period;
    let system = NetworkBuilder::new()
        .population(Population::new("pair", neuron.clone(), 2, &HeterogeneitySpec::homogeneous(drive))?)
        .block(ConnectivityBlock {
            source: "pair".into(),
            target: "pair".into(),
            rule: ConnectivityRule::AllToAll,
            synapse: *synapse,
            seed: 0,
        })
        .build()?;
    // B lags A by 0.2 T0, so B sits at phase 0.8 when A has just fired.
    let state_a = cycle.state.clone();
    let state_b = cycle.state_after(neuron, (1.0 - PAIR_INITIAL_OFFSET) * t0)?;
    let mut state = vec![0.0; system.dim()];
    let cells = system.cells();
    state[cells[0].offset..cells[0].offset + state_a.len()].copy_from_slice(&state_a);
    state[cells[1].offset..cells[1].offset + state_b.len()].copy_from_slice(&state_b);

    let mut sim = Simulator::with_state(&system, state, PRC_DT, 0)?;
    sim.run_until(PAIR_PERIODS * t0)?;
    let trains = sim.spikes();
    let end = sim.time();
    let active = |train: &Vec<f64>| train.len() >= 3 && *train.last().unwrap() > end - 3.0 * t0;
    if !(active(&trains[0]) && active(&trains[1])) {
        return Ok(PairOutcome {
            synchronized: false,
            final_delta_ms: f64::NAN,
            period_ms: t0,
        });
    }
    let a = &trains[0];
    let period = a[a.len() - 1] - a[a.len() - 2];
    let last_a = a[a.len() - 1];
    let nearest_b = trains[1]
        .iter()
        .copied()
        .min_by(|x, y| (x - last_a).abs().total_cmp(&(y - last_a).abs()))
        .unwrap();
    let delta = nearest_b - last_a;
    Ok(PairOutcome {
        synchronized: delta.abs() < PAIR_SYNC_TOLERANCE * period,
        final_delta_ms: delta,
        period_ms: period,
    })
}
