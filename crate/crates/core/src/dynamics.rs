//! ODE assembly, fixed-step RK4 integration, spike detection and noise
//! events.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::cells::{NeuronKind, TAU_FLOOR};
use crate::error::{Error, Result};
use crate::network::{InitialCondition, NetworkSystem};
use crate::rng;

/// Spike threshold for conductance-based cells (mV).
pub const SPIKE_THRESHOLD: f64 = 0.0;

/// Crossings closer than this to the previous spike of the same
/// conductance-based cell are ignored (ms).
pub const REFRACTORY_GUARD: f64 = 1.0;

/// A run fails as under-resolved when more than this fraction of steps clamp
/// a gate.
pub const MAX_CLAMP_FRACTION: f64 = 1e-3;

pub const DEFAULT_DT_CONDUCTANCE: f64 = 0.01;
pub const DEFAULT_DT_THETA: f64 = 0.05;

/// Flat state vector. Layout: cells in population declaration order, each
/// cell contributing `v` then its gates in spec order (or a single phase for
/// theta cells); then one gate per synapse in canonical synapse order.
pub type StateVector = Vec<f64>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordingOptions {
    /// Sampling stride for traces (ms); `None` disables traces.
    pub trace_stride: Option<f64>,
}

impl RecordingOptions {
    pub fn spikes_only() -> Self {
        Self { trace_stride: None }
    }

    pub fn traces(stride_ms: f64) -> Self {
        Self {
            trace_stride: Some(stride_ms),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    pub stride: f64,
    /// `samples[cell][k]` is the membrane voltage (or theta phase) at
    /// `k * stride`.
    pub samples: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub spike_trains: Vec<Vec<f64>>,
    pub traces: Option<Traces>,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Noise pulse onset times per cell (ms).
    pub event_log: Vec<Vec<f64>>,
    pub steps: u64,
    pub clamped_steps: u64,
}

impl SimulationResult {
    pub fn spike_count(&self) -> usize {
        self.spike_trains.iter().map(Vec::len).sum()
    }
}

/// Derivative of the full system at `state`, without noise.
pub fn derivative(system: &NetworkSystem, state: &[f64], t: f64) -> Result<StateVector> {
    check_dim(system, state)?;
    let mut out = vec![0.0; state.len()];
    let extra = vec![0.0; system.cell_count()];
    derivative_into(system, state, &extra, &mut out);
    if let Some(i) = out.iter().position(|x| !x.is_finite()) {
        return Err(Error::Blowup {
            neuron: system.owner_of(i),
            t,
            partial: None,
        });
    }
    Ok(out)
}

fn check_dim(system: &NetworkSystem, state: &[f64]) -> Result<()> {
    if state.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: state.len(),
        });
    }
    Ok(())
}

/// `extra_drive` is added to each cell's constant drive.
pub(crate) fn derivative_into(
    system: &NetworkSystem,
    y: &[f64],
    extra_drive: &[f64],
    dy: &mut [f64],
) {
    let syn_off = system.synapse_offset();
    let synapses = system.synapses();
    for (ci, cell) in system.cells().iter().enumerate() {
        let spec = system.spec_of(ci);
        let off = cell.offset;
        let drive = cell.drive + extra_drive[ci];
        let incoming = system.incoming(ci);
        match spec.kind {
            NeuronKind::Conductance => {
                let v = y[off];
                let mut gi = off + 1;
                let mut i_ion = 0.0;
                for current in &spec.currents {
                    let mut g = current.g_max;
                    for gate in current.gates() {
                        let x = y[gi];
                        let (x_inf, tau) = gate.eval(v);
                        dy[gi] = (x_inf - x) / tau;
                        g *= powi(x, gate.exponent);
                        gi += 1;
                    }
                    i_ion += g * (v - current.reversal);
                }
                let mut i_syn = 0.0;
                for &s in incoming {
                    let syn = &synapses[s];
                    i_syn += syn.weight * y[syn_off + s] * (v - syn.reversal);
                }
                dy[off] = (-i_ion - i_syn + drive) / spec.capacitance;
            }
            NeuronKind::Theta => {
                let theta = y[off];
                let mut i_eff = drive;
                for &s in incoming {
                    let syn = &synapses[s];
                    i_eff += syn.theta_sign * syn.weight * y[syn_off + s];
                }
                let c = theta.cos();
                dy[off] = (1.0 - c) + i_eff * (1.0 + c);
            }
        }
    }
    for (s, syn) in synapses.iter().enumerate() {
        dy[syn_off + s] = -y[syn_off + s] / syn.tau_decay;
    }
}

#[inline]
fn powi(x: f64, p: u32) -> f64 {
    match p {
        1 => x,
        2 => x * x,
        3 => x * x * x,
        4 => {
            let x2 = x * x;
            x2 * x2
        }
        _ => x.powi(p as i32),
    }
}

/// Scratch space for RK4 stages.
#[derive(Clone, Debug)]
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

/// Classical RK4 update of an arbitrary ODE `f(t, y, dy)`, in place.
pub fn rk4_generic<F>(f: F, y: &mut [f64], t: f64, dt: f64, ws: &mut Rk4Workspace)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let Rk4Workspace { k1, k2, k3, k4, tmp } = ws;
    f(t, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    f(t + 0.5 * dt, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    f(t + 0.5 * dt, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + dt * k3[i];
    }
    f(t + dt, tmp, k4);
    let h6 = dt / 6.0;
    for i in 0..n {
        y[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Outcome of one post-step normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub clamped: usize,
}

/// One RK4 step of the noise-free system followed by gate clamping and
/// phase wrapping.
pub fn rk4_step(system: &NetworkSystem, state: &[f64], t: f64, dt: f64) -> Result<(StateVector, StepReport)> {
    if !(dt > 0.0) {
        return Err(Error::Config("dt must be > 0".into()));
    }
    check_dim(system, state)?;
    let mut y = state.to_vec();
    let extra = vec![0.0; system.cell_count()];
    let mut ws = Rk4Workspace::new(y.len());
    rk4_generic(|_, y, dy| derivative_into(system, y, &extra, dy), &mut y, t, dt, &mut ws);
    if let Some(i) = y.iter().position(|x| !x.is_finite()) {
        return Err(Error::Blowup {
            neuron: system.owner_of(i),
            t: t + dt,
            partial: None,
        });
    }
    let clamped = normalize(system, &mut y);
    Ok((y, StepReport { clamped }))
}

/// Clamps gates to [0, 1] and wraps theta phases; returns the clamp count.
fn normalize(system: &NetworkSystem, y: &mut [f64]) -> usize {
    let mut clamped = 0;
    for (ci, cell) in system.cells().iter().enumerate() {
        let spec = system.spec_of(ci);
        match spec.kind {
            NeuronKind::Theta => y[cell.offset] = wrap_phase(y[cell.offset]),
            NeuronKind::Conductance => {
                for x in &mut y[cell.offset + 1..cell.offset + spec.state_dim()] {
                    clamped += clamp_unit(x);
                }
            }
        }
    }
    for x in &mut y[system.synapse_offset()..] {
        clamped += clamp_unit(x);
    }
    clamped
}

#[inline]
fn clamp_unit(x: &mut f64) -> usize {
    if *x < 0.0 {
        *x = 0.0;
        1
    } else if *x > 1.0 {
        *x = 1.0;
        1
    } else {
        0
    }
}

#[inline]
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Online threshold-crossing detector with linear interpolation and a
/// refractory guard.
#[derive(Clone, Copy, Debug)]
pub struct SpikeDetector {
    pub threshold: f64,
    pub refractory: f64,
    last: f64,
}

impl SpikeDetector {
    pub fn new(threshold: f64, refractory: f64) -> Self {
        Self {
            threshold,
            refractory,
            last: f64::NEG_INFINITY,
        }
    }

    /// Checks the sample pair `(t0, v0) -> (t0 + dt, v1)`.
    #[inline]
    pub fn check(&mut self, t0: f64, dt: f64, v0: f64, v1: f64) -> Option<f64> {
        if v0 < self.threshold && v1 >= self.threshold {
            let ts = t0 + dt * (self.threshold - v0) / (v1 - v0);
            if ts - self.last >= self.refractory {
                self.last = ts;
                return Some(ts);
            }
        }
        None
    }
}

/// Upward threshold crossings of uniformly spaced samples starting at `t0`,
/// linearly interpolated, with the 1 ms refractory guard.
pub fn detect_spikes(samples: &[f64], t0: f64, dt: f64, threshold: f64) -> Vec<f64> {
    let mut det = SpikeDetector::new(threshold, REFRACTORY_GUARD);
    samples
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| det.check(t0 + k as f64 * dt, dt, w[0], w[1]))
        .collect()
}

/// Theta spike: the unwrapped phase passes pi during the step.
#[inline]
fn theta_crossing(t0: f64, dt: f64, old: f64, new_raw: f64) -> Option<f64> {
    if old < PI && new_raw >= PI {
        Some(t0 + dt * (PI - old) / (new_raw - old))
    } else {
        None
    }
}

#[derive(Clone, Debug)]
struct PulseTrain {
    cell: usize,
    amplitude: f64,
    width: f64,
    starts: Vec<f64>,
    cursor: usize,
}

impl PulseTrain {
    /// Mean drive contributed over `[t0, t1]`.
    fn drive(&mut self, t0: f64, t1: f64) -> f64 {
        while self.cursor < self.starts.len() && self.starts[self.cursor] + self.width <= t0 {
            self.cursor += 1;
        }
        let mut overlap = 0.0;
        for &s in &self.starts[self.cursor..] {
            if s >= t1 {
                break;
            }
            let lo = s.max(t0);
            let hi = (s + self.width).min(t1);
            if hi > lo {
                overlap += hi - lo;
            }
        }
        self.amplitude * overlap / (t1 - t0)
    }
}

#[derive(Clone, Debug)]
struct PendingEvent {
    time: f64,
    synapse: usize,
}

/// Step-by-step integrator for one run. [`simulate`] wraps it; analysis
/// routines drive it directly when they need the state mid-run.
pub struct Simulator<'a> {
    system: &'a NetworkSystem,
    dt: f64,
    seed: u64,
    step: u64,
    state: StateVector,
    prev: StateVector,
    ws: Rk4Workspace,
    extra: Vec<f64>,
    detectors: Vec<SpikeDetector>,
    spikes: Vec<Vec<f64>>,
    pulses: Vec<PulseTrain>,
    event_log: Vec<Vec<f64>>,
    stimuli: Vec<PendingEvent>,
    stim_cursor: usize,
    fired: Vec<(usize, f64)>,
    clamped_steps: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(system: &'a NetworkSystem, dt: f64, seed: u64) -> Result<Self> {
        let initial = initial_state(system, seed);
        Self::with_state(system, initial, dt, seed)
    }

    pub fn with_state(system: &'a NetworkSystem, state: StateVector, dt: f64, seed: u64) -> Result<Self> {
        if system.cell_count() == 0 {
            return Err(Error::EmptySystem);
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config("dt must be > 0".into()));
        }
        check_dim(system, &state)?;
        let n = system.cell_count();
        let detectors = (0..n)
            .map(|ci| match system.spec_of(ci).kind {
                NeuronKind::Conductance => SpikeDetector::new(SPIKE_THRESHOLD, REFRACTORY_GUARD),
                NeuronKind::Theta => SpikeDetector::new(PI, 0.0),
            })
            .collect();
        let mut stimuli: Vec<PendingEvent> = system
            .stimulus_events()
            .map(|(synapse, time)| PendingEvent { time, synapse })
            .collect();
        stimuli.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.synapse.cmp(&b.synapse)));
        let dim = state.len();
        let mut sim = Self {
            system,
            dt,
            seed,
            step: 0,
            prev: state.clone(),
            state,
            ws: Rk4Workspace::new(dim),
            extra: vec![0.0; n],
            detectors,
            spikes: vec![Vec::new(); n],
            pulses: Vec::new(),
            event_log: vec![Vec::new(); n],
            stimuli,
            stim_cursor: 0,
            fired: Vec::new(),
            clamped_steps: 0,
        };
        sim.apply_stimuli_until(0.0);
        Ok(sim)
    }

    /// Draws Poisson pulse onsets for every noise source over `[0, horizon)`.
    /// Stream `1 + j` of the run seed serves noise source `j`; within a
    /// stream, cells are drawn in index order.
    pub fn schedule_noise(&mut self, horizon: f64) {
        self.pulses.clear();
        for log in &mut self.event_log {
            log.clear();
        }
        for (j, src) in self.system.noise_sources().iter().enumerate() {
            let mut rng = rng::stream(rng::derive_seed(self.seed, src.seed), 1 + j as u64);
            let cells = self.system.population_cells(src.population);
            for cell in cells {
                let mut starts = Vec::new();
                if src.rate > 0.0 {
                    let exp = Exp::new(src.rate).expect("rate > 0");
                    let mut t = exp.sample(&mut rng);
                    while t < horizon {
                        starts.push(t);
                        t += exp.sample(&mut rng);
                    }
                }
                self.event_log[cell].extend_from_slice(&starts);
                self.pulses.push(PulseTrain {
                    cell,
                    amplitude: src.amplitude,
                    width: src.pulse_width,
                    starts,
                    cursor: 0,
                });
            }
        }
        for log in &mut self.event_log {
            log.sort_by(f64::total_cmp);
        }
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn spikes(&self) -> &[Vec<f64>] {
        &self.spikes
    }

    /// Spikes emitted during the most recent step, as `(cell, time)`.
    pub fn last_step_spikes(&self) -> &[(usize, f64)] {
        &self.fired
    }

    pub fn clamped_steps(&self) -> u64 {
        self.clamped_steps
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Voltage (or phase) of every cell.
    pub fn cell_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.system.cells().iter().map(|c| self.state[c.offset])
    }

    /// Schedules an extra stimulus event on external synapse `index`
    /// (index into the system's stimulus list).
    pub fn inject(&mut self, stimulus: usize, time: f64) {
        let synapse = self.system.stimulus_synapse(stimulus);
        let pos = self.stimuli[self.stim_cursor..]
            .iter()
            .position(|e| e.time > time)
            .map(|p| p + self.stim_cursor)
            .unwrap_or(self.stimuli.len());
        self.stimuli.insert(pos, PendingEvent { time, synapse });
        if time <= self.time() {
            self.apply_stimuli_until(self.time());
        }
    }

    fn apply_stimuli_until(&mut self, t_now: f64) {
        let syn_off = self.system.synapse_offset();
        while self.stim_cursor < self.stimuli.len() && self.stimuli[self.stim_cursor].time <= t_now {
            let ev = &self.stimuli[self.stim_cursor];
            let spec = &self.system.synapses()[ev.synapse].spec;
            let slot = &mut self.state[syn_off + ev.synapse];
            let lag = (t_now - ev.time).max(0.0);
            let x_at = *slot / spec.decayed(1.0, lag);
            *slot = spec.decayed(spec.on_spike(x_at.min(1.0)), lag);
            self.stim_cursor += 1;
        }
    }

    /// Advances one step. On blowup the simulator is left at the failing
    /// state.
    pub fn step(&mut self) -> Result<()> {
        let t0 = self.time();
        let t1 = (self.step + 1) as f64 * self.dt;
        let dt = self.dt;
        let system = self.system;

        for x in &mut self.extra {
            *x = 0.0;
        }
        for p in &mut self.pulses {
            let d = p.drive(t0, t1);
            self.extra[p.cell] += d;
        }

        self.prev.copy_from_slice(&self.state);
        let extra = &self.extra;
        rk4_generic(
            |_, y, dy| derivative_into(system, y, extra, dy),
            &mut self.state,
            t0,
            dt,
            &mut self.ws,
        );
        self.step += 1;

        if let Some(i) = self.state.iter().position(|x| !x.is_finite()) {
            return Err(Error::Blowup {
                neuron: system.owner_of(i),
                t: t1,
                partial: None,
            });
        }

        self.fired.clear();
        for (ci, cell) in system.cells().iter().enumerate() {
            let old = self.prev[cell.offset];
            let new = self.state[cell.offset];
            let hit = match system.spec_of(ci).kind {
                NeuronKind::Conductance => self.detectors[ci].check(t0, dt, old, new),
                NeuronKind::Theta => theta_crossing(t0, dt, old, new),
            };
            if let Some(ts) = hit {
                self.spikes[ci].push(ts);
                self.fired.push((ci, ts));
            }
        }

        if normalize(system, &mut self.state) > 0 {
            self.clamped_steps += 1;
        }

        let syn_off = system.synapse_offset();
        for &(ci, ts) in &self.fired {
            let lag = t1 - ts;
            for &s in system.outgoing(ci) {
                let spec = &system.synapses()[s].spec;
                let slot = &mut self.state[syn_off + s];
                let x_at = (*slot / spec.decayed(1.0, lag)).min(1.0);
                *slot = spec.decayed(spec.on_spike(x_at), lag);
            }
        }
        self.apply_stimuli_until(t1);
        Ok(())
    }

    /// Runs until `time() >= t_end` (to within half a step).
    pub fn run_until(&mut self, t_end: f64) -> Result<()> {
        let target = (t_end / self.dt).round() as u64;
        while self.step < target {
            self.step()?;
        }
        Ok(())
    }

    fn into_result(self, duration: f64, traces: Option<Traces>) -> SimulationResult {
        SimulationResult {
            spike_trains: self.spikes,
            traces,
            dt: self.dt,
            duration,
            seed: self.seed,
            event_log: self.event_log,
            steps: self.step,
            clamped_steps: self.clamped_steps,
        }
    }
}

/// Initial state for a run. Stream 0 of the run seed draws random initial
/// conditions.
pub fn initial_state(system: &NetworkSystem, seed: u64) -> StateVector {
    let mut y = vec![0.0; system.dim()];
    let mut rng = rng::stream(seed, 0);
    for (ci, cell) in system.cells().iter().enumerate() {
        let spec = system.spec_of(ci);
        let slice = &mut y[cell.offset..cell.offset + spec.state_dim()];
        match (spec.kind, system.initial_condition()) {
            (NeuronKind::Theta, InitialCondition::Rest) => {
                slice[0] = spec
                    .resting_state(cell.drive)
                    .map(|s| s[0])
                    .unwrap_or(0.0);
            }
            (NeuronKind::Theta, InitialCondition::RandomVoltage { .. }) => {
                slice[0] = rng.random::<f64>() * TAU;
            }
            (NeuronKind::Conductance, InitialCondition::Rest) => {
                if let Some(rest) = spec.resting_state(0.0) {
                    slice.copy_from_slice(&rest);
                }
            }
            (NeuronKind::Conductance, InitialCondition::RandomVoltage { low, high }) => {
                let v = low + (high - low) * rng.random::<f64>();
                slice[0] = v;
                for (slot, gate) in slice[1..].iter_mut().zip(spec.gates()) {
                    *slot = gate.eval(v).0;
                }
            }
        }
    }
    y
}

fn steps_for(span: f64, dt: f64, what: &str) -> Result<u64> {
    let n = span / dt;
    let r = n.round();
    if (n - r).abs() > 1e-6 * r.max(1.0) {
        return Err(Error::Config(format!("{what} ({span} ms) is not a multiple of dt ({dt} ms)")));
    }
    Ok(r as u64)
}

/// Fixed-step integration over `[0, duration]`.
pub fn simulate(
    system: &NetworkSystem,
    duration: f64,
    dt: f64,
    recording: &RecordingOptions,
    seed: u64,
) -> Result<SimulationResult> {
    simulate_from(system, initial_state(system, seed), duration, dt, recording, seed)
}

pub fn simulate_from(
    system: &NetworkSystem,
    initial: StateVector,
    duration: f64,
    dt: f64,
    recording: &RecordingOptions,
    seed: u64,
) -> Result<SimulationResult> {
    if system.cell_count() == 0 {
        return Err(Error::EmptySystem);
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::Config("duration must be > 0".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Config("dt must be > 0".into()));
    }
    let total = steps_for(duration, dt, "duration").unwrap_or((duration / dt).ceil() as u64);
    let stride = match recording.trace_stride {
        Some(s) => Some(steps_for(s, dt, "trace stride")?.max(1)),
        None => None,
    };

    let mut sim = Simulator::with_state(system, initial, dt, seed)?;
    sim.schedule_noise(duration);
    let mut samples: Option<Vec<Vec<f64>>> = stride.map(|_| {
        sim.cell_values().map(|v| vec![v]).collect()
    });

    while sim.step < total {
        if let Err(err) = sim.step() {
            let traces = samples.map(|s| Traces {
                stride: stride.unwrap() as f64 * dt,
                samples: s,
            });
            let t_fail = sim.time();
            return Err(match err {
                Error::Blowup { neuron, t, .. } => Error::Blowup {
                    neuron,
                    t,
                    partial: Some(Box::new(sim.into_result(t_fail, traces))),
                },
                other => other,
            });
        }
        if let (Some(k), Some(s)) = (stride, samples.as_mut()) {
            if sim.step % k == 0 {
                for (trace, v) in s.iter_mut().zip(sim.cell_values()) {
                    trace.push(v);
                }
            }
        }
    }

    let clamped = sim.clamped_steps;
    let steps = sim.step;
    if clamped as f64 > MAX_CLAMP_FRACTION * steps as f64 {
        return Err(Error::UnderResolved { clamped, steps });
    }
    let traces = samples.map(|s| Traces {
        stride: stride.unwrap() as f64 * dt,
        samples: s,
    });
    let mut result = sim.into_result(duration, traces);
    for train in &mut result.spike_trains {
        train.retain(|&t| t <= duration);
    }
    Ok(result)
}

/// Phase trace of a theta cell under decaying inhibition
/// `I - g exp(-t / tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcedThetaTrace {
    pub dt: f64,
    /// Wrapped phase at every step, starting at `t = 0`.
    pub phases: Vec<f64>,
    pub spikes: Vec<f64>,
}

impl ForcedThetaTrace {
    pub fn first_spike(&self) -> Option<f64> {
        self.spikes.first().copied()
    }
}

/// Integrates the theta cell under decaying inhibition as the autonomous
/// pair `theta' = (1 - cos theta) + (I - g s)(1 + cos theta)`, `s' = -s / tau`,
/// `s(0) = 1`.
pub fn integrate_theta_forced(
    bias: f64,
    g: f64,
    tau: f64,
    theta0: f64,
    duration: f64,
    dt: f64,
) -> ForcedThetaTrace {
    assert!(tau > 0.0 && g >= 0.0 && dt > 0.0);
    let tau = tau.max(TAU_FLOOR);
    let n = (duration / dt).round() as usize;
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let c = y[0].cos();
        dy[0] = (1.0 - c) + (bias - g * y[1]) * (1.0 + c);
        dy[1] = -y[1] / tau;
    };
    let mut y = [theta0, 1.0];
    let mut ws = Rk4Workspace::new(2);
    let mut phases = Vec::with_capacity(n + 1);
    let mut spikes = Vec::new();
    phases.push(wrap_phase(theta0));
    // count of pi-crossings so far, on the unwrapped phase
    let level = |theta: f64| ((theta - PI) / TAU).floor();
    for k in 0..n {
        let t0 = k as f64 * dt;
        let old = y[0];
        rk4_generic(rhs, &mut y, t0, dt, &mut ws);
        let (l0, l1) = (level(old), level(y[0]));
        if l1 > l0 {
            let target = PI + TAU * l1;
            spikes.push(t0 + dt * (target - old) / (y[0] - old));
        }
        phases.push(wrap_phase(y[0]));
    }
    ForcedThetaTrace { dt, phases, spikes }
}
