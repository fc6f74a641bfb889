//! Gate kinetics, ionic and synaptic currents, and the neuron templates.
//!
//! Membrane convention: `C dv/dt = -sum(I_ion) - sum(I_syn) + I_ext`, with
//! `I_ion = g * act^p * inact^q * (v - E)`. Units are mV, ms, uF/cm^2,
//! mS/cm^2 and uA/cm^2. Theta cells carry a dimensionless bias instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to every gate time constant (ms).
pub const TAU_FLOOR: f64 = 0.01;

/// Voltage range over which gate invariants are guaranteed (mV).
pub const GATE_RANGE: (f64, f64) = (-100.0, 50.0);

/// Decay constant of fast-firing-cell inhibition (ms).
pub const TAU_INHIBITION_FAST: f64 = 10.0;

/// Slower inhibition decay associated with O-LM cells (ms). Provided for
/// reference only; no O-LM template exists.
pub const TAU_INHIBITION_SLOW: f64 = 40.0;

pub const V_SYN_EXCITATORY: f64 = 0.0;
pub const V_SYN_INHIBITORY: f64 = -80.0;

/// Reference potential used to classify synapse polarity onto theta cells.
pub const THETA_REFERENCE_MV: f64 = -65.0;

/// Closed-form rate function of a rate-pair gate (1/ms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateFn {
    /// `a * exp((v - v0) / k)`
    Exp { a: f64, v0: f64, k: f64 },
    /// `a * (v - v0) / (1 - exp(-(v - v0) / k))`, equal to `a * k` at `v = v0`.
    Linoid { a: f64, v0: f64, k: f64 },
    /// `a / (1 + exp(-(v - v0) / k))`
    Sigmoid { a: f64, v0: f64, k: f64 },
}

impl RateFn {
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            RateFn::Exp { a, v0, k } => a * ((v - v0) / k).exp(),
            RateFn::Linoid { a, v0, k } => {
                let x = (v - v0) / k;
                if x.abs() < 1e-6 {
                    // series of x / (1 - e^-x) around 0
                    a * k * (1.0 + 0.5 * x)
                } else {
                    a * (v - v0) / (1.0 - (-x).exp())
                }
            }
            RateFn::Sigmoid { a, v0, k } => a / (1.0 + (-(v - v0) / k).exp()),
        }
    }
}

/// Voltage-dependent time constant `base + amplitude * exp(-((v - center) / width)^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauCurve {
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
}

fn unit_width() -> f64 {
    1.0
}

impl TauCurve {
    pub fn constant(tau: f64) -> Self {
        Self {
            base: tau,
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
        }
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if self.amplitude == 0.0 {
            return self.base;
        }
        let z = (v - self.center) / self.width;
        self.base + self.amplitude * (-z * z).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Kinetics {
    /// `x_inf = 1 / (1 + exp(-(v - v_half) / slope))`; a negative slope gives
    /// an inactivation gate.
    Sigmoid {
        v_half: f64,
        slope: f64,
        tau: TauCurve,
    },
    /// `x_inf = alpha / (alpha + beta)`, `tau = 1 / (alpha + beta)`.
    RatePair { alpha: RateFn, beta: RateFn },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub exponent: u32,
    pub kinetics: Kinetics,
}

impl GateSpec {
    /// Steady state and time constant at voltage `v`, with the time constant
    /// floored at [`TAU_FLOOR`].
    #[inline]
    pub fn eval(&self, v: f64) -> (f64, f64) {
        eval_gate(self, v)
    }

    fn validate(&self, context: &str) -> Result<()> {
        if self.exponent == 0 {
            return Err(Error::Config(format!("{context}: gate exponent must be >= 1")));
        }
        if let Kinetics::Sigmoid { slope, tau, .. } = self.kinetics {
            if slope == 0.0 || !slope.is_finite() {
                return Err(Error::Config(format!("{context}: sigmoid slope must be nonzero")));
            }
            if tau.width == 0.0 {
                return Err(Error::Config(format!("{context}: tau width must be nonzero")));
            }
        }
        Ok(())
    }
}

#[inline]
pub fn eval_gate(gate: &GateSpec, v: f64) -> (f64, f64) {
    let (x_inf, tau) = match gate.kinetics {
        Kinetics::Sigmoid { v_half, slope, tau } => {
            (1.0 / (1.0 + (-(v - v_half) / slope).exp()), tau.eval(v))
        }
        Kinetics::RatePair { alpha, beta } => {
            let a = alpha.eval(v);
            let b = beta.eval(v);
            let sum = a + b;
            (a / sum, 1.0 / sum)
        }
    };
    (x_inf, tau.max(TAU_FLOOR))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentSpec {
    pub name: String,
    /// Maximal conductance (mS/cm^2).
    pub g_max: f64,
    /// Reversal potential (mV).
    pub reversal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<GateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inactivation: Option<GateSpec>,
}

impl CurrentSpec {
    pub fn leak(g_max: f64, reversal: f64) -> Self {
        Self {
            name: "leak".into(),
            g_max,
            reversal,
            activation: None,
            inactivation: None,
        }
    }

    pub fn is_leak(&self) -> bool {
        self.activation.is_none() && self.inactivation.is_none()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateSpec> {
        self.activation.iter().chain(self.inactivation.iter())
    }

    pub fn gate_count(&self) -> usize {
        self.activation.is_some() as usize + self.inactivation.is_some() as usize
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

/// Ionic current (uA/cm^2, positive = outward). `gates` holds the activation
/// value followed by the inactivation value, for whichever gates exist.
#[inline]
pub fn ionic_current(current: &CurrentSpec, gates: &[f64], v: f64) -> f64 {
    let mut conductance = current.g_max;
    let mut i = 0;
    if let Some(act) = &current.activation {
        conductance *= powi(gates[i], act.exponent);
        i += 1;
    }
    if let Some(inact) = &current.inactivation {
        conductance *= powi(gates[i], inact.exponent);
    }
    conductance * (v - current.reversal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeuronKind {
    Conductance,
    Theta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronSpec {
    pub name: String,
    pub kind: NeuronKind,
    /// Membrane capacitance (uF/cm^2). Unused for theta cells.
    #[serde(default = "unit_capacitance")]
    pub capacitance: f64,
    #[serde(default, rename = "current")]
    pub currents: Vec<CurrentSpec>,
}

fn unit_capacitance() -> f64 {
    1.0
}

impl NeuronSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance > 0.0) {
            return Err(Error::Config(format!("{}: capacitance must be > 0", self.name)));
        }
        match self.kind {
            NeuronKind::Theta => {
                if !self.currents.is_empty() {
                    return Err(Error::Config(format!(
                        "{}: theta cells carry no ionic currents",
                        self.name
                    )));
                }
            }
            NeuronKind::Conductance => {
                let leaks = self.currents.iter().filter(|c| c.is_leak()).count();
                if leaks != 1 {
                    return Err(Error::Config(format!(
                        "{}: expected exactly one leak current, found {leaks}",
                        self.name
                    )));
                }
                for c in &self.currents {
                    if !(c.g_max >= 0.0) {
                        return Err(Error::Config(format!("{}/{}: g_max < 0", self.name, c.name)));
                    }
                    for g in c.gates() {
                        g.validate(&format!("{}/{}", self.name, c.name))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of state variables per cell.
    pub fn state_dim(&self) -> usize {
        match self.kind {
            NeuronKind::Theta => 1,
            NeuronKind::Conductance => 1 + self.gate_count(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.currents.iter().map(CurrentSpec::gate_count).sum()
    }

    /// All gates in state-vector order.
    pub fn gates(&self) -> impl Iterator<Item = &GateSpec> {
        self.currents.iter().flat_map(CurrentSpec::gates)
    }

    /// Total ionic current with every gate at its steady state.
    pub fn steady_state_current(&self, v: f64) -> f64 {
        let mut total = 0.0;
        let mut gates = [0.0; 2];
        for c in &self.currents {
            for (slot, g) in gates.iter_mut().zip(c.gates()) {
                *slot = eval_gate(g, v).0;
            }
            total += ionic_current(c, &gates, v);
        }
        total
    }

    /// Hyperpolarized-most equilibrium at constant drive, as a full cell state
    /// (`v` followed by gates at steady state). `None` if no equilibrium
    /// exists in [`GATE_RANGE`]. Theta cells return their stable phase for
    /// negative drive.
    pub fn resting_state(&self, drive: f64) -> Option<Vec<f64>> {
        match self.kind {
            NeuronKind::Theta => {
                if drive < 0.0 && drive > -1.0 {
                    let theta = -((1.0 + drive) / (1.0 - drive)).acos();
                    Some(vec![theta.rem_euclid(std::f64::consts::TAU)])
                } else if drive == 0.0 {
                    Some(vec![0.0])
                } else {
                    None
                }
            }
            NeuronKind::Conductance => {
                let f = |v: f64| drive - self.steady_state_current(v);
                let v = first_root(f, GATE_RANGE.0, GATE_RANGE.1, 0.25)?;
                let mut state = Vec::with_capacity(self.state_dim());
                state.push(v);
                state.extend(self.gates().map(|g| eval_gate(g, v).0));
                Some(state)
            }
        }
    }
}

/// Lowest sign change of `f` on a uniform scan, refined by bisection to
/// machine precision.
fn first_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = (lo + i as f64 * step).min(hi);
        let fb = f(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fa.signum() != fb.signum() {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (x0 + x1);
                if mid <= x0 || mid >= x1 {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    return Some(mid);
                }
                if fm.signum() == f0.signum() {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
            }
            return Some(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rise {
    /// Gate jumps to 1 at each presynaptic spike.
    Instantaneous,
    /// Gate moves a fraction of the way to 1: `x <- x + increment * (1 - x)`.
    Saturating { increment: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseSpec {
    /// Maximal conductance (mS/cm^2), or dimensionless strength onto theta cells.
    pub g_max: f64,
    /// Reversal potential (mV).
    pub reversal: f64,
    pub tau_decay: f64,
    pub rise: Rise,
}

impl SynapseSpec {
    pub fn excitatory(g_max: f64, tau_decay: f64) -> Self {
        Self {
            g_max,
            reversal: V_SYN_EXCITATORY,
            tau_decay,
            rise: Rise::Instantaneous,
        }
    }

    pub fn inhibitory(g_max: f64, tau_decay: f64) -> Self {
        Self {
            g_max,
            reversal: V_SYN_INHIBITORY,
            tau_decay,
            rise: Rise::Instantaneous,
        }
    }

    pub fn with_strength(mut self, g_max: f64) -> Self {
        self.g_max = g_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_decay > 0.0) {
            return Err(Error::Config("synapse tau_decay must be > 0".into()));
        }
        if !(self.g_max >= 0.0) {
            return Err(Error::Config("synapse g_max must be >= 0".into()));
        }
        if let Rise::Saturating { increment } = self.rise {
            if !(0.0..=1.0).contains(&increment) {
                return Err(Error::Config("saturating increment must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Excitatory iff the synaptic current is inward at the target's resting
    /// potential.
    pub fn polarity_for(&self, target: &NeuronSpec) -> Polarity {
        let v_ref = match target.kind {
            NeuronKind::Theta => THETA_REFERENCE_MV,
            NeuronKind::Conductance => target
                .resting_state(0.0)
                .map(|s| s[0])
                .unwrap_or(THETA_REFERENCE_MV),
        };
        if v_ref < self.reversal {
            Polarity::Excitatory
        } else {
            Polarity::Inhibitory
        }
    }

    /// Gate value after a presynaptic spike arriving at gate value `x`.
    #[inline]
    pub fn on_spike(&self, x: f64) -> f64 {
        match self.rise {
            Rise::Instantaneous => 1.0,
            Rise::Saturating { increment } => x + increment * (1.0 - x),
        }
    }

    /// Gate value `dt` ms after a spike that left the gate at `x`, with no
    /// further spikes.
    #[inline]
    pub fn decayed(&self, x: f64, dt: f64) -> f64 {
        x * (-dt / self.tau_decay).exp()
    }
}

/// Constant-drive interval over which a template fires in the gamma band,
/// as documented in its template file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingRange {
    pub drive_low: f64,
    pub drive_high: f64,
}

impl OperatingRange {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.drive_low + self.drive_high)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Template {
    pub version: u32,
    pub neuron: NeuronSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_range: Option<OperatingRange>,
}

pub const FAST_FIRING_TEMPLATE: &str = include_str!("../templates/fast_firing_interneuron.toml");
pub const EXCITATORY_TEMPLATE: &str = include_str!("../templates/excitatory_cell.toml");
pub const EXCITATORY_ADAPTED_TEMPLATE: &str =
    include_str!("../templates/excitatory_cell_adapted.toml");
pub const THETA_TEMPLATE: &str = include_str!("../templates/theta_cell.toml");

pub fn parse_template(text: &str) -> Result<Template> {
    let t: Template = toml::from_str(text).map_err(|e| Error::Template(e.to_string()))?;
    t.neuron.validate()?;
    Ok(t)
}

fn builtin(text: &str) -> Template {
    parse_template(text).expect("built-in template is valid")
}

pub fn fast_firing_template() -> Template {
    builtin(FAST_FIRING_TEMPLATE)
}

/// Wang-Buzsaki-style fast-spiking interneuron (transient Na, delayed
/// rectifier K, leak). Type I.
pub fn make_fast_firing_interneuron() -> NeuronSpec {
    fast_firing_template().neuron
}

/// Reduced Traub-Miles pyramidal cell; `with_adaptation` adds a slow
/// non-inactivating K current that moves firing onset to a Hopf bifurcation.
pub fn make_excitatory_cell(with_adaptation: bool) -> NeuronSpec {
    excitatory_template(with_adaptation).neuron
}

pub fn excitatory_template(with_adaptation: bool) -> Template {
    if with_adaptation {
        builtin(EXCITATORY_ADAPTED_TEMPLATE)
    } else {
        builtin(EXCITATORY_TEMPLATE)
    }
}

pub fn make_theta_cell() -> NeuronSpec {
    builtin(THETA_TEMPLATE).neuron
}
