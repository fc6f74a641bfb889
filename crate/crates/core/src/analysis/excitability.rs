use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::NeuronSpec;
use crate::dynamics::{simulate, RecordingOptions};
use crate::error::{Error, Result};
use crate::network::{HeterogeneitySpec, NetworkBuilder, NetworkSystem, Population};

/// Length of the probe run used to decide whether a drive elicits firing (ms).
pub const RHEOBASE_WINDOW_MS: f64 = 1000.0;
/// Initial part of a firing-rate run that is discarded (ms).
pub const FI_RATE_TRANSIENT_MS: f64 = 1000.0;
/// Part of a firing-rate run over which the rate is measured (ms).
pub const FI_RATE_WINDOW_MS: f64 = 2000.0;

const SINGLE_CELL_DT: f64 = 0.01;
const TYPE_I_MAX_HZ: f64 = 10.0;
const TYPE_II_MIN_HZ: f64 = 20.0;

/// One isolated cell at constant drive, started at its zero-drive rest.
pub fn single_cell(spec: &NeuronSpec, drive: f64) -> Result<NetworkSystem> {
    NetworkBuilder::new()
        .population(Population::new("cell", spec.clone(), 1, &HeterogeneitySpec::homogeneous(drive))?)
        .build()
}

/// Whether the cell keeps firing at `drive`: a spike in the second half of a
/// [`RHEOBASE_WINDOW_MS`] run. Onset transients alone do not count.
pub fn fires(spec: &NeuronSpec, drive: f64) -> Result<bool> {
    let system = single_cell(spec, drive)?;
    let r = simulate(&system, RHEOBASE_WINDOW_MS, SINGLE_CELL_DT, &RecordingOptions::spikes_only(), 0)?;
    Ok(r.spike_trains[0].iter().any(|&t| t >= 0.5 * RHEOBASE_WINDOW_MS))
}

/// Steady firing rate (Hz) from the mean inter-spike interval after the
/// transient; 0 for a silent cell.
pub fn firing_rate(spec: &NeuronSpec, drive: f64) -> Result<f64> {
    let system = single_cell(spec, drive)?;
    let total = FI_RATE_TRANSIENT_MS + FI_RATE_WINDOW_MS;
    let r = simulate(&system, total, SINGLE_CELL_DT, &RecordingOptions::spikes_only(), 0)?;
    let spikes: Vec<f64> = r.spike_trains[0]
        .iter()
        .copied()
        .filter(|&t| t >= FI_RATE_TRANSIENT_MS)
        .collect();
    Ok(match spikes.len() {
        0 => 0.0,
        1 => 1000.0 / FI_RATE_WINDOW_MS,
        n => 1000.0 * (n - 1) as f64 / (spikes[n - 1] - spikes[0]),
    })
}

/// Lowest drive in `interval` at which the cell [`fires`], by bisection to
/// 1e-3 drive units.
pub fn rheobase(spec: &NeuronSpec, interval: (f64, f64)) -> Result<f64> {
    onset(spec, interval, 1e-3)
}

fn onset(spec: &NeuronSpec, (low, high): (f64, f64), tol: f64) -> Result<f64> {
    if !(low < high) {
        return Err(Error::Config(format!("empty drive interval [{low}, {high}]")));
    }
    if !fires(spec, high)? {
        return Err(Error::NoFiring { low, high });
    }
    if fires(spec, low)? {
        return Ok(low);
    }
    let (mut lo, mut hi) = (low, high);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if fires(spec, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcitabilityClass {
    TypeI,
    TypeII,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitabilityReport {
    pub class: ExcitabilityClass,
    pub onset_drive: f64,
    /// Rate just above onset (Hz).
    pub onset_rate_hz: f64,
    /// `(drive, rate Hz)` on a uniform grid over the interval.
    pub fi_curve: Vec<(f64, f64)>,
}

/// Locates the firing onset by bisection (tolerance 1e-3 of the interval
/// width) and classifies by the rate 1% of the width above it: below
/// 10 Hz is Type I, 20 Hz or more is Type II, anything between is
/// indeterminate.
pub fn classify_excitability(
    neuron: &NeuronSpec,
    interval: (f64, f64),
    n_steps: usize,
) -> Result<ExcitabilityReport> {
    let width = interval.1 - interval.0;
    let onset_drive = onset(neuron, interval, 1e-3 * width)?;
    let onset_rate_hz = firing_rate(neuron, onset_drive + 0.01 * width)?;
    let class = if onset_rate_hz < TYPE_I_MAX_HZ {
        ExcitabilityClass::TypeI
    } else if onset_rate_hz >= TYPE_II_MIN_HZ {
        ExcitabilityClass::TypeII
    } else {
        ExcitabilityClass::Indeterminate
    };
    let drives: Vec<f64> = match n_steps {
        0 => Vec::new(),
        1 => vec![interval.0],
        n => (0..n).map(|k| interval.0 + width * k as f64 / (n - 1) as f64).collect(),
    };
    let fi_curve = drives
        .par_iter()
        .map(|&d| firing_rate(neuron, d).map(|r| (d, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExcitabilityReport {
        class,
        onset_drive,
        onset_rate_hz,
        fi_curve,
    })
}
