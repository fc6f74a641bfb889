use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Histogram bin width for cycle detection (ms).
const BIN_MS: f64 = 1.0;
/// Standard deviation of the Gaussian smoothing kernel (ms).
const SMOOTH_MS: f64 = 3.0;

/// Reports with an index below this are flagged as non-rhythmic.
pub const RHYTHM_THRESHOLD: f64 = 0.5;

/// Analysis window `[start, end)` in ms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynchronyReport {
    pub frequency_hz: f64,
    pub synchrony_index: f64,
    /// Mean fraction of cells spiking per population cycle.
    pub participation: f64,
    pub participation_series: Vec<f64>,
    pub window: Window,
}

impl SynchronyReport {
    pub fn is_rhythmic(&self) -> bool {
        self.synchrony_index >= RHYTHM_THRESHOLD
    }
}

/// Times of population-cycle peaks: local maxima (above half the global
/// maximum) of the pooled spike histogram smoothed with a Gaussian kernel,
/// refined by parabolic interpolation.
pub fn population_cycles(trains: &[Vec<f64>], window: Window) -> Vec<f64> {
    let span = window.end - window.start;
    if !(span > 0.0) {
        return Vec::new();
    }
    let n_bins = (span / BIN_MS).ceil() as usize;
    let mut hist = vec![0.0; n_bins];
    for &t in trains.iter().flatten() {
        if window.contains(t) {
            let b = (((t - window.start) / BIN_MS) as usize).min(n_bins - 1);
            hist[b] += 1.0;
        }
    }
    let sigma = SMOOTH_MS / BIN_MS;
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp())
        .collect();
    // smoothed value at bin i; defined one bin past either edge so edge
    // peaks refine symmetrically
    let smooth_at = |i: isize| {
        kernel
            .iter()
            .enumerate()
            .map(|(j, w)| {
                let idx = i + j as isize - radius;
                if idx >= 0 && (idx as usize) < n_bins {
                    w * hist[idx as usize]
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    };
    let smooth: Vec<f64> = (-1..=n_bins as isize).map(smooth_at).collect();
    let max = smooth.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let at = |i: isize| smooth[(i + 1) as usize];
    let mut peaks = Vec::new();
    for i in 0..n_bins as isize {
        let (l, c, r) = (at(i - 1), at(i), at(i + 1));
        if c >= 0.5 * max && c > l && c >= r {
            let denom = l - 2.0 * c + r;
            let offset = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            peaks.push(window.start + (i as f64 + 0.5 + offset) * BIN_MS);
        }
    }
    peaks
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn cycle_period(cycles: &[f64]) -> Result<f64> {
    if cycles.len() < 3 {
        return Err(Error::UndefinedFrequency);
    }
    Ok(median(cycles.windows(2).map(|w| w[1] - w[0]).collect()))
}

/// Population frequency (Hz) from the median interval between cycle peaks.
/// The caller excludes the initial transient through `window`.
pub fn population_frequency(trains: &[Vec<f64>], window: Window) -> Result<f64> {
    let cycles = population_cycles(trains, window);
    Ok(1000.0 / cycle_period(&cycles)?)
}

/// Mean resultant length of spike phases relative to the given cycle
/// peaks. A spike between peaks `p_k` and `p_{k+1}` has phase
/// `2 pi (t - p_k) / (p_{k+1} - p_k)`; spikes outside the peak range use
/// the median period.
pub fn phase_locking(trains: &[Vec<f64>], window: Window, cycles: &[f64]) -> Result<f64> {
    let period = cycle_period(cycles)?;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for &t in trains.iter().flatten() {
        if !window.contains(t) {
            continue;
        }
        let k = cycles.partition_point(|&p| p <= t);
        let phase = if k == 0 {
            (t - cycles[0]) / period
        } else if k == cycles.len() {
            (t - cycles[k - 1]) / period
        } else {
            (t - cycles[k - 1]) / (cycles[k] - cycles[k - 1])
        };
        let a = TAU * phase;
        sx += a.cos();
        sy += a.sin();
        n += 1;
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(((sx * sx + sy * sy).sqrt() / n as f64).clamp(0.0, 1.0))
}

pub fn synchrony_index(trains: &[Vec<f64>], window: Window) -> Result<f64> {
    let cycles = population_cycles(trains, window);
    phase_locking(trains, window, &cycles)
}

/// Fraction of cells that spike within each interior cycle, cycles being
/// delimited by midpoints between consecutive peaks.
fn participation(trains: &[Vec<f64>], cycles: &[f64]) -> Vec<f64> {
    if trains.is_empty() || cycles.len() < 3 {
        return Vec::new();
    }
    (1..cycles.len() - 1)
        .map(|k| {
            let lo = 0.5 * (cycles[k - 1] + cycles[k]);
            let hi = 0.5 * (cycles[k] + cycles[k + 1]);
            let active = trains
                .iter()
                .filter(|tr| {
                    let i = tr.partition_point(|&t| t < lo);
                    i < tr.len() && tr[i] < hi
                })
                .count();
            active as f64 / trains.len() as f64
        })
        .collect()
}

pub fn synchrony_report(trains: &[Vec<f64>], window: Window) -> Result<SynchronyReport> {
    let cycles = population_cycles(trains, window);
    let period = cycle_period(&cycles)?;
    let index = phase_locking(trains, window, &cycles)?;
    let series = participation(trains, &cycles);
    let mean = if series.is_empty() {
        0.0
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    };
    Ok(SynchronyReport {
        frequency_hz: 1000.0 / period,
        synchrony_index: index,
        participation: mean,
        participation_series: series,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn locked(n_cells: usize, period: f64, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_cells)
            .map(|_| {
                (0..20)
                    .map(|k| 100.0 + k as f64 * period + jitter * (rng.random::<f64>() - 0.5))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn forty_hz_lockstep() {
        let trains = locked(10, 25.0, 0.0, 0);
        let w = Window::new(100.0, 600.0);
        assert_abs_diff_eq!(population_frequency(&trains, w).unwrap(), 40.0, epsilon = 1e-9);
        let r = synchrony_report(&trains, w).unwrap();
        assert_abs_diff_eq!(r.synchrony_index, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.participation, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn too_few_cycles() {
        let trains = vec![vec![100.0, 125.0]];
        assert!(matches!(
            population_frequency(&trains, Window::new(90.0, 140.0)),
            Err(Error::UndefinedFrequency)
        ));
    }

    #[test]
    fn uniform_phases_give_small_index() {
        let cycles: Vec<f64> = (0..21).map(|k| 100.0 + 25.0 * k as f64).collect();
        // 600 spikes at evenly spread phases across the cycles
        let trains: Vec<Vec<f64>> = (0..30)
            .map(|c| (0..20).map(|k| 100.0 + 25.0 * k as f64 + 25.0 * (c as f64 + 0.5) / 30.0).collect())
            .collect();
        let idx = phase_locking(&trains, Window::new(100.0, 600.0), &cycles).unwrap();
        assert!(idx <= 0.1, "{idx}");
    }

    #[test]
    fn poisson_trains_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trains: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let mut t = 0.0;
                let mut v = Vec::new();
                loop {
                    t += -(1.0 - rng.random::<f64>()).ln() / 0.04;
                    if t >= 1000.0 {
                        break v;
                    }
                    v.push(t);
                }
            })
            .collect();
        match synchrony_report(&trains, Window::new(0.0, 1000.0)) {
            Err(Error::UndefinedFrequency) => {}
            Ok(r) => assert!(!r.is_rhythmic(), "{r:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn index_invariant_under_relabel_and_shift(seed in 0u64..1000, shift in -50.0f64..50.0) {
            let trains = locked(12, 22.0, 4.0, seed);
            let w = Window::new(90.0, 540.0);
            let base = synchrony_index(&trains, w).unwrap();
            let mut relabeled = trains.clone();
            relabeled.reverse();
            relabeled.rotate_left(5);
            prop_assert!((synchrony_index(&relabeled, w).unwrap() - base).abs() < 1e-12);
            let shifted: Vec<Vec<f64>> = trains.iter().map(|t| t.iter().map(|x| x + shift).collect()).collect();
            let ws = Window::new(w.start + shift, w.end + shift);
            let moved = synchrony_index(&shifted, ws).unwrap();
            prop_assert!((moved - base).abs() < 1e-6, "{} vs {}", moved, base);
            prop_assert!((0.0..=1.0).contains(&base));
        }
    }
}
