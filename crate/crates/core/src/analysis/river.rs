use crate::dynamics::integrate_theta_forced;
use crate::error::{Error, Result};

/// Step used for ensemble integrations (ms).
pub const RIVER_DT: f64 = 0.01;

/// First spike times of an ensemble whose initial phases are evenly spread
/// over a width of `spread0` radians centred on theta = 0, under decaying
/// inhibition `I - g exp(-t / tau)`.
pub fn river_first_spikes(bias: f64, g: f64, tau: f64, ensemble_size: usize, spread0: f64) -> Result<Vec<f64>> {
    let limit = 20.0 * tau;
    (0..ensemble_size)
        .map(|k| {
            let theta0 = spread0 * ((k as f64 + 0.5) / ensemble_size as f64 - 0.5);
            integrate_theta_forced(bias, g, tau, theta0, limit, RIVER_DT)
                .first_spike()
                .ok_or(Error::NoSpike { member: k, limit_ms: limit })
        })
        .collect()
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Spread of forced first-spike times relative to the unforced spread.
pub fn river_compression(bias: f64, g: f64, tau: f64, ensemble_size: usize, spread0: f64) -> Result<f64> {
    if ensemble_size < 2 || !(spread0 > 0.0) {
        return Err(Error::Config("river ensemble needs >= 2 members and a positive spread".into()));
    }
    if !(bias > 0.0) || !(tau > 0.0) || !(g >= 0.0) {
        return Err(Error::Config("river compression needs I > 0, tau > 0, g >= 0".into()));
    }
    let forced = river_first_spikes(bias, g, tau, ensemble_size, spread0)?;
    let free = river_first_spikes(bias, 0.0, tau, ensemble_size, spread0)?;
    Ok(std_dev(&forced) / std_dev(&free))
}
