use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhythmkit::analysis::{
    build_spike_time_map, classify_excitability, population_frequency, single_cell, spike_time_response,
    synchrony_index, synchrony_report, ExcitabilityClass, Window,
};
use rhythmkit::cells::{make_excitatory_cell, make_fast_firing_interneuron, make_theta_cell, SynapseSpec};
use rhythmkit::dynamics::{simulate, RecordingOptions};
use rhythmkit::Error;

fn regular(n_cells: usize, start: f64, period: f64, end: f64) -> Vec<Vec<f64>> {
    let times: Vec<f64> = (0..).map(|k| start + k as f64 * period).take_while(|&t| t < end).collect();
    vec![times; n_cells]
}

#[test]
fn coincident_spikes_give_forty_hertz_and_full_index() {
    let trains = regular(10, 100.0, 25.0, 600.0);
    let w = Window::new(100.0, 600.0);
    assert_relative_eq!(population_frequency(&trains, w).unwrap(), 40.0, max_relative = 1e-3);
    assert_relative_eq!(synchrony_index(&trains, w).unwrap(), 1.0, epsilon = 1e-9);
    let rep = synchrony_report(&trains, w).unwrap();
    assert_relative_eq!(rep.participation, 1.0, epsilon = 1e-9);
}

#[test]
fn uniform_phases_have_small_index() {
    // a strong rhythmic population sets the cycles; a second population
    // spikes at evenly spread phases within them
    let trains = regular(40, 100.0, 25.0, 1100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut uniform = Vec::new();
    for c in 0..600 {
        let cycle = 100.0 + 25.0 * (c % 40) as f64;
        uniform.push(vec![cycle - 12.5 + 25.0 * rng.random::<f64>()]);
    }
    let w = Window::new(100.0, 1100.0);
    let cycles = rhythmkit::analysis::population_cycles(&trains, w);
    assert!(cycles.len() >= 30);
    let index = rhythmkit::analysis::phase_locking(&uniform, w, &cycles).unwrap();
    assert!(index <= 0.1, "{index}");
}

#[test]
fn poisson_trains_are_not_rhythmic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trains: Vec<Vec<f64>> = (0..50)
        .map(|_| {
            let mut t = 0.0;
            let mut train = Vec::new();
            loop {
                t += -(1.0 - rng.random::<f64>()).ln() / 0.02;
                if t >= 1000.0 {
                    break train;
                }
                train.push(t);
            }
        })
        .collect();
    match synchrony_report(&trains, Window::new(100.0, 1000.0)) {
        Err(Error::UndefinedFrequency) => {}
        Ok(rep) => assert!(rep.synchrony_index < 0.3, "{}", rep.synchrony_index),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn too_few_cycles_is_undefined() {
    let trains = regular(5, 100.0, 100.0, 300.0);
    assert!(matches!(
        population_frequency(&trains, Window::new(0.0, 300.0)),
        Err(Error::UndefinedFrequency)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn index_ignores_relabeling_and_time_shift(seed in 0u64..1000, shift in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trains: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..20).map(|k| 200.0 + 30.0 * k as f64 + 3.0 * rng.random::<f64>()).collect())
            .collect();
        let w = Window::new(150.0, 800.0);
        let base = synchrony_index(&trains, w).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));

        let mut permuted = trains.clone();
        permuted.reverse();
        permuted.rotate_left(seed as usize % 20);
        prop_assert!((synchrony_index(&permuted, w).unwrap() - base).abs() < 1e-9);

        let shifted: Vec<Vec<f64>> = trains.iter().map(|t| t.iter().map(|x| x + shift).collect()).collect();
        let ws = Window::new(w.start + shift, w.end + shift);
        prop_assert!((synchrony_index(&shifted, ws).unwrap() - base).abs() < 1e-6);
    }
}

#[test]
fn zero_strength_prc_is_flat() {
    let prc = spike_time_response(&make_fast_firing_interneuron(), 1.0, &SynapseSpec::inhibitory(1.0, 10.0), 0.0, 16)
        .unwrap();
    assert_eq!(prc.samples.len(), 16);
    assert!(prc.samples.windows(2).all(|w| w[0].phase < w[1].phase));
    for s in &prc.samples {
        assert!(s.shift_ms.abs() < 1e-9 && s.asymptotic_ms.abs() < 1e-9, "{s:?}");
    }
}

#[test]
fn prc_needs_enough_phases_and_a_periodic_cell() {
    let syn = SynapseSpec::inhibitory(1.0, 10.0);
    assert!(spike_time_response(&make_fast_firing_interneuron(), 1.0, &syn, 0.05, 8).is_err());
    assert!(matches!(
        spike_time_response(&make_fast_firing_interneuron(), 0.0, &syn, 0.05, 16),
        Err(Error::NotPeriodic { .. })
    ));
}

#[test]
fn small_strength_prc_is_linear() {
    let cell = make_fast_firing_interneuron();
    let syn = SynapseSpec::inhibitory(1.0, 10.0);
    let full = spike_time_response(&cell, 1.0, &syn, 0.02, 16).unwrap();
    let half = spike_time_response(&cell, 1.0, &syn, 0.01, 16).unwrap();
    let peak = full.samples.iter().map(|s| s.asymptotic_ms.abs()).fold(0.0, f64::max);
    for (f, h) in full.samples.iter().zip(&half.samples) {
        // phases where the response is negligible are skipped
        if f.asymptotic_ms.abs() > 0.1 * peak {
            let ratio = h.asymptotic_ms / (f.asymptotic_ms / 2.0);
            assert!((ratio - 1.0).abs() < 0.2, "phase {}: ratio {ratio}", f.phase);
        }
    }
}

#[test]
fn excitation_only_advances_type_one_cell() {
    let prc = spike_time_response(&make_fast_firing_interneuron(), 1.0, &SynapseSpec::excitatory(1.0, 2.0), 0.05, 20)
        .unwrap();
    for s in &prc.samples {
        assert!(s.shift_ms >= -1e-3, "{s:?}");
    }
    assert!(prc.samples.iter().any(|s| s.shift_ms > 0.1));
}

#[test]
fn identical_pair_map_has_synchronous_fixed_point() {
    let prc = spike_time_response(&make_fast_firing_interneuron(), 1.0, &SynapseSpec::inhibitory(1.0, 10.0), 0.05, 24)
        .unwrap();
    let map = build_spike_time_map(&prc, &prc, prc.period).unwrap();
    let sync = map.synchronous().expect("delta = 0 is a fixed point");
    assert!(sync.delta_ms.abs() < 1e-6 * prc.period);
    // periodic in delta: the samples cover one period starting at -T0/2
    let (first, last) = (map.samples[0].0, map.samples.last().unwrap().0);
    assert!((last - first) < map.period && (first + map.period / 2.0).abs() < 1e-9);
}

/// Brute-force rate scan with the same measurement window as the library.
fn brute_rate(spec: &rhythmkit::cells::NeuronSpec, drive: f64) -> f64 {
    let sys = single_cell(spec, drive).unwrap();
    let r = simulate(&sys, 3000.0, 0.01, &RecordingOptions::spikes_only(), 0).unwrap();
    let late: Vec<f64> = r.spike_trains[0].iter().filter(|&&t| t >= 1000.0).copied().collect();
    if late.len() < 2 {
        return 0.0;
    }
    1000.0 * (late.len() - 1) as f64 / (late[late.len() - 1] - late[0])
}

fn first_firing(spec: &rhythmkit::cells::NeuronSpec, (lo, hi): (f64, f64), n: usize) -> (f64, f64) {
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .map(|d| (d, brute_rate(spec, d)))
        .find(|&(_, r)| r > 0.0)
        .unwrap()
}

#[test]
fn excitability_classes_agree_with_brute_force_scan() {
    let theta = classify_excitability(&make_theta_cell(), (-0.01, 0.01), 5).unwrap();
    assert_eq!(theta.class, ExcitabilityClass::TypeI);

    let ff = make_fast_firing_interneuron();
    let report = classify_excitability(&ff, (0.0, 1.0), 5).unwrap();
    assert_eq!(report.class, ExcitabilityClass::TypeI);
    let (d, r) = first_firing(&ff, (0.0, 1.0), 40);
    assert!((d - report.onset_drive).abs() <= 0.03, "{d} vs {}", report.onset_drive);
    assert!(r < 20.0, "first firing rate {r}");

    let adapted = make_excitatory_cell(true);
    let report = classify_excitability(&adapted, (2.0, 3.5), 5).unwrap();
    assert_eq!(report.class, ExcitabilityClass::TypeII);
    let (d, r) = first_firing(&adapted, (2.0, 3.5), 30);
    assert!((d - report.onset_drive).abs() <= 0.06, "{d} vs {}", report.onset_drive);
    assert!(r >= 20.0, "first firing rate {r}");
}

#[test]
fn classification_is_invariant_to_interval_rescaling() {
    let ff = make_fast_firing_interneuron();
    let a = classify_excitability(&ff, (0.0, 1.0), 0).unwrap();
    let b = classify_excitability(&ff, (0.1, 0.6), 0).unwrap();
    assert_eq!(a.class, b.class);
    assert!((a.onset_drive - b.onset_drive).abs() < 1e-3, "{} vs {}", a.onset_drive, b.onset_drive);
}

#[test]
fn silent_interval_is_an_error() {
    assert!(classify_excitability(&make_fast_firing_interneuron(), (-1.0, -0.5), 0).is_err());
}
