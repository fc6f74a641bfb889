use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rhythmkit::cells::{
    eval_gate, ionic_current, make_excitatory_cell, make_fast_firing_interneuron, make_theta_cell, CurrentSpec,
    NeuronKind, NeuronSpec, SynapseSpec,
};
use rhythmkit::dynamics::{
    derivative, rk4_generic, rk4_step, simulate, RecordingOptions, Rk4Workspace, Simulator,
};
use rhythmkit::network::{
    ConnectivityBlock, ConnectivityRule, HeterogeneitySpec, InitialCondition, NetworkBuilder, NetworkSystem,
    NoiseSource, Population, RANDOM_START,
};
use rhythmkit::Error;

fn one_cell(spec: NeuronSpec, drive: f64) -> NetworkSystem {
    NetworkBuilder::new()
        .population(Population::new("c", spec, 1, &HeterogeneitySpec::homogeneous(drive)).unwrap())
        .build()
        .unwrap()
}

#[test]
fn leak_only_derivative() {
    let spec = NeuronSpec {
        name: "leak".into(),
        kind: NeuronKind::Conductance,
        capacitance: 1.0,
        currents: vec![CurrentSpec::leak(0.1, -70.0)],
    };
    let sys = one_cell(spec, 0.0);
    let d = derivative(&sys, &[-60.0], 0.0).unwrap();
    assert_abs_diff_eq!(d[0], -1.0, epsilon = 1e-12);
}

#[test]
fn theta_rest_point_has_zero_derivative() {
    let sys = one_cell(make_theta_cell(), 0.0);
    assert_eq!(derivative(&sys, &[0.0], 0.0).unwrap(), vec![0.0]);
}

#[test]
fn dimension_mismatch_is_reported() {
    let sys = one_cell(make_theta_cell(), 0.0);
    assert!(matches!(
        derivative(&sys, &[0.0, 1.0], 0.0),
        Err(Error::DimensionMismatch { expected: 1, got: 2 })
    ));
}

#[test]
fn rk4_exponential_decay() {
    let mut y = [1.0];
    let mut ws = Rk4Workspace::new(1);
    rk4_generic(|_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0], &mut y, 0.0, 0.1, &mut ws);
    assert_abs_diff_eq!(y[0], 0.904_837_42, epsilon = 1e-7);
}

#[test]
fn rk4_zero_derivative_is_identity() {
    let mut y = [0.3, -2.0, 7.5];
    let mut ws = Rk4Workspace::new(3);
    rk4_generic(|_, _: &[f64], dy: &mut [f64]| dy.fill(0.0), &mut y, 1.0, 0.25, &mut ws);
    assert_eq!(y, [0.3, -2.0, 7.5]);
}

/// Newton iteration on the steady-state current balance, written against
/// the gate and current primitives rather than the library's root finder.
fn rest_by_newton(spec: &NeuronSpec, v0: f64) -> Vec<f64> {
    let balance = |v: f64| -> f64 {
        spec.currents
            .iter()
            .map(|c: &CurrentSpec| {
                let gates: Vec<f64> = c.gates().map(|g| eval_gate(g, v).0).collect();
                ionic_current(c, &gates, v)
            })
            .sum()
    };
    let mut v = v0;
    for _ in 0..100 {
        let h = 1e-6;
        let step = balance(v) / ((balance(v + h) - balance(v - h)) / (2.0 * h));
        v -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    let mut state = vec![v];
    state.extend(spec.gates().map(|g| eval_gate(g, v).0));
    state
}

#[test]
fn excitatory_template_rests_at_root() {
    let spec = make_excitatory_cell(false);
    let oracle = rest_by_newton(&spec, -65.0);
    let library = spec.resting_state(0.0).unwrap();
    assert_abs_diff_eq!(oracle[0], library[0], epsilon = 1e-8);
    let sys = one_cell(spec, 0.0);
    let d = derivative(&sys, &oracle, 0.0).unwrap();
    for x in d {
        assert!(x.abs() < 1e-6, "{x}");
    }
}

/// Terminal state of a single excitatory cell driven through one spike
/// (a smooth trajectory: no discontinuities, no clamping).
fn hh_terminal(dt: f64) -> Vec<f64> {
    let spec = make_excitatory_cell(false);
    let mut state = spec.resting_state(0.0).unwrap();
    state[0] = -50.0;
    let sys = one_cell(spec, 1.0);
    let mut t = 0.0;
    let n = (8.0 / dt).round() as usize;
    for _ in 0..n {
        state = rk4_step(&sys, &state, t, dt).unwrap().0;
        t += dt;
    }
    state
}

#[test]
fn rk4_is_fourth_order_on_hh_problem() {
    let dt = 0.04;
    let reference = hh_terminal(dt / 16.0);
    let err = |s: Vec<f64>| s.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let coarse = err(hh_terminal(dt));
    let fine = err(hh_terminal(dt / 2.0));
    assert!(coarse / fine >= 12.0, "ratio {} ({coarse:e} / {fine:e})", coarse / fine);
}

fn noisy_network(block_order_swapped: bool) -> NetworkSystem {
    let e = Population::new("E", make_excitatory_cell(false), 12, &HeterogeneitySpec::uniform(1.0, 0.1, 3)).unwrap();
    let i = Population::new("I", make_fast_firing_interneuron(), 4, &HeterogeneitySpec::homogeneous(0.0)).unwrap();
    let ei = ConnectivityBlock {
        source: "E".into(),
        target: "I".into(),
        rule: ConnectivityRule::Bernoulli { p: 0.5 },
        synapse: SynapseSpec::excitatory(0.5, 2.0),
        seed: 11,
    };
    let ie = ConnectivityBlock {
        source: "I".into(),
        target: "E".into(),
        rule: ConnectivityRule::FixedInDegree { k: 2 },
        synapse: SynapseSpec::inhibitory(1.0, 10.0),
        seed: 12,
    };
    let (first, second) = if block_order_swapped { (ie, ei) } else { (ei, ie) };
    NetworkBuilder::new()
        .population(e)
        .population(i)
        .block(first)
        .block(second)
        .noise(NoiseSource::new("I", 0.05, 2.0, 5))
        .initial(RANDOM_START)
        .build()
        .unwrap()
}

#[test]
fn identical_seed_is_bit_identical() {
    let sys = noisy_network(false);
    let a = simulate(&sys, 150.0, 0.01, &RecordingOptions::traces(1.0), 42).unwrap();
    let b = simulate(&sys, 150.0, 0.01, &RecordingOptions::traces(1.0), 42).unwrap();
    assert_eq!(a, b);
    assert!(a.spike_count() > 0);
    let c = simulate(&sys, 150.0, 0.01, &RecordingOptions::spikes_only(), 43).unwrap();
    assert_ne!(a.spike_trains, c.spike_trains);
}

#[test]
fn block_declaration_order_does_not_matter() {
    let a = simulate(&noisy_network(false), 150.0, 0.01, &RecordingOptions::spikes_only(), 9).unwrap();
    let b = simulate(&noisy_network(true), 150.0, 0.01, &RecordingOptions::spikes_only(), 9).unwrap();
    assert_eq!(a.spike_trains, b.spike_trains);
    assert_eq!(a.event_log, b.event_log);
}

#[test]
fn noise_events_are_logged_within_duration() {
    let r = simulate(&noisy_network(false), 200.0, 0.01, &RecordingOptions::spikes_only(), 1).unwrap();
    let i_cells = &r.event_log[12..];
    let total: usize = i_cells.iter().map(Vec::len).sum();
    // 4 cells * 0.05 events/ms * 200 ms = 40 expected
    assert!((15..=70).contains(&total), "{total}");
    assert!(r.event_log[..12].iter().all(Vec::is_empty));
    for log in i_cells {
        assert!(log.windows(2).all(|w| w[0] < w[1]));
        assert!(log.iter().all(|&t| (0.0..200.0).contains(&t)));
    }
}

#[test]
fn coarse_step_is_flagged_under_resolved() {
    let sys = one_cell(make_fast_firing_interneuron(), 1.0);
    match simulate(&sys, 100.0, 0.5, &RecordingOptions::spikes_only(), 0) {
        Err(Error::UnderResolved { .. }) | Err(Error::Blowup { .. }) => {}
        other => panic!("expected a numerical error, got {other:?}"),
    }
}

#[test]
fn state_length_is_cells_plus_synapses() {
    let sys = noisy_network(false);
    let cells: usize = sys.cells().iter().map(|c| sys.spec_of(c.index).state_dim()).sum();
    assert_eq!(sys.dim(), cells + sys.synapses().len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gates_stay_bounded_and_spikes_ordered(seed in 0u64..10_000) {
        let sys = noisy_network(false);
        let mut sim = Simulator::new(&sys, 0.01, seed).unwrap();
        sim.schedule_noise(60.0);
        let dim = sim.state().len();
        for _ in 0..6 {
            sim.run_until(sim.time() + 10.0).unwrap();
            prop_assert_eq!(sim.state().len(), dim);
            for (ci, cell) in sys.cells().iter().enumerate() {
                let n = sys.spec_of(ci).state_dim();
                for &g in &sim.state()[cell.offset + 1..cell.offset + n] {
                    prop_assert!((0.0..=1.0).contains(&g));
                }
            }
            for &x in &sim.state()[sys.synapse_offset()..] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
        for train in sim.spikes() {
            prop_assert!(train.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(train.iter().all(|&t| (0.0..=60.0).contains(&t)));
        }
    }

    #[test]
    fn theta_phase_stays_wrapped(drive in -0.5f64..2.0, seed in 0u64..1000) {
        let sys = NetworkBuilder::new()
            .population(Population::new("t", make_theta_cell(), 3, &HeterogeneitySpec::homogeneous(drive)).unwrap())
            .initial(InitialCondition::RandomVoltage { low: 0.0, high: 1.0 })
            .build()
            .unwrap();
        let mut sim = Simulator::new(&sys, 0.05, seed).unwrap();
        for _ in 0..200 {
            sim.step().unwrap();
            for &th in sim.state() {
                prop_assert!((0.0..std::f64::consts::TAU).contains(&th));
            }
        }
    }
}
