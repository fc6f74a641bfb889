//! Rhythm statistics, spike-time response curves and maps, excitability
//! classification and river compression.

mod excitability;
mod prc;
mod rhythm;
mod river;

pub use excitability::{
    classify_excitability, fires, firing_rate, rheobase, single_cell, ExcitabilityClass,
    ExcitabilityReport, FI_RATE_TRANSIENT_MS, FI_RATE_WINDOW_MS, RHEOBASE_WINDOW_MS,
};
pub use prc::{
    build_spike_time_map, limit_cycle, pair_synchronizes, spike_time_response, FixedPoint,
    LimitCycle, PairOutcome, PhaseResponseCurve, PrcSample, SpikeTimeMap, PAIR_INITIAL_OFFSET,
    PAIR_PERIODS, PAIR_SYNC_TOLERANCE,
};
pub use rhythm::{
    phase_locking, population_cycles, population_frequency, synchrony_index, synchrony_report,
    SynchronyReport, Window, RHYTHM_THRESHOLD,
};
pub use river::{river_compression, river_first_spikes, RIVER_DT};
