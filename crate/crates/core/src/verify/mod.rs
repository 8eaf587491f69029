//! Randomized verification of joint convexity of the squared Bures distance
//! and of the mixed-state sensitivity bound, plus the scaling and
//! admixture experiments.
//!
//! Every trial is a pure function of `(master seed, trial index)`, so
//! reports are reproducible and any single trial can be replayed in
//! isolation from its recorded seed.

mod experiments;
mod lemma;
mod suite;
mod theorem;

pub use experiments::{
    scaling_experiment, werner_experiment, ScalingRow, WernerRow, WernerTable,
};
pub use lemma::{check_lemma_once, lemma_trial, LemmaCheck, LemmaTrialResult};
pub use suite::{run_suite, SuiteConfig, SuiteKind, SuiteOutcome, SuiteReport, SuiteSummary, TrialRecords};
pub use theorem::{check_theorem_once, phase_channel, theorem_trial, TheoremCheck, TheoremTrialResult};

/// Lemma margins and proof-chain margins below `-METRIC_TOL` are violations.
pub const METRIC_TOL: f64 = 1e-10;
/// Absolute slack in `qfi_mixed <= max(qfi_pure)`.
pub const QFI_TOL: f64 = 1e-8;
/// Relative tolerance of the scaling tables against the closed forms.
pub const SCALING_REL_TOL: f64 = 1e-4;
/// Largest fuzzer dimension allowed unless raised explicitly.
pub const DEFAULT_MAX_DIM: usize = 8;
/// Hard ceiling for `--max-dim`.
pub const MAX_FUZZ_DIM: usize = 16;

pub const SEED_DERIVATION: &str =
    "trial_seed = splitmix64(master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15) (wrapping u64)";

/// One step of the splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` under `master`; see [`SEED_DERIVATION`].
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
