//! One Monte Carlo trial: draw a user field, look for a cooperative pair in
//! a single sweep at the configured half-width, and if one exists evaluate
//! its link next to the fixed-UCA baseline on the same field.

use crate::channel::{self, LinkEfficiency, SpectrumEfficiency};
use crate::scenario::ScenarioConfig;
use crate::selection::{self, CooperativePair, Region, SelectionResult, UserField};
use crate::Result;

/// Mixes `(master, point, trial)` into an independent 64-bit seed.
///
/// Each trial's stream depends only on its own indices, so any subset of a
/// sweep reruns identically and in any order.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ point.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(h ^ trial.wrapping_mul(0xA076_1D64_78BD_642F))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    /// Build the channel and baseline when a pair is found.
    pub evaluate_channel: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self { evaluate_channel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub selection: SelectionResult,
    /// Link efficiency of the selected pair, with and without steering.
    pub efficiency: Option<LinkEfficiency>,
    /// Fixed-UCA baseline on the same field.
    pub baseline: Option<SpectrumEfficiency>,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.selection.is_found()
    }

    /// Selected CUs: 2 when a pair formed, else 0.
    pub fn cu_count(&self) -> usize {
        if self.success() {
            2
        } else {
            0
        }
    }

    pub fn pair(&self) -> Option<&CooperativePair> {
        self.selection.pair.as_ref()
    }
}

pub fn run_trial(cfg: &ScenarioConfig, region: Region, seed: u64, opts: TrialOptions) -> Result<TrialOutcome> {
    let field = UserField::generate(cfg.user_count, region, seed);
    run_trial_on(cfg, &field, opts)
}

pub fn run_trial_on(cfg: &ScenarioConfig, field: &UserField, opts: TrialOptions) -> Result<TrialOutcome> {
    let selection = selection::select_pair_at(field, cfg, cfg.ring_half_width);
    let (efficiency, baseline) = match (&selection.pair, opts.evaluate_channel) {
        (Some(pair), true) => {
            let real = channel::build_realization(cfg, field, pair)?;
            let base = channel::fixed_uca_baseline(cfg, field)?;
            (Some(channel::spectrum_efficiency(&real)), base)
        }
        _ => (None, None),
    };
    Ok(TrialOutcome { selection, efficiency, baseline })
}
