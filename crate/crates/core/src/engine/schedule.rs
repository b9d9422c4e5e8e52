//! Batch sizes and the maximum-degree proxy for bulk-synchronous rounds.
//!
//! Instead of recomputing the maximum degree every round, a proxy `Δ̂`
//! starts at the graph's maximum degree and is halved every
//! `⌈(c/ε) · ln(n · log₂Δ / δ)⌉` rounds. Each round draws
//! `B ~ Binomial(remaining, min(1, ε/Δ̂))` and takes the next `B` entries of
//! the unprocessed permutation suffix, clustered or not.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::ordering::{binomial_draw, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSchedule {
    /// Start from the graph's maximum degree; otherwise from `n - 1`.
    pub initial_from_graph: bool,
    /// The `c` in the halving interval.
    pub interval_constant: f64,
    /// Failure probability `δ`.
    pub failure_prob: f64,
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        DeltaSchedule {
            initial_from_graph: true,
            interval_constant: 2.0,
            failure_prob: 0.1,
        }
    }
}

impl DeltaSchedule {
    pub fn initial_delta(&self, n: usize, max_degree: usize) -> u64 {
        if self.initial_from_graph {
            max_degree as u64
        } else {
            n.saturating_sub(1) as u64
        }
    }

    /// Rounds between two halvings of `Δ̂`. The `log₂Δ` factor is floored at
    /// 1 and the result at one round so degenerate graphs stay finite.
    pub fn halving_interval(&self, n: usize, delta: u64, epsilon: f64) -> u64 {
        let log_delta = (delta.max(1) as f64).log2().max(1.0);
        let inner = (n.max(1) as f64 * log_delta / self.failure_prob).ln();
        let rounds = (self.interval_constant / epsilon * inner).ceil();
        if rounds.is_finite() && rounds >= 1.0 {
            rounds as u64
        } else {
            1
        }
    }
}

/// Leader-side bookkeeping of a bulk-synchronous run.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundState {
    /// Completed rounds.
    pub round: u64,
    /// Current proxy. Zero only for edgeless graphs, where the whole suffix
    /// forms a single batch.
    pub delta_hat: u64,
    /// Start of the unprocessed permutation suffix.
    pub cursor: usize,
    /// Exclusive end of the current batch.
    pub batch_end: usize,
    pub n: usize,
    pub halving_interval: u64,
}

impl RoundState {
    pub fn new(n: usize, max_degree: usize, epsilon: f64, schedule: &DeltaSchedule) -> Self {
        let delta_hat = schedule.initial_delta(n, max_degree);
        RoundState {
            round: 0,
            delta_hat,
            cursor: 0,
            batch_end: 0,
            n,
            halving_interval: schedule.halving_interval(n, delta_hat, epsilon),
        }
    }

    pub fn remaining(&self) -> usize {
        self.n - self.cursor
    }

    /// Per-vertex sampling probability `min(1, ε/Δ̂)`.
    pub fn sampling_probability(&self, epsilon: f64) -> f64 {
        if self.delta_hat == 0 {
            1.0
        } else {
            (epsilon / self.delta_hat as f64).min(1.0)
        }
    }
}

/// Draws the next batch as a range of permutation positions starting at the
/// cursor. The range may be empty.
pub fn sample_batch(state: &mut RoundState, epsilon: f64, rng: &mut Rng) -> Range<usize> {
    let remaining = state.remaining();
    let size = if remaining == 0 {
        0
    } else {
        binomial_draw(remaining as u64, state.sampling_probability(epsilon), rng) as usize
    };
    state.batch_end = (state.cursor + size).min(state.n);
    state.cursor..state.batch_end
}

/// Closes the current round: advances the cursor past the batch, counts the
/// round and halves `Δ̂` (never below 1) at interval boundaries. Returns the
/// new `Δ̂`.
pub fn update_delta_hat(state: &mut RoundState) -> u64 {
    state.cursor = state.batch_end;
    state.round += 1;
    if state.round.is_multiple_of(state.halving_interval) && state.delta_hat > 1 {
        state.delta_hat /= 2;
    }
    state.delta_hat
}
