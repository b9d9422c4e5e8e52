//! C4 and ClusterWild! on shared memory.
//!
//! Both variants walk the permutation with a shared claim cursor. In
//! bulk-synchronous mode the walk is cut into batches separated by a full
//! barrier; in asynchronous mode it is a single pass. C4 decides each vertex
//! only after every preceding neighbor is decided, which makes its output
//! identical to serial KwikCluster on the same permutation. ClusterWild!
//! makes every unclustered claimed vertex a center without checking.

mod labels;
mod peel;
mod schedule;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Barrier;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use labels::SharedLabels;
pub use peel::{CenterCheck, PeelContext, RankedAdjacency, WaitEvent};
pub use schedule::{sample_batch, update_delta_hat, DeltaSchedule, RoundState};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ordering::{Permutation, Rng};
use crate::quality::{disagreements, ObjectiveBreakdown};

/// Every clustering algorithm the crate runs; used in reports and on the
/// command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Serial,
    C4Bsp,
    CwBsp,
    C4Async,
    CwAsync,
    Cdk,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Serial,
        Algorithm::C4Bsp,
        Algorithm::CwBsp,
        Algorithm::C4Async,
        Algorithm::CwAsync,
        Algorithm::Cdk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Serial => "serial",
            Algorithm::C4Bsp => "c4-bsp",
            Algorithm::CwBsp => "cw-bsp",
            Algorithm::C4Async => "c4-async",
            Algorithm::CwAsync => "cw-async",
            Algorithm::Cdk => "cdk",
        }
    }

    pub fn engine_variant(self) -> Option<Variant> {
        match self {
            Algorithm::C4Bsp => Some(Variant::C4Bsp),
            Algorithm::CwBsp => Some(Variant::CwBsp),
            Algorithm::C4Async => Some(Variant::C4Async),
            Algorithm::CwAsync => Some(Variant::CwAsync),
            Algorithm::Serial | Algorithm::Cdk => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    C4Bsp,
    CwBsp,
    C4Async,
    CwAsync,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::C4Bsp,
        Variant::CwBsp,
        Variant::C4Async,
        Variant::CwAsync,
    ];

    pub fn is_c4(self) -> bool {
        matches!(self, Variant::C4Bsp | Variant::C4Async)
    }

    pub fn is_bsp(self) -> bool {
        matches!(self, Variant::C4Bsp | Variant::CwBsp)
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            Variant::C4Bsp => Algorithm::C4Bsp,
            Variant::CwBsp => Algorithm::CwBsp,
            Variant::C4Async => Algorithm::C4Async,
            Variant::CwAsync => Algorithm::CwAsync,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub variant: Variant,
    /// Batch aggressiveness, in `(0, 1]`.
    pub epsilon: f64,
    pub threads: usize,
    pub delta_schedule: DeltaSchedule,
    /// Seeds the batch-size draws.
    pub seed: u64,
    /// Longest a C4 worker may wait on one neighbor before the run fails.
    pub watchdog: Duration,
    /// Keep every `is_center` suspension in [`RunReport::wait_log`].
    pub record_waits: bool,
}

impl EngineConfig {
    pub fn new(variant: Variant) -> Self {
        EngineConfig {
            variant,
            epsilon: 0.9,
            threads: 1,
            delta_schedule: DeltaSchedule::default(),
            seed: 0,
            watchdog: Duration::from_secs(60),
            record_waits: false,
        }
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "epsilon = {} is outside (0, 1]",
                self.epsilon
            )));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be at least 1"));
        }
        let delta = self.delta_schedule.failure_prob;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "failure probability {delta} is outside (0, 1)"
            )));
        }
        if self.delta_schedule.interval_constant.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid("halving interval constant must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub variant: Algorithm,
    pub epsilon: f64,
    pub threads: usize,
    /// Seed of the batch draws (CDK: of its vertex sampling).
    pub seed: u64,
    pub rounds: u64,
    pub wall_ns_setup: u64,
    pub wall_ns_cluster: u64,
    pub blocked_vertices: u64,
    pub objective: u64,
    pub batch_sizes: Vec<u64>,
    pub breakdown: ObjectiveBreakdown,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub straggler_fallback: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(skip)]
    pub wait_log: Vec<WaitEvent>,
}

impl RunReport {
    pub(crate) fn new(
        variant: Algorithm,
        epsilon: f64,
        threads: usize,
        seed: u64,
        g: &Graph,
    ) -> Self {
        RunReport {
            variant,
            epsilon,
            threads,
            seed,
            rounds: 0,
            wall_ns_setup: 0,
            wall_ns_cluster: 0,
            blocked_vertices: 0,
            objective: 0,
            batch_sizes: Vec::new(),
            breakdown: ObjectiveBreakdown::default(),
            n: g.n(),
            m: g.m(),
            straggler_fallback: false,
            metadata: BTreeMap::new(),
            wait_log: Vec::new(),
        }
    }

    pub(crate) fn set_objective(&mut self, breakdown: ObjectiveBreakdown) {
        self.breakdown = breakdown;
        self.objective = breakdown.total;
    }

    pub fn blocked_fraction(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.blocked_vertices as f64 / self.n as f64
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn nanos(d: Duration) -> u64 {
    d.as_nanos().min(u128::from(u64::MAX)) as u64
}

/// Clusters `g` in the order given by `perm`.
pub fn run(g: &Graph, perm: &Permutation, cfg: &EngineConfig) -> Result<(Assignment, RunReport)> {
    run_inner(g, perm, cfg, None)
}

/// [`run`] with an extra thread that calls `observer` on the live labels
/// until the clustering phase ends.
pub fn run_observed(
    g: &Graph,
    perm: &Permutation,
    cfg: &EngineConfig,
    observer: &(dyn Fn(&SharedLabels) + Sync),
) -> Result<(Assignment, RunReport)> {
    run_inner(g, perm, cfg, Some(observer))
}

struct Pass {
    rounds: u64,
    batch_sizes: Vec<u64>,
}

fn run_inner(
    g: &Graph,
    perm: &Permutation,
    cfg: &EngineConfig,
    observer: Option<&(dyn Fn(&SharedLabels) + Sync)>,
) -> Result<(Assignment, RunReport)> {
    cfg.validate()?;
    let setup = Instant::now();
    let ctx = PeelContext::new(
        g,
        perm,
        cfg.threads,
        cfg.variant.is_c4(),
        cfg.watchdog,
        cfg.record_waits,
    )?;
    let wall_setup = setup.elapsed();

    let clustering = Instant::now();
    let finished = AtomicBool::new(false);
    let pass = thread::scope(|s| {
        if let Some(observer) = observer {
            let (ctx, finished) = (&ctx, &finished);
            s.spawn(move || {
                while !finished.load(Ordering::Acquire) {
                    observer(ctx.labels());
                    thread::yield_now();
                }
            });
        }
        let pass = if cfg.variant.is_bsp() {
            bsp_pass(g, perm, &ctx, cfg)
        } else {
            async_pass(perm, &ctx, cfg)
        };
        finished.store(true, Ordering::Release);
        pass
    });
    let wall_cluster = clustering.elapsed();
    if let Some(error) = ctx.take_failure() {
        return Err(error);
    }

    let blocked = ctx.blocked_vertices();
    let (assignment, wait_log) = ctx.into_parts();
    let mut report = RunReport::new(
        cfg.variant.algorithm(),
        cfg.epsilon,
        cfg.threads,
        cfg.seed,
        g,
    );
    report.rounds = pass.rounds;
    report.batch_sizes = pass.batch_sizes;
    report.wall_ns_setup = nanos(wall_setup);
    report.wall_ns_cluster = nanos(wall_cluster);
    report.blocked_vertices = blocked;
    report.wait_log = wait_log;
    report.set_objective(disagreements(g, &assignment)?);
    Ok((assignment, report))
}

/// Claims permutation positions from `claim` until `end`, handling each.
fn drain(
    perm: &Permutation,
    ctx: &PeelContext<'_>,
    c4: bool,
    claim: &AtomicUsize,
    end: usize,
    active: &Range<usize>,
) {
    loop {
        if ctx.aborted() {
            return;
        }
        let position = claim.fetch_add(1, Ordering::Relaxed);
        if position >= end {
            return;
        }
        if let Err(error) = ctx.process(perm.vertex_at(position), c4, active) {
            ctx.fail(error);
            return;
        }
    }
}

/// Bulk-synchronous rounds. The calling thread is worker 0 and also the
/// leader that draws batches between barriers.
fn bsp_pass(g: &Graph, perm: &Permutation, ctx: &PeelContext<'_>, cfg: &EngineConfig) -> Pass {
    let n = g.n();
    let c4 = cfg.variant.is_c4();
    let barrier = Barrier::new(cfg.threads);
    let claim = AtomicUsize::new(0);
    let batch_start = AtomicUsize::new(0);
    let batch_end = AtomicUsize::new(0);
    let done = AtomicBool::new(false);

    let mut state = RoundState::new(n, g.max_degree(), cfg.epsilon, &cfg.delta_schedule);
    let mut rng = Rng::new(cfg.seed);
    let mut sizes = Vec::new();

    let current_batch = || batch_start.load(Ordering::Relaxed)..batch_end.load(Ordering::Relaxed);

    thread::scope(|s| {
        for _ in 1..cfg.threads {
            s.spawn(|| loop {
                barrier.wait();
                if done.load(Ordering::Relaxed) {
                    return;
                }
                let active = current_batch();
                drain(perm, ctx, c4, &claim, active.end, &active);
                barrier.wait();
            });
        }

        loop {
            if state.remaining() == 0 || ctx.aborted() {
                done.store(true, Ordering::Relaxed);
            } else {
                let batch = sample_batch(&mut state, cfg.epsilon, &mut rng);
                sizes.push(batch.len() as u64);
                ctx.set_round(state.round);
                batch_start.store(batch.start, Ordering::Relaxed);
                batch_end.store(batch.end, Ordering::Relaxed);
                claim.store(batch.start, Ordering::Relaxed);
            }
            barrier.wait();
            if done.load(Ordering::Relaxed) {
                break;
            }
            let active = current_batch();
            drain(perm, ctx, c4, &claim, active.end, &active);
            barrier.wait();
            update_delta_hat(&mut state);
        }
    });

    Pass {
        rounds: state.round,
        batch_sizes: sizes,
    }
}

/// One barrier-free pass over the whole permutation.
fn async_pass(perm: &Permutation, ctx: &PeelContext<'_>, cfg: &EngineConfig) -> Pass {
    let n = perm.len();
    let c4 = cfg.variant.is_c4();
    let claim = AtomicUsize::new(0);
    let no_exemption = 0..0;
    thread::scope(|s| {
        for _ in 1..cfg.threads {
            s.spawn(|| drain(perm, ctx, c4, &claim, n, &no_exemption));
        }
        drain(perm, ctx, c4, &claim, n, &no_exemption);
    });
    Pass {
        rounds: u64::from(n > 0),
        batch_sizes: if n > 0 { vec![n as u64] } else { Vec::new() },
    }
}
