//! Rejection-based parallel peeling (CDK) as a comparison baseline.
//!
//! Each round recomputes the exact maximum degree `Δ_i` of the unclustered
//! graph, samples every unclustered vertex independently with probability
//! `min(1, ε/Δ_i)`, rejects sampled vertices that have a sampled neighbor,
//! and turns the survivors into simultaneous centers. A vertex adjacent to
//! several centers joins the one with the smallest vertex id. Labels are
//! center vertex ids. After `max_rounds` rounds any straggler becomes a
//! singleton.

use std::sync::atomic::{AtomicBool, AtomicU8, AtomicUsize, Ordering};
use std::sync::{Barrier, Mutex, RwLock};
use std::thread;
use std::time::Instant;

use crate::assignment::{Assignment, CenterFlag};
use crate::engine::{Algorithm, RunReport, SharedLabels};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ordering::Rng;
use crate::quality::disagreements;
use crate::Vertex;

const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CdkConfig {
    pub epsilon: f64,
    pub threads: usize,
    pub seed: u64,
    pub max_rounds: u64,
}

impl Default for CdkConfig {
    fn default() -> Self {
        CdkConfig {
            epsilon: 0.9,
            threads: 1,
            seed: 0,
            max_rounds: 1_000_000,
        }
    }
}

impl CdkConfig {
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
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        Ok(())
    }
}

/// Centers accepted in each round.
pub type CenterTrace = Vec<Vec<Vertex>>;

pub fn cdk_run(g: &Graph, cfg: &CdkConfig) -> Result<(Assignment, RunReport)> {
    let (a, report, _) = run_inner(g, cfg, false)?;
    Ok((a, report))
}

/// [`cdk_run`] that also returns the centers accepted in every round.
pub fn cdk_run_traced(g: &Graph, cfg: &CdkConfig) -> Result<(Assignment, RunReport, CenterTrace)> {
    run_inner(g, cfg, true)
}

#[repr(u8)]
#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Degree = 0,
    Peel = 1,
    Stop = 2,
}

struct Shared<'a> {
    graph: &'a Graph,
    labels: SharedLabels,
    /// Clustered in an earlier round.
    done: Vec<AtomicBool>,
    active: Vec<AtomicBool>,
    remaining: RwLock<Vec<Vertex>>,
    sampled: RwLock<Vec<Vertex>>,
    phase: AtomicU8,
    claim: AtomicUsize,
    max_degree: AtomicUsize,
    centers: Option<Mutex<Vec<Vertex>>>,
}

impl Shared<'_> {
    fn degree_phase(&self) {
        let remaining = self.remaining.read().unwrap_or_else(|e| e.into_inner());
        let mut local = 0;
        loop {
            let start = self.claim.fetch_add(CHUNK, Ordering::Relaxed);
            if start >= remaining.len() {
                break;
            }
            for &v in &remaining[start..(start + CHUNK).min(remaining.len())] {
                let d = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| !self.done[u as usize].load(Ordering::Relaxed))
                    .count();
                local = local.max(d);
            }
        }
        self.max_degree.fetch_max(local, Ordering::Relaxed);
    }

    fn peel_phase(&self) {
        let sampled = self.sampled.read().unwrap_or_else(|e| e.into_inner());
        let mut accepted = Vec::new();
        loop {
            let start = self.claim.fetch_add(CHUNK, Ordering::Relaxed);
            if start >= sampled.len() {
                break;
            }
            for &v in &sampled[start..(start + CHUNK).min(sampled.len())] {
                let neighbors = self.graph.neighbors(v);
                if neighbors
                    .iter()
                    .any(|&u| self.active[u as usize].load(Ordering::Relaxed))
                {
                    continue;
                }
                self.labels.fetch_min(v, v);
                self.labels.publish(v, CenterFlag::Center);
                for &u in neighbors {
                    if !self.done[u as usize].load(Ordering::Relaxed) {
                        self.labels.fetch_min(u, v);
                    }
                }
                if self.centers.is_some() {
                    accepted.push(v);
                }
            }
        }
        if let Some(centers) = &self.centers {
            centers
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .extend(accepted);
        }
    }

    fn phase(&self) -> Phase {
        match self.phase.load(Ordering::Relaxed) {
            0 => Phase::Degree,
            1 => Phase::Peel,
            _ => Phase::Stop,
        }
    }

    fn work(&self) -> bool {
        match self.phase() {
            Phase::Degree => self.degree_phase(),
            Phase::Peel => self.peel_phase(),
            Phase::Stop => return false,
        }
        true
    }
}

fn run_inner(
    g: &Graph,
    cfg: &CdkConfig,
    traced: bool,
) -> Result<(Assignment, RunReport, CenterTrace)> {
    cfg.validate()?;
    let n = g.n();
    let setup = Instant::now();
    let shared = Shared {
        graph: g,
        labels: SharedLabels::new(n),
        done: (0..n).map(|_| AtomicBool::new(false)).collect(),
        active: (0..n).map(|_| AtomicBool::new(false)).collect(),
        remaining: RwLock::new((0..n as Vertex).collect()),
        sampled: RwLock::new(Vec::new()),
        phase: AtomicU8::new(Phase::Degree as u8),
        claim: AtomicUsize::new(0),
        max_degree: AtomicUsize::new(0),
        centers: traced.then(|| Mutex::new(Vec::new())),
    };
    let wall_setup = setup.elapsed();

    let clustering = Instant::now();
    let barrier = Barrier::new(cfg.threads);
    let mut rng = Rng::new(cfg.seed);
    let mut rounds = 0u64;
    let mut sampled_sizes = Vec::new();
    let mut trace = CenterTrace::new();
    let sentinel = n as Vertex;

    thread::scope(|s| {
        for _ in 1..cfg.threads {
            s.spawn(|| loop {
                barrier.wait();
                if !shared.work() {
                    return;
                }
                barrier.wait();
            });
        }

        let run_phase = |phase: Phase| {
            shared.phase.store(phase as u8, Ordering::Relaxed);
            shared.claim.store(0, Ordering::Relaxed);
            barrier.wait();
            shared.work();
            barrier.wait();
        };

        loop {
            let remaining_len = shared
                .remaining
                .read()
                .unwrap_or_else(|e| e.into_inner())
                .len();
            if remaining_len == 0 || rounds == cfg.max_rounds {
                break;
            }

            shared.max_degree.store(0, Ordering::Relaxed);
            run_phase(Phase::Degree);
            let max_degree = shared.max_degree.load(Ordering::Relaxed);
            let p = if max_degree == 0 {
                1.0
            } else {
                (cfg.epsilon / max_degree as f64).min(1.0)
            };

            {
                let remaining = shared.remaining.read().unwrap_or_else(|e| e.into_inner());
                let mut sampled = shared.sampled.write().unwrap_or_else(|e| e.into_inner());
                sampled.clear();
                for &v in remaining.iter() {
                    if rng.chance(p) {
                        shared.active[v as usize].store(true, Ordering::Relaxed);
                        sampled.push(v);
                    }
                }
                sampled_sizes.push(sampled.len() as u64);
            }

            run_phase(Phase::Peel);

            for &v in shared
                .sampled
                .read()
                .unwrap_or_else(|e| e.into_inner())
                .iter()
            {
                shared.active[v as usize].store(false, Ordering::Relaxed);
            }
            shared
                .remaining
                .write()
                .unwrap_or_else(|e| e.into_inner())
                .retain(|&v| {
                    if shared.labels.load(v) == sentinel {
                        true
                    } else {
                        shared.done[v as usize].store(true, Ordering::Relaxed);
                        shared.labels.publish(v, CenterFlag::NonCenter);
                        false
                    }
                });
            if let Some(centers) = &shared.centers {
                let mut round_centers =
                    std::mem::take(&mut *centers.lock().unwrap_or_else(|e| e.into_inner()));
                round_centers.sort_unstable();
                trace.push(round_centers);
            }
            rounds += 1;
        }

        shared.phase.store(Phase::Stop as u8, Ordering::Relaxed);
        barrier.wait();
    });

    let stragglers =
        std::mem::take(&mut *shared.remaining.write().unwrap_or_else(|e| e.into_inner()));
    for &v in &stragglers {
        shared.labels.fetch_min(v, v);
        shared.labels.publish(v, CenterFlag::Center);
    }
    let wall_cluster = clustering.elapsed();

    let assignment = shared.labels.into_assignment();
    let mut report = RunReport::new(Algorithm::Cdk, cfg.epsilon, cfg.threads, cfg.seed, g);
    report.rounds = rounds;
    report.batch_sizes = sampled_sizes;
    report.wall_ns_setup = wall_setup.as_nanos() as u64;
    report.wall_ns_cluster = wall_cluster.as_nanos() as u64;
    report.straggler_fallback = !stragglers.is_empty();
    report
        .metadata
        .insert("tie_break".into(), "smallest-center-id".into());
    report
        .metadata
        .insert("straggler_policy".into(), "singletons".into());
    report.set_objective(disagreements(g, &assignment)?);
    Ok((assignment, report, trace))
}
