//! The per-vertex operations shared by the bulk-synchronous and asynchronous
//! drivers.

use std::hint;
use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::SharedLabels;
use crate::assignment::{Assignment, CenterFlag};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ordering::Permutation;
use crate::Vertex;

/// Busy-wait iterations before a waiting worker starts yielding its core.
const SPIN_LIMIT: u32 = 64;

/// Outcome of [`PeelContext::is_center`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterCheck {
    Center,
    /// The smallest-rank preceding neighbor that is a center.
    Blocked(Vertex),
}

/// One suspension inside `is_center`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaitEvent {
    pub round: u64,
    pub waiter: Vertex,
    pub blocker: Vertex,
}

/// Neighbor lists re-expressed as ranks and sorted ascending, so preceding
/// neighbors are a prefix of each list.
pub struct RankedAdjacency {
    offsets: Vec<usize>,
    ranks: Vec<u32>,
}

impl RankedAdjacency {
    pub fn build(g: &Graph, perm: &Permutation, threads: usize) -> Result<Self> {
        let mut ranks = vec![0u32; g.neighbor_array().len()];
        let fill = |ranks: &mut [u32]| {
            ranks
                .par_iter_mut()
                .zip(g.neighbor_array().par_iter())
                .for_each(|(r, &u)| *r = perm.rank(u));
            let mut segments = Vec::with_capacity(g.n());
            let mut rest = ranks;
            for v in 0..g.n() as Vertex {
                let (head, tail) = rest.split_at_mut(g.degree(v));
                segments.push(head);
                rest = tail;
            }
            segments.into_par_iter().for_each(|s| s.sort_unstable());
        };
        if threads <= 1 {
            for (r, &u) in ranks.iter_mut().zip(g.neighbor_array()) {
                *r = perm.rank(u);
            }
            for v in 0..g.n() {
                ranks[g.offsets()[v]..g.offsets()[v + 1]].sort_unstable();
            }
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
                .install(|| fill(&mut ranks));
        }
        Ok(RankedAdjacency {
            offsets: g.offsets().to_vec(),
            ranks,
        })
    }

    #[inline]
    pub fn ranks(&self, v: Vertex) -> &[u32] {
        let v = v as usize;
        &self.ranks[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Shared state of one engine run.
pub struct PeelContext<'a> {
    graph: &'a Graph,
    perm: &'a Permutation,
    ranked: Option<RankedAdjacency>,
    labels: SharedLabels,
    blocked: AtomicU64,
    watchdog: Duration,
    abort: AtomicBool,
    failure: Mutex<Option<Error>>,
    round: AtomicU64,
    waits: Option<Mutex<Vec<WaitEvent>>>,
}

impl<'a> PeelContext<'a> {
    /// `with_ranks` builds the rank-ordered adjacency needed by
    /// [`Self::is_center`]; coordination-free runs skip it.
    pub fn new(
        graph: &'a Graph,
        perm: &'a Permutation,
        threads: usize,
        with_ranks: bool,
        watchdog: Duration,
        record_waits: bool,
    ) -> Result<Self> {
        if graph.n() != perm.len() {
            return Err(Error::invalid(format!(
                "permutation has {} entries but the graph has {} vertices",
                perm.len(),
                graph.n()
            )));
        }
        let ranked = if with_ranks {
            Some(RankedAdjacency::build(graph, perm, threads)?)
        } else {
            None
        };
        Ok(PeelContext {
            graph,
            perm,
            ranked,
            labels: SharedLabels::new(graph.n()),
            blocked: AtomicU64::new(0),
            watchdog,
            abort: AtomicBool::new(false),
            failure: Mutex::new(None),
            round: AtomicU64::new(0),
            waits: record_waits.then(|| Mutex::new(Vec::new())),
        })
    }

    pub fn labels(&self) -> &SharedLabels {
        &self.labels
    }

    pub fn blocked_vertices(&self) -> u64 {
        self.blocked.load(Ordering::Relaxed)
    }

    pub(crate) fn set_round(&self, round: u64) {
        self.round.store(round, Ordering::Relaxed);
    }

    #[inline]
    pub(crate) fn aborted(&self) -> bool {
        self.abort.load(Ordering::Relaxed)
    }

    /// Records the first real failure and tells every worker to stop.
    pub(crate) fn fail(&self, error: Error) {
        if matches!(error, Error::Aborted) {
            return;
        }
        let mut slot = self.failure.lock().unwrap_or_else(|e| e.into_inner());
        if slot.is_none() {
            *slot = Some(error);
        }
        self.abort.store(true, Ordering::Relaxed);
    }

    pub(crate) fn take_failure(&self) -> Option<Error> {
        self.failure
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .take()
    }

    pub fn into_parts(self) -> (Assignment, Vec<WaitEvent>) {
        let waits = self
            .waits
            .map(|w| w.into_inner().unwrap_or_else(|e| e.into_inner()))
            .unwrap_or_default();
        (self.labels.into_assignment(), waits)
    }

    /// Whether `v` is already known to be clustered. Reads the cheap mirror
    /// first and falls back to the authoritative cell.
    #[inline]
    fn is_clustered(&self, v: Vertex) -> bool {
        let sentinel = self.labels.sentinel();
        self.labels.load_stale(v) != sentinel || self.labels.load(v) != sentinel
    }

    /// Makes `v` a center labeled with its rank and lowers the label of every
    /// neighbor outside `active` (a range of permutation positions) to that
    /// rank.
    pub fn create_cluster(&self, v: Vertex, active: &Range<usize>) {
        let label = self.perm.rank(v);
        self.labels.fetch_min(v, label);
        self.labels.publish(v, CenterFlag::Center);
        for &u in self.graph.neighbors(v) {
            if active.contains(&(self.perm.rank(u) as usize)) {
                continue;
            }
            // Labels only decrease, so a stale value at or below ours is final.
            if self.labels.load_stale(u) <= label {
                continue;
            }
            self.labels.fetch_min(u, label);
        }
    }

    /// Concurrency-controlled step: `v` becomes a center only if no
    /// preceding neighbor is one; otherwise it joins the first such neighbor.
    pub fn attempt_cluster(&self, v: Vertex, active: &Range<usize>) -> Result<()> {
        if self.labels.load(v) != self.labels.sentinel() {
            self.labels.publish(v, CenterFlag::NonCenter);
            return Ok(());
        }
        match self.is_center(v)? {
            CenterCheck::Center => self.create_cluster(v, active),
            CenterCheck::Blocked(u) => {
                self.labels.fetch_min(v, self.perm.rank(u));
                self.labels.publish(v, CenterFlag::NonCenter);
            }
        }
        Ok(())
    }

    /// Scans the neighbors of `v` that precede it, in rank order, waiting for
    /// each one to be decided.
    pub fn is_center(&self, v: Vertex) -> Result<CenterCheck> {
        let ranked = self
            .ranked
            .as_ref()
            .ok_or_else(|| Error::invalid("is_center needs the rank-ordered adjacency"))?;
        let own = self.perm.rank(v);
        let mut waited = false;
        let mut verdict = CenterCheck::Center;
        for &r in ranked.ranks(v) {
            if r >= own {
                break;
            }
            let u = self.perm.vertex_at(r as usize);
            let flag = match self.labels.flag(u) {
                CenterFlag::Undecided => {
                    if !waited {
                        waited = true;
                        self.blocked.fetch_add(1, Ordering::Relaxed);
                    }
                    if let Some(log) = &self.waits {
                        log.lock()
                            .unwrap_or_else(|e| e.into_inner())
                            .push(WaitEvent {
                                round: self.round.load(Ordering::Relaxed),
                                waiter: v,
                                blocker: u,
                            });
                    }
                    self.wait_decided(v, u)?
                }
                decided => decided,
            };
            if flag == CenterFlag::Center {
                verdict = CenterCheck::Blocked(u);
                break;
            }
        }
        Ok(verdict)
    }

    fn wait_decided(&self, waiter: Vertex, blocker: Vertex) -> Result<CenterFlag> {
        let start = Instant::now();
        let mut spins = 0u32;
        loop {
            let flag = self.labels.flag(blocker);
            if flag != CenterFlag::Undecided {
                return Ok(flag);
            }
            if spins < SPIN_LIMIT {
                hint::spin_loop();
            } else {
                thread::yield_now();
                if spins.is_multiple_of(64) {
                    if self.aborted() {
                        return Err(Error::Aborted);
                    }
                    let elapsed = start.elapsed();
                    if elapsed > self.watchdog {
                        return Err(Error::DeadlockSuspected {
                            waiter,
                            blocker,
                            seconds: elapsed.as_secs_f64(),
                        });
                    }
                }
            }
            spins = spins.wrapping_add(1);
        }
    }

    /// Handles one claimed vertex. Vertices already carrying a label are
    /// skipped (lazy deletion).
    #[inline]
    pub(crate) fn process(&self, v: Vertex, c4: bool, active: &Range<usize>) -> Result<()> {
        if self.is_clustered(v) {
            self.labels.publish(v, CenterFlag::NonCenter);
            return Ok(());
        }
        if c4 {
            self.attempt_cluster(v, active)
        } else {
            self.create_cluster(v, active);
            Ok(())
        }
    }
}
