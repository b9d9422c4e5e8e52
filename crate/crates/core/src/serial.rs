//! Serial KwikCluster with a preassigned order, and the exact optimum for
//! tiny graphs.
//!
//! Clustered vertices are never removed from the graph: the label array
//! doubles as the "still in the graph" test, exactly like the parallel
//! engines.

use log::warn;

use crate::assignment::{Assignment, CenterFlag};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ordering::Permutation;
use crate::{Label, Vertex};

/// Largest graph [`brute_force_opt`] accepts.
pub const BRUTE_FORCE_CAP: usize = 14;
const BRUTE_FORCE_WARN: usize = 12;

fn check_sizes(g: &Graph, perm: &Permutation) -> Result<()> {
    if g.n() != perm.len() {
        return Err(Error::invalid(format!(
            "permutation has {} entries but the graph has {} vertices",
            perm.len(),
            g.n()
        )));
    }
    Ok(())
}

/// Peels the graph in permutation order: the first unclustered vertex becomes
/// a center labeled with its rank and absorbs every unclustered neighbor.
pub fn kwik_cluster(g: &Graph, perm: &Permutation) -> Result<Assignment> {
    check_sizes(g, perm)?;
    let mut a = Assignment::unclustered(g.n());
    for (rank, &v) in perm.order().iter().enumerate() {
        if !a.is_unclustered(v) {
            continue;
        }
        let label = rank as Label;
        a.set(v, label, CenterFlag::Center);
        for &u in g.neighbors(v) {
            if a.is_unclustered(u) {
                a.set(u, label, CenterFlag::NonCenter);
            }
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelStep {
    pub center: Vertex,
    /// Center first, then the absorbed neighbors in adjacency order.
    pub members: Vec<Vertex>,
    /// Negative pairs inside the new cluster.
    pub negative_within: u64,
    /// Positive edges from the new cluster to vertices still unclustered.
    pub positive_cut: u64,
}

impl PeelStep {
    pub fn increment(&self) -> u64 {
        self.negative_within + self.positive_cut
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeelTrace {
    pub steps: Vec<PeelStep>,
}

impl PeelTrace {
    pub fn total(&self) -> u64 {
        self.steps.iter().map(PeelStep::increment).sum()
    }
}

/// [`kwik_cluster`] that also records what each peel step costs.
pub fn kwik_cluster_traced(g: &Graph, perm: &Permutation) -> Result<(Assignment, PeelTrace)> {
    check_sizes(g, perm)?;
    let n = g.n();
    let mut a = Assignment::unclustered(n);
    let mut mark = vec![usize::MAX; n];
    let mut trace = PeelTrace::default();
    for (rank, &v) in perm.order().iter().enumerate() {
        if !a.is_unclustered(v) {
            continue;
        }
        let step = trace.steps.len();
        let mut members = vec![v];
        members.extend(
            g.neighbors(v)
                .iter()
                .copied()
                .filter(|&u| a.is_unclustered(u)),
        );
        for &x in &members {
            mark[x as usize] = step;
        }
        let mut positive_within = 0u64;
        let mut positive_cut = 0u64;
        for &x in &members {
            for &y in g.neighbors(x) {
                if mark[y as usize] == step {
                    positive_within += 1;
                } else if a.is_unclustered(y) {
                    positive_cut += 1;
                }
            }
        }
        let size = members.len() as u64;
        let negative_within = size * (size - 1) / 2 - positive_within / 2;

        let label = rank as Label;
        a.set(v, label, CenterFlag::Center);
        for &u in &members[1..] {
            a.set(u, label, CenterFlag::NonCenter);
        }
        trace.steps.push(PeelStep {
            center: v,
            members,
            negative_within,
            positive_cut,
        });
    }
    Ok((a, trace))
}

/// Minimum disagreement count over every set partition, found by walking
/// restricted-growth strings in lexicographic order with a cost bound. The
/// first optimal partition in that order wins ties. Labels in the returned
/// assignment are block indices.
pub fn brute_force_opt(g: &Graph) -> Result<(u64, Assignment)> {
    let n = g.n();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if n > BRUTE_FORCE_WARN {
        warn!("brute-force optimum on n = {n} enumerates up to Bell({n}) partitions");
    }
    let mut adjacent = vec![false; n * n];
    for (u, v) in g.edges() {
        adjacent[u as usize * n + v as usize] = true;
        adjacent[v as usize * n + u as usize] = true;
    }

    struct Search<'a> {
        n: usize,
        adjacent: &'a [bool],
        blocks: Vec<u8>,
        best_cost: u64,
        best: Vec<u8>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, used: u8, cost: u64) {
            if cost >= self.best_cost {
                return;
            }
            if i == self.n {
                self.best_cost = cost;
                self.best.copy_from_slice(&self.blocks);
                return;
            }
            let row = &self.adjacent[i * self.n..i * self.n + i];
            for block in 0..=used {
                let delta = row
                    .iter()
                    .zip(&self.blocks[..i])
                    .filter(|&(&pos, &b)| pos != (b == block))
                    .count() as u64;
                self.blocks[i] = block;
                let used = if block == used { used + 1 } else { used };
                self.run(i + 1, used, cost + delta);
            }
        }
    }

    let mut search = Search {
        n,
        adjacent: &adjacent,
        blocks: vec![0; n],
        best_cost: u64::MAX,
        best: vec![0; n],
    };
    search.run(0, 0, 0);
    let cost = if n == 0 { 0 } else { search.best_cost };
    let labels = search.best.iter().map(|&b| Label::from(b)).collect();
    Ok((cost, Assignment::from_labels(labels)))
}
