//! Disagreement objective, bad triangles and objective ratios.

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::Vertex;

/// Largest graph [`disagreements_bruteforce`] accepts.
pub const BRUTEFORCE_PAIR_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// Positive edges whose endpoints sit in different clusters.
    pub positive_cut: u64,
    /// Non-adjacent pairs that share a cluster.
    pub negative_within: u64,
    pub total: u64,
}

fn check_labels(g: &Graph, a: &Assignment) -> Result<()> {
    if a.len() != g.n() {
        return Err(Error::invalid(format!(
            "assignment has {} entries but the graph has {} vertices",
            a.len(),
            g.n()
        )));
    }
    a.check_complete()
}

/// Objective from a cluster-size tally and one pass over the edges.
pub fn disagreements(g: &Graph, a: &Assignment) -> Result<ObjectiveBreakdown> {
    check_labels(g, a)?;
    let labels = a.labels();
    let pairs_within: u64 = a
        .cluster_sizes()
        .iter()
        .map(|&s| s * s.saturating_sub(1) / 2)
        .sum();
    let positive_within = g
        .edges()
        .filter(|&(u, v)| labels[u as usize] == labels[v as usize])
        .count() as u64;
    let positive_cut = g.m() as u64 - positive_within;
    let negative_within = pairs_within - positive_within;
    Ok(ObjectiveBreakdown {
        positive_cut,
        negative_within,
        total: positive_cut + negative_within,
    })
}

/// Objective by classifying every unordered pair; independent of
/// [`disagreements`].
pub fn disagreements_bruteforce(g: &Graph, a: &Assignment) -> Result<u64> {
    let n = g.n();
    if n > BRUTEFORCE_PAIR_CAP {
        return Err(Error::TooLarge {
            n,
            cap: BRUTEFORCE_PAIR_CAP,
        });
    }
    check_labels(g, a)?;
    let mut adjacent = vec![false; n * n];
    for u in 0..n as Vertex {
        for &v in g.neighbors(u) {
            adjacent[u as usize * n + v as usize] = true;
        }
    }
    let labels = a.labels();
    let mut total = 0;
    for u in 0..n {
        for v in u + 1..n {
            let together = labels[u] == labels[v];
            if adjacent[u * n + v] != together {
                total += 1;
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BadTriangleCount {
    pub count: u64,
}

/// Triples with exactly two positive pairs. Each is counted once, at the
/// apex of its open wedge.
pub fn count_bad_triangles(g: &Graph) -> BadTriangleCount {
    if g.n() > 10_000 {
        log::warn!("bad-triangle count on n = {} enumerates every wedge", g.n());
    }
    let mut count = 0u64;
    for w in 0..g.n() as Vertex {
        let list = g.neighbors(w);
        for (i, &u) in list.iter().enumerate() {
            for &v in &list[i + 1..] {
                if !g.has_edge(u, v) {
                    count += 1;
                }
            }
        }
    }
    BadTriangleCount { count }
}

/// `candidate.total / reference.total`. Two zero objectives compare as 1.
pub fn objective_ratio(
    reference: &ObjectiveBreakdown,
    candidate: &ObjectiveBreakdown,
) -> Result<f64> {
    match (reference.total, candidate.total) {
        (0, 0) => Ok(1.0),
        (0, c) => Err(Error::ZeroReference { candidate: c }),
        (r, c) => Ok(c as f64 / r as f64),
    }
}
