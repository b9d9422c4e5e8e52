//! Positive-edge similarity graphs in CSR form.
//!
//! Only `+` edges are stored. Each undirected edge appears once in the
//! neighbor list of each endpoint and every list is sorted ascending, so
//! membership is a binary search.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ordering::Rng;
use crate::Vertex;

/// Header written by [`write_edge_list`]. The loader honors its `n=` field so
/// trailing isolated vertices survive a round trip.
pub const EDGE_LIST_MAGIC: &str = "# corclust edge-list v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    offsets: Vec<usize>,
    neighbors: Vec<Vertex>,
    max_degree: usize,
}

impl Graph {
    /// Graph on `n` vertices without edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            m: 0,
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            max_degree: 0,
        }
    }

    /// Builds a graph from undirected edges. Self-loops are dropped and
    /// duplicates (in either orientation) collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
        I::IntoIter: Clone,
    {
        let edges = edges.into_iter();
        let mut degree = vec![0usize; n];
        for (u, v) in edges.clone() {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u != v {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut total = 0;
        for d in &degree {
            total += d;
            offsets.push(total);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0 as Vertex; total];
        for (u, v) in edges {
            if u != v {
                neighbors[fill[u as usize]] = v;
                fill[u as usize] += 1;
                neighbors[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
        }
        Ok(Self::compact_segments(n, offsets, neighbors))
    }

    /// Sorts and deduplicates every adjacency segment in place.
    fn compact_segments(n: usize, offsets: Vec<usize>, mut neighbors: Vec<Vertex>) -> Self {
        let mut new_offsets = Vec::with_capacity(n + 1);
        new_offsets.push(0);
        let mut write = 0;
        let mut max_degree = 0;
        for v in 0..n {
            let (start, end) = (offsets[v], offsets[v + 1]);
            neighbors[start..end].sort_unstable();
            let seg_start = write;
            let mut last = None;
            for read in start..end {
                let u = neighbors[read];
                if last != Some(u) {
                    neighbors[write] = u;
                    write += 1;
                    last = Some(u);
                }
            }
            max_degree = max_degree.max(write - seg_start);
            new_offsets.push(write);
        }
        neighbors.truncate(write);
        neighbors.shrink_to_fit();
        Graph {
            n,
            m: write / 2,
            offsets: new_offsets,
            neighbors,
            max_degree,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[Vertex] {
        &self.neighbors
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n as Vertex).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Checks the structural invariants: sorted, loop-free, symmetric lists
    /// and consistent counts.
    pub fn validate(&self) -> Result<()> {
        if self.offsets.len() != self.n + 1 || self.offsets[self.n] != 2 * self.m {
            return Err(Error::invalid("offsets inconsistent with n and m"));
        }
        let mut max_degree = 0;
        for v in 0..self.n as Vertex {
            let list = self.neighbors(v);
            max_degree = max_degree.max(list.len());
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "neighbors of {v} not strictly increasing"
                )));
            }
            for &u in list {
                if u == v {
                    return Err(Error::invalid(format!("self-loop at {v}")));
                }
                if u as usize >= self.n || !self.has_edge(u, v) {
                    return Err(Error::invalid(format!("edge ({v}, {u}) is not symmetric")));
                }
            }
        }
        if max_degree != self.max_degree {
            return Err(Error::invalid("max_degree mismatch"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Every directed arc becomes an undirected edge. When unset only
    /// reciprocated arcs (both `u v` and `v u` present) are kept.
    pub symmetrize: bool,
    /// Relabel the ids that actually occur to `0..k` in first-appearance
    /// order instead of using `0..=max_id`.
    pub compact: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            symmetrize: true,
            compact: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EdgeListLoad {
    pub graph: Graph,
    /// Data lines read, before deduplication, self-loop removal or
    /// symmetrization.
    pub raw_arcs: u64,
    pub self_loops: u64,
}

pub fn load_edge_list(path: impl AsRef<Path>, options: LoadOptions) -> Result<EdgeListLoad> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_edge_list(BufReader::new(file), path, options)
}

pub fn read_edge_list<R: BufRead>(
    reader: R,
    name: &Path,
    options: LoadOptions,
) -> Result<EdgeListLoad> {
    let parse_error = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(name),
        line,
        message,
    };

    let mut arcs: Vec<(u64, u64)> = Vec::new();
    let mut declared_n: Option<usize> = None;
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(EDGE_LIST_MAGIC) {
            for field in rest.split_whitespace() {
                if let Some(value) = field.strip_prefix("n=") {
                    let n = value
                        .parse::<usize>()
                        .map_err(|e| parse_error(line_no, format!("bad header n: {e}")))?;
                    declared_n = Some(n);
                }
            }
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = |what: &str| -> Result<u64> {
            let token = tokens
                .next()
                .ok_or_else(|| parse_error(line_no, format!("missing {what} vertex id")))?;
            token.parse::<u64>().map_err(|_| {
                parse_error(
                    line_no,
                    format!("{what} vertex id {token:?} is not a non-negative integer"),
                )
            })
        };
        let u = next_id("source")?;
        let v = next_id("target")?;
        if let Some(extra) = tokens.next() {
            return Err(parse_error(line_no, format!("unexpected token {extra:?}")));
        }
        if u >= u64::from(u32::MAX) || v >= u64::from(u32::MAX) {
            return Err(parse_error(
                line_no,
                "vertex id exceeds 32-bit range".into(),
            ));
        }
        arcs.push((u, v));
    }

    if arcs.is_empty() && declared_n.is_none() {
        return Err(Error::EmptyInput(PathBuf::from(name)));
    }

    let raw_arcs = arcs.len() as u64;
    let self_loops = arcs.iter().filter(|(u, v)| u == v).count() as u64;

    let (n, ids): (usize, Vec<(Vertex, Vertex)>) = if options.compact {
        let mut map: HashMap<u64, Vertex> = HashMap::new();
        let mut relabel = |id: u64| {
            let next = map.len() as Vertex;
            *map.entry(id).or_insert(next)
        };
        let ids = arcs
            .iter()
            .map(|&(u, v)| (relabel(u), relabel(v)))
            .collect();
        (map.len(), ids)
    } else {
        let max_id = arcs.iter().map(|&(u, v)| u.max(v)).max();
        let n = max_id
            .map_or(0, |m| m as usize + 1)
            .max(declared_n.unwrap_or(0));
        (
            n,
            arcs.iter()
                .map(|&(u, v)| (u as Vertex, v as Vertex))
                .collect(),
        )
    };
    drop(arcs);

    let graph = if options.symmetrize {
        Graph::from_edges(n, ids.iter().copied())?
    } else {
        let mut directed: Vec<(Vertex, Vertex)> = ids.into_iter().filter(|(u, v)| u != v).collect();
        directed.sort_unstable();
        directed.dedup();
        let mutual = directed
            .iter()
            .copied()
            .filter(|&(u, v)| u < v && directed.binary_search(&(v, u)).is_ok());
        Graph::from_edges(n, mutual.collect::<Vec<_>>())?
    };
    Ok(EdgeListLoad {
        graph,
        raw_arcs,
        self_loops,
    })
}

pub fn write_edge_list<W: Write>(g: &Graph, writer: W) -> Result<()> {
    let mut out = BufWriter::new(writer);
    writeln!(out, "{EDGE_LIST_MAGIC} n={} m={}", g.n(), g.m())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    write_edge_list(g, File::create(path)?)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

/// Calls `emit(i)` for each index of `0..len` selected independently with
/// probability `p`, jumping between successes with geometric skips
/// `floor(ln(1 - U) / ln(1 - p))`.
fn sample_indices(len: u64, p: f64, rng: &mut Rng, mut emit: impl FnMut(u64)) {
    if len == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..len).for_each(emit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next = 0u64;
    loop {
        let u = 1.0 - rng.next_f64();
        let skip = (u.ln() / log_q).floor();
        if skip >= (len - next) as f64 {
            return;
        }
        next += skip as u64;
        emit(next);
        next += 1;
        if next >= len {
            return;
        }
    }
}

/// Erdős–Rényi G(n, p): every unordered pair is an edge independently with
/// probability `p`. Rows `u = 0..n` are sampled in order over columns
/// `u+1..n`, so the instance depends only on `(n, p, seed)`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability("p", p)?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let base = u as u64 + 1;
        sample_indices((n - u - 1) as u64, p, &mut rng, |i| {
            edges.push((u as Vertex, (base + i) as Vertex));
        });
    }
    Graph::from_edges(n, edges)
}

/// Block index of each vertex when `n` vertices are cut into `k` contiguous
/// blocks whose sizes differ by at most one.
pub fn planted_blocks(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| i * k / n).collect()
}

/// Planted partition: `k` near-equal contiguous blocks, intra-block pairs are
/// edges with probability `p_in` and inter-block pairs with `p_out`. Each row
/// first samples the rest of its own block, then all later blocks.
pub fn gen_planted(n: usize, k: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let blocks = planted_blocks(n, k);
    let mut block_end = vec![n; k];
    for i in (0..n).rev() {
        if i + 1 < n && blocks[i] != blocks[i + 1] {
            block_end[blocks[i]] = i + 1;
        }
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let end = block_end[blocks[u]];
        let inner = (u + 1) as u64;
        sample_indices((end - u - 1) as u64, p_in, &mut rng, |i| {
            edges.push((u as Vertex, (inner + i) as Vertex));
        });
        sample_indices((n - end) as u64, p_out, &mut rng, |i| {
            edges.push((u as Vertex, (end as u64 + i) as Vertex));
        });
    }
    Graph::from_edges(n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    /// Bucket 0 counts isolated vertices; bucket `b >= 1` counts degrees in
    /// `[2^(b-1), 2^b)`.
    pub degree_histogram: Vec<u64>,
    pub density: f64,
}

pub fn stats(g: &Graph) -> GraphStats {
    let bucket = |d: usize| {
        if d == 0 {
            0
        } else {
            (usize::BITS - d.leading_zeros()) as usize
        }
    };
    let mut histogram = vec![0u64; bucket(g.max_degree()) + 1];
    for v in 0..g.n() as Vertex {
        histogram[bucket(g.degree(v))] += 1;
    }
    let pairs = g.n() as f64 * (g.n() as f64 - 1.0);
    GraphStats {
        n: g.n(),
        m: g.m(),
        max_degree: g.max_degree(),
        degree_histogram: histogram,
        density: if pairs > 0.0 {
            2.0 * g.m() as f64 / pairs
        } else {
            0.0
        },
    }
}
