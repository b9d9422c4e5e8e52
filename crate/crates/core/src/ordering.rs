//! Seeded randomness and the vertex permutation that drives every algorithm.
//!
//! The generator is SplitMix64 (Steele, Lea and Flood, 2014): a 64-bit state
//! advanced by the golden-gamma increment `0x9E3779B97F4A7C15`, with output
//! mixing
//!
//! ```text
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! Derived quantities are fixed as follows so that any implementation can
//! reproduce a run bit for bit:
//!
//! * `next_below(k)` uses Lemire's multiply-shift with rejection on the low
//!   64 bits of the 128-bit product.
//! * `next_f64()` is `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `random_permutation` is the descending Fisher–Yates shuffle: for
//!   `i = n-1 .. 1`, swap `order[i]` with `order[next_below(i + 1)]`.
//! * `derive_seed(root, tag)` hashes `tag` with 64-bit FNV-1a, xors it into
//!   `root`, and returns the first SplitMix64 output for that seed.

use std::fmt;

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::Vertex;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 pseudo-random generator.
#[derive(Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl fmt::Debug for Rng {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rng")
            .field("algorithm", &Self::ALGORITHM)
            .field("state", &format_args!("{:#018x}", self.state))
            .finish()
    }
}

impl Rng {
    pub const ALGORITHM: &'static str = "splitmix64";

    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer on `0..bound`. `bound` must be non-zero.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli trial with success probability `p`.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

impl rand_core::RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        (Rng::next_u64(self) >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        Rng::next_u64(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = Rng::next_u64(self).to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

pub fn rng_new(seed: u64) -> Rng {
    Rng::new(seed)
}

/// Seed for one purpose ("graph", "perm", "batch", ...) derived from a root.
pub fn derive_seed(root: u64, tag: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tag.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Rng::new(root ^ hash).next_u64()
}

/// Parses a seed given either in decimal or as `0x`-prefixed hexadecimal.
pub fn parse_seed(text: &str) -> Result<u64> {
    let text = text.trim();
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => text.replace('_', "").parse::<u64>(),
    };
    parsed.map_err(|e| Error::invalid(format!("bad seed {text:?}: {e}")))
}

/// Exact binomial sample: inversion for small means, BTPE otherwise.
pub fn binomial_draw(trials: u64, p: f64, rng: &mut Rng) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("probability checked above")
        .sample(rng)
}

/// A total order on the vertices. `order[i]` is the vertex of rank `i` and
/// `rank[v]` its inverse. Ranks are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<Vertex>,
    rank: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let order: Vec<Vertex> = (0..n as u32).collect();
        Permutation {
            rank: order.clone(),
            order,
        }
    }

    /// Builds a permutation from an explicit order (vertex of rank 0 first).
    pub fn from_order(order: Vec<Vertex>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![u32::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            let slot = rank
                .get_mut(v as usize)
                .ok_or_else(|| Error::invalid(format!("vertex {v} out of range for n = {n}")))?;
            if *slot != u32::MAX {
                return Err(Error::invalid(format!("vertex {v} appears twice")));
            }
            *slot = i as u32;
        }
        Ok(Permutation { order, rank })
    }

    /// Builds a permutation from the rank of every vertex.
    pub fn from_ranks(rank: Vec<u32>) -> Result<Self> {
        let n = rank.len();
        let mut order = vec![u32::MAX; n];
        for (v, &r) in rank.iter().enumerate() {
            let slot = order
                .get_mut(r as usize)
                .ok_or_else(|| Error::invalid(format!("rank {r} out of range for n = {n}")))?;
            if *slot != u32::MAX {
                return Err(Error::invalid(format!("rank {r} appears twice")));
            }
            *slot = v as u32;
        }
        Ok(Permutation { order, rank })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    #[inline]
    pub fn rank(&self, v: Vertex) -> u32 {
        self.rank[v as usize]
    }

    #[inline]
    pub fn vertex_at(&self, rank: usize) -> Vertex {
        self.order[rank]
    }
}

pub fn random_permutation(n: usize, rng: &mut Rng) -> Permutation {
    let mut order: Vec<Vertex> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut rank = vec![0u32; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i as u32;
    }
    Permutation { order, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi_square(observed: &[u64], expected: &[f64]) -> f64 {
        observed
            .iter()
            .zip(expected)
            .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
            .sum()
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn seeds_one_and_two_differ() {
        // Values from an independent SplitMix64 implementation.
        assert_eq!(Rng::new(1).next_u64(), 0x910a_2dec_8902_5cc1);
        assert_eq!(Rng::new(2).next_u64(), 0x9758_35de_1c97_56ce);
    }

    #[test]
    fn golden_stream_for_5eed() {
        let golden = include_str!("../tests/data/splitmix64_5eed.txt");
        let mut rng = Rng::new(0x5EED);
        let mut count = 0;
        for line in golden.lines() {
            let expected = u64::from_str_radix(line.trim_start_matches("0x"), 16).unwrap();
            assert_eq!(rng.next_u64(), expected);
            count += 1;
        }
        assert_eq!(count, 100);
    }

    #[test]
    fn next_below_one_is_zero() {
        let mut rng = Rng::new(9);
        assert!((0..1000).all(|_| rng.next_below(1) == 0));
    }

    #[test]
    fn next_below_is_uniform() {
        let mut rng = Rng::new(3);
        let mut counts = [0u64; 10];
        for _ in 0..100_000 {
            counts[rng.next_below(10) as usize] += 1;
        }
        // chi-square 99% quantile, 9 degrees of freedom
        assert!(chi_square(&counts, &[10_000.0; 10]) < 21.666);
    }

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seed("24301").unwrap(), 24301);
        assert_eq!(parse_seed("0x5EED").unwrap(), 0x5EED);
        assert_eq!(parse_seed("0x5eed").unwrap(), 0x5EED);
        assert!(parse_seed("seed").is_err());
        assert!(parse_seed("0xzz").is_err());
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_ne!(derive_seed(1, "perm"), derive_seed(1, "batch"));
        assert_ne!(derive_seed(1, "perm"), derive_seed(2, "perm"));
        assert_eq!(derive_seed(1, "perm"), derive_seed(1, "perm"));
    }

    #[test]
    fn permutation_of_one() {
        let p = random_permutation(1, &mut Rng::new(0));
        assert_eq!(p.order(), &[0]);
        assert_eq!(p.ranks(), &[0]);
        assert!(random_permutation(0, &mut Rng::new(0)).is_empty());
    }

    #[test]
    fn rank_of_vertex_zero_is_uniform() {
        let n = 52;
        let mut counts = vec![0u64; n];
        for seed in 0..10_000u64 {
            let p = random_permutation(n, &mut Rng::new(seed));
            counts[p.rank(0) as usize] += 1;
        }
        let expected = vec![10_000.0 / n as f64; n];
        // chi-square 99% quantile, 51 degrees of freedom
        assert!(chi_square(&counts, &expected) < 77.386);
    }

    #[test]
    fn all_permutations_of_four_are_uniform() {
        let mut counts = std::collections::HashMap::new();
        for seed in 0..100_000u64 {
            let p = random_permutation(4, &mut Rng::new(derive_seed(seed, "perm")));
            *counts.entry(p.order().to_vec()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 24);
        let observed: Vec<u64> = counts.values().copied().collect();
        // chi-square 99% quantile, 23 degrees of freedom
        assert!(chi_square(&observed, &[100_000.0 / 24.0; 24]) < 41.638);
    }

    #[test]
    fn explicit_orders_validate() {
        let p = Permutation::from_order(vec![1, 0, 2]).unwrap();
        assert_eq!(p.ranks(), &[1, 0, 2]);
        assert_eq!(Permutation::from_ranks(vec![1, 0, 2]).unwrap(), p);
        assert!(Permutation::from_order(vec![0, 0]).is_err());
        assert!(Permutation::from_order(vec![0, 2]).is_err());
    }

    #[test]
    fn binomial_edges() {
        let mut rng = Rng::new(5);
        assert_eq!(binomial_draw(100, 0.0, &mut rng), 0);
        assert_eq!(binomial_draw(100, 1.0, &mut rng), 100);
        assert_eq!(binomial_draw(0, 0.5, &mut rng), 0);
    }

    #[test]
    fn binomial_large_mean() {
        let mut rng = Rng::new(11);
        let draws = 10_000;
        let sum: u64 = (0..draws)
            .map(|_| binomial_draw(1_000_000, 1e-3, &mut rng))
            .sum();
        let mean = sum as f64 / draws as f64;
        let sigma = (1_000_000.0 * 1e-3 * (1.0 - 1e-3) / draws as f64).sqrt();
        assert!((mean - 1000.0).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn binomial_small_pmf() {
        let mut rng = Rng::new(13);
        let mut counts = [0u64; 6];
        let draws = 1_000_000u64;
        for _ in 0..draws {
            counts[binomial_draw(5, 0.5, &mut rng) as usize] += 1;
        }
        let expected: Vec<f64> = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0]
            .iter()
            .map(|c| c / 32.0 * draws as f64)
            .collect();
        // chi-square 99% quantile, 5 degrees of freedom
        assert!(chi_square(&counts, &expected) < 15.086);
    }
}
