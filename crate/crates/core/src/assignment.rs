//! Cluster labels produced by every engine, plus their text format.
//!
//! The text format is one `vertex<TAB>label` line per vertex in vertex order.
//! The canonical form renumbers labels by first appearance in vertex order so
//! runs that agree on the partition produce byte-identical files.

use std::collections::HashMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::{Label, Vertex};

#[repr(u8)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CenterFlag {
    Undecided = 0,
    Center = 1,
    NonCenter = 2,
}

impl CenterFlag {
    #[inline]
    pub fn from_u8(raw: u8) -> Self {
        match raw {
            1 => CenterFlag::Center,
            2 => CenterFlag::NonCenter,
            _ => CenterFlag::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<Label>,
    centers: Vec<CenterFlag>,
}

impl Assignment {
    /// Every vertex unclustered.
    pub fn unclustered(n: usize) -> Self {
        Assignment {
            labels: vec![n as Label; n],
            centers: vec![CenterFlag::Undecided; n],
        }
    }

    pub fn from_parts(labels: Vec<Label>, centers: Vec<CenterFlag>) -> Result<Self> {
        if labels.len() != centers.len() {
            return Err(Error::invalid("labels and center flags differ in length"));
        }
        Ok(Assignment { labels, centers })
    }

    /// Labels only; center flags are left undecided.
    pub fn from_labels(labels: Vec<Label>) -> Self {
        let n = labels.len();
        Assignment {
            labels,
            centers: vec![CenterFlag::Undecided; n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The "unclustered" label, equal to `n`.
    #[inline]
    pub fn sentinel(&self) -> Label {
        self.labels.len() as Label
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, v: Vertex) -> Label {
        self.labels[v as usize]
    }

    pub fn centers(&self) -> &[CenterFlag] {
        &self.centers
    }

    #[inline]
    pub fn center_flag(&self, v: Vertex) -> CenterFlag {
        self.centers[v as usize]
    }

    pub(crate) fn set(&mut self, v: Vertex, label: Label, flag: CenterFlag) {
        self.labels[v as usize] = label;
        self.centers[v as usize] = flag;
    }

    #[inline]
    pub(crate) fn is_unclustered(&self, v: Vertex) -> bool {
        self.labels[v as usize] == self.sentinel()
    }

    /// Fails on the first vertex still carrying the sentinel (or any label
    /// outside `0..n`).
    pub fn check_complete(&self) -> Result<()> {
        let sentinel = self.sentinel();
        match self.labels.iter().position(|&l| l >= sentinel) {
            Some(v) => Err(Error::Incomplete {
                vertex: v as Vertex,
                label: self.labels[v],
            }),
            None => Ok(()),
        }
    }

    /// Labels renumbered `0, 1, ...` by first appearance in vertex order.
    pub fn canonical(&self) -> Vec<Label> {
        let mut map: HashMap<Label, Label> = HashMap::new();
        self.labels
            .iter()
            .map(|&l| {
                let next = map.len() as Label;
                *map.entry(l).or_insert(next)
            })
            .collect()
    }

    pub fn cluster_count(&self) -> usize {
        let mut seen: Vec<Label> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Size of every cluster, indexed by label (`0..=n`; the last slot counts
    /// unclustered vertices).
    pub fn cluster_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.labels.len() + 1];
        for &l in &self.labels {
            sizes[(l as usize).min(self.labels.len())] += 1;
        }
        sizes
    }
}

pub fn write_assignment<W: Write>(labels: &[Label], writer: W) -> Result<()> {
    let mut out = BufWriter::new(writer);
    for (v, l) in labels.iter().enumerate() {
        writeln!(out, "{v}\t{l}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `vertex<TAB>label` file. Every vertex `0..k` must appear exactly
/// once; lines may come in any order.
pub fn read_assignment<R: BufRead>(reader: R, name: &Path) -> Result<Vec<Label>> {
    let parse_error = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(name),
        line,
        message,
    };
    let mut entries: Vec<(u64, u64)> = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut field = |what: &str| -> Result<u64> {
            let token = fields
                .next()
                .ok_or_else(|| parse_error(index + 1, format!("missing {what}")))?;
            token
                .parse::<u64>()
                .map_err(|_| parse_error(index + 1, format!("{what} {token:?} is not an integer")))
        };
        let v = field("vertex")?;
        let l = field("label")?;
        entries.push((v, l));
    }
    let n = entries.len();
    let mut labels = vec![None; n];
    for (v, l) in entries {
        let slot = labels
            .get_mut(v as usize)
            .ok_or_else(|| Error::invalid(format!("vertex {v} out of range for {n} entries")))?;
        if slot.is_some() {
            return Err(Error::invalid(format!("vertex {v} listed twice")));
        }
        *slot = Some(u32::try_from(l).unwrap_or(u32::MAX));
    }
    Ok(labels
        .into_iter()
        .map(|l| l.expect("all slots filled"))
        .collect())
}
