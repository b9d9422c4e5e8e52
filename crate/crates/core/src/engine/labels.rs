//! Label cells shared by all workers of a run.
//!
//! Every label only ever decreases, so a possibly outdated read is still an
//! upper bound on the current value. The `stale` mirror exploits that: it is
//! written with relaxed stores after each successful update and serves the
//! fast paths, while every decision and every write goes through the
//! authoritative cells.

use std::sync::atomic::{AtomicU32, AtomicU8, Ordering};

use crate::assignment::{Assignment, CenterFlag};
use crate::{Label, Vertex};

pub struct SharedLabels {
    authoritative: Vec<AtomicU32>,
    stale: Vec<AtomicU32>,
    flags: Vec<AtomicU8>,
}

impl SharedLabels {
    pub fn new(n: usize) -> Self {
        let sentinel = n as Label;
        SharedLabels {
            authoritative: (0..n).map(|_| AtomicU32::new(sentinel)).collect(),
            stale: (0..n).map(|_| AtomicU32::new(sentinel)).collect(),
            flags: (0..n)
                .map(|_| AtomicU8::new(CenterFlag::Undecided as u8))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.authoritative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.authoritative.is_empty()
    }

    #[inline]
    pub fn sentinel(&self) -> Label {
        self.authoritative.len() as Label
    }

    #[inline]
    pub fn load(&self, v: Vertex) -> Label {
        self.authoritative[v as usize].load(Ordering::Acquire)
    }

    #[inline]
    pub fn load_stale(&self, v: Vertex) -> Label {
        self.stale[v as usize].load(Ordering::Relaxed)
    }

    /// Atomic `label[v] = min(label[v], candidate)`; returns the previous
    /// value.
    #[inline]
    pub fn fetch_min(&self, v: Vertex, candidate: Label) -> Label {
        let previous = self.authoritative[v as usize].fetch_min(candidate, Ordering::AcqRel);
        if candidate < previous {
            self.stale[v as usize].store(candidate, Ordering::Relaxed);
        }
        previous
    }

    #[inline]
    pub fn flag(&self, v: Vertex) -> CenterFlag {
        CenterFlag::from_u8(self.flags[v as usize].load(Ordering::Acquire))
    }

    /// Moves the flag out of `Undecided`. Returns false if it was already
    /// decided, in which case nothing changes.
    #[inline]
    pub fn publish(&self, v: Vertex, flag: CenterFlag) -> bool {
        debug_assert_ne!(flag, CenterFlag::Undecided);
        self.flags[v as usize]
            .compare_exchange(
                CenterFlag::Undecided as u8,
                flag as u8,
                Ordering::AcqRel,
                Ordering::Acquire,
            )
            .is_ok()
    }

    /// Snapshot of the authoritative labels.
    pub fn snapshot(&self) -> Vec<Label> {
        self.authoritative
            .iter()
            .map(|c| c.load(Ordering::Acquire))
            .collect()
    }

    pub fn into_assignment(self) -> Assignment {
        let labels = self
            .authoritative
            .into_iter()
            .map(AtomicU32::into_inner)
            .collect();
        let flags = self
            .flags
            .into_iter()
            .map(|f| CenterFlag::from_u8(f.into_inner()))
            .collect();
        Assignment::from_parts(labels, flags).expect("equal lengths")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_semantics_under_contention() {
        let labels = SharedLabels::new(10);
        std::thread::scope(|s| {
            for t in 0..4u32 {
                let labels = &labels;
                s.spawn(move || {
                    for candidate in (0..10u32).rev() {
                        labels.fetch_min(0, candidate + t);
                    }
                });
            }
        });
        assert_eq!(labels.load(0), 0);
        assert_eq!(labels.load_stale(0), 0);
        assert_eq!(labels.load(1), 10);
    }

    #[test]
    fn fetch_min_never_raises() {
        let labels = SharedLabels::new(8);
        assert_eq!(labels.fetch_min(3, 5), 8);
        assert_eq!(labels.fetch_min(3, 7), 5);
        assert_eq!(labels.load(3), 5);
        assert_eq!(labels.load_stale(3), 5);
    }

    #[test]
    fn flags_publish_once() {
        let labels = SharedLabels::new(2);
        assert_eq!(labels.flag(1), CenterFlag::Undecided);
        assert!(labels.publish(1, CenterFlag::Center));
        assert!(!labels.publish(1, CenterFlag::NonCenter));
        assert_eq!(labels.flag(1), CenterFlag::Center);
        let a = labels.into_assignment();
        assert_eq!(a.center_flag(1), CenterFlag::Center);
        assert_eq!(a.labels(), &[2, 2]);
    }
}
