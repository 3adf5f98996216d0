//! Binary indexed tree over non-negative values.
//!
//! Used as an order-statistic structure (counts of free slots) and as a
//! cumulative weight table for draws without replacement.

use std::ops::{AddAssign, SubAssign};

#[derive(Debug, Clone)]
pub(crate) struct Fenwick<T> {
    tree: Vec<T>,
    top: usize,
}

impl<T> Fenwick<T>
where
    T: Copy + Default + PartialOrd + AddAssign + SubAssign,
{
    pub(crate) fn from_values(values: &[T]) -> Self {
        let n = values.len();
        let mut tree = vec![T::default(); n + 1];
        tree[1..].copy_from_slice(values);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = tree[i];
                tree[parent] += v;
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Fenwick { tree, top }
    }

    pub(crate) fn len(&self) -> usize {
        self.tree.len() - 1
    }

    /// Adds `delta` at 0-based `index`.
    pub(crate) fn add(&mut self, index: usize, delta: T) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Subtracts `delta` at 0-based `index`.
    pub(crate) fn sub(&mut self, index: usize, delta: T) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] -= delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of the first `count` entries.
    pub(crate) fn prefix(&self, count: usize) -> T {
        let mut acc = T::default();
        let mut i = count;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }

    pub(crate) fn total(&self) -> T {
        self.prefix(self.len())
    }

    /// Smallest 0-based index whose inclusive prefix sum exceeds `target`.
    /// Returns `len()` when no such index exists.
    pub(crate) fn search(&self, target: T) -> usize {
        let mut pos = 0;
        let mut rem = target;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
