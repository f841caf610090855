//! Exact sparse echelon bases over Q.

use std::collections::BTreeMap;
use std::ops::Bound;

use num_traits::{One, Zero};

use crate::Q;

pub type SparseVec<K> = BTreeMap<K, Q>;

#[derive(Clone, Debug)]
struct Row<K> {
    v: SparseVec<K>,
    combo: BTreeMap<usize, Q>,
}

/// Incremental row echelon form. The pivot of a row is its smallest key; pivot
/// coefficients are normalized to 1. With tracking on, every row remembers
/// its expression in the inserted vectors (numbered in insertion order).
#[derive(Clone, Debug)]
pub struct SpanBasis<K: Ord + Clone> {
    rows: BTreeMap<K, Row<K>>,
    track: bool,
    inserted: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Insert<K> {
    Independent { index: usize, pivot: K },
    Dependent { index: usize },
}

impl<K: Ord + Clone> Default for SpanBasis<K> {
    fn default() -> Self {
        Self::new(false)
    }
}

fn axpy<K: Ord + Clone>(v: &mut SparseVec<K>, a: &Q, w: &SparseVec<K>) {
    for (k, c) in w {
        let e = v.entry(k.clone()).or_insert_with(Q::zero);
        *e += a * c;
        if e.is_zero() {
            v.remove(k);
        }
    }
}

fn axpy_idx(v: &mut BTreeMap<usize, Q>, a: &Q, w: &BTreeMap<usize, Q>) {
    for (k, c) in w {
        let e = v.entry(*k).or_insert_with(Q::zero);
        *e += a * c;
        if e.is_zero() {
            v.remove(k);
        }
    }
}

impl<K: Ord + Clone> SpanBasis<K> {
    pub fn new(track: bool) -> Self {
        SpanBasis { rows: BTreeMap::new(), track, inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.rows.keys()
    }

    /// Echelon rows, by pivot.
    pub fn rows(&self) -> impl Iterator<Item = (&K, &SparseVec<K>)> {
        self.rows.iter().map(|(k, r)| (k, &r.v))
    }

    pub fn is_pivot(&self, k: &K) -> bool {
        self.rows.contains_key(k)
    }

    /// Full reduction: returns the remainder (no pivot keys left) and the
    /// combination `c` with `v = remainder + Σ c_i · input_i`.
    pub fn reduce(&self, v: &SparseVec<K>) -> (SparseVec<K>, BTreeMap<usize, Q>) {
        let mut r = v.clone();
        r.retain(|_, c| !c.is_zero());
        let mut combo = BTreeMap::new();
        let mut lower: Bound<K> = Bound::Unbounded;
        loop {
            let next = r
                .range((lower.clone(), Bound::Unbounded))
                .find(|(k, _)| self.rows.contains_key(*k))
                .map(|(k, c)| (k.clone(), c.clone()));
            let Some((k, c)) = next else { break };
            let row = &self.rows[&k];
            axpy(&mut r, &-c.clone(), &row.v);
            if self.track {
                axpy_idx(&mut combo, &c, &row.combo);
            }
            lower = Bound::Excluded(k);
        }
        (r, combo)
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v).0.is_empty()
    }

    /// Coefficients expressing `v` in the inserted vectors, if `v` is in the span.
    /// Requires tracking.
    pub fn express(&self, v: &SparseVec<K>) -> Option<BTreeMap<usize, Q>> {
        assert!(self.track, "express needs combination tracking");
        let (r, c) = self.reduce(v);
        r.is_empty().then_some(c)
    }

    pub fn insert(&mut self, v: &SparseVec<K>) -> Insert<K> {
        let index = self.inserted;
        self.inserted += 1;
        let (mut r, combo) = self.reduce(v);
        let Some((pk, pc)) = r.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return Insert::Dependent { index };
        };
        let mut own = BTreeMap::new();
        if self.track {
            // r = v - Σ combo·inputs
            own.insert(index, Q::one());
            axpy_idx(&mut own, &-Q::one(), &combo);
        }
        let inv = Q::one() / &pc;
        for c in r.values_mut() {
            *c *= &inv;
        }
        for c in own.values_mut() {
            *c *= &inv;
        }
        self.rows.insert(pk.clone(), Row { v: r, combo: own });
        Insert::Independent { index, pivot: pk }
    }

    /// Inserts and reports whether the vector enlarged the span.
    pub fn push(&mut self, v: &SparseVec<K>) -> bool {
        matches!(self.insert(v), Insert::Independent { .. })
    }
}

/// Rank of a list of sparse vectors.
pub fn rank<K: Ord + Clone>(vs: &[SparseVec<K>]) -> usize {
    let mut b = SpanBasis::new(false);
    for v in vs {
        b.push(v);
    }
    b.rank()
}

/// Dense rows to sparse vectors keyed by column.
pub fn dense_to_sparse(row: &[Q]) -> SparseVec<usize> {
    row.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect()
}

/// Solves `Σ c_i cols_i = b` exactly; returns one solution if any.
pub fn solve_columns<K: Ord + Clone>(cols: &[SparseVec<K>], b: &SparseVec<K>) -> Option<Vec<Q>> {
    let mut basis = SpanBasis::new(true);
    for c in cols {
        basis.insert(c);
    }
    let combo = basis.express(b)?;
    let mut out = vec![Q::zero(); cols.len()];
    for (i, c) in combo {
        out[i] = c;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;

    fn sv(entries: &[(usize, i64)]) -> SparseVec<usize> {
        entries.iter().map(|&(k, c)| (k, q_int(c))).filter(|(_, c)| !c.is_zero()).collect()
    }

    #[test]
    fn rank_and_membership() {
        let vs = vec![sv(&[(0, 1), (1, 2)]), sv(&[(0, 2), (1, 4)]), sv(&[(1, 1), (2, 1)])];
        assert_eq!(rank(&vs), 2);
        let mut b = SpanBasis::new(false);
        for v in &vs {
            b.push(v);
        }
        assert!(b.contains(&sv(&[(0, 1), (1, 3), (2, 1)])));
        assert!(!b.contains(&sv(&[(2, 1)])));
    }

    #[test]
    fn solve_returns_valid_combination() {
        let cols = vec![sv(&[(0, 1), (1, 1)]), sv(&[(1, 1), (2, 1)]), sv(&[(0, 1), (2, -1)])];
        let b = sv(&[(0, 3), (1, 5), (2, 2)]);
        let c = solve_columns(&cols, &b).unwrap();
        let mut acc = SparseVec::new();
        for (ci, col) in c.iter().zip(&cols) {
            axpy(&mut acc, ci, col);
        }
        assert_eq!(acc, b);
        assert!(solve_columns(&cols, &sv(&[(0, 1)])).is_none());
    }

    #[test]
    fn remainder_avoids_pivots() {
        let mut b = SpanBasis::new(true);
        b.insert(&sv(&[(1, 1), (3, 2)]));
        b.insert(&sv(&[(2, 1), (3, 1)]));
        let (r, combo) = b.reduce(&sv(&[(1, 1), (2, 1), (3, 7)]));
        assert_eq!(r, sv(&[(3, 4)]));
        assert_eq!(combo.get(&0), Some(&q_int(1)));
        assert_eq!(combo.get(&1), Some(&q_int(1)));
    }
}
