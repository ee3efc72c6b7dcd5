//! Segment-length distributions up to dihedral symmetry.
//!
//! The segment lengths along a pseudoline form a cyclic `k`-tuple summing to
//! `n - 1 - k(k-1)`. [`PartitionTable`] lists one maximal representative per
//! dihedral orbit, ordered by underlying integer partition (descending) and
//! then by arrangement (descending). Earlier tuples therefore never have a
//! smaller leading (= largest) entry, which is what makes the longest-segment
//! bound of the sweep sound.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::PartitionError;
use crate::incidence::two_crossings_per_line;

/// Segment lengths (in 2-crossings) along a pseudoline, in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentTuple(pub Vec<usize>);

impl SegmentTuple {
    pub fn new(entries: Vec<usize>) -> Self {
        SegmentTuple(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Largest segment; for a maximal representative this is the first entry.
    pub fn longest(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Lexicographic maximum over all rotations and reflections.
    pub fn dihedral_max(&self) -> SegmentTuple {
        dihedral_max(&self.0)
    }

    pub fn is_maximal(&self) -> bool {
        self.dihedral_max() == *self
    }
}

impl std::fmt::Display for SegmentTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Lexicographic maximum of the dihedral orbit of `t`.
pub fn dihedral_max(t: &[usize]) -> SegmentTuple {
    let k = t.len();
    let mut best = t.to_vec();
    let mut candidate = vec![0; k];
    for start in 0..k {
        for reflect in [false, true] {
            for (i, slot) in candidate.iter_mut().enumerate() {
                *slot = if reflect { t[(start + k - i) % k] } else { t[(start + i) % k] };
            }
            if candidate > best {
                best.copy_from_slice(&candidate);
            }
        }
    }
    SegmentTuple(best)
}

/// Ordered list of dihedral-maximal `k`-tuples summing to `n - 1 - k(k-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTable {
    k: usize,
    total: usize,
    tuples: Vec<SegmentTuple>,
    index: HashMap<SegmentTuple, usize>,
}

impl PartitionTable {
    pub fn new(n: usize, k: usize) -> Result<Self, PartitionError> {
        let total = two_crossings_per_line(n, k).ok_or(PartitionError::NegativeTotal { n, k })?;
        Ok(Self::for_total(k, total))
    }

    /// Table for `k`-tuples summing to `total`.
    pub fn for_total(k: usize, total: usize) -> Self {
        let mut reps = BTreeSet::new();
        let mut current = vec![0; k];
        compositions(&mut current, 0, total, &mut |c| {
            reps.insert(dihedral_max(c));
        });
        let mut tuples: Vec<SegmentTuple> = reps.into_iter().collect();
        tuples.sort_by_key(|t| {
            let mut shape = t.0.clone();
            shape.sort_unstable_by(|a, b| b.cmp(a));
            (Reverse(shape), Reverse(t.0.clone()))
        });
        let index = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        PartitionTable { k, total, tuples, index }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn tuples(&self) -> &[SegmentTuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Position of the maximal representative of `t`.
    pub fn rank(&self, t: &[usize]) -> Result<usize, PartitionError> {
        if t.len() != self.k || t.iter().sum::<usize>() != self.total {
            return Err(PartitionError::NotInTable(t.to_vec()));
        }
        self.index
            .get(&dihedral_max(t))
            .copied()
            .ok_or_else(|| PartitionError::NotInTable(t.to_vec()))
    }
}

fn compositions(current: &mut Vec<usize>, pos: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
    if pos + 1 == current.len() {
        current[pos] = left;
        visit(current);
        return;
    }
    if current.is_empty() {
        return;
    }
    for v in 0..=left {
        current[pos] = v;
        compositions(current, pos + 1, left - v, visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn t(v: &[usize]) -> SegmentTuple {
        SegmentTuple(v.to_vec())
    }

    #[test]
    fn dihedral_max_examples() {
        assert_eq!(dihedral_max(&[4, 0, 0, 0]), t(&[4, 0, 0, 0]));
        assert_eq!(dihedral_max(&[0, 1, 3, 0]), t(&[3, 1, 0, 0]));
        assert_eq!(dihedral_max(&[1, 1, 1, 1]), t(&[1, 1, 1, 1]));
        assert_eq!(dihedral_max(&[0, 2, 0, 1, 1]), t(&[2, 0, 1, 1, 0]));
    }

    #[test]
    fn table_17_4() {
        let table = PartitionTable::new(17, 4).unwrap();
        let expected: Vec<SegmentTuple> = [
            [4, 0, 0, 0],
            [3, 1, 0, 0],
            [3, 0, 1, 0],
            [2, 2, 0, 0],
            [2, 0, 2, 0],
            [2, 1, 1, 0],
            [2, 1, 0, 1],
            [1, 1, 1, 1],
        ]
        .iter()
        .map(|v| t(v))
        .collect();
        assert_eq!(table.tuples(), expected.as_slice());
        assert_eq!(table.rank(&[2, 0, 2, 0]), Ok(4));
        assert_eq!(table.rank(&[0, 0, 0, 4]), Ok(0));
        assert_eq!(table.rank(&[1, 2, 1, 0]), Ok(6));
        assert_eq!(table.rank(&[1, 1, 2, 0]), Ok(5));
    }

    #[test]
    fn small_tables() {
        let table = PartitionTable::new(9, 3).unwrap();
        assert_eq!(table.tuples(), &[t(&[2, 0, 0]), t(&[1, 1, 0])]);
        let table = PartitionTable::new(13, 4).unwrap();
        assert_eq!(table.tuples(), &[t(&[0, 0, 0, 0])]);
        assert!(PartitionTable::new(12, 4).is_err());
    }

    #[test]
    fn rank_rejects_foreign_tuples() {
        let table = PartitionTable::new(17, 4).unwrap();
        assert!(table.rank(&[4, 0, 0]).is_err());
        assert!(table.rank(&[4, 1, 0, 0]).is_err());
    }

    /// Brute-force orbit count: group all compositions by their full orbit set.
    fn orbit_count(k: usize, total: usize) -> usize {
        let mut all = Vec::new();
        let mut cur = vec![0; k];
        compositions(&mut cur, 0, total, &mut |c| all.push(c.to_vec()));
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut orbits = 0;
        for c in all {
            if seen.contains(&c) {
                continue;
            }
            orbits += 1;
            for s in 0..k {
                let rot: Vec<usize> = (0..k).map(|i| c[(s + i) % k]).collect();
                let mut refl = rot.clone();
                refl.reverse();
                seen.insert(rot);
                seen.insert(refl);
            }
        }
        orbits
    }

    #[test]
    fn table_size_matches_orbit_count() {
        for k in 1..=5 {
            for total in 0..=7 {
                let table = PartitionTable::for_total(k, total);
                assert_eq!(table.len(), orbit_count(k, total), "k={k} total={total}");
                for (i, tuple) in table.tuples().iter().enumerate() {
                    assert!(tuple.is_maximal());
                    assert_eq!(tuple.total(), total);
                    if i > 0 {
                        assert!(table.tuples()[i - 1].0[0] >= tuple.0[0]);
                    }
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn dihedral_max_is_idempotent_and_orbit_invariant(
            v in proptest::collection::vec(0usize..5, 1..7),
            shift in 0usize..7,
            flip: bool,
        ) {
            let m = dihedral_max(&v);
            proptest::prop_assert_eq!(dihedral_max(&m.0), m.clone());
            let k = v.len();
            let mut w: Vec<usize> = (0..k).map(|i| v[(i + shift) % k]).collect();
            if flip { w.reverse(); }
            proptest::prop_assert_eq!(dihedral_max(&w), m.clone());
            proptest::prop_assert!(m.0 >= v);
        }
    }
}
