//! Binary relations over a finite carrier `0..n`, stored as successor bitsets.

use fixedbitset::FixedBitSet;

/// A relation over the points `0..len`. Row `u` holds the successors of `u`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Relation {
    rows: Vec<FixedBitSet>,
}

impl Relation {
    pub fn empty(len: usize) -> Self {
        Relation {
            rows: vec![FixedBitSet::with_capacity(len); len],
        }
    }

    pub fn identity(len: usize) -> Self {
        let mut r = Self::empty(len);
        for u in 0..len {
            r.insert(u, u);
        }
        r
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(len: usize, pairs: I) -> Self {
        let mut r = Self::empty(len);
        for (u, v) in pairs {
            r.insert(u, v);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, u: usize, v: usize) {
        self.rows[u].insert(v);
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    pub fn successors(&self, u: usize) -> &FixedBitSet {
        &self.rows[u]
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.ones().map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    /// `self` followed by `other`: `(u, w)` iff `u self v` and `v other w` for some `v`.
    pub fn then(&self, other: &Relation) -> Relation {
        let n = self.len();
        let mut out = Relation::empty(n);
        for u in 0..n {
            let row = &mut out.rows[u];
            for v in self.rows[u].ones() {
                row.union_with(&other.rows[v]);
            }
        }
        out
    }

    /// Image of a point set under the relation.
    pub fn image(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.len());
        for u in set.ones() {
            out.union_with(&self.rows[u]);
        }
        out
    }

    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty(self.len());
        for (u, v) in self.pairs() {
            out.insert(v, u);
        }
        out
    }

    pub fn union_with(&mut self, other: &Relation) {
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            a.union_with(b);
        }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a.is_subset(b))
    }

    /// First pair of `self` missing from `other`, in row-major order.
    pub fn first_missing(&self, other: &Relation) -> Option<(usize, usize)> {
        for (u, (a, b)) in self.rows.iter().zip(&other.rows).enumerate() {
            if let Some(v) = a.difference(b).next() {
                return Some((u, v));
            }
        }
        None
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|u| self.contains(u, u))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(u, v)| self.contains(v, u))
    }

    pub fn is_transitive(&self) -> bool {
        self.then(self).is_subset(self)
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// Least equivalence relation containing `self`.
    pub fn equivalence_closure(&self) -> Relation {
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, v) in self.pairs() {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let roots: Vec<usize> = (0..n).map(|u| find(&mut parent, u)).collect();
        let mut classes = vec![FixedBitSet::with_capacity(n); n];
        for (u, &r) in roots.iter().enumerate() {
            classes[r].insert(u);
        }
        Relation {
            rows: roots.iter().map(|&r| classes[r].clone()).collect(),
        }
    }

    /// Relation restricted to `keep`, reindexed in increasing order of the kept points.
    pub fn restrict(&self, keep: &[usize]) -> Relation {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &u) in keep.iter().enumerate() {
            index[u] = i;
        }
        let mut out = Relation::empty(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            for v in self.rows[u].ones() {
                if index[v] != usize::MAX {
                    out.insert(i, index[v]);
                }
            }
        }
        out
    }

    /// Every point reachable from `start` (inclusive) along the union of `rels`.
    pub fn reach<'a, I>(len: usize, start: &FixedBitSet, rels: I) -> FixedBitSet
    where
        I: IntoIterator<Item = &'a Relation> + Clone,
    {
        let mut seen = start.clone();
        seen.grow(len);
        let mut frontier: Vec<usize> = seen.ones().collect();
        while let Some(u) = frontier.pop() {
            for r in rels.clone() {
                for v in r.rows[u].ones() {
                    if !seen.put(v) {
                        frontier.push(v);
                    }
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_follows_sequence_order() {
        let a = Relation::from_pairs(3, [(0, 1)]);
        let b = Relation::from_pairs(3, [(1, 2)]);
        assert!(a.then(&b).contains(0, 2));
        assert_eq!(b.then(&a).edge_count(), 0);
    }

    #[test]
    fn closure_is_least_equivalence() {
        let r = Relation::from_pairs(4, [(0, 1), (2, 1)]);
        let c = r.equivalence_closure();
        assert!(c.is_equivalence());
        assert!(c.contains(0, 2) && c.contains(2, 0));
        assert!(!c.contains(0, 3));
        assert_eq!(c.equivalence_closure(), c);
    }

    #[test]
    fn restriction_reindexes() {
        let r = Relation::from_pairs(4, [(0, 3), (3, 1), (1, 2)]);
        let s = r.restrict(&[1, 3]);
        assert_eq!(s.pairs().collect::<Vec<_>>(), vec![(1, 0)]);
    }

    #[test]
    fn reach_includes_start() {
        let r = Relation::from_pairs(3, [(0, 1)]);
        let mut start = FixedBitSet::with_capacity(3);
        start.insert(2);
        let seen = Relation::reach(3, &start, [&r]);
        assert_eq!(seen.ones().collect::<Vec<_>>(), vec![2]);
    }
}
