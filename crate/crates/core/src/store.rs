//! Compact representation of a bipartite graph `G = (I, J, E)` that starts
//! complete and only loses edges.
//!
//! Per left vertex `u` the store keeps its degree and the ordered set of
//! right vertices *not* adjacent to `u`; a second ordered set holds every left
//! vertex keyed by `(degree, id)`. Memory is `O(|I| + removed edges)` and every
//! operation costs `O(log)` expected node visits, which are charged to
//! `ds_ops`.
//!
//! Vertices and ranks are 0-based.

use crate::cost::CostLedger;
use crate::error::{Error, Result};
use crate::ostree::{Forest, Tree};

#[derive(Clone, Debug)]
pub struct CollisionStore {
    left: usize,
    right: usize,
    degree: Vec<usize>,
    nonneighbors: Vec<Tree>,
    complement: Forest<u32>,
    by_degree: Forest<(u32, u32)>,
    degree_index: Tree,
    removed: usize,
}

impl CollisionStore {
    /// The complete bipartite graph on `left × right` vertices.
    pub fn build_complete(left: usize, right: usize, ledger: &mut CostLedger) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::input("both sides of the graph must be non-empty"));
        }
        if left > u32::MAX as usize || right > u32::MAX as usize {
            return Err(Error::input("graph side too large"));
        }
        let mut by_degree = Forest::new();
        let degree_index = by_degree.build_sorted((0..left as u32).map(|u| (right as u32, u)));
        ledger.ds_ops += by_degree.visits() + left as u64;
        Ok(CollisionStore {
            left,
            right,
            degree: vec![right; left],
            nonneighbors: vec![Tree::default(); left],
            complement: Forest::new(),
            by_degree,
            degree_index,
            removed: 0,
        })
    }

    pub fn left_len(&self) -> usize {
        self.left
    }

    pub fn right_len(&self) -> usize {
        self.right
    }

    pub fn removed_count(&self) -> usize {
        self.removed
    }

    /// `|E|`.
    pub fn edge_count(&self) -> usize {
        self.left * self.right - self.removed
    }

    /// Live tree nodes; proportional to `|I| + removed edges`.
    pub fn node_count(&self) -> usize {
        self.complement.live_nodes() + self.by_degree.live_nodes()
    }

    fn visits(&self) -> u64 {
        self.complement.visits() + self.by_degree.visits()
    }

    fn charge(&self, ledger: &mut CostLedger, before: u64) {
        ledger.ds_ops += 1 + self.visits() - before;
    }

    fn check_left(&self, u: usize) -> Result<()> {
        if u >= self.left {
            return Err(Error::input(format!(
                "left vertex {u} out of range 0..{}",
                self.left
            )));
        }
        Ok(())
    }

    fn check_right(&self, v: usize) -> Result<()> {
        if v >= self.right {
            return Err(Error::input(format!(
                "right vertex {v} out of range 0..{}",
                self.right
            )));
        }
        Ok(())
    }

    pub fn degree(&self, u: usize, ledger: &mut CostLedger) -> Result<usize> {
        self.check_left(u)?;
        ledger.ds_ops += 1;
        Ok(self.degree[u])
    }

    /// Whether `(u, v) ∈ E`.
    pub fn is_connected(&self, u: usize, v: usize, ledger: &mut CostLedger) -> Result<bool> {
        self.check_left(u)?;
        self.check_right(v)?;
        let before = self.visits();
        let missing = self.complement.contains(self.nonneighbors[u], v as u32);
        self.charge(ledger, before);
        Ok(!missing)
    }

    /// `|{u ∈ I : degree(u) ≤ d}|`.
    pub fn count_left_with_degree_at_most(&self, d: usize, ledger: &mut CostLedger) -> usize {
        let before = self.visits();
        let n = self.count_at_most(d);
        self.charge(ledger, before);
        n
    }

    fn count_at_most(&self, d: usize) -> usize {
        if d >= self.right {
            return self.left;
        }
        self.by_degree.rank(self.degree_index, (d as u32 + 1, 0))
    }

    /// The left vertex of 0-based rank `r` among those with degree at most
    /// `d`, ordered by `(degree, id)`.
    pub fn nth_left_with_degree_at_most(
        &self,
        r: usize,
        d: usize,
        ledger: &mut CostLedger,
    ) -> Result<usize> {
        let before = self.visits();
        let available = self.count_at_most(d);
        let picked = if r < available {
            self.by_degree.select(self.degree_index, r)
        } else {
            None
        };
        self.charge(ledger, before);
        match picked {
            Some((_, u)) => Ok(u as usize),
            None => Err(Error::RankOutOfRange { rank: r, available }),
        }
    }

    /// The right vertex of 0-based rank `r` (by id) among those not adjacent
    /// to `u`.
    pub fn nth_nonneighbor(&self, r: usize, u: usize, ledger: &mut CostLedger) -> Result<usize> {
        self.check_left(u)?;
        let before = self.visits();
        let picked = self.complement.select(self.nonneighbors[u], r);
        self.charge(ledger, before);
        picked.map(|v| v as usize).ok_or(Error::RankOutOfRange {
            rank: r,
            available: self.right - self.degree[u],
        })
    }

    /// Deletes edge `(u, v)`. Removing an edge that is already gone is a
    /// logic error.
    pub fn remove_edge(&mut self, u: usize, v: usize, ledger: &mut CostLedger) -> Result<()> {
        self.check_left(u)?;
        self.check_right(v)?;
        let before = self.visits();
        if !self.complement.insert(&mut self.nonneighbors[u], v as u32) {
            self.charge(ledger, before);
            return Err(Error::logic(format!("edge ({u}, {v}) removed twice")));
        }
        let d = self.degree[u] as u32;
        let present = self.by_degree.remove(&mut self.degree_index, (d, u as u32));
        debug_assert!(present);
        self.by_degree
            .insert(&mut self.degree_index, (d - 1, u as u32));
        self.degree[u] -= 1;
        self.removed += 1;
        self.charge(ledger, before);
        Ok(())
    }

    /// Full consistency check of the internal invariants; O(|I| + removed).
    pub fn check_invariants(&self) -> Result<()> {
        let mut total = 0;
        for u in 0..self.left {
            let missing = self.complement.len(self.nonneighbors[u]);
            if self.degree[u] + missing != self.right {
                return Err(Error::logic(format!(
                    "vertex {u}: degree + non-neighbours != |J|"
                )));
            }
            total += self.degree[u];
        }
        if total != self.edge_count() {
            return Err(Error::logic("degree sum disagrees with edge count"));
        }
        let index = self.by_degree.keys(self.degree_index);
        let expected: Vec<(u32, u32)> = {
            let mut v: Vec<_> = (0..self.left)
                .map(|u| (self.degree[u] as u32, u as u32))
                .collect();
            v.sort_unstable();
            v
        };
        if index != expected {
            return Err(Error::logic("degree index out of sync"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(a: usize, b: usize) -> (CollisionStore, CostLedger) {
        let mut ledger = CostLedger::default();
        let s = CollisionStore::build_complete(a, b, &mut ledger).unwrap();
        (s, ledger)
    }

    #[test]
    fn complete_graph_degrees() {
        let (s, mut l) = complete(3, 4);
        for u in 0..3 {
            assert_eq!(s.degree(u, &mut l).unwrap(), 4);
            assert!(matches!(
                s.nth_nonneighbor(0, u, &mut l),
                Err(Error::RankOutOfRange { .. })
            ));
        }
        let (s, mut l) = complete(1, 1);
        assert_eq!(s.degree(0, &mut l).unwrap(), 1);
        assert!(s.degree(1, &mut l).is_err());
    }

    #[test]
    fn degrees_track_removals() {
        let (mut s, mut l) = complete(2, 3);
        assert_eq!(s.degree(0, &mut l).unwrap(), 3);
        s.remove_edge(0, 1, &mut l).unwrap();
        assert_eq!(s.degree(0, &mut l).unwrap(), 2);
        s.remove_edge(0, 0, &mut l).unwrap();
        s.remove_edge(0, 2, &mut l).unwrap();
        assert_eq!(s.degree(0, &mut l).unwrap(), 0);
        s.check_invariants().unwrap();
    }

    #[test]
    fn connection_is_local() {
        let (mut s, mut l) = complete(2, 2);
        assert!(s.is_connected(0, 0, &mut l).unwrap());
        s.remove_edge(0, 0, &mut l).unwrap();
        assert!(!s.is_connected(0, 0, &mut l).unwrap());
        assert!(s.is_connected(1, 0, &mut l).unwrap());
        assert!(s.is_connected(2, 0, &mut l).is_err());
    }

    #[test]
    fn left_vertices_by_degree_rank() {
        let (mut s, mut l) = complete(3, 3);
        assert_eq!(s.nth_left_with_degree_at_most(1, 3, &mut l).unwrap(), 1);
        assert!(matches!(
            s.nth_left_with_degree_at_most(0, 1, &mut l),
            Err(Error::RankOutOfRange {
                rank: 0,
                available: 0
            })
        ));
        s.remove_edge(2, 0, &mut l).unwrap();
        assert_eq!(s.nth_left_with_degree_at_most(0, 2, &mut l).unwrap(), 2);
        assert!(s.nth_left_with_degree_at_most(1, 2, &mut l).is_err());
        // Ordered by degree first.
        assert_eq!(s.nth_left_with_degree_at_most(0, 3, &mut l).unwrap(), 2);
        assert_eq!(s.nth_left_with_degree_at_most(1, 3, &mut l).unwrap(), 0);
    }

    #[test]
    fn counts_by_degree() {
        let (mut s, mut l) = complete(3, 3);
        assert_eq!(s.count_left_with_degree_at_most(3, &mut l), 3);
        assert_eq!(s.count_left_with_degree_at_most(2, &mut l), 0);
        s.remove_edge(1, 2, &mut l).unwrap();
        assert_eq!(s.count_left_with_degree_at_most(2, &mut l), 1);
        assert_eq!(s.count_left_with_degree_at_most(0, &mut l), 0);
        assert_eq!(s.count_left_with_degree_at_most(100, &mut l), 3);
    }

    #[test]
    fn nonneighbors_in_id_order() {
        let (mut s, mut l) = complete(2, 8);
        s.remove_edge(0, 4, &mut l).unwrap();
        assert_eq!(s.nth_nonneighbor(0, 0, &mut l).unwrap(), 4);
        s.remove_edge(0, 1, &mut l).unwrap();
        assert_eq!(s.nth_nonneighbor(0, 0, &mut l).unwrap(), 1);
        assert_eq!(s.nth_nonneighbor(1, 0, &mut l).unwrap(), 4);
        assert!(s.nth_nonneighbor(2, 0, &mut l).is_err());
        assert!(s.nth_nonneighbor(0, 1, &mut l).is_err());
    }

    #[test]
    fn double_removal_is_an_error() {
        let (mut s, mut l) = complete(2, 2);
        s.remove_edge(0, 0, &mut l).unwrap();
        assert_eq!(s.degree(0, &mut l).unwrap(), 1);
        assert!(matches!(s.remove_edge(0, 0, &mut l), Err(Error::Logic(_))));
        assert_eq!(s.removed_count(), 1);
        s.check_invariants().unwrap();
    }

    #[test]
    fn construction_cost_is_near_linear() {
        // Declared constant: build touches at most 2 nodes per left vertex
        // plus the vertex itself.
        const C: f64 = 3.0;
        for a in [2usize, 10, 100, 1000] {
            let (s, l) = complete(a, a);
            let bound = C * a as f64 * (a as f64).log2().max(1.0);
            assert!(l.ds_ops as f64 <= bound, "a={a}: {} > {bound}", l.ds_ops);
            assert_eq!(s.node_count(), a);
        }
    }
}
