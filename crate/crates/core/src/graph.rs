//! Temporal graph data model.
//!
//! A [`TemporalGraph`] is a fixed node set `0..n` observed over `T` discrete
//! snapshots. Each snapshot is a symmetric weighted adjacency matrix with a
//! zero diagonal and strictly positive stored weights, held in compressed
//! sparse row form with both triangles stored.
//!
//! Snapshot indices are zero-based throughout the crate.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One weighted interaction `(i, j)` in snapshot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl TemporalEdge {
    pub fn new(t: usize, i: usize, j: usize, w: f64) -> Self {
        Self { t, i, j, w }
    }
}

/// An interaction between `i` and `j` starting at snapshot `t` and lasting
/// `tau >= 1` consecutive snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContactEvent {
    pub i: usize,
    pub j: usize,
    pub t: usize,
    pub tau: usize,
}

/// Symmetric sparse adjacency matrix of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl Snapshot {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a snapshot from undirected triplets. Repeated pairs (in either
    /// orientation) have their weights summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * triplets.len());
        for &(i, j, w) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-edge on node {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has non-positive or non-finite weight {w}"
                )));
            }
            entries.push((i, j, w));
            entries.push((j, i, w));
        }
        // stable sort keeps input order among duplicates, so sums are reproducible
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut weights: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, w) in entries {
            if last == Some((i, j)) {
                *weights.last_mut().unwrap() += w;
            } else {
                indices.push(j);
                weights.push(w);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            n,
            indptr,
            indices,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.indices.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Neighbors of `i` with weights, sorted by neighbor id.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    /// Weighted degree (strength) of `i`.
    pub fn strength(&self, i: usize) -> f64 {
        self.weights[self.indptr[i]..self.indptr[i + 1]].iter().sum()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.weights[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.row(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Sum of stored weights over both triangles divided by two.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Dense copy, for tests and small debugging dumps.
    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut a = ndarray::Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                a[[i, j]] = w;
            }
        }
        a
    }

    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.indptr, &self.indices, &self.weights)
    }
}

/// A discrete-time weighted temporal graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    n: usize,
    t_res: u64,
    snapshots: Vec<Snapshot>,
    node_names: Option<Vec<String>>,
}

impl TemporalGraph {
    /// Builds a graph with `n` nodes and `t_count` snapshots from weighted
    /// temporal edges. Duplicate `(t, i, j)` entries accumulate.
    pub fn from_edges<I>(n: usize, t_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = TemporalEdge>,
    {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        if t_count == 0 {
            return Err(Error::InvalidGraph(
                "graph must have at least one snapshot".into(),
            ));
        }
        let mut per_t: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); t_count];
        for e in edges {
            if e.t >= t_count {
                return Err(Error::InvalidGraph(format!(
                    "snapshot index {} out of range for T = {t_count}",
                    e.t
                )));
            }
            per_t[e.t].push((e.i, e.j, e.w));
        }
        let snapshots = per_t
            .iter()
            .map(|tr| Snapshot::from_triplets(n, tr))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            t_res: 1,
            snapshots,
            node_names: None,
        })
    }

    pub fn from_snapshots(n: usize, snapshots: Vec<Snapshot>) -> Result<Self> {
        if n == 0 || snapshots.is_empty() {
            return Err(Error::InvalidGraph(
                "graph needs at least one node and one snapshot".into(),
            ));
        }
        if let Some(s) = snapshots.iter().find(|s| s.n() != n) {
            return Err(Error::InvalidGraph(format!(
                "snapshot has dimension {} but n = {n}",
                s.n()
            )));
        }
        Ok(Self {
            n,
            t_res: 1,
            snapshots,
            node_names: None,
        })
    }

    /// Graph with `n` nodes and `t_count` empty snapshots.
    pub fn empty(n: usize, t_count: usize) -> Result<Self> {
        Self::from_edges(n, t_count, std::iter::empty())
    }

    pub fn with_t_res(mut self, t_res: u64) -> Self {
        self.t_res = t_res;
        self
    }

    pub fn with_node_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} node names for {} nodes",
                names.len(),
                self.n
            )));
        }
        self.node_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of snapshots `T`.
    pub fn num_snapshots(&self) -> usize {
        self.snapshots.len()
    }

    /// Temporal resolution in seconds per snapshot.
    pub fn t_res(&self) -> u64 {
        self.t_res
    }

    pub fn node_names(&self) -> Option<&[String]> {
        self.node_names.as_deref()
    }

    pub fn snapshot(&self, t: usize) -> &Snapshot {
        &self.snapshots[t]
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Total number of temporal edges `E`, counting each active undirected
    /// pair once per snapshot.
    pub fn temporal_edge_count(&self) -> usize {
        self.snapshots.iter().map(Snapshot::edge_count).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.snapshots.iter().map(Snapshot::total_weight).sum()
    }

    /// All temporal edges with `i < j`, ordered by snapshot then row.
    pub fn edges(&self) -> impl Iterator<Item = TemporalEdge> + '_ {
        self.snapshots.iter().enumerate().flat_map(|(t, s)| {
            s.edges().map(move |(i, j, w)| TemporalEdge { t, i, j, w })
        })
    }

    /// Sum of all snapshots.
    pub fn aggregated(&self) -> Snapshot {
        let triplets: Vec<_> = self.edges().map(|e| (e.i, e.j, e.w)).collect();
        Snapshot::from_triplets(self.n, &triplets).expect("edges of a valid graph")
    }

    /// Sums consecutive groups of `factor` snapshots. The last group may be
    /// shorter when `factor` does not divide `T`.
    pub fn aggregate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument(
                "aggregation factor must be at least 1".into(),
            ));
        }
        let t_new = self.num_snapshots().div_ceil(factor);
        let edges: Vec<_> = self
            .edges()
            .map(|e| TemporalEdge { t: e.t / factor, ..e })
            .collect();
        let mut g = Self::from_edges(self.n, t_new, edges)?;
        g.t_res = self.t_res * factor as u64;
        g.node_names = self.node_names.clone();
        Ok(g)
    }

    /// Restricts the graph to `nodes` (reindexed in the given order) and to
    /// the snapshot range `times`. Requested nodes without edges are kept.
    pub fn subgraph(&self, nodes: &[usize], times: Range<usize>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("empty node subset".into()));
        }
        if times.start >= times.end || times.end > self.num_snapshots() {
            return Err(Error::InvalidArgument(format!(
                "snapshot range {times:?} invalid for T = {}",
                self.num_snapshots()
            )));
        }
        let mut remap = vec![usize::MAX; self.n];
        for (new, &old) in nodes.iter().enumerate() {
            if old >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "node {old} out of range for n = {}",
                    self.n
                )));
            }
            if remap[old] != usize::MAX {
                return Err(Error::InvalidArgument(format!("node {old} listed twice")));
            }
            remap[old] = new;
        }
        let edges: Vec<_> = self
            .edges()
            .filter(|e| times.contains(&e.t) && remap[e.i] != usize::MAX && remap[e.j] != usize::MAX)
            .map(|e| TemporalEdge {
                t: e.t - times.start,
                i: remap[e.i],
                j: remap[e.j],
                w: e.w,
            })
            .collect();
        let mut g = Self::from_edges(nodes.len(), times.len(), edges)?;
        g.t_res = self.t_res;
        if let Some(names) = &self.node_names {
            g.node_names = Some(nodes.iter().map(|&k| names[k].clone()).collect());
        }
        Ok(g)
    }

    /// Removes snapshots without any edge. Returns the graph unchanged when
    /// all snapshots are empty.
    pub fn drop_empty_snapshots(&self) -> Self {
        let kept: Vec<Snapshot> = self
            .snapshots
            .iter()
            .filter(|s| !s.is_empty())
            .cloned()
            .collect();
        if kept.is_empty() {
            return self.clone();
        }
        Self {
            snapshots: kept,
            ..self.clone()
        }
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for n = {}",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let edges: Vec<_> = self
            .edges()
            .map(|e| TemporalEdge {
                i: perm[e.i],
                j: perm[e.j],
                ..e
            })
            .collect();
        let mut g = Self::from_edges(self.n, self.num_snapshots(), edges)?;
        g.t_res = self.t_res;
        if let Some(names) = &self.node_names {
            let mut renamed = vec![String::new(); self.n];
            for (i, &p) in perm.iter().enumerate() {
                renamed[p] = names[i].clone();
            }
            g.node_names = Some(renamed);
        }
        Ok(g)
    }

    /// Active snapshots of every pair with at least one interaction, keyed
    /// by `(i, j)` with `i < j`. Weights are carried along.
    pub fn edge_activity(&self) -> BTreeMap<(usize, usize), Vec<(usize, f64)>> {
        let mut map: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for e in self.edges() {
            map.entry((e.i, e.j)).or_default().push((e.t, e.w));
        }
        map
    }

    /// Splits the activity of every pair into maximal runs of consecutive
    /// active snapshots. Weights are discarded.
    pub fn to_contacts(&self) -> Vec<ContactEvent> {
        let mut events = Vec::new();
        for ((i, j), series) in self.edge_activity() {
            let mut run: Option<(usize, usize)> = None;
            for (t, _) in series {
                run = match run {
                    Some((start, len)) if start + len == t => Some((start, len + 1)),
                    Some((start, len)) => {
                        events.push(ContactEvent { i, j, t: start, tau: len });
                        Some((t, 1))
                    }
                    None => Some((t, 1)),
                };
            }
            if let Some((start, len)) = run {
                events.push(ContactEvent { i, j, t: start, tau: len });
            }
        }
        events.sort_by_key(|e| (e.t, e.i, e.j));
        events
    }

    /// Rebuilds a unit-weight graph from contact events. Overlapping events
    /// on the same pair are merged rather than accumulated.
    pub fn from_contacts(n: usize, t_count: usize, events: &[ContactEvent]) -> Result<Self> {
        let mut cells = std::collections::BTreeSet::new();
        for ev in events {
            if ev.tau == 0 {
                return Err(Error::InvalidGraph("contact with zero duration".into()));
            }
            if ev.t + ev.tau > t_count {
                return Err(Error::InvalidGraph(format!(
                    "contact ({}, {}, t={}, tau={}) exceeds T = {t_count}",
                    ev.i, ev.j, ev.t, ev.tau
                )));
            }
            let (a, b) = (ev.i.min(ev.j), ev.i.max(ev.j));
            for t in ev.t..ev.t + ev.tau {
                cells.insert((t, a, b));
            }
        }
        Self::from_edges(
            n,
            t_count,
            cells.into_iter().map(|(t, i, j)| TemporalEdge::new(t, i, j, 1.0)),
        )
    }

    /// Same structure with every stored weight set to one.
    pub fn unit_weights(&self) -> Self {
        let edges: Vec<_> = self.edges().map(|e| TemporalEdge { w: 1.0, ..e }).collect();
        let mut g = Self::from_edges(self.n, self.num_snapshots(), edges).expect("valid graph");
        g.t_res = self.t_res;
        g.node_names = self.node_names.clone();
        g
    }

    /// Per-node weighted degree summed over all snapshots.
    pub fn node_strengths(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for e in self.edges() {
            s[e.i] += e.w;
            s[e.j] += e.w;
        }
        s
    }

    /// For each snapshot, the sorted list of nodes with at least one edge.
    pub fn active_nodes(&self) -> Vec<Vec<usize>> {
        self.snapshots
            .iter()
            .map(|s| (0..self.n).filter(|&i| s.degree(i) > 0).collect())
            .collect()
    }

    /// Checks the structural invariants: symmetric snapshots with zero
    /// diagonal and strictly positive stored weights.
    pub fn validate(&self) -> Result<()> {
        for (t, s) in self.snapshots.iter().enumerate() {
            if s.n() != self.n {
                return Err(Error::InvalidGraph(format!("snapshot {t} has wrong size")));
            }
            for i in 0..self.n {
                for (j, w) in s.row(i) {
                    if i == j {
                        return Err(Error::InvalidGraph(format!("self-loop in snapshot {t}")));
                    }
                    if !(w > 0.0) {
                        return Err(Error::InvalidGraph(format!("weight {w} in snapshot {t}")));
                    }
                    if s.weight(j, i) != w {
                        return Err(Error::InvalidGraph(format!(
                            "snapshot {t} asymmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(t: usize, i: usize, j: usize, w: f64) -> TemporalEdge {
        TemporalEdge::new(t, i, j, w)
    }

    #[test]
    fn duplicates_accumulate_symmetrically() {
        let g = TemporalGraph::from_edges(3, 1, [e(0, 0, 1, 1.0), e(0, 1, 0, 2.0)]).unwrap();
        assert_eq!(g.snapshot(0).weight(0, 1), 3.0);
        assert_eq!(g.snapshot(0).weight(1, 0), 3.0);
        assert_eq!(g.snapshot(0).edge_count(), 1);
        g.validate().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(TemporalGraph::from_edges(3, 1, [e(0, 1, 1, 1.0)]).is_err());
        assert!(TemporalGraph::from_edges(3, 1, [e(0, 0, 3, 1.0)]).is_err());
        assert!(TemporalGraph::from_edges(3, 1, [e(0, 0, 1, -1.0)]).is_err());
        assert!(TemporalGraph::from_edges(3, 1, [e(1, 0, 1, 1.0)]).is_err());
        assert!(TemporalGraph::from_edges(0, 1, []).is_err());
        assert!(TemporalGraph::from_edges(2, 0, []).is_err());
    }

    #[test]
    fn aggregate_identity_and_ragged_tail() {
        let g = TemporalGraph::from_edges(
            3,
            5,
            [
                e(0, 0, 1, 1.0),
                e(1, 0, 1, 2.0),
                e(2, 1, 2, 1.0),
                e(3, 0, 2, 4.0),
                e(4, 1, 2, 5.0),
            ],
        )
        .unwrap();
        assert_eq!(g.aggregate(1).unwrap(), g);

        let a = g.aggregate(2).unwrap();
        assert_eq!(a.num_snapshots(), 3);
        assert_eq!(a.snapshot(0).weight(0, 1), 3.0);
        assert_eq!(a.snapshot(1).weight(1, 2), 1.0);
        assert_eq!(a.snapshot(1).weight(0, 2), 4.0);
        // last group holds the fifth snapshot alone
        assert_eq!(a.snapshot(2), g.snapshot(4));
        assert_eq!(a.total_weight(), g.total_weight());
        assert_eq!(a.t_res(), 2);
        assert!(g.aggregate(0).is_err());
    }

    #[test]
    fn aggregate_even_split() {
        let g = TemporalGraph::from_edges(
            2,
            4,
            [e(0, 0, 1, 1.0), e(1, 0, 1, 1.5), e(3, 0, 1, 2.0)],
        )
        .unwrap();
        let a = g.aggregate(2).unwrap();
        assert_eq!(a.num_snapshots(), 2);
        assert_eq!(a.snapshot(0).weight(0, 1), 2.5);
        assert_eq!(a.snapshot(1).weight(0, 1), 2.0);
    }

    #[test]
    fn contacts_runs() {
        let g = TemporalGraph::from_edges(
            3,
            6,
            [
                e(0, 0, 1, 1.0),
                e(1, 0, 1, 2.0),
                e(2, 0, 1, 1.0),
                e(0, 1, 2, 1.0),
                e(2, 1, 2, 1.0),
            ],
        )
        .unwrap();
        let ev = g.to_contacts();
        assert!(ev.contains(&ContactEvent { i: 0, j: 1, t: 0, tau: 3 }));
        assert!(ev.contains(&ContactEvent { i: 1, j: 2, t: 0, tau: 1 }));
        assert!(ev.contains(&ContactEvent { i: 1, j: 2, t: 2, tau: 1 }));
        assert_eq!(ev.len(), 3);
        let back = TemporalGraph::from_contacts(3, 6, &ev).unwrap();
        assert_eq!(back, g.unit_weights());
    }

    #[test]
    fn from_contacts_rejects_overflow() {
        let ev = [ContactEvent { i: 0, j: 1, t: 2, tau: 2 }];
        assert!(TemporalGraph::from_contacts(2, 3, &ev).is_err());
    }

    #[test]
    fn subgraph_cases() {
        let g = TemporalGraph::from_edges(
            3,
            2,
            [e(0, 0, 1, 1.0), e(0, 1, 2, 2.0), e(1, 0, 2, 3.0)],
        )
        .unwrap();
        assert_eq!(g.subgraph(&[0, 1, 2], 0..2).unwrap(), g);

        // keep nodes 2 and 0 (in that order): only the (0,2) edge at t=1 survives
        let s = g.subgraph(&[2, 0], 0..2).unwrap();
        assert_eq!(s.n(), 2);
        assert!(s.snapshot(0).is_empty());
        assert_eq!(s.snapshot(1).weight(0, 1), 3.0);

        let lone = TemporalGraph::from_edges(4, 1, [e(0, 0, 1, 1.0)]).unwrap();
        let s = lone.subgraph(&[2, 3], 0..1).unwrap();
        assert_eq!(s.n(), 2);
        assert!(s.snapshot(0).is_empty());

        assert!(g.subgraph(&[], 0..2).is_err());
        assert!(g.subgraph(&[0], 1..1).is_err());
        assert!(g.subgraph(&[0], 0..3).is_err());
    }

    #[test]
    fn drop_empty() {
        let g = TemporalGraph::from_edges(2, 4, [e(1, 0, 1, 1.0), e(3, 0, 1, 1.0)]).unwrap();
        let d = g.drop_empty_snapshots();
        assert_eq!(d.num_snapshots(), 2);
        let empty = TemporalGraph::empty(2, 3).unwrap();
        assert_eq!(empty.drop_empty_snapshots().num_snapshots(), 3);
    }

    #[test]
    fn permutation_moves_edges() {
        let g = TemporalGraph::from_edges(3, 1, [e(0, 0, 1, 2.0)]).unwrap();
        let p = g.permute_nodes(&[2, 0, 1]).unwrap();
        assert_eq!(p.snapshot(0).weight(2, 0), 2.0);
        assert!(g.permute_nodes(&[0, 0, 1]).is_err());
    }
}
