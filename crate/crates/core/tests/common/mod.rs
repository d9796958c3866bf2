//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgdist::{TemporalEdge, TemporalGraph};

/// Random graph with integer weights in `1..=max_w`.
pub fn random_graph(n: usize, t_count: usize, edges: usize, max_w: u32, seed: u64) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list: Vec<TemporalEdge> = (0..edges)
        .filter_map(|_| {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            (i != j).then(|| {
                TemporalEdge::new(rng.random_range(0..t_count), i, j, rng.random_range(1..=max_w) as f64)
            })
        })
        .collect();
    TemporalGraph::from_edges(n, t_count, list).unwrap()
}

/// Dense `P = (1/T) sum_tau L_tau ... L_T`, built from scratch with dense
/// products, `L_t = (D_t + I)^-1 (W_t + I)`.
pub fn dense_p(g: &TemporalGraph) -> Array2<f64> {
    let n = g.n();
    let t_count = g.num_snapshots();
    let mut ls = Vec::new();
    for t in 0..t_count {
        let mut w = Array2::<f64>::eye(n);
        for e in g.edges().filter(|e| e.t == t) {
            w[[e.i, e.j]] += e.w;
            w[[e.j, e.i]] += e.w;
        }
        for i in 0..n {
            let s: f64 = w.row(i).sum();
            w.row_mut(i).mapv_inplace(|v| v / s);
        }
        ls.push(w);
    }
    let mut p = Array2::zeros((n, n));
    for tau in 0..t_count {
        let mut prod = Array2::<f64>::eye(n);
        for l in &ls[tau..] {
            prod = prod.dot(l);
        }
        p += &prod;
    }
    p / t_count as f64
}

/// `-sum_ij P_ij log softmax(X X^T)_ij + |sum_i x_i|^2 / n`, summed entry by
/// entry.
pub fn brute_loss(p: &Array2<f64>, x: &Array2<f64>) -> f64 {
    let n = x.nrows();
    let s = x.dot(&x.t());
    let mut loss = 0.0;
    for i in 0..n {
        let z: f64 = (0..n).map(|k| s[[i, k]].exp()).sum();
        for j in 0..n {
            loss -= p[[i, j]] * (s[[i, j]].exp() / z).ln();
        }
    }
    let mean = x.sum_axis(ndarray::Axis(0));
    loss + mean.dot(&mean) / n as f64
}

fn int_weight(w: f64) -> u64 {
    assert_eq!(w, w.round(), "non-integer weight {w}");
    w as u64
}

/// Number of unit interaction instances.
pub fn instance_count(g: &TemporalGraph) -> u64 {
    g.edges().map(|e| int_weight(e.w)).sum()
}

/// Histogram of maximal consecutive-activity run lengths over all pairs.
pub fn tau_histogram(g: &TemporalGraph) -> BTreeMap<usize, usize> {
    let mut times: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in g.edges() {
        times.entry((e.i.min(e.j), e.i.max(e.j))).or_default().push(e.t);
    }
    let mut hist = BTreeMap::new();
    for mut ts in times.into_values() {
        ts.sort_unstable();
        let mut run = 1;
        for k in 1..=ts.len() {
            if k < ts.len() && ts[k] == ts[k - 1] + 1 {
                run += 1;
            } else {
                *hist.entry(run).or_insert(0) += 1;
                run = 1;
            }
        }
    }
    hist
}

pub fn edges_per_snapshot(g: &TemporalGraph) -> Vec<usize> {
    let mut counts = vec![0; g.num_snapshots()];
    for e in g.edges() {
        counts[e.t] += 1;
    }
    counts
}

/// Nodes with at least one contact, per snapshot.
pub fn active_sets(g: &TemporalGraph) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); g.num_snapshots()];
    for e in g.edges() {
        sets[e.t].insert(e.i);
        sets[e.t].insert(e.j);
    }
    sets
}

/// Multiset of weights in each snapshot.
pub fn weights_per_snapshot(g: &TemporalGraph) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new(); g.num_snapshots()];
    for e in g.edges() {
        out[e.t].push(int_weight(e.w));
    }
    for v in &mut out {
        v.sort_unstable();
    }
    out
}

/// Time-summed integer weight per unordered pair.
pub fn aggregated(g: &TemporalGraph) -> BTreeMap<(usize, usize), u64> {
    let mut agg = BTreeMap::new();
    for e in g.edges() {
        *agg.entry((e.i.min(e.j), e.i.max(e.j))).or_insert(0) += int_weight(e.w);
    }
    agg
}

/// Sorted list of snapshots, each a sorted list of `(i, j, w)`.
pub fn snapshot_multiset(g: &TemporalGraph) -> Vec<Vec<(usize, usize, u64)>> {
    let mut snaps = vec![Vec::new(); g.num_snapshots()];
    for e in g.edges() {
        snaps[e.t].push((e.i.min(e.j), e.i.max(e.j), int_weight(e.w)));
    }
    for s in &mut snaps {
        s.sort_unstable();
    }
    snaps.sort();
    snaps
}

/// Integer strength of each node summed over time.
pub fn strengths(g: &TemporalGraph) -> Vec<u64> {
    let mut s = vec![0; g.n()];
    for e in g.edges() {
        s[e.i] += int_weight(e.w);
        s[e.j] += int_weight(e.w);
    }
    s
}

/// Three test graphs with integer weights: a bursty synthetic graph, a
/// school-like graph with daytime activity and idle nights, and a small dense
/// graph with heavy repeated contacts.
pub fn conservation_graphs() -> Vec<(&'static str, TemporalGraph)> {
    let bursty = tgdist::eval::experiments::bursty_test_graph(100, 200, 11).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (n, days, per_day, night) = (60, 3, 30, 10);
    let mut edges = Vec::new();
    for day in 0..days {
        let start = day * (per_day + night);
        for t in start..start + per_day {
            for _ in 0..rng.random_range(5..25) {
                let class = rng.random_range(0..4);
                let i = class * 15 + rng.random_range(0..15);
                let j = if rng.random_bool(0.8) {
                    class * 15 + rng.random_range(0..15)
                } else {
                    rng.random_range(0..n)
                };
                if i != j {
                    edges.push(TemporalEdge::new(t, i, j, rng.random_range(1..=3) as f64));
                }
            }
        }
    }
    let school = TemporalGraph::from_edges(n, days * (per_day + night), edges).unwrap();

    let dense = random_graph(20, 60, 150, 4, 13);
    vec![("bursty", bursty), ("school", school), ("dense", dense)]
}
