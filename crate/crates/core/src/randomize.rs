//! Null-model randomizations of temporal graphs.
//!
//! Every randomization keeps `n` and `T` and is a pure function of the input
//! graph, the kind and the seed. Weighted snapshots are read as integer
//! multiplicities: an edge of weight `w` in snapshot `t` is `w` unit
//! instances of `(t, i, j)`. Instances that land on the same pair and
//! snapshot are merged back into weights.
//!
//! | kind              | preserved                                           |
//! |-------------------|-----------------------------------------------------|
//! | `random`          | number of temporal edge instances                   |
//! | `random-delta`    | instance count, contact-duration distribution       |
//! | `active-snapshot` | edges per snapshot, per-snapshot active node sets   |
//! | `time`            | aggregated weighted graph                           |
//! | `sequence`        | the multiset of snapshots                           |
//! | `weighted-degree` | node strengths summed over time                     |

use std::collections::{BTreeMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Snapshot, TemporalEdge, TemporalGraph};
use crate::seed::derive_seed;

/// Placement attempts per contact event before overlapping placements are
/// allowed.
const DELTA_PLACEMENT_BUDGET: usize = 1000;
/// Repair attempts per self-paired stub before reshuffling.
const STUB_REPAIR_BUDGET: usize = 1000;
const STUB_RESHUFFLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomizationKind {
    Random,
    RandomDelta,
    ActiveSnapshot,
    Time,
    Sequence,
    WeightedDegree,
}

impl RandomizationKind {
    pub const ALL: [RandomizationKind; 6] = [
        Self::Random,
        Self::RandomDelta,
        Self::ActiveSnapshot,
        Self::Time,
        Self::Sequence,
        Self::WeightedDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::RandomDelta => "random-delta",
            Self::ActiveSnapshot => "active-snapshot",
            Self::Time => "time",
            Self::Sequence => "sequence",
            Self::WeightedDegree => "weighted-degree",
        }
    }
}

impl std::fmt::Display for RandomizationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RandomizationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm || k.name().replace('-', "") == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown randomization `{s}`")))
    }
}

/// A randomized graph and any notes about relaxed constraints.
#[derive(Debug, Clone)]
pub struct Randomized {
    pub graph: TemporalGraph,
    pub warnings: Vec<String>,
}

/// Randomizes `g` with the given kind. Warnings are logged.
pub fn randomize(g: &TemporalGraph, kind: RandomizationKind, seed: u64) -> Result<TemporalGraph> {
    let out = randomize_with_report(g, kind, seed)?;
    for w in &out.warnings {
        log::warn!("{kind}: {w}");
    }
    Ok(out.graph)
}

pub fn randomize_with_report(g: &TemporalGraph, kind: RandomizationKind, seed: u64) -> Result<Randomized> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let edges = match kind {
        RandomizationKind::Random => random_instances(g, &mut rng)?,
        RandomizationKind::RandomDelta => random_delta(g, &mut rng, &mut warnings)?,
        RandomizationKind::ActiveSnapshot => active_snapshot(g, &mut rng, &mut warnings)?,
        RandomizationKind::Time => time_shuffle(g, &mut rng)?,
        RandomizationKind::Sequence => {
            let mut order: Vec<usize> = (0..g.num_snapshots()).collect();
            order.shuffle(&mut rng);
            let snaps: Vec<Snapshot> = order.iter().map(|&t| g.snapshot(t).clone()).collect();
            let graph = rebuild_from(g, TemporalGraph::from_snapshots(g.n(), snaps)?);
            return Ok(Randomized { graph, warnings });
        }
        RandomizationKind::WeightedDegree => weighted_degree(g, &mut rng, seed)?,
    };
    let graph = rebuild_from(g, TemporalGraph::from_edges(g.n(), g.num_snapshots(), edges)?);
    Ok(Randomized { graph, warnings })
}

/// `reps` independent randomizations with per-replica seeds derived from
/// `seed`.
pub fn ensemble(g: &TemporalGraph, kind: RandomizationKind, seed: u64, reps: usize) -> Result<Vec<TemporalGraph>> {
    (0..reps)
        .into_par_iter()
        .map(|r| randomize(g, kind, derive_seed(seed, r as u64)))
        .collect()
}

fn rebuild_from(original: &TemporalGraph, g: TemporalGraph) -> TemporalGraph {
    let g = g.with_t_res(original.t_res());
    match original.node_names() {
        Some(names) => g.with_node_names(names.to_vec()).expect("same n"),
        None => g,
    }
}

fn multiplicity(w: f64) -> Result<usize> {
    let r = w.round();
    if (w - r).abs() > 1e-9 || r < 1.0 {
        return Err(Error::InvalidGraph(format!(
            "randomizations need integer weights, found {w}"
        )));
    }
    Ok(r as usize)
}

/// Unit instances `(t, i, j)` with `i < j`, each edge repeated by its weight.
fn instances(g: &TemporalGraph) -> Result<Vec<(usize, usize, usize)>> {
    let mut out = Vec::new();
    for e in g.edges() {
        let m = multiplicity(e.w)?;
        out.extend(std::iter::repeat_n((e.t, e.i, e.j), m));
    }
    Ok(out)
}

fn random_pair(n: usize, rng: &mut impl Rng) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

fn unit(t: usize, i: usize, j: usize) -> TemporalEdge {
    TemporalEdge::new(t, i, j, 1.0)
}

fn random_instances(g: &TemporalGraph, rng: &mut impl Rng) -> Result<Vec<TemporalEdge>> {
    let inst = instances(g)?;
    let (n, t_count) = (g.n(), g.num_snapshots());
    Ok(inst
        .iter()
        .map(|_| {
            let (i, j) = random_pair(n, rng);
            unit(rng.random_range(0..t_count), i, j)
        })
        .collect())
}

fn time_shuffle(g: &TemporalGraph, rng: &mut impl Rng) -> Result<Vec<TemporalEdge>> {
    let t_count = g.num_snapshots();
    Ok(instances(g)?
        .into_iter()
        .map(|(_, i, j)| unit(rng.random_range(0..t_count), i, j))
        .collect())
}

/// Maximal runs of consecutive active snapshots per pair, with the weight of
/// each snapshot in the run.
fn weighted_runs(g: &TemporalGraph) -> Vec<Vec<f64>> {
    let mut runs = Vec::new();
    for series in g.edge_activity().into_values() {
        let mut current: Vec<f64> = Vec::new();
        let mut last_t = None;
        for (t, w) in series {
            if last_t.is_some_and(|lt: usize| lt + 1 != t) {
                runs.push(std::mem::take(&mut current));
            }
            current.push(w);
            last_t = Some(t);
        }
        if !current.is_empty() {
            runs.push(current);
        }
    }
    runs
}

fn random_delta(g: &TemporalGraph, rng: &mut impl Rng, warnings: &mut Vec<String>) -> Result<Vec<TemporalEdge>> {
    let (n, t_count) = (g.n(), g.num_snapshots());
    let runs = weighted_runs(g);
    let mut occupied: HashSet<(usize, usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    let mut overlaps = 0usize;
    for profile in runs {
        let tau = profile.len();
        let mut placed = None;
        for _ in 0..DELTA_PLACEMENT_BUDGET {
            let (i, j) = random_pair(n, rng);
            let (i, j) = (i.min(j), i.max(j));
            let start = rng.random_range(0..=t_count - tau);
            // keep one empty snapshot on both sides so runs stay distinct
            let lo = start.saturating_sub(1);
            let hi = (start + tau).min(t_count - 1);
            if (lo..=hi).all(|t| !occupied.contains(&(i, j, t))) {
                placed = Some((i, j, start));
                break;
            }
        }
        let (i, j, start) = placed.unwrap_or_else(|| {
            overlaps += 1;
            let (i, j) = random_pair(n, rng);
            (i.min(j), i.max(j), rng.random_range(0..=t_count - tau))
        });
        for (k, &w) in profile.iter().enumerate() {
            occupied.insert((i, j, start + k));
            edges.push(TemporalEdge::new(start + k, i, j, w));
        }
    }
    if overlaps > 0 {
        warnings.push(format!(
            "{overlaps} contacts placed on top of existing ones; duration histogram not exact"
        ));
    }
    Ok(edges)
}

/// `k`-th pair `(a, b)`, `a < b`, in row-major order over `s` items.
fn decode_pair(mut k: usize, s: usize) -> (usize, usize) {
    for a in 0..s {
        let row = s - a - 1;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range")
}

fn active_snapshot(g: &TemporalGraph, rng: &mut impl Rng, warnings: &mut Vec<String>) -> Result<Vec<TemporalEdge>> {
    let mut edges = Vec::new();
    for (t, snap) in g.snapshots().iter().enumerate() {
        let m = snap.edge_count();
        if m == 0 {
            continue;
        }
        let active: Vec<usize> = (0..g.n()).filter(|&i| snap.degree(i) > 0).collect();
        let s = active.len();
        let total_pairs = s * (s - 1) / 2;
        let mut weights: Vec<f64> = snap.edges().map(|(_, _, w)| w).collect();
        if s < 2 || m > total_pairs {
            warnings.push(format!("snapshot {t} cannot be rewired; kept unchanged"));
            edges.extend(snap.edges().map(|(i, j, w)| TemporalEdge::new(t, i, j, w)));
            continue;
        }

        let covers = |pairs: &[(usize, usize)]| {
            let mut hit = vec![false; s];
            for &(a, b) in pairs {
                hit[a] = true;
                hit[b] = true;
            }
            hit.into_iter().all(|h| h)
        };
        let mut chosen = None;
        for _ in 0..10 * m {
            let pairs: Vec<(usize, usize)> = index::sample(rng, total_pairs, m)
                .into_iter()
                .map(|k| decode_pair(k, s))
                .collect();
            if covers(&pairs) {
                chosen = Some(pairs);
                break;
            }
        }
        let pairs = match chosen {
            Some(p) => p,
            None => {
                warnings.push(format!(
                    "snapshot {t}: uniform draws never covered all {s} active nodes; used a random cover"
                ));
                covering_pairs(s, m, rng)
            }
        };
        weights.shuffle(rng);
        for (&(a, b), &w) in pairs.iter().zip(&weights) {
            edges.push(TemporalEdge::new(t, active[a], active[b], w));
        }
    }
    Ok(edges)
}

/// `m` distinct pairs over `s` items touching every item; needs
/// `ceil(s / 2) <= m <= s (s - 1) / 2`.
fn covering_pairs(s: usize, m: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..s).collect();
    order.shuffle(rng);
    let mut chosen: HashSet<(usize, usize)> = HashSet::new();
    for pair in order.chunks(2) {
        let (a, b) = match *pair {
            [a, b] => (a, b),
            [a] => {
                let mut b = rng.random_range(0..s - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            }
            _ => unreachable!(),
        };
        chosen.insert((a.min(b), a.max(b)));
    }
    let rest: Vec<(usize, usize)> = (0..s)
        .flat_map(|a| ((a + 1)..s).map(move |b| (a, b)))
        .filter(|p| !chosen.contains(p))
        .collect();
    let extra = m - chosen.len();
    let mut pairs: Vec<(usize, usize)> = chosen.into_iter().collect();
    pairs.sort_unstable();
    pairs.extend(index::sample(rng, rest.len(), extra).into_iter().map(|k| rest[k]));
    pairs
}

fn weighted_degree(g: &TemporalGraph, rng: &mut impl Rng, seed: u64) -> Result<Vec<TemporalEdge>> {
    let inst = instances(g)?;
    if inst.is_empty() {
        return Ok(Vec::new());
    }
    let mut stubs: Vec<usize> = inst.iter().flat_map(|&(_, i, j)| [i, j]).collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in &stubs {
        *counts.entry(s).or_default() += 1;
    }
    let max = counts.values().copied().max().unwrap_or(0);
    if 2 * max > stubs.len() {
        return Err(Error::Randomization {
            seed,
            msg: "a node holds more than half of all stubs; no self-loop-free pairing exists".into(),
        });
    }

    'reshuffle: for _ in 0..STUB_RESHUFFLES {
        stubs.shuffle(rng);
        let pairs = stubs.len() / 2;
        for p in 0..pairs {
            let mut tries = 0;
            while stubs[2 * p] == stubs[2 * p + 1] {
                if tries == STUB_REPAIR_BUDGET {
                    continue 'reshuffle;
                }
                tries += 1;
                let u = stubs[2 * p];
                let q = rng.random_range(0..pairs);
                let (a, b) = (stubs[2 * q], stubs[2 * q + 1]);
                if q != p && a != u && b != u {
                    // (u, u) + (a, b) -> (u, a) + (u, b)
                    stubs[2 * p + 1] = a;
                    stubs[2 * q] = u;
                }
            }
        }
        let t_count = g.num_snapshots();
        return Ok(stubs
            .chunks(2)
            .map(|c| unit(rng.random_range(0..t_count), c[0], c[1]))
            .collect());
    }
    Err(Error::Randomization {
        seed,
        msg: format!("stub pairing still had self-loops after {STUB_RESHUFFLES} reshuffles"),
    })
}
