//! Experiment drivers: model-class clustering, partial relabeling and
//! randomization discrimination.
//!
//! Every driver is a deterministic function of its configuration. All
//! randomness is derived from `seed` with [`derive_seed`], and parallel work
//! is collected in a fixed order, so two runs with the same configuration
//! produce identical reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cluster_distances, nmi, Labeling};
use crate::distances::{matched_distance, pairwise_distances, DistanceKind, DistanceMatrix};
use crate::edrep::{embed, EDRepConfig, Embedding};
use crate::error::{Error, Result};
use crate::graph::TemporalGraph;
use crate::randomize::{ensemble, RandomizationKind};
use crate::seed::derive_seed;
use crate::synth::{preset, synthetic_activity, temporalize, BurstinessProfile, Model, DEFAULT_MEAN_DEGREE};

/// Where synthetic graphs get their edge activity from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActivitySource {
    /// A power-law on/off bank from [`synthetic_activity`].
    Synthetic {
        t_count: usize,
        #[serde(default)]
        profile: BurstinessProfile,
    },
    /// A contact list `t i j` on disk.
    File { path: PathBuf, t_res: u64 },
}

impl Default for ActivitySource {
    fn default() -> Self {
        Self::Synthetic {
            t_count: 100,
            profile: BurstinessProfile::default(),
        }
    }
}

impl ActivitySource {
    pub fn load(&self, seed: u64) -> Result<TemporalGraph> {
        match self {
            Self::Synthetic { t_count, profile } => synthetic_activity(*t_count, profile, seed),
            Self::File { path, t_res } => crate::io::load_contact_list(path, *t_res),
        }
    }
}

/// One measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub group: String,
    /// Swept parameter (dimension, relabeled fraction, ...).
    pub x: f64,
    pub value: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub x: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub count: usize,
}

/// A square table with row and column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub name: String,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrices: Vec<LabeledMatrix>,
}

impl ExperimentReport {
    fn new(experiment: &str, seed: u64, parameters: &impl Serialize, runs: Vec<RunRecord>) -> Result<Self> {
        let summary = summarize(&runs);
        Ok(Self {
            experiment: experiment.to_string(),
            seed,
            parameters: serde_json::to_value(parameters)?,
            runs,
            summary,
            matrices: Vec::new(),
        })
    }

    /// Mean of the runs in `group` at `x`.
    pub fn mean(&self, group: &str, x: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.group == group && r.x == x)
            .map(|r| r.mean)
    }

    pub fn matrix(&self, name: &str) -> Option<&LabeledMatrix> {
        self.matrices.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `group,x,mean,std,count` rows.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.summary {
            out.serialize(row).map_err(crate::io::csv_err)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_matrix_csv<W: Write>(matrix: &LabeledMatrix, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header: Vec<&str> = std::iter::once("").chain(matrix.labels.iter().map(String::as_str)).collect();
        out.write_record(&header).map_err(crate::io::csv_err)?;
        for (label, row) in matrix.labels.iter().zip(&matrix.values) {
            let record: Vec<String> = std::iter::once(label.clone())
                .chain(row.iter().map(|v| v.to_string()))
                .collect();
            out.write_record(&record).map_err(crate::io::csv_err)?;
        }
        out.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Writes `<stem>.json`, `<stem>.summary.csv` and one
    /// `<stem>.<matrix>.csv` per matrix next to `path`. Returns the written
    /// paths.
    pub fn write_bundle(&self, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let path = path.as_ref();
        let with_ext = |ext: &str| path.with_extension(ext);
        let json = with_ext("json");
        std::fs::write(&json, self.to_json()? + "\n").map_err(|e| Error::io(&json, e))?;
        let mut written = vec![json];

        let summary = with_ext("summary.csv");
        let f = std::fs::File::create(&summary).map_err(|e| Error::io(&summary, e))?;
        self.write_summary_csv(f)?;
        written.push(summary);

        for m in &self.matrices {
            let p = with_ext(&format!("{}.csv", m.name));
            let f = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
            Self::write_matrix_csv(m, f)?;
            written.push(p);
        }
        Ok(written)
    }
}

fn summarize(runs: &[RunRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in runs {
        if rows.iter().any(|s| s.group == r.group && s.x == r.x) {
            continue;
        }
        let values: Vec<f64> = runs
            .iter()
            .filter(|o| o.group == r.group && o.x == r.x)
            .map(|o| o.value)
            .collect();
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(SummaryRow {
            group: r.group.clone(),
            x: r.x,
            mean,
            std,
            count,
        });
    }
    rows
}

/// Settings for [`experiment_model_classes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelClassesConfig {
    pub instances_per_model: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub mean_degree: f64,
    pub dims: Vec<usize>,
    pub activity: ActivitySource,
    /// Base optimizer settings; `d` is overridden by the sweep.
    pub embedding: EDRepConfig,
    pub seed: u64,
}

impl Default for ModelClassesConfig {
    fn default() -> Self {
        Self {
            instances_per_model: 20,
            n_min: 100,
            n_max: 400,
            mean_degree: DEFAULT_MEAN_DEGREE,
            dims: vec![2, 4, 8, 16, 32],
            activity: ActivitySource::default(),
            embedding: EDRepConfig::default(),
            seed: 0,
        }
    }
}

impl ModelClassesConfig {
    /// 250 instances per model with `n` between 200 and 1800.
    pub fn paper_scale(self) -> Self {
        Self {
            instances_per_model: 250,
            n_min: 200,
            n_max: 1800,
            ..self
        }
    }
}

/// Generates instances of the four presets, embeds them for every `d` in the
/// sweep, clusters the unmatched distance matrix into four groups and scores
/// the result against the generating model. Reports one NMI per `d` in group
/// `"nmi"`.
pub fn experiment_model_classes(cfg: &ModelClassesConfig) -> Result<ExperimentReport> {
    if cfg.instances_per_model == 0 || cfg.n_min > cfg.n_max || cfg.dims.is_empty() {
        return Err(Error::InvalidArgument(
            "need instances, a non-empty n range and at least one dimension".into(),
        ));
    }
    let source = cfg.activity.load(derive_seed(cfg.seed, 0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
    let mut specs = Vec::new();
    for (label, model) in Model::ALL.into_iter().enumerate() {
        for _ in 0..cfg.instances_per_model {
            let n = rng.random_range(cfg.n_min..=cfg.n_max);
            specs.push((label, model, n, rng.random::<u64>()));
        }
    }
    let graphs: Vec<TemporalGraph> = specs
        .par_iter()
        .map(|&(_, model, n, s)| {
            let sg = preset(model, n, cfg.mean_degree, derive_seed(s, 0))?;
            temporalize(&sg, &source, derive_seed(s, 1))
        })
        .collect::<Result<_>>()?;
    let truth = Labeling::new(specs.iter().map(|s| s.0).collect());
    let ids: Vec<String> = specs
        .iter()
        .enumerate()
        .map(|(k, (_, m, n, _))| format!("{m}-{k}-n{n}"))
        .collect();

    let mut runs = Vec::new();
    for (di, &d) in cfg.dims.iter().enumerate() {
        let ecfg = EDRepConfig {
            d,
            seed: derive_seed(cfg.seed, 2),
            ..cfg.embedding.clone()
        };
        let embeddings: Vec<Embedding> = graphs.par_iter().map(|g| embed(g, &ecfg)).collect::<Result<_>>()?;
        let dm = pairwise_distances(&embeddings, Some(ids.clone()), DistanceKind::Unmatched)?;
        let cluster_seed = derive_seed(cfg.seed, 100 + di as u64);
        let labels = cluster_distances(&dm, Model::ALL.len(), cluster_seed)?;
        runs.push(RunRecord {
            group: "nmi".into(),
            x: d as f64,
            value: nmi(&labels, &truth)?,
            seed: cluster_seed,
        });
        log::info!("model classes: d = {d}, NMI = {:.3}", runs.last().unwrap().value);
    }
    ExperimentReport::new("classes", cfg.seed, cfg, runs)
}

/// Settings for [`experiment_relabel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelabelConfig {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub repetitions: usize,
    pub models: Vec<Model>,
    pub mean_degree: f64,
    pub activity: ActivitySource,
    pub embedding: EDRepConfig,
    pub seed: u64,
}

impl Default for RelabelConfig {
    fn default() -> Self {
        Self {
            n: 300,
            alphas: vec![0.0, 0.1, 0.3, 0.6, 1.0],
            repetitions: 10,
            models: Model::ALL.to_vec(),
            mean_degree: DEFAULT_MEAN_DEGREE,
            activity: ActivitySource::default(),
            embedding: EDRepConfig::default(),
            seed: 0,
        }
    }
}

impl RelabelConfig {
    /// `n = 1000` and 25 repetitions.
    pub fn paper_scale(self) -> Self {
        Self {
            n: 1000,
            repetitions: 25,
            ..self
        }
    }
}

/// A permutation of `0..n` that moves a random `round(alpha n)` nodes along
/// a single random cycle and fixes the rest.
pub fn partial_relabeling(n: usize, alpha: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (alpha * n as f64).round() as usize;
    let mut chosen = index::sample(&mut rng, n, k).into_vec();
    chosen.shuffle(&mut rng);
    let mut perm: Vec<usize> = (0..n).collect();
    if k >= 2 {
        for (a, &node) in chosen.iter().enumerate() {
            perm[node] = chosen[(a + 1) % k];
        }
    }
    Ok(perm)
}

/// For each model: embeds one graph, relabels a fraction `alpha` of its
/// nodes, embeds the relabeled graph with the same settings and records
/// `d_m / n` against the original embedding. Group names are the model
/// names, `x` is `alpha`.
pub fn experiment_relabel(cfg: &RelabelConfig) -> Result<ExperimentReport> {
    if cfg.repetitions == 0 || cfg.models.is_empty() {
        return Err(Error::InvalidArgument("need repetitions and models".into()));
    }
    let source = cfg.activity.load(derive_seed(cfg.seed, 0))?;
    let ecfg = EDRepConfig {
        seed: derive_seed(cfg.seed, 2),
        ..cfg.embedding.clone()
    };
    let n = cfg.n;
    let mut runs = Vec::new();
    for (mi, &model) in cfg.models.iter().enumerate() {
        let model_seed = derive_seed(cfg.seed, 10 + mi as u64);
        let sg = preset(model, n, cfg.mean_degree, derive_seed(model_seed, 0))?;
        let g = temporalize(&sg, &source, derive_seed(model_seed, 1))?;
        let x0 = embed(&g, &ecfg)?;

        let jobs: Vec<(f64, u64)> = cfg
            .alphas
            .iter()
            .enumerate()
            .flat_map(|(ai, &alpha)| {
                (0..cfg.repetitions).map(move |r| {
                    (alpha, derive_seed(model_seed, 1000 + (ai * cfg.repetitions + r) as u64))
                })
            })
            .collect();
        let values: Vec<f64> = jobs
            .par_iter()
            .map(|&(alpha, s)| {
                let perm = partial_relabeling(n, alpha, s)?;
                if perm.iter().enumerate().all(|(i, &p)| i == p) {
                    return Ok(0.0);
                }
                let x = embed(&g.permute_nodes(&perm)?, &ecfg)?;
                Ok(matched_distance(&x0, &x)? / n as f64)
            })
            .collect::<Result<_>>()?;
        for (&(alpha, seed), value) in jobs.iter().zip(values) {
            runs.push(RunRecord {
                group: model.name().into(),
                x: alpha,
                value,
                seed,
            });
        }
        log::info!("relabel: {model} done");
    }
    ExperimentReport::new("relabel", cfg.seed, cfg, runs)
}

/// Settings for [`experiment_randomization_pairs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationPairsConfig {
    pub replicas: usize,
    pub kinds: Vec<RandomizationKind>,
    pub embedding: EDRepConfig,
    pub seed: u64,
}

impl Default for RandomizationPairsConfig {
    fn default() -> Self {
        Self {
            replicas: 25,
            kinds: RandomizationKind::ALL.to_vec(),
            embedding: EDRepConfig::default(),
            seed: 0,
        }
    }
}

impl RandomizationPairsConfig {
    pub fn paper_scale(self) -> Self {
        Self {
            replicas: 250,
            ..self
        }
    }
}

/// The synthetic test graph for randomization experiments: an ER preset
/// with mean degree 4.8 whose edges copy series from a power-law activity
/// bank with `t_count` snapshots.
pub fn bursty_test_graph(n: usize, t_count: usize, seed: u64) -> Result<TemporalGraph> {
    let bank = synthetic_activity(t_count, &BurstinessProfile::default(), derive_seed(seed, 0))?;
    let sg = preset(Model::Er, n, DEFAULT_MEAN_DEGREE, derive_seed(seed, 1))?;
    temporalize(&sg, &bank, derive_seed(seed, 2))
}

/// Builds two independent ensembles per randomization kind, then for every
/// pair of kinds clusters the union of their replicas into two groups and
/// scores against the kind labels. The diagonal compares the two ensembles of
/// one kind. Emits one NMI matrix per distance (`nmi_matched`,
/// `nmi_unmatched`); runs are grouped as `"<distance>:<kind a>|<kind b>"`.
pub fn experiment_randomization_pairs(g: &TemporalGraph, cfg: &RandomizationPairsConfig) -> Result<ExperimentReport> {
    let r = cfg.replicas;
    if r < 2 || cfg.kinds.is_empty() {
        return Err(Error::InvalidArgument("need at least two replicas and one kind".into()));
    }
    let ecfg = EDRepConfig {
        seed: derive_seed(cfg.seed, 2),
        ..cfg.embedding.clone()
    };
    // layout: kind a, ensemble e in {0, 1}, replica i -> (2a + e) r + i
    let mut graphs = Vec::with_capacity(2 * r * cfg.kinds.len());
    for (a, &kind) in cfg.kinds.iter().enumerate() {
        for e in 0..2 {
            graphs.extend(ensemble(g, kind, derive_seed(cfg.seed, 100 + (2 * a + e) as u64), r)?);
        }
    }
    let embeddings: Vec<Embedding> = graphs.par_iter().map(|h| embed(h, &ecfg)).collect::<Result<_>>()?;
    let block = |a: usize, e: usize| ((2 * a + e) * r)..((2 * a + e + 1) * r);
    let truth = Labeling::new((0..2 * r).map(|i| i / r).collect());
    let k = cfg.kinds.len();
    let names: Vec<String> = cfg.kinds.iter().map(|k| k.to_string()).collect();

    let mut runs = Vec::new();
    let mut matrices = Vec::new();
    for dist in [DistanceKind::Matched, DistanceKind::Unmatched] {
        let mut table = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let members: Vec<usize> = if a == b {
                    block(a, 0).chain(block(a, 1)).collect()
                } else {
                    block(a, 0).chain(block(b, 0)).collect()
                };
                let subset: Vec<Embedding> = members.iter().map(|&m| embeddings[m].clone()).collect();
                let dm: DistanceMatrix = pairwise_distances(&subset, None, dist)?;
                let seed = derive_seed(cfg.seed, 10_000 + (a * k + b) as u64);
                let score = nmi(&cluster_distances(&dm, 2, seed)?, &truth)?;
                table[a][b] = score;
                table[b][a] = score;
                runs.push(RunRecord {
                    group: format!("{dist}:{}|{}", names[a], names[b]),
                    x: 0.0,
                    value: score,
                    seed,
                });
            }
        }
        matrices.push(LabeledMatrix {
            name: format!("nmi_{dist}"),
            labels: names.clone(),
            values: table,
        });
    }
    let mut report = ExperimentReport::new("randomization", cfg.seed, cfg, runs)?;
    report.matrices = matrices;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relabeling_moves_exactly_the_chosen_nodes() {
        for (alpha, moved) in [(0.0, 0), (0.1, 10), (0.5, 50), (1.0, 100)] {
            let perm = partial_relabeling(100, alpha, 3).unwrap();
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..100).collect::<Vec<_>>());
            let count = perm.iter().enumerate().filter(|(i, p)| i != *p).count();
            assert_eq!(count, moved);
        }
        assert!(partial_relabeling(10, 1.5, 0).is_err());
    }

    #[test]
    fn summary_statistics() {
        let runs = vec![
            RunRecord { group: "a".into(), x: 1.0, value: 1.0, seed: 0 },
            RunRecord { group: "a".into(), x: 1.0, value: 3.0, seed: 1 },
            RunRecord { group: "b".into(), x: 1.0, value: 5.0, seed: 2 },
        ];
        let s = summarize(&runs);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mean, 2.0);
        assert!((s[0].std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s[1].std, 0.0);
    }

    #[test]
    fn activity_source_round_trips() {
        let src = ActivitySource::default();
        let json = serde_json::to_string(&src).unwrap();
        assert_eq!(serde_json::from_str::<ActivitySource>(&json).unwrap(), src);
        let cfg: ModelClassesConfig = serde_json::from_str(r#"{"instances_per_model": 3}"#).unwrap();
        assert_eq!(cfg.instances_per_model, 3);
        assert_eq!(cfg.dims, vec![2, 4, 8, 16, 32]);
    }

    #[test]
    fn tiny_relabel_run_is_reproducible() {
        let cfg = RelabelConfig {
            n: 30,
            alphas: vec![0.0, 0.5],
            repetitions: 2,
            models: vec![Model::Er],
            activity: ActivitySource::Synthetic {
                t_count: 20,
                profile: BurstinessProfile { series: 50, ..Default::default() },
            },
            embedding: EDRepConfig { d: 4, epochs: 5, ..Default::default() },
            ..Default::default()
        };
        let a = experiment_relabel(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), experiment_relabel(&cfg).unwrap().to_json().unwrap());
        assert_eq!(a.mean("er", 0.0), Some(0.0));
        assert!(a.mean("er", 0.5).unwrap() > 0.0);
    }
}
