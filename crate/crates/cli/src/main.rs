//! `tgdist` command-line tool.

mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tgdist::eval::experiments::{
    bursty_test_graph, experiment_model_classes, experiment_randomization_pairs, experiment_relabel, ActivitySource,
    ModelClassesConfig, RandomizationPairsConfig, RelabelConfig,
};
use tgdist::io;
use tgdist::randomize::randomize_with_report;
use tgdist::synth::{preset, temporalize_with, BurstinessProfile, TemporalizeOptions, DEFAULT_MEAN_DEGREE};
use tgdist::{
    derive_seed, embed, lambda_vector, pairwise_distances, DistanceKind, EDRepConfig, Embedding, Error,
    GlobalTransitionOperator, Model, RandomizationKind, TemporalGraph,
};

use config::{merge_config_file, Failure};

#[derive(Parser)]
#[command(name = "tgdist", version, about = "Distances between temporal graphs")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bin a `timestamp i j` contact list into a graph dump.
    Ingest {
        input: PathBuf,
        /// Snapshot width in seconds.
        #[arg(long)]
        t_res: u64,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        graph: GraphOptions,
    },
    /// Embed a graph and write the embedding as CSV.
    Embed {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        graph: GraphOptions,
        #[command(flatten)]
        embedding: EmbeddingFlags,
        /// Also write the dense operator `P` as CSV.
        #[arg(long)]
        dump_p: Option<PathBuf>,
    },
    /// Distance between two embeddings.
    Dist {
        #[arg(long, default_value = "unmatched")]
        kind: DistanceKind,
        a: PathBuf,
        b: PathBuf,
    },
    /// Pairwise distance matrix of several embeddings.
    Distmat {
        #[arg(long, default_value = "unmatched")]
        kind: DistanceKind,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
    },
    /// Eigenvalue vectors of several embeddings, one row per file.
    ExportLambda {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Randomized copies of a graph.
    Randomize {
        input: PathBuf,
        #[arg(long)]
        kind: RandomizationKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Output prefix; replica `r` goes to `<prefix>_<r>.json`.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        graph: GraphOptions,
    },
    /// Synthetic temporal graph from a static model and an activity source.
    Generate {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MEAN_DEGREE)]
        mean_degree: f64,
        #[arg(long, value_enum, default_value = "synthetic")]
        activity: ActivityKind,
        /// Contact list used with `--activity file`.
        #[arg(long, required_if_eq("activity", "file"))]
        activity_file: Option<PathBuf>,
        #[arg(long)]
        t_res: Option<u64>,
        /// Snapshots of the synthetic activity bank.
        #[arg(long, default_value_t = 100)]
        t_count: usize,
        /// Rotate every copied activity series by a random offset.
        #[arg(long)]
        shift: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reproducible evaluation runs.
    Experiment {
        #[command(subcommand)]
        which: ExperimentKind,
    },
}

#[derive(Subcommand)]
enum ExperimentKind {
    /// Cluster synthetic graphs by model class over a sweep of `d`.
    Classes(ExperimentArgs),
    /// Unmatched distance against the fraction of relabeled nodes.
    Relabel(ExperimentArgs),
    /// Pairwise separability of the randomizations.
    Randomization {
        #[command(flatten)]
        common: ExperimentArgs,
        /// Graph dump to randomize; defaults to a synthetic bursty graph.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file whose fields override flags and defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "desk_scale")]
    paper_scale: bool,
    /// Scaled-down defaults (the default).
    #[arg(long)]
    desk_scale: bool,
    /// Output prefix of the report bundle.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct GraphOptions {
    /// Remove snapshots without any contact.
    #[arg(long)]
    drop_empty_snapshots: bool,
    /// Snapshot width when the input is a raw contact list.
    #[arg(long = "input-t-res")]
    input_t_res: Option<u64>,
}

#[derive(Args)]
struct EmbeddingFlags {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `exact`, `mixture` or `auto`.
    #[arg(long)]
    z_mode: Option<String>,
    /// `lazy`, `materialized` or `auto`.
    #[arg(long)]
    operator: Option<String>,
    /// JSON file whose fields override flags and defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivityKind {
    Synthetic,
    File,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tgdist: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let threads = cli.threads;
    match cli.command {
        Command::Ingest {
            input,
            t_res,
            output,
            graph,
        } => {
            let g = prepare(io::load_contact_list(&input, t_res)?, &graph);
            let path = io::write_graph(&g, &output)?;
            log::info!("{} nodes, {} snapshots -> {}", g.n(), g.num_snapshots(), path.display());
            write_sidecar(
                &output,
                json!({"command": "ingest", "input": input, "t_res": t_res, "drop_empty_snapshots": graph.drop_empty_snapshots}),
                threads,
            )
        }
        Command::Embed {
            input,
            output,
            graph,
            embedding,
            dump_p,
        } => {
            let g = prepare(load_graph(&input, graph.input_t_res)?, &graph);
            let cfg = embedding_config(&embedding)?;
            if let Some(path) = &dump_p {
                let op = GlobalTransitionOperator::build_with_cap(&g, cfg.operator, cfg.dense_cap)?;
                let p = op.materialize_with_cap(cfg.dense_cap)?;
                io::write_dense_csv(&p, create(path)?)?;
            }
            let x = embed(&g, &cfg)?;
            io::write_embedding_csv(&x, create(&output)?)?;
            write_sidecar(
                &output,
                json!({"command": "embed", "input": input, "drop_empty_snapshots": graph.drop_empty_snapshots,
                       "dump_p": dump_p, "embedding": cfg}),
                threads,
            )
        }
        Command::Dist { kind, a, b } => {
            let xs = [read_embedding(&a)?, read_embedding(&b)?];
            let dm = pairwise_distances(&xs, None, kind)?;
            println!("{}", dm.get(0, 1));
            Ok(())
        }
        Command::Distmat { kind, output, inputs } => {
            let xs = inputs.iter().map(|p| read_embedding(p)).collect::<Result<Vec<_>, _>>()?;
            let dm = pairwise_distances(&xs, Some(ids(&inputs)), kind)?;
            io::write_distance_matrix_csv(&dm, create(&output)?)?;
            write_sidecar(&output, json!({"command": "distmat", "kind": kind, "inputs": inputs}), threads)
        }
        Command::ExportLambda { output, inputs } => {
            let lambdas = inputs
                .iter()
                .map(|p| read_embedding(p).map(|x| lambda_vector(&x)))
                .collect::<Result<Vec<_>, _>>()?;
            let names = ids(&inputs);
            io::write_lambda_csv(names.iter().map(String::as_str).zip(&lambdas), create(&output)?)?;
            write_sidecar(&output, json!({"command": "export-lambda", "inputs": inputs}), threads)
        }
        Command::Randomize {
            input,
            kind,
            seed,
            reps,
            output,
            graph,
        } => {
            let g = prepare(load_graph(&input, graph.input_t_res)?, &graph);
            let width = reps.saturating_sub(1).to_string().len();
            for r in 0..reps {
                let out = randomize_with_report(&g, kind, derive_seed(seed, r as u64))?;
                for w in &out.warnings {
                    log::warn!("replica {r}: {w}");
                }
                let name = format!("{}_{:0width$}", output.display(), r);
                io::write_graph(&out.graph, PathBuf::from(name).with_extension("json"))?;
            }
            write_sidecar(
                &output,
                json!({"command": "randomize", "input": input, "kind": kind, "seed": seed, "reps": reps,
                       "drop_empty_snapshots": graph.drop_empty_snapshots}),
                threads,
            )
        }
        Command::Generate {
            model,
            n,
            seed,
            mean_degree,
            activity,
            activity_file,
            t_res,
            t_count,
            shift,
            output,
        } => {
            let source = match activity {
                ActivityKind::Synthetic => ActivitySource::Synthetic {
                    t_count,
                    profile: BurstinessProfile::default(),
                },
                ActivityKind::File => ActivitySource::File {
                    path: activity_file.expect("enforced by clap"),
                    t_res: t_res.ok_or_else(|| Failure::Usage("--activity file needs --t-res".into()))?,
                },
            };
            let bank = source.load(derive_seed(seed, 0))?;
            let sg = preset(model, n, mean_degree, derive_seed(seed, 1))?;
            let options = TemporalizeOptions { circular_shift: shift };
            let g = temporalize_with(&sg, &bank, derive_seed(seed, 2), options)?;
            io::write_graph(&g, &output)?;
            write_sidecar(
                &output,
                json!({"command": "generate", "model": model, "n": n, "seed": seed, "mean_degree": mean_degree,
                       "activity": source, "shift": shift}),
                threads,
            )
        }
        Command::Experiment { which } => experiment(which, threads),
    }
}

fn experiment(which: ExperimentKind, threads: Option<usize>) -> Result<(), Failure> {
    let (report, args, extra) = match which {
        ExperimentKind::Classes(args) => {
            let base = scaled(ModelClassesConfig::default(), &args, ModelClassesConfig::paper_scale);
            let cfg: ModelClassesConfig = resolve(base, &args)?;
            (experiment_model_classes(&cfg)?, args, Value::Null)
        }
        ExperimentKind::Relabel(args) => {
            let base = scaled(RelabelConfig::default(), &args, RelabelConfig::paper_scale);
            let cfg: RelabelConfig = resolve(base, &args)?;
            (experiment_relabel(&cfg)?, args, Value::Null)
        }
        ExperimentKind::Randomization { common, graph } => {
            let base = scaled(RandomizationPairsConfig::default(), &common, RandomizationPairsConfig::paper_scale);
            let cfg: RandomizationPairsConfig = resolve(base, &common)?;
            let g = match &graph {
                Some(path) => io::read_graph(path)?,
                None => bursty_test_graph(100, 200, derive_seed(cfg.seed, 1000))?,
            };
            (experiment_randomization_pairs(&g, &cfg)?, common, json!({ "graph": graph }))
        }
    };
    let written = report.write_bundle(&args.output)?;
    for p in &written {
        log::info!("wrote {}", p.display());
    }
    write_sidecar(
        &args.output,
        json!({"command": "experiment", "experiment": report.experiment, "config": report.parameters,
               "paper_scale": args.paper_scale, "input": extra}),
        threads,
    )
}

fn scaled<T>(default: T, args: &ExperimentArgs, paper: fn(T) -> T) -> T {
    if args.paper_scale {
        paper(default)
    } else {
        default
    }
}

/// Defaults, then `--seed`, then the config file.
fn resolve<T>(base: T, args: &ExperimentArgs) -> Result<T, Failure>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let mut value = serde_json::to_value(base).map_err(Error::from)?;
    if let Some(seed) = args.seed {
        value["seed"] = json!(seed);
    }
    merge_config_file(value, args.config.as_deref())
}

fn embedding_config(flags: &EmbeddingFlags) -> Result<EDRepConfig, Failure> {
    let mut value = serde_json::to_value(EDRepConfig::default()).map_err(Error::from)?;
    let set = |value: &mut Value, key: &str, v: Option<Value>| {
        if let Some(v) = v {
            value[key] = v;
        }
    };
    set(&mut value, "d", flags.d.map(Value::from));
    set(&mut value, "epochs", flags.epochs.map(Value::from));
    set(&mut value, "step_size", flags.step_size.map(Value::from));
    set(&mut value, "q", flags.q.map(Value::from));
    set(&mut value, "seed", flags.seed.map(Value::from));
    set(&mut value, "z_mode", flags.z_mode.clone().map(Value::from));
    set(&mut value, "operator", flags.operator.clone().map(Value::from));
    let cfg: EDRepConfig = merge_config_file(value, flags.config.as_deref())?;
    cfg.validate()?;
    Ok(cfg)
}

/// Graph dumps are read by their JSON descriptor; anything else is taken as a
/// contact list.
fn load_graph(path: &Path, t_res: Option<u64>) -> Result<TemporalGraph, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(io::read_graph(path)?);
    }
    let t_res = t_res.ok_or_else(|| {
        Failure::Usage(format!(
            "{} is not a graph descriptor; pass --input-t-res to read it as a contact list",
            path.display()
        ))
    })?;
    Ok(io::load_contact_list(path, t_res)?)
}

fn prepare(g: TemporalGraph, options: &GraphOptions) -> TemporalGraph {
    if options.drop_empty_snapshots {
        let dropped = g.drop_empty_snapshots();
        log::info!("dropped {} empty snapshots", g.num_snapshots() - dropped.num_snapshots());
        dropped
    } else {
        g
    }
}

fn read_embedding(path: &Path) -> Result<Embedding, Failure> {
    let f = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(io::read_embedding_csv(f)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn ids(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.file_stem().unwrap_or(p.as_os_str()).to_string_lossy().into_owned())
        .collect()
}

/// `<output>.config.json` next to every artifact.
fn write_sidecar(output: &Path, mut record: Value, threads: Option<usize>) -> Result<(), Failure> {
    record["version"] = json!(env!("CARGO_PKG_VERSION"));
    record["threads"] = json!(threads);
    let path = output.with_extension("config.json");
    let text = serde_json::to_string_pretty(&record).map_err(Error::from)? + "\n";
    std::fs::write(&path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}
