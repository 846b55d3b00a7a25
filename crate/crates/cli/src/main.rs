use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use grande_core::eval::{generate_blobs, run_experiment, sigma_grid, sigma_sweep, ExperimentConfig};
use grande_core::graph::{build_reciprocal_graph, compute_ranked_lists};
use grande_core::io::{
    load_features, load_labels, write_edge_list, write_features_binary, write_features_csv,
    write_labels, ComparisonReport, DataEcho, ResultDocument, Results, Timings,
};
use grande_core::{AdamConfig, DegreeStrategy, FeatureMatrix, ModelSpec, NeighborGraph};

#[derive(Parser, Debug)]
#[command(name = "grande", version, about = "Diffusion GNNs with Gaussian neighborhood degrees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the reciprocal kNN graph and write it as an edge list
    BuildGraph(GraphArgs),
    /// Run the fold protocol for one configuration
    Train(RunArgs),
    /// Run the fold protocol once per sigma of a grid (Gaussian degree)
    SweepSigma(SweepArgs),
    /// Compare centrality and Gaussian degrees on identical folds
    Evaluate(RunArgs),
    /// Write Gaussian-blob features and labels
    GenSynthetic(SynthArgs),
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long)]
    features: PathBuf,
    /// Neighborhood size of the reciprocal kNN graph
    #[arg(long, default_value_t = 40)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelKind {
    Sgc,
    Appnp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DegreeArg {
    Centrality,
    Grande,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 40)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ModelKind::Sgc)]
    model: ModelKind,
    #[arg(long, value_enum, default_value_t = DegreeArg::Centrality)]
    degree: DegreeArg,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Propagation steps (default 2 for SGC, 10 for APPNP)
    #[arg(long = "K")]
    k_steps: Option<usize>,
    /// APPNP teleport probability
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// APPNP hidden width; 0 gives a single linear layer
    #[arg(long, default_value_t = 256)]
    hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 5)]
    executions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result file; printed to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Inclusive grid lo:hi:step
    #[arg(long = "sigma-grid", default_value = "0.1:1.0:0.1")]
    sigma_grid: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FeatureFormat {
    Csv,
    Binary,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for features and labels.csv
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long = "per-class", default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureFormat::Csv)]
    format: FeatureFormat,
}

impl RunArgs {
    fn model_spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::Sgc => ModelSpec::Sgc {
                k_steps: self.k_steps.unwrap_or(2),
            },
            ModelKind::Appnp => ModelSpec::Appnp {
                hidden: self.hidden,
                k_steps: self.k_steps.unwrap_or(10),
                alpha: self.alpha,
                dropout: self.dropout,
            },
        }
    }

    fn experiment(&self, degree: DegreeStrategy) -> ExperimentConfig {
        ExperimentConfig {
            model: self.model_spec(),
            degree,
            epochs: self.epochs,
            adam: AdamConfig {
                lr: self.lr,
                ..AdamConfig::default()
            },
            seed: self.seed,
        }
    }

    fn degree(&self) -> DegreeStrategy {
        match self.degree {
            DegreeArg::Centrality => DegreeStrategy::Centrality,
            DegreeArg::Grande => DegreeStrategy::Grande { sigma: self.sigma },
        }
    }
}

struct Loaded {
    x: FeatureMatrix,
    labels: Vec<usize>,
    graph: NeighborGraph,
    echo: DataEcho,
    graph_seconds: f64,
}

fn build_graph(x: &FeatureMatrix, k: usize) -> Result<NeighborGraph> {
    let lists = compute_ranked_lists(x, k).context("computing ranked lists")?;
    Ok(build_reciprocal_graph(&lists, k)?)
}

fn load(args: &RunArgs) -> Result<Loaded> {
    let x = load_features(&args.features)
        .with_context(|| format!("reading features {}", args.features.display()))?;
    let labels = load_labels(&args.labels)
        .with_context(|| format!("reading labels {}", args.labels.display()))?;
    if labels.len() != x.rows() {
        bail!(
            "{} feature rows but {} labels",
            x.rows(),
            labels.len()
        );
    }
    let t = Instant::now();
    let graph = build_graph(&x, args.k)?;
    let graph_seconds = t.elapsed().as_secs_f64();
    let echo = DataEcho {
        features: args.features.display().to_string(),
        labels: args.labels.display().to_string(),
        nodes: x.rows(),
        dims: x.cols(),
        classes: labels.iter().max().map_or(0, |m| m + 1),
        k: args.k,
        edges: graph.num_edges(),
    };
    Ok(Loaded {
        x,
        labels,
        graph,
        echo,
        graph_seconds,
    })
}

fn emit(doc: &ResultDocument, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => doc
            .write(path)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", doc.to_json()?);
            Ok(())
        }
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        bail!("--sigma-grid expects lo:hi:step, got {s:?}");
    };
    let num = |v: &str| v.trim().parse::<f64>().with_context(|| format!("bad number {v:?} in --sigma-grid"));
    Ok(sigma_grid(num(lo)?, num(hi)?, num(step)?)?)
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::BuildGraph(a) => {
            let x = load_features(&a.features)
                .with_context(|| format!("reading features {}", a.features.display()))?;
            let g = build_graph(&x, a.k)?;
            write_edge_list(&a.out, &g).with_context(|| format!("writing {}", a.out.display()))?;
            eprintln!("{} nodes, {} edges -> {}", g.n(), g.num_edges(), a.out.display());
        }
        Command::Train(a) => {
            let d = load(&a)?;
            let t = Instant::now();
            let report = run_experiment(&d.x, &d.labels, &d.graph, &a.experiment(a.degree()), a.executions, a.folds)?;
            let doc = ResultDocument {
                command: "train".into(),
                data: d.echo,
                results: Results::Experiment(report),
                timings: timings(d.graph_seconds, t, start),
            };
            emit(&doc, a.out.as_deref())?;
        }
        Command::Evaluate(a) => {
            let d = load(&a)?;
            let t = Instant::now();
            let centrality = run_experiment(
                &d.x,
                &d.labels,
                &d.graph,
                &a.experiment(DegreeStrategy::Centrality),
                a.executions,
                a.folds,
            )?;
            let grande = run_experiment(
                &d.x,
                &d.labels,
                &d.graph,
                &a.experiment(DegreeStrategy::Grande { sigma: a.sigma }),
                a.executions,
                a.folds,
            )?;
            let gain = grande.mean - centrality.mean;
            let doc = ResultDocument {
                command: "evaluate".into(),
                data: d.echo,
                results: Results::Comparison(ComparisonReport {
                    centrality,
                    grande,
                    gain,
                }),
                timings: timings(d.graph_seconds, t, start),
            };
            emit(&doc, a.out.as_deref())?;
        }
        Command::SweepSigma(s) => {
            let sigmas = parse_grid(&s.sigma_grid)?;
            let a = &s.run;
            let d = load(a)?;
            let t = Instant::now();
            let cfg = a.experiment(DegreeStrategy::Grande { sigma: sigmas[0] });
            let sweep = sigma_sweep(&d.x, &d.labels, &d.graph, &cfg, &sigmas, a.executions, a.folds)?;
            let doc = ResultDocument {
                command: "sweep-sigma".into(),
                data: d.echo,
                results: Results::Sweep(sweep),
                timings: timings(d.graph_seconds, t, start),
            };
            emit(&doc, a.out.as_deref())?;
        }
        Command::GenSynthetic(a) => {
            let (x, labels) =
                generate_blobs(a.classes, a.per_class, a.dim, a.separation, a.noise, a.seed)?;
            std::fs::create_dir_all(&a.out)
                .with_context(|| format!("creating {}", a.out.display()))?;
            let features = match a.format {
                FeatureFormat::Csv => {
                    let p = a.out.join("features.csv");
                    write_features_csv(&p, &x)?;
                    p
                }
                FeatureFormat::Binary => {
                    let p = a.out.join("features.bin");
                    write_features_binary(&p, &x)?;
                    p
                }
            };
            write_labels(a.out.join("labels.csv"), &labels)?;
            eprintln!("{} points -> {}", x.rows(), features.display());
        }
    }
    Ok(())
}

fn timings(graph_seconds: f64, run_start: Instant, start: Instant) -> Timings {
    Timings {
        graph_seconds,
        run_seconds: run_start.elapsed().as_secs_f64(),
        total_seconds: start.elapsed().as_secs_f64(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
