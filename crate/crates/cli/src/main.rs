//! `jgs`: simulate graph collections, estimate graphons, run benchmarks.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use jgs_core::bench::{
    format_summary, run_benchmark, run_method, summarize, write_results_csv, write_summary_csv, ExperimentConfig,
    Method, SizeSpec, Sweep, SIZE_STREAM,
};
use jgs_core::eval::{mae_latent, mise, MaeMode, DEFAULT_RESOLUTION};
use jgs_core::io::{self, Provenance};
use jgs_core::jgs::{joint_sort, normalized_degrees, DegreeDivisor, TieBreak};
use jgs_core::tv::{tv_smooth, TvParams};
use jgs_core::{sample_collection, Graphon, KChoice, RngSeed};

const THREADS_ENV: &str = "JGS_THREADS";

#[derive(Parser)]
#[command(name = "jgs", version, about = "Graphon estimation from collections of graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a collection from a graphon and write it as JSON lines.
    Simulate {
        /// Graphon id 1..=13, or `const:P` for a constant graphon.
        #[arg(long)]
        graphon: GraphonArg,
        #[arg(long = "M")]
        graph_count: usize,
        /// `fixed:N` or `uniform:LO:HI`.
        #[arg(long)]
        sizes: SizeSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a graphon from a collection.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "jgs")]
        method: Method,
        /// `auto` or a positive block count.
        #[arg(long, default_value = "auto")]
        k: KArg,
        #[arg(long, default_value_t = TvParams::DEFAULT_LAMBDA)]
        lambda: f64,
        /// Output directory; receives `<method>.csv` and its metadata.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply TV smoothing to an estimate CSV.
    Smooth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = TvParams::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an estimate against a known graphon and append a CSV row.
    Evaluate {
        #[arg(long)]
        estimate: PathBuf,
        #[arg(long)]
        graphon: GraphonArg,
        /// Collection the estimate came from. Enables latent-position MAE and
        /// requires the `.latent.json` sidecar.
        #[arg(long)]
        collection: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the simulation benchmark.
    Benchmark {
        /// Comma-separated graphon ids.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        graphon: Vec<u32>,
        #[arg(long = "M", default_value_t = 200)]
        graph_count: usize,
        #[arg(long, default_value = "uniform:10:100")]
        sizes: SizeSpec,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated method names.
        #[arg(long, value_delimiter = ',', default_value = "jgs")]
        method: Vec<Method>,
        #[arg(long, default_value = "auto")]
        k: KArg,
        #[arg(long, default_value_t = TvParams::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        res: usize,
        #[arg(long)]
        sweep: Option<SweepAxis>,
        /// Comma-separated sweep levels.
        #[arg(long, value_delimiter = ',', requires = "sweep")]
        values: Vec<usize>,
        /// Results CSV; the summary goes next to it as `.summary.csv`.
        #[arg(long)]
        out: PathBuf,
        /// Leave the seconds column empty so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    N,
    #[value(name = "M")]
    M,
    K,
}

#[derive(Clone, Copy, Debug)]
enum GraphonArg {
    Id(u32),
    Constant(f64),
}

impl FromStr for GraphonArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(p) = s.strip_prefix("const:") {
            let p: f64 = p.parse().map_err(|_| format!("bad constant {p:?}"))?;
            return Ok(GraphonArg::Constant(p));
        }
        s.parse()
            .map(GraphonArg::Id)
            .map_err(|_| format!("graphon {s:?}: expected an id or const:P"))
    }
}

impl GraphonArg {
    fn build(self) -> Result<Graphon> {
        Ok(match self {
            GraphonArg::Id(id) => Graphon::analytic(id)?,
            GraphonArg::Constant(p) => Graphon::constant(p)?,
        })
    }

    fn id(self) -> Option<u32> {
        match self {
            GraphonArg::Id(id) => Some(id),
            GraphonArg::Constant(_) => None,
        }
    }

    fn label(self) -> String {
        match self {
            GraphonArg::Id(id) => id.to_string(),
            GraphonArg::Constant(p) => format!("const:{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct KArg(KChoice);

impl FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(KArg(KChoice::AUTO));
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(KArg(KChoice::Fixed(k))),
            _ => Err(format!("k {s:?}: expected auto or a positive integer")),
        }
    }
}

fn main() -> Result<()> {
    let threads = configure_threads()?;
    match Cli::parse().command {
        Command::Simulate {
            graphon,
            graph_count,
            sizes,
            seed,
            out,
        } => simulate(graphon, graph_count, sizes, seed, &out),
        Command::Estimate {
            input,
            method,
            k,
            lambda,
            out,
        } => estimate(&input, method, k.0, lambda, &out),
        Command::Smooth { input, lambda, out } => smooth(&input, lambda, &out),
        Command::Evaluate {
            estimate,
            graphon,
            collection,
            res,
            out,
        } => evaluate(&estimate, graphon, collection.as_deref(), res, &out),
        Command::Benchmark {
            graphon,
            graph_count,
            sizes,
            trials,
            seed,
            method,
            k,
            lambda,
            res,
            sweep,
            values,
            out,
            no_timing,
        } => {
            let sweep = match sweep {
                None => Sweep::None,
                Some(SweepAxis::N) => Sweep::N(values),
                Some(SweepAxis::M) => Sweep::M(values),
                Some(SweepAxis::K) => Sweep::K(values),
            };
            let config = ExperimentConfig {
                graphons: graphon,
                graph_count,
                sizes,
                trials,
                seed,
                methods: method,
                k: k.0,
                lambda,
                resolution: res,
                sweep,
                threads,
            };
            benchmark(&config, &out, !no_timing)
        }
    }
}

/// Reads `JGS_THREADS` and sizes the global pool from it.
fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV}={raw:?} is not a positive integer"))?;
    // Nothing has touched the global pool yet, so rayon still reads this.
    std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    Ok(Some(n))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn simulate(graphon: GraphonArg, graph_count: usize, sizes: SizeSpec, seed: u64, out: &Path) -> Result<()> {
    if graph_count == 0 {
        bail!("--M must be at least 1");
    }
    let w = graphon.build()?;
    let seed = RngSeed(seed);
    let sizes = sizes.draw(graph_count, &mut seed.stream(&[SIZE_STREAM]));
    let (collection, latent) = sample_collection(&w, &sizes, seed)?;
    ensure_parent(out)?;
    io::write_collection(out, &collection)?;
    let provenance = Provenance {
        latent: latent.into_inner(),
        graphon_id: graphon.id(),
        seed: Some(seed.0),
    };
    io::write_provenance(&io::provenance_path(out), &provenance)?;
    println!(
        "wrote {} graphs, {} nodes, {} edges to {}",
        collection.graph_count(),
        collection.total_nodes(),
        collection.total_edges(),
        out.display()
    );
    Ok(())
}

fn estimate(input: &Path, method: Method, k: KChoice, lambda: f64, out: &Path) -> Result<()> {
    let collection = io::read_collection(input)?;
    let start = Instant::now();
    let mut fit = run_method(method, &collection, k, lambda)?;
    let elapsed = start.elapsed().as_secs_f64();
    fit.estimate.meta.elapsed_seconds = elapsed;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(format!("{method}.csv"));
    io::write_estimate(&path, &fit.estimate)?;
    println!("method {method}: k = {}, elapsed {elapsed:.3} s", fit.estimate.k());
    println!("wrote {}", path.display());
    Ok(())
}

fn smooth(input: &Path, lambda: f64, out: &Path) -> Result<()> {
    let (values, meta) = io::read_estimate(input)?;
    let smoothed = tv_smooth(&values, &TvParams::with_lambda(lambda))?;
    ensure_parent(out)?;
    match meta {
        Some(meta) => {
            let meta = meta.param("smooth_lambda", lambda);
            io::write_estimate(out, &jgs_core::StepEstimate { values: smoothed, meta })?;
        }
        None => io::write_matrix_csv(out, &smoothed)?,
    }
    println!("wrote {}", out.display());
    Ok(())
}

const EVAL_HEADER: &str = "estimate,method,k,graphon,resolution,mise,mae";

fn evaluate(estimate: &Path, graphon: GraphonArg, collection: Option<&Path>, res: usize, out: &Path) -> Result<()> {
    let (values, meta) = io::read_estimate(estimate)?;
    let w = graphon.build()?;
    let err = mise(&values, &w, res)?;
    let mae = match collection {
        None => None,
        Some(path) => {
            let sidecar = io::provenance_path(path);
            if !sidecar.exists() {
                bail!("latent positions for MAE not found: {} is missing", sidecar.display());
            }
            let truth = io::read_provenance(&sidecar)?.latent_assignment()?;
            let c = io::read_collection(path)?;
            let degrees = normalized_degrees(&c, DegreeDivisor::NMinusOne);
            let ordering = joint_sort(&degrees.per_graph, TieBreak::Index)?;
            Some(mae_latent(&ordering.latent_positions(), &truth, MaeMode::Direct)?)
        }
    };
    let method = meta.map_or_else(String::new, |m| m.method);
    let row = [
        csv_field(&estimate.display().to_string()),
        csv_field(&method),
        values.dim().to_string(),
        csv_field(&graphon.label()),
        res.to_string(),
        err.to_string(),
        mae.map_or_else(String::new, |m| m.to_string()),
    ]
    .join(",");

    ensure_parent(out)?;
    let fresh = fs::metadata(out).map_or(true, |m| m.len() == 0);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .with_context(|| format!("opening {}", out.display()))?;
    if fresh {
        writeln!(file, "{EVAL_HEADER}")?;
    }
    writeln!(file, "{row}")?;
    match mae {
        Some(m) => println!("MISE {err:.6e}, MAE {m:.6}"),
        None => println!("MISE {err:.6e}"),
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn benchmark(config: &ExperimentConfig, out: &Path, timing: bool) -> Result<()> {
    let rows = run_benchmark(config)?;
    ensure_parent(out)?;
    write_results_csv(out, &rows, timing)?;
    let summary = summarize(&rows);
    let summary_path = out.with_extension("summary.csv");
    write_summary_csv(&summary_path, &summary)?;
    print!("{}", format_summary(&summary));
    println!("wrote {} rows to {} and {}", rows.len(), out.display(), summary_path.display());
    Ok(())
}
