//! Experiment runner: simulate → estimate → evaluate over
//! (graphon × sweep level × trial × method), with CSV output.
//!
//! Seeds: trial `t` of graphon `g` samples its collection from
//! `RngSeed(master).derive(&[g, t])` (graph `m` then uses the sub-stream
//! `(that seed, m)`), and draws its graph sizes from the stream labelled
//! [`SIZE_STREAM`] under the same seed. Methods and sweep levels never
//! perturb the sampled data, so a k-sweep evaluates every `k` on the same
//! collections.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::baselines::{estimate_sas_pool, estimate_usvt_pool, SasOptions, UsvtOptions};
use crate::error::{Error, Result};
use crate::estimate::StepEstimate;
use crate::graph::GraphCollection;
use crate::eval::{mae_latent, mise_against, MaeMode, DEFAULT_RESOLUTION};
use crate::graphon::{Graphon, StepGraphon};
use crate::jgs::{estimate_jgs, JgsOptions, JointOrdering, KChoice, Smoothing};
use crate::rng::RngSeed;
use crate::sampling::sample_collection;
use crate::tv::TvParams;

/// Stream label used for drawing graph sizes.
pub const SIZE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeSpec {
    Fixed(usize),
    /// Uniform on the integers `lo..=hi`.
    Uniform { lo: usize, hi: usize },
}

impl SizeSpec {
    pub fn draw(&self, count: usize, rng: &mut impl Rng) -> Vec<usize> {
        match *self {
            SizeSpec::Fixed(n) => vec![n; count],
            SizeSpec::Uniform { lo, hi } => (0..count).map(|_| rng.random_range(lo..=hi)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SizeSpec::Fixed(0) => Err(Error::InvalidArgument("graph size must be >= 1".into())),
            SizeSpec::Uniform { lo, hi } if lo == 0 || lo > hi => Err(Error::InvalidArgument(format!(
                "size range uniform:{lo}:{hi} needs 1 <= lo <= hi"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SizeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeSpec::Fixed(n) => write!(f, "fixed:{n}"),
            SizeSpec::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
        }
    }
}

impl FromStr for SizeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("size spec {s:?}: expected fixed:N or uniform:LO:HI"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["fixed", n] => SizeSpec::Fixed(num(n)?),
            ["uniform", lo, hi] => SizeSpec::Uniform {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Jgs,
    JgsSmooth,
    SasPool,
    UsvtPool,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Jgs, Method::JgsSmooth, Method::SasPool, Method::UsvtPool];

    pub fn name(self) -> &'static str {
        match self {
            Method::Jgs => "jgs",
            Method::JgsSmooth => "jgs-smooth",
            Method::SasPool => "sas-pool",
            Method::UsvtPool => "usvt-pool",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Sweep {
    #[default]
    None,
    /// Fixed graph size `n` per level.
    N(Vec<usize>),
    /// Graph count `M` per level.
    M(Vec<usize>),
    /// Explicit block count per level.
    K(Vec<usize>),
}

impl Sweep {
    fn levels(&self) -> usize {
        match self {
            Sweep::None => 1,
            Sweep::N(v) | Sweep::M(v) | Sweep::K(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graphons: Vec<u32>,
    pub graph_count: usize,
    pub sizes: SizeSpec,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub k: KChoice,
    pub lambda: f64,
    /// Evaluation grid resolution.
    pub resolution: usize,
    pub sweep: Sweep,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    /// The comparison protocol: 200 graphs of 10..=100 nodes, 20 trials.
    fn default() -> Self {
        Self {
            graphons: vec![1],
            graph_count: 200,
            sizes: SizeSpec::Uniform { lo: 10, hi: 100 },
            trials: 20,
            seed: 0,
            methods: vec![Method::Jgs],
            k: KChoice::AUTO,
            lambda: TvParams::DEFAULT_LAMBDA,
            resolution: DEFAULT_RESOLUTION,
            sweep: Sweep::None,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidArgument(s));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.graphons.is_empty() {
            return bad("at least one graphon is required".into());
        }
        for &g in &self.graphons {
            Graphon::analytic(g)?;
        }
        if self.graph_count == 0 {
            return bad("M must be >= 1".into());
        }
        self.sizes.validate()?;
        if self.resolution < 2 {
            return bad("resolution must be >= 2".into());
        }
        if let KChoice::Fixed(0) = self.k {
            return bad("k must be >= 1".into());
        }
        TvParams::with_lambda(self.lambda).validate()?;
        match &self.sweep {
            Sweep::None => {}
            Sweep::N(v) | Sweep::M(v) | Sweep::K(v) => {
                if v.is_empty() || v.contains(&0) {
                    return bad("sweep values must be a non-empty list of positive integers".into());
                }
            }
        }
        Ok(())
    }

    /// Number of result rows a run produces.
    pub fn row_count(&self) -> usize {
        self.graphons.len() * self.sweep.levels() * self.trials * self.methods.len()
    }
}

/// One (graphon, level, trial, method) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub graphon_id: u32,
    pub graph_count: usize,
    pub size_spec: String,
    pub seed: u64,
    pub trial: usize,
    /// `auto` or the requested block count.
    pub k_setting: String,
    /// Block count actually used (grid size for pooled baselines).
    pub k: Option<usize>,
    pub method: Method,
    pub mise: Option<f64>,
    pub mae: Option<f64>,
    pub empty_frac: Option<f64>,
    pub seconds: f64,
    pub status: String,
}

struct Level {
    graph_count: usize,
    sizes: SizeSpec,
    k: KChoice,
}

fn k_label(k: KChoice) -> String {
    match k {
        KChoice::Fixed(k) => k.to_string(),
        KChoice::Auto { .. } => "auto".into(),
    }
}

fn levels(config: &ExperimentConfig) -> Vec<Level> {
    let base = || Level {
        graph_count: config.graph_count,
        sizes: config.sizes,
        k: config.k,
    };
    match &config.sweep {
        Sweep::None => vec![base()],
        Sweep::N(v) => v.iter().map(|&n| Level { sizes: SizeSpec::Fixed(n), ..base() }).collect(),
        Sweep::M(v) => v.iter().map(|&m| Level { graph_count: m, ..base() }).collect(),
        Sweep::K(v) => v.iter().map(|&k| Level { k: KChoice::Fixed(k), ..base() }).collect(),
    }
}

/// Runs every (graphon, level, trial, method) cell. Rows come back in that
/// nesting order whatever the thread schedule. Failures of one method are
/// recorded in the row's status and do not stop the run.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| run_inner(config)),
        None => run_inner(config),
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let levels = levels(config);
    let mut rows = Vec::with_capacity(config.row_count());
    for &gid in &config.graphons {
        let graphon = Graphon::analytic(gid)?;
        let truth = graphon.canonical_rearrangement(config.resolution)?;
        let tasks: Vec<(usize, usize)> = (0..levels.len())
            .flat_map(|l| (0..config.trials).map(move |t| (l, t)))
            .collect();
        let chunks: Vec<Vec<ResultRow>> = tasks
            .par_iter()
            .map(|&(l, t)| run_trial(config, gid, &graphon, &truth, &levels[l], t))
            .collect::<Result<_>>()?;
        rows.extend(chunks.into_iter().flatten());
    }
    Ok(rows)
}

fn run_trial(
    config: &ExperimentConfig,
    gid: u32,
    graphon: &Graphon,
    truth: &StepGraphon,
    level: &Level,
    trial: usize,
) -> Result<Vec<ResultRow>> {
    let trial_seed = RngSeed(config.seed).derive(&[gid as u64, trial as u64]);
    let sizes = level
        .sizes
        .draw(level.graph_count, &mut trial_seed.stream(&[SIZE_STREAM]));
    let (collection, latent) = sample_collection(graphon, &sizes, trial_seed)?;

    let rows = config
        .methods
        .iter()
        .map(|&method| {
            let mut row = ResultRow {
                graphon_id: gid,
                graph_count: level.graph_count,
                size_spec: level.sizes.to_string(),
                seed: config.seed,
                trial,
                k_setting: k_label(level.k),
                k: None,
                method,
                mise: None,
                mae: None,
                empty_frac: None,
                seconds: 0.0,
                status: "ok".into(),
            };
            let start = Instant::now();
            let outcome = run_method(method, &collection, level.k, config.lambda).map(|fit| {
                let mae = fit
                    .ordering
                    .and_then(|o| mae_latent(&o.latent_positions(), &latent, MaeMode::Direct).ok());
                (fit.estimate, mae)
            });
            row.seconds = start.elapsed().as_secs_f64();
            match outcome.and_then(|(est, mae)| {
                let mise = mise_against(&est.values, truth)?;
                Ok((est, mae, mise))
            }) {
                Ok((est, mae, mise)) => {
                    row.k = Some(est.k());
                    row.mise = Some(mise);
                    row.mae = mae;
                    if matches!(method, Method::Jgs | Method::JgsSmooth) {
                        row.empty_frac = Some(est.meta.empty_block_fraction());
                    }
                }
                Err(e) => row.status = format!("error: {e}"),
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Output of one estimator. Degree-sorting methods also return their ordering.
#[derive(Debug, Clone)]
pub struct MethodFit {
    pub estimate: StepEstimate,
    pub ordering: Option<JointOrdering>,
}

/// Runs `method` with default options apart from `k` and the TV weight.
/// Pooled baselines ignore `k`.
pub fn run_method(method: Method, collection: &GraphCollection, k: KChoice, lambda: f64) -> Result<MethodFit> {
    let tv = TvParams::with_lambda(lambda);
    match method {
        Method::Jgs | Method::JgsSmooth => {
            let smoothing = if method == Method::JgsSmooth {
                Smoothing::Tv(tv)
            } else {
                Smoothing::Off
            };
            let fit = estimate_jgs(collection, &JgsOptions::default().with_k(k).with_smoothing(smoothing))?;
            Ok(MethodFit {
                estimate: fit.estimate,
                ordering: Some(fit.ordering),
            })
        }
        Method::SasPool => Ok(MethodFit {
            estimate: estimate_sas_pool(collection, &SasOptions { tv, ..SasOptions::default() })?,
            ordering: None,
        }),
        Method::UsvtPool => Ok(MethodFit {
            estimate: estimate_usvt_pool(collection, &UsvtOptions::default())?,
            ordering: None,
        }),
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub const RESULT_COLUMNS: [&str; 13] = [
    "graphon_id",
    "M",
    "size_spec",
    "seed",
    "trial",
    "k_setting",
    "k",
    "method",
    "mise",
    "mae",
    "empty_frac",
    "seconds",
    "status",
];

/// Long-format results. With `timing = false` the `seconds` column is
/// omitted, which makes the file a pure function of the configuration.
pub fn write_results_csv(path: &Path, rows: &[ResultRow], timing: bool) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e: csv::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
    let header: Vec<&str> = RESULT_COLUMNS
        .iter()
        .copied()
        .filter(|c| timing || *c != "seconds")
        .collect();
    w.write_record(&header).map_err(wrap)?;
    for r in rows {
        let mut rec = vec![
            r.graphon_id.to_string(),
            r.graph_count.to_string(),
            r.size_spec.clone(),
            r.seed.to_string(),
            r.trial.to_string(),
            r.k_setting.clone(),
            opt(r.k),
            r.method.to_string(),
            opt(r.mise),
            opt(r.mae),
            opt(r.empty_frac),
        ];
        if timing {
            rec.push(r.seconds.to_string());
        }
        rec.push(r.status.clone());
        w.write_record(&rec).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean and sample standard deviation over the trials of one configuration
/// cell. MISE is reported in units of 10⁻³.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub graphon_id: u32,
    pub graph_count: usize,
    pub size_spec: String,
    pub k_setting: String,
    pub method: Method,
    pub trials: usize,
    pub failures: usize,
    pub mise_mean_e3: f64,
    pub mise_sd_e3: f64,
    pub mae_mean: Option<f64>,
    pub k_mean: f64,
    pub seconds_mean: f64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    type Key = (u32, usize, String, String, Method);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: std::collections::HashMap<Key, Vec<&ResultRow>> = Default::default();
    for r in rows {
        let key = (r.graphon_id, r.graph_count, r.size_spec.clone(), r.k_setting.clone(), r.method);
        groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Vec::new()
        });
        groups.get_mut(&key).unwrap().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let ok: Vec<&&ResultRow> = g.iter().filter(|r| r.mise.is_some()).collect();
            let mises: Vec<f64> = ok.iter().map(|r| r.mise.unwrap() * 1e3).collect();
            let maes: Vec<f64> = ok.iter().filter_map(|r| r.mae).collect();
            let ks: Vec<f64> = ok.iter().filter_map(|r| r.k.map(|k| k as f64)).collect();
            let secs: Vec<f64> = g.iter().map(|r| r.seconds).collect();
            let (mise_mean_e3, mise_sd_e3) = mean_sd(&mises);
            SummaryRow {
                graphon_id: key.0,
                graph_count: key.1,
                size_spec: key.2.clone(),
                k_setting: key.3.clone(),
                method: key.4,
                trials: g.len(),
                failures: g.len() - ok.len(),
                mise_mean_e3,
                mise_sd_e3,
                mae_mean: (!maes.is_empty()).then(|| mean_sd(&maes).0),
                k_mean: mean_sd(&ks).0,
                seconds_mean: mean_sd(&secs).0,
            }
        })
        .collect()
}

pub fn write_summary_csv(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e: csv::Error| Error::InvalidArgument(format!("{}: {e}", path.display()));
    w.write_record([
        "graphon_id",
        "M",
        "size_spec",
        "k_setting",
        "method",
        "trials",
        "failures",
        "mise_mean_e-3",
        "mise_sd_e-3",
        "mae_mean",
        "k_mean",
        "seconds_mean",
    ])
    .map_err(wrap)?;
    for s in summary {
        w.write_record([
            s.graphon_id.to_string(),
            s.graph_count.to_string(),
            s.size_spec.clone(),
            s.k_setting.clone(),
            s.method.to_string(),
            s.trials.to_string(),
            s.failures.to_string(),
            format!("{:.4}", s.mise_mean_e3),
            format!("{:.4}", s.mise_sd_e3),
            s.mae_mean.map_or_else(String::new, |m| format!("{m:.5}")),
            format!("{:.2}", s.k_mean),
            format!("{:.5}", s.seconds_mean),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Plain-text table in the `mean ± sd` style, MISE in units of 10⁻³.
pub fn format_summary(summary: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:>3} {:>5} {:>16} {:>5} {:>11} {:>22} {:>8} {:>7} {:>9}\n",
        "id", "M", "sizes", "k", "method", "MISE (x1e-3)", "MAE", "k_used", "seconds"
    );
    for s in summary {
        out.push_str(&format!(
            "{:>3} {:>5} {:>16} {:>5} {:>11} {:>22} {:>8} {:>7.1} {:>9.4}\n",
            s.graphon_id,
            s.graph_count,
            s.size_spec,
            s.k_setting,
            s.method.name(),
            format!("{:.3} ± {:.3}", s.mise_mean_e3, s.mise_sd_e3),
            s.mae_mean.map_or_else(|| "-".into(), |m| format!("{m:.4}")),
            s.k_mean,
            s.seconds_mean,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            graphons: vec![1],
            graph_count: 3,
            sizes: SizeSpec::Fixed(8),
            trials: 1,
            seed: 5,
            methods: vec![Method::Jgs],
            resolution: 50,
            ..Default::default()
        }
    }

    #[test]
    fn size_spec_parsing() {
        assert_eq!("fixed:30".parse::<SizeSpec>().unwrap(), SizeSpec::Fixed(30));
        assert_eq!(
            "uniform:10:100".parse::<SizeSpec>().unwrap(),
            SizeSpec::Uniform { lo: 10, hi: 100 }
        );
        for bad in ["fixed", "fixed:0", "uniform:5:4", "uniform:0:4", "gauss:3", "fixed:x"] {
            assert!(bad.parse::<SizeSpec>().is_err(), "{bad}");
        }
        assert_eq!(SizeSpec::Uniform { lo: 1, hi: 2 }.to_string(), "uniform:1:2");
    }

    #[test]
    fn uniform_sizes_stay_in_range() {
        let mut rng = RngSeed(1).stream(&[]);
        let sizes = SizeSpec::Uniform { lo: 10, hi: 100 }.draw(5000, &mut rng);
        assert!(sizes.iter().all(|n| (10..=100).contains(n)));
        assert!(sizes.contains(&10) && sizes.contains(&100));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!("sba".parse::<Method>(), Err(Error::UnknownMethod(_))));
    }

    #[test]
    fn config_validation() {
        assert!(tiny().validate().is_ok());
        assert!(ExperimentConfig { trials: 0, ..tiny() }.validate().is_err());
        assert!(ExperimentConfig { methods: vec![], ..tiny() }.validate().is_err());
        assert!(ExperimentConfig { graphons: vec![14], ..tiny() }.validate().is_err());
        assert!(ExperimentConfig { sweep: Sweep::K(vec![]), ..tiny() }.validate().is_err());
        assert!(ExperimentConfig { lambda: -1.0, ..tiny() }.validate().is_err());
    }

    #[test]
    fn single_trial_single_row() {
        let rows = run_benchmark(&tiny()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, "ok");
        assert!(rows[0].mise.unwrap() >= 0.0);
        assert!(rows[0].mae.is_some());
    }

    #[test]
    fn row_count_with_sweep() {
        let cfg = ExperimentConfig {
            graphons: vec![1, 10],
            trials: 2,
            methods: vec![Method::Jgs, Method::JgsSmooth],
            sweep: Sweep::K(vec![1, 2, 3]),
            ..tiny()
        };
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), cfg.row_count());
        assert_eq!(rows.len(), 2 * 3 * 2 * 2);
        // nesting order: graphon, level, trial, method
        assert_eq!(rows[0].k, Some(1));
        assert_eq!(rows[1].method, Method::JgsSmooth);
        assert_eq!(rows[2].trial, 1);
        assert_eq!(rows[4].k, Some(2));
        assert_eq!(rows[12].graphon_id, 10);
    }

    #[test]
    fn k_sweep_shares_collections() {
        let cfg = ExperimentConfig {
            sweep: Sweep::K(vec![1, 1]),
            ..tiny()
        };
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows[0].mise, rows[1].mise);
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        // A fixed k above the evaluation resolution cannot be evaluated.
        let cfg = ExperimentConfig {
            k: KChoice::Fixed(60),
            methods: vec![Method::Jgs, Method::SasPool],
            ..tiny()
        };
        let rows = run_benchmark(&cfg).unwrap();
        assert!(rows[0].status.starts_with("error"));
        assert_eq!(rows[1].status, "ok");
        let s = summarize(&rows);
        assert_eq!(s[0].failures, 1);
    }

    #[test]
    fn summary_statistics() {
        let cfg = ExperimentConfig { trials: 3, ..tiny() };
        let rows = run_benchmark(&cfg).unwrap();
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        let m: Vec<f64> = rows.iter().map(|r| r.mise.unwrap() * 1e3).collect();
        let mean = m.iter().sum::<f64>() / 3.0;
        assert!((s[0].mise_mean_e3 - mean).abs() < 1e-12);
        assert!(format_summary(&s).contains("jgs"));
    }
}
