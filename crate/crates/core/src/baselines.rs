//! Single-graph baselines pooled over a collection: degree-sorted SAS
//! histograms and USVT spectral estimates. Each graph is estimated on its
//! own, its estimate is degree-sorted and resampled to a common grid, and the
//! grids are averaged with equal weight per graph.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, StepEstimate};
use crate::graph::{Graph, GraphCollection};
use crate::graphon::ascending_order;
use crate::linalg::{jacobi_eigen, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use crate::matrix::SquareMatrix;
use crate::tv::{tv_smooth, TvParams};

fn node_order_by_degree(graph: &Graph) -> Vec<usize> {
    let deg: Vec<f64> = graph.degrees().into_iter().map(|d| d as f64).collect();
    ascending_order(&deg)
}

/// Sorting-and-smoothing on one graph: degree sort, consecutive bins of `h`
/// nodes (the last bin may be smaller), block means of the adjacency without
/// self-pairs, then TV smoothing with `tv`.
pub fn sas_single(graph: &Graph, h: usize, tv: &TvParams) -> Result<SquareMatrix> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("SAS needs n >= 2, got {n}")));
    }
    if h == 0 {
        return Err(Error::InvalidArgument("SAS bin width must be >= 1".into()));
    }
    let h = h.min(n);
    let bins = n.div_ceil(h);
    let mut bin_of = vec![0usize; n];
    for (pos, node) in node_order_by_degree(graph).into_iter().enumerate() {
        bin_of[node] = pos / h;
    }
    let size = |b: usize| -> u64 { (h.min(n - b * h)) as u64 };
    let mut edges = vec![0u64; bins * bins];
    for &(i, j) in graph.edges() {
        let (s, t) = (bin_of[i as usize], bin_of[j as usize]);
        edges[s * bins + t] += 1;
        edges[t * bins + s] += 1;
    }
    let blocks = SquareMatrix::from_fn(bins, |s, t| {
        let dyads = if s == t {
            size(s) * (size(s) - 1)
        } else {
            size(s) * size(t)
        };
        edges[s * bins + t] as f64 / dyads.max(1) as f64
    });
    tv_smooth(&blocks, tv)
}

/// Universal singular value thresholding on one graph: eigenpairs of the
/// adjacency with `|λ| ≥ τ` are kept and the reconstruction is clipped to
/// `[0, 1]`.
pub fn usvt_single(graph: &Graph, tau: f64) -> Result<SquareMatrix> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("USVT needs n >= 2, got {n}")));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!("USVT threshold must be > 0, got {tau}")));
    }
    if graph.edge_count() == 0 {
        return Ok(SquareMatrix::zeros(n));
    }
    let adj = SquareMatrix::from_rows(graph.adjacency().chunks(n).map(<[f64]>::to_vec).collect())
        .expect("adjacency is square");
    let eig = jacobi_eigen(&adj, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
    let mut p = eig.reconstruct(|lambda| lambda.abs() >= tau);
    p.symmetrize();
    p.clamp_unit();
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledEstimate {
    pub grid: SquareMatrix,
    pub per_graph: Option<Vec<SquareMatrix>>,
}

impl PooledEstimate {
    pub fn resolution(&self) -> usize {
        self.grid.dim()
    }
}

/// Degree-sorts each estimate (rows and columns by ascending row mean),
/// resamples it to `r × r`, and averages with equal weights.
pub fn pool_estimates(estimates: &[SquareMatrix], r: usize, keep_per_graph: bool) -> Result<PooledEstimate> {
    if estimates.is_empty() {
        return Err(Error::InvalidArgument("nothing to pool".into()));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("pool resolution must be >= 1".into()));
    }
    let mut grid = SquareMatrix::zeros(r);
    for e in estimates {
        let sorted = e.permuted(&ascending_order(&e.row_means()));
        for (acc, x) in grid
            .as_mut_slice()
            .iter_mut()
            .zip(sorted.resample(r).as_slice())
        {
            *acc += x;
        }
    }
    let w = estimates.len() as f64;
    for x in grid.as_mut_slice() {
        *x /= w;
    }
    grid.symmetrize();
    grid.clamp_unit();
    Ok(PooledEstimate {
        grid,
        per_graph: keep_per_graph.then(|| estimates.to_vec()),
    })
}

/// How the USVT threshold `τ = factor · √n` picks its `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdScale {
    /// Each graph's own size.
    #[default]
    OwnSize,
    /// The largest graph in the collection.
    MaxSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SasOptions {
    /// Bin width; `None` means `⌈ln n_max⌉`.
    pub h: Option<usize>,
    pub tv: TvParams,
    /// Pooling resolution; `None` means `n_max`.
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UsvtOptions {
    pub factor: f64,
    pub scale: ThresholdScale,
    pub resolution: Option<usize>,
}

impl Default for UsvtOptions {
    fn default() -> Self {
        Self {
            factor: 0.2,
            scale: ThresholdScale::OwnSize,
            resolution: None,
        }
    }
}

fn pooled_meta(collection: &GraphCollection, r: usize, method: &str, skipped: usize) -> EstimateMeta {
    EstimateMeta {
        k: r,
        total_nodes: collection.total_nodes(),
        graph_count: collection.graph_count(),
        observed_dyads: collection.observed_dyads(),
        method: method.to_owned(),
        params: Default::default(),
        seed: None,
        elapsed_seconds: 0.0,
        empty_blocks: 0,
    }
    .param("pool_resolution", r as u64)
    .param("skipped_graphs", skipped as u64)
}

fn eligible(collection: &GraphCollection) -> Result<(Vec<&Graph>, usize)> {
    let graphs: Vec<&Graph> = collection
        .graphs()
        .iter()
        .filter(|g| g.node_count() >= 2)
        .collect();
    if graphs.is_empty() {
        return Err(Error::InvalidArgument(
            "pooled baselines need at least one graph with >= 2 nodes".into(),
        ));
    }
    let skipped = collection.graph_count() - graphs.len();
    Ok((graphs, skipped))
}

pub fn estimate_sas_pool(collection: &GraphCollection, options: &SasOptions) -> Result<StepEstimate> {
    let start = Instant::now();
    let (graphs, skipped) = eligible(collection)?;
    let n_max = collection.max_size();
    let h = options
        .h
        .unwrap_or_else(|| ((n_max as f64).ln().ceil() as usize).max(1));
    let r = options.resolution.unwrap_or(n_max);
    let per_graph = graphs
        .par_iter()
        .map(|g| sas_single(g, h, &options.tv))
        .collect::<Result<Vec<_>>>()?;
    let pooled = pool_estimates(&per_graph, r, false)?;
    let mut meta = pooled_meta(collection, r, "sas-pool", skipped)
        .param("h", h as u64)
        .param("lambda", options.tv.lambda);
    meta.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(StepEstimate {
        values: pooled.grid,
        meta,
    })
}

pub fn estimate_usvt_pool(collection: &GraphCollection, options: &UsvtOptions) -> Result<StepEstimate> {
    let start = Instant::now();
    let (graphs, skipped) = eligible(collection)?;
    let n_max = collection.max_size();
    let r = options.resolution.unwrap_or(n_max);
    let per_graph = graphs
        .par_iter()
        .map(|g| {
            let n = match options.scale {
                ThresholdScale::OwnSize => g.node_count(),
                ThresholdScale::MaxSize => n_max,
            };
            usvt_single(g, options.factor * (n as f64).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = pool_estimates(&per_graph, r, false)?;
    let mut meta = pooled_meta(collection, r, "usvt-pool", skipped)
        .param("tau_factor", options.factor)
        .param("tau_scale", match options.scale {
            ThresholdScale::OwnSize => "n",
            ThresholdScale::MaxSize => "n_max",
        });
    meta.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(StepEstimate {
        values: pooled.grid,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_tv() -> TvParams {
        TvParams::with_lambda(0.0)
    }

    #[test]
    fn sas_complete_graph() {
        let est = sas_single(&Graph::complete(4), 2, &no_tv()).unwrap();
        assert_eq!(est, SquareMatrix::filled(2, 1.0));
        let est = sas_single(&Graph::complete(4), 2, &TvParams::default()).unwrap();
        assert!(est.max_abs_diff(&SquareMatrix::filled(2, 1.0)) < 1e-12);
    }

    #[test]
    fn sas_empty_graph() {
        for h in [1, 2, 3, 10] {
            let est = sas_single(&Graph::empty(7), h, &TvParams::default()).unwrap();
            assert!(est.as_slice().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn sas_wide_bin_is_global_density() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let est = sas_single(&g, 10, &no_tv()).unwrap();
        assert_eq!(est.as_slice(), &[4.0 / 12.0]);
    }

    #[test]
    fn sas_recovers_disjoint_blocks() {
        // Two disjoint 20-cliques labelled contiguously. Every degree is 19,
        // so the index tie-break keeps each clique in its own bin.
        let mut edges = Vec::new();
        for a in 0..20 {
            for b in (a + 1)..20 {
                edges.push((a, b));
            }
        }
        for a in 20..40 {
            for b in (a + 1)..40 {
                edges.push((a, b));
            }
        }
        let g = Graph::new(40, edges).unwrap();
        let est = sas_single(&g, 20, &no_tv()).unwrap();
        let expect = SquareMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(est, expect);
    }

    #[test]
    fn sas_rejects_tiny_graphs() {
        assert!(sas_single(&Graph::empty(1), 1, &no_tv()).is_err());
        assert!(sas_single(&Graph::empty(3), 0, &no_tv()).is_err());
    }

    #[test]
    fn usvt_k3_is_exact() {
        let p = usvt_single(&Graph::complete(3), 0.2 * 3f64.sqrt()).unwrap();
        let a = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert!(p.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn usvt_empty_and_overthreshold() {
        assert_eq!(usvt_single(&Graph::empty(5), 1.0).unwrap(), SquareMatrix::zeros(5));
        // K_n has spectrum {n − 1, −1}; a threshold above n − 1 drops everything.
        let p = usvt_single(&Graph::complete(6), 5.5).unwrap();
        assert_eq!(p, SquareMatrix::zeros(6));
        assert!(usvt_single(&Graph::complete(6), 0.0).is_err());
    }

    #[test]
    fn pooling_examples() {
        let a = SquareMatrix::from_rows(vec![vec![0.1, 0.2], vec![0.2, 0.9]]).unwrap();
        let p = pool_estimates(&[a.clone(), a.clone()], 4, true).unwrap();
        assert_eq!(p.grid, a.resample(4));
        assert_eq!(p.per_graph.unwrap().len(), 2);

        let p = pool_estimates(&[SquareMatrix::filled(3, 0.2), SquareMatrix::filled(5, 0.6)], 7, false).unwrap();
        assert!(p.grid.max_abs_diff(&SquareMatrix::filled(7, 0.4)) < 1e-15);

        let p = pool_estimates(&[SquareMatrix::filled(1, 0.5)], 4, false).unwrap();
        assert_eq!(p.grid, SquareMatrix::filled(4, 0.5));
        assert!(pool_estimates(&[], 4, false).is_err());
    }

    #[test]
    fn pooling_degree_sorts_inputs() {
        let dec = SquareMatrix::from_rows(vec![vec![0.9, 0.2], vec![0.2, 0.1]]).unwrap();
        let inc = SquareMatrix::from_rows(vec![vec![0.1, 0.2], vec![0.2, 0.9]]).unwrap();
        let p = pool_estimates(&[dec], 2, false).unwrap();
        assert_eq!(p.grid, inc);
    }

    #[test]
    fn pooled_estimators_on_empty_graphs() {
        let c = GraphCollection::new(vec![Graph::empty(6), Graph::empty(4), Graph::empty(1)]);
        let usvt = estimate_usvt_pool(&c, &UsvtOptions::default()).unwrap();
        assert!(usvt.values.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(usvt.meta.params["skipped_graphs"], 1);
        let sas = estimate_sas_pool(&c, &SasOptions::default()).unwrap();
        assert!(sas.values.as_slice().iter().all(|&x| x == 0.0));
        assert_eq!(sas.k(), 6);
        assert_eq!(sas.meta.params["h"], 2);
    }
}
