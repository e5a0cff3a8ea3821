use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphCollection};
use crate::graphon::Graphon;
use crate::rng::RngSeed;

/// True latent positions of every node, per graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatentAssignment {
    positions: Vec<Vec<f64>>,
}

impl LatentAssignment {
    pub fn new(positions: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(x) = positions
            .iter()
            .flatten()
            .find(|x| !(0.0..=1.0).contains(*x))
        {
            return Err(Error::InvalidArgument(format!(
                "latent position {x} outside [0, 1]"
            )));
        }
        Ok(Self { positions })
    }

    pub fn graphs(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn graph(&self, m: usize) -> &[f64] {
        &self.positions[m]
    }

    pub fn graph_count(&self) -> usize {
        self.positions.len()
    }

    pub fn total_nodes(&self) -> usize {
        self.positions.iter().map(Vec::len).sum()
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.positions
    }

    pub(crate) fn check_matches(&self, sizes: &[usize]) -> Result<()> {
        let mine: Vec<usize> = self.positions.iter().map(Vec::len).collect();
        if mine != sizes {
            return Err(Error::SizeMismatch(format!(
                "latent positions cover graph sizes {mine:?}, collection has {sizes:?}"
            )));
        }
        Ok(())
    }
}

/// Samples one graph per entry of `sizes`: latent positions i.i.d. uniform on
/// `[0, 1]`, then each pair `i < j` independently joined with probability
/// `W(Uᵢ, Uⱼ)`. Graph `m` draws from its own stream derived from
/// `(seed, m)`, so the result does not depend on the thread schedule.
pub fn sample_collection(
    graphon: &Graphon,
    sizes: &[usize],
    seed: RngSeed,
) -> Result<(GraphCollection, LatentAssignment)> {
    if let Some(m) = sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidGraph {
            graph: m,
            reason: "requested size 0".into(),
        });
    }
    let sampled: Vec<(Graph, Vec<f64>)> = sizes
        .par_iter()
        .enumerate()
        .map(|(m, &n)| sample_graph(graphon, n, seed, m))
        .collect();
    let (graphs, latent): (Vec<_>, Vec<_>) = sampled.into_iter().unzip();
    Ok((GraphCollection::new(graphs), LatentAssignment { positions: latent }))
}

fn sample_graph(graphon: &Graphon, n: usize, seed: RngSeed, m: usize) -> (Graph, Vec<f64>) {
    let mut rng = seed.graph_stream(m);
    let latent: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = graphon.eval_unchecked(latent[i], latent[j]);
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    (Graph::from_sorted_unique(n, edges), latent)
}
