//! Graphon estimation from collections of unaligned networks of heterogeneous
//! sizes.
//!
//! The central estimator is joint graph sorting ([`jgs`]): every node of every
//! graph is ranked by its normalized empirical degree in a single global
//! order, and a block histogram is built from the within-graph dyads only.
//! Around it sit the synthetic graphon zoo and sampler ([`graphon`],
//! [`sampling`]), a total-variation smoother ([`tv`]), two pooled single-graph
//! baselines ([`baselines`]), error metrics ([`eval`]), file formats ([`io`])
//! and the benchmark harness ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod error;
pub mod estimate;
pub mod eval;
pub mod graph;
pub mod graphon;
pub mod io;
pub mod jgs;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod sampling;
pub mod tv;

pub use error::{Error, Result};
pub use graph::{Graph, GraphCollection};
pub use graphon::{AnalyticGraphon, Graphon};
pub use estimate::{EstimateMeta, StepEstimate};
pub use jgs::{estimate_jgs, JgsOptions, JointOrdering, KChoice, Smoothing};
pub use matrix::SquareMatrix;
pub use rng::RngSeed;
pub use sampling::{sample_collection, LatentAssignment};
pub use tv::TvParams;
