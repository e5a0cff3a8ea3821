//! Error metrics against a known truth.

use crate::error::{Error, Result};
use crate::graphon::{Graphon, StepGraphon};
use crate::jgs::JointOrdering;
use crate::matrix::SquareMatrix;
use crate::sampling::LatentAssignment;

pub const DEFAULT_RESOLUTION: usize = 1000;

/// Integrated squared error of a step estimate against the degree-sorted
/// canonical truth on an `r × r` grid.
pub fn mise(estimate: &SquareMatrix, truth: &Graphon, r: usize) -> Result<f64> {
    let truth_grid = match truth {
        Graphon::Step(s) => s.blocks(),
        Graphon::Analytic(_) => 1,
    };
    if r < estimate.dim().max(truth_grid) {
        return Err(Error::InvalidArgument(format!(
            "resolution {r} is coarser than the estimate ({}) or truth ({truth_grid}) grid",
            estimate.dim()
        )));
    }
    let canonical = truth.canonical_rearrangement(r)?;
    mise_against(estimate, &canonical)
}

/// As [`mise`], with the canonical truth already computed; the resolution is
/// the canonical grid's size.
pub fn mise_against(estimate: &SquareMatrix, canonical: &StepGraphon) -> Result<f64> {
    let r = canonical.blocks();
    let k = estimate.dim();
    if k == 0 {
        return Err(Error::InvalidArgument("empty estimate".into()));
    }
    if k > r {
        return Err(Error::InvalidArgument(format!(
            "estimate grid {k} is finer than the evaluation resolution {r}"
        )));
    }
    let cells = crate::matrix::midpoint_cells(k, r);
    let truth = canonical.grid();
    let mut total = 0.0;
    for a in 0..r {
        let est_row = estimate.row(cells[a]);
        let truth_row = truth.row(a);
        let mut row_sum = 0.0;
        for b in 0..r {
            let d = est_row[cells[b]] - truth_row[b];
            row_sum += d * d;
        }
        total += row_sum;
    }
    Ok(total / (r * r) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaeMode {
    #[default]
    Direct,
    /// `min(MAE(Û, U), MAE(Û, 1 − U))`, for graphons with decreasing degree.
    OrientationFree,
}

/// `(1/N) Σ |Û − U|` over all nodes.
pub fn mae_latent(estimated: &[Vec<f64>], truth: &LatentAssignment, mode: MaeMode) -> Result<f64> {
    let sizes: Vec<usize> = estimated.iter().map(Vec::len).collect();
    truth.check_matches(&sizes)?;
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("no nodes to compare".into()));
    }
    let pairs = || estimated.iter().flatten().zip(truth.graphs().iter().flatten());
    let direct = pairs().map(|(e, u)| (e - u).abs()).sum::<f64>() / n as f64;
    Ok(match mode {
        MaeMode::Direct => direct,
        MaeMode::OrientationFree => {
            let flipped = pairs().map(|(e, u)| (e - (1.0 - u)).abs()).sum::<f64>() / n as f64;
            direct.min(flipped)
        }
    })
}

/// High-probability bound on `|Û − U|` for a node of graph `target`:
///
/// ```text
/// η = (2 / L1) (ε_target + (1/N) Σ_{other nodes} ε_node) + ε_N
/// ε_node = √(ln(2/δ) / (2 (n_graph − 1))),  ε_N = √(ln(2/δ) / (2N))
/// ```
pub fn eta_bound(sizes: &[usize], target: usize, delta: f64, l1: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if l1.is_nan() || l1 <= 0.0 {
        return Err(Error::InvalidArgument(format!("L1 must be > 0, got {l1}")));
    }
    if target >= sizes.len() {
        return Err(Error::InvalidArgument(format!(
            "target graph {target} out of range for {} graphs",
            sizes.len()
        )));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("eta bound needs every n >= 2, got {n}")));
    }
    let log_term = (2.0 / delta).ln();
    let eps = |n: usize| (log_term / (2.0 * (n as f64 - 1.0))).sqrt();
    let total: usize = sizes.iter().sum();
    let all: f64 = sizes.iter().map(|&n| n as f64 * eps(n)).sum();
    let own = eps(sizes[target]);
    let eps_total = (log_term / (2.0 * total as f64)).sqrt();
    Ok(2.0 / l1 * (own + (all - own) / total as f64) + eps_total)
}

/// Mean of `|r̂ − r| / N`, where the oracle rank `r` of a node counts the
/// nodes whose true degree `g(U)` does not exceed its own.
pub fn rank_discrepancy(ordering: &JointOrdering, truth: &LatentAssignment, graphon: &Graphon) -> Result<f64> {
    truth.check_matches(&ordering.graph_sizes())?;
    let n = ordering.total_nodes();
    let degrees: Vec<Vec<f64>> = truth
        .graphs()
        .iter()
        .map(|us| {
            us.iter()
                .map(|&u| graphon.degree_unchecked(u, DEFAULT_RESOLUTION))
                .collect()
        })
        .collect();
    let mut sorted: Vec<f64> = degrees.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for (m, gs) in degrees.iter().enumerate() {
        for (i, &g) in gs.iter().enumerate() {
            let oracle = sorted.partition_point(|&x| x <= g);
            let est = ordering.rank(m, i) as usize;
            total += est.abs_diff(oracle) as f64;
        }
    }
    Ok(total / (n as f64 * n as f64))
}

/// One evaluated estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mise: f64,
    pub mae_latent: Option<f64>,
    pub empty_block_fraction: f64,
    pub elapsed_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jgs::{joint_sort, TieBreak};

    #[test]
    fn mise_examples() {
        let half = Graphon::constant(0.5).unwrap();
        assert_eq!(mise(&SquareMatrix::filled(3, 0.5), &half, 30).unwrap(), 0.0);
        let c = Graphon::constant(0.7).unwrap();
        assert!((mise(&SquareMatrix::zeros(4), &c, 8).unwrap() - 0.49).abs() < 1e-12);

        let r = 64;
        let w1 = Graphon::analytic(1).unwrap();
        let grid = w1.midpoint_grid(r);
        assert!(mise(&grid, &w1, r).unwrap() < 1e-12);
    }

    #[test]
    fn mise_rejects_coarse_resolution() {
        let w = Graphon::analytic(1).unwrap();
        assert!(mise(&SquareMatrix::zeros(10), &w, 5).is_err());
    }

    #[test]
    fn mise_is_stable_under_exact_refinement() {
        let truth = Graphon::step(
            SquareMatrix::from_rows(vec![
                vec![0.8, 0.1, 0.3],
                vec![0.1, 0.2, 0.4],
                vec![0.3, 0.4, 0.6],
            ])
            .unwrap(),
        )
        .unwrap();
        let est = SquareMatrix::from_rows(vec![vec![0.2, 0.3], vec![0.3, 0.7]]).unwrap();
        let a = mise(&est, &truth, 6).unwrap();
        let b = mise(&est, &truth, 12).unwrap();
        let c = mise(&est, &truth, 600).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
    }

    #[test]
    fn mae_examples() {
        let truth = LatentAssignment::new(vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(mae_latent(&[vec![0.0, 1.0]], &truth, MaeMode::Direct).unwrap(), 0.0);
        assert_eq!(mae_latent(&[vec![0.5, 0.5]], &truth, MaeMode::Direct).unwrap(), 0.5);
        assert_eq!(mae_latent(&[vec![1.0, 0.0]], &truth, MaeMode::Direct).unwrap(), 1.0);
        assert_eq!(mae_latent(&[vec![1.0, 0.0]], &truth, MaeMode::OrientationFree).unwrap(), 0.0);
        assert!(mae_latent(&[vec![0.5]], &truth, MaeMode::Direct).is_err());
    }

    #[test]
    fn eta_examples() {
        let delta = 2.0 / std::f64::consts::E;
        let eta = eta_bound(&[101], 0, delta, 1.0).unwrap();
        // 2 · √(1/200) · (1 + 100/101) + √(1/202)
        let hand = 2.0 * (1.0f64 / 200.0).sqrt() * (1.0 + 100.0 / 101.0) + (1.0f64 / 202.0).sqrt();
        assert!((eta - hand).abs() < 1e-15);
        assert!((eta - 0.3518).abs() < 1e-4);

        let far = eta_bound(&[101], 0, delta, 1e12).unwrap();
        assert!((far - (1.0f64 / 202.0).sqrt()).abs() < 1e-10);
        assert!(eta_bound(&[101], 0, 2.0, 1.0).is_err());
        assert!(eta_bound(&[101], 0, 0.1, 0.0).is_err());
        assert!(eta_bound(&[1, 5], 1, 0.1, 1.0).is_err());
        assert!(eta_bound(&[5], 1, 0.1, 1.0).is_err());
    }

    #[test]
    fn eta_monotonicity() {
        let base = eta_bound(&[50, 80], 0, 0.05, 0.5).unwrap();
        assert!(eta_bound(&[60, 80], 0, 0.05, 0.5).unwrap() < base);
        assert!(eta_bound(&[50, 90], 0, 0.05, 0.5).unwrap() < base);
        assert!(eta_bound(&[50, 80, 70], 0, 0.05, 0.5).unwrap() < base);
        assert!(eta_bound(&[50, 80], 0, 0.01, 0.5).unwrap() > base);
    }

    #[test]
    fn rank_discrepancy_examples() {
        let w = Graphon::analytic(1).unwrap();
        let truth = LatentAssignment::new(vec![vec![0.2, 0.9]]).unwrap();
        let agree = joint_sort(&[vec![0.1, 0.4]], TieBreak::Index).unwrap();
        assert_eq!(rank_discrepancy(&agree, &truth, &w).unwrap(), 0.0);
        let reversed = joint_sort(&[vec![0.4, 0.1]], TieBreak::Index).unwrap();
        assert_eq!(rank_discrepancy(&reversed, &truth, &w).unwrap(), 0.5);
    }
}
