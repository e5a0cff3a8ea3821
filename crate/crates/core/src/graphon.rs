//! Graphon representations: the thirteen synthetic benchmark graphons and
//! step functions on a regular `k × k` partition of the unit square.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// One of the thirteen closed-form benchmark graphons, numbered 1..=13.
///
/// Ids 1–9 have monotone degree functions; 10–13 do not. Ids 12 and 13 are
/// two-block models on the halves of `[0, 1]`: id 12 puts 0.8 on the two
/// diagonal blocks, id 13 on the two off-diagonal blocks, 0 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnalyticGraphon(u32);

impl AnalyticGraphon {
    pub const ALL: [u32; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

    pub fn new(id: u32) -> Result<Self> {
        if (1..=13).contains(&id) {
            Ok(Self(id))
        } else {
            Err(Error::UnknownGraphon(id))
        }
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn is_monotone(self) -> bool {
        self.0 <= 9
    }

    pub fn formula(self) -> &'static str {
        match self.0 {
            1 => "u v",
            2 => "exp(-(u^0.7 + v^0.7))",
            3 => "(u^2 + v^2 + sqrt(u) + sqrt(v)) / 4",
            4 => "(u + v) / 2",
            5 => "1 / (1 + exp(-2 (u^2 + v^2)))",
            6 => "1 / (1 + exp(-(max(u,v)^2 + min(u,v)^4)))",
            7 => "exp(-max(u,v)^0.75)",
            8 => "exp(-(min(u,v) + sqrt(u) + sqrt(v)) / 2)",
            9 => "log(1 + max(u,v))",
            10 => "|u - v|",
            11 => "1 - |u - v|",
            12 => "0.8 on [0,1/2)^2 and [1/2,1]^2, else 0",
            13 => "0.8 on [0,1/2)x[1/2,1] and [1/2,1]x[0,1/2), else 0",
            _ => unreachable!(),
        }
    }

    /// Evaluates without domain checks. Arguments are put in ascending order
    /// first so the result is bit-for-bit symmetric.
    pub fn eval_unchecked(self, u: f64, v: f64) -> f64 {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        match self.0 {
            1 => lo * hi,
            2 => (-(lo.powf(0.7) + hi.powf(0.7))).exp(),
            3 => 0.25 * (lo * lo + hi * hi + lo.sqrt() + hi.sqrt()),
            4 => 0.5 * (lo + hi),
            5 => 1.0 / (1.0 + (-2.0 * (lo * lo + hi * hi)).exp()),
            6 => 1.0 / (1.0 + (-(hi * hi + lo.powi(4))).exp()),
            7 => (-hi.powf(0.75)).exp(),
            8 => (-0.5 * (lo + lo.sqrt() + hi.sqrt())).exp(),
            9 => hi.ln_1p(),
            10 => hi - lo,
            11 => 1.0 - (hi - lo),
            12 => {
                if (lo < 0.5) == (hi < 0.5) {
                    0.8
                } else {
                    0.0
                }
            }
            13 => {
                if (lo < 0.5) != (hi < 0.5) {
                    0.8
                } else {
                    0.0
                }
            }
            _ => unreachable!(),
        }
    }
}

/// Piecewise-constant graphon on a regular `k × k` grid. Cells are
/// half-open `[s/k, (s+1)/k)` except the last, which is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    grid: SquareMatrix,
}

impl StepGraphon {
    /// Accepts a non-empty grid whose entries lie in `[0, 1]` and which is
    /// symmetric to within `1e-12`.
    pub fn new(grid: SquareMatrix) -> Result<Self> {
        if grid.dim() == 0 {
            return Err(Error::InvalidArgument("step graphon grid is empty".into()));
        }
        if let Some(&x) = grid
            .as_slice()
            .iter()
            .find(|x| !(0.0..=1.0).contains(*x))
        {
            return Err(Error::InvalidArgument(format!(
                "step graphon value {x} outside [0, 1]"
            )));
        }
        let asym = grid.max_asymmetry();
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "step graphon grid is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self { grid })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(SquareMatrix::filled(1, value))
    }

    pub fn grid(&self) -> &SquareMatrix {
        &self.grid
    }

    pub fn into_grid(self) -> SquareMatrix {
        self.grid
    }

    pub fn blocks(&self) -> usize {
        self.grid.dim()
    }

    #[inline]
    pub fn cell_of(&self, x: f64) -> usize {
        cell_index(x, self.grid.dim())
    }
}

/// Index of the half-open cell of `[0, 1]` split into `k` parts that holds `x`.
#[inline]
pub fn cell_index(x: f64, k: usize) -> usize {
    ((x * k as f64) as usize).min(k - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Graphon {
    Analytic(AnalyticGraphon),
    Step(StepGraphon),
}

impl Graphon {
    pub fn analytic(id: u32) -> Result<Self> {
        AnalyticGraphon::new(id).map(Graphon::Analytic)
    }

    pub fn step(grid: SquareMatrix) -> Result<Self> {
        StepGraphon::new(grid).map(Graphon::Step)
    }

    pub fn constant(value: f64) -> Result<Self> {
        StepGraphon::constant(value).map(Graphon::Step)
    }

    pub fn analytic_id(&self) -> Option<u32> {
        match self {
            Graphon::Analytic(a) => Some(a.id()),
            Graphon::Step(_) => None,
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.eval_unchecked(u, v))
    }

    #[inline]
    pub fn eval_unchecked(&self, u: f64, v: f64) -> f64 {
        match self {
            Graphon::Analytic(a) => a.eval_unchecked(u, v),
            Graphon::Step(s) => s.grid.get(s.cell_of(u), s.cell_of(v)),
        }
    }

    /// Normalized degree `g(u) = ∫₀¹ W(u, v) dv`. Analytic graphons use the
    /// midpoint rule on `resolution` cells; step graphons are integrated
    /// exactly (the mean of the row containing `u`).
    pub fn degree(&self, u: f64, resolution: usize) -> Result<f64> {
        check_unit("u", u)?;
        if resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be >= 1".into()));
        }
        Ok(self.degree_unchecked(u, resolution))
    }

    pub(crate) fn degree_unchecked(&self, u: f64, resolution: usize) -> f64 {
        match self {
            Graphon::Analytic(a) => {
                let h = 1.0 / resolution as f64;
                (0..resolution)
                    .map(|j| a.eval_unchecked(u, (j as f64 + 0.5) * h))
                    .sum::<f64>()
                    * h
            }
            Graphon::Step(s) => {
                let row = s.grid.row(s.cell_of(u));
                row.iter().sum::<f64>() / row.len() as f64
            }
        }
    }

    /// Values of `W` at the midpoints of a `resolution × resolution` grid.
    pub fn midpoint_grid(&self, resolution: usize) -> SquareMatrix {
        let h = 1.0 / resolution as f64;
        let mut g = SquareMatrix::zeros(resolution);
        for i in 0..resolution {
            let u = (i as f64 + 0.5) * h;
            for j in i..resolution {
                let w = self.eval_unchecked(u, (j as f64 + 0.5) * h);
                g.set(i, j, w);
                g.set(j, i, w);
            }
        }
        g
    }

    /// Degree-increasing canonical representative, discretized: the midpoint
    /// grid with rows and columns stably sorted by ascending row mean.
    pub fn canonical_rearrangement(&self, resolution: usize) -> Result<StepGraphon> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(
                "canonical rearrangement needs resolution >= 2".into(),
            ));
        }
        let grid = self.midpoint_grid(resolution);
        let order = ascending_order(&grid.row_means());
        Ok(StepGraphon {
            grid: grid.permuted(&order),
        })
    }
}

/// Stable argsort in ascending order.
pub(crate) fn ascending_order(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    order
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { name, value })
    }
}

impl fmt::Display for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Graphon::Analytic(a) => write!(f, "graphon {} ({})", a.id(), a.formula()),
            Graphon::Step(s) => write!(f, "step graphon {}x{}", s.blocks(), s.blocks()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn w(id: u32) -> Graphon {
        Graphon::analytic(id).unwrap()
    }

    #[test]
    fn table_values() {
        assert_eq!(w(1).eval(0.5, 0.5).unwrap(), 0.25);
        assert!((w(10).eval(0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(w(4).eval(0.0, 1.0).unwrap(), 0.5);
        assert!((w(11).eval(0.2, 0.7).unwrap() - 0.5).abs() < 1e-15);
        assert!((w(9).eval(0.1, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((w(7).eval(0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_block_models() {
        assert_eq!(w(12).eval(0.1, 0.2).unwrap(), 0.8);
        assert_eq!(w(12).eval(0.6, 1.0).unwrap(), 0.8);
        assert_eq!(w(12).eval(0.1, 0.5).unwrap(), 0.0);
        assert_eq!(w(13).eval(0.1, 0.5).unwrap(), 0.8);
        assert_eq!(w(13).eval(0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(w(1).eval(-0.1, 0.5), Err(Error::Domain { name: "u", .. })));
        assert!(matches!(w(1).eval(0.5, 1.5), Err(Error::Domain { name: "v", .. })));
        assert!(w(1).eval(f64::NAN, 0.5).is_err());
        assert!(Graphon::analytic(0).is_err());
        assert!(Graphon::analytic(14).is_err());
    }

    #[test]
    fn analytic_graphons_are_symmetric_and_bounded() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for id in AnalyticGraphon::ALL {
            let g = w(id);
            for _ in 0..10_000 {
                let (u, v): (f64, f64) = (rng.random(), rng.random());
                let a = g.eval(u, v).unwrap();
                assert_eq!(a, g.eval(v, u).unwrap(), "id {id}");
                assert!((0.0..=1.0).contains(&a), "id {id}: {a}");
            }
            for (u, v) in [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.5)] {
                assert!((0.0..=1.0).contains(&g.eval(u, v).unwrap()));
            }
        }
    }

    #[test]
    fn step_cells_are_half_open_with_closed_last_cell() {
        let grid = SquareMatrix::from_rows(vec![vec![0.1, 0.2], vec![0.2, 0.3]]).unwrap();
        let g = Graphon::step(grid).unwrap();
        assert_eq!(g.eval(0.49, 0.49).unwrap(), 0.1);
        assert_eq!(g.eval(0.5, 0.0).unwrap(), 0.2);
        assert_eq!(g.eval(1.0, 1.0).unwrap(), 0.3);
    }

    #[test]
    fn step_validation() {
        assert!(Graphon::step(SquareMatrix::zeros(0)).is_err());
        assert!(Graphon::step(SquareMatrix::filled(2, 1.5)).is_err());
        let asym = SquareMatrix::from_rows(vec![vec![0.1, 0.2], vec![0.3, 0.3]]).unwrap();
        assert!(Graphon::step(asym).is_err());
    }

    #[test]
    fn degree_examples() {
        // ∫ 0.5 v dv = 0.25 and ∫ v / 2 dv = 0.25.
        assert!((w(1).degree(0.5, 1000).unwrap() - 0.25).abs() < 1e-6);
        assert!((w(4).degree(0.0, 1000).unwrap() - 0.25).abs() < 1e-6);
        assert_eq!(Graphon::constant(0.3).unwrap().degree(0.7, 5).unwrap(), 0.3);
        assert!(w(1).degree(0.5, 0).is_err());
    }

    #[test]
    fn step_degree_is_exact_row_average() {
        let grid = SquareMatrix::from_rows(vec![vec![0.1, 0.3], vec![0.3, 0.9]]).unwrap();
        let g = Graphon::step(grid).unwrap();
        assert!((g.degree(0.2, 1).unwrap() - 0.2).abs() < 1e-15);
        assert!((g.degree(1.0, 1).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn midpoint_quadrature_converges() {
        // g(u) for id 2 at u: exp(-u^0.7) ∫ exp(-v^0.7) dv; the reference is a
        // very fine midpoint rule.
        let g = w(2);
        let u = 0.3;
        let reference = g.degree(u, 2_000_000).unwrap();
        let mut prev = f64::INFINITY;
        for res in [50, 100, 200, 400] {
            let err = (g.degree(u, res).unwrap() - reference).abs();
            assert!(err < prev / 1.9, "res {res}: {err} vs {prev}");
            prev = err;
        }
        // Linear integrands are integrated exactly by the midpoint rule.
        for id in [1, 4] {
            for res in [1, 2, 4, 8] {
                let exact = if id == 1 { 0.35 } else { 0.5 * (0.7 + 0.5) };
                assert!((w(id).degree(0.7, res).unwrap() - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_rearrangement_of_increasing_graphon_is_identity() {
        let g = w(1);
        let canon = g.canonical_rearrangement(4).unwrap();
        assert_eq!(canon.grid(), &g.midpoint_grid(4));
    }

    #[test]
    fn canonical_rearrangement_reverses_decreasing_graphon() {
        let res = 1000;
        let g = w(2);
        let canon = g.canonical_rearrangement(res).unwrap();
        let h = 1.0 / res as f64;
        let brute = SquareMatrix::from_fn(res, |a, b| {
            g.eval_unchecked(1.0 - (a as f64 + 0.5) * h, 1.0 - (b as f64 + 0.5) * h)
        });
        assert!(canon.grid().max_abs_diff(&brute) < 1e-12);
    }

    #[test]
    fn canonical_rearrangement_of_constant_is_identity() {
        let g = Graphon::constant(0.4).unwrap();
        let canon = g.canonical_rearrangement(8).unwrap();
        assert_eq!(canon.grid(), &SquareMatrix::filled(8, 0.4));
        assert!(g.canonical_rearrangement(1).is_err());
    }

    #[test]
    fn canonical_rearrangement_sorts_row_means() {
        for id in AnalyticGraphon::ALL {
            let canon = w(id).canonical_rearrangement(64).unwrap();
            let means = canon.grid().row_means();
            assert!(means.windows(2).all(|p| p[0] <= p[1] + 1e-12), "id {id}");
            assert!(canon.grid().is_symmetric());
        }
    }
}
