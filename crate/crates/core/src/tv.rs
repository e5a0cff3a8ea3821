//! Total-variation (ROF) denoising of a square matrix by Chambolle's dual
//! projection iteration.
//!
//! Solves `min_u ‖u − f‖² / (2λ) + TV(u)` with isotropic TV built from
//! forward differences and a reflecting boundary. With `p` the dual field,
//!
//! ```text
//! g      = ∇(div p − f / λ)
//! p_next = (p + τ g) / (1 + τ |g|)
//! u      = f − λ div p
//! ```

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvParams {
    pub lambda: f64,
    pub tau: f64,
    pub max_iters: usize,
    /// Stop once the largest dual update falls below this.
    pub tol: f64,
}

impl TvParams {
    pub const DEFAULT_LAMBDA: f64 = 0.05;

    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "TV lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tau > 0.0 && self.tau <= 0.25) {
            return Err(Error::InvalidArgument(format!(
                "TV step tau must lie in (0, 0.25], got {}",
                self.tau
            )));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument(format!("TV tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

impl Default for TvParams {
    fn default() -> Self {
        Self {
            lambda: Self::DEFAULT_LAMBDA,
            tau: 0.25,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

/// Raw solver output before symmetrization and clipping.
#[derive(Debug, Clone)]
pub struct TvOutcome {
    pub u: SquareMatrix,
    pub iterations: usize,
    /// ROF energy of the primal iterate: the input first, then one entry per
    /// iteration.
    pub energies: Vec<f64>,
}

/// Forward-difference gradient with zero flux across the last row/column.
fn gradient(u: &SquareMatrix, gx: &mut [f64], gy: &mut [f64]) {
    let n = u.dim();
    for i in 0..n {
        for j in 0..n {
            let c = u.get(i, j);
            gx[i * n + j] = if i + 1 < n { u.get(i + 1, j) - c } else { 0.0 };
            gy[i * n + j] = if j + 1 < n { u.get(i, j + 1) - c } else { 0.0 };
        }
    }
}

/// Negative adjoint of [`gradient`]; its entries sum to zero.
fn divergence(px: &[f64], py: &[f64], n: usize, out: &mut SquareMatrix) {
    for i in 0..n {
        for j in 0..n {
            let at = i * n + j;
            let dx = if n == 1 {
                0.0
            } else if i == 0 {
                px[at]
            } else if i + 1 == n {
                -px[at - n]
            } else {
                px[at] - px[at - n]
            };
            let dy = if n == 1 {
                0.0
            } else if j == 0 {
                py[at]
            } else if j + 1 == n {
                -py[at - 1]
            } else {
                py[at] - py[at - 1]
            };
            out.set(i, j, dx + dy);
        }
    }
}

/// Isotropic total variation `Σ |∇u|`.
pub fn total_variation(u: &SquareMatrix) -> f64 {
    let n = u.dim();
    let (mut gx, mut gy) = (vec![0.0; n * n], vec![0.0; n * n]);
    gradient(u, &mut gx, &mut gy);
    gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).sum()
}

/// `‖u − f‖² / (2λ) + TV(u)`.
pub fn rof_energy(u: &SquareMatrix, f: &SquareMatrix, lambda: f64) -> f64 {
    let fidelity: f64 = u
        .as_slice()
        .iter()
        .zip(f.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    fidelity / (2.0 * lambda) + total_variation(u)
}

/// Runs the dual iteration. Requires `λ > 0`.
pub fn rof_denoise(f: &SquareMatrix, params: &TvParams) -> Result<TvOutcome> {
    params.validate()?;
    if params.lambda == 0.0 {
        return Err(Error::InvalidArgument("rof_denoise needs lambda > 0".into()));
    }
    if f.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("TV input has non-finite entries".into()));
    }
    let n = f.dim();
    let lambda = params.lambda;
    let len = n * n;
    let (mut px, mut py) = (vec![0.0; len], vec![0.0; len]);
    let (mut gx, mut gy) = (vec![0.0; len], vec![0.0; len]);
    let mut div = SquareMatrix::zeros(n);
    let mut w = SquareMatrix::zeros(n);
    let mut u = f.clone();
    let mut energies = vec![rof_energy(&u, f, lambda)];
    let mut iterations = 0;

    while iterations < params.max_iters {
        divergence(&px, &py, n, &mut div);
        for (wi, (d, fi)) in w
            .as_mut_slice()
            .iter_mut()
            .zip(div.as_slice().iter().zip(f.as_slice()))
        {
            *wi = d - fi / lambda;
        }
        gradient(&w, &mut gx, &mut gy);
        let mut delta = 0.0f64;
        for at in 0..len {
            let norm = gx[at].hypot(gy[at]);
            let scale = 1.0 + params.tau * norm;
            let nx = (px[at] + params.tau * gx[at]) / scale;
            let ny = (py[at] + params.tau * gy[at]) / scale;
            delta = delta.max((nx - px[at]).abs()).max((ny - py[at]).abs());
            px[at] = nx;
            py[at] = ny;
        }
        iterations += 1;
        divergence(&px, &py, n, &mut div);
        for (ui, (fi, d)) in u
            .as_mut_slice()
            .iter_mut()
            .zip(f.as_slice().iter().zip(div.as_slice()))
        {
            *ui = fi - lambda * d;
        }
        energies.push(rof_energy(&u, f, lambda));
        if delta <= params.tol {
            break;
        }
    }
    Ok(TvOutcome {
        u,
        iterations,
        energies,
    })
}

/// TV-smooths a block estimate: ROF denoising, then `(u + uᵀ)/2`, then
/// clipping to `[0, 1]`. `λ = 0` returns the input unchanged.
pub fn tv_smooth(h: &SquareMatrix, params: &TvParams) -> Result<SquareMatrix> {
    params.validate()?;
    if params.lambda == 0.0 {
        return Ok(h.clone());
    }
    let mut u = rof_denoise(h, params)?.u;
    u.symmetrize();
    u.clamp_unit();
    Ok(u)
}
