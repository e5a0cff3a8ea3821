use jgs_core::linalg::{jacobi_eigen, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use jgs_core::SquareMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Roots of the characteristic polynomial `det(λI − A)` of a symmetric 3×3
/// matrix via the trigonometric form of the cubic solution.
fn char_poly_roots(a: &SquareMatrix) -> [f64; 3] {
    let (a11, a22, a33) = (a.get(0, 0), a.get(1, 1), a.get(2, 2));
    let (a12, a13, a23) = (a.get(0, 1), a.get(0, 2), a.get(1, 2));
    // λ³ − c2 λ² + c1 λ − c0
    let c2 = a11 + a22 + a33;
    let c1 = a11 * a22 + a11 * a33 + a22 * a33 - a12 * a12 - a13 * a13 - a23 * a23;
    let c0 = a11 * a22 * a33 + 2.0 * a12 * a13 * a23 - a11 * a23 * a23 - a22 * a13 * a13 - a33 * a12 * a12;
    // Depressed cubic t³ + p t + q with λ = t + c2/3.
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2.powi(3) / 27.0 + c2 * c1 / 3.0 - c0;
    let shift = c2 / 3.0;
    if p.abs() < 1e-300 {
        return [shift; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, r) in roots.iter_mut().enumerate() {
        *r = shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[test]
fn three_by_three_matches_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let mut a = SquareMatrix::zeros(3);
        for i in 0..3 {
            for j in i..3 {
                let x = rng.random::<f64>() * 2.0 - 1.0;
                a.set(i, j, x);
                a.set(j, i, x);
            }
        }
        let mut got = jacobi_eigen(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap().values;
        got.sort_by(f64::total_cmp);
        let expect = char_poly_roots(&a);
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-10, "{got:?} vs {expect:?}");
        }
    }
}

#[test]
fn complete_graph_spectrum() {
    for n in [3usize, 5, 8] {
        let a = SquareMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 });
        let mut vals = jacobi_eigen(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap().values;
        vals.sort_by(f64::total_cmp);
        for v in &vals[..n - 1] {
            assert!((v + 1.0).abs() < 1e-10);
        }
        assert!((vals[n - 1] - (n as f64 - 1.0)).abs() < 1e-10);
    }
}

#[test]
fn eigenvectors_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let n = 15;
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random();
            a.set(i, j, x);
            a.set(j, i, x);
        }
    }
    let e = jacobi_eigen(&a, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
    let q = &e.vectors;
    for c1 in 0..n {
        for c2 in 0..n {
            let dot: f64 = (0..n).map(|r| q.get(r, c1) * q.get(r, c2)).sum();
            let expect = if c1 == c2 { 1.0 } else { 0.0 };
            assert!((dot - expect).abs() < 1e-10);
        }
    }
}
