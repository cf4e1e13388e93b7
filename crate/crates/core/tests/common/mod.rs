//! Reference computations that avoid the library's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = DMatrix<f64>;

/// `W = Σ_{τ<T} A^τ B Bᵀ (Aᵀ)^τ` from the controllability matrix.
pub fn gramian_by_ctrb(a: &Mat, k: &[usize], t: usize) -> Mat {
    let n = a.nrows();
    let mut block = Mat::from_fn(n, k.len(), |i, j| if i == k[j] { 1.0 } else { 0.0 });
    let mut w = Mat::zeros(n, n);
    for _ in 0..t {
        w += &block * block.transpose();
        block = a * block;
    }
    w
}

/// Infinite-horizon Gramian from `vec(W) = (I − A⊗A)⁻¹ vec(BBᵀ)`.
pub fn gramian_by_kron(a: &Mat, k: &[usize]) -> Mat {
    let n = a.nrows();
    let big = DMatrix::<f64>::identity(n * n, n * n) - a.kronecker(a);
    let mut q = DVector::zeros(n * n);
    for &i in k {
        q[i * n + i] = 1.0;
    }
    let x = big.lu().solve(&q).expect("I - A⊗A is invertible for stable A");
    let w = Mat::from_column_slice(n, n, x.as_slice());
    (&w + w.transpose()) * 0.5
}

pub fn min_eig(w: &Mat) -> f64 {
    w.clone().symmetric_eigen().eigenvalues.min()
}

/// Largest eigenvalue modulus via the real Schur form.
pub fn spectral_radius(a: &Mat) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `σmax(C (zI − A)⁻¹ B)` at `z = e^{iθ}`.
pub fn freq_gain(a: &Mat, b: &Mat, c: &Mat, theta: f64) -> f64 {
    let n = a.nrows();
    let z = Complex64::from_polar(1.0, theta);
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let d = if i == j { z } else { Complex64::new(0.0, 0.0) };
        d - Complex64::new(a[(i, j)], 0.0)
    });
    let bc = b.map(|v| Complex64::new(v, 0.0));
    let cc = c.map(|v| Complex64::new(v, 0.0));
    let x = m.lu().solve(&bc).expect("stable A has no unit-circle eigenvalue");
    (cc * x).singular_values().max()
}

/// Maximum of the frequency response over `points + 1` angles in `[0, π]`.
pub fn grid_hinf(a: &Mat, b: &Mat, c: &Mat, points: usize) -> f64 {
    (0..=points)
        .map(|k| freq_gain(a, b, c, std::f64::consts::PI * k as f64 / points as f64))
        .fold(0.0, f64::max)
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Dense random matrix with entries in `[-1, 1)` scaled to spectral radius `rho`.
pub fn random_stable(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let r = spectral_radius(&a);
    a * (rho / r)
}

pub fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
