//! Dense linear-algebra helpers shared by the analysis modules.
//!
//! Everything here works on `nalgebra` dynamic matrices. The two pieces that
//! `nalgebra` does not provide directly are a general (non-symmetric)
//! eigenvector computation and a discrete-time Lyapunov (Stein) solver; both
//! are built on top of the complex Schur form.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

const SCHUR_MAX_ITER: usize = 10_000;

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Largest absolute entry, 0 for empty matrices.
pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn is_symmetric(a: &Mat, rel_tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = max_abs(a).max(1.0);
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > rel_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending and the
/// eigenvector columns permuted to match.
pub fn sym_eigen(a: &Mat) -> (DVector<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), Mat::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &Mat) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(0);
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    DVector::from_vec(v)
}

/// Largest singular value (induced 2-norm).
pub fn spectral_norm(a: &Mat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0, |m, &s| m.max(s))
}

pub fn spectral_norm_c(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.singular_values().iter().fold(0.0, |m, &s| m.max(s))
}

/// Induced 1-norm: largest absolute column sum.
pub fn norm_1(a: &Mat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced infinity-norm: largest absolute row sum.
pub fn norm_inf(a: &Mat) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn submatrix(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Complex Schur form `A = Q T Q^H` with `T` upper triangular.
pub fn complex_schur(a: &Mat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    if let Some(qt) = triangular_schur(a) {
        return Ok(qt);
    }
    let (q, mut t) = match Schur::<Complex64, Dyn>::try_new(to_complex(a), f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => schur.unpack(),
        None => {
            // QR sweeps can stall on exactly structured inputs; retry on an
            // orthogonally similar copy and map the Schur vectors back.
            let h = reflector(n);
            let scrambled = &h * a * &h;
            let schur = Schur::<Complex64, Dyn>::try_new(to_complex(&scrambled), f64::EPSILON, SCHUR_MAX_ITER)
                .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
            let (q, t) = schur.unpack();
            (to_complex(&h) * q, t)
        }
    };
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Schur form read off directly when `A` is already triangular. A lower
/// triangular matrix becomes upper triangular under index reversal.
fn triangular_schur(a: &Mat) -> Option<(CMat, CMat)> {
    let n = a.nrows();
    let upper = (0..n).all(|j| ((j + 1)..n).all(|i| a[(i, j)] == 0.0));
    if upper {
        return Some((CMat::identity(n, n), to_complex(a)));
    }
    let lower = (0..n).all(|i| ((i + 1)..n).all(|j| a[(i, j)] == 0.0));
    if !lower {
        return None;
    }
    let rev = Mat::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 });
    Some((to_complex(&rev), to_complex(&(&rev * a * &rev))))
}

/// Householder reflector `I − 2wwᵀ` for a fixed generic unit vector `w`.
fn reflector(n: usize) -> Mat {
    let w = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
    let w = &w / w.norm();
    Mat::identity(n, n) - 2.0 * &w * w.transpose()
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    let (_, t) = complex_schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn spectral_radius(a: &Mat) -> Result<f64> {
    if is_symmetric(a, 1e-14) {
        return Ok(sym_eigenvalues(a).iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, z| m.max(z.norm())))
}

/// Eigenvalues and unit-norm eigenvectors of a general real matrix.
///
/// Eigenvectors of the triangular Schur factor are obtained by back
/// substitution; near-zero pivots (repeated eigenvalues) are replaced by a
/// tiny perturbation so that Jordan structure shows up as nearly parallel
/// columns instead of a division by zero.
pub fn eigen_decomposition(a: &Mat) -> Result<(Vec<Complex64>, CMat)> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let tnorm = t.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * tnorm;
    let zero = Complex64::new(0.0, 0.0);

    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let mut col = vec![zero; n];
        col[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = zero;
            for l in (i + 1)..=k {
                s += t[(i, l)] * col[l];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            col[i] = -s / d;
            let big = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if big > 1e100 {
                for z in col.iter_mut() {
                    *z /= big;
                }
            }
        }
        for i in 0..n {
            y[(i, k)] = col[i];
        }
    }
    let mut v = &q * y;
    for k in 0..n {
        let norm = v.column(k).norm();
        if norm > 0.0 {
            let scaled = v.column(k) / Complex64::new(norm, 0.0);
            v.set_column(k, &scaled);
        }
    }
    Ok((values, v))
}

/// Solver for the discrete Lyapunov (Stein) equation `X = A X Aᵀ + Q`,
/// reusable across right-hand sides.
#[derive(Debug, Clone)]
pub enum SteinSolver {
    /// `A = V diag(λ) Vᵀ` with orthonormal `V`.
    Symmetric { values: DVector<f64>, vectors: Mat },
    /// `A = U T U^H` with `T` upper triangular.
    Schur { u: CMat, t: CMat },
}

impl SteinSolver {
    /// Fails unless `A` is Schur stable with the given margin.
    pub fn new(a: &Mat, stability_margin: f64) -> Result<Self> {
        if is_symmetric(a, 1e-14) {
            let (values, vectors) = sym_eigen(a);
            let rho = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if rho >= 1.0 - stability_margin {
                return Err(Error::Unstable(format!("spectral radius {rho} is not below 1")));
            }
            return Ok(SteinSolver::Symmetric { values, vectors });
        }
        let (u, t) = complex_schur(a)?;
        let rho = (0..t.nrows()).fold(0.0f64, |m, i| m.max(t[(i, i)].norm()));
        if rho >= 1.0 - stability_margin {
            return Err(Error::Unstable(format!("spectral radius {rho} is not below 1")));
        }
        Ok(SteinSolver::Schur { u, t })
    }

    pub fn dim(&self) -> usize {
        match self {
            SteinSolver::Symmetric { values, .. } => values.len(),
            SteinSolver::Schur { t, .. } => t.nrows(),
        }
    }

    pub fn solve(&self, q: &Mat) -> Mat {
        let x = match self {
            SteinSolver::Symmetric { values, vectors } => {
                let qt = vectors.transpose() * q * vectors;
                let n = values.len();
                let y = Mat::from_fn(n, n, |i, j| qt[(i, j)] / (1.0 - values[i] * values[j]));
                vectors * y * vectors.transpose()
            }
            SteinSolver::Schur { u, t } => {
                let c = u.adjoint() * to_complex(q) * u;
                let y = solve_triangular_stein(t, &c);
                (u * y * u.adjoint()).map(|z| z.re)
            }
        };
        (&x + x.transpose()) * 0.5
    }
}

/// Solves `Y = T Y T^H + C` for upper-triangular `T`, column by column from
/// the last one.
fn solve_triangular_stein(t: &CMat, c: &CMat) -> CMat {
    let n = t.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = CMat::zeros(n, n);
    for j in (0..n).rev() {
        // acc = Σ_{l>j} conj(T[j,l]) Y[:,l]
        let mut acc = vec![zero; n];
        for l in (j + 1)..n {
            let w = t[(j, l)].conj();
            if w != zero {
                for i in 0..n {
                    acc[i] += w * y[(i, l)];
                }
            }
        }
        // rhs = C[:,j] + T acc
        let mut rhs = vec![zero; n];
        for i in 0..n {
            let mut s = c[(i, j)];
            for k in i..n {
                s += t[(i, k)] * acc[k];
            }
            rhs[i] = s;
        }
        // (I - conj(T_jj) T) y_j = rhs, upper triangular
        let tjj = t[(j, j)].conj();
        let mut col = vec![zero; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in (i + 1)..n {
                s += tjj * t[(i, k)] * col[k];
            }
            col[i] = s / (Complex64::new(1.0, 0.0) - tjj * t[(i, i)]);
        }
        for i in 0..n {
            y[(i, j)] = col[i];
        }
    }
    y
}

/// Solves `W x = b` for symmetric positive-definite `W` by Cholesky.
pub fn spd_solve(w: &Mat, b: &DVector<f64>) -> Option<DVector<f64>> {
    Cholesky::new(w.clone()).map(|c| c.solve(b))
}

/// Orthonormal basis of the complement of the all-ones vector, as the last
/// `n - 1` columns of a Householder reflector.
pub fn ones_complement_basis(n: usize) -> Mat {
    if n <= 1 {
        return Mat::zeros(n, 0);
    }
    let e = 1.0 / (n as f64).sqrt();
    let mut v = DVector::from_element(n, e);
    v[0] += 1.0;
    let vv = v.dot(&v);
    let h = Mat::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}
