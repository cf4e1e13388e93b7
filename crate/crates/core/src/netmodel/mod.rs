//! Weighted network models `x(t+1) = A x(t)`.
//!
//! Row `i` of `A` aggregates the neighbors `j` feeding node `i`: the entry
//! `a_ij` is the weight with which `x_j(t)` enters `x_i(t+1)`.

mod generators;
mod io;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};

pub use generators::{
    asymmetric_line_network, circulant_network, consensus_network, line_network,
    power_grid_network, random_symmetric_network, sis_network, uniform_consensus_weights,
};
pub use io::{load_network, parse_network, save_network, write_network, NetworkFormat};

/// Relative tolerance used to decide `A = Aᵀ` for undirected networks.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Margin below the unit circle required for Schur stability.
pub const STABILITY_TOL: f64 = 1e-9;
/// Default smallest singular value of the unit-column eigenvector matrix
/// below which a matrix is declared non-diagonalizable.
pub const DIAGONALIZABLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    a: Mat,
    directed: bool,
}

impl Network {
    /// Validates shape, finiteness, and symmetry when `directed` is false.
    pub fn new(a: Mat, directed: bool) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "adjacency matrix must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if let Some((idx, x)) = a.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            let n = a.nrows();
            return Err(Error::InvalidArgument(format!(
                "non-finite weight {x} at ({}, {})",
                idx % n + 1,
                idx / n + 1
            )));
        }
        if !directed && !linalg::is_symmetric(&a, SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(
                "undirected network requires a symmetric adjacency matrix".into(),
            ));
        }
        Ok(Network { a, directed })
    }

    /// Builds a network, marking it undirected exactly when `a` is symmetric.
    pub fn from_matrix(a: Mat) -> Result<Self> {
        let directed = !(a.nrows() == a.ncols() && linalg::is_symmetric(&a, 0.0));
        Network::new(a, directed)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn adjacency(&self) -> &Mat {
        &self.a
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn is_symmetric(&self) -> bool {
        linalg::is_symmetric(&self.a, SYMMETRY_TOL)
    }

    pub fn transpose(&self) -> Network {
        Network {
            a: self.a.transpose(),
            directed: self.directed,
        }
    }

    /// Rows of `A` summing to one within `tol`.
    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| (self.a.row(i).sum() - 1.0).abs() <= tol)
            && self.a.iter().all(|&x| x >= 0.0)
    }

    /// Symmetric nonnegative surrogate `(|A| + |A|ᵀ)/2` used for graph
    /// connectivity and Laplacians.
    pub fn undirected_weights(&self) -> Mat {
        let abs = self.a.abs();
        (&abs + abs.transpose()) * 0.5
    }

    /// Connectivity of the undirected support graph restricted to `nodes`.
    pub fn is_connected_on(&self, nodes: &[usize]) -> bool {
        if nodes.is_empty() {
            return false;
        }
        let n = self.n();
        let mut member = vec![false; n];
        for &v in nodes {
            member[v] = true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![nodes[0]];
        seen[nodes[0]] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if member[w] && !seen[w] && (self.a[(v, w)] != 0.0 || self.a[(w, v)] != 0.0) {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == nodes.len()
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.n()).collect();
        self.is_connected_on(&all)
    }
}

/// Eigenstructure of a network matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralFacts {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvectors as unit-norm columns, ordered like `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: CMat,
    pub cond_v: f64,
    pub sigma_min_v: f64,
    pub lambda_min_abs: f64,
    pub lambda_max_abs: f64,
    pub schur_stable: bool,
    pub diagonalizable: bool,
    pub normal: bool,
    pub symmetric: bool,
}

impl SpectralFacts {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues.iter().map(|z| z.norm())
    }
}

fn serialize_complex_vec<S: serde::Serializer>(
    v: &[Complex64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Full eigendecomposition with unit-norm eigenvector columns and the
/// derived condition number, stability, and normality verdicts.
pub fn spectral_facts(net: &Network, tol: f64) -> Result<SpectralFacts> {
    let a = net.adjacency();
    let n = net.n();
    let symmetric = net.is_symmetric();

    let (eigenvalues, eigenvectors) = if symmetric {
        let (vals, vecs) = linalg::sym_eigen(a);
        (
            vals.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
            linalg::to_complex(&vecs),
        )
    } else {
        linalg::eigen_decomposition(a)?
    };

    let sv = eigenvectors.singular_values();
    let sigma_max = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    let sigma_min = sv.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    let cond_v = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };

    let moduli: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    let lambda_min_abs = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max_abs = moduli.iter().copied().fold(0.0, f64::max);

    let normal = symmetric || {
        let ata = a.transpose() * a;
        let aat = a * a.transpose();
        let scale = a.norm_squared().max(f64::MIN_POSITIVE);
        (ata - aat).norm() <= 1e-12 * scale
    };

    Ok(SpectralFacts {
        eigenvalues,
        eigenvectors,
        cond_v,
        sigma_min_v: sigma_min,
        lambda_min_abs: if n == 0 { 0.0 } else { lambda_min_abs },
        lambda_max_abs,
        schur_stable: lambda_max_abs < 1.0 - STABILITY_TOL,
        diagonalizable: sigma_min >= tol,
        normal,
        symmetric,
    })
}

pub(crate) fn dense_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
}
