use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Network;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Directed line `1 → 2 → … → n` with weight 1/2 on every edge.
pub fn line_network(n: usize) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidArgument("line network needs n >= 1".into()));
    }
    let mut a = Mat::zeros(n, n);
    for i in 1..n {
        a[(i, i - 1)] = 0.5;
    }
    Network::new(a, true)
}

/// Symmetric ring where every node weighs itself and its two cyclic
/// neighbors by `rho / 3`.
pub fn circulant_network(n: usize, rho: f64) -> Result<Network> {
    if n < 3 {
        return Err(Error::InvalidArgument("circulant network needs n >= 3".into()));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    let w = rho / 3.0;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = w;
        a[(i, (i + 1) % n)] = w;
        a[(i, (i + n - 1) % n)] = w;
    }
    Network::new(a, false)
}

/// Tridiagonal line with diagonal 1/3 whose off-diagonal couplings alternate
/// by row: 1/6 on odd rows and 2/3 on even rows (1-based).
pub fn asymmetric_line_network(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidArgument("asymmetric line network needs n >= 2".into()));
    }
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = 1.0 / 3.0;
        let c = if i % 2 == 0 { 1.0 / 6.0 } else { 2.0 / 3.0 };
        if i > 0 {
            a[(i, i - 1)] = c;
        }
        if i + 1 < n {
            a[(i, i + 1)] = c;
        }
    }
    Network::new(a, true)
}

fn check_step(h: f64) -> Result<()> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be >= 0, got {h}")));
    }
    Ok(())
}

/// Euler discretization of first-order swing dynamics:
/// `a_ii = 1 - (h/d_i) Σ_j k_ij`, `a_ij = (h/d_i) k_ij`.
pub fn power_grid_network(topology: &Network, damping: &[f64], h: f64) -> Result<Network> {
    let n = topology.n();
    let k = topology.adjacency();
    if damping.len() != n {
        return Err(Error::Dimension(format!(
            "damping has {} entries for {n} nodes",
            damping.len()
        )));
    }
    if !topology.is_symmetric() || k.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(
            "susceptance topology must be symmetric and nonnegative".into(),
        ));
    }
    if let Some(d) = damping.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument(format!("damping must be positive, got {d}")));
    }
    check_step(h)?;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        let g = h / damping[i];
        let mut total = 0.0;
        for j in 0..n {
            if j != i {
                a[(i, j)] = g * k[(i, j)];
                total += k[(i, j)];
            }
        }
        a[(i, i)] = 1.0 - g * total;
    }
    Network::from_matrix(a)
}

/// Unit weights on every edge of `base` and on every self-loop.
pub fn uniform_consensus_weights(base: &Network) -> Mat {
    let n = base.n();
    Mat::from_fn(n, n, |i, j| {
        if i == j || base.adjacency()[(i, j)] != 0.0 {
            1.0
        } else {
            0.0
        }
    })
}

/// Row-normalized consensus matrix `A = D⁻¹ W` where `W` carries a positive
/// weight on each edge of `base` and on each self-loop.
pub fn consensus_network(base: &Network, weights: &Mat) -> Result<Network> {
    let n = base.n();
    if weights.nrows() != n || weights.ncols() != n {
        return Err(Error::Dimension(format!(
            "weights must be {n}x{n}, got {}x{}",
            weights.nrows(),
            weights.ncols()
        )));
    }
    if base.directed() {
        return Err(Error::InvalidArgument("consensus base graph must be undirected".into()));
    }
    if !base.is_connected() {
        return Err(Error::Disconnected(
            "consensus requires a connected base graph (simple unit eigenvalue)".into(),
        ));
    }
    let b = base.adjacency();
    for i in 0..n {
        for j in 0..n {
            let w = weights[(i, j)];
            let allowed = i == j || b[(i, j)] != 0.0;
            if allowed && !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "weight ({}, {}) must be positive, got {w}",
                    i + 1,
                    j + 1
                )));
            }
            if !allowed && w != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "weight ({}, {}) is off the base graph",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let mut a = weights.clone();
    for i in 0..n {
        let s = a.row(i).sum();
        for j in 0..n {
            a[(i, j)] /= s;
        }
    }
    Network::from_matrix(a)
}

/// Euler discretization of linearized SIS spreading:
/// `a_ii = 1 - h α_i`, `a_ij = h β_i c_ij`.
pub fn sis_network(contacts: &Network, alpha: &[f64], beta: &[f64], h: f64) -> Result<Network> {
    let n = contacts.n();
    if alpha.len() != n || beta.len() != n {
        return Err(Error::Dimension(format!(
            "alpha/beta have {}/{} entries for {n} nodes",
            alpha.len(),
            beta.len()
        )));
    }
    if alpha.iter().chain(beta).any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("curing and infection rates must be >= 0".into()));
    }
    check_step(h)?;
    let c = contacts.adjacency();
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = 1.0 - h * alpha[i];
        for j in 0..n {
            if j != i {
                a[(i, j)] = h * beta[i] * c[(i, j)];
            }
        }
    }
    Network::from_matrix(a)
}

/// Connected random symmetric network scaled to spectral radius `rho`.
///
/// A random spanning tree guarantees connectivity; every other pair is
/// joined with probability `edge_prob`. Weights are uniform in `[0.5, 1.5)`
/// with random signs on self-loops.
pub fn random_symmetric_network(n: usize, rho: f64, edge_prob: f64, seed: u64) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidArgument("random network needs n >= 1".into()));
    }
    if !(rho > 0.0) || !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidArgument("need rho > 0 and edge_prob in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Mat::zeros(n, n);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = rng.gen_range(0.5..1.5);
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] == 0.0 && rng.gen_bool(edge_prob) {
                let w = rng.gen_range(0.5..1.5);
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        a[(i, i)] = sign * rng.gen_range(0.0..0.5);
    }
    let radius = linalg::spectral_radius(&a)?;
    if radius > 0.0 {
        a *= rho / radius;
    }
    Network::new(a, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{spectral_facts, DIAGONALIZABLE_TOL};
    use std::f64::consts::PI;

    #[test]
    fn line_network_entries() {
        let net = line_network(3).unwrap();
        let a = net.adjacency();
        assert_eq!(a[(1, 0)], 0.5);
        assert_eq!(a[(2, 1)], 0.5);
        assert_eq!(a.iter().filter(|&&x| x != 0.0).count(), 2);
        assert_eq!(line_network(1).unwrap().adjacency()[(0, 0)], 0.0);
        assert!(line_network(0).is_err());
    }

    #[test]
    fn line_network_is_nilpotent() {
        let a = line_network(5).unwrap().adjacency().clone();
        let p = a.pow(5);
        assert!(p.iter().all(|&x| x == 0.0));
        assert!(a.pow(4).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn circulant_spectrum_matches_closed_form() {
        let (n, rho) = (20, 0.75);
        let net = circulant_network(n, rho).unwrap();
        let f = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        let mut got: Vec<f64> = f.eigenvalues.iter().map(|z| z.re).collect();
        let mut want: Vec<f64> = (0..n)
            .map(|k| rho / 3.0 * (1.0 + 2.0 * (2.0 * PI * k as f64 / n as f64).cos()))
            .collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
        assert!((f.lambda_max_abs - 0.75).abs() < 1e-12);
    }

    #[test]
    fn small_circulant_is_uniform() {
        let net = circulant_network(3, 1.0).unwrap();
        assert!(net.adjacency().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-16));
        let f = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        assert!((f.lambda_max_abs - 1.0).abs() < 1e-12);
        assert!(circulant_network(5, 0.0).is_err());
        assert!(circulant_network(2, 0.5).is_err());
    }

    #[test]
    fn asymmetric_line_spectrum_and_symmetrizer() {
        let n = 8;
        let net = asymmetric_line_network(n).unwrap();
        let f = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        let mut got: Vec<f64> = f.eigenvalues.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (1..=n)
            .map(|h| (1.0 + 2.0 * (h as f64 * PI / (n as f64 + 1.0)).cos()) / 3.0)
            .collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!(f.eigenvalues.iter().all(|z| z.im.abs() < 1e-12));

        let net4 = asymmetric_line_network(4).unwrap();
        let d = [1.0, 2.0, 1.0, 2.0];
        let a = net4.adjacency();
        let s = Mat::from_fn(4, 4, |i, j| a[(i, j)] * d[j] / d[i]);
        assert!((&s - s.transpose()).abs().max() < 1e-15);
        assert!(asymmetric_line_network(1).is_err());
    }

    #[test]
    fn power_grid_two_nodes() {
        let topo = Network::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), false).unwrap();
        let net = power_grid_network(&topo, &[1.0, 1.0], 0.1).unwrap();
        let want = Mat::from_row_slice(2, 2, &[0.9, 0.1, 0.1, 0.9]);
        assert!((net.adjacency() - want).abs().max() < 1e-15);
        let id = power_grid_network(&topo, &[1.0, 2.0], 0.0).unwrap();
        assert_eq!(id.adjacency(), &Mat::identity(2, 2));
        assert!(power_grid_network(&topo, &[1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn consensus_two_nodes() {
        let base = Network::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), false).unwrap();
        let net = consensus_network(&base, &uniform_consensus_weights(&base)).unwrap();
        assert!(net.adjacency().iter().all(|&x| x == 0.5));
    }

    #[test]
    fn consensus_rejects_disconnected() {
        let base = Network::new(Mat::zeros(3, 3), false).unwrap();
        assert!(matches!(
            consensus_network(&base, &uniform_consensus_weights(&base)),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn sis_reductions() {
        let contacts = circulant_network(4, 1.0).unwrap();
        let net = sis_network(&contacts, &[0.5, 1.0, 2.0, 0.0], &[0.0; 4], 0.1).unwrap();
        let want = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.95, 0.9, 0.8, 1.0]));
        assert!((net.adjacency() - want).abs().max() < 1e-15);
        let id = sis_network(&contacts, &[0.0; 4], &[0.0; 4], 0.1).unwrap();
        assert_eq!(id.adjacency(), &Mat::identity(4, 4));
        let id0 = sis_network(&contacts, &[3.0; 4], &[2.0; 4], 0.0).unwrap();
        assert_eq!(id0.adjacency(), &Mat::identity(4, 4));
    }

    #[test]
    fn sis_unstable_setting() {
        let contacts = circulant_network(6, 3.0).unwrap();
        let net = sis_network(&contacts, &[0.1; 6], &[2.0; 6], 0.01).unwrap();
        let f = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        assert!(!f.schur_stable);
    }

    #[test]
    fn random_network_is_connected_and_scaled() {
        let net = random_symmetric_network(30, 0.9, 0.1, 7).unwrap();
        assert!(net.is_connected());
        let f = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        assert!((f.lambda_max_abs - 0.9).abs() < 1e-12);
        assert_eq!(net, random_symmetric_network(30, 0.9, 0.1, 7).unwrap());
    }
}
