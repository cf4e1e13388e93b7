//! Discrete-time H∞ norm by level bisection.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::netmodel::STABILITY_TOL;

pub const DEFAULT_HINF_TOL: f64 = 1e-6;
const SEED_GRID: usize = 1024;
/// Relative distance from the imaginary axis under which a Cayley-mapped
/// eigenvalue is treated as a unit-circle crossing.
const AXIS_TOL: f64 = 1e-7;

/// `σmax(C (e^{iθ} I − A)⁻¹ B)`.
pub fn frequency_gain(a: &Mat, b: &Mat, c: &Mat, theta: f64) -> f64 {
    let n = a.nrows();
    let z = Complex64::from_polar(1.0, theta);
    let mut m: CMat = linalg::to_complex(a).map(|v| -v);
    for i in 0..n {
        m[(i, i)] += z;
    }
    let rhs = linalg::to_complex(b);
    match m.lu().solve(&rhs) {
        Some(x) => linalg::spectral_norm_c(&(linalg::to_complex(c) * x)),
        None => f64::INFINITY,
    }
}

/// `sup_θ σmax(C (e^{iθ} I − A)⁻¹ B)` for Schur-stable `A`, to relative
/// accuracy `tol`. The returned value is a certified upper level.
pub fn hinf_gain(a: &Mat, b: &Mat, c: &Mat, tol: f64) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || c.ncols() != n {
        return Err(Error::Dimension(format!(
            "H-infinity gain needs A n×n, B n×m, C p×n (got {}×{}, {}×{}, {}×{})",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if n > 0 {
        let rho = linalg::spectral_radius(a)?;
        if rho >= 1.0 - STABILITY_TOL {
            return Err(Error::Unstable(format!(
                "spectral radius {rho} >= 1; H-infinity gain undefined"
            )));
        }
    }
    if n == 0 || b.ncols() == 0 || c.nrows() == 0 || linalg::max_abs(b) == 0.0 || linalg::max_abs(c) == 0.0 {
        return Ok(0.0);
    }

    let mut lo = (0..=SEED_GRID)
        .map(|k| frequency_gain(a, b, c, PI * k as f64 / SEED_GRID as f64))
        .fold(0.0, f64::max);
    if lo == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while let Some(v) = exceeds(a, b, c, hi) {
        lo = lo.max(v);
        hi = 2.0 * hi.max(v);
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Numerical("H-infinity bracket did not close".into()));
        }
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        match exceeds(a, b, c, mid) {
            Some(v) => lo = lo.max(v),
            None => hi = mid,
        }
    }
    Ok(hi)
}

/// Looks for a frequency where the gain exceeds `gamma`. Unit-circle
/// eigenvalues `z` of the pencil `M − zL` with
/// `M = [[A, BBᵀ/γ²], [0, I]]`, `L = [[I, 0], [CᵀC, Aᵀ]]` mark the
/// frequencies where `σ(G) = γ`; the gain is then probed between them.
fn exceeds(a: &Mat, b: &Mat, c: &Mat, gamma: f64) -> Option<f64> {
    let n = a.nrows();
    let bb = b * b.transpose() / (gamma * gamma);
    let cc = c.transpose() * c;
    let id = Mat::identity(n, n);
    let mut sum = Mat::zeros(2 * n, 2 * n);
    let mut diff = Mat::zeros(2 * n, 2 * n);
    sum.view_mut((0, 0), (n, n)).copy_from(&(a + &id));
    sum.view_mut((0, n), (n, n)).copy_from(&bb);
    sum.view_mut((n, 0), (n, n)).copy_from(&cc);
    sum.view_mut((n, n), (n, n)).copy_from(&(&id + a.transpose()));
    diff.view_mut((0, 0), (n, n)).copy_from(&(a - &id));
    diff.view_mut((0, n), (n, n)).copy_from(&bb);
    diff.view_mut((n, 0), (n, n)).copy_from(&(-&cc));
    diff.view_mut((n, n), (n, n)).copy_from(&(&id - a.transpose()));

    let mut angles = vec![0.0, PI];
    if let Some(inv) = sum.clone().lu().try_inverse() {
        if let Ok(ev) = linalg::eigenvalues(&(inv * diff)) {
            for s in ev {
                if s.re.abs() <= AXIS_TOL * (1.0 + s.norm()) {
                    let z = (Complex64::new(1.0, 0.0) + s) / (Complex64::new(1.0, 0.0) - s);
                    angles.push(z.arg().abs());
                }
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let mut probes = angles.clone();
    probes.extend(angles.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let best = probes
        .into_iter()
        .map(|t| frequency_gain(a, b, c, t))
        .fold(0.0, f64::max);
    (best > gamma).then_some(best)
}
