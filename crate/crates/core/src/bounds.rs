//! Analytic upper bounds on `λmin(W_{K,T})` as a function of the number of
//! control nodes, and the induced lower bound on `|K|` for a prescribed
//! worst-case energy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::{ControlSet, Horizon};
use crate::netmodel::SpectralFacts;

/// Slack added when counting eigenvalues with modulus at most `μ`.
pub const N_MU_SLACK: f64 = 1e-12;
/// Distance from 1 of the largest `μ` tried by [`best_mu`].
pub const MU_DELTA: f64 = 1e-6;
pub const DEFAULT_MU_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundKind {
    Thm1,
    SymEq7Term1,
    SymEq7Term2,
    SymEq7Min,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub mu: f64,
    pub n_mu: usize,
    pub value: f64,
    pub cond_v: f64,
    pub kind: BoundKind,
}

/// Number of eigenvalues with modulus at most `μ`.
pub fn n_mu(facts: &SpectralFacts, mu: f64) -> usize {
    facts.moduli().filter(|&m| m <= mu + N_MU_SLACK).count()
}

/// `cond²(V) μ^{2(⌈n_μ/k⌉-1)} / (1-μ²)` for `k` control nodes.
fn thm1_expression(cond_v: f64, mu: f64, n_mu: usize, k: usize) -> f64 {
    let exponent = 2 * (n_mu.div_ceil(k) as i32 - 1);
    cond_v * cond_v * mu.powi(exponent) / (1.0 - mu * mu)
}

fn check_mu(facts: &SpectralFacts, mu: f64) -> Result<()> {
    if !facts.diagonalizable {
        return Err(Error::NotDiagonalizable {
            sigma_min: facts.sigma_min_v,
        });
    }
    if !(mu >= facts.lambda_min_abs - N_MU_SLACK && mu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} outside [{}, 1)",
            facts.lambda_min_abs
        )));
    }
    Ok(())
}

/// Upper bound on `λmin(W_{K,T})`, valid for every horizon, for a
/// diagonalizable network and `μ ∈ [λmin_abs, 1)`.
pub fn thm1_bound(facts: &SpectralFacts, k: &ControlSet, mu: f64) -> Result<BoundReport> {
    thm1_bound_for_size(facts, k.len(), mu)
}

pub fn thm1_bound_for_size(facts: &SpectralFacts, k: usize, mu: f64) -> Result<BoundReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("control set must be nonempty".into()));
    }
    check_mu(facts, mu)?;
    let count = n_mu(facts, mu);
    Ok(BoundReport {
        mu,
        n_mu: count,
        value: thm1_expression(facts.cond_v, mu, count, k),
        cond_v: facts.cond_v,
        kind: BoundKind::Thm1,
    })
}

/// The two terms of the stable-symmetric bound and their minimum.
#[derive(Debug, Clone, Serialize)]
pub struct SymBound {
    pub term1: BoundReport,
    pub term2: BoundReport,
    pub min: BoundReport,
}

/// `min{(1-λmin^{2T})/(1-λmin²), λmax^{2(⌈n/|K|⌉-1)}/(1-λmax²)}` with
/// eigenvalue moduli, for Schur-stable symmetric networks.
pub fn sym_bound(facts: &SpectralFacts, k: &ControlSet, horizon: Horizon) -> Result<SymBound> {
    sym_bound_for_size(facts, k.len(), horizon)
}

pub fn sym_bound_for_size(facts: &SpectralFacts, k: usize, horizon: Horizon) -> Result<SymBound> {
    if !facts.symmetric {
        return Err(Error::NotSymmetric("the stable-symmetric bound needs A = Aᵀ".into()));
    }
    if !facts.schur_stable {
        return Err(Error::Unstable("the stable-symmetric bound needs a Schur-stable A".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("control set must be nonempty".into()));
    }
    let n = facts.n();
    let lo = facts.lambda_min_abs;
    let hi = facts.lambda_max_abs;
    let t1 = match horizon {
        Horizon::Finite(t) => {
            if lo == 0.0 {
                1.0
            } else {
                (1.0 - lo.powi(2 * t as i32)) / (1.0 - lo * lo)
            }
        }
        Horizon::Infinite => 1.0 / (1.0 - lo * lo),
    };
    let t2 = thm1_expression(1.0, hi, n, k);
    let term1 = BoundReport {
        mu: lo,
        n_mu: n_mu(facts, lo),
        value: t1,
        cond_v: 1.0,
        kind: BoundKind::SymEq7Term1,
    };
    let term2 = BoundReport {
        mu: hi,
        n_mu: n,
        value: t2,
        cond_v: 1.0,
        kind: BoundKind::SymEq7Term2,
    };
    let min = BoundReport {
        kind: BoundKind::SymEq7Min,
        ..if t1 <= t2 { term1.clone() } else { term2.clone() }
    };
    Ok(SymBound { term1, term2, min })
}

/// Lower bound on the number of control nodes needed for `λmin ≥ ε`.
#[derive(Debug, Clone, Serialize)]
pub struct MinNodesReport {
    pub epsilon: f64,
    pub mu: f64,
    pub n_mu: usize,
    pub r_epsilon: f64,
    /// `R_ε · n_μ`, or 0 when `vacuous`.
    pub lower_bound: f64,
    /// Set when `R_ε ≤ 0` (or undefined), in which case no bound is claimed.
    pub vacuous: bool,
}

/// `|K| ≥ R_ε n_μ` with
/// `R_ε = 2 log μ / (log ε + log(μ²(1-μ²)) - 2 log cond(V))`.
pub fn min_control_nodes(facts: &SpectralFacts, epsilon: f64, mu: f64) -> Result<MinNodesReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    check_mu(facts, mu)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument("mu must be positive for the cardinality bound".into()));
    }
    let count = n_mu(facts, mu);
    let denom = epsilon.ln() + (mu * mu * (1.0 - mu * mu)).ln() - 2.0 * facts.cond_v.ln();
    let r = 2.0 * mu.ln() / denom;
    let vacuous = !(r > 0.0) || !r.is_finite();
    Ok(MinNodesReport {
        epsilon,
        mu,
        n_mu: count,
        r_epsilon: r,
        lower_bound: if vacuous { 0.0 } else { r * count as f64 },
        vacuous,
    })
}

/// Minimizes [`thm1_bound`] over `μ`: a uniform grid on
/// `[λmin_abs, 1-δ]` together with every eigenvalue modulus in that range
/// (the expression only jumps down at those points).
pub fn best_mu(facts: &SpectralFacts, k: &ControlSet, grid: usize) -> Result<BoundReport> {
    best_mu_for_size(facts, k.len(), grid)
}

pub fn best_mu_for_size(facts: &SpectralFacts, k: usize, grid: usize) -> Result<BoundReport> {
    let lo = facts.lambda_min_abs;
    let hi = 1.0 - MU_DELTA;
    if lo > hi {
        return Err(Error::InvalidArgument(format!(
            "no admissible mu: smallest eigenvalue modulus {lo} is not below 1"
        )));
    }
    let mut candidates: Vec<f64> = if grid <= 1 {
        vec![lo]
    } else {
        (0..grid)
            .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
            .collect()
    };
    candidates.extend(facts.moduli().filter(|&m| m >= lo && m <= hi));
    let mut best: Option<BoundReport> = None;
    for mu in candidates {
        let r = thm1_bound_for_size(facts, k, mu)?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one candidate"))
}
