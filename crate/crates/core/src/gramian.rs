//! Controllability and observability Gramians, their energy metrics, and
//! minimum-energy open-loop inputs.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, SteinSolver};
use crate::netmodel::{Network, STABILITY_TOL};

/// Default relative threshold on `λmin(W)` for a controllability verdict.
pub const CONTROLLABILITY_TOL: f64 = 1e-10;

/// Nonempty, strictly increasing set of 0-based node indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlSet {
    nodes: Vec<usize>,
}

impl ControlSet {
    /// Sorts `nodes`; duplicates, out-of-range indices and empty sets are
    /// rejected.
    pub fn new(mut nodes: Vec<usize>, n: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("control set must be nonempty".into()));
        }
        nodes.sort_unstable();
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate control node {}", w[0] + 1)));
        }
        if let Some(&last) = nodes.last() {
            if last >= n {
                return Err(Error::InvalidArgument(format!(
                    "control node {} out of range 1..={n}",
                    last + 1
                )));
            }
        }
        Ok(ControlSet { nodes })
    }

    /// Parses 1-based indices.
    pub fn from_one_based(nodes: &[usize], n: usize) -> Result<Self> {
        if nodes.contains(&0) {
            return Err(Error::InvalidArgument("node indices are 1-based".into()));
        }
        ControlSet::new(nodes.iter().map(|&i| i - 1).collect(), n)
    }

    pub fn all(n: usize) -> Self {
        ControlSet {
            nodes: (0..n).collect(),
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.nodes.iter().map(|&i| i + 1).collect()
    }
}

impl Serialize for ControlSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

/// Control horizon: a finite number of steps or the infinite limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Horizon::Infinite),
            t => match t.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::InvalidArgument(format!(
                    "horizon must be a positive integer or 'inf', got '{t}'"
                ))),
                Ok(v) => Ok(Horizon::Finite(v)),
            },
        }
    }
}

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Horizon::Finite(t) => s.serialize_u64(*t as u64),
            Horizon::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub(crate) fn ext_float<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn matrix_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::netmodel::dense_rows(m).serialize(s)
}

pub(crate) fn vector_rows<S: Serializer>(v: &[DVector<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = v.iter().map(|x| x.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// A Gramian together with its scalar energy metrics.
#[derive(Debug, Clone, Serialize)]
pub struct GramianReport {
    #[serde(rename = "W", serialize_with = "matrix_rows")]
    pub w: Mat,
    pub horizon: Horizon,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trace: f64,
    #[serde(serialize_with = "ext_float")]
    pub trace_inverse: f64,
    #[serde(serialize_with = "ext_float")]
    pub log_det: f64,
    pub controllable: bool,
    /// True when `W` is expressed in an orthonormal basis of the complement
    /// of the consensus direction (dimension `n - 1`).
    pub deflated: bool,
}

impl GramianReport {
    /// Computes the metrics of a symmetric positive-semidefinite `w`.
    /// Negative rounding noise in `λmin` is clamped to zero.
    pub fn from_matrix(w: Mat, horizon: Horizon, tol_ctrb: f64) -> Self {
        let eig = linalg::sym_eigenvalues(&w);
        let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        let lambda_max = eig.iter().copied().fold(0.0, f64::max);
        let trace = w.trace();
        let controllable = lambda_min > tol_ctrb * lambda_max.max(1.0);
        let (trace_inverse, log_det) = if controllable {
            (eig.iter().map(|l| 1.0 / l).sum(), eig.iter().map(|l| l.ln()).sum())
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        };
        GramianReport {
            w,
            horizon,
            lambda_min,
            lambda_max,
            trace,
            trace_inverse,
            log_det,
            controllable,
            deflated: false,
        }
    }
}

/// The `n×m` input matrix whose column `ℓ` is the canonical vector of the
/// `ℓ`-th control node.
pub fn input_matrix(k: &ControlSet, n: usize) -> Result<Mat> {
    if let Some(&bad) = k.nodes().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("control node {} out of range 1..={n}", bad + 1)));
    }
    let mut b = Mat::zeros(n, k.len());
    for (col, &i) in k.nodes().iter().enumerate() {
        b[(i, col)] = 1.0;
    }
    Ok(b)
}

/// `B Bᵀ`: the diagonal 0/1 selector of the control nodes.
fn selector(k: &ControlSet, n: usize) -> Mat {
    let mut s = Mat::zeros(n, n);
    for &i in k.nodes() {
        s[(i, i)] = 1.0;
    }
    s
}

fn check_set(net: &Network, k: &ControlSet) -> Result<()> {
    match k.nodes().last() {
        Some(&i) if i >= net.n() => Err(Error::InvalidArgument(format!(
            "control node {} out of range 1..={}",
            i + 1,
            net.n()
        ))),
        _ => Ok(()),
    }
}

/// `[B  AB  ⋯  A^{T-1}B]`.
pub fn controllability_matrix(net: &Network, k: &ControlSet, t: usize) -> Result<Mat> {
    if t == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let n = net.n();
    let m = k.len();
    let a = net.adjacency();
    let mut block = input_matrix(k, n)?;
    let mut c = Mat::zeros(n, t * m);
    for tau in 0..t {
        c.columns_mut(tau * m, m).copy_from(&block);
        block = a * block;
    }
    Ok(c)
}

/// `Σ_{τ<T} A^τ Q (Aᵀ)^τ` accumulated by `W ← A W Aᵀ + Q`.
pub(crate) fn finite_sum(a: &Mat, q: &Mat, t: usize) -> Mat {
    let mut w = Mat::zeros(a.nrows(), a.ncols());
    for _ in 0..t {
        w = a * &w * a.transpose() + q;
    }
    (&w + w.transpose()) * 0.5
}

pub fn gramian_finite(net: &Network, k: &ControlSet, t: usize, tol_ctrb: f64) -> Result<GramianReport> {
    if t == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    check_set(net, k)?;
    let w = finite_sum(net.adjacency(), &selector(k, net.n()), t);
    Ok(GramianReport::from_matrix(w, Horizon::Finite(t), tol_ctrb))
}

/// Solution of `A W Aᵀ + B Bᵀ = W`.
///
/// With `deflate_consensus`, an unstable row-stochastic `A` is projected onto
/// the orthogonal complement of the all-ones vector before solving; the
/// report is then `(n-1)×(n-1)` and flagged `deflated`.
pub fn gramian_infinite(net: &Network, k: &ControlSet, deflate_consensus: bool) -> Result<GramianReport> {
    gramian_infinite_tol(net, k, deflate_consensus, CONTROLLABILITY_TOL)
}

pub fn gramian_infinite_tol(
    net: &Network,
    k: &ControlSet,
    deflate_consensus: bool,
    tol_ctrb: f64,
) -> Result<GramianReport> {
    check_set(net, k)?;
    let n = net.n();
    let a = net.adjacency();
    let q = selector(k, n);
    match SteinSolver::new(a, STABILITY_TOL) {
        Ok(solver) => Ok(GramianReport::from_matrix(solver.solve(&q), Horizon::Infinite, tol_ctrb)),
        Err(Error::Unstable(msg)) => {
            if !deflate_consensus {
                return Err(Error::Unstable(format!(
                    "infinite-horizon Gramian undefined ({msg})"
                )));
            }
            if !net.is_row_stochastic(1e-10) {
                return Err(Error::Unstable(
                    "infinite-horizon Gramian undefined: network is not row stochastic, cannot deflate"
                        .into(),
                ));
            }
            let basis = linalg::ones_complement_basis(n);
            let reduced_a = basis.transpose() * a * &basis;
            let reduced_q = basis.transpose() * q * &basis;
            let solver = SteinSolver::new(&reduced_a, STABILITY_TOL).map_err(|_| {
                Error::Unstable(
                    "infinite-horizon Gramian undefined: unit eigenvalue is not simple or other modes are not stable"
                        .into(),
                )
            })?;
            let mut report =
                GramianReport::from_matrix(solver.solve(&reduced_q), Horizon::Infinite, tol_ctrb);
            report.deflated = true;
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

/// Dispatches on the horizon.
pub fn gramian(net: &Network, k: &ControlSet, horizon: Horizon, tol_ctrb: f64) -> Result<GramianReport> {
    match horizon {
        Horizon::Finite(t) => gramian_finite(net, k, t, tol_ctrb),
        Horizon::Infinite => gramian_infinite_tol(net, k, false, tol_ctrb),
    }
}

/// `Σ (Aᵀ)^τ C_Kᵀ C_K A^τ` with `C_K = B_Kᵀ`, i.e. the controllability
/// Gramian of the transposed network.
pub fn observability_gramian(net: &Network, k: &ControlSet, horizon: Horizon) -> Result<GramianReport> {
    gramian(&net.transpose(), k, horizon, CONTROLLABILITY_TOL)
}

/// Single-node Gramians `W_{{i},T}` of a network, so that the Gramian of any
/// control set is the sum of its members' matrices.
#[derive(Debug, Clone)]
pub struct NodeGramians {
    horizon: Horizon,
    per_node: Vec<Mat>,
}

impl NodeGramians {
    pub fn new(net: &Network, horizon: Horizon) -> Result<Self> {
        let n = net.n();
        let a = net.adjacency();
        let per_node = match horizon {
            Horizon::Finite(t) => {
                if t == 0 {
                    return Err(Error::InvalidArgument("horizon must be at least 1".into()));
                }
                (0..n)
                    .map(|i| {
                        let mut q = Mat::zeros(n, n);
                        q[(i, i)] = 1.0;
                        finite_sum(a, &q, t)
                    })
                    .collect()
            }
            Horizon::Infinite => {
                let solver = SteinSolver::new(a, STABILITY_TOL).map_err(|e| {
                    Error::Unstable(format!("infinite-horizon Gramian undefined ({e})"))
                })?;
                (0..n)
                    .map(|i| {
                        let mut q = Mat::zeros(n, n);
                        q[(i, i)] = 1.0;
                        solver.solve(&q)
                    })
                    .collect()
            }
        };
        Ok(NodeGramians { horizon, per_node })
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.per_node.len()
    }

    pub fn node(&self, i: usize) -> &Mat {
        &self.per_node[i]
    }

    pub fn sum(&self, nodes: &[usize]) -> Mat {
        let n = self.n();
        let mut w = Mat::zeros(n, n);
        for &i in nodes {
            w += &self.per_node[i];
        }
        w
    }

    pub fn report(&self, k: &ControlSet, tol_ctrb: f64) -> GramianReport {
        GramianReport::from_matrix(self.sum(k.nodes()), self.horizon, tol_ctrb)
    }

    pub fn lambda_min(&self, nodes: &[usize]) -> f64 {
        if nodes.is_empty() {
            return 0.0;
        }
        linalg::sym_eigenvalues(&self.sum(nodes))
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

/// A simulated state/input sequence with its input energy `Σ ‖u(τ)‖²`.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    #[serde(serialize_with = "vector_rows")]
    pub states: Vec<DVector<f64>>,
    #[serde(serialize_with = "vector_rows")]
    pub inputs: Vec<DVector<f64>>,
    pub energy: f64,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has an initial state")
    }

    /// One row per time step: `t,x1..xn,u1..um`; the last row has empty
    /// input fields.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let m = self.inputs.first().map_or(0, |u| u.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        for j in 1..=m {
            out.push_str(&format!(",u{j}"));
        }
        out.push('\n');
        for (t, x) in self.states.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in x.iter() {
                out.push_str(&format!(",{v}"));
            }
            match self.inputs.get(t) {
                Some(u) => {
                    for v in u.iter() {
                        out.push_str(&format!(",{v}"));
                    }
                }
                None => out.push_str(&",".repeat(m)),
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn simulate_raw(a: &Mat, b: &Mat, inputs: &[DVector<f64>], x0: &DVector<f64>) -> Trajectory {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(x0.clone());
    let mut energy = 0.0;
    for u in inputs {
        let x = states.last().expect("nonempty");
        let next = a * x + b * u;
        energy += u.norm_squared();
        states.push(next);
    }
    Trajectory {
        states,
        inputs: inputs.to_vec(),
        energy,
    }
}

/// Forward recursion `x(t+1) = A x(t) + B_K u(t)`.
pub fn simulate(net: &Network, k: &ControlSet, inputs: &[DVector<f64>], x0: &DVector<f64>) -> Result<Trajectory> {
    let n = net.n();
    if x0.len() != n {
        return Err(Error::Dimension(format!("initial state has length {} for {n} nodes", x0.len())));
    }
    if let Some((t, u)) = inputs.iter().enumerate().find(|(_, u)| u.len() != k.len()) {
        return Err(Error::Dimension(format!(
            "input at t={t} has length {} for {} control nodes",
            u.len(),
            k.len()
        )));
    }
    let b = input_matrix(k, n)?;
    Ok(simulate_raw(net.adjacency(), &b, inputs, x0))
}

/// Minimum-energy open-loop signal `u(t) = Bᵀ (Aᵀ)^{T-t-1} W⁻¹ x_f`,
/// evaluated backwards in `t` without forming matrix powers.
pub(crate) fn min_energy_signal(a: &Mat, b: &Mat, w: &Mat, target: &DVector<f64>, t: usize) -> Option<Vec<DVector<f64>>> {
    let mut z = linalg::spd_solve(w, target)?;
    let mut inputs = vec![DVector::zeros(b.ncols()); t];
    for step in (0..t).rev() {
        inputs[step] = b.transpose() * &z;
        z = a.transpose() * z;
    }
    Some(inputs)
}

pub(crate) fn check_unit(x: &DVector<f64>) -> Result<()> {
    let norm = x.norm();
    if !((norm - 1.0).abs() <= 1e-9) {
        return Err(Error::InvalidArgument(format!("target must be unit norm (got norm {norm})")));
    }
    Ok(())
}

/// Minimum-energy transfer from the origin to the unit target `x_f` in `T`
/// steps. The trajectory's energy equals `x_fᵀ W⁻¹ x_f`.
pub fn min_energy_input(net: &Network, k: &ControlSet, t: usize, x_f: &DVector<f64>) -> Result<Trajectory> {
    let n = net.n();
    if x_f.len() != n {
        return Err(Error::Dimension(format!("target has length {} for {n} nodes", x_f.len())));
    }
    check_unit(x_f)?;
    let report = gramian_finite(net, k, t, CONTROLLABILITY_TOL)?;
    let tol = CONTROLLABILITY_TOL * report.lambda_max.max(1.0);
    let uncontrollable = || Error::Uncontrollable {
        lambda_min: report.lambda_min,
        tol,
        context: format!(" at horizon {t}"),
    };
    if !report.controllable {
        return Err(uncontrollable());
    }
    let b = input_matrix(k, n)?;
    let inputs =
        min_energy_signal(net.adjacency(), &b, &report.w, x_f, t).ok_or_else(uncontrollable)?;
    Ok(simulate_raw(net.adjacency(), &b, &inputs, &DVector::zeros(n)))
}

/// `x_fᵀ W⁻¹ x_f` via Cholesky.
pub fn target_energy(w: &Mat, x_f: &DVector<f64>) -> Option<f64> {
    linalg::spd_solve(w, x_f).map(|y| x_f.dot(&y))
}
