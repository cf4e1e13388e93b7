//! Certificate matrices and the decoupled control law.
//!
//! With every boundary node of cluster `i` in `K_i`, the input
//! `u_{K_i}(t) = v_i(t) − Σ_j B_{K_i}ᵀ A_ij x_j(t)` cancels all incoming
//! coupling, so each cluster evolves as `x_i(t+1) = A_i x_i(t) + B_{K_i} v_i(t)`
//! and is steered with its own local Gramian.

mod hinf;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gramian::{
    check_unit, finite_sum, min_energy_signal, simulate_raw, vector_rows, ControlSet, Horizon,
    Trajectory, CONTROLLABILITY_TOL,
};
use crate::linalg::{self, Mat, SteinSolver};
use crate::netmodel::{Network, STABILITY_TOL};
use crate::partition::Partition;

pub use hinf::{frequency_gain, hinf_gain, DEFAULT_HINF_TOL};

/// Largest horizon tried by the automatic horizon search.
pub const AUTO_HORIZON_CAP: usize = 1 << 16;
/// Reachability tolerance for well-conditioned local Gramians.
pub const REACH_TOL: f64 = 1e-8;
/// Relative tolerance for coupled/decoupled trajectory agreement.
pub const AGREEMENT_TOL: f64 = 1e-9;

/// Λ, Γ, Δ and `λ̄max` for a partition with control set `K`.
#[derive(Debug, Clone, Serialize)]
pub struct GainMatrices {
    #[serde(rename = "Lambda", serialize_with = "crate::gramian::matrix_rows")]
    pub lambda: Mat,
    #[serde(rename = "Gamma", serialize_with = "crate::gramian::matrix_rows")]
    pub gamma: Mat,
    #[serde(rename = "Delta", serialize_with = "crate::gramian::matrix_rows")]
    pub delta: Mat,
    /// Largest spectral radius among the diagonal blocks `A_i`.
    pub lambda_bar_max: f64,
    pub horizon: Horizon,
}

/// Horizon for [`synthesize_decoupled`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanHorizon {
    Fixed(usize),
    /// Smallest `max_i |V_i| · 2^p` making every local Gramian definite.
    Auto,
}

impl std::str::FromStr for PlanHorizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" | "AUTO" => Ok(PlanHorizon::Auto),
            t => match t.parse::<usize>() {
                Ok(v) if v > 0 => Ok(PlanHorizon::Fixed(v)),
                _ => Err(Error::InvalidArgument(format!(
                    "plan horizon must be a positive integer or 'auto', got '{t}'"
                ))),
            },
        }
    }
}

/// Per-cluster view of the network.
struct Cluster {
    nodes: Vec<usize>,
    a: Mat,
    /// Global indices of `K ∩ V_i`, sorted.
    control: Vec<usize>,
    /// `B_{K_i}` in local coordinates.
    b: Mat,
}

fn clusters(net: &Network, partition: &Partition, k: &ControlSet) -> Result<Vec<Cluster>> {
    let covered: usize = partition.blocks().iter().map(Vec::len).sum();
    if covered != net.n() {
        return Err(Error::Dimension(format!(
            "partition covers {covered} nodes, network has {}",
            net.n()
        )));
    }
    if let Some(&bad) = k.nodes().last().filter(|&&i| i >= net.n()) {
        return Err(Error::InvalidArgument(format!("control node {} out of range", bad + 1)));
    }
    Ok(partition
        .blocks()
        .iter()
        .map(|nodes| {
            let control: Vec<usize> = nodes.iter().copied().filter(|&i| k.contains(i)).collect();
            let mut b = Mat::zeros(nodes.len(), control.len());
            for (col, g) in control.iter().enumerate() {
                let local = nodes.binary_search(g).expect("control node in cluster");
                b[(local, col)] = 1.0;
            }
            Cluster {
                nodes: nodes.clone(),
                a: linalg::submatrix(net.adjacency(), nodes, nodes),
                control,
                b,
            }
        })
        .collect())
}

fn cluster_radius(cl: &Cluster, index: usize) -> Result<f64> {
    let rho = linalg::spectral_radius(&cl.a)?;
    if rho >= 1.0 - STABILITY_TOL {
        return Err(Error::Unstable(format!(
            "cluster {} has spectral radius {rho} >= 1",
            index + 1
        )));
    }
    Ok(rho)
}

fn cluster_gramian(cl: &Cluster, horizon: Horizon) -> Result<Mat> {
    let q = &cl.b * cl.b.transpose();
    match horizon {
        Horizon::Finite(0) => Err(Error::InvalidArgument("horizon must be at least 1".into())),
        Horizon::Finite(t) => Ok(finite_sum(&cl.a, &q, t)),
        Horizon::Infinite => Ok(SteinSolver::new(&cl.a, STABILITY_TOL)?.solve(&q)),
    }
}

/// `(λmin, λmax)` of a local Gramian, failing when it is not definite.
fn definite_spectrum(w: &Mat, index: usize, horizon: Horizon) -> Result<(f64, f64)> {
    let ev = linalg::sym_eigenvalues(w);
    let lmin = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = ev.iter().copied().fold(0.0, f64::max);
    let tol = CONTROLLABILITY_TOL * lmax.max(1.0);
    if !(lmin > tol) {
        return Err(Error::Uncontrollable {
            lambda_min: lmin.max(0.0),
            tol,
            context: format!(" in cluster {} at horizon {horizon}", index + 1),
        });
    }
    Ok((lmin, lmax))
}

/// `diag(λmin⁻¹(W_{i,T}))` over the clusters.
pub fn local_energy_matrix(net: &Network, partition: &Partition, k: &ControlSet, horizon: Horizon) -> Result<Mat> {
    let cls = clusters(net, partition, k)?;
    let mut lambda = Mat::zeros(cls.len(), cls.len());
    for (i, cl) in cls.iter().enumerate() {
        cluster_radius(cl, i)?;
        let (lmin, _) = definite_spectrum(&cluster_gramian(cl, horizon)?, i, horizon)?;
        lambda[(i, i)] = 1.0 / lmin;
    }
    Ok(lambda)
}

/// Unit diagonal, `‖A_ij‖₂` off the diagonal.
pub fn interconnection_matrix(net: &Network, partition: &Partition) -> Mat {
    let nb = partition.len();
    Mat::from_fn(nb, nb, |i, j| {
        if i == j {
            1.0
        } else {
            linalg::spectral_norm(&partition.block_matrix(net, i, j))
        }
    })
}

/// Fails when some node of cluster `i` outside `K_i` reads from another
/// cluster, which would break `B_{K_i} B_{K_i}ᵀ A_ij = A_ij`.
pub fn check_cancellation(net: &Network, partition: &Partition, k: &ControlSet) -> Result<()> {
    for (i, psi) in partition.boundary().iter().enumerate() {
        if let Some(&g) = psi.iter().find(|&&g| !k.contains(g)) {
            return Err(Error::Cancellation(format!(
                "boundary node {} of cluster {} is not a control node",
                g + 1,
                i + 1
            )));
        }
    }
    // Direct check of the identity on every coupling block.
    let cls = clusters(net, partition, k)?;
    for (i, ci) in cls.iter().enumerate() {
        for (j, cj) in cls.iter().enumerate() {
            if i == j {
                continue;
            }
            let aij = linalg::submatrix(net.adjacency(), &ci.nodes, &cj.nodes);
            if &ci.b * (ci.b.transpose() * &aij) != aij {
                return Err(Error::Cancellation(format!(
                    "coupling block ({}, {}) is not cancelled by K",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn gains(cls: &[Cluster], net: &Network) -> Result<Mat> {
    let nb = cls.len();
    let pairs: Vec<(usize, usize)> = (0..nb)
        .flat_map(|i| (0..nb).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let values: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let aij = linalg::submatrix(net.adjacency(), &cls[i].nodes, &cls[j].nodes);
            if linalg::max_abs(&aij) == 0.0 {
                return Ok(0.0);
            }
            let c = cls[i].b.transpose() * aij;
            hinf_gain(&cls[j].a, &cls[j].b, &c, DEFAULT_HINF_TOL)
        })
        .collect();
    let mut gamma = Mat::identity(nb, nb);
    for (&(i, j), v) in pairs.iter().zip(values) {
        gamma[(i, j)] = v?;
    }
    Ok(gamma)
}

/// `γ_ij`: H∞ gain of `B_{K_i}ᵀ A_ij (zI − A_j)⁻¹ B_{K_j}`, with unit diagonal.
pub fn l2_gains_matrix(net: &Network, partition: &Partition, k: &ControlSet) -> Result<Mat> {
    check_cancellation(net, partition, k)?;
    let cls = clusters(net, partition, k)?;
    for (i, cl) in cls.iter().enumerate() {
        cluster_radius(cl, i)?;
    }
    gains(&cls, net)
}

/// All certificate matrices at horizon `T`.
pub fn gain_matrices(net: &Network, partition: &Partition, k: &ControlSet, horizon: Horizon) -> Result<GainMatrices> {
    check_cancellation(net, partition, k)?;
    let cls = clusters(net, partition, k)?;
    let mut lambda_bar_max: f64 = 0.0;
    for (i, cl) in cls.iter().enumerate() {
        lambda_bar_max = lambda_bar_max.max(cluster_radius(cl, i)?);
    }
    Ok(GainMatrices {
        lambda: local_energy_matrix(net, partition, k, horizon)?,
        gamma: gains(&cls, net)?,
        delta: interconnection_matrix(net, partition),
        lambda_bar_max,
        horizon,
    })
}

/// `‖Γ Λ^{1/2}‖₂²`, an upper bound on the decoupled law's energy for unit
/// targets.
pub fn decoupled_energy_bound(g: &GainMatrices) -> f64 {
    let sqrt_lambda = g.lambda.map(f64::sqrt);
    linalg::spectral_norm(&(&g.gamma * sqrt_lambda)).powi(2)
}

/// `‖Λ‖∞ ‖Δ‖₁ ‖Δ‖∞ / (1 − λ̄max)²`.
pub fn partition_energy_bound(g: &GainMatrices) -> Result<f64> {
    if g.lambda_bar_max >= 1.0 {
        return Err(Error::Unstable(format!(
            "largest cluster spectral radius {} >= 1",
            g.lambda_bar_max
        )));
    }
    let lam = g.lambda.diagonal().iter().copied().fold(0.0, f64::max);
    Ok(lam * linalg::norm_1(&g.delta) * linalg::norm_inf(&g.delta) / (1.0 - g.lambda_bar_max).powi(2))
}

/// Open-loop signal of one cluster.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterSignal {
    /// Control nodes of the cluster, 1-based.
    #[serde(serialize_with = "one_based")]
    pub control_nodes: Vec<usize>,
    /// `‖x_fi‖`.
    pub target_norm: f64,
    /// `λmin(W_{i,T})`.
    pub lambda_min: f64,
    #[serde(skip)]
    pub lambda_max: f64,
    /// `v_i(0..T-1)`.
    #[serde(serialize_with = "vector_rows")]
    pub v: Vec<DVector<f64>>,
}

fn one_based<S: Serializer>(v: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|i| i + 1).collect::<Vec<_>>().serialize(s)
}

fn vector<S: Serializer>(v: &DVector<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct ControlPlan {
    pub partition: Partition,
    #[serde(rename = "K")]
    pub k: ControlSet,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(serialize_with = "vector")]
    pub x_f: DVector<f64>,
    pub open_loop: Vec<ClusterSignal>,
    pub certificate: GainMatrices,
    /// `Σ_i ‖v_i‖²`.
    pub open_loop_energy: f64,
    pub predicted_energy_bound: f64,
    pub partition_energy_bound: f64,
    pub cancellation_verified: bool,
}

/// Builds the decoupled law steering the network from rest to the unit
/// target `x_f` in `T` steps.
pub fn synthesize_decoupled(
    net: &Network,
    partition: &Partition,
    k: &ControlSet,
    x_f: &DVector<f64>,
    horizon: PlanHorizon,
) -> Result<ControlPlan> {
    if x_f.len() != net.n() {
        return Err(Error::Dimension(format!(
            "target has length {} for {} nodes",
            x_f.len(),
            net.n()
        )));
    }
    check_unit(x_f)?;
    check_cancellation(net, partition, k)?;
    let cls = clusters(net, partition, k)?;
    for (i, cl) in cls.iter().enumerate() {
        cluster_radius(cl, i)?;
    }

    let (t, grams) = match horizon {
        PlanHorizon::Fixed(0) => return Err(Error::InvalidArgument("horizon must be at least 1".into())),
        PlanHorizon::Fixed(t) => {
            let grams = cls
                .iter()
                .map(|cl| cluster_gramian(cl, Horizon::Finite(t)))
                .collect::<Result<Vec<_>>>()?;
            (t, grams)
        }
        PlanHorizon::Auto => auto_horizon(&cls)?,
    };

    let mut open_loop = Vec::with_capacity(cls.len());
    for (i, (cl, w)) in cls.iter().zip(&grams).enumerate() {
        let (lmin, lmax) = definite_spectrum(w, i, Horizon::Finite(t))?;
        let target = DVector::from_iterator(cl.nodes.len(), cl.nodes.iter().map(|&g| x_f[g]));
        let v = min_energy_signal(&cl.a, &cl.b, w, &target, t).ok_or_else(|| {
            Error::Numerical(format!("Cholesky factorization of cluster {} Gramian failed", i + 1))
        })?;
        open_loop.push(ClusterSignal {
            control_nodes: cl.control.clone(),
            target_norm: target.norm(),
            lambda_min: lmin,
            lambda_max: lmax,
            v,
        });
    }
    let open_loop_energy = open_loop
        .iter()
        .flat_map(|c| c.v.iter())
        .map(|u| u.norm_squared())
        .sum();

    let mut lambda = Mat::zeros(cls.len(), cls.len());
    let mut lambda_bar_max: f64 = 0.0;
    for (i, cl) in cls.iter().enumerate() {
        lambda[(i, i)] = 1.0 / open_loop[i].lambda_min;
        lambda_bar_max = lambda_bar_max.max(cluster_radius(cl, i)?);
    }
    let certificate = GainMatrices {
        lambda,
        gamma: gains(&cls, net)?,
        delta: interconnection_matrix(net, partition),
        lambda_bar_max,
        horizon: Horizon::Finite(t),
    };
    Ok(ControlPlan {
        partition: partition.clone(),
        k: k.clone(),
        horizon: t,
        x_f: x_f.clone(),
        open_loop,
        predicted_energy_bound: decoupled_energy_bound(&certificate),
        partition_energy_bound: partition_energy_bound(&certificate)?,
        certificate,
        open_loop_energy,
        cancellation_verified: true,
    })
}

/// Doubles the horizon from the largest cluster size until every local
/// Gramian is definite, using `W_{2T} = W_T + A^T W_T (A^T)ᵀ`.
fn auto_horizon(cls: &[Cluster]) -> Result<(usize, Vec<Mat>)> {
    let mut t = cls.iter().map(|c| c.nodes.len()).max().unwrap_or(1).max(1);
    let mut grams = cls
        .iter()
        .map(|cl| cluster_gramian(cl, Horizon::Finite(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut powers: Vec<Mat> = cls.iter().map(|cl| mat_pow(&cl.a, t)).collect();
    loop {
        let ok = grams
            .iter()
            .enumerate()
            .all(|(i, w)| definite_spectrum(w, i, Horizon::Finite(t)).is_ok());
        if ok {
            return Ok((t, grams));
        }
        if 2 * t > AUTO_HORIZON_CAP {
            let bad = grams
                .iter()
                .enumerate()
                .find_map(|(i, w)| definite_spectrum(w, i, Horizon::Finite(t)).err())
                .expect("some cluster failed");
            return Err(Error::InvalidArgument(format!(
                "no horizon up to {AUTO_HORIZON_CAP} makes every local Gramian definite ({bad})"
            )));
        }
        for (w, p) in grams.iter_mut().zip(powers.iter_mut()) {
            *w = &*w + &*p * &*w * p.transpose();
            *p = &*p * &*p;
        }
        t *= 2;
    }
}

fn mat_pow(a: &Mat, mut e: usize) -> Mat {
    let mut base = a.clone();
    let mut acc = Mat::identity(a.nrows(), a.ncols());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Coupled closed-loop run of a plan alongside its decoupled cluster runs.
#[derive(Debug, Clone, Serialize)]
pub struct DecoupledSimulation {
    pub coupled: Trajectory,
    pub clusters: Vec<Trajectory>,
    /// `‖x(T) − x_f‖`.
    pub final_error: f64,
    /// Largest `‖x_i^coupled(t) − x_i^decoupled(t)‖`.
    pub max_deviation: f64,
}

impl DecoupledSimulation {
    pub fn energy(&self) -> f64 {
        self.coupled.energy
    }
}

/// Runs the full network under the decoupled law, computing the
/// cancellation terms from live neighbor states, and checks both exact
/// reachability and agreement with the independent cluster runs.
pub fn simulate_decoupled(net: &Network, plan: &ControlPlan) -> Result<DecoupledSimulation> {
    let n = net.n();
    check_unit(&plan.x_f)?;
    check_cancellation(net, &plan.partition, &plan.k)?;
    let cls = clusters(net, &plan.partition, &plan.k)?;
    if cls.len() != plan.open_loop.len() {
        return Err(Error::Dimension("plan does not match the partition".into()));
    }
    let t_final = plan.horizon;
    let a = net.adjacency();
    let block_of: Vec<usize> = (0..n).map(|g| plan.partition.block_of(g)).collect();

    // Map each global input slot to (cluster, local input index).
    let slots: Vec<(usize, usize)> = plan
        .k
        .nodes()
        .iter()
        .map(|&g| {
            let i = block_of[g];
            let r = cls[i].control.binary_search(&g).expect("control node in cluster");
            (i, r)
        })
        .collect();
    let b = crate::gramian::input_matrix(&plan.k, n)?;

    let mut states = vec![DVector::zeros(n)];
    let mut inputs = Vec::with_capacity(t_final);
    let mut energy = 0.0;
    for t in 0..t_final {
        let x = states.last().expect("nonempty");
        let u = DVector::from_iterator(
            slots.len(),
            plan.k.nodes().iter().zip(&slots).map(|(&g, &(i, r))| {
                let coupling: f64 = (0..n)
                    .filter(|&l| block_of[l] != i)
                    .map(|l| a[(g, l)] * x[l])
                    .sum();
                plan.open_loop[i].v[t][r] - coupling
            }),
        );
        energy += u.norm_squared();
        let next = a * x + &b * &u;
        inputs.push(u);
        states.push(next);
    }
    let coupled = Trajectory { states, inputs, energy };

    let clusters: Vec<Trajectory> = cls
        .iter()
        .zip(&plan.open_loop)
        .map(|(cl, sig)| simulate_raw(&cl.a, &cl.b, &sig.v, &DVector::zeros(cl.nodes.len())))
        .collect();

    let scale = coupled.states.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut max_deviation: f64 = 0.0;
    for (cl, traj) in cls.iter().zip(&clusters) {
        for (xc, xd) in coupled.states.iter().zip(&traj.states) {
            let dev = cl
                .nodes
                .iter()
                .enumerate()
                .map(|(loc, &g)| (xc[g] - xd[loc]).powi(2))
                .sum::<f64>()
                .sqrt();
            max_deviation = max_deviation.max(dev);
        }
    }
    let agree_tol = AGREEMENT_TOL * scale.max(f64::MIN_POSITIVE);
    if max_deviation > agree_tol {
        return Err(Error::Simulation {
            what: "coupled and decoupled cluster trajectories disagree".into(),
            residual: max_deviation,
            tol: agree_tol,
        });
    }

    let final_error = (coupled.final_state() - &plan.x_f).norm();
    let kappa = plan
        .open_loop
        .iter()
        .map(|c| c.lambda_max / c.lambda_min)
        .fold(1.0, f64::max);
    let reach_tol = REACH_TOL * (kappa / 1e6).max(1.0);
    if final_error > reach_tol {
        return Err(Error::Simulation {
            what: "final state misses the target".into(),
            residual: final_error,
            tol: reach_tol,
        });
    }
    Ok(DecoupledSimulation {
        coupled,
        clusters,
        final_error,
        max_deviation,
    })
}
