//! Control-node selection: ALG1 (greedy spectral bisection), modal and
//! trace heuristics, a brute-force oracle, and uniform random sets.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{fiedler_bipartition, Partition};
use crate::error::{Error, Result};
use crate::gramian::{finite_sum, ControlSet, Horizon, NodeGramians, CONTROLLABILITY_TOL};
use crate::linalg::{self, Mat};
use crate::netmodel::{Network, STABILITY_TOL, SYMMETRY_TOL};

pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 2_000_000;

/// Relative gap under which two scores count as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SelectionMethod {
    Alg1,
    Modal,
    Trace,
    Brute,
    Random,
}

/// Objective for [`brute_force_select`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    LambdaMin,
    Trace,
    /// Maximizes `-Trace(W⁻¹)`.
    TraceInv,
    LogDet,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "lambda_min" | "lmin" => Ok(Metric::LambdaMin),
            "trace" => Ok(Metric::Trace),
            "trace_inv" => Ok(Metric::TraceInv),
            "log_det" | "logdet" => Ok(Metric::LogDet),
            other => Err(Error::InvalidArgument(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    #[serde(rename = "K")]
    pub k: ControlSet,
    pub method: SelectionMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    /// Global `λmin(W_{K,T})` after each ALG1 iteration, before any trim.
    pub lambda_min_history: Vec<f64>,
    /// Global `λmin(W_{K,T})` of the returned set, when computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    /// Best metric value (brute force only).
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_ext_float")]
    pub objective: Option<f64>,
    /// Whether each final `(A_i, B_{K_i})` pair is controllable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters_controllable: Option<Vec<bool>>,
    pub trimmed: bool,
    /// Nodes added by modal padding, 1-based, in order of addition.
    pub padded: Vec<usize>,
    pub warnings: Vec<String>,
}

fn opt_ext_float<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => crate::gramian::ext_float(v, s),
        None => s.serialize_none(),
    }
}

impl SelectionResult {
    fn plain(k: ControlSet, method: SelectionMethod) -> Self {
        SelectionResult {
            k,
            method,
            partition: None,
            lambda_min_history: Vec::new(),
            lambda_min: None,
            objective: None,
            clusters_controllable: None,
            trimmed: false,
            padded: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn check_size(m: usize, n: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("number of control nodes must be at least 1".into()));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "cannot select {m} control nodes from {n}"
        )));
    }
    Ok(())
}

/// Indices of the `m` largest scores; ties (within a relative 1e-12) go to
/// the lower index.
fn top_m(scores: &[f64], m: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(m);
    let mut taken = vec![false; scores.len()];
    for _ in 0..m {
        let mut best: Option<usize> = None;
        for (i, &s) in scores.iter().enumerate() {
            if taken[i] {
                continue;
            }
            if best.is_none_or(|b| beats(s, scores[b])) {
                best = Some(i);
            }
        }
        let b = best.expect("m <= n");
        taken[b] = true;
        chosen.push(b);
    }
    chosen.sort_unstable();
    chosen
}

/// `a` beats the incumbent `b` only when strictly larger beyond the tie gap.
fn beats(a: f64, b: f64) -> bool {
    if a == b || a.is_nan() {
        return false;
    }
    if b == f64::NEG_INFINITY || b.is_nan() {
        return true;
    }
    if a == f64::INFINITY {
        return b != f64::INFINITY;
    }
    a - b > TIE_TOL * a.abs().max(b.abs())
}

/// Modal controllability `φ_i = Σ_j (1 − λ_j²) v_ij²` for symmetric `A`.
pub fn modal_scores(a: &Mat) -> Result<Vec<f64>> {
    if !linalg::is_symmetric(a, SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(
            "modal controllability needs a symmetric A; use spectral_facts for the general case"
                .into(),
        ));
    }
    let (vals, vecs) = linalg::sym_eigen(a);
    Ok((0..a.nrows())
        .map(|i| {
            vals.iter()
                .enumerate()
                .map(|(j, l)| (1.0 - l * l) * vecs[(i, j)].powi(2))
                .sum()
        })
        .collect())
}

/// The `k` nodes of largest modal controllability.
pub fn modal_select(net: &Network, k: usize) -> Result<SelectionResult> {
    check_size(k, net.n())?;
    let phi = modal_scores(net.adjacency())?;
    let set = ControlSet::new(top_m(&phi, k), net.n())?;
    Ok(SelectionResult::plain(set, SelectionMethod::Modal))
}

/// The `m` largest diagonal entries of `Σ_{τ<T} A^{2τ}`, or of `(I − A²)⁻¹`
/// when `T` is infinite. These maximize `Trace(W_{K,T})`.
pub fn trace_optimal_select(net: &Network, m: usize, horizon: Horizon) -> Result<SelectionResult> {
    let n = net.n();
    check_size(m, n)?;
    if !net.is_symmetric() {
        return Err(Error::NotSymmetric("trace-optimal selection needs a symmetric A".into()));
    }
    let a = net.adjacency();
    let diag: Vec<f64> = match horizon {
        Horizon::Finite(t) => {
            if t == 0 {
                return Err(Error::InvalidArgument("horizon must be at least 1".into()));
            }
            finite_sum(a, &Mat::identity(n, n), t).diagonal().iter().copied().collect()
        }
        Horizon::Infinite => {
            let rho = linalg::spectral_radius(a)?;
            if rho >= 1.0 - STABILITY_TOL {
                return Err(Error::Unstable(format!(
                    "spectral radius {rho} >= 1; (I - A^2)^-1 series diverges"
                )));
            }
            let m2 = Mat::identity(n, n) - a * a;
            let inv = m2
                .lu()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("I - A^2 is singular".into()))?;
            inv.diagonal().iter().copied().collect()
        }
    };
    let set = ControlSet::new(top_m(&diag, m), n)?;
    let mut r = SelectionResult::plain(set, SelectionMethod::Trace);
    r.objective = Some(r.k.nodes().iter().map(|&i| diag[i]).sum());
    Ok(r)
}

pub fn random_control_set<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<ControlSet> {
    check_size(m, n)?;
    ControlSet::new(rand::seq::index::sample(rng, n, m).into_vec(), n)
}

/// Median of a nonempty sample (mean of the two middle values when even).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    /// Maximum number of subsets to evaluate.
    pub cap: u128,
    pub tol_ctrb: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            cap: DEFAULT_BRUTE_FORCE_CAP,
            tol_ctrb: CONTROLLABILITY_TOL,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// The `rank`-th `m`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, m: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(m);
    let mut next = 0;
    for slot in 0..m {
        let mut i = next;
        loop {
            let below = binomial(n - i - 1, m - slot - 1);
            if rank < below {
                break;
            }
            rank -= below;
            i += 1;
        }
        out.push(i);
        next = i + 1;
    }
    out
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let m = c.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if c[i] < n - m + i {
            c[i] += 1;
            for j in i + 1..m {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn score(w: &Mat, metric: Metric, tol_ctrb: f64) -> f64 {
    if metric == Metric::Trace {
        return w.trace();
    }
    let ev = linalg::sym_eigenvalues(w);
    let lmin = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = ev.iter().copied().fold(0.0, f64::max);
    let controllable = lmin > tol_ctrb * lmax.max(1.0);
    match metric {
        Metric::LambdaMin => lmin.max(0.0),
        Metric::TraceInv if controllable => -ev.iter().map(|l| 1.0 / l).sum::<f64>(),
        Metric::LogDet if controllable => ev.iter().map(|l| l.ln()).sum(),
        _ => f64::NEG_INFINITY,
    }
}

/// Exhaustive argmax of `metric` over all `m`-subsets, with ties resolved
/// toward the lexicographically smallest subset.
pub fn brute_force_select(
    net: &Network,
    m: usize,
    horizon: Horizon,
    metric: Metric,
    opts: &BruteForceOptions,
) -> Result<SelectionResult> {
    let n = net.n();
    check_size(m, n)?;
    let total = binomial(n, m);
    if total > opts.cap {
        return Err(Error::CapExceeded {
            count: total,
            cap: opts.cap,
        });
    }
    let grams = NodeGramians::new(net, horizon)?;
    let chunks = total.min(4 * rayon::current_num_threads() as u128 * 16).max(1);
    let best_per_chunk: Vec<Option<(f64, Vec<usize>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = total * c / chunks;
            let end = total * (c + 1) / chunks;
            if start == end {
                return None;
            }
            let mut comb = unrank_combination(n, m, start);
            let mut best: Option<(f64, Vec<usize>)> = None;
            for _ in start..end {
                let s = score(&grams.sum(&comb), metric, opts.tol_ctrb);
                if best.as_ref().is_none_or(|(b, _)| beats(s, *b)) {
                    best = Some((s, comb.clone()));
                }
                next_combination(&mut comb, n);
            }
            best
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cand in best_per_chunk.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| beats(cand.0, *b)) {
            best = Some(cand);
        }
    }
    let (value, nodes) = best.expect("at least one subset");
    let set = ControlSet::new(nodes, n)?;
    let mut r = SelectionResult::plain(set, SelectionMethod::Brute);
    r.objective = Some(value);
    r.lambda_min = Some(grams.lambda_min(r.k.nodes()));
    Ok(r)
}

#[derive(Debug, Clone, Copy)]
pub struct Alg1Options {
    /// Horizon of the global Gramian recorded in the history.
    pub horizon: Horizon,
    /// Horizon of cluster Gramians; the cluster size when `None`.
    pub cluster_horizon: Option<usize>,
    pub tol_ctrb: f64,
}

impl Default for Alg1Options {
    fn default() -> Self {
        Alg1Options {
            horizon: Horizon::Infinite,
            cluster_horizon: None,
            tol_ctrb: CONTROLLABILITY_TOL,
        }
    }
}

/// Gramian of `(A_i, B_{K_i})` over the cluster horizon; returns
/// `(λmin, λmax)`.
fn cluster_spectrum(net: &Network, block: &[usize], in_k: &[bool], horizon: Option<usize>) -> (f64, f64) {
    let a = linalg::submatrix(net.adjacency(), block, block);
    let mut q = Mat::zeros(block.len(), block.len());
    let mut any = false;
    for (local, &node) in block.iter().enumerate() {
        if in_k[node] {
            q[(local, local)] = 1.0;
            any = true;
        }
    }
    if !any {
        return (0.0, 0.0);
    }
    let w = finite_sum(&a, &q, horizon.unwrap_or(block.len()).max(1));
    let ev = linalg::sym_eigenvalues(&w);
    let lmin = ev.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let lmax = ev.iter().copied().fold(0.0, f64::max);
    (lmin, lmax)
}

/// ALG1: greedy spectral bisection of the least controllable
/// cluster, taking the resulting boundary nodes as control nodes.
///
/// On overshoot the last split's boundary nodes are dropped and the
/// partition reverts to the one before that split, so the reported
/// partition always has its boundary inside `K`. Remaining slots are
/// filled one at a time with the highest-modal-controllability free node
/// of the least controllable cluster that still has free nodes.
pub fn select_control_nodes_alg1(net: &Network, m: usize, opts: &Alg1Options) -> Result<SelectionResult> {
    let n = net.n();
    if m == 0 {
        return Err(Error::InvalidArgument("number of control nodes must be at least 1".into()));
    }
    if !net.is_connected() {
        return Err(Error::Disconnected("ALG1 needs a connected network".into()));
    }
    let grams = NodeGramians::new(net, opts.horizon)?;
    if m >= n {
        let k = ControlSet::all(n);
        let mut r = SelectionResult::plain(k, SelectionMethod::Alg1);
        let lmin = grams.lambda_min(r.k.nodes());
        r.partition = Some(Partition::trivial(net));
        r.lambda_min_history = vec![lmin];
        r.lambda_min = Some(lmin);
        r.clusters_controllable = Some(vec![true]);
        return Ok(r);
    }

    let mut partition = Partition::trivial(net);
    let mut k: Vec<usize> = Vec::new();
    let mut in_k = vec![false; n];
    let mut history = vec![grams.lambda_min(&k)];
    let mut warnings = Vec::new();
    let mut trimmed = false;

    let least_controllable = |p: &Partition, in_k: &[bool], need_free: bool| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (idx, b) in p.blocks().iter().enumerate() {
            if need_free && b.iter().all(|&i| in_k[i]) {
                continue;
            }
            let (l, _) = cluster_spectrum(net, b, in_k, opts.cluster_horizon);
            if best.is_none_or(|(_, bl)| l < bl) {
                best = Some((idx, l));
            }
        }
        best.map(|(i, _)| i)
    };

    while k.len() < m {
        let target = least_controllable(&partition, &in_k, false).expect("nonempty partition");
        let block = partition.blocks()[target].clone();
        let split = if block.len() < 2 {
            Err(Error::InvalidArgument(format!("cluster {} has a single node", target + 1)))
        } else {
            fiedler_bipartition(net, &block)
        };
        let (left, right) = match split {
            Ok(s) => s,
            Err(e) => {
                warnings.push(format!(
                    "least controllable cluster {} cannot be split ({e}); padding with modal nodes",
                    target + 1
                ));
                break;
            }
        };
        let mut blocks: Vec<Vec<usize>> = partition.blocks().to_vec();
        blocks[target] = left;
        blocks.insert(target + 1, right);
        let next = Partition::new(net, blocks)?;
        let added: Vec<usize> = next.all_boundary().into_iter().filter(|&i| !in_k[i]).collect();
        if k.len() + added.len() > m {
            trimmed = true;
            let mut with = k.clone();
            with.extend(&added);
            history.push(grams.lambda_min(&with));
            break;
        }
        for &i in &added {
            in_k[i] = true;
        }
        k.extend(added);
        partition = next;
        history.push(grams.lambda_min(&k));
    }

    let mut padded = Vec::new();
    let mut asymmetric_warned = false;
    while k.len() < m {
        let target = least_controllable(&partition, &in_k, true).expect("free node exists since |K| < n");
        let block = &partition.blocks()[target];
        let mut a = linalg::submatrix(net.adjacency(), block, block);
        if !linalg::is_symmetric(&a, SYMMETRY_TOL) {
            if !asymmetric_warned {
                warnings.push("modal padding used the symmetric part of an asymmetric cluster".into());
                asymmetric_warned = true;
            }
            a = (&a + a.transpose()) * 0.5;
        }
        let phi = modal_scores(&a)?;
        let mut best: Option<usize> = None;
        for (local, &node) in block.iter().enumerate() {
            if in_k[node] {
                continue;
            }
            if best.is_none_or(|b| beats(phi[local], phi[b])) {
                best = Some(local);
            }
        }
        let node = block[best.expect("cluster has a free node")];
        in_k[node] = true;
        k.push(node);
        padded.push(node + 1);
    }

    let clusters_controllable = partition
        .blocks()
        .iter()
        .map(|b| {
            let (lmin, lmax) = cluster_spectrum(net, b, &in_k, opts.cluster_horizon);
            lmin > opts.tol_ctrb * lmax.max(1.0)
        })
        .collect();
    let set = ControlSet::new(k, n)?;
    let final_lmin = grams.lambda_min(set.nodes());
    Ok(SelectionResult {
        k: set,
        method: SelectionMethod::Alg1,
        partition: Some(partition),
        lambda_min_history: history,
        lambda_min: Some(final_lmin),
        objective: None,
        clusters_controllable: Some(clusters_controllable),
        trimmed,
        padded,
        warnings,
    })
}
