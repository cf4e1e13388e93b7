mod common;

use proptest::prelude::*;

use common::{gramian_by_ctrb, gramian_by_kron, min_eig, random_stable, rng, subsets, Mat};
use netctl::bounds::best_mu;
use netctl::gramian::{gramian, observability_gramian, ControlSet, Horizon, CONTROLLABILITY_TOL};
use netctl::netmodel::{
    circulant_network, parse_network, random_symmetric_network, spectral_facts, write_network, Network,
    NetworkFormat, DIAGONALIZABLE_TOL,
};
use netctl::partition::{
    brute_force_select, fiedler_bipartition, median, modal_scores, random_control_set, select_control_nodes_alg1,
    Alg1Options, BruteForceOptions, Metric,
};

fn sym_net(n: usize, rho: f64, seed: u64) -> Network {
    random_symmetric_network(n, rho, 0.4, seed).unwrap()
}

fn asym_net(n: usize, rho: f64, seed: u64) -> Network {
    Network::from_matrix(random_stable(n, rho, &mut rng(seed))).unwrap()
}

fn mask_to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn max_diff(a: &Mat, b: &Mat) -> f64 {
    (a - b).abs().max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_gramian_matches_controllability_matrix(
        n in 2usize..9, t in 1usize..15, rho in 0.2f64..0.98, seed in 0u64..1000, mask in 1u32..256,
    ) {
        let net = asym_net(n, rho, seed);
        let nodes = mask_to_set(mask, n);
        prop_assume!(!nodes.is_empty());
        let k = ControlSet::new(nodes.clone(), n).unwrap();
        let w = gramian(&net, &k, Horizon::Finite(t), CONTROLLABILITY_TOL).unwrap().w;
        let oracle = gramian_by_ctrb(net.adjacency(), &nodes, t);
        prop_assert!(max_diff(&w, &oracle) <= 1e-12 * (1.0 + oracle.abs().max()));
    }

    #[test]
    fn infinite_gramian_matches_kronecker_solve(
        n in 2usize..8, rho in 0.2f64..0.97, seed in 0u64..1000, mask in 1u32..128,
    ) {
        let net = asym_net(n, rho, seed);
        let nodes = mask_to_set(mask, n);
        prop_assume!(!nodes.is_empty());
        let k = ControlSet::new(nodes.clone(), n).unwrap();
        let w = gramian(&net, &k, Horizon::Infinite, CONTROLLABILITY_TOL).unwrap().w;
        let oracle = gramian_by_kron(net.adjacency(), &nodes);
        prop_assert!(max_diff(&w, &oracle) <= 1e-9 * (1.0 + oracle.abs().max()));
    }

    #[test]
    fn gramian_is_additive_over_disjoint_sets(
        n in 2usize..9, rho in 0.2f64..0.95, seed in 0u64..1000, mask in 1u32..256, t in 1usize..12,
    ) {
        let net = sym_net(n, rho, seed);
        let left = mask_to_set(mask, n);
        let right: Vec<usize> = (0..n).filter(|i| !left.contains(i)).collect();
        prop_assume!(!left.is_empty() && !right.is_empty());
        for h in [Horizon::Finite(t), Horizon::Infinite] {
            let g = |s: &[usize]| gramian(&net, &ControlSet::new(s.to_vec(), n).unwrap(), h, CONTROLLABILITY_TOL).unwrap().w;
            let whole = g(&(0..n).collect::<Vec<_>>());
            let sum = g(&left) + g(&right);
            prop_assert!(max_diff(&whole, &sum) <= 1e-11 * (1.0 + whole.abs().max()));
        }
    }

    #[test]
    fn lambda_min_grows_with_horizon_and_set(
        n in 2usize..9, rho in 0.2f64..0.95, seed in 0u64..1000, mask in 1u32..256, t in 1usize..12,
    ) {
        let net = asym_net(n, rho, seed);
        let nodes = mask_to_set(mask, n);
        prop_assume!(!nodes.is_empty());
        let k = ControlSet::new(nodes.clone(), n).unwrap();
        let lam = |k: &ControlSet, h| gramian(&net, k, h, CONTROLLABILITY_TOL).unwrap().lambda_min;
        let tol = 1e-12;
        prop_assert!(lam(&k, Horizon::Finite(t + 1)) >= lam(&k, Horizon::Finite(t)) - tol);
        prop_assert!(lam(&k, Horizon::Infinite) >= lam(&k, Horizon::Finite(t)) - tol);
        let mut bigger = nodes.clone();
        if let Some(extra) = (0..n).find(|i| !nodes.contains(i)) {
            bigger.push(extra);
        }
        let kb = ControlSet::new(bigger, n).unwrap();
        prop_assert!(lam(&kb, Horizon::Finite(t)) >= lam(&k, Horizon::Finite(t)) - tol);
    }

    #[test]
    fn observability_is_dual_to_controllability(
        n in 2usize..8, rho in 0.2f64..0.95, seed in 0u64..1000, mask in 1u32..128, t in 1usize..10,
    ) {
        let net = asym_net(n, rho, seed);
        let nodes = mask_to_set(mask, n);
        prop_assume!(!nodes.is_empty());
        let k = ControlSet::new(nodes.clone(), n).unwrap();
        let a = net.adjacency();
        let c = Mat::from_fn(nodes.len(), n, |i, j| if nodes[i] == j { 1.0 } else { 0.0 });
        let mut oracle = Mat::zeros(n, n);
        let mut power = Mat::identity(n, n);
        for _ in 0..t {
            let ca = &c * &power;
            oracle += ca.transpose() * ca;
            power = a * power;
        }
        let w = observability_gramian(&net, &k, Horizon::Finite(t)).unwrap().w;
        prop_assert!(max_diff(&w, &oracle) <= 1e-12 * (1.0 + oracle.abs().max()));
    }

    #[test]
    fn optimized_bound_dominates_lambda_min(
        n in 2usize..8, rho in 0.2f64..0.95, seed in 0u64..1000, mask in 1u32..128, symmetric in any::<bool>(),
    ) {
        let net = if symmetric { sym_net(n, rho, seed) } else { asym_net(n, rho, seed) };
        let facts = spectral_facts(&net, DIAGONALIZABLE_TOL).unwrap();
        prop_assume!(facts.diagonalizable);
        let nodes = mask_to_set(mask, n);
        prop_assume!(!nodes.is_empty());
        let k = ControlSet::new(nodes.clone(), n).unwrap();
        let bound = best_mu(&facts, &k, 64).unwrap().value;
        let lam = min_eig(&gramian_by_kron(net.adjacency(), &nodes));
        prop_assert!(lam <= bound + 1e-9, "{lam} > {bound}");
    }

    #[test]
    fn fiedler_split_ignores_positive_scaling(
        n in 4usize..14, seed in 0u64..1000, scale in 0.01f64..50.0,
    ) {
        let net = sym_net(n, 0.9, seed);
        let scaled = Network::new(net.adjacency() * scale, false).unwrap();
        let all: Vec<usize> = (0..n).collect();
        prop_assert_eq!(
            fiedler_bipartition(&net, &all).unwrap(),
            fiedler_bipartition(&scaled, &all).unwrap()
        );
    }

    #[test]
    fn modal_scores_follow_relabeling(n in 2usize..10, seed in 0u64..1000, shift in 1usize..9) {
        let net = sym_net(n, 0.9, seed);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let a = net.adjacency();
        let relabeled = Mat::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        let s = modal_scores(a).unwrap();
        let r = modal_scores(&relabeled).unwrap();
        for i in 0..n {
            prop_assert!((r[i] - s[perm[i]]).abs() <= 1e-10 * (1.0 + s[perm[i]].abs()));
        }
    }

    #[test]
    fn networks_survive_serialization(
        n in 1usize..9, seed in 0u64..1000, symmetric in any::<bool>(), which in 0usize..3,
    ) {
        let net = if symmetric { sym_net(n, 0.8, seed) } else { asym_net(n, 0.8, seed) };
        let format = [NetworkFormat::EdgeListCsv, NetworkFormat::MatrixMarket, NetworkFormat::DenseJson][which];
        let back = parse_network(&write_network(&net, format), format).unwrap();
        prop_assert_eq!(back, net);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exhaustive_search_dominates_alg1(n in 3usize..11, rho in 0.5f64..0.95, seed in 0u64..1000, frac in 0.1f64..1.0) {
        let net = sym_net(n, rho, seed);
        let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let alg1 = select_control_nodes_alg1(&net, m, &Alg1Options::default()).unwrap();
        let brute = brute_force_select(&net, m, Horizon::Infinite, Metric::LambdaMin, &BruteForceOptions::default()).unwrap();
        let alg1_lam = min_eig(&gramian_by_kron(net.adjacency(), alg1.k.nodes()));
        let best = brute.objective.unwrap();
        prop_assert!(alg1_lam <= best + 1e-12 * (1.0 + best));
        let oracle_best = subsets(n, m)
            .iter()
            .map(|s| min_eig(&gramian_by_kron(net.adjacency(), s)))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((best - oracle_best.max(0.0)).abs() <= 1e-10 * (1.0 + best));
    }
}

/// Small-network counterpart of the large ordering check: ALG1 against the
/// median of random sets of the same size. On unstructured random graphs
/// ALG1 does not win every case, so this checks that it wins more often
/// than a random set would and is ahead on the geometric mean.
#[test]
fn alg1_beats_random_median_on_balance() {
    let mut r = rng(11);
    let mut losses = Vec::new();
    let mut log_gain = 0.0;
    let mut cases = 0;
    for seed in 0..20u64 {
        let n = 8 + (seed as usize % 5);
        let net = sym_net(n, 0.9, 300 + seed);
        for m in [2, n / 2, n - 2] {
            let alg1 = select_control_nodes_alg1(&net, m, &Alg1Options::default()).unwrap();
            let lam = min_eig(&gramian_by_kron(net.adjacency(), alg1.k.nodes()));
            let random: Vec<f64> = (0..21)
                .map(|_| {
                    let k = random_control_set(n, m, &mut r).unwrap();
                    min_eig(&gramian_by_kron(net.adjacency(), k.nodes()))
                })
                .collect();
            let med = median(&random);
            cases += 1;
            log_gain += (lam / med).log10();
            if lam < med * (1.0 - 1e-9) {
                losses.push((seed, n, m));
            }
        }
    }
    assert!(2 * losses.len() < cases, "ALG1 below the random median in {losses:?} of {cases}");
    assert!(log_gain > 0.0, "mean log10 gain {}", log_gain / cases as f64);
}

#[test]
fn circulant_singletons_match_oracle() {
    let net = circulant_network(20, 0.75).unwrap();
    let a = net.adjacency();
    for metric in [Metric::LambdaMin, Metric::Trace] {
        let res = brute_force_select(&net, 1, Horizon::Infinite, metric, &BruteForceOptions::default()).unwrap();
        let oracle = (0..20)
            .map(|i| {
                let w = gramian_by_kron(a, &[i]);
                match metric {
                    Metric::Trace => w.trace(),
                    _ => min_eig(&w).max(0.0),
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((res.objective.unwrap() - oracle).abs() <= 1e-12 * (1.0 + oracle));
        // Every node is equivalent on a ring, so the first one wins the tie.
        assert_eq!(res.k.nodes(), &[0]);
    }
}
