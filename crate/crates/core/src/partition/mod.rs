//! Network partitions, boundary nodes, and Fiedler bisection.

mod select;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::netmodel::Network;

pub use select::{
    brute_force_select, median, modal_scores, modal_select, random_control_set,
    select_control_nodes_alg1, trace_optimal_select, Alg1Options, BruteForceOptions, Metric,
    SelectionMethod, SelectionResult, DEFAULT_BRUTE_FORCE_CAP,
};

/// Entries of the Fiedler vector below this magnitude count as zero and are
/// assigned to the positive side.
pub const FIEDLER_ZERO_TOL: f64 = 1e-12;

/// Disjoint blocks covering every node, with per-block boundary nodes.
///
/// Node `i` of block `k` is a boundary node when `a_ij ≠ 0` for some `j`
/// outside block `k` (a row scan of `A`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    boundary: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    /// Sorts each block; fails unless the blocks are nonempty, disjoint, and
    /// cover `0..n`.
    pub fn new(net: &Network, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = net.n();
        let mut blocks = blocks;
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        let block_of = block_index(n, &blocks)?;
        if let Some(missing) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "node {} is not covered by any block",
                missing + 1
            )));
        }
        let boundary = boundary_nodes(net, &blocks)?;
        Ok(Partition {
            blocks,
            boundary,
            block_of,
        })
    }

    pub fn trivial(net: &Network) -> Self {
        Partition::new(net, vec![(0..net.n()).collect()]).expect("trivial partition is valid")
    }

    /// Consecutive blocks of the given sizes, in node order.
    pub fn contiguous(net: &Network, sizes: &[usize]) -> Result<Self> {
        if sizes.iter().sum::<usize>() != net.n() {
            return Err(Error::InvalidArgument(format!(
                "block sizes sum to {}, network has {} nodes",
                sizes.iter().sum::<usize>(),
                net.n()
            )));
        }
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let b: Vec<usize> = (start..start + s).collect();
                start += s;
                b
            })
            .collect();
        Partition::new(net, blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn boundary(&self) -> &[Vec<usize>] {
        &self.boundary
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.block_of[node]
    }

    /// Union of all boundary sets, sorted.
    pub fn all_boundary(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.boundary.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Node relabeling listing the blocks one after the other; `P A Pᵀ` then
    /// has the block layout `[A_i | A_ij]`.
    pub fn permutation(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// `A_ij`: rows of block `i`, columns of block `j`.
    pub fn block_matrix(&self, net: &Network, i: usize, j: usize) -> Mat {
        linalg::submatrix(net.adjacency(), &self.blocks[i], &self.blocks[j])
    }

    /// `P A Pᵀ` under [`Partition::permutation`].
    pub fn permuted_adjacency(&self, net: &Network) -> Mat {
        let p = self.permutation();
        linalg::submatrix(net.adjacency(), &p, &p)
    }
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let one = |v: &[Vec<usize>]| -> Vec<Vec<usize>> {
            v.iter().map(|b| b.iter().map(|&i| i + 1).collect()).collect()
        };
        let mut st = s.serialize_struct("Partition", 3)?;
        st.serialize_field("blocks", &one(&self.blocks))?;
        st.serialize_field("boundary", &one(&self.boundary))?;
        st.serialize_field(
            "permutation",
            &self.permutation().iter().map(|&i| i + 1).collect::<Vec<_>>(),
        )?;
        st.end()
    }
}

/// Block index per node (`usize::MAX` when uncovered).
fn block_index(n: usize, blocks: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut block_of = vec![usize::MAX; n];
    for (k, b) in blocks.iter().enumerate() {
        if b.is_empty() {
            return Err(Error::InvalidArgument(format!("block {} is empty", k + 1)));
        }
        for &i in b {
            if i >= n {
                return Err(Error::InvalidArgument(format!("node {} out of range 1..={n}", i + 1)));
            }
            if block_of[i] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "blocks overlap at node {}",
                    i + 1
                )));
            }
            block_of[i] = k;
        }
    }
    Ok(block_of)
}

/// Per-block boundary sets by an exact scan of each node's row.
pub fn boundary_nodes(net: &Network, blocks: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let n = net.n();
    let block_of = block_index(n, blocks)?;
    let a = net.adjacency();
    Ok(blocks
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut psi: Vec<usize> = b
                .iter()
                .copied()
                .filter(|&i| (0..n).any(|j| block_of[j] != k && a[(i, j)] != 0.0))
                .collect();
            psi.sort_unstable();
            psi
        })
        .collect())
}

/// Splits `block` by the signs of the Fiedler vector of the Laplacian of
/// the induced subgraph with weights `(|A| + |A|ᵀ)/2`.
///
/// The sign is fixed so that the first non-negligible entry is positive;
/// zero entries join the positive side, which is returned first.
pub fn fiedler_bipartition(net: &Network, block: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if block.len() < 2 {
        return Err(Error::InvalidArgument("cannot bisect a block with fewer than 2 nodes".into()));
    }
    let mut nodes = block.to_vec();
    nodes.sort_unstable();
    if let Some(&bad) = nodes.iter().find(|&&i| i >= net.n()) {
        return Err(Error::InvalidArgument(format!("node {} out of range", bad + 1)));
    }
    if !net.is_connected_on(&nodes) {
        return Err(Error::Disconnected(format!(
            "block of {} nodes is not connected",
            nodes.len()
        )));
    }
    let s = linalg::submatrix(&net.undirected_weights(), &nodes, &nodes);
    let k = nodes.len();
    let mut lap = -s.clone();
    for i in 0..k {
        lap[(i, i)] = (0..k).filter(|&j| j != i).map(|j| s[(i, j)]).sum();
    }
    let (vals, vecs) = linalg::sym_eigen(&lap);
    let fiedler = canonical_fiedler(&vals, &vecs);
    let sign = fiedler
        .iter()
        .find(|v| v.abs() >= FIEDLER_ZERO_TOL)
        .map_or(1.0, |v| v.signum());
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (idx, &v) in fiedler.iter().enumerate() {
        if sign * v > -FIEDLER_ZERO_TOL {
            pos.push(nodes[idx]);
        } else {
            neg.push(nodes[idx]);
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Numerical("Fiedler vector does not change sign".into()));
    }
    Ok((pos, neg))
}

/// Recursive Fiedler bisection of the largest block (lowest index on ties)
/// until there are `count` blocks.
pub fn spectral_partition(net: &Network, count: usize) -> Result<Partition> {
    if count == 0 || count > net.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} nodes into {count} blocks",
            net.n()
        )));
    }
    let mut blocks: Vec<Vec<usize>> = vec![(0..net.n()).collect()];
    while blocks.len() < count {
        let largest = blocks
            .iter()
            .enumerate()
            .fold(0, |best, (i, b)| if b.len() > blocks[best].len() { i } else { best });
        let (left, right) = fiedler_bipartition(net, &blocks[largest])?;
        blocks[largest] = left;
        blocks.insert(largest + 1, right);
    }
    Partition::new(net, blocks)
}

/// The Fiedler vector, made basis-independent when `λ₂` is repeated by
/// projecting the centered index ramp onto its eigenspace.
fn canonical_fiedler(vals: &nalgebra::DVector<f64>, vecs: &Mat) -> nalgebra::DVector<f64> {
    let k = vals.len();
    let scale = vals[k - 1].abs().max(f64::MIN_POSITIVE);
    let l2 = vals[1];
    let cols: Vec<usize> = (1..k).filter(|&j| (vals[j] - l2).abs() <= 1e-9 * scale).collect();
    if cols.len() == 1 {
        return vecs.column(1).into_owned();
    }
    let mid = (k as f64 - 1.0) / 2.0;
    let ramp = nalgebra::DVector::from_fn(k, |i, _| i as f64 - mid);
    let mut v = nalgebra::DVector::zeros(k);
    for &j in &cols {
        let c = vecs.column(j);
        v += c * c.dot(&ramp);
    }
    if v.norm() < 1e-8 * ramp.norm() {
        return vecs.column(1).into_owned();
    }
    let norm = v.norm();
    v / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::circulant_network;

    fn path(n: usize) -> Network {
        let mut a = Mat::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
            a[(i + 1, i)] = 1.0;
        }
        Network::new(a, false).unwrap()
    }

    fn two_cliques() -> Network {
        let mut a = Mat::zeros(8, 8);
        for base in [0, 4] {
            for i in base..base + 4 {
                for j in base..base + 4 {
                    if i != j {
                        a[(i, j)] = 1.0;
                    }
                }
            }
        }
        a[(3, 4)] = 1.0;
        a[(4, 3)] = 1.0;
        Network::new(a, false).unwrap()
    }

    #[test]
    fn path_bisection() {
        let (p, q) = fiedler_bipartition(&path(4), &[0, 1, 2, 3]).unwrap();
        assert_eq!(p, vec![0, 1]);
        assert_eq!(q, vec![2, 3]);
    }

    #[test]
    fn clique_bisection() {
        let (p, q) = fiedler_bipartition(&two_cliques(), &(0..8).collect::<Vec<_>>()).unwrap();
        assert_eq!(p, vec![0, 1, 2, 3]);
        assert_eq!(q, vec![4, 5, 6, 7]);
    }

    #[test]
    fn circulant_bisection_gives_two_arcs() {
        let net = circulant_network(24, 0.5).unwrap();
        let (p, q) = fiedler_bipartition(&net, &(0..24).collect::<Vec<_>>()).unwrap();
        assert_eq!(p.len(), 12);
        assert_eq!(q.len(), 12);
        for side in [&p, &q] {
            let cyclic_gaps = side
                .iter()
                .zip(side.iter().cycle().skip(1))
                .filter(|(a, b)| (**b + 24 - **a) % 24 != 1)
                .count();
            assert_eq!(cyclic_gaps, 1, "not a contiguous arc: {side:?}");
        }
    }

    #[test]
    fn bisection_errors() {
        let net = path(4);
        assert!(fiedler_bipartition(&net, &[2]).is_err());
        assert!(matches!(
            fiedler_bipartition(&net, &[0, 3]),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn bisection_scale_invariant() {
        let net = two_cliques();
        let scaled = Network::new(net.adjacency() * 3.7, false).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(
            fiedler_bipartition(&net, &all).unwrap(),
            fiedler_bipartition(&scaled, &all).unwrap()
        );
    }

    #[test]
    fn boundary_of_circulant_blocks() {
        let net = circulant_network(24, 0.5).unwrap();
        let p = Partition::contiguous(&net, &[4; 6]).unwrap();
        for (k, psi) in p.boundary().iter().enumerate() {
            assert_eq!(psi, &vec![4 * k, 4 * k + 3]);
        }
        assert_eq!(p.all_boundary().len(), 12);
    }

    #[test]
    fn single_block_has_no_boundary() {
        let net = circulant_network(6, 0.5).unwrap();
        assert!(Partition::trivial(&net).boundary()[0].is_empty());
        let bd = Network::new(
            Mat::from_row_slice(4, 4, &[0.5, 0.1, 0.0, 0.0, 0.1, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.2, 0.0, 0.0, 0.2, 0.5]),
            false,
        )
        .unwrap();
        let p = Partition::contiguous(&bd, &[2, 2]).unwrap();
        assert!(p.boundary().iter().all(|b| b.is_empty()));
    }

    #[test]
    fn partition_validation() {
        let net = path(4);
        assert!(boundary_nodes(&net, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(Partition::new(&net, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Partition::new(&net, vec![vec![0, 1, 2, 3], vec![]]).is_err());
    }

    #[test]
    fn permuted_block_form() {
        let net = path(5);
        let p = Partition::new(&net, vec![vec![4, 0], vec![1, 2, 3]]).unwrap();
        assert_eq!(p.permutation(), vec![0, 4, 1, 2, 3]);
        let pa = p.permuted_adjacency(&net);
        assert_eq!(pa.view((0, 0), (2, 2)).into_owned(), p.block_matrix(&net, 0, 0));
        assert_eq!(pa.view((0, 2), (2, 3)).into_owned(), p.block_matrix(&net, 0, 1));
    }

    #[test]
    fn directed_boundary_is_row_scan() {
        // Only node 2 (0-based 1) reads from the other block.
        let a = Mat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0]);
        let net = Network::new(a, true).unwrap();
        let p = Partition::new(&net, vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(p.boundary()[0], vec![1]);
        assert!(p.boundary()[1].is_empty());
    }
}
