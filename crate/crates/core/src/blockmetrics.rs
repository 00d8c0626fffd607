//! Blocks joining supernodes, block counts and the reordering objectives.
//!
//! A `(J_k, J_r)`-block is a maximal run of consecutive rows of `hadj(J_r)`
//! inside target supernode `J_k`; `bc(J_k, J_r)` counts them. A maximal
//! block is a maximal run of consecutive rows of `hadj(J_r)` regardless of
//! target boundaries; the numeric factorization uses those for its
//! rectangular updates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::symbolic::{HigherAdjacency, SupernodePartition};
use crate::{Error, Permutation, Result};

/// A run of rows `first..=last` of `hadj(source)`, starting at position
/// `offset` within that set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub source: usize,
    /// Target supernode, or `None` for a maximal block.
    pub target: Option<usize>,
    pub first: usize,
    pub last: usize,
    pub offset: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Per-source block lists, in ascending row order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLists {
    block_ptr: Vec<usize>,
    blocks: Vec<Block>,
    maximal_ptr: Vec<usize>,
    maximal: Vec<Block>,
}

impl BlockLists {
    pub fn num_sources(&self) -> usize {
        self.block_ptr.len() - 1
    }

    /// `(J_k, J_s)`-blocks of source `s` over all targets `k`.
    pub fn blocks(&self, s: usize) -> &[Block] {
        &self.blocks[self.block_ptr[s]..self.block_ptr[s + 1]]
    }

    /// Maximal blocks of source `s`.
    pub fn maximal(&self, s: usize) -> &[Block] {
        &self.maximal[self.maximal_ptr[s]..self.maximal_ptr[s + 1]]
    }

    pub fn all_blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `bc(J_k, J_r)` for every pair with at least one block, keyed `(k, r)`.
    pub fn pair_counts(&self) -> BTreeMap<(usize, usize), u64> {
        let mut m = BTreeMap::new();
        for b in &self.blocks {
            *m.entry((b.target.expect("targeted block"), b.source)).or_insert(0) += 1;
        }
        m
    }
}

/// Splits each `hadj(J_r)`, given in the current labels, into blocks.
pub fn block_lists(part: &SupernodePartition, hadj: &HigherAdjacency) -> BlockLists {
    let mut out = BlockLists { block_ptr: vec![0], blocks: Vec::new(), maximal_ptr: vec![0], maximal: Vec::new() };
    for s in 0..part.len() {
        let h = hadj.get(s);
        let mut k = 0;
        while k < h.len() {
            // maximal run h[k..e]
            let mut e = k + 1;
            while e < h.len() && h[e] == h[e - 1] + 1 {
                e += 1;
            }
            out.maximal.push(Block { source: s, target: None, first: h[k], last: h[e - 1], offset: k });
            // cut the run at supernode boundaries
            let mut a = k;
            while a < e {
                let t = part.snode_of(h[a]);
                let stop = (part.last_col(t) + 1).min(h[e - 1] + 1);
                let b = a + (stop - h[a]);
                out.blocks.push(Block { source: s, target: Some(t), first: h[a], last: h[b - 1], offset: a });
                a = b;
            }
            k = e;
        }
        out.block_ptr.push(out.blocks.len());
        out.maximal_ptr.push(out.maximal.len());
    }
    out
}

/// Checks that `order` only moves columns within their supernode.
pub fn check_boundary_preserving(part: &SupernodePartition, order: &Permutation) -> Result<()> {
    if order.len() != part.n() {
        return Err(Error::SizeMismatch { expected: part.n(), found: order.len() });
    }
    for (col, &new) in order.forward().iter().enumerate() {
        if part.snode_of(col) != part.snode_of(new) {
            return Err(Error::NotBoundaryPreserving { column: col });
        }
    }
    Ok(())
}

/// Block lists after relabeling the rows by a within-supernode `order`.
pub fn block_list(part: &SupernodePartition, hadj: &HigherAdjacency, order: &Permutation) -> Result<BlockLists> {
    check_boundary_preserving(part, order)?;
    Ok(block_lists(part, &hadj.relabel(order)))
}

/// Per-target block statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockStats {
    pub width: Vec<usize>,
    /// Distinct sources with a block into each target.
    pub updaters: Vec<usize>,
    /// `sum_r bc(J_k, J_r)` per target `k`.
    pub block_count: Vec<u64>,
    /// `sum_r |J_r| * bc(J_k, J_r)` per target `k`.
    pub weighted_count: Vec<u64>,
    pub max_block: Vec<usize>,
    pub rows_in_blocks: Vec<usize>,
    /// Block sizes bucketed by powers of two: bucket `b` holds sizes in
    /// `[2^b, 2^(b+1))`.
    pub histogram: Vec<u64>,
}

impl BlockStats {
    pub fn compute(part: &SupernodePartition, blocks: &BlockLists) -> Self {
        let ns = part.len();
        let mut st = BlockStats {
            width: (0..ns).map(|s| part.width(s)).collect(),
            updaters: vec![0; ns],
            block_count: vec![0; ns],
            weighted_count: vec![0; ns],
            max_block: vec![0; ns],
            rows_in_blocks: vec![0; ns],
            histogram: Vec::new(),
        };
        for s in 0..blocks.num_sources() {
            let mut last_target = usize::MAX;
            for b in blocks.blocks(s) {
                let t = b.target.expect("targeted block");
                if t != last_target {
                    st.updaters[t] += 1;
                    last_target = t;
                }
                st.block_count[t] += 1;
                st.weighted_count[t] += part.width(s) as u64;
                st.max_block[t] = st.max_block[t].max(b.len());
                st.rows_in_blocks[t] += b.len();
                let bucket = (usize::BITS - 1 - b.len().leading_zeros()) as usize;
                if st.histogram.len() <= bucket {
                    st.histogram.resize(bucket + 1, 0);
                }
                st.histogram[bucket] += 1;
            }
        }
        st
    }

    pub fn mean_block(&self, t: usize) -> f64 {
        if self.block_count[t] == 0 {
            0.0
        } else {
            self.rows_in_blocks[t] as f64 / self.block_count[t] as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("supernode,width,updaters,sum_bc,weighted_sum,max_block,mean_block\n");
        for t in 0..self.width.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.4}",
                t,
                self.width[t],
                self.updaters[t],
                self.block_count[t],
                self.weighted_count[t],
                self.max_block[t],
                self.mean_block(t)
            );
        }
        out
    }
}

/// Objective value per supernode and in total: the plain block count, or
/// the count weighted by source width.
pub fn objective(stats: &BlockStats, weighted: bool) -> (Vec<u64>, u64) {
    let per = if weighted { stats.weighted_count.clone() } else { stats.block_count.clone() };
    let total = per.iter().sum();
    (per, total)
}

/// Largest supernode width accepted by [`brute_force_min_blocks`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Weighted number of runs of each set along `order` (positions of the
/// `m` rows): `sum_s w_s * runs_s`.
pub fn weighted_runs(order: &[usize], sets: &[Vec<usize>], weights: &[u64]) -> u64 {
    let m = order.len();
    let mut member = vec![false; m];
    let mut total = 0;
    for (set, &w) in sets.iter().zip(weights) {
        member.iter_mut().for_each(|x| *x = false);
        for &r in set {
            member[r] = true;
        }
        let mut prev = false;
        for &r in order {
            if member[r] && !prev {
                total += w;
            }
            prev = member[r];
        }
    }
    total
}

/// Exhaustive minimum of `sum_s w_s * bc_s` over all orderings of `m` rows,
/// where `sets[s]` lists the local rows (in `0..m`) of `hadj(J_s) ∩ J_t`.
pub fn brute_force_min_blocks(m: usize, sets: &[Vec<usize>], weights: &[u64]) -> Result<u64> {
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { size: m, limit: BRUTE_FORCE_LIMIT });
    }
    if sets.len() > 64 {
        return Err(Error::TooLarge { size: sets.len(), limit: 64 });
    }
    let mut mask = vec![0u64; m];
    for (s, set) in sets.iter().enumerate() {
        for &r in set {
            mask[r] |= 1 << s;
        }
    }
    let eval = |perm: &[usize]| -> u64 {
        let mut prev = 0u64;
        let mut total = 0;
        for &r in perm {
            let mut starts = mask[r] & !prev;
            while starts != 0 {
                total += weights[starts.trailing_zeros() as usize];
                starts &= starts - 1;
            }
            prev = mask[r];
        }
        total
    };
    // Heap's algorithm
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = eval(&perm);
    let mut c = vec![0usize; m];
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}
