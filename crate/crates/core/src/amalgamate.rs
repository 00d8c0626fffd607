//! Supernode amalgamation: heap-driven child-parent merging under a cap on
//! the cumulative growth of factor storage.
//!
//! Merging child `c` into its parent `p` pads every column of `c` with the
//! rows `J_p ∪ hadj(J_p)`. Because `hadj(J_c) ⊆ J_p ∪ hadj(J_p)` the number
//! of explicit zeros added is exactly `|J_c| * ((|J_p| + r_p) - r_c)` with
//! `r_x = |hadj(J_x)|`, and the merged supernode keeps `hadj(J_p)`.
//!
//! Only pairs that are adjacent in column order are merged, so supernodes
//! stay contiguous. In a postordered matrix a parent's last child is always
//! adjacent; once it has been absorbed the next child becomes adjacent.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::symbolic::{HigherAdjacency, SupernodalETree, SupernodePartition};
use crate::{Error, Result};

/// Default cap on cumulative storage growth.
pub const DEFAULT_CAP: f64 = 0.125;

#[derive(Clone, Debug, PartialEq)]
pub struct MergeRecord {
    pub step: usize,
    /// Top fundamental supernode of the absorbed child group.
    pub child: usize,
    /// Top fundamental supernode of the parent group.
    pub parent: usize,
    pub cost: u64,
    pub cumulative: u64,
    pub cumulative_ratio: f64,
    /// Cumulative growth of the column flop model, relative to the start.
    pub work_ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MergeLog {
    pub base_nnz: u64,
    pub base_work: u64,
    pub records: Vec<MergeRecord>,
}

impl MergeLog {
    /// Explicit zeros added by all merges.
    pub fn added_zeros(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,child,parent,cost,cumulative_ratio,work_ratio\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                r.step, r.child, r.parent, r.cost, r.cumulative_ratio, r.work_ratio
            );
        }
        out
    }
}

fn padding(child_width: u64, parent_width: u64, parent_r: u64, child_r: u64) -> u64 {
    child_width * (parent_width + parent_r - child_r)
}

fn padding_work(child_width: u64, parent_width: u64, parent_r: u64, child_r: u64) -> u64 {
    (0..child_width)
        .map(|k| {
            let old = child_width - k + child_r;
            let new = child_width - k + parent_width + parent_r;
            new * new - old * old
        })
        .sum()
}

/// Explicit zeros created by merging supernode `child` into `parent`.
pub fn merge_cost(
    child: usize,
    parent: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
) -> Result<u64> {
    if child >= tree.len() || tree.parent(child) != parent {
        return Err(Error::NotChildParent { child, parent });
    }
    Ok(padding(
        part.width(child) as u64,
        part.width(parent) as u64,
        hadj.get(parent).len() as u64,
        hadj.get(child).len() as u64,
    ))
}

struct Groups {
    link: Vec<usize>,
    first: Vec<usize>,
    width: Vec<u64>,
    r: Vec<u64>,
    version: Vec<u64>,
}

impl Groups {
    fn find(&mut self, mut s: usize) -> usize {
        let mut root = s;
        while self.link[root] != root {
            root = self.link[root];
        }
        while self.link[s] != root {
            let up = self.link[s];
            self.link[s] = root;
            s = up;
        }
        root
    }
}

/// Heap entry: (cost, child, child version, parent, parent version).
type Candidate = Reverse<(u64, usize, u64, usize, u64)>;

/// Coarsens a fundamental partition by merging the cheapest adjacent
/// child-parent pair while `(cumulative + cost) / nnz(L) <= cap`.
///
/// Stops at the first pair that would break the cap. Equal costs are
/// resolved in favour of the smaller child supernode.
pub fn amalgamate(
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    cap: f64,
) -> (SupernodePartition, MergeLog) {
    let ns = part.len();
    let base_nnz = crate::symbolic::supernodal_nnz(part, hadj) as u64;
    let base_work = crate::symbolic::supernodal_work(part, hadj);
    let mut g = Groups {
        link: (0..ns).collect(),
        first: (0..ns).map(|s| part.first_col(s)).collect(),
        width: (0..ns).map(|s| part.width(s) as u64).collect(),
        r: (0..ns).map(|s| hadj.get(s).len() as u64).collect(),
        version: vec![0; ns],
    };
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();

    let candidate = |g: &mut Groups, c: usize| -> Option<Candidate> {
        let tp = tree.parent(c);
        if tp == ns {
            return None;
        }
        let p = g.find(tp);
        if part.last_col(c) + 1 != g.first[p] {
            return None;
        }
        let cost = padding(g.width[c], g.width[p], g.r[p], g.r[c]);
        Some(Reverse((cost, c, g.version[c], p, g.version[p])))
    };

    for c in 0..ns {
        if let Some(e) = candidate(&mut g, c) {
            heap.push(e);
        }
    }

    let mut log = MergeLog { base_nnz, base_work, records: Vec::new() };
    let mut cumulative = 0u64;
    let mut work = 0u64;
    while let Some(Reverse((cost, c, vc, p, vp))) = heap.pop() {
        if g.link[c] != c || g.link[p] != p || g.version[c] != vc || g.version[p] != vp {
            continue;
        }
        if base_nnz == 0 || (cumulative + cost) as f64 > cap * base_nnz as f64 {
            break;
        }
        cumulative += cost;
        work += padding_work(g.width[c], g.width[p], g.r[p], g.r[c]);
        g.link[c] = p;
        g.first[p] = g.first[c];
        g.width[p] += g.width[c];
        g.version[c] += 1;
        g.version[p] += 1;
        log.records.push(MergeRecord {
            step: log.records.len() + 1,
            child: c,
            parent: p,
            cost,
            cumulative,
            cumulative_ratio: cumulative as f64 / base_nnz as f64,
            work_ratio: if base_work == 0 { 0.0 } else { work as f64 / base_work as f64 },
        });

        if let Some(e) = candidate(&mut g, p) {
            heap.push(e);
        }
        let before = g.first[p];
        if before > 0 {
            let left = part.snode_of(before - 1);
            let left = g.find(left);
            if tree.parent(left) != ns && g.find(tree.parent(left)) == p {
                if let Some(e) = candidate(&mut g, left) {
                    heap.push(e);
                }
            }
        }
    }

    let mut starts: Vec<usize> = (0..ns).filter(|&s| g.link[s] == s).map(|s| g.first[s]).collect();
    starts.sort_unstable();
    let merged = SupernodePartition::from_starts(part.n(), &starts).expect("groups tile the columns");
    (merged, log)
}
