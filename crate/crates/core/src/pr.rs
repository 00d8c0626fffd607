//! Partition-refinement reordering, one supernode at a time.
//!
//! For a target supernode `J_t` the columns start as a single set. Every
//! descendant `J_s` that updates `J_t` refines the ordered partition by
//! `hadj(J_s) ∩ J_t`, visiting parents before children. Inside each maximal
//! interval of consecutive partitionable sets the split orientation
//! alternates, which keeps the intersection parts of neighbouring sets
//! adjacent. The final order lists the sets left to right.
//!
//! Working storage is a handful of vectors sized by the widest supernode
//! plus the schedule, which is bounded by the number of supernodes.

use std::collections::BinaryHeap;
use std::str::FromStr;

use crate::symbolic::{HigherAdjacency, SupernodalETree, SupernodePartition};
use crate::{Error, Permutation, Result};

/// Which eligible updater the reverse-topological schedule picks next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Largest supernode index first.
    Natural,
    /// Most descendants first.
    Ndesc,
    /// Most subtree factor work first.
    Work,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Natural, Strategy::Ndesc, Strategy::Work];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Natural => "natural",
            Strategy::Ndesc => "ndesc",
            Strategy::Work => "work",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "natural" => Ok(Strategy::Natural),
            "ndesc" => Ok(Strategy::Ndesc),
            "work" => Ok(Strategy::Work),
            other => Err(format!("unknown strategy `{other}` (expected natural, ndesc or work)")),
        }
    }
}

/// The updaters of `J_t` in the order they refine it: every parent comes
/// before its children and ties between eligible supernodes follow
/// `strategy`, then the larger index.
pub fn updater_schedule(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    strategy: Strategy,
) -> Vec<usize> {
    let mut out = Vec::new();
    let mut heap = BinaryHeap::new();
    schedule_into(t, part, tree, hadj, strategy, &mut heap, &mut out);
    out
}

fn schedule_into(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    strategy: Strategy,
    heap: &mut BinaryHeap<(u64, usize)>,
    out: &mut Vec<usize>,
) {
    let cols = part.cols(t);
    let key = |s: usize| match strategy {
        Strategy::Natural => 0,
        Strategy::Ndesc => tree.descendants(s) as u64,
        Strategy::Work => tree.subtree_work(s),
    };
    out.clear();
    heap.clear();
    let push_children = |s: usize, heap: &mut BinaryHeap<(u64, usize)>| {
        for c in tree.children(s) {
            if !hadj.within(c, cols.clone()).is_empty() {
                heap.push((key(c), c));
            }
        }
    };
    push_children(t, heap);
    while let Some((_, s)) = heap.pop() {
        out.push(s);
        push_children(s, heap);
    }
}

/// An ordered partition of `0..m` that splits sets in place.
///
/// Elements sit in one array; every set owns a contiguous range of it and
/// the order of the sets is the order of their ranges.
#[derive(Clone, Debug, Default)]
pub struct OrderedPartition {
    elems: Vec<usize>,
    pos: Vec<usize>,
    set_of: Vec<usize>,
    start: Vec<usize>,
    end: Vec<usize>,
    count: Vec<usize>,
    fill: Vec<usize>,
    front: Vec<bool>,
    touched: Vec<usize>,
}

impl OrderedPartition {
    /// The single-set partition `[{0, .., m-1}]`.
    pub fn new(m: usize) -> Self {
        let mut p = Self::default();
        p.reset(m);
        p
    }

    /// Reinitializes to one set of size `m`, reusing storage.
    pub fn reset(&mut self, m: usize) {
        self.elems.clear();
        self.elems.extend(0..m);
        self.pos.clear();
        self.pos.extend(0..m);
        self.set_of.clear();
        self.set_of.resize(m, 0);
        for v in [&mut self.start, &mut self.end, &mut self.count, &mut self.fill] {
            v.clear();
            v.resize(m.max(1), 0);
        }
        self.front.clear();
        self.front.resize(m.max(1), false);
        self.end[0] = m;
        self.touched.clear();
        if m == 0 {
            self.start.clear();
            self.end.clear();
        } else {
            self.start.truncate(1);
            self.end.truncate(1);
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Number of sets.
    pub fn num_sets(&self) -> usize {
        self.start.len()
    }

    /// The sets left to right, each listed in ascending element order.
    pub fn sets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.num_sets());
        let mut p = 0;
        while p < self.len() {
            let s = self.set_of[self.elems[p]];
            let mut set = self.elems[self.start[s]..self.end[s]].to_vec();
            set.sort_unstable();
            out.push(set);
            p = self.end[s];
        }
        out
    }

    /// Writes the elements in partition order, ascending within each set.
    pub fn order_into(&mut self, out: &mut Vec<usize>) {
        out.clear();
        let mut p = 0;
        while p < self.len() {
            let s = self.set_of[self.elems[p]];
            let (a, b) = (self.start[s], self.end[s]);
            self.elems[a..b].sort_unstable();
            out.extend_from_slice(&self.elems[a..b]);
            p = b;
        }
    }

    /// Refines by `h` (distinct elements of `0..m`). Returns the number of
    /// sets that were split.
    pub fn refine(&mut self, h: &[usize]) -> Result<usize> {
        if h.is_empty() || h.iter().any(|&x| x >= self.len()) {
            return Err(Error::InvalidRefinement);
        }
        for &x in h {
            let s = self.set_of[x];
            if self.count[s] == 0 {
                self.touched.push(s);
            }
            self.count[s] += 1;
        }
        let start = &self.start;
        self.touched.sort_unstable_by_key(|&s| start[s]);

        // orientation along each partitionable interval
        let mut splits = 0;
        let mut prev_end = usize::MAX;
        let mut parity = false;
        for &s in &self.touched {
            let size = self.end[s] - self.start[s];
            if self.count[s] > size {
                return Err(Error::InvalidRefinement);
            }
            if self.count[s] == size {
                prev_end = usize::MAX;
                continue;
            }
            parity = if self.start[s] == prev_end { !parity } else { false };
            prev_end = self.end[s];
            // parity false: (S \ H, S ∩ H), intersection at the back
            self.front[s] = parity;
            self.fill[s] = if parity { self.start[s] } else { self.end[s] - 1 };
            splits += 1;
        }

        for &x in h {
            let s = self.set_of[x];
            if self.count[s] == self.end[s] - self.start[s] {
                continue;
            }
            let target = self.fill[s];
            if self.front[s] {
                self.fill[s] += 1;
            } else {
                self.fill[s] = self.fill[s].wrapping_sub(1);
            }
            let here = self.pos[x];
            let other = self.elems[target];
            self.elems.swap(here, target);
            self.pos[x] = target;
            self.pos[other] = here;
        }

        for i in 0..self.touched.len() {
            let s = self.touched[i];
            let cnt = std::mem::take(&mut self.count[s]);
            let (a, b) = (self.start[s], self.end[s]);
            if cnt == b - a {
                continue;
            }
            let k = self.start.len();
            let (lo, hi) = if self.front[s] {
                self.start[s] = a + cnt;
                (a, a + cnt)
            } else {
                self.end[s] = b - cnt;
                (b - cnt, b)
            };
            self.start.push(lo);
            self.end.push(hi);
            for p in lo..hi {
                self.set_of[self.elems[p]] = k;
            }
        }
        self.touched.clear();
        Ok(splits)
    }
}

/// Reusable storage for reordering many supernodes.
#[derive(Debug, Default)]
pub struct PrWorkspace {
    partition: OrderedPartition,
    schedule: Vec<usize>,
    heap: BinaryHeap<(u64, usize)>,
    local: Vec<usize>,
    order: Vec<usize>,
}

/// Within-supernode order of `J_t` as local column offsets, left to right.
pub fn reorder_supernode(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    strategy: Strategy,
    ws: &mut PrWorkspace,
) -> Vec<usize> {
    reorder_into(t, part, tree, hadj, strategy, ws);
    ws.order.clone()
}

fn reorder_into(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    strategy: Strategy,
    ws: &mut PrWorkspace,
) {
    let cols = part.cols(t);
    ws.partition.reset(cols.len());
    schedule_into(t, part, tree, hadj, strategy, &mut ws.heap, &mut ws.schedule);
    for &s in &ws.schedule {
        ws.local.clear();
        ws.local.extend(hadj.within(s, cols.clone()).iter().map(|&r| r - cols.start));
        ws.partition.refine(&ws.local).expect("updater rows lie inside the target");
    }
    ws.partition.order_into(&mut ws.order);
}

/// Partition-refinement reordering of every supernode. The result only
/// moves columns within their supernode.
pub fn pr_reorder(
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    strategy: Strategy,
) -> Permutation {
    let mut forward = vec![0; part.n()];
    let mut ws = PrWorkspace::default();
    for t in 0..part.len() {
        reorder_into(t, part, tree, hadj, strategy, &mut ws);
        let first = part.first_col(t);
        for (k, &c) in ws.order.iter().enumerate() {
            forward[first + c] = first + k;
        }
    }
    Permutation::from_forward(forward).expect("each supernode order is a bijection")
}
