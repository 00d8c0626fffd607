//! Symbolic factorization: elimination tree, postorder, factor column
//! structures, fundamental supernodes, the supernodal elimination tree and
//! higher adjacency sets.
//!
//! The fill graph is never built explicitly; it lives in the factor column
//! structures and, per supernode, in [`HigherAdjacency`].

mod mindeg;

pub use mindeg::minimum_degree;

use crate::{Error, Permutation, Result, SymmetricPattern};

/// Elimination-tree parent array. Roots hold the sentinel `n`.
///
/// Uses the classical row-by-row algorithm with path compression through
/// an ancestor array.
pub fn elimination_tree(p: &SymmetricPattern) -> Vec<usize> {
    let n = p.n();
    // rows of the strictly upper triangle, i.e. for each k the columns j < k with a_kj != 0
    let mut row_ptr = vec![0usize; n + 1];
    for (i, j) in p.entries() {
        if i != j {
            row_ptr[i + 1] += 1;
        }
    }
    for k in 0..n {
        row_ptr[k + 1] += row_ptr[k];
    }
    let mut next = row_ptr.clone();
    let mut row_cols = vec![0usize; row_ptr[n]];
    for (i, j) in p.entries() {
        if i != j {
            row_cols[next[i]] = j;
            next[i] += 1;
        }
    }

    let mut parent = vec![n; n];
    let mut ancestor = vec![n; n];
    for k in 0..n {
        for &j in &row_cols[row_ptr[k]..row_ptr[k + 1]] {
            let mut i = j;
            while ancestor[i] != n && ancestor[i] != k {
                let up = ancestor[i];
                ancestor[i] = k;
                i = up;
            }
            if ancestor[i] == n {
                ancestor[i] = k;
                parent[i] = k;
            }
        }
    }
    parent
}

/// Children lists of a forest given by `parent` (sentinel `parent.len()`),
/// each in ascending order.
pub(crate) fn children_lists(parent: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = parent.len();
    let mut first_child = vec![n; n];
    let mut next_sibling = vec![n; n];
    for j in (0..n).rev() {
        let p = parent[j];
        if p != n {
            next_sibling[j] = first_child[p];
            first_child[p] = j;
        }
    }
    (first_child, next_sibling)
}

/// Depth-first postorder of the forest: `result[k]` is the `k`-th column
/// visited. Roots and children are visited in ascending order, so a matrix
/// that is already postordered maps to the identity.
pub fn postorder(parent: &[usize]) -> Vec<usize> {
    let n = parent.len();
    let (first_child, next_sibling) = children_lists(parent);
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<usize> = Vec::new();
    for root in (0..n).filter(|&j| parent[j] == n) {
        stack.push(root);
        // child cursor per stacked node
        let mut cursor: Vec<usize> = vec![first_child[root]];
        while let Some(&top) = stack.last() {
            let c = cursor.last_mut().unwrap();
            if *c == n {
                order.push(top);
                stack.pop();
                cursor.pop();
            } else {
                let child = *c;
                *c = next_sibling[child];
                stack.push(child);
                cursor.push(first_child[child]);
            }
        }
    }
    order
}

/// The postorder as a relabeling permutation (old column → position).
pub fn postorder_permutation(parent: &[usize]) -> Permutation {
    Permutation::from_inverse(postorder(parent)).expect("postorder visits every column once")
}

/// Elimination tree, postorder and factor column structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationStructure {
    parent: Vec<usize>,
    postorder: Vec<usize>,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
}

impl EliminationStructure {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self) -> &[usize] {
        &self.parent
    }

    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    /// Sorted row structure of factor column `j`, diagonal first.
    pub fn factor_column(&self, j: usize) -> &[usize] {
        &self.rows[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn col_count(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn col_counts(&self) -> Vec<usize> {
        (0..self.n()).map(|j| self.col_count(j)).collect()
    }

    /// Entries of the factor, diagonal included.
    pub fn nnz_l(&self) -> usize {
        self.rows.len()
    }

    /// Column flop model: sum of squared column counts.
    pub fn work(&self) -> u64 {
        (0..self.n()).map(|j| (self.col_count(j) as u64).pow(2)).sum()
    }
}

/// Computes the factor column structures for `p` given its elimination tree.
///
/// Column `j` of the factor is the union of column `j` of `p` with the
/// structures of its children, restricted to rows `>= j`.
pub fn factor_structure(p: &SymmetricPattern, parent: &[usize]) -> Result<EliminationStructure> {
    let n = p.n();
    if parent.len() != n {
        return Err(Error::SizeMismatch { expected: n, found: parent.len() });
    }
    let (first_child, next_sibling) = children_lists(parent);
    let mut mark = vec![usize::MAX; n];
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut rows: Vec<usize> = Vec::with_capacity(p.nnz());
    let mut scratch = Vec::new();
    col_ptr.push(0);
    for j in 0..n {
        scratch.clear();
        for &i in p.column(j) {
            if mark[i] != j {
                mark[i] = j;
                scratch.push(i);
            }
        }
        let mut c = first_child[j];
        while c != n {
            for &i in &rows[col_ptr[c]..col_ptr[c + 1]] {
                if i > c && mark[i] != j {
                    mark[i] = j;
                    scratch.push(i);
                }
            }
            c = next_sibling[c];
        }
        scratch.sort_unstable();
        rows.extend_from_slice(&scratch);
        col_ptr.push(rows.len());
    }
    Ok(EliminationStructure { parent: parent.to_vec(), postorder: postorder(parent), col_ptr, rows })
}

/// Elimination tree plus factor structure in one call.
pub fn symbolic_factorization(p: &SymmetricPattern) -> EliminationStructure {
    let parent = elimination_tree(p);
    factor_structure(p, &parent).expect("parent computed from the same pattern")
}

/// Contiguous column ranges `J_1, ..., J_N` covering `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupernodePartition {
    /// First column of each supernode, followed by the sentinel `n`.
    first: Vec<usize>,
    snode_of: Vec<usize>,
}

impl SupernodePartition {
    /// Builds a partition from the ascending first columns of its
    /// supernodes. `starts` must begin with 0.
    pub fn from_starts(n: usize, starts: &[usize]) -> Result<Self> {
        if n == 0 {
            return Ok(Self { first: vec![0], snode_of: Vec::new() });
        }
        if starts.first() != Some(&0) || starts.windows(2).any(|w| w[0] >= w[1]) || starts.last() >= Some(&n) {
            return Err(Error::InvalidPermutation("supernode starts must be ascending from 0 and below n".into()));
        }
        let mut first = starts.to_vec();
        first.push(n);
        let mut snode_of = vec![0; n];
        for s in 0..starts.len() {
            snode_of[first[s]..first[s + 1]].fill(s);
        }
        Ok(Self { first, snode_of })
    }

    pub fn n(&self) -> usize {
        self.snode_of.len()
    }

    /// Number of supernodes.
    pub fn len(&self) -> usize {
        self.first.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first_col(&self, s: usize) -> usize {
        self.first[s]
    }

    pub fn last_col(&self, s: usize) -> usize {
        self.first[s + 1] - 1
    }

    pub fn cols(&self, s: usize) -> std::ops::Range<usize> {
        self.first[s]..self.first[s + 1]
    }

    pub fn width(&self, s: usize) -> usize {
        self.first[s + 1] - self.first[s]
    }

    pub fn max_width(&self) -> usize {
        (0..self.len()).map(|s| self.width(s)).max().unwrap_or(0)
    }

    pub fn snode_of(&self, col: usize) -> usize {
        self.snode_of[col]
    }

    pub fn starts(&self) -> &[usize] {
        &self.first[..self.first.len() - 1]
    }
}

/// Fundamental supernodes: column `j + 1` joins the supernode of `j` iff
/// `parent(j) = j + 1`, `j + 1` has exactly one child, and
/// `count(j) = count(j + 1) + 1`.
pub fn fundamental_supernodes(es: &EliminationStructure) -> SupernodePartition {
    let n = es.n();
    let mut nchild = vec![0usize; n];
    for &p in es.parent() {
        if p != n {
            nchild[p] += 1;
        }
    }
    let mut starts = Vec::new();
    for j in 0..n {
        let joins = j > 0
            && es.parent()[j - 1] == j
            && nchild[j] == 1
            && es.col_count(j - 1) == es.col_count(j) + 1;
        if !joins {
            starts.push(j);
        }
    }
    SupernodePartition::from_starts(n, &starts).expect("starts are ascending from 0")
}

/// Per-supernode sorted rows below the supernode that carry factor entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HigherAdjacency {
    ptr: Vec<usize>,
    rows: Vec<usize>,
}

impl HigherAdjacency {
    /// Builds from explicit sorted sets.
    pub fn from_sets(sets: &[Vec<usize>]) -> Self {
        let mut ptr = vec![0];
        let mut rows = Vec::new();
        for s in sets {
            debug_assert!(s.windows(2).all(|w| w[0] < w[1]));
            rows.extend_from_slice(s);
            ptr.push(rows.len());
        }
        Self { ptr, rows }
    }

    pub fn len(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, s: usize) -> &[usize] {
        &self.rows[self.ptr[s]..self.ptr[s + 1]]
    }

    /// Members of `hadj(J_s)` that fall inside the column range `cols`.
    pub fn within(&self, s: usize, cols: std::ops::Range<usize>) -> &[usize] {
        let h = self.get(s);
        let lo = h.partition_point(|&r| r < cols.start);
        let hi = h.partition_point(|&r| r < cols.end);
        &h[lo..hi]
    }

    /// Total size, `sum_s |hadj(J_s)|`.
    pub fn total(&self) -> usize {
        self.rows.len()
    }

    /// Relabels every row through `perm` and re-sorts each set.
    pub fn relabel(&self, perm: &Permutation) -> Self {
        let mut rows: Vec<usize> = self.rows.iter().map(|&r| perm.apply(r)).collect();
        for s in 0..self.len() {
            rows[self.ptr[s]..self.ptr[s + 1]].sort_unstable();
        }
        Self { ptr: self.ptr.clone(), rows }
    }
}

/// `hadj(J_s)`: the union of the factor structures of the columns of
/// `J_s`, minus `J_s` itself.
///
/// For a fundamental supernode every column gives the same set; for merged
/// supernodes the union is the padded structure the merged panel stores.
pub fn higher_adjacency(part: &SupernodePartition, es: &EliminationStructure) -> HigherAdjacency {
    let n = part.n();
    let mut mark = vec![usize::MAX; n];
    let mut ptr = vec![0];
    let mut rows = Vec::new();
    let mut scratch = Vec::new();
    for s in 0..part.len() {
        scratch.clear();
        let last = part.last_col(s);
        for j in part.cols(s) {
            for &i in es.factor_column(j) {
                if i > last && mark[i] != s {
                    mark[i] = s;
                    scratch.push(i);
                }
            }
        }
        scratch.sort_unstable();
        rows.extend_from_slice(&scratch);
        ptr.push(rows.len());
    }
    HigherAdjacency { ptr, rows }
}

/// Stored factor entries of a supernodal layout: each column of `J` keeps
/// the rest of the dense diagonal block plus `hadj(J)`.
pub fn supernodal_nnz(part: &SupernodePartition, hadj: &HigherAdjacency) -> usize {
    (0..part.len())
        .map(|s| {
            let w = part.width(s);
            w * (w + 1) / 2 + w * hadj.get(s).len()
        })
        .sum()
}

/// Column flop model of a supernodal layout: `sum_j c_j^2` with padded
/// column counts.
pub fn supernodal_work(part: &SupernodePartition, hadj: &HigherAdjacency) -> u64 {
    (0..part.len()).map(|s| supernode_work(part.width(s), hadj.get(s).len())).sum()
}

fn supernode_work(width: usize, r: usize) -> u64 {
    (0..width).map(|k| ((width - k + r) as u64).pow(2)).sum()
}

/// Supernodal elimination tree with subtree statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupernodalETree {
    parent: Vec<usize>,
    descendants: Vec<usize>,
    subtree_work: Vec<u64>,
    first_child: Vec<usize>,
    next_sibling: Vec<usize>,
}

impl SupernodalETree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Parent supernode; roots hold the sentinel `N`.
    pub fn parent(&self, s: usize) -> usize {
        self.parent[s]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn is_root(&self, s: usize) -> bool {
        self.parent[s] == self.len()
    }

    /// Proper descendants of `s`.
    pub fn descendants(&self, s: usize) -> usize {
        self.descendants[s]
    }

    /// Column flop model summed over the subtree rooted at `s`.
    pub fn subtree_work(&self, s: usize) -> u64 {
        self.subtree_work[s]
    }

    /// Children of `s` in ascending order.
    pub fn children(&self, s: usize) -> Children<'_> {
        Children { tree: self, next: self.first_child[s] }
    }
}

pub struct Children<'a> {
    tree: &'a SupernodalETree,
    next: usize,
}

impl Iterator for Children<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next == self.tree.len() {
            return None;
        }
        let c = self.next;
        self.next = self.tree.next_sibling[c];
        Some(c)
    }
}

/// Supernodal elimination tree: `p(J)` is the supernode holding the first
/// row of `hadj(J)` (equivalently the parent of `J`'s last column).
pub fn supernodal_etree(part: &SupernodePartition, hadj: &HigherAdjacency) -> SupernodalETree {
    let ns = part.len();
    let parent: Vec<usize> = (0..ns)
        .map(|s| hadj.get(s).first().map_or(ns, |&r| part.snode_of(r)))
        .collect();
    let mut descendants = vec![0usize; ns];
    let mut subtree_work: Vec<u64> = (0..ns).map(|s| supernode_work(part.width(s), hadj.get(s).len())).collect();
    for s in 0..ns {
        let p = parent[s];
        if p != ns {
            descendants[p] += descendants[s] + 1;
            subtree_work[p] += subtree_work[s];
        }
    }
    let (first_child, next_sibling) = children_lists(&parent);
    SupernodalETree { parent, descendants, subtree_work, first_child, next_sibling }
}

/// Supernodes that update `J_t`: the descendants `J_s` with
/// `hadj(J_s) ∩ J_t ≠ ∅`, appended to `out` in depth-first order.
///
/// They form a subtree hanging from `t`, so the search only descends into
/// children that update `J_t` themselves.
pub fn updaters_of(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    out: &mut Vec<usize>,
) {
    let cols = part.cols(t);
    let start = out.len();
    out.extend(tree.children(t).filter(|&c| !hadj.within(c, cols.clone()).is_empty()));
    let mut k = start;
    while k < out.len() {
        let s = out[k];
        for c in tree.children(s) {
            if !hadj.within(c, cols.clone()).is_empty() {
                out.push(c);
            }
        }
        k += 1;
    }
}
