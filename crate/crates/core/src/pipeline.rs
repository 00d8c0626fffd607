//! The full analysis pipeline: fill-reducing order, postorder relabeling,
//! symbolic factorization, supernode merging and within-supernode
//! reordering, plus the named method variants used by comparisons.

use std::fmt;
use std::str::FromStr;

use crate::amalgamate::{amalgamate, MergeLog};
use crate::blockmetrics::{block_lists, check_boundary_preserving, BlockLists, BlockStats};
use crate::matrixio::apply_symmetric_permutation;
use crate::pr::{pr_reorder, Strategy};
use crate::symbolic::{
    fundamental_supernodes, higher_adjacency, minimum_degree, postorder_permutation, supernodal_etree,
    symbolic_factorization, EliminationStructure, HigherAdjacency, SupernodalETree, SupernodePartition,
};
use crate::tsp::{tsp_reorder, Rule};
use crate::{Permutation, Result, SymmetricPattern};

/// Where the fill-reducing order comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FillOrder {
    /// Keep the input labels.
    Natural,
    /// Minimum degree computed here.
    MinimumDegree,
    /// A supplied permutation (old label to new label).
    Given(Permutation),
}

/// Symbolic state of a matrix after ordering, postordering and merging.
#[derive(Clone, Debug)]
pub struct Analysis {
    /// Input labels to analysis labels (fill order, then postorder).
    pub order: Permutation,
    /// The matrix in analysis labels.
    pub matrix: SymmetricPattern,
    pub structure: EliminationStructure,
    pub fundamental: SupernodePartition,
    pub fundamental_hadj: HigherAdjacency,
    /// Partition after merging, with its padded higher adjacency.
    pub partition: SupernodePartition,
    pub hadj: HigherAdjacency,
    pub tree: SupernodalETree,
    pub merge_log: MergeLog,
}

impl Analysis {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// `nnz(L)` of the true factor structure.
    pub fn nnz_l(&self) -> usize {
        self.structure.nnz_l()
    }

    /// Stored entries of the merged supernodal layout.
    pub fn padded_nnz(&self) -> usize {
        crate::symbolic::supernodal_nnz(&self.partition, &self.hadj)
    }

    pub fn flops(&self) -> u64 {
        crate::symbolic::supernodal_work(&self.partition, &self.hadj)
    }
}

/// Runs ordering, postordering, symbolic analysis and merging with `cap`.
pub fn analyze(p: &SymmetricPattern, fill: &FillOrder, cap: f64) -> Result<Analysis> {
    let first = match fill {
        FillOrder::Natural => Permutation::identity(p.n()),
        FillOrder::MinimumDegree => minimum_degree(p),
        FillOrder::Given(perm) => perm.clone(),
    };
    let ordered = apply_symmetric_permutation(p, &first)?;
    let post = postorder_permutation(symbolic_factorization(&ordered).parent());
    let matrix = apply_symmetric_permutation(&ordered, &post)?;
    let order = first.then(&post)?;
    let structure = symbolic_factorization(&matrix);
    let fundamental = fundamental_supernodes(&structure);
    let fundamental_hadj = higher_adjacency(&fundamental, &structure);
    let ftree = supernodal_etree(&fundamental, &fundamental_hadj);
    let (partition, merge_log) = amalgamate(&fundamental, &ftree, &fundamental_hadj, cap);
    let hadj = higher_adjacency(&partition, &structure);
    let tree = supernodal_etree(&partition, &hadj);
    Ok(Analysis { order, matrix, structure, fundamental, fundamental_hadj, partition, hadj, tree, merge_log })
}

/// A within-supernode reordering method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    None,
    Pr(Strategy),
    Tsp { rule: Rule, weighted: bool },
}

impl Method {
    /// The comparison variants: no reordering, the four insertion variants
    /// and the three partition-refinement strategies.
    pub const STANDARD: [Method; 10] = [
        Method::None,
        Method::Tsp { rule: Rule::Arbitrary, weighted: false },
        Method::Tsp { rule: Rule::Arbitrary, weighted: true },
        Method::Tsp { rule: Rule::Nearest, weighted: false },
        Method::Tsp { rule: Rule::Nearest, weighted: true },
        Method::Tsp { rule: Rule::Farthest, weighted: false },
        Method::Tsp { rule: Rule::Farthest, weighted: true },
        Method::Pr(Strategy::Natural),
        Method::Pr(Strategy::Ndesc),
        Method::Pr(Strategy::Work),
    ];

    pub fn is_tsp(self) -> bool {
        matches!(self, Method::Tsp { .. })
    }

    pub fn is_pr(self) -> bool {
        matches!(self, Method::Pr(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::None => write!(f, "none"),
            Method::Pr(s) => write!(f, "PR-{}", s.name()),
            Method::Tsp { rule, weighted } => {
                let r = match rule {
                    Rule::Arbitrary => "ARB",
                    Rule::Nearest => "NEAR",
                    Rule::Farthest => "FAR",
                };
                write!(f, "{r}{}", if *weighted { "wts" } else { "none" })
            }
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::STANDARD
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Within-supernode permutation (analysis labels) for `method`.
pub fn reorder(a: &Analysis, method: Method, seed: u64) -> Permutation {
    match method {
        Method::None => Permutation::identity(a.n()),
        Method::Pr(s) => pr_reorder(&a.partition, &a.tree, &a.hadj, s),
        Method::Tsp { rule, weighted } => tsp_reorder(&a.partition, &a.tree, &a.hadj, rule, weighted, seed),
    }
}

/// Everything that depends on a chosen within-supernode order.
#[derive(Clone, Debug)]
pub struct Reordered {
    /// Within-supernode permutation in analysis labels.
    pub within: Permutation,
    /// Input labels to final labels.
    pub global: Permutation,
    pub hadj: HigherAdjacency,
    pub blocks: BlockLists,
    pub stats: BlockStats,
}

/// Applies a within-supernode order to an analysis.
pub fn apply_reorder(a: &Analysis, within: Permutation) -> Result<Reordered> {
    check_boundary_preserving(&a.partition, &within)?;
    let global = a.order.then(&within)?;
    let hadj = a.hadj.relabel(&within);
    let blocks = block_lists(&a.partition, &hadj);
    let stats = BlockStats::compute(&a.partition, &blocks);
    Ok(Reordered { within, global, hadj, blocks, stats })
}
