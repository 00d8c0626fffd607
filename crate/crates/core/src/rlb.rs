//! Right-looking blocked supernodal Cholesky with scalar kernels.
//!
//! Each supernode `J` owns a dense column-major panel with rows
//! `J ∪ hadj(J)`. After `J` is completed (dense factorization of the
//! diagonal block, then a triangular solve below it) its updates are pushed
//! straight into the ancestor panels, block by block: one symmetric update
//! per `(target, J)` block and one rectangular update per maximal run of
//! rows below that block. No floating-point scratch is used; the only
//! temporary is an `n`-vector mapping global rows to panel rows.

use std::fmt::Write as _;

use crate::blockmetrics::BlockLists;
use crate::symbolic::{HigherAdjacency, SupernodePartition};
use crate::{Error, Result, SymmetricPattern};

/// Dense panels for every supernode, in one contiguous array.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorStorage {
    part: SupernodePartition,
    hadj: HigherAdjacency,
    offset: Vec<usize>,
    values: Vec<f64>,
    factorized: bool,
}

impl FactorStorage {
    pub fn n(&self) -> usize {
        self.part.n()
    }

    pub fn partition(&self) -> &SupernodePartition {
        &self.part
    }

    pub fn hadj(&self) -> &HigherAdjacency {
        &self.hadj
    }

    pub fn is_factorized(&self) -> bool {
        self.factorized
    }

    /// Rows of the panel of `s` (its columns and then `hadj(J_s)`).
    pub fn panel_rows(&self, s: usize) -> usize {
        self.part.width(s) + self.hadj.get(s).len()
    }

    /// `(rows, cols)` of the panel of `s`.
    pub fn panel_shape(&self, s: usize) -> (usize, usize) {
        (self.panel_rows(s), self.part.width(s))
    }

    pub fn panel(&self, s: usize) -> &[f64] {
        &self.values[self.offset[s]..self.offset[s + 1]]
    }

    /// Floating-point values held, including the unused upper triangles of
    /// the diagonal blocks.
    pub fn allocated_entries(&self) -> usize {
        self.values.len()
    }

    /// Lower-trapezoidal entries, i.e. the factor's stored nonzeros.
    pub fn stored_entries(&self) -> usize {
        crate::symbolic::supernodal_nnz(&self.part, &self.hadj)
    }

    fn locate(&self, i: usize, j: usize) -> Option<usize> {
        if i < j {
            return None;
        }
        let s = self.part.snode_of(j);
        let w = self.part.width(s);
        let local = j - self.part.first_col(s);
        let row = if i <= self.part.last_col(s) {
            i - self.part.first_col(s)
        } else {
            w + self.hadj.get(s).binary_search(&i).ok()?
        };
        Some(self.offset[s] + local * self.panel_rows(s) + row)
    }

    /// Stored value at `(i, j)` with `i >= j`, zero outside the structure.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.locate(i, j).map_or(0.0, |k| self.values[k])
    }

    /// The lower triangle as a dense column-major `n x n` array.
    pub fn to_dense_lower(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        for s in 0..self.part.len() {
            let rows = self.panel_rows(s);
            let first = self.part.first_col(s);
            let h = self.hadj.get(s);
            for c in 0..self.part.width(s) {
                for r in c..rows {
                    let gi = if r < self.part.width(s) { first + r } else { h[r - self.part.width(s)] };
                    out[(first + c) * n + gi] = self.panel(s)[c * rows + r];
                }
            }
        }
        out
    }
}

/// Places the values of `p` (already in the final labels) into zeroed
/// panels shaped by `part` and `hadj`.
pub fn assemble(p: &SymmetricPattern, part: &SupernodePartition, hadj: &HigherAdjacency) -> Result<FactorStorage> {
    if p.n() != part.n() {
        return Err(Error::SizeMismatch { expected: part.n(), found: p.n() });
    }
    let values = p.values().ok_or(Error::MissingValues)?;
    let mut offset = Vec::with_capacity(part.len() + 1);
    let mut total = 0;
    offset.push(0);
    for s in 0..part.len() {
        total += (part.width(s) + hadj.get(s).len()) * part.width(s);
        offset.push(total);
    }
    let mut fs = FactorStorage { part: part.clone(), hadj: hadj.clone(), offset, values: vec![0.0; total], factorized: false };
    for ((i, j), &v) in p.entries().zip(values) {
        let k = fs.locate(i, j).ok_or(Error::Structural { row: i, col: j })?;
        fs.values[k] = v;
    }
    Ok(fs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Dense factorization of a diagonal block.
    CdivFactor,
    /// Triangular solve for the rows below a diagonal block.
    CdivSolve,
    /// Symmetric update of a diagonal sub-block of a target.
    Syrk,
    /// Rectangular update of target rows below a block.
    Gemm,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::CdivFactor => "cdiv_factor",
            KernelKind::CdivSolve => "cdiv_solve",
            KernelKind::Syrk => "syrk",
            KernelKind::Gemm => "gemm",
        }
    }
}

/// One kernel call: `m x n` result from an inner dimension `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelCall {
    pub kind: KernelKind,
    pub source: usize,
    pub target: usize,
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

/// Kernel call counts, with an optional full call log.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KernelTrace {
    pub cdiv_factor: u64,
    pub cdiv_solve: u64,
    pub syrk: u64,
    pub gemm: u64,
    log: Option<Vec<KernelCall>>,
}

impl KernelTrace {
    /// Counts only; records nothing per call.
    pub fn counts() -> Self {
        Self::default()
    }

    /// Counts plus the list of every call.
    pub fn with_calls() -> Self {
        Self { log: Some(Vec::new()), ..Self::default() }
    }

    pub fn calls(&self) -> Option<&[KernelCall]> {
        self.log.as_deref()
    }

    fn record(&mut self, call: KernelCall) {
        match call.kind {
            KernelKind::CdivFactor => self.cdiv_factor += 1,
            KernelKind::CdivSolve => self.cdiv_solve += 1,
            KernelKind::Syrk => self.syrk += 1,
            KernelKind::Gemm => self.gemm += 1,
        }
        if let Some(log) = &mut self.log {
            log.push(call);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,source,target,m,n,k\n");
        for c in self.log.iter().flatten() {
            let _ = writeln!(out, "{},{},{},{},{},{}", c.kind.name(), c.source, c.target, c.m, c.n, c.k);
        }
        out
    }
}

/// Factors in place. `blocks` must come from the same partition and
/// higher adjacency as `fs`.
pub fn rlb_factor(fs: &mut FactorStorage, blocks: &BlockLists, trace: &mut KernelTrace) -> Result<()> {
    let n = fs.n();
    let ns = fs.part.len();
    let mut rel = vec![usize::MAX; n];
    for j in 0..ns {
        cdiv(fs, j, trace)?;
        let w = fs.part.width(j);
        let rows_j = fs.panel_rows(j);
        let bl = blocks.blocks(j);
        let mut k = 0;
        while k < bl.len() {
            let target = bl[k].target.expect("targeted block");
            // panel rows of the target
            let tw = fs.part.width(target);
            let tfirst = fs.part.first_col(target);
            for (r, c) in fs.part.cols(target).enumerate() {
                rel[c] = r;
            }
            for (r, &row) in fs.hadj.get(target).iter().enumerate() {
                rel[row] = tw + r;
            }
            let trows = fs.panel_rows(target);
            let (lo, hi) = split_panels(&mut fs.values, &fs.offset, j, target);
            let src = lo;
            let dst = hi;
            let h = fs.hadj.get(j);
            while k < bl.len() && bl[k].target == Some(target) {
                let b = bl[k];
                let blen = b.len();
                // symmetric update of the diagonal sub-block
                for c in 0..blen {
                    let pc = w + b.offset + c;
                    let tc = b.first + c - tfirst;
                    for r in c..blen {
                        let pr = w + b.offset + r;
                        let mut acc = 0.0;
                        for q in 0..w {
                            acc += src[q * rows_j + pr] * src[q * rows_j + pc];
                        }
                        dst[tc * trows + rel[h[b.offset + r]]] -= acc;
                    }
                }
                trace.record(KernelCall { kind: KernelKind::Syrk, source: j, target, m: blen, n: blen, k: w });
                // rectangular updates, one per maximal run below the block
                let mut q0 = b.offset + blen;
                while q0 < h.len() {
                    let mut q1 = q0 + 1;
                    while q1 < h.len() && h[q1] == h[q1 - 1] + 1 {
                        q1 += 1;
                    }
                    for c in 0..blen {
                        let pc = w + b.offset + c;
                        let tc = b.first + c - tfirst;
                        for q in q0..q1 {
                            let tr = rel[h[q]];
                            if tr == usize::MAX {
                                return Err(Error::Structural { row: h[q], col: b.first + c });
                            }
                            let pr = w + q;
                            let mut acc = 0.0;
                            for z in 0..w {
                                acc += src[z * rows_j + pr] * src[z * rows_j + pc];
                            }
                            dst[tc * trows + tr] -= acc;
                        }
                    }
                    trace.record(KernelCall { kind: KernelKind::Gemm, source: j, target, m: q1 - q0, n: blen, k: w });
                    q0 = q1;
                }
                k += 1;
            }
            for c in fs.part.cols(target) {
                rel[c] = usize::MAX;
            }
            for &row in fs.hadj.get(target) {
                rel[row] = usize::MAX;
            }
        }
    }
    fs.factorized = true;
    Ok(())
}

/// Borrows panel `a` immutably and a later panel `b` mutably.
fn split_panels<'a>(values: &'a mut [f64], offset: &[usize], a: usize, b: usize) -> (&'a [f64], &'a mut [f64]) {
    debug_assert!(a < b);
    let (lo, hi) = values.split_at_mut(offset[b]);
    (&lo[offset[a]..offset[a + 1]], &mut hi[..offset[b + 1] - offset[b]])
}

fn cdiv(fs: &mut FactorStorage, j: usize, trace: &mut KernelTrace) -> Result<()> {
    let w = fs.part.width(j);
    let rows = fs.panel_rows(j);
    let first = fs.part.first_col(j);
    let p = &mut fs.values[fs.offset[j]..fs.offset[j + 1]];
    for c in 0..w {
        for q in 0..c {
            let lcq = p[q * rows + c];
            for r in c..rows {
                p[c * rows + r] -= p[q * rows + r] * lcq;
            }
        }
        let d = p[c * rows + c];
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { column: first + c });
        }
        let d = d.sqrt();
        p[c * rows + c] = d;
        for r in c + 1..rows {
            p[c * rows + r] /= d;
        }
    }
    trace.record(KernelCall { kind: KernelKind::CdivFactor, source: j, target: j, m: w, n: w, k: w });
    if rows > w {
        trace.record(KernelCall { kind: KernelKind::CdivSolve, source: j, target: j, m: rows - w, n: w, k: w });
    }
    Ok(())
}

/// Solves `L L^T x = b` with a factorized storage.
pub fn solve(fs: &FactorStorage, b: &[f64]) -> Result<Vec<f64>> {
    if !fs.factorized {
        return Err(Error::NotFactorized);
    }
    if b.len() != fs.n() {
        return Err(Error::SizeMismatch { expected: fs.n(), found: b.len() });
    }
    let mut x = b.to_vec();
    let ns = fs.part.len();
    for s in 0..ns {
        let (rows, w) = fs.panel_shape(s);
        let first = fs.part.first_col(s);
        let h = fs.hadj.get(s);
        let p = fs.panel(s);
        for c in 0..w {
            let xc = x[first + c] / p[c * rows + c];
            x[first + c] = xc;
            for r in c + 1..w {
                x[first + r] -= p[c * rows + r] * xc;
            }
            for (k, &row) in h.iter().enumerate() {
                x[row] -= p[c * rows + w + k] * xc;
            }
        }
    }
    for s in (0..ns).rev() {
        let (rows, w) = fs.panel_shape(s);
        let first = fs.part.first_col(s);
        let h = fs.hadj.get(s);
        let p = fs.panel(s);
        for c in (0..w).rev() {
            let mut acc = x[first + c];
            for r in c + 1..w {
                acc -= p[c * rows + r] * x[first + r];
            }
            for (k, &row) in h.iter().enumerate() {
                acc -= p[c * rows + w + k] * x[row];
            }
            x[first + c] = acc / p[c * rows + c];
        }
    }
    Ok(x)
}

/// Largest order accepted by [`dense_cholesky`].
pub const DENSE_LIMIT: usize = 512;

/// Textbook lower Cholesky of a dense column-major `n x n` matrix (only
/// the lower triangle is read). Returns `L` with a zero upper triangle.
pub fn dense_cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_LIMIT });
    }
    if a.len() != n * n {
        return Err(Error::SizeMismatch { expected: n * n, found: a.len() });
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[k * n + j] * l[k * n + j];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { column: j });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[j * n + i];
            for k in 0..j {
                s -= l[k * n + i] * l[k * n + j];
            }
            l[j * n + i] = s / d;
        }
    }
    Ok(l)
}

/// Dense column-major copy of a symmetric matrix with values.
pub fn to_dense(p: &SymmetricPattern) -> Result<Vec<f64>> {
    let n = p.n();
    let values = p.values().ok_or(Error::MissingValues)?;
    let mut a = vec![0.0; n * n];
    for ((i, j), &v) in p.entries().zip(values) {
        a[j * n + i] = v;
        a[i * n + j] = v;
    }
    Ok(a)
}

/// Largest entrywise difference between two dense factors, relative to
/// the largest entry of `reference`.
pub fn relative_difference(got: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    got.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// `||A x - b|| / ||b||` in the Euclidean norm.
pub fn relative_residual(p: &SymmetricPattern, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = p.mul_vec(x)?;
    let num: f64 = ax.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if den == 0.0 { num } else { num / den })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc_meter::measure;
    use crate::blockmetrics::{block_lists, BlockStats};
    use crate::gen;
    use crate::symbolic::{fundamental_supernodes, higher_adjacency, symbolic_factorization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn factor(p: &SymmetricPattern) -> (FactorStorage, KernelTrace, BlockLists) {
        let es = symbolic_factorization(p);
        let part = fundamental_supernodes(&es);
        let hadj = higher_adjacency(&part, &es);
        let blocks = block_lists(&part, &hadj);
        let mut fs = assemble(p, &part, &hadj).unwrap();
        let mut trace = KernelTrace::with_calls();
        rlb_factor(&mut fs, &blocks, &mut trace).unwrap();
        (fs, trace, blocks)
    }

    #[test]
    fn dense_oracle_small_cases() {
        assert_eq!(dense_cholesky(&[4.0], 1).unwrap(), vec![2.0]);
        // column-major [[4,2],[2,5]]
        assert_eq!(dense_cholesky(&[4.0, 2.0, 2.0, 5.0], 2).unwrap(), vec![2.0, 1.0, 0.0, 2.0]);
        assert_eq!(dense_cholesky(&[-1.0], 1), Err(Error::NotPositiveDefinite { column: 0 }));
    }

    #[test]
    fn dense_oracle_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = gen::random_spd_values(&gen::random_pattern(&mut rng, 40, 6.0), &mut rng);
        let a = to_dense(&p).unwrap();
        let l = dense_cholesky(&a, 40).unwrap();
        let mut llt = vec![0.0; 1600];
        for i in 0..40 {
            for j in 0..40 {
                llt[j * 40 + i] = (0..40).map(|k| l[k * 40 + i] * l[k * 40 + j]).sum();
            }
        }
        assert!(relative_difference(&llt, &a) < 1e-12);
    }

    #[test]
    fn one_by_one() {
        let p = SymmetricPattern::from_triplets(1, [(0, 0, 4.0)]).unwrap();
        let (fs, trace, _) = factor(&p);
        assert_eq!(fs.get(0, 0), 2.0);
        assert_eq!((trace.cdiv_factor, trace.syrk, trace.gemm), (1, 0, 0));
        assert_eq!(solve(&fs, &[8.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn identity_solve_is_exact() {
        let p = SymmetricPattern::from_entries(6, []).unwrap().with_values(vec![1.0; 6]).unwrap();
        let (fs, _, _) = factor(&p);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0, 6.0];
        let x = solve(&fs, &b).unwrap();
        assert_eq!(relative_residual(&p, &x, &b).unwrap(), 0.0);
    }

    #[test]
    fn unfactorized_solve_is_refused() {
        let p = gen::golden_matrix().with_synthesized_values();
        let es = symbolic_factorization(&p);
        let part = fundamental_supernodes(&es);
        let fs = assemble(&p, &part, &higher_adjacency(&part, &es)).unwrap();
        assert_eq!(solve(&fs, &[0.0; 9]), Err(Error::NotFactorized));
    }

    #[test]
    fn golden_panels_and_kernel_counts() {
        let p = gen::golden_matrix().with_synthesized_values();
        let (fs, trace, blocks) = factor(&p);
        assert_eq!(fs.panel_shape(0), (5, 2));
        assert_eq!(fs.panel_shape(1), (5, 2));
        assert_eq!(fs.panel_shape(2), (5, 5));
        assert_eq!(fs.stored_entries(), 33);
        assert_eq!((trace.syrk, trace.gemm), (4, 2));
        let st = BlockStats::compute(fs.partition(), &blocks);
        assert_eq!(trace.syrk, st.block_count.iter().sum::<u64>());

        // keep the original partition: the reordered matrix is analysed with
        // the supernodes it was reordered within
        let q = gen::golden_matrix_reordered().with_synthesized_values();
        let part = fs.partition().clone();
        let hadj = higher_adjacency(&part, &symbolic_factorization(&q));
        let mut fq = assemble(&q, &part, &hadj).unwrap();
        let mut trace = KernelTrace::with_calls();
        rlb_factor(&mut fq, &block_lists(&part, &hadj), &mut trace).unwrap();
        assert_eq!((trace.syrk, trace.gemm), (2, 0));
        let oracle = dense_cholesky(&to_dense(&q).unwrap(), 9).unwrap();
        assert!(relative_difference(&fq.to_dense_lower(), &oracle) <= 1e-10);
    }

    #[test]
    fn structural_error_for_entries_outside_layout() {
        let p = gen::golden_matrix().with_synthesized_values();
        let part = SupernodePartition::from_starts(9, &[0, 2, 4]).unwrap();
        let empty = HigherAdjacency::from_sets(&[vec![], vec![], vec![]]);
        assert!(matches!(assemble(&p, &part, &empty), Err(Error::Structural { .. })));
    }

    #[test]
    fn not_positive_definite_names_column() {
        let p = SymmetricPattern::from_triplets(3, [(0, 0, 1.0), (1, 1, 1.0), (2, 1, 2.0), (2, 2, 1.0)]).unwrap();
        let es = symbolic_factorization(&p);
        let part = fundamental_supernodes(&es);
        let hadj = higher_adjacency(&part, &es);
        let mut fs = assemble(&p, &part, &hadj).unwrap();
        let err = rlb_factor(&mut fs, &block_lists(&part, &hadj), &mut KernelTrace::counts());
        assert_eq!(err, Err(Error::NotPositiveDefinite { column: 2 }));
    }

    #[test]
    fn matches_dense_oracle_and_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let p = gen::ensemble_member(&mut rng, 150);
            let p = gen::random_spd_values(&p, &mut rng);
            let (fs, _, _) = factor(&p);
            let oracle = dense_cholesky(&to_dense(&p).unwrap(), p.n()).unwrap();
            assert!(relative_difference(&fs.to_dense_lower(), &oracle) <= 1e-10);
            let b: Vec<f64> = (0..p.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = solve(&fs, &b).unwrap();
            assert!(relative_residual(&p, &x, &b).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn factorization_is_in_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = gen::random_spd_values(&gen::random_mesh(&mut rng, 400), &mut rng);
        let es = symbolic_factorization(&p);
        let part = fundamental_supernodes(&es);
        let hadj = higher_adjacency(&part, &es);
        let blocks = block_lists(&part, &hadj);
        let mut fs = assemble(&p, &part, &hadj).unwrap();
        let mut trace = KernelTrace::counts();
        let (res, usage) = measure(|| rlb_factor(&mut fs, &blocks, &mut trace));
        res.unwrap();
        assert_eq!(usage.peak, p.n() * std::mem::size_of::<usize>());
        assert_eq!(usage.retained, 0);
    }
}
