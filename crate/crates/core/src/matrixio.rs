//! Symmetric sparse patterns, permutations, and their text formats.
//!
//! A [`SymmetricPattern`] stores the lower triangle (diagonal included) in
//! compressed column form. Values are optional: every analysis step is
//! pattern-only, only the numeric factorization needs them.

use std::fmt::Write as _;

use crate::{Error, Result};

/// Lower-triangular compressed-column storage of a symmetric matrix.
///
/// Row indices inside a column are strictly increasing, start with the
/// diagonal and never leave `[j, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Option<Vec<f64>>,
}

impl SymmetricPattern {
    /// Builds a pattern from `(row, col)` pairs in either triangle.
    ///
    /// Pairs are mirrored into the lower triangle, deduplicated, and a
    /// diagonal entry is added to every column.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let triplets = entries.into_iter().map(|(i, j)| (i, j, 0.0));
        Self::assemble(n, triplets, false)
    }

    /// Builds a matrix with values from `(row, col, value)` triplets.
    ///
    /// Duplicate positions keep the first value seen. Missing diagonal
    /// entries are added with value 0.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        Self::assemble(n, triplets, true)
    }

    fn assemble(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        with_values: bool,
    ) -> Result<Self> {
        let mut cols: Vec<Vec<(usize, f64)>> = (0..n).map(|j| vec![(j, 0.0)]).collect();
        let mut diag_seen = vec![false; n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::SizeMismatch { expected: n, found: i.max(j) + 1 });
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            if r == c {
                if !diag_seen[c] {
                    cols[c][0].1 = v;
                    diag_seen[c] = true;
                }
            } else {
                cols[c].push((r, v));
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in &mut cols {
            // stable sort keeps the first occurrence of a duplicate in front
            col[1..].sort_by_key(|&(r, _)| r);
            let mut last = usize::MAX;
            for &(r, v) in col.iter() {
                if r != last {
                    row_idx.push(r);
                    values.push(v);
                    last = r;
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self { n, col_ptr, row_idx, values: with_values.then_some(values) })
    }

    /// Builds a pattern from already-sorted lower-triangular columns.
    pub fn from_columns(columns: Vec<Vec<usize>>, values: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let n = columns.len();
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        for (j, col) in columns.iter().enumerate() {
            if col.first() != Some(&j) {
                return Err(Error::Parse { line: 0, msg: format!("column {j} lacks its diagonal") });
            }
            if col.windows(2).any(|w| w[0] >= w[1]) || col.last().is_some_and(|&r| r >= n) {
                return Err(Error::Parse { line: 0, msg: format!("column {j} is not sorted or out of range") });
            }
            row_idx.extend_from_slice(col);
            col_ptr.push(row_idx.len());
        }
        let values = match values {
            Some(v) => {
                if v.len() != n || v.iter().zip(&columns).any(|(a, b)| a.len() != b.len()) {
                    return Err(Error::SizeMismatch { expected: row_idx.len(), found: v.iter().map(Vec::len).sum() });
                }
                Some(v.into_iter().flatten().collect())
            }
            None => None,
        };
        Ok(Self { n, col_ptr, row_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries in the lower triangle, diagonal included.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Rows of column `j` (lower triangle, diagonal first).
    pub fn column(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn column_values(&self, j: usize) -> Option<&[f64]> {
        self.values.as_ref().map(|v| &v[self.col_ptr[j]..self.col_ptr[j + 1]])
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }

    /// Iterates `(row, col)` over the lower triangle in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |j| self.column(j).iter().map(move |&i| (i, j)))
    }

    /// Drops the values, keeping the structure.
    pub fn pattern_only(&self) -> Self {
        Self { values: None, ..self.clone() }
    }

    /// Returns a copy whose values are `n` on the diagonal and `-1`
    /// elsewhere, which is strictly diagonally dominant and hence SPD.
    pub fn with_synthesized_values(&self) -> Self {
        let n = self.n as f64;
        let values = self.entries().map(|(i, j)| if i == j { n } else { -1.0 }).collect();
        Self { values: Some(values), ..self.clone() }
    }

    /// Returns `self` if it carries values, otherwise synthesized ones.
    pub fn ensure_values(&self) -> Self {
        if self.has_values() {
            self.clone()
        } else {
            self.with_synthesized_values()
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nnz() {
            return Err(Error::SizeMismatch { expected: self.nnz(), found: values.len() });
        }
        Ok(Self { values: Some(values), ..self.clone() })
    }

    /// Symmetric matrix-vector product using the lower triangle.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let vals = self.values.as_ref().ok_or(Error::MissingValues)?;
        if x.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, found: x.len() });
        }
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = vals[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        Ok(y)
    }

    /// Full (both triangles) adjacency lists without the diagonal.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j) in self.entries() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }
}

/// A bijection on `[0, n)`: `forward` maps old labels to new ones,
/// `inverse` maps new labels back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    /// Validates `forward` (old → new) and builds the inverse.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (old, &new) in forward.iter().enumerate() {
            if new >= n {
                return Err(Error::InvalidPermutation(format!("index {new} out of range for size {n}")));
            }
            if inverse[new] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("index {new} repeated")));
            }
            inverse[new] = old;
        }
        Ok(Self { forward, inverse })
    }

    /// Builds a permutation from the new → old map, i.e. the list of old
    /// labels in their new order.
    pub fn from_inverse(inverse: Vec<usize>) -> Result<Self> {
        let p = Self::from_forward(inverse)?;
        Ok(p.inverted())
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn apply(&self, old: usize) -> usize {
        self.forward[old]
    }

    pub fn inverted(&self) -> Self {
        Self { forward: self.inverse.clone(), inverse: self.forward.clone() }
    }

    /// Permutation that applies `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Self> {
        if next.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), found: next.len() });
        }
        let forward = self.forward.iter().map(|&m| next.forward[m]).collect();
        Self::from_forward(forward)
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &f)| i == f)
    }
}

/// Symmetrically permutes rows and columns: old entry `(i, j)` lands at
/// `(perm(i), perm(j))`. Values follow their entries.
pub fn apply_symmetric_permutation(p: &SymmetricPattern, perm: &Permutation) -> Result<SymmetricPattern> {
    if perm.len() != p.n() {
        return Err(Error::SizeMismatch { expected: p.n(), found: perm.len() });
    }
    let n = p.n();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..n {
        let vals = p.column_values(j);
        for (k, &i) in p.column(j).iter().enumerate() {
            let (a, b) = (perm.apply(i), perm.apply(j));
            let (r, c) = if a >= b { (a, b) } else { (b, a) };
            cols[c].push((r, vals.map_or(0.0, |v| v[k])));
        }
    }
    let mut columns = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for mut col in cols {
        col.sort_unstable_by_key(|&(r, _)| r);
        columns.push(col.iter().map(|&(r, _)| r).collect());
        values.push(col.iter().map(|&(_, v)| v).collect());
    }
    SymmetricPattern::from_columns(columns, p.has_values().then_some(values))
}

/// Parses a Matrix Market `coordinate` file declared `symmetric`.
///
/// Accepts `real`, `integer` and `pattern` fields. Upper-triangle entries
/// are mirrored, explicit zeros are kept as structural entries.
pub fn parse_matrix_market(text: &str) -> Result<SymmetricPattern> {
    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, "malformed header"));
    }
    if tokens[2] != "coordinate" {
        return Err(err(hline, "only coordinate format is supported"));
    }
    let has_values = match tokens[3].as_str() {
        "real" | "integer" | "double" => true,
        "pattern" => false,
        _ => return Err(err(hline, "unsupported field type")),
    };
    if tokens[4] != "symmetric" {
        return Err(err(hline, "matrix is not declared symmetric"));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (lno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(err(lno, "malformed size line"));
                }
                let parse = |s: &str| s.parse::<usize>().map_err(|_| err(lno, "malformed size line"));
                let (rows, cols, nnz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if rows != cols {
                    return Err(err(lno, "matrix is not square"));
                }
                size = Some((rows, nnz));
                triplets.reserve(nnz);
            }
            Some((n, _)) => {
                let want = if has_values { 3 } else { 2 };
                if fields.len() < want {
                    return Err(err(lno, "malformed entry"));
                }
                let idx = |s: &str| s.parse::<usize>().map_err(|_| err(lno, "malformed index"));
                let (i, j) = (idx(fields[0])?, idx(fields[1])?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(err(lno, "index out of range"));
                }
                let v = if has_values {
                    fields[2].parse::<f64>().map_err(|_| err(lno, "malformed value"))?
                } else {
                    0.0
                };
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| err(hline, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {nnz} entries, found {}", triplets.len()),
        });
    }
    SymmetricPattern::assemble(n, triplets, has_values)
}

/// Writes the lower triangle as a symmetric Matrix Market file.
pub fn write_matrix_market(p: &SymmetricPattern) -> String {
    let field = if p.has_values() { "real" } else { "pattern" };
    let mut out = format!("%%MatrixMarket matrix coordinate {field} symmetric\n");
    let _ = writeln!(out, "{} {} {}", p.n(), p.n(), p.nnz());
    for j in 0..p.n() {
        let vals = p.column_values(j);
        for (k, &i) in p.column(j).iter().enumerate() {
            match vals {
                Some(v) => {
                    let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v[k]);
                }
                None => {
                    let _ = writeln!(out, "{} {}", i + 1, j + 1);
                }
            }
        }
    }
    out
}

/// Parses a permutation: an optional `# base 0|1` header, then the forward
/// image of each index, whitespace separated. Without a header indices are
/// 0-based.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let mut base = 0usize;
    let mut forward = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lno = k + 1;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if words.first() == Some(&"base") {
                base = match words.get(1) {
                    Some(&"0") => 0,
                    Some(&"1") => 1,
                    _ => return Err(Error::Parse { line: lno, msg: "base must be 0 or 1".into() }),
                };
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|_| Error::Parse { line: lno, msg: format!("not an index: {tok}") })?;
            if v < base {
                return Err(Error::Parse { line: lno, msg: format!("index {v} below base {base}") });
            }
            forward.push(v - base);
        }
    }
    Permutation::from_forward(forward)
}

pub fn emit_permutation(perm: &Permutation) -> String {
    let mut out = String::from("# base 0\n");
    for &f in perm.forward() {
        let _ = writeln!(out, "{f}");
    }
    out
}
