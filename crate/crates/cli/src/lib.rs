//! Command implementations behind the `snreorder` binary.
//!
//! Every command returns a plain-text report and, when an output directory
//! is configured, writes its CSV and permutation files there. Apart from
//! the timing columns of `compare`, all outputs are deterministic for a
//! fixed configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snreorder_core::alloc_meter::measure;
use snreorder_core::blockmetrics::objective;
use snreorder_core::matrixio::{apply_symmetric_permutation, emit_permutation, parse_matrix_market, parse_permutation};
use snreorder_core::pipeline::{analyze, apply_reorder, reorder, Analysis, FillOrder, Method, Reordered};
use snreorder_core::pr::Strategy;
use snreorder_core::rlb::{assemble, relative_residual, rlb_factor, solve, KernelTrace};
use snreorder_core::tsp::Rule;
use snreorder_core::SymmetricPattern;

/// Settings shared by all commands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    /// A matrix file, or for `compare` a directory of `.mtx` files.
    pub input: PathBuf,
    pub perm: Option<PathBuf>,
    pub mdo: bool,
    pub merge_cap: f64,
    pub method: MethodKind,
    pub strategy: Strategy,
    pub rule: Rule,
    pub weighted: bool,
    pub seed: u64,
    pub reps: usize,
    /// Methods for `compare`; empty means all variants.
    pub methods: Vec<Method>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            perm: None,
            mdo: false,
            merge_cap: snreorder_core::amalgamate::DEFAULT_CAP,
            method: MethodKind::None,
            strategy: Strategy::Work,
            rule: Rule::Farthest,
            weighted: false,
            seed: 0,
            reps: 7,
            methods: Vec::new(),
            out: None,
        }
    }

    /// The single method selected by `--method` and its options.
    pub fn selected_method(&self) -> Method {
        match self.method {
            MethodKind::None => Method::None,
            MethodKind::Pr => Method::Pr(self.strategy),
            MethodKind::Tsp => Method::Tsp { rule: self.rule, weighted: self.weighted },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    None,
    Pr,
    Tsp,
}

impl std::str::FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(MethodKind::None),
            "pr" => Ok(MethodKind::Pr),
            "tsp" => Ok(MethodKind::Tsp),
            other => Err(format!("unknown method `{other}` (expected none, pr or tsp)")),
        }
    }
}

fn read_matrix(path: &Path) -> Result<SymmetricPattern> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_market(&text).with_context(|| format!("parsing {}", path.display()))
}

fn fill_order(cfg: &RunConfig, n: usize) -> Result<FillOrder> {
    if let Some(path) = &cfg.perm {
        ensure!(!cfg.mdo, "--perm and --mdo are mutually exclusive");
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let perm = parse_permutation(&text).with_context(|| format!("parsing {}", path.display()))?;
        ensure!(perm.len() == n, "permutation has {} entries, matrix has {n} columns", perm.len());
        return Ok(FillOrder::Given(perm));
    }
    Ok(if cfg.mdo { FillOrder::MinimumDegree } else { FillOrder::Natural })
}

fn check_cap(cap: f64) -> Result<()> {
    ensure!(cap.is_finite() && cap >= 0.0, "--merge-cap must be a nonnegative fraction, got {cap}");
    Ok(())
}

fn write_out(cfg: &RunConfig, name: &str, body: &str) -> Result<()> {
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn load_and_analyze(cfg: &RunConfig) -> Result<(SymmetricPattern, Analysis)> {
    check_cap(cfg.merge_cap)?;
    let p = read_matrix(&cfg.input)?;
    let fill = fill_order(cfg, p.n())?;
    let a = analyze(&p, &fill, cfg.merge_cap)?;
    log::info!("analysed {}: n = {}, {} supernodes", cfg.input.display(), a.n(), a.partition.len());
    Ok((p, a))
}

/// `analyze`: symbolic statistics and the merge log.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<String> {
    let (p, a) = load_and_analyze(cfg)?;
    let mut r = String::new();
    writeln!(r, "n: {}", a.n())?;
    writeln!(r, "nnz_a: {}", p.nnz())?;
    writeln!(r, "nnz_l: {}", a.nnz_l())?;
    writeln!(r, "supernodes_fundamental: {}", a.fundamental.len())?;
    writeln!(r, "supernodes_merged: {}", a.partition.len())?;
    writeln!(r, "max_width: {}", a.partition.max_width())?;
    writeln!(r, "stored_entries: {}", a.padded_nnz())?;
    writeln!(r, "added_zeros: {}", a.merge_log.added_zeros())?;
    writeln!(r, "merges: {}", a.merge_log.records.len())?;
    writeln!(r, "flops: {}", a.flops())?;
    write_out(cfg, "analysis.txt", &r)?;
    write_out(cfg, "merge_log.csv", &a.merge_log.to_csv())?;
    Ok(r)
}

fn reorder_report(a: &Analysis, method: Method, rd: &Reordered) -> Result<String> {
    let (_, eq1) = objective(&rd.stats, false);
    let (_, eq2) = objective(&rd.stats, true);
    let mut r = String::new();
    writeln!(r, "method: {method}")?;
    writeln!(r, "supernodes: {}", a.partition.len())?;
    writeln!(r, "block_count: {eq1}")?;
    writeln!(r, "weighted_block_count: {eq2}")?;
    let t = a.partition.len().saturating_sub(1);
    if !a.partition.is_empty() {
        writeln!(r, "last_supernode_block_count: {}", rd.stats.block_count[t])?;
    }
    Ok(r)
}

/// `reorder`: the composed permutation and per-supernode block statistics.
pub fn cmd_reorder(cfg: &RunConfig) -> Result<String> {
    let (_, a) = load_and_analyze(cfg)?;
    let method = cfg.selected_method();
    let rd = apply_reorder(&a, reorder(&a, method, cfg.seed))?;
    let r = reorder_report(&a, method, &rd)?;
    write_out(cfg, "permutation.txt", &emit_permutation(&rd.global))?;
    write_out(cfg, "blockstats.csv", &rd.stats.to_csv())?;
    write_out(cfg, "reorder.txt", &r)?;
    Ok(r)
}

fn factor_once(p: &SymmetricPattern, a: &Analysis, rd: &Reordered, trace: &mut KernelTrace) -> Result<snreorder_core::rlb::FactorStorage> {
    let q = apply_symmetric_permutation(p, &rd.global)?;
    let mut fs = assemble(&q, &a.partition, &rd.hadj)?;
    rlb_factor(&mut fs, &rd.blocks, trace)?;
    Ok(fs)
}

/// `factor`: blocked factorization, a seeded solve and kernel counts.
pub fn cmd_factor(cfg: &RunConfig) -> Result<String> {
    let (p, a) = load_and_analyze(cfg)?;
    let p = p.ensure_values();
    let method = cfg.selected_method();
    let rd = apply_reorder(&a, reorder(&a, method, cfg.seed))?;
    let mut trace = KernelTrace::with_calls();
    let fs = factor_once(&p, &a, &rd, &mut trace)?;
    let q = apply_symmetric_permutation(&p, &rd.global)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b: Vec<f64> = (0..q.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = solve(&fs, &b)?;
    let residual = relative_residual(&q, &x, &b)?;
    let mut r = String::new();
    writeln!(r, "method: {method}")?;
    writeln!(r, "n: {}", q.n())?;
    writeln!(r, "stored_entries: {}", fs.stored_entries())?;
    writeln!(r, "cdiv: {}", trace.cdiv_factor)?;
    writeln!(r, "syrk: {}", trace.syrk)?;
    writeln!(r, "gemm: {}", trace.gemm)?;
    writeln!(r, "residual: {residual:e}")?;
    write_out(cfg, "factor.txt", &r)?;
    write_out(cfg, "kernels.csv", &trace.to_csv())?;
    Ok(r)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// One row of the comparison table.
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub matrix: String,
    pub method: Method,
    pub reorder_seconds: f64,
    pub reorder_bytes: usize,
    pub block_count: u64,
    pub weighted_block_count: u64,
    pub factor_seconds: f64,
    pub factor_overhead_seconds: f64,
}

pub const COMPARE_HEADER: &str =
    "matrix,method,reorder_seconds,reorder_peak_bytes,block_count,weighted_block_count,factor_seconds,factor_overhead_seconds";

/// Columns of the comparison CSV that hold wall-clock times.
pub const TIMING_COLUMNS: [usize; 3] = [2, 6, 7];

fn matrix_files(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mtx"))
        .collect();
    files.sort();
    ensure!(!files.is_empty(), "no .mtx files in {}", input.display());
    Ok(files)
}

/// Runs every method on every matrix and collects the comparison rows.
pub fn compare_rows(cfg: &RunConfig) -> Result<Vec<CompareRow>> {
    check_cap(cfg.merge_cap)?;
    ensure!(cfg.reps % 2 == 1, "--reps must be odd, got {}", cfg.reps);
    ensure!(cfg.perm.is_none(), "compare takes no --perm; use --mdo or the natural order");
    let methods: Vec<Method> = if cfg.methods.is_empty() { Method::STANDARD.to_vec() } else { cfg.methods.clone() };
    let mut rows = Vec::new();
    for path in matrix_files(&cfg.input)? {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let p = read_matrix(&path)?.ensure_values();
        let fill = if cfg.mdo { FillOrder::MinimumDegree } else { FillOrder::Natural };
        let a = analyze(&p, &fill, cfg.merge_cap)?;
        for &method in &methods {
            let mut times = Vec::with_capacity(cfg.reps);
            let mut bytes = 0;
            let mut within = None;
            for _ in 0..cfg.reps {
                let start = Instant::now();
                let (perm, usage) = measure(|| reorder(&a, method, cfg.seed));
                times.push(start.elapsed().as_secs_f64());
                bytes = usage.transient();
                within = Some(perm);
            }
            let rd = apply_reorder(&a, within.expect("at least one repetition"))?;
            let mut ftimes = Vec::with_capacity(cfg.reps);
            for _ in 0..cfg.reps {
                let q = apply_symmetric_permutation(&p, &rd.global)?;
                let start = Instant::now();
                let mut fs = assemble(&q, &a.partition, &rd.hadj)?;
                rlb_factor(&mut fs, &rd.blocks, &mut KernelTrace::counts())?;
                ftimes.push(start.elapsed().as_secs_f64());
            }
            let reorder_seconds = if method == Method::None { 0.0 } else { median(times) };
            let factor_seconds = median(ftimes);
            rows.push(CompareRow {
                matrix: name.clone(),
                method,
                reorder_seconds,
                reorder_bytes: if method == Method::None { 0 } else { bytes },
                block_count: objective(&rd.stats, false).1,
                weighted_block_count: objective(&rd.stats, true).1,
                factor_seconds,
                factor_overhead_seconds: factor_seconds + reorder_seconds,
            });
            log::info!("{name} {method}: factor {factor_seconds:.3e} s");
        }
    }
    Ok(rows)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{},{},{},{:.6e},{:.6e}",
            r.matrix,
            r.method,
            r.reorder_seconds,
            r.reorder_bytes,
            r.block_count,
            r.weighted_block_count,
            r.factor_seconds,
            r.factor_overhead_seconds
        );
    }
    out
}

/// Performance profile over matrices: for each method and each observed
/// ratio `tau`, the fraction of matrices on which the method is within
/// `tau` of the best method.
pub fn profile(rows: &[CompareRow], measure: impl Fn(&CompareRow) -> f64) -> Vec<(Method, f64, f64)> {
    let mut matrices: Vec<&str> = rows.iter().map(|r| r.matrix.as_str()).collect();
    matrices.dedup();
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut ratios: Vec<(Method, f64)> = Vec::new();
    for m in &matrices {
        let here: Vec<&CompareRow> = rows.iter().filter(|r| r.matrix == *m).collect();
        let best = here.iter().map(|r| measure(r)).fold(f64::INFINITY, f64::min);
        for r in here {
            let v = measure(r);
            let ratio = if v <= best { 1.0 } else if best > 0.0 { v / best } else { f64::INFINITY };
            ratios.push((r.method, ratio));
        }
    }
    let mut taus: Vec<f64> = ratios.iter().map(|&(_, t)| t).filter(|t| t.is_finite()).collect();
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let count = matrices.len() as f64;
    let mut out = Vec::new();
    for &m in &methods {
        for &tau in &taus {
            let within = ratios.iter().filter(|&&(mm, r)| mm == m && r <= tau).count();
            out.push((m, tau, within as f64 / count));
        }
    }
    out
}

pub const PROFILE_HEADER: &str = "method,kind,tau,fraction,log2_tau";

pub fn profile_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    let kinds: [(&str, fn(&CompareRow) -> f64); 3] = [
        ("fac", |r| r.factor_seconds),
        ("facover", |r| r.factor_overhead_seconds),
        ("space", |r| r.reorder_bytes as f64),
    ];
    for (kind, f) in kinds {
        // the space profile compares reordering methods only
        let subset: Vec<CompareRow> =
            rows.iter().filter(|r| kind != "space" || r.method != Method::None).cloned().collect();
        for (m, tau, frac) in profile(&subset, f) {
            let _ = writeln!(out, "{m},{kind},{tau:.6},{frac:.6},{:.6}", tau.log2());
        }
    }
    out
}

/// `compare`: comparison table and performance profiles.
pub fn cmd_compare(cfg: &RunConfig) -> Result<String> {
    let rows = compare_rows(cfg)?;
    let table = compare_csv(&rows);
    write_out(cfg, "compare.csv", &table)?;
    write_out(cfg, "profile.csv", &profile_csv(&rows))?;
    Ok(table)
}

/// Parses a comma-separated method list such as `FARwts,PR-work`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name.parse::<Method>() {
            Ok(m) => out.push(m),
            Err(e) => bail!(e),
        }
    }
    Ok(out)
}
