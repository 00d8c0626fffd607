use std::path::{Path, PathBuf};
use std::process::Command;

use snreorder_cli::{cmd_analyze, cmd_compare, cmd_factor, cmd_reorder, compare_rows, profile, MethodKind, RunConfig};
use snreorder_core::gen;
use snreorder_core::matrixio::{parse_permutation, write_matrix_market};
use snreorder_core::pipeline::Method;
use snreorder_core::pr::Strategy;
use snreorder_core::tsp::Rule;
use snreorder_core::SymmetricPattern;

fn write_fixture(dir: &Path, name: &str, p: &SymmetricPattern) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, write_matrix_market(p)).unwrap();
    path
}

fn golden_input(dir: &Path) -> PathBuf {
    write_fixture(dir, "golden.mtx", &gen::golden_matrix())
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
}

#[test]
fn analyze_reports_golden_counts_with_and_without_merging() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(golden_input(dir.path()));
    cfg.merge_cap = 0.0;
    let r = cmd_analyze(&cfg).unwrap();
    assert_eq!(field(&r, "n"), "9");
    assert_eq!(field(&r, "nnz_l"), "33");
    assert_eq!(field(&r, "supernodes_merged"), "3");
    cfg.merge_cap = 0.125;
    cfg.out = Some(dir.path().join("out"));
    let r = cmd_analyze(&cfg).unwrap();
    assert_eq!(field(&r, "supernodes_merged"), "2");
    let log = std::fs::read_to_string(dir.path().join("out/merge_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 2);
}

#[test]
fn diagonal_matrix_has_no_fill_and_solves_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let diag = SymmetricPattern::from_triplets(16, (0..16).map(|i| (i, i, 4.0))).unwrap();
    let mut cfg = RunConfig::new(write_fixture(dir.path(), "diag.mtx", &diag));
    let r = cmd_analyze(&cfg).unwrap();
    assert_eq!(field(&r, "nnz_l"), "16");
    assert_eq!(field(&r, "supernodes_fundamental"), "16");
    cfg.merge_cap = 0.0;
    let r = cmd_factor(&cfg).unwrap();
    assert_eq!(field(&r, "residual").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn reorder_reports_golden_block_counts_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(golden_input(dir.path()));
    cfg.merge_cap = 0.0;
    let mut run = |kind, strategy, rule, weighted| {
        cfg.method = kind;
        cfg.strategy = strategy;
        cfg.rule = rule;
        cfg.weighted = weighted;
        field(&cmd_reorder(&cfg).unwrap(), "last_supernode_block_count").to_string()
    };
    assert_eq!(run(MethodKind::None, Strategy::Work, Rule::Farthest, false), "4");
    assert_eq!(run(MethodKind::Tsp, Strategy::Work, Rule::Farthest, true), "2");
    assert_eq!(run(MethodKind::Pr, Strategy::Work, Rule::Farthest, false), "3");
}

#[test]
fn reorder_writes_a_boundary_preserving_bijection() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(golden_input(dir.path()));
    cfg.merge_cap = 0.0;
    cfg.method = MethodKind::Tsp;
    cfg.weighted = true;
    cfg.out = Some(dir.path().join("out"));
    cmd_reorder(&cfg).unwrap();
    let perm = parse_permutation(&std::fs::read_to_string(dir.path().join("out/permutation.txt")).unwrap()).unwrap();
    let starts = [0, 2, 4, 9];
    let snode = |c: usize| starts.windows(2).position(|w| w[0] <= c && c < w[1]).unwrap();
    for c in 0..9 {
        assert_eq!(snode(c), snode(perm.apply(c)));
    }
    let csv = std::fs::read_to_string(dir.path().join("out/blockstats.csv")).unwrap();
    assert!(csv.starts_with("supernode,"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn factor_gemm_counts_drop_on_the_reordered_golden_case() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(golden_input(dir.path()));
    cfg.merge_cap = 0.0;
    let r = cmd_factor(&cfg).unwrap();
    assert_eq!(field(&r, "gemm"), "2");
    cfg.method = MethodKind::Tsp;
    cfg.weighted = true;
    let r = cmd_factor(&cfg).unwrap();
    assert_eq!(field(&r, "gemm"), "0");
    assert!(field(&r, "residual").parse::<f64>().unwrap() <= 1e-8);
}

#[test]
fn supplied_permutation_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let input = golden_input(dir.path());
    let perm_path = dir.path().join("perm.txt");
    // reverse order, one-based
    std::fs::write(&perm_path, "# base 1\n9\n8\n7\n6\n5\n4\n3\n2\n1\n").unwrap();
    let mut cfg = RunConfig::new(&input);
    cfg.perm = Some(perm_path);
    let r = cmd_analyze(&cfg).unwrap();
    assert_eq!(field(&r, "n"), "9");
    cfg.mdo = true;
    assert!(cmd_analyze(&cfg).is_err());
}

#[test]
fn compare_profile_on_one_matrix_is_a_step_function() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(golden_input(dir.path()));
    cfg.merge_cap = 0.0;
    cfg.reps = 1;
    cfg.methods = vec!["FARwts".parse().unwrap(), Method::Pr(Strategy::Work)];
    let rows = compare_rows(&cfg).unwrap();
    assert_eq!(rows.len(), 2);
    let prof = profile(&rows, |r| r.block_count as f64);
    // FARwts is best (2 blocks) and PR-work needs 3: steps at 1 and 1.5
    let far: Vec<(f64, f64)> = prof.iter().filter(|p| p.0 == rows[0].method).map(|p| (p.1, p.2)).collect();
    let pr: Vec<(f64, f64)> = prof.iter().filter(|p| p.0 == rows[1].method).map(|p| (p.1, p.2)).collect();
    let last = |v: &[(f64, f64)]| v.iter().rev().find(|p| p.0 == 1.0).map(|p| p.1);
    assert!(far.iter().all(|p| p.1 == 1.0));
    assert_eq!(last(&pr), Some(0.0));
    assert!(pr.iter().any(|p| p.0 == 1.5 && p.1 == 1.0));
}

#[test]
fn compare_profile_is_monotone_and_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let p = gen::random_spd_values(&gen::ensemble_member(&mut rng, 60), &mut rng);
        write_fixture(dir.path(), &format!("m{seed}.mtx"), &p);
    }
    let mut cfg = RunConfig::new(dir.path());
    cfg.reps = 1;
    cfg.mdo = true;
    cfg.out = Some(dir.path().join("out"));
    cmd_compare(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("out/compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * Method::STANDARD.len());
    let prof = std::fs::read_to_string(dir.path().join("out/profile.csv")).unwrap();
    let mut last: Option<(String, f64)> = None;
    for line in prof.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let key = format!("{},{}", f[0], f[1]);
        let frac: f64 = f[3].parse().unwrap();
        match &last {
            Some((k, prev)) if *k == key => assert!(frac >= *prev),
            _ => assert_eq!(f[2], "1.000000"),
        }
        last = Some((key, frac));
    }
}

#[test]
fn compare_rejects_even_reps_and_empty_directories() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(dir.path());
    assert!(compare_rows(&cfg).is_err());
    golden_input(dir.path());
    cfg.reps = 4;
    assert!(compare_rows(&cfg).is_err());
}

#[test]
fn binary_exits_nonzero_on_bad_input() {
    let exe = env!("CARGO_BIN_EXE_snreorder");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mtx");
    std::fs::write(&bad, "not a matrix\n").unwrap();
    let out = Command::new(exe).args(["analyze", "--input"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = Command::new(exe).args(["reorder", "--method", "bogus", "--input"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_runs_reorder_on_golden() {
    let exe = env!("CARGO_BIN_EXE_snreorder");
    let dir = tempfile::tempdir().unwrap();
    let input = golden_input(dir.path());
    let out = Command::new(exe)
        .args(["reorder", "--merge-cap", "0", "--method", "tsp", "--rule", "farthest", "--weighted", "--input"])
        .arg(&input)
        .env("SNREORDER_LOG", "info")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&stdout, "last_supernode_block_count"), "2");
    assert!(String::from_utf8_lossy(&out.stderr).contains("analysed"));
}
