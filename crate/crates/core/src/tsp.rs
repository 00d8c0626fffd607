//! Within-supernode reordering as a traveling salesman problem.
//!
//! The rows of a target supernode `J_t` are cities. Row `r` carries the set
//! `D(r)` of updaters `J_s` with `r ∈ hadj(J_s)`, and the distance between
//! two rows is the total weight of the symmetric difference of their sets.
//! A dummy city with an empty set closes the tour. Walking a tour, every
//! block of updater `s` is entered once and left once, so the tour length
//! is exactly `sum_s 2 * w_s * bc_s` for the row order obtained by cutting
//! the tour at the dummy. Minimizing the tour therefore minimizes the block
//! count (unit weights) or the width-weighted block count (`w_s = |J_s|`).

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symbolic::{updaters_of, HigherAdjacency, SupernodalETree, SupernodePartition};
use crate::{Error, Permutation, Result};

/// How the next city is chosen during insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Arbitrary,
    Nearest,
    Farthest,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Arbitrary, Rule::Nearest, Rule::Farthest];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Arbitrary => "arbitrary",
            Rule::Nearest => "nearest",
            Rule::Farthest => "farthest",
        }
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "arbitrary" => Ok(Rule::Arbitrary),
            "nearest" => Ok(Rule::Nearest),
            "farthest" => Ok(Rule::Farthest),
            other => Err(format!("unknown rule `{other}` (expected arbitrary, nearest or farthest)")),
        }
    }
}

/// Largest row count accepted by [`exact_solve`].
pub const EXACT_LIMIT: usize = 10;

/// Largest city count for which all distances are cached up front.
pub const DENSE_CACHE_LIMIT: usize = 512;

/// One supernode's instance. Rows with identical sets are merged into one
/// city; cities are numbered by their smallest row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TspInstance {
    m: usize,
    weights: Vec<u64>,
    /// `D(r)` per row, as sorted updater positions.
    row_sets: Vec<Vec<usize>>,
    /// Rows of each city, ascending.
    city_rows: Vec<Vec<usize>>,
}

/// A tour through all cities, stored as the city sequence after the dummy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    pub cities: Vec<usize>,
    pub length: u64,
}

impl TspInstance {
    /// Builds an instance from the local rows hit by each updater.
    pub fn from_sets(m: usize, sets: &[Vec<usize>], weights: &[u64]) -> Self {
        assert_eq!(sets.len(), weights.len());
        let mut row_sets = vec![Vec::new(); m];
        for (s, set) in sets.iter().enumerate() {
            for &r in set {
                row_sets[r].push(s);
            }
        }
        // group identical sets, cities in order of their first row
        let mut keyed: Vec<usize> = (0..m).collect();
        keyed.sort_by(|&a, &b| row_sets[a].cmp(&row_sets[b]).then(a.cmp(&b)));
        let mut city_rows: Vec<Vec<usize>> = Vec::new();
        for (k, &r) in keyed.iter().enumerate() {
            if k > 0 && row_sets[keyed[k - 1]] == row_sets[r] {
                city_rows.last_mut().expect("previous group").push(r);
            } else {
                city_rows.push(vec![r]);
            }
        }
        city_rows.sort_by_key(|c| c[0]);
        Self { m, weights: weights.to_vec(), row_sets, city_rows }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cities(&self) -> usize {
        self.city_rows.len()
    }

    pub fn city_rows(&self, c: usize) -> &[usize] {
        &self.city_rows[c]
    }

    pub fn row_set(&self, r: usize) -> &[usize] {
        &self.row_sets[r]
    }

    fn set_distance(&self, a: &[usize], b: &[usize]) -> u64 {
        let (mut i, mut j, mut d) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            if a[i] == b[j] {
                i += 1;
                j += 1;
            } else if a[i] < b[j] {
                d += self.weights[a[i]];
                i += 1;
            } else {
                d += self.weights[b[j]];
                j += 1;
            }
        }
        d + a[i..].iter().chain(&b[j..]).map(|&s| self.weights[s]).sum::<u64>()
    }

    const NO_ROW: &'static [usize] = &[];

    fn row_or_dummy(&self, r: Option<usize>) -> &[usize] {
        r.map_or(Self::NO_ROW, |r| &self.row_sets[r])
    }

    /// Distance between rows, `None` standing for the dummy.
    pub fn row_distance(&self, a: Option<usize>, b: Option<usize>) -> u64 {
        self.set_distance(self.row_or_dummy(a), self.row_or_dummy(b))
    }

    /// Distance between cities, `None` standing for the dummy.
    pub fn city_distance(&self, a: Option<usize>, b: Option<usize>) -> u64 {
        self.row_distance(a.map(|c| self.city_rows[c][0]), b.map(|c| self.city_rows[c][0]))
    }

    /// Length of the closed tour dummy, `rows[0]`, ..., dummy.
    pub fn row_tour_length(&self, rows: &[usize]) -> u64 {
        let mut prev = None;
        let mut total = 0;
        for &r in rows {
            total += self.row_distance(prev, Some(r));
            prev = Some(r);
        }
        total + self.row_distance(prev, None)
    }

    /// Length of the closed tour through the dummy and `cities` in order.
    pub fn city_tour_length(&self, cities: &[usize]) -> u64 {
        let mut prev = None;
        let mut total = 0;
        for &c in cities {
            total += self.city_distance(prev, Some(c));
            prev = Some(c);
        }
        total + self.city_distance(prev, None)
    }

    /// Local rows in tour order, each city expanded in ascending row order.
    pub fn rows_in_order(&self, tour: &Tour) -> Vec<usize> {
        tour.cities.iter().flat_map(|&c| self.city_rows[c].iter().copied()).collect()
    }
}

/// The instance for target supernode `t`; weights are 1, or the updater
/// widths when `weighted`.
pub fn build_instance(
    t: usize,
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    weighted: bool,
) -> TspInstance {
    let cols = part.cols(t);
    let mut updaters = Vec::new();
    updaters_of(t, part, tree, hadj, &mut updaters);
    updaters.sort_unstable();
    let sets: Vec<Vec<usize>> = updaters
        .iter()
        .map(|&s| hadj.within(s, cols.clone()).iter().map(|&r| r - cols.start).collect())
        .collect();
    let weights: Vec<u64> = updaters.iter().map(|&s| if weighted { part.width(s) as u64 } else { 1 }).collect();
    TspInstance::from_sets(cols.len(), &sets, &weights)
}

/// Distances between cities; the dummy is index `cities`.
enum Distances<'a> {
    Dense { dim: usize, d: Vec<u64> },
    OnDemand(&'a TspInstance),
}

impl<'a> Distances<'a> {
    fn new(inst: &'a TspInstance) -> Self {
        let c = inst.cities();
        if c + 1 > DENSE_CACHE_LIMIT {
            return Distances::OnDemand(inst);
        }
        let dim = c + 1;
        let mut d = vec![0; dim * dim];
        for a in 0..dim {
            for b in a + 1..dim {
                let v = inst.city_distance(Some(a).filter(|&x| x < c), Some(b).filter(|&x| x < c));
                d[a * dim + b] = v;
                d[b * dim + a] = v;
            }
        }
        Distances::Dense { dim, d }
    }

    fn get(&self, a: usize, b: usize) -> u64 {
        match self {
            Distances::Dense { dim, d } => d[a * dim + b],
            Distances::OnDemand(inst) => {
                let c = inst.cities();
                inst.city_distance(Some(a).filter(|&x| x < c), Some(b).filter(|&x| x < c))
            }
        }
    }
}

/// Insertion heuristic. Starts from the dummy plus the city picked by
/// `rule` from the distances to the dummy, then repeatedly picks a city by
/// `rule` and inserts it where the tour grows least. Selection ties go to
/// the smallest city, position ties to the earliest position.
pub fn insertion_solve(inst: &TspInstance, rule: Rule, rng: &mut ChaCha8Rng) -> Tour {
    let c = inst.cities();
    if c == 0 {
        return Tour { cities: Vec::new(), length: 0 };
    }
    let dist = Distances::new(inst);
    let dummy = c;
    let mut to_circuit: Vec<u64> = (0..c).map(|x| dist.get(x, dummy)).collect();
    let mut remaining: Vec<usize> = (0..c).collect();
    let mut circuit: Vec<usize> = Vec::with_capacity(c + 1);
    circuit.push(dummy);
    let mut length = 0u64;

    while !remaining.is_empty() {
        let pick = match rule {
            Rule::Arbitrary => rng.gen_range(0..remaining.len()),
            Rule::Nearest => (0..remaining.len()).min_by_key(|&k| (to_circuit[remaining[k]], remaining[k])).expect("nonempty"),
            Rule::Farthest => (0..remaining.len())
                .min_by_key(|&k| (std::cmp::Reverse(to_circuit[remaining[k]]), remaining[k]))
                .expect("nonempty"),
        };
        let city = remaining.remove(pick);
        // cheapest insertion after position `at`
        let mut best = (u64::MAX, 0);
        for at in 0..circuit.len() {
            let a = circuit[at];
            let b = circuit[(at + 1) % circuit.len()];
            let grow = dist.get(a, city) + dist.get(city, b) - if circuit.len() > 1 { dist.get(a, b) } else { 0 };
            if grow < best.0 {
                best = (grow, at);
            }
        }
        length += best.0;
        circuit.insert(best.1 + 1, city);
        for &x in &remaining {
            to_circuit[x] = to_circuit[x].min(dist.get(x, city));
        }
    }
    // the dummy stays at position 0: insertions only go after it
    Tour { cities: circuit[1..].to_vec(), length }
}

/// Exhaustive minimum tour (dummy fixed) by depth-first search with a
/// length bound.
pub fn exact_solve(inst: &TspInstance) -> Result<Tour> {
    if inst.rows() > EXACT_LIMIT {
        return Err(Error::TooLarge { size: inst.rows(), limit: EXACT_LIMIT });
    }
    let c = inst.cities();
    let dist = Distances::new(inst);
    let mut best = Tour { cities: (0..c).collect(), length: inst.city_tour_length(&(0..c).collect::<Vec<_>>()) };
    let mut path = Vec::with_capacity(c);
    let mut used = vec![false; c];

    fn dfs(
        dist: &Distances<'_>,
        c: usize,
        path: &mut Vec<usize>,
        used: &mut [bool],
        so_far: u64,
        best: &mut Tour,
    ) {
        let last = path.last().copied().unwrap_or(c);
        if path.len() == c {
            let total = so_far + dist.get(last, c);
            if total < best.length {
                *best = Tour { cities: path.clone(), length: total };
            }
            return;
        }
        for x in 0..c {
            if used[x] {
                continue;
            }
            let next = so_far + dist.get(last, x);
            if next >= best.length {
                continue;
            }
            used[x] = true;
            path.push(x);
            dfs(dist, c, path, used, next, best);
            path.pop();
            used[x] = false;
        }
    }
    dfs(&dist, c, &mut path, &mut used, 0, &mut best);
    Ok(best)
}

/// Generator for supernode `t`; each supernode draws from its own stream.
pub fn supernode_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// TSP reordering of every supernode. Only moves columns within their
/// supernode; deterministic for a given `(rule, weighted, seed)`.
pub fn tsp_reorder(
    part: &SupernodePartition,
    tree: &SupernodalETree,
    hadj: &HigherAdjacency,
    rule: Rule,
    weighted: bool,
    seed: u64,
) -> Permutation {
    let mut forward = vec![0; part.n()];
    for t in 0..part.len() {
        let first = part.first_col(t);
        let inst = build_instance(t, part, tree, hadj, weighted);
        let tour = insertion_solve(&inst, rule, &mut supernode_rng(seed, t));
        for (k, r) in inst.rows_in_order(&tour).into_iter().enumerate() {
            forward[first + r] = first + k;
        }
    }
    Permutation::from_forward(forward).expect("each tour visits every row once")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmetrics::{block_list, brute_force_min_blocks, objective, weighted_runs, BlockStats};
    use crate::gen;
    use crate::symbolic::{fundamental_supernodes, higher_adjacency, supernodal_etree, symbolic_factorization};
    use proptest::prelude::*;
    use rand::Rng;

    fn golden() -> (SupernodePartition, SupernodalETree, HigherAdjacency) {
        let es = symbolic_factorization(&gen::golden_matrix());
        let part = fundamental_supernodes(&es);
        let hadj = higher_adjacency(&part, &es);
        let tree = supernodal_etree(&part, &hadj);
        (part, tree, hadj)
    }

    #[test]
    fn golden_indicator_sets() {
        let (part, tree, hadj) = golden();
        let inst = build_instance(2, &part, &tree, &hadj, false);
        let sets: Vec<Vec<usize>> = (0..5).map(|r| inst.row_set(r).iter().map(|s| s + 1).collect()).collect();
        assert_eq!(sets, vec![vec![1, 2], vec![1], vec![2], vec![2], vec![1]]);
        assert_eq!(inst.cities(), 3);
        // tour dummy, 6, 9, 5, 7, 8
        assert_eq!(inst.row_tour_length(&[1, 4, 0, 2, 3]), 4);
        let weighted = build_instance(2, &part, &tree, &hadj, true);
        assert_eq!(weighted.row_tour_length(&[1, 4, 0, 2, 3]), 8);
    }

    #[test]
    fn golden_farthest_insertion_is_optimal() {
        let (part, tree, hadj) = golden();
        for weighted in [false, true] {
            let inst = build_instance(2, &part, &tree, &hadj, weighted);
            let tour = insertion_solve(&inst, Rule::Farthest, &mut supernode_rng(0, 2));
            let rows: Vec<usize> = inst.rows_in_order(&tour).iter().map(|r| r + 5).collect();
            assert_eq!(rows, vec![6, 9, 5, 7, 8]);
            let expect = if weighted { 8 } else { 4 };
            assert_eq!(tour.length, expect);
            assert_eq!(exact_solve(&inst).unwrap().length, expect);
        }
        let perm = tsp_reorder(&part, &tree, &hadj, Rule::Farthest, true, 0);
        let st = BlockStats::compute(&part, &block_list(&part, &hadj, &perm).unwrap());
        assert_eq!(objective(&st, false).0[2], 2);
    }

    #[test]
    fn single_row_and_empty_instances() {
        let inst = TspInstance::from_sets(1, &[vec![0]], &[1]);
        for rule in Rule::ALL {
            let t = insertion_solve(&inst, rule, &mut supernode_rng(1, 0));
            assert_eq!(t.cities, vec![0]);
            assert_eq!(t.length, 2);
        }
        let none = TspInstance::from_sets(3, &[], &[]);
        assert_eq!(none.cities(), 1);
        assert_eq!(exact_solve(&none).unwrap().length, 0);
    }

    #[test]
    fn identical_sets_cost_twice_their_weight() {
        let inst = TspInstance::from_sets(4, &[vec![0, 1, 2, 3], vec![0, 1, 2, 3]], &[3, 5]);
        assert_eq!(exact_solve(&inst).unwrap().length, 16);
        assert_eq!(inst.row_tour_length(&[3, 1, 0, 2]), 16);
    }

    #[test]
    fn exact_refuses_large_instances() {
        let inst = TspInstance::from_sets(11, &[], &[]);
        assert!(matches!(exact_solve(&inst), Err(Error::TooLarge { size: 11, limit: 10 })));
    }

    #[test]
    fn nearest_insertion_stays_within_twice_optimal() {
        // reported, the factor-two bound holds for nearest insertion on metrics
        let mut worst: f64 = 1.0;
        let mut rng = supernode_rng(11, 0);
        for _ in 0..300 {
            let m = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=5);
            let sets: Vec<Vec<usize>> = (0..k).map(|_| (0..m).filter(|_| rng.gen_bool(0.5)).collect()).collect();
            let inst = TspInstance::from_sets(m, &sets, &vec![1; k]);
            let opt = exact_solve(&inst).unwrap().length;
            let got = insertion_solve(&inst, Rule::Nearest, &mut rng).length;
            assert!(got >= opt);
            if opt > 0 {
                worst = worst.max(got as f64 / opt as f64);
            }
        }
        eprintln!("nearest insertion worst ratio to optimum: {worst:.3}");
        assert!(worst <= 2.0);
    }

    fn random_instance(seed: u64) -> (TspInstance, Vec<Vec<usize>>, Vec<u64>) {
        let mut rng = supernode_rng(seed, 0);
        let m = rng.gen_range(1..=8);
        let k = rng.gen_range(0..=5);
        let sets: Vec<Vec<usize>> = (0..k).map(|_| (0..m).filter(|_| rng.gen_bool(0.5)).collect()).collect();
        let weights: Vec<u64> = (0..k).map(|_| rng.gen_range(1..4)).collect();
        (TspInstance::from_sets(m, &sets, &weights), sets, weights)
    }

    proptest! {
        #[test]
        fn tour_length_is_twice_weighted_block_count(seed in any::<u64>(), rule_ix in 0usize..3) {
            let (inst, sets, weights) = random_instance(seed);
            let tour = insertion_solve(&inst, Rule::ALL[rule_ix], &mut supernode_rng(seed, 1));
            let rows = inst.rows_in_order(&tour);
            let mut seen = rows.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..inst.rows()).collect::<Vec<_>>());
            prop_assert_eq!(tour.length, inst.row_tour_length(&rows));
            prop_assert_eq!(tour.length, 2 * weighted_runs(&rows, &sets, &weights));
            let exact = exact_solve(&inst).unwrap();
            prop_assert_eq!(exact.length, 2 * brute_force_min_blocks(inst.rows(), &sets, &weights).unwrap());
            prop_assert!(tour.length >= exact.length);
        }

        #[test]
        fn insertion_is_deterministic(seed in any::<u64>()) {
            let (inst, _, _) = random_instance(seed);
            for rule in Rule::ALL {
                let a = insertion_solve(&inst, rule, &mut supernode_rng(seed, 3));
                let b = insertion_solve(&inst, rule, &mut supernode_rng(seed, 3));
                prop_assert_eq!(a, b);
            }
        }
    }
}
