//! Fixture matrices and seeded random generators for tests, the bundled
//! corpus and the comparison harness.

use rand::Rng;

use crate::SymmetricPattern;

fn from_one_based(n: usize, entries: &[(usize, usize)]) -> SymmetricPattern {
    SymmetricPattern::from_entries(n, entries.iter().map(|&(i, j)| (i - 1, j - 1)))
        .expect("fixture indices are in range")
}

/// The 9x9 three-supernode example: supernodes {1,2}, {3,4}, {5..9}
/// (1-based) with six fill entries.
pub fn golden_matrix() -> SymmetricPattern {
    from_one_based(
        9,
        &[
            (2, 1), (5, 1), (6, 1), (9, 1),
            (5, 2), (9, 2),
            (4, 3), (5, 3), (7, 3), (8, 3),
            (5, 4), (8, 4),
            (6, 5), (8, 5),
            (7, 6), (9, 6),
            (8, 7),
            (9, 8),
        ],
    )
}

/// [`golden_matrix`] after the within-supernode permutation
/// 6->5, 9->6, 5->7, 7->8, 8->9 of the last supernode.
pub fn golden_matrix_reordered() -> SymmetricPattern {
    from_one_based(
        9,
        &[
            (2, 1), (5, 1), (6, 1), (7, 1),
            (6, 2), (7, 2),
            (4, 3), (7, 3), (8, 3), (9, 3),
            (7, 4), (9, 4),
            (6, 5), (7, 5), (8, 5),
            (9, 6),
            (9, 7),
            (9, 8),
        ],
    )
}

/// Random symmetric pattern with roughly `avg_degree` off-diagonal
/// neighbours per vertex.
pub fn random_pattern<R: Rng>(rng: &mut R, n: usize, avg_degree: f64) -> SymmetricPattern {
    let mut entries = Vec::new();
    if n > 1 {
        let m = ((n as f64) * avg_degree / 2.0).round() as usize;
        for _ in 0..m {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                entries.push((i, j));
            }
        }
    }
    SymmetricPattern::from_entries(n, entries).expect("indices in range")
}

/// 7-point stencil on an `nx x ny x nz` grid, plus each of the remaining
/// 26-neighbourhood links with probability `extra`.
pub fn mesh3d<R: Rng>(rng: &mut R, nx: usize, ny: usize, nz: usize, extra: f64) -> SymmetricPattern {
    let id = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    let mut entries = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let me = id(x, y, z);
                for dz in 0..=1usize {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            // visit each unordered neighbour pair once
                            if dz == 0 && (dy < 0 || (dy == 0 && dx <= 0)) {
                                continue;
                            }
                            let (xx, yy, zz) = (x as i64 + dx, y as i64 + dy, (z + dz) as i64);
                            if xx < 0 || yy < 0 || xx >= nx as i64 || yy >= ny as i64 || zz >= nz as i64 {
                                continue;
                            }
                            let axis = (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8;
                            if axis == 1 || rng.gen_bool(extra) {
                                entries.push((me, id(xx as usize, yy as usize, zz as usize)));
                            }
                        }
                    }
                }
            }
        }
    }
    SymmetricPattern::from_entries(nx * ny * nz, entries).expect("indices in range")
}

/// Mesh-like instance with about `target_n` vertices and random aspect.
pub fn random_mesh<R: Rng>(rng: &mut R, target_n: usize) -> SymmetricPattern {
    let side = (target_n as f64).cbrt();
    let lo = (side * 0.7).max(1.0);
    let hi = (side * 1.4).max(lo + 1.0);
    let nx = rng.gen_range(lo..hi).round().max(1.0) as usize;
    let ny = rng.gen_range(lo..hi).round().max(1.0) as usize;
    let nz = ((target_n as f64) / (nx * ny) as f64).round().max(1.0) as usize;
    let extra = rng.gen_range(0.0..0.3);
    mesh3d(rng, nx, ny, nz, extra)
}

/// Attaches random SPD values: off-diagonals uniform in `[-1, 1]`, each
/// diagonal strictly dominating its row.
pub fn random_spd_values<R: Rng>(p: &SymmetricPattern, rng: &mut R) -> SymmetricPattern {
    let n = p.n();
    let mut row_sum = vec![0.0f64; n];
    let mut vals: Vec<f64> = Vec::with_capacity(p.nnz());
    for (i, j) in p.entries() {
        if i == j {
            vals.push(0.0);
        } else {
            let v: f64 = rng.gen_range(-1.0..1.0);
            row_sum[i] += v.abs();
            row_sum[j] += v.abs();
            vals.push(v);
        }
    }
    for ((i, j), v) in p.entries().zip(vals.iter_mut()) {
        if i == j {
            *v = row_sum[i] + 1.0 + rng.gen_range(0.0..1.0);
        }
    }
    p.with_values(vals).expect("one value per entry")
}

/// One member of the random test ensemble: a random or mesh-like pattern
/// with up to `max_n` vertices.
pub fn ensemble_member<R: Rng>(rng: &mut R, max_n: usize) -> SymmetricPattern {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(max_n.min(5)..=max_n);
        let deg = rng.gen_range(1.0..5.0);
        random_pattern(rng, n, deg)
    } else {
        let n = rng.gen_range((max_n / 2).max(8)..=max_n.max(8));
        random_mesh(rng, n)
    }
}
