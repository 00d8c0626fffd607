//! Regenerates the bundled desk corpus: `cargo run -p snreorder-core --example gen_corpus -- corpus`

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snreorder_core::gen;
use snreorder_core::matrixio::write_matrix_market;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut files = vec![("golden9", gen::golden_matrix())];
    files.push(("mesh_8x8x8", gen::mesh3d(&mut rng, 8, 8, 8, 0.1)));
    files.push(("mesh_12x10x6", gen::mesh3d(&mut rng, 12, 10, 6, 0.2)));
    files.push(("mesh_16x16x4", gen::mesh3d(&mut rng, 16, 16, 4, 0.0)));
    files.push(("random_600_deg3", gen::random_pattern(&mut rng, 600, 3.0)));
    files.push(("random_400_deg5", gen::random_pattern(&mut rng, 400, 5.0)));
    for (name, p) in files {
        let p = gen::random_spd_values(&p, &mut rng);
        std::fs::write(dir.join(format!("{name}.mtx")), write_matrix_market(&p))?;
    }
    Ok(())
}
