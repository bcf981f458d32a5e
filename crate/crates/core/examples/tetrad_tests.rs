// Wishart and delta tests of vanishing tetrads on a one-factor and a
// two-factor sample.

use mixed_fofc::correlation::pearson_matrix;
use mixed_fofc::sem::{random_model, simulate_gaussian};
use mixed_fofc::tetrad::{tetrad_diffs, tetrad_p_value, TetradTest};

fn main() -> mixed_fofc::Result<()> {
    // Two latents with four indicators each: X1..X4 and X5..X8.
    let spec = random_model(2, 4, 0, 0, 5)?;
    let m = pearson_matrix(&simulate_gaussian(&spec, 1000)?)?;

    for (label, quad) in [("same factor", [0, 1, 2, 3]), ("two per factor", [0, 1, 4, 5])] {
        println!("{label} {quad:?}");
        for t in tetrad_diffs(&m, quad)? {
            let w = tetrad_p_value(&m, t.indices, TetradTest::Wishart)?;
            let d = tetrad_p_value(&m, t.indices, TetradTest::Delta)?;
            println!(
                "  tetrad {:?} = {:+.4}  wishart p {w:.4}  delta p {d:.4}",
                t.indices, t.value
            );
        }
    }
    Ok(())
}
