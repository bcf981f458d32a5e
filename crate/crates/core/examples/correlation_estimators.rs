// Pearson, Spearman and polychoric estimates on one simulated mixed dataset.

use mixed_fofc::correlation::{mixed_matrix, EstimatorPolicy};
use mixed_fofc::sem::{implied_covariance, random_model, simulate, DataType};

fn main() -> mixed_fofc::Result<()> {
    let spec = random_model(2, 3, 1, 0, 11)?;
    let truth = implied_covariance(&spec)?.to_correlation();
    let (data, _) = simulate(&spec, 3000, DataType::Categories(4))?;

    let policies = [
        EstimatorPolicy::Pearson,
        EstimatorPolicy::Rank,
        EstimatorPolicy::Polychoric,
    ];
    let mats = policies
        .iter()
        .map(|&p| mixed_matrix(&data, p))
        .collect::<mixed_fofc::Result<Vec<_>>>()?;

    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>10}",
        "pair", "truth", "pearson", "rank", "polychoric"
    );
    for i in 0..data.p() {
        for j in i + 1..data.p() {
            println!(
                "{:>6} {:>8.3} {:>8.3} {:>8.3} {:>10.3}",
                format!("{}-{}", i + 1, j + 1),
                truth.get(i, j),
                mats[0].get(i, j),
                mats[1].get(i, j),
                mats[2].get(i, j)
            );
        }
    }
    Ok(())
}
