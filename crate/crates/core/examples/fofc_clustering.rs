// Clusters a population matrix exactly, then a finite sample of the same
// model with discrete indicators.

use mixed_fofc::correlation::EstimatorPolicy;
use mixed_fofc::evaluation::score;
use mixed_fofc::fofc::{fofc, fofc_matrix, FofcConfig};
use mixed_fofc::sem::{implied_covariance, random_model, simulate, DataType};

fn main() -> mixed_fofc::Result<()> {
    let spec = random_model(4, 4, 2, 0, 3)?;
    let truth = spec.true_clusters();
    let cfg = FofcConfig::default();

    let exact = fofc_matrix(&implied_covariance(&spec)?, &cfg)?;
    println!("population: {:?}", exact.member_sets());

    let (data, _) = simulate(&spec, 2000, DataType::Categories(3))?;
    for policy in [EstimatorPolicy::Pearson, EstimatorPolicy::Polychoric] {
        let est = fofc(&data, policy, &cfg)?;
        println!("{policy}:");
        for c in &est.clusters {
            let names: Vec<&str> = c.members.iter().map(|&j| data.column(j).name.as_str()).collect();
            println!("  {}: {}", c.label, names.join(" "));
        }
        let s = score(&est, &truth);
        println!(
            "  unclustered {:?}, precision {:?}, recall {:.3}",
            est.unclustered, s.precision, s.recall
        );
    }
    Ok(())
}
