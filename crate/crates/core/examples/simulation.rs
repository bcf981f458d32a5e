// Draws a measurement model, simulates it, discretizes half of it and
// writes the data with a JSON sidecar.

use mixed_fofc::sem::{discretize, random_model, simulate, simulate_gaussian, DataType, DiscretizationPlan};

fn main() -> mixed_fofc::Result<()> {
    let spec = random_model(3, 4, 2, 1, 42)?;
    println!("latent edges: {:?}", spec.latent_edges);
    println!("impurities:   {:?}", spec.impurities);
    println!("true clusters (0-based): {:?}", spec.true_clusters());

    let (data, meta) = simulate(&spec, 500, DataType::NonMedianBinary)?;
    println!("{} rows x {} columns, generator {}", data.n(), data.p(), meta.generator);

    // Mixed: the first half of each latent's children discretized to 5 categories.
    let gaussian = simulate_gaussian(&spec, 500)?;
    let plan = DiscretizationPlan::half_mixed(3, 4, DataType::Categories(5));
    let mixed = discretize(&gaussian, &plan, 7)?;
    let kinds: Vec<bool> = mixed.columns().iter().map(|c| c.is_discrete()).collect();
    println!("discrete columns: {kinds:?}");

    let dir = std::env::temp_dir().join("mixed_fofc_simulation_example");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("data.csv");
    data.write_csv(std::fs::File::create(&csv)?)?;
    meta.write_json(&csv.with_extension("json"))?;
    println!("wrote {}", csv.display());
    Ok(())
}
