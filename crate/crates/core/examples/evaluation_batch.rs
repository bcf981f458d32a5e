// A small precision/recall batch over latent-edge counts and data types.

use mixed_fofc::evaluation::{batch_score, write_score_csv, BatchConfig, Condition};
use mixed_fofc::sem::DataType;

fn main() -> mixed_fofc::Result<()> {
    let mut conditions = Vec::new();
    for edges in [0, 3, 6] {
        for dt in [DataType::Continuous, DataType::MedianBinary, DataType::Categories(4)] {
            conditions.push(Condition::new(edges, 1000, dt));
        }
    }
    let cfg = BatchConfig {
        reps: 8,
        ..BatchConfig::default()
    };
    let rows = batch_score(&conditions, &cfg)?;
    write_score_csv(&rows, std::io::stdout())?;
    Ok(())
}
