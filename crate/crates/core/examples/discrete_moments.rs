// Exact moments of discretized bivariate normals and how discretization
// attenuates a correlation.

use mixed_fofc::discrete::{discrete_cor, discrete_cov_exact, discrete_marginal_pmf, CutoffVector, DiscretizedPair};
use mixed_fofc::normal::Rho;

fn main() -> mixed_fofc::Result<()> {
    let median = CutoffVector::median();
    let skewed = CutoffVector::new(vec![0.8])?;
    let five = CutoffVector::new(vec![-1.2, -0.4, 0.4, 1.2])?;
    println!("pmf of 5-category variable: {:.4?}", discrete_marginal_pmf(&five));

    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10}",
        "rho", "cov med", "cor med", "cor skew", "cor 5x5"
    );
    for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let rho = Rho::new(r)?;
        let med = DiscretizedPair::new(median.clone(), median.clone(), rho);
        let skew = DiscretizedPair::new(skewed.clone(), median.clone(), rho);
        let multi = DiscretizedPair::new(five.clone(), five.clone(), rho);
        println!(
            "{r:>5.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            discrete_cov_exact(&med),
            discrete_cor(&med).value(),
            discrete_cor(&skew).value(),
            discrete_cor(&multi).value()
        );
    }
    Ok(())
}
