// Standard and bivariate normal building blocks.

use mixed_fofc::normal::{bvn_cdf, bvn_rect_prob, std_normal_cdf, std_normal_quantile, Cutoff, Rho};

fn main() -> mixed_fofc::Result<()> {
    println!("Phi(1.96) = {:.6}", std_normal_cdf(1.96));
    println!("Phi^-1(0.975) = {:.6}", std_normal_quantile(0.975)?);

    for r in [-0.9, 0.0, 0.5, 0.9] {
        let rho = Rho::new(r)?;
        // P(X <= 0, Y <= 0) = 1/4 + asin(rho) / (2 pi)
        let orthant = bvn_cdf(Cutoff::Finite(0.0), Cutoff::Finite(0.0), rho);
        let rect = bvn_rect_prob(
            Cutoff::Finite(-1.0),
            Cutoff::Finite(1.0),
            Cutoff::Finite(-1.0),
            Cutoff::Finite(1.0),
            rho,
        )?;
        println!(
            "rho {r:+.1}: orthant {orthant:.6} (closed form {:.6}), P(|X|<1, |Y|<1) {rect:.6}",
            0.25 + r.asin() / (2.0 * std::f64::consts::PI)
        );
    }
    Ok(())
}
