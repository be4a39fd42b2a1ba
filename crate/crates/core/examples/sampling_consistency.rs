//! Skewed Poisson-Dirichlet splits are sampling consistent only on two
//! curves in (alpha, theta, lambda).

use rextree::dislocation::sampling_consistency_residual;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (alpha, theta) = (0.5, -0.6);
    let lambda_ag = (1.0 - alpha) / (1.0 - theta - 2.0 * alpha);
    for lambda in [0.0, 0.25, 0.5, 0.7, lambda_ag, 1.0] {
        println!(
            "lambda {lambda:.3}: residual {:.3e}",
            sampling_consistency_residual(alpha, theta, lambda)?
        );
    }
    Ok(())
}
