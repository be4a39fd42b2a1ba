//! Height scaling exponent of alpha-gamma trees; the slope should be near gamma.

use rextree::treemetric::{scaling_exponent, TreeModel, TreeStatistic};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<usize> = (6..=11).map(|e| 1 << e).collect();
    for (alpha, gamma) in [(0.5, 0.4), (0.5, 0.5), (0.8, 0.2)] {
        let fit = scaling_exponent(&TreeModel::AlphaGamma { alpha, gamma }, &grid, 300, TreeStatistic::Height, 0)?;
        println!("alpha {alpha} gamma {gamma}: slope {:.3} +- {:.3}", fit.slope, fit.stderr);
    }
    Ok(())
}
