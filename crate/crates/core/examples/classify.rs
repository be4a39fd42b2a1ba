//! Exchangeability class of splitting rules.

use rextree::combinatorics::classify_exchangeability;
use rextree::dislocation::{alphagamma_growth_split_oracle, splitting_rule, DiscreteDislocation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (alpha, gamma) in [(0.5, 0.5), (0.5, 0.3), (0.5, 0.0)] {
        let f = classify_exchangeability(&alphagamma_growth_split_oracle(alpha, gamma, 4)?.to_measure()?)?;
        println!("alpha-gamma ({alpha}, {gamma}): {f:?}");
    }
    let f = classify_exchangeability(&splitting_rule(&DiscreteDislocation::single_atom(), 4)?.to_measure()?)?;
    println!("single atom: {f:?}");
    Ok(())
}
