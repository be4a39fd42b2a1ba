//! Splitting rule of a discrete dislocation measure and its
//! sampling-consistency residual.

use rextree::combinatorics::MassPartition;
use rextree::dislocation::{consistency_residual, nu_total_mass, splitting_rule, DiscreteDislocation, NuAtom};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DiscreteDislocation::conservative(
        3,
        vec![
            vec![NuAtom { s: MassPartition::new(vec![0.5, 0.5])?, weight: 1.0 }],
            vec![NuAtom { s: MassPartition::new(vec![0.7, 0.3])?, weight: 0.5 }],
        ],
    )?;
    println!("nu mass {:.4}", nu_total_mass(&d));
    let t = splitting_rule(&d, 4)?;
    print!("{}", t.to_csv());
    for n in 2..=6 {
        println!("n = {n} residual {:.2e}", consistency_residual(&d, n)?);
    }
    Ok(())
}
