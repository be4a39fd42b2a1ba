//! Alpha-gamma growth, checked against its exact root-split law.

use std::collections::BTreeMap;

use rextree::dislocation::alphagamma_growth_split_oracle;
use rextree::growth::{reduced_tree, AlphaGammaGrower};
use rextree::harness::rng::{par_replicates, replicate_rng};
use rextree::harness::stats::chi_square_samples;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (alpha, gamma) = (0.5, 0.3);
    let mut rng = replicate_rng(0, "grow", 0);
    let mut g = AlphaGammaGrower::new(alpha, gamma)?;
    for n in [2, 4, 8] {
        g.grow_to(n, &mut rng)?;
        println!("n = {n}: {}", g.snapshot().newick());
    }
    println!("reduced to 1,2,3: {}", reduced_tree(&g.snapshot(), &[1, 2, 3])?.newick());

    let n = 5;
    let oracle = alphagamma_growth_split_oracle(alpha, gamma, n)?;
    let expected: BTreeMap<_, _> = oracle.probs().iter().filter(|(_, &p)| p > 0.0).map(|(k, v)| (k.clone(), *v)).collect();
    let splits = par_replicates(1, "alphagamma-example", 20_000, |_, rng| {
        rextree::growth::grow_alphagamma(alpha, gamma, n, rng).map(|t| t.root_split().expect("n >= 2"))
    });
    let splits: Vec<_> = splits.into_iter().collect::<Result<_, _>>()?;
    let report = chi_square_samples(splits, &expected)?;
    println!("root split at n = {n}: chi-square p = {:.3}", report.p_value);
    Ok(())
}
