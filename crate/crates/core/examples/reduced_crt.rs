//! Reduced continuum random trees on k leaves, built from spinal
//! subordinators.

use rextree::dislocation::DiscreteDislocation;
use rextree::harness::rng::replicate_rng;
use rextree::harness::stats::mean_stderr;
use rextree::spine::sample_reduced_crt;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DiscreteDislocation::single_atom();
    let mut rng = replicate_rng(0, "reduced-crt", 0);
    for _ in 0..3 {
        println!("{}", sample_reduced_crt(&d, 4, 0.5, &mut rng)?.tree.newick());
    }
    // With no self-similarity the root edge is Exp(nu mass) = Exp(1/2).
    let root: Vec<f64> = (0..5000)
        .map(|_| sample_reduced_crt(&d, 2, 0.0, &mut rng).map(|c| c.tree.edge_length(1)))
        .collect::<Result<_, _>>()?;
    let (m, se) = mean_stderr(&root);
    println!("root edge mean {m:.3} +- {se:.3}");
    Ok(())
}
