//! Markov branching trees from a dislocation measure, exact and reduced.

use rextree::dislocation::DiscreteDislocation;
use rextree::growth::{sample_markov_branching, sample_reduced_markov_branching, DislocationSplitter};
use rextree::harness::rng::replicate_rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DiscreteDislocation::single_atom();
    let mut splitter = DislocationSplitter::new(&d);
    let mut rng = replicate_rng(0, "markov-branching", 0);
    for _ in 0..3 {
        let t = sample_markov_branching(&mut splitter, 8, &mut rng)?;
        println!("{}  height {}", t.newick(), t.height());
    }
    let r = sample_reduced_markov_branching(&mut splitter, 200, 3, &mut rng)?;
    println!("reduced on 3 leaves: {}", r.newick());
    Ok(())
}
