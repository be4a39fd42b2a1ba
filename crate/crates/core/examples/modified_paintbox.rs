//! Paintbox conditioned on its restriction to a base partition.

use rextree::combinatorics::{MassPartition, Partition};
use rextree::harness::rng::replicate_rng;
use rextree::paintbox::{modified_paintbox_prob, modified_paintbox_sample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = MassPartition::new(vec![0.6, 0.4])?;
    let base: Partition = "1|2".parse()?;
    let mut rng = replicate_rng(1, "modified-paintbox", 0);
    for _ in 0..5 {
        println!("{}", modified_paintbox_sample(&s, &base, 5, &mut rng)?);
    }
    for t in ["1 3|2", "1|2 3", "1|2|3"] {
        let p: Partition = t.parse()?;
        println!("P({t} | {base}) = {:.4}", modified_paintbox_prob(&s, &base, &p)?);
    }
    Ok(())
}
