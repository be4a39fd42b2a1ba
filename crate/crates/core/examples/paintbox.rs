//! Kingman paintbox: sample partitions of [n] and compare an empirical
//! cylinder frequency with its exact probability.

use rextree::combinatorics::{MassPartition, Partition};
use rextree::harness::rng::replicate_rng;
use rextree::paintbox::{kingman_cylinder_prob, kingman_sample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = MassPartition::new(vec![0.5, 0.3])?;
    let mut rng = replicate_rng(7, "paintbox", 0);
    for _ in 0..5 {
        println!("{}", kingman_sample(&s, 6, &mut rng));
    }

    let target: Partition = "1 2|3".parse()?;
    let reps = 100_000;
    let hits = (0..reps).filter(|_| kingman_sample(&s, 3, &mut rng) == target).count();
    println!(
        "P({target}) exact {:.5} empirical {:.5}",
        kingman_cylinder_prob(&s, &target),
        hits as f64 / reps as f64
    );
    Ok(())
}
