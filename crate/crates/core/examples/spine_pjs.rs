//! Distinct values sampled along a stable subordinator window, against the
//! limit functional.

use rextree::harness::rng::replicate_rng;
use rextree::spine::{
    a_alpha, normalized_kn, pjs_limit_functional, sample_kn, simulate_subordinator, spinal_levy_measure, KnWindow,
    LevyAtoms,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (alpha, n) = (0.5, 100_000);
    let levy = LevyAtoms::power_law(alpha, 1.0 / (10.0 * n as f64))?;
    let w = KnWindow::from_origin(5.0)?;
    let mut rng = replicate_rng(0, "pjs", 0);
    for _ in 0..5 {
        let path = simulate_subordinator(&levy, w.length(), &mut rng)?;
        let kn = sample_kn(&path, &w, n, &mut rng)?;
        println!(
            "K_n = {kn:>5}  normalised {:.4}  limit {:.4}",
            normalized_kn(kn, n, alpha),
            pjs_limit_functional(&path, &w, alpha)?
        );
    }
    println!("A_alpha = {:.4}", a_alpha(alpha));

    let spinal = spinal_levy_measure(&rextree::dislocation::DiscreteDislocation::single_atom(), 2)?;
    println!("spine of a 2-block: jumps {:?}, killing {}", spinal.jumps, spinal.killing_rate);
    Ok(())
}
