//! Moments of renewal counts N(t) for light and heavy tailed gaps.

use rextree::harness::rng::replicate_rng;
use rextree::spine::{renewal_moment, PositiveLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let laws = [
        PositiveLaw::Exponential { rate: 1.0 },
        PositiveLaw::Pareto { index: 0.5, scale: 1.0 },
    ];
    for law in laws {
        let mut rng = replicate_rng(0, "renewal", 0);
        for t in [10.0, 100.0, 1000.0] {
            let e = renewal_moment(|r| law.sample(r), t, 2, 2000, &mut rng)?;
            println!("{law:?} t = {t:>6}: E[(N(t)/t)^2] = {:.3} +- {:.3}", e.mean, e.stderr);
        }
    }
    Ok(())
}
