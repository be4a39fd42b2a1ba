//! Rooted Gromov-Hausdorff distance between small metric trees.

use rextree::growth::MetricTree;
use rextree::treemetric::{gh_distance_rooted, gh_upper_bound, gh_stabilization, DistanceMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cherry = |a: f64, b: f64, c: f64| {
        MetricTree::new(vec![None, Some(0), Some(1), Some(1)], vec![0.0, a, b, c], vec![None, None, Some(1), Some(2)])
    };
    let x = cherry(1.0, 1.0, 1.0)?;
    let y = cherry(0.5, 1.5, 1.0)?;
    println!("{}  vs  {}", x.newick(), y.newick());
    println!("GH = {:.4}, matching bound {:.4}", gh_distance_rooted(&x, &y)?, gh_upper_bound(&x, &y));
    println!("four-point ok: {}", DistanceMatrix::from_tree(&x).satisfies_four_point());

    for p in gh_stabilization(0.5, 0.4, 4, &[64, 256, 1024], 100, 0)? {
        println!("n = {:>5}: median GH(n, 4n) = {:.4}", p.n, p.median);
    }
    Ok(())
}
