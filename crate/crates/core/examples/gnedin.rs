//! Gnedin's constrained paintbox: the number of records J_n grows like
//! log n / E[-log Y].

use rand::Rng;
use rextree::harness::rng::par_replicates;
use rextree::harness::stats::mean_stderr;
use rextree::paintbox::gnedin_constrained_run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Y uniform on (0,1), so E[-log Y] = 1.
    for n in [100, 10_000, 1_000_000] {
        let runs = par_replicates(3, "gnedin-example", 200, |_, rng| {
            gnedin_constrained_run(|r| r.random::<f64>(), &[1], n, false, rng).map(|(j, _)| j as f64 / (n as f64).ln())
        });
        let xs: Vec<f64> = runs.into_iter().collect::<Result<_, _>>()?;
        let (m, se) = mean_stderr(&xs);
        println!("n = {n:>8}  J_n/log n = {m:.3} +- {se:.3}");
    }

    let (j, state) = gnedin_constrained_run(|r| r.random::<f64>(), &[2, 1], 12, true, &mut rextree::harness::rng::replicate_rng(0, "trace", 0))?;
    println!("J_12 = {j}, trace {:?}", state.modified_values);
    Ok(())
}
