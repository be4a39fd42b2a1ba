//! Acceptance gates. Runs without the libtest harness so that every
//! criterion prints exactly one line.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rextree::combinatorics::{enumerate_partitions, MassPartition, Partition};
use rextree::dislocation::{
    alphagamma_eppf_audit, consistency_residual, consistency_residual_tables, random_dislocation,
    sampling_consistency_sweep, splitting_rule, CurveKind, DiscreteDislocation, SplittingRuleTable,
};
use rextree::growth::grow_alphagamma;
use rextree::harness::rng::{par_replicates, replicate_rng};
use rextree::harness::runner::{gnedin_ratio, pjs_path};
use rextree::harness::stats::{chi_square_samples, mean_stderr, median, retry_gate};
use rextree::paintbox::{kingman_cylinder_prob, kingman_sample, modified_paintbox_prob};
use rextree::spine::{renewal_moment, sample_reduced_crt, PositiveLaw};
use rextree::treemetric::{edge_convergence_experiment, scaling_exponent, TreeModel, TreeStatistic};

const SEED: u64 = 20_240_601;

/// Criteria that cannot be met as stated; they must still fail, so a fix
/// shows up here instead of going unnoticed.
const KNOWN_FAILURES: &[u32] = &[5];

type Outcome = Result<(bool, String), String>;

fn p(s: &str) -> Partition {
    s.parse().unwrap()
}

fn c1_paintbox_normalization() -> Outcome {
    let mut rng = replicate_rng(SEED, "acceptance-1", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let k = rng.random_range(1..=5);
        let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum::<f64>() / rng.random_range(0.5..1.0);
        w.iter_mut().for_each(|x| *x /= total);
        w.sort_by(|a, b| b.total_cmp(a));
        let s = MassPartition::new(w).map_err(|e| e.to_string())?;
        for n in 2..=8 {
            let sum: f64 = enumerate_partitions(n).unwrap().iter().map(|q| kingman_cylinder_prob(&s, q)).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |sum - 1| = {worst:.2e}")))
}

fn c2_modified_paintbox() -> Outcome {
    let s = MassPartition::new(vec![0.6, 0.4]).unwrap();
    let base = p("1|2");
    let mut expected = BTreeMap::new();
    for q in enumerate_partitions(4).unwrap() {
        if q.restrict(2).unwrap() == base {
            expected.insert(q.clone(), modified_paintbox_prob(&s, &base, &q).map_err(|e| e.to_string())?);
        }
    }
    // Independent oracle: unconditioned paintbox draws kept when they
    // restrict to the base.
    let gate = retry_gate(|a| {
        let mut rng = replicate_rng(SEED, "acceptance-2", a as u64);
        let mut kept = Vec::with_capacity(1_000_000);
        while kept.len() < 1_000_000 {
            let q = kingman_sample(&s, 4, &mut rng);
            if q.restrict(2)? == base {
                kept.push(q);
            }
        }
        Ok(chi_square_samples(kept, &expected)?.p_value)
    })
    .map_err(|e| e.to_string())?;
    Ok((gate.passed, format!("p-values {:?}", gate.p_values)))
}

fn c3_alphagamma_three() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (alpha, gamma) in [(0.5, 0.3), (0.8, 0.8), (0.3, 0.0)] {
        let d = 2.0 - alpha;
        let expected: BTreeMap<Partition, f64> = [
            (p("1 3|2"), (1.0 - alpha) / d),
            (p("1|2 3"), (1.0 - alpha) / d),
            (p("1 2|3"), gamma / d),
            (p("1|2|3"), (alpha - gamma) / d),
        ]
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .collect();
        let gate = retry_gate(|a| {
            let splits = par_replicates(SEED, &format!("acceptance-3-{alpha}-{gamma}-{a}"), 100_000, |_, rng| {
                grow_alphagamma(alpha, gamma, 3, rng).map(|t| t.root_split().unwrap())
            });
            let splits: Vec<Partition> = splits.into_iter().collect::<Result<_, _>>()?;
            Ok(chi_square_samples(splits, &expected)?.p_value)
        })
        .map_err(|e| e.to_string())?;
        ok &= gate.passed;
        details.push(format!("({alpha},{gamma}) p {:.3}", gate.p_values.last().unwrap()));
    }
    Ok((ok, details.join(", ")))
}

/// Mixes a tenth of point mass on the all-singletons split into `t`; the
/// result is still a restricted exchangeable probability table.
fn corrupt(t: &SplittingRuleTable) -> SplittingRuleTable {
    let mut c = t.clone();
    c.probs_mut().values_mut().for_each(|v| *v *= 0.9);
    *c.probs_mut().entry(Partition::singletons(t.n())).or_insert(0.0) += 0.1;
    c
}

fn c4_consistency() -> Outcome {
    let (mut worst, mut corrupted_min) = (0.0f64, f64::INFINITY);
    for i in 0..20 {
        let d: DiscreteDislocation = random_dislocation(&mut replicate_rng(SEED, "acceptance-4", i));
        for n in 2..=6 {
            worst = worst.max(consistency_residual(&d, n).map_err(|e| e.to_string())?);
            // Every normalised table at 3 restricts to the single split of [2].
            if n == 2 {
                continue;
            }
            let t = splitting_rule(&d, n).map_err(|e| e.to_string())?;
            let next = splitting_rule(&d, n + 1).map_err(|e| e.to_string())?;
            corrupted_min = corrupted_min.min(consistency_residual_tables(&t, &corrupt(&next)).map_err(|e| e.to_string())?);
        }
    }
    Ok((
        worst <= 1e-10 && corrupted_min >= 1e-3,
        format!("max residual {worst:.2e}, min corrupted residual {corrupted_min:.2e}"),
    ))
}

fn c5_sampling_dichotomy() -> Outcome {
    let pts = sampling_consistency_sweep(20, 0.02).map_err(|e| e.to_string())?;
    let on = pts
        .iter()
        .filter(|q| matches!(q.kind, CurveKind::Half | CurveKind::AlphaGamma))
        .map(|q| q.residual)
        .fold(0.0, f64::max);
    let off: Vec<f64> = pts.iter().filter(|q| q.kind == CurveKind::Off).map(|q| q.residual).collect();
    let below = off.iter().filter(|&&r| r < 1e-4).count();
    let min_off = off.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        on <= 1e-10 && below == 0,
        format!("on-curve max {on:.2e}; {below} of {} off-curve points below 1e-4, min {min_off:.2e}", off.len()),
    ))
}

fn gnedin_mean(law: PositiveLaw, tag: &str) -> Result<(f64, f64), String> {
    let n = 1_000_000;
    let r = par_replicates(SEED, tag, 200, |_, rng| gnedin_ratio(&law, &[1], n, rng));
    let r: Vec<f64> = r.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    Ok(mean_stderr(&r))
}

fn c6_gnedin() -> Outcome {
    let (light, _) = gnedin_mean(PositiveLaw::Exponential { rate: 1.0 }, "acceptance-6-exp")?;
    let (heavy, _) = gnedin_mean(PositiveLaw::Pareto { index: 0.1, scale: 1.0 }, "acceptance-6-pareto")?;
    Ok((
        (0.9..=1.1).contains(&light) && heavy <= 0.1,
        format!("Exp(1) {light:.3}, Pareto(0.1) {heavy:.3}"),
    ))
}

fn renewal_mean(law: PositiveLaw, t: f64, reps: u64, tag: &str) -> Result<f64, String> {
    let r = par_replicates(SEED, tag, reps, |_, rng| renewal_moment(|x| law.sample(x), t, 2, 1, rng).map(|e| e.mean));
    let r: Vec<f64> = r.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    Ok(mean_stderr(&r).0)
}

fn c7_renewal() -> Outcome {
    let exp = renewal_mean(PositiveLaw::Exponential { rate: 1.0 }, 100.0, 100_000, "acceptance-7-exp")?;
    let pareto = PositiveLaw::Pareto { index: 0.5, scale: 1.0 };
    let trend: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| renewal_mean(pareto, t, 20_000, &format!("acceptance-7-pareto-{t}")))
        .collect::<Result<_, _>>()?;
    let non_increasing = trend.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    Ok((
        (exp / 1.01 - 1.0).abs() <= 0.02 && non_increasing,
        format!("Exp(1) {exp:.4}, Pareto(0.5) {trend:.4?}"),
    ))
}

fn c8_pjs() -> Outcome {
    let n = 1_000_000;
    let r = par_replicates(SEED, "acceptance-8", 20, |_, rng| pjs_path(0.5, 5.0, n, rng));
    let r: Vec<(usize, f64, f64)> = r.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let errs: Vec<f64> = r.iter().map(|(_, k, l)| (k - l).abs() / l).collect();
    let m = median(&errs);
    Ok((m <= 0.15, format!("median relative error {m:.3}")))
}

fn c9_exponent() -> Outcome {
    let grid: Vec<usize> = (7..=13).map(|e| 1 << e).collect();
    let fit = scaling_exponent(&TreeModel::AlphaGamma { alpha: 0.5, gamma: 0.4 }, &grid, 2000, TreeStatistic::Height, SEED)
        .map_err(|e| e.to_string())?;
    Ok(((fit.slope - 0.4).abs() <= 0.08, format!("slope {:.3} +- {:.3}", fit.slope, fit.stderr)))
}

fn c10_reduced_tree() -> Outcome {
    let d = DiscreteDislocation::single_atom();
    let rows = edge_convergence_experiment(&TreeModel::Dislocation { model: d.clone() }, 2, &[1000], 10_000, SEED)
        .map_err(|e| e.to_string())?;
    let discrete = rows.iter().find(|r| r.edge == 1).ok_or("no root edge")?.mean;
    let crt = par_replicates(SEED, "acceptance-10", 10_000, |_, rng| sample_reduced_crt(&d, 2, 0.0, rng).map(|c| c.tree.edge_length(1)));
    let crt: Vec<f64> = crt.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (m, se) = mean_stderr(&crt);
    Ok(((discrete / m - 1.0).abs() <= 0.10, format!("discrete {discrete:.3}, continuum {m:.3} +- {se:.3}")))
}

fn c11_eppf_audit() -> Outcome {
    let (alpha, gamma) = (0.5, 0.3);
    let mut exact = true;
    let mut uniform_gap = true;
    let mut parts = Vec::new();
    for n in [3, 4] {
        let rows = alphagamma_eppf_audit(alpha, gamma, n).map_err(|e| e.to_string())?;
        let again = alphagamma_eppf_audit(alpha, gamma, n).map_err(|e| e.to_string())?;
        let gap = (1.0 - alpha) / (n as f64 - alpha);
        exact &= rows.iter().all(|r| (r.formula - r.oracle).abs() <= 1e-10);
        uniform_gap &= rows == again && rows.iter().all(|r| (r.formula - gap * r.oracle).abs() <= 1e-10);
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        parts.push(format!("n={n}: formula/oracle in [{lo:.6}, {hi:.6}], (1-a)/(n-a) = {gap:.6}"));
    }
    let verdict = if exact { "agreement" } else { "uniform normalization gap" };
    Ok((exact || uniform_gap, format!("{verdict}; {}", parts.join("; "))))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "paintbox normalization", c1_paintbox_normalization),
        (2, "modified paintbox vs rejection", c2_modified_paintbox),
        (3, "alpha-gamma n = 3 law", c3_alphagamma_three),
        (4, "consistency recursion", c4_consistency),
        (5, "sampling-consistency dichotomy", c5_sampling_dichotomy),
        (6, "Gnedin record limit", c6_gnedin),
        (7, "renewal moments", c7_renewal),
        (8, "distinct values along the spine", c8_pjs),
        (9, "height scaling exponent", c9_exponent),
        (10, "reduced-tree root edge", c10_reduced_tree),
        (11, "EPPF audit", c11_eppf_audit),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILURES.contains(&id);
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.1}s]{}",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            if known && !passed { " (known)" } else { "" }
        );
        if passed == known {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
