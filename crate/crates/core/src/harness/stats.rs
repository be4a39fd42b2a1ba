//! Pearson goodness-of-fit with pooling of sparse cells.

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Acceptance threshold for Monte Carlo goodness-of-fit gates.
pub const GATE_P_VALUE: f64 = 1e-3;

/// Attempts a gate gets, each with a freshly derived seed.
pub const GATE_ATTEMPTS: u32 = 3;

/// Smallest expected count a cell may keep before it is pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub categories: Vec<String>,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson test of `observed` counts against the probabilities `expected`.
///
/// Cells with expected count below five are pooled into one cell; if that
/// pool is still too small it joins the smallest retained cell. Observed
/// mass on a zero-probability cell gives `p = 0`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquareReport> {
    let labels = (0..observed.len()).map(|i| i.to_string()).collect();
    chi_square_labelled(labels, observed, expected)
}

fn chi_square_labelled(labels: Vec<String>, observed: &[u64], expected: &[f64]) -> Result<ChiSquareReport> {
    if observed.len() != expected.len() {
        return Err(Error::arg(format!(
            "{} observed cells but {} expected",
            observed.len(),
            expected.len()
        )));
    }
    let total: u64 = observed.iter().sum();
    if total < 100 {
        return Err(Error::arg(format!("need at least 100 observations, got {total}")));
    }
    let mass: f64 = expected.iter().sum();
    if !(mass > 0.0) || expected.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(Error::arg("expected probabilities must be non-negative with positive sum"));
    }
    let t = total as f64;
    let mut cats: Vec<String> = Vec::new();
    let mut obs: Vec<u64> = Vec::new();
    let mut exp: Vec<f64> = Vec::new();
    let (mut pool_o, mut pool_e, mut impossible) = (0u64, 0.0f64, false);
    let mut pooled_names = Vec::new();
    for ((label, &o), &e) in labels.into_iter().zip(observed).zip(expected) {
        let e = e / mass * t;
        if e == 0.0 {
            impossible |= o > 0;
            continue;
        }
        if e >= MIN_EXPECTED {
            cats.push(label);
            obs.push(o);
            exp.push(e);
        } else {
            pooled_names.push(label);
            pool_o += o;
            pool_e += e;
        }
    }
    if pool_e > 0.0 {
        if pool_e >= MIN_EXPECTED || exp.is_empty() {
            cats.push(format!("pooled[{}]", pooled_names.join(";")));
            obs.push(pool_o);
            exp.push(pool_e);
        } else {
            let i = (0..exp.len())
                .min_by(|&a, &b| exp[a].total_cmp(&exp[b]))
                .expect("non-empty");
            cats[i] = format!("{}+pooled[{}]", cats[i], pooled_names.join(";"));
            obs[i] += pool_o;
            exp[i] += pool_e;
        }
    }
    let statistic: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = exp.len().saturating_sub(1);
    let p_value = if impossible {
        0.0
    } else if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| Error::Internal(e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquareReport {
        categories: cats,
        observed: obs,
        expected: exp,
        statistic: if impossible { f64::INFINITY } else { statistic },
        degrees_of_freedom: df,
        p_value,
    })
}

/// Tabulates `samples` and tests them against the law `expected`; sampled
/// keys missing from `expected` have probability zero.
pub fn chi_square_samples<K, I>(samples: I, expected: &BTreeMap<K, f64>) -> Result<ChiSquareReport>
where
    K: Ord + Clone + Debug,
    I: IntoIterator<Item = K>,
{
    let mut counts: BTreeMap<K, u64> = expected.keys().map(|k| (k.clone(), 0)).collect();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    let labels = counts.keys().map(|k| format!("{k:?}")).collect();
    let observed: Vec<u64> = counts.values().copied().collect();
    let exp: Vec<f64> = counts
        .keys()
        .map(|k| expected.get(k).copied().unwrap_or(0.0))
        .collect();
    chi_square_labelled(labels, &observed, &exp)
}

/// Outcome of a gate that may be retried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub passed: bool,
    pub p_values: Vec<f64>,
}

/// Runs `attempt(0)`, `attempt(1)`, ... until a p-value exceeds
/// [`GATE_P_VALUE`] or [`GATE_ATTEMPTS`] attempts fail. Callers derive a
/// fresh seed from the attempt number.
pub fn retry_gate<F>(mut attempt: F) -> Result<GateOutcome>
where
    F: FnMut(u32) -> Result<f64>,
{
    let mut p_values = Vec::new();
    for a in 0..GATE_ATTEMPTS {
        let p = attempt(a)?;
        p_values.push(p);
        if p > GATE_P_VALUE {
            return Ok(GateOutcome { passed: true, p_values });
        }
    }
    Ok(GateOutcome { passed: false, p_values })
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Median of a non-empty slice; NaNs sort last.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_counts_give_p_one() {
        let r = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concentrated_counts_are_rejected() {
        let r = chi_square_gof(&[100, 0, 0, 0], &[0.25; 4]).unwrap();
        assert!((r.statistic - 300.0).abs() < 1e-9);
        assert_eq!(r.degrees_of_freedom, 3);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn argument_errors() {
        assert!(chi_square_gof(&[100, 0], &[1.0]).is_err());
        assert!(chi_square_gof(&[10, 10], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn sparse_cells_are_pooled() {
        let r = chi_square_gof(&[990, 5, 5], &[0.99, 0.005, 0.005]).unwrap();
        assert!(r.expected.iter().all(|&e| e >= 5.0));
        assert_eq!(r.observed.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn impossible_outcome_gives_zero() {
        let r = chi_square_gof(&[99, 1], &[1.0, 0.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn retry_gate_stops_on_success() {
        let mut calls = 0;
        let g = retry_gate(|a| {
            calls += 1;
            Ok(if a == 1 { 0.5 } else { 0.0 })
        })
        .unwrap();
        assert!(g.passed);
        assert_eq!(calls, 2);
        assert!(!retry_gate(|_| Ok(0.0)).unwrap().passed);
    }
}
