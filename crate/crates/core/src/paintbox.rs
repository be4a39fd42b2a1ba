//! Kingman's paintbox, the paintbox conditioned on a cylinder set, and
//! Gnedin's record-constrained paintbox.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{MassPartition, Partition, WEIGHT_TOL};
use crate::error::{Error, Result};

/// Attempts allowed to [`modified_paintbox_sample`] before giving up.
pub const REJECTION_BUDGET: u64 = 10_000_000;

/// Draws the value partition of `n` i.i.d. paintbox labels: label `i` with
/// probability `s_i`, or a fresh dust label (a singleton) with probability
/// `s₀`.
pub fn kingman_sample<R: Rng + ?Sized>(s: &MassPartition, n: usize, rng: &mut R) -> Partition {
    let labels: Vec<i64> = (1..=n).map(|r| paint(s, r, rng)).collect();
    Partition::from_values(&labels).expect("n >= 1")
}

fn paint<R: Rng + ?Sized>(s: &MassPartition, r: usize, rng: &mut R) -> i64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &si) in s.atoms().iter().enumerate() {
        acc += si;
        if u < acc {
            return i as i64 + 1;
        }
    }
    if s.dust() > 0.0 {
        -(r as i64)
    } else {
        // Rounding put u above the last partial sum of a conservative s.
        s.atoms().len() as i64
    }
}

/// Exact probability that [`kingman_sample`] returns `p`.
///
/// Sums over tuples of distinct atom indices, one per block, where a
/// singleton block may instead take the dust with weight `s₀`.
pub fn kingman_cylinder_prob(s: &MassPartition, p: &Partition) -> f64 {
    let sizes = p.block_sizes();
    let mut used = vec![false; s.len()];
    assign(s.atoms(), s.dust(), &sizes, 0, &mut used)
}

fn assign(atoms: &[f64], dust: f64, sizes: &[usize], b: usize, used: &mut [bool]) -> f64 {
    if b == sizes.len() {
        return 1.0;
    }
    let size = sizes[b];
    let mut total = 0.0;
    if size == 1 && dust > 0.0 {
        total += dust * assign(atoms, dust, sizes, b + 1, used);
    }
    // Blocks left to place with distinct atoms cannot exceed the unused atoms.
    for i in 0..atoms.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let rest = assign(atoms, dust, sizes, b + 1, used);
        used[i] = false;
        if rest > 0.0 {
            total += atoms[i].powi(size as i32) * rest;
        }
    }
    total
}

/// Checks the non-degenerate admissibility condition for conditioning on
/// the cylinder of `base`.
fn check_non_degenerate(s: &MassPartition, base: &Partition) -> Result<()> {
    let m = s.len();
    let k = base.num_blocks();
    let l = base.blocks().iter().filter(|b| b.len() >= 2).count();
    let ok = if s.dust() > 0.0 { m >= l } else { m >= k };
    if ok {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "degenerate paintbox conditioning: {m} atoms, dust {}, base {base}",
            s.dust()
        )))
    }
}

/// `κ_s^π(P^{π′})`: the paintbox law conditioned on the cylinder of `base`,
/// evaluated at the cylinder of `target`.
pub fn modified_paintbox_prob(s: &MassPartition, base: &Partition, target: &Partition) -> Result<f64> {
    if target.n() < base.n() || &target.restrict(base.n())? != base {
        return Err(Error::arg(format!("{target} does not restrict to {base}")));
    }
    check_non_degenerate(s, base)?;
    let z = kingman_cylinder_prob(s, base);
    if z <= 0.0 {
        return Err(Error::Internal(format!("zero normalization for {base}")));
    }
    Ok(kingman_cylinder_prob(s, target) / z)
}

/// Samples the conditioned paintbox on `[n]` by rejection.
pub fn modified_paintbox_sample<R: Rng + ?Sized>(
    s: &MassPartition,
    base: &Partition,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    if n < base.n() {
        return Err(Error::arg(format!("n = {n} below base size {}", base.n())));
    }
    check_non_degenerate(s, base)?;
    if kingman_cylinder_prob(s, base) <= WEIGHT_TOL * WEIGHT_TOL {
        return Err(Error::arg(format!("cylinder of {base} has probability 0")));
    }
    for _ in 0..REJECTION_BUDGET {
        let p = kingman_sample(s, n, rng);
        if &p.restrict(base.n())? == base {
            return Ok(p);
        }
    }
    Err(Error::Resource(format!(
        "rejection budget of {REJECTION_BUDGET} exhausted"
    )))
}

/// State of a constrained paintbox run after some number of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedState {
    /// The modified sequence; empty unless a trace was requested.
    pub modified_values: Vec<f64>,
    /// Records that reached their full multiplicity.
    pub k: usize,
    /// Repeats of the record currently being built.
    pub r: usize,
    /// Records attained so far, `k + 1{r > 0}`.
    pub j: usize,
}

/// Runs Gnedin's constrained paintbox for `n` steps with lower records
/// `G_k = Y₁⋯Y_k` repeated `psi[k-1]` times; the last entry of `psi`
/// repeats forever.
///
/// Returns `J_n` and the final state, whose `modified_values` is filled only
/// when `keep_trace` is set.
pub fn gnedin_constrained_run<R, F>(
    mut y_sampler: F,
    psi: &[usize],
    n: usize,
    keep_trace: bool,
    rng: &mut R,
) -> Result<(usize, ConstrainedState)>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    if psi.is_empty() || psi.contains(&0) {
        return Err(Error::arg("psi must be a non-empty sequence of positive integers"));
    }
    let psi_at = |k: usize| psi[(k - 1).min(psi.len() - 1)];
    if n < psi[0] {
        return Err(Error::arg(format!("n = {n} below psi_1 = {}", psi[0])));
    }
    let mut draw_y = |rng: &mut R| -> Result<f64> {
        let y = y_sampler(rng);
        if !(0.0..1.0).contains(&y) {
            return Err(Error::arg(format!("Y = {y} outside [0, 1)")));
        }
        Ok(y)
    };
    let mut values = Vec::new();
    let g1 = draw_y(rng)?;
    if keep_trace {
        values.extend(std::iter::repeat_n(g1, psi[0]));
    }
    // G_k is the current completed record; the next one is drawn on demand.
    let mut g_k = g1;
    let mut g_next: Option<f64> = None;
    let (mut k, mut r) = (1usize, 0usize);
    for _ in psi[0]..n {
        let u: f64 = rng.random();
        if u >= g_k {
            if keep_trace {
                values.push(u);
            }
            continue;
        }
        let g = match g_next {
            Some(g) => g,
            None => {
                let g = g_k * draw_y(rng)?;
                g_next = Some(g);
                g
            }
        };
        if keep_trace {
            values.push(g);
        }
        if r + 2 <= psi_at(k + 1) {
            r += 1;
        } else {
            k += 1;
            r = 0;
            g_k = g;
            g_next = None;
        }
    }
    let j = k + usize::from(r > 0);
    Ok((
        j,
        ConstrainedState {
            modified_values: values,
            k,
            r,
            j,
        },
    ))
}
