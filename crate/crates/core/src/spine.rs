//! Spinal subordinators, distinct-value counts along a spine, renewal
//! moments and the reduced continuum tree sampler.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::combinatorics::{MassPartition, Partition};
use crate::dislocation::DiscreteDislocation;
use crate::error::{Error, Result};
use crate::growth::{DislocationSplitter, MetricTree, SplitSampler};
use crate::paintbox::kingman_cylinder_prob;

/// Level below which `e^{-αξ}` counts as zero when an integral runs to
/// infinity.
pub const FUNCTIONAL_CUTOFF: f64 = 1e-8;

/// Upper limit on simulated time for unbounded spines.
pub const MAX_HORIZON: f64 = 1e6;

/// Lévy measure `Λ̄(x) = x^{-α}` for all `x > 0`, simulated from its
/// jumps of size at least `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub alpha: f64,
    pub delta: f64,
}

impl PowerTail {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::arg(format!("tail index {alpha} outside (0, 1)")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::arg(format!("truncation {delta} must be positive")));
        }
        Ok(PowerTail { alpha, delta })
    }

    /// Rate of the simulated jumps, `Λ̄(δ)`.
    pub fn rate(&self) -> f64 {
        self.delta.powf(-self.alpha)
    }

    /// `Λ̄(x)`.
    pub fn tail(&self, x: f64) -> f64 {
        x.powf(-self.alpha)
    }
}

/// A compound Poisson Lévy measure on `(0, ∞)` in `-log` mass units,
/// optionally with a truncated power-law part, plus a killing rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyAtoms {
    /// `(jump size, rate)` pairs with distinct sizes.
    pub jumps: Vec<(f64, f64)>,
    pub tail: Option<PowerTail>,
    pub killing_rate: f64,
}

impl LevyAtoms {
    pub fn new(jumps: Vec<(f64, f64)>, tail: Option<PowerTail>, killing_rate: f64) -> Result<Self> {
        for &(z, r) in &jumps {
            if !(z > 0.0 && z.is_finite() && r >= 0.0 && r.is_finite()) {
                return Err(Error::arg(format!("bad Lévy atom ({z}, {r})")));
            }
        }
        if !(killing_rate >= 0.0 && killing_rate.is_finite()) {
            return Err(Error::arg(format!("bad killing rate {killing_rate}")));
        }
        Ok(LevyAtoms {
            jumps,
            tail,
            killing_rate,
        })
    }

    /// Pure power-law measure without killing.
    pub fn power_law(alpha: f64, delta: f64) -> Result<Self> {
        Self::new(Vec::new(), Some(PowerTail::new(alpha, delta)?), 0.0)
    }

    /// Total jump rate of the simulated part.
    pub fn total_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.1).sum::<f64>() + self.tail.map_or(0.0, |t| t.rate())
    }

    /// `∫ z Λ(dz)` over the simulated part.
    pub fn mean_jump_rate(&self) -> f64 {
        let atoms: f64 = self.jumps.iter().map(|&(z, r)| z * r).sum();
        // ∫_δ^∞ x α x^{-α-1} dx diverges for α < 1.
        if self.tail.is_some() {
            f64::INFINITY
        } else {
            atoms
        }
    }

    fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.total_rate();
        let mut u = rng.random::<f64>() * total;
        for &(z, r) in &self.jumps {
            if u < r {
                return z;
            }
            u -= r;
        }
        match self.tail {
            Some(t) => t.delta * (1.0 - rng.random::<f64>()).powf(-1.0 / t.alpha),
            None => self.jumps.last().map_or(0.0, |j| j.0),
        }
    }
}

/// The spinal subordinator of the `k`-th embedded leaf, killed at the
/// branch point separating `[k]`: jumps `-log s_i` at rate
/// `Σ_{ℓ≥k} s_i^ℓ (1 − s_i) w_ℓ` and killing rate
/// `Σ_{ℓ<k} s_i^ℓ (1 − s_i) w_ℓ`, summed over all atoms.
pub fn spinal_levy_measure(d: &DiscreteDislocation, k: usize) -> Result<LevyAtoms> {
    if !d.conservative_mode() {
        return Err(Error::Unsupported("spinal subordinators need a model without dust or delta atoms".into()));
    }
    if k == 0 {
        return Err(Error::arg("k must be positive"));
    }
    let m = d.m_cap();
    let mut jumps: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut killing = 0.0;
    for level in 1..=m {
        for a in d.level(level) {
            for &s in a.s.atoms() {
                let (rate, kill) = if level < m {
                    let x = a.weight * s.powi(level as i32) * (1.0 - s);
                    if level >= k {
                        (x, 0.0)
                    } else {
                        (0.0, x)
                    }
                } else {
                    // Levels ℓ ≥ m share ν_m; the geometric sums close up.
                    let top = s.powi(k.max(m) as i32);
                    let below = if k > m { s.powi(m as i32) - top } else { 0.0 };
                    (a.weight * top, a.weight * below)
                };
                killing += kill;
                if rate > 0.0 {
                    let z = -s.ln();
                    let e = jumps.entry(z.to_bits()).or_insert((z, 0.0));
                    e.1 += rate;
                }
            }
        }
    }
    LevyAtoms::new(jumps.into_values().collect(), None, killing)
}

#[derive(Serialize, Deserialize)]
struct PathSpec {
    horizon: f64,
    times: Vec<f64>,
    jumps: Vec<f64>,
}

/// A finite-horizon subordinator path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathSpec", into = "PathSpec")]
pub struct SubordinatorPath {
    horizon: f64,
    times: Vec<f64>,
    jumps: Vec<f64>,
    /// `ξ` right after each jump.
    cumulative: Vec<f64>,
}

impl TryFrom<PathSpec> for SubordinatorPath {
    type Error = Error;
    fn try_from(p: PathSpec) -> Result<Self> {
        SubordinatorPath::new(p.horizon, p.times, p.jumps)
    }
}

impl From<SubordinatorPath> for PathSpec {
    fn from(p: SubordinatorPath) -> Self {
        PathSpec {
            horizon: p.horizon,
            times: p.times,
            jumps: p.jumps,
        }
    }
}

impl SubordinatorPath {
    pub fn new(horizon: f64, times: Vec<f64>, jumps: Vec<f64>) -> Result<Self> {
        if times.len() != jumps.len() || !(horizon >= 0.0) {
            return Err(Error::arg("path needs matching times and jumps and a non-negative horizon"));
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::arg("jump times must increase strictly"));
            }
        }
        if times.first().is_some_and(|&t| t < 0.0) || times.last().is_some_and(|&t| t > horizon) {
            return Err(Error::arg("jump times must lie in [0, horizon]"));
        }
        if jumps.iter().any(|&z| !(z >= 0.0)) {
            return Err(Error::arg("jumps must be non-negative"));
        }
        let mut acc = 0.0;
        let cumulative = jumps
            .iter()
            .map(|&z| {
                acc += z;
                acc
            })
            .collect();
        Ok(SubordinatorPath {
            horizon,
            times,
            jumps,
            cumulative,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Jump times, strictly increasing, in `[0, horizon]`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// `ξ(t)` for `t` up to the horizon.
    pub fn xi(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// `ξ` at the horizon.
    pub fn terminal(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `time,jump` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,jump\n");
        for (t, z) in self.times.iter().zip(&self.jumps) {
            s.push_str(&format!("{t},{z}\n"));
        }
        s
    }
}

/// Compound Poisson path on `[0, horizon]`.
pub fn simulate_subordinator<R: Rng + ?Sized>(l: &LevyAtoms, horizon: f64, rng: &mut R) -> Result<SubordinatorPath> {
    simulate_subordinator_until(l, horizon, f64::INFINITY, rng)
}

/// As [`simulate_subordinator`], stopping at the first jump taking `ξ` to
/// `xi_stop` or beyond; the returned horizon is then that jump time.
pub fn simulate_subordinator_until<R: Rng + ?Sized>(
    l: &LevyAtoms,
    horizon: f64,
    xi_stop: f64,
    rng: &mut R,
) -> Result<SubordinatorPath> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::arg(format!("horizon {horizon} must be finite and non-negative")));
    }
    let rate = l.total_rate();
    let (mut times, mut jumps) = (Vec::new(), Vec::new());
    let mut end = horizon;
    if rate > 0.0 {
        let gap = Exp::new(rate).map_err(|e| Error::Internal(e.to_string()))?;
        let mut t = 0.0;
        let mut xi = 0.0;
        loop {
            t += gap.sample(rng);
            if t > horizon {
                break;
            }
            let z = l.sample_jump(rng);
            // Coincident times are measure zero; nudging keeps times strict.
            if times.last().is_some_and(|&s: &f64| t <= s) {
                t = f64::from_bits(times.last().copied().unwrap_or(t).to_bits() + 1);
            }
            times.push(t);
            jumps.push(z);
            xi += z;
            if xi >= xi_stop {
                end = t;
                break;
            }
        }
    }
    SubordinatorPath::new(end, times, jumps)
}

/// Window `(τ, τ']` in spinal time with an initial offset `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnWindow {
    pub epsilon: f64,
    pub tau: f64,
    /// `f64::INFINITY` for an unbounded window.
    pub tau_prime: f64,
}

impl KnWindow {
    pub fn new(epsilon: f64, tau: f64, tau_prime: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && tau >= 0.0 && tau.is_finite() && tau_prime >= tau) {
            return Err(Error::arg(format!("bad window eps = {epsilon}, tau = {tau}, tau' = {tau_prime}")));
        }
        Ok(KnWindow {
            epsilon,
            tau,
            tau_prime,
        })
    }

    /// `(0, t]` with no offset.
    pub fn from_origin(t: f64) -> Result<Self> {
        Self::new(0.0, 0.0, t)
    }

    pub fn length(&self) -> f64 {
        self.tau_prime - self.tau
    }
}

fn check_horizon(path: &SubordinatorPath, w: &KnWindow) -> Result<()> {
    if w.length().is_finite() && path.horizon < w.length() {
        return Err(Error::arg(format!(
            "path horizon {} shorter than window length {}",
            path.horizon,
            w.length()
        )));
    }
    Ok(())
}

/// Draws `V₁, …, V_n` with `P(V > τ + v) = e^{-ε-ξ_v}` and counts the
/// distinct values in `(τ, τ']`.
///
/// Values `V > τ` sit on jump times of `ξ`; values beyond the path horizon
/// are dropped, which only matters for unbounded windows.
pub fn sample_kn<R: Rng + ?Sized>(path: &SubordinatorPath, w: &KnWindow, n: usize, rng: &mut R) -> Result<usize> {
    check_horizon(path, w)?;
    let window_end = w.length();
    let last = path.times.partition_point(|&t| t <= window_end);
    let mut hit = vec![false; last];
    let mut count = 0;
    for _ in 0..n {
        let u: f64 = 1.0 - rng.random::<f64>();
        let level = -u.ln() - w.epsilon;
        if level <= 0.0 {
            continue;
        }
        let j = path.cumulative.partition_point(|&x| x < level);
        if j < last && !hit[j] {
            hit[j] = true;
            count += 1;
        }
    }
    Ok(count)
}

/// Same as [`sample_kn`] but returns the running count after each of the
/// `n` draws, so counts for all sample sizes share one realisation.
pub fn sample_kn_sequence<R: Rng + ?Sized>(path: &SubordinatorPath, w: &KnWindow, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_horizon(path, w)?;
    let last = path.times.partition_point(|&t| t <= w.length());
    let mut hit = vec![false; last];
    let mut count = 0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = 1.0 - rng.random::<f64>();
        let level = -u.ln() - w.epsilon;
        if level > 0.0 {
            let j = path.cumulative.partition_point(|&x| x < level);
            if j < last && !hit[j] {
                hit[j] = true;
                count += 1;
            }
        }
        out.push(count);
    }
    Ok(out)
}

/// `∫₀^{τ'−τ} exp(−α(ε + ξ_v)) dv`, exact for the piecewise constant path;
/// unbounded windows stop at the horizon.
pub fn pjs_limit_functional(path: &SubordinatorPath, w: &KnWindow, alpha: f64) -> Result<f64> {
    check_horizon(path, w)?;
    let end = w.length().min(path.horizon);
    let mut total = 0.0;
    let mut t0 = 0.0;
    let mut xi = 0.0;
    for (&t, &z) in path.times.iter().zip(&path.jumps) {
        if t >= end {
            break;
        }
        total += (-alpha * (w.epsilon + xi)).exp() * (t - t0);
        t0 = t;
        xi += z;
    }
    total += (-alpha * (w.epsilon + xi)).exp() * (end - t0);
    Ok(total)
}

/// `K_n` normalised by `n^α Γ(1−α)` for a power-law tail.
pub fn normalized_kn(kn: usize, n: usize, alpha: f64) -> f64 {
    kn as f64 / ((n as f64).powf(alpha) * gamma(1.0 - alpha))
}

/// `A_α = 2 Σ_{j≥1} (j+1)^{√α} / (j(j+1))`.
pub fn a_alpha(alpha: f64) -> f64 {
    let e = alpha.sqrt() - 1.0;
    let terms = 100_000;
    let mut s = 0.0;
    for j in 1..=terms {
        let j = j as f64;
        s += (j + 1.0).powf(e) / j;
    }
    // Tail ∫_N^∞ x^{e-1} dx, the summand being ~ x^{e-1}.
    let n = terms as f64;
    2.0 * (s + n.powf(e) / (-e))
}

/// Outcome of the tail-bound experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n: usize,
    pub x: f64,
    pub p: f64,
    pub reps: usize,
    pub exceedances: usize,
    pub frequency: f64,
    /// `C_p / (x^p n^{αp−1})`, if a constant was supplied.
    pub bound: Option<f64>,
}

/// Monte Carlo frequency of `K_n / (n^α Γ(1−α)) > (1+x) Y(ε,τ,τ')` for a
/// pure power-law tail, where `Y = 1 + (1 + A_α) Σ_{j=0}^{⌊τ'−τ⌋} e^{−α(ε+ξ_j)}`
/// (the tail satisfies the scaling condition with `C_Λ = 1`, `ϱ = α`).
#[allow(clippy::too_many_arguments)]
pub fn pjs_tail_statistic<R: Rng + ?Sized>(
    l: &LevyAtoms,
    w: &KnWindow,
    n: usize,
    x: f64,
    p: f64,
    c_p: Option<f64>,
    reps: usize,
    rng: &mut R,
) -> Result<TailReport> {
    let tail = l.tail.ok_or_else(|| Error::arg("tail statistic needs a power-law tail"))?;
    if n < 2 || x < 1.0 {
        return Err(Error::arg("need n >= 2 and x >= 1"));
    }
    if !(p > 1.0 / tail.alpha) {
        return Err(Error::arg(format!("p = {p} must exceed 1/alpha")));
    }
    if !w.length().is_finite() {
        return Err(Error::arg("tail statistic needs a bounded window"));
    }
    let alpha = tail.alpha;
    let a = a_alpha(alpha);
    let mut exceed = 0;
    for _ in 0..reps {
        let path = simulate_subordinator(l, w.length(), rng)?;
        let kn = sample_kn(&path, w, n, rng)?;
        let steps = w.length().floor() as usize;
        let sum: f64 = (0..=steps).map(|j| (-alpha * (w.epsilon + path.xi(j as f64))).exp()).sum();
        let y = 1.0 + (1.0 + a) * sum;
        if normalized_kn(kn, n, alpha) > (1.0 + x) * y {
            exceed += 1;
        }
    }
    let bound = c_p.map(|c| c / (x.powf(p) * (n as f64).powf(alpha * p - 1.0)));
    Ok(TailReport {
        n,
        x,
        p,
        reps,
        exceedances: exceed,
        frequency: exceed as f64 / reps.max(1) as f64,
        bound,
    })
}

/// Constant `C_p` making the bound hold at the pilot point, using the
/// upper 95% "rule of three" when no exceedance was seen.
pub fn calibrate_cp(pilot: &TailReport, alpha: f64) -> f64 {
    let upper = if pilot.exceedances == 0 {
        3.0 / pilot.reps.max(1) as f64
    } else {
        pilot.frequency
    };
    upper * pilot.x.powf(pilot.p) * (pilot.n as f64).powf(alpha * pilot.p - 1.0)
}

/// Positive inter-arrival or log-ratio laws used by the renewal and
/// constrained paintbox experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PositiveLaw {
    Deterministic { value: f64 },
    Exponential { rate: f64 },
    /// `P(X > x) = (scale / x)^index` for `x ≥ scale`.
    Pareto { index: f64, scale: f64 },
}

impl PositiveLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PositiveLaw::Deterministic { value } => value > 0.0 && value.is_finite(),
            PositiveLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            PositiveLaw::Pareto { index, scale } => index > 0.0 && scale > 0.0 && index.is_finite() && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("bad law parameters {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            PositiveLaw::Deterministic { value } => value,
            PositiveLaw::Exponential { rate } => -(1.0 - rng.random::<f64>()).ln() / rate,
            PositiveLaw::Pareto { index, scale } => scale * (1.0 - rng.random::<f64>()).powf(-1.0 / index),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            PositiveLaw::Deterministic { value } => value,
            PositiveLaw::Exponential { rate } => 1.0 / rate,
            PositiveLaw::Pareto { index, scale } if index > 1.0 => index * scale / (index - 1.0),
            PositiveLaw::Pareto { .. } => f64::INFINITY,
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Estimates `E[(N_t / t)^p]` where `N_t` counts partial sums `≤ t`.
pub fn renewal_moment<R, F>(mut interarrival: F, t: f64, p: u32, reps: usize, rng: &mut R) -> Result<Estimate>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    if !(t > 0.0 && t.is_finite()) || p == 0 || reps == 0 {
        return Err(Error::arg("need t > 0, p >= 1 and reps >= 1"));
    }
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut sum = 0.0;
        let mut count = 0u64;
        loop {
            let x = interarrival(rng);
            if !(x > 0.0) {
                return Err(Error::arg(format!("inter-arrival {x} must be positive")));
            }
            sum += x;
            if sum > t {
                break;
            }
            count += 1;
        }
        values.push((count as f64 / t).powi(p as i32));
    }
    let (mean, stderr) = crate::harness::stats::mean_stderr(&values);
    Ok(Estimate { mean, stderr })
}

/// A sampled reduced continuum tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedCrt {
    pub tree: MetricTree,
    /// Set when an unbounded spine hit [`MAX_HORIZON`] before its
    /// integrand fell below [`FUNCTIONAL_CUTOFF`].
    pub horizon_capped: bool,
}

/// `∫₀^ζ e^{−αξ_t} dt` along a fresh spine with `k` marked leaves, `ζ` the
/// killing time (or infinity when the killing rate is zero). Returns the
/// length, `ξ(ζ−)` and whether the horizon cap was hit.
fn spine_segment<R: Rng + ?Sized>(d: &DiscreteDislocation, k: usize, alpha: f64, rng: &mut R) -> Result<(f64, f64, bool)> {
    let l = spinal_levy_measure(d, k)?;
    if l.killing_rate > 0.0 {
        let kill = Exp::new(l.killing_rate).map_err(|e| Error::Internal(e.to_string()))?.sample(rng);
        let path = simulate_subordinator(&l, kill, rng)?;
        let len = pjs_limit_functional(&path, &KnWindow::from_origin(kill)?, alpha)?;
        return Ok((len, path.terminal(), false));
    }
    if alpha <= 0.0 || l.total_rate() == 0.0 {
        return Ok((MAX_HORIZON, 0.0, true));
    }
    let stop = -FUNCTIONAL_CUTOFF.ln() / alpha;
    let path = simulate_subordinator_until(&l, MAX_HORIZON, stop, rng)?;
    let capped = path.terminal() < stop;
    let len = pjs_limit_functional(&path, &KnWindow::from_origin(f64::INFINITY)?, alpha)?;
    Ok((len, path.terminal(), capped))
}

/// Distinct atom indices for the blocks of `pi`, drawn with probability
/// `∝ Π_ℓ s_{i_ℓ}^{|π_ℓ|}`.
fn draw_block_atoms<R: Rng + ?Sized>(s: &MassPartition, pi: &Partition, rng: &mut R) -> Result<Vec<usize>> {
    let sizes = pi.block_sizes();
    let atoms = s.atoms();
    let mut tuples: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut current = Vec::with_capacity(sizes.len());
    fn rec(atoms: &[f64], sizes: &[usize], current: &mut Vec<usize>, w: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if current.len() == sizes.len() {
            out.push((current.clone(), w));
            return;
        }
        let size = sizes[current.len()] as i32;
        for i in 0..atoms.len() {
            if !current.contains(&i) {
                current.push(i);
                rec(atoms, sizes, current, w * atoms[i].powi(size), out);
                current.pop();
            }
        }
    }
    rec(atoms, &sizes, &mut current, 1.0, &mut tuples);
    let total: f64 = tuples.iter().map(|t| t.1).sum();
    if total <= 0.0 {
        return Err(Error::Model(format!("no atom assignment for {pi}")));
    }
    let mut u = rng.random::<f64>() * total;
    for (t, w) in &tuples {
        if u < *w {
            return Ok(t.clone());
        }
        u -= w;
    }
    Ok(tuples.last().expect("non-empty").0.clone())
}

/// `R(T; Σ₁, …, Σ_k)` for the self-similar tree with index `alpha` built
/// on `d`.
///
/// Each block `B` of marked leaves runs its own spine: lengths are
/// `M^α ∫₀^ζ e^{−αξ}` with `M` the subtree mass, the split at `ζ` follows
/// the splitting rule of `d` for `|B|`, and the child masses are
/// `M e^{−ξ(ζ)} s_i` for the atoms assigned to the child blocks.
pub fn sample_reduced_crt<R: Rng + ?Sized>(d: &DiscreteDislocation, k: usize, alpha: f64, rng: &mut R) -> Result<ReducedCrt> {
    if !d.conservative_mode() {
        return Err(Error::Unsupported("reduced continuum trees need a model without dust or delta atoms".into()));
    }
    if k == 0 {
        return Err(Error::arg("k must be positive"));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::arg(format!("self-similarity index {alpha} outside [0, 1)")));
    }
    let mut splitter = DislocationSplitter::new(d);
    let mut parent = vec![None];
    let mut len = vec![0.0];
    let mut lab = vec![None];
    let mut capped = false;
    // (parent vertex, marked labels, subtree mass)
    let mut stack: Vec<(usize, Vec<usize>, f64)> = vec![(0, (1..=k).collect(), 1.0)];
    while let Some((up, labels, mass)) = stack.pop() {
        let b = labels.len();
        let (seg, xi, cap) = spine_segment(d, b, alpha, rng)?;
        capped |= cap;
        let v = parent.len();
        parent.push(Some(up));
        len.push(mass.powf(alpha) * seg);
        if b == 1 {
            lab.push(Some(labels[0]));
            continue;
        }
        lab.push(None);
        let pi = splitter.sample_split(b, rng)?;
        let m = pi.restricted_class().ok_or_else(|| Error::Internal("trivial split".into()))?;
        let level = d.level(m.min(d.m_cap()));
        let weights: Vec<f64> = level.iter().map(|a| a.weight * kingman_cylinder_prob(&a.s, &pi)).collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Model(format!("split {pi} has no mass at level {m}")));
        }
        let mut u = rng.random::<f64>() * total;
        let mut chosen = level.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                chosen = i;
                break;
            }
            u -= w;
        }
        let s = &level[chosen].s;
        let idx = draw_block_atoms(s, &pi, rng)?;
        let base = mass * (-xi).exp();
        let children: Vec<(Vec<usize>, f64)> = pi
            .blocks()
            .iter()
            .zip(&idx)
            .map(|(blk, &i)| (blk.iter().map(|&x| labels[x - 1]).collect(), base * s.atoms()[i]))
            .collect();
        for (c, cm) in children.into_iter().rev() {
            stack.push((v, c, cm));
        }
    }
    Ok(ReducedCrt {
        tree: MetricTree::new(parent, len, lab)?,
        horizon_capped: capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dislocation::{rate_closed_form, random_dislocation, NuAtom};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_atom_spinal_measures() {
        let d = DiscreteDislocation::single_atom();
        let l1 = spinal_levy_measure(&d, 1).unwrap();
        assert_eq!(l1.killing_rate, 0.0);
        assert_eq!(l1.jumps.len(), 1);
        assert!((l1.jumps[0].0 - 2f64.ln()).abs() < 1e-15);
        assert!((l1.jumps[0].1 - 0.5).abs() < 1e-15);
        let l2 = spinal_levy_measure(&d, 2).unwrap();
        assert!((l2.killing_rate - 0.5).abs() < 1e-15);
        assert!(l2.jumps.is_empty());
    }

    #[test]
    fn killing_rate_is_the_split_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = random_dislocation(&mut rng);
            for k in 1..8 {
                let l = spinal_levy_measure(&d, k).unwrap();
                let lambda = if k == 1 { 0.0 } else { rate_closed_form(&d, k).unwrap() };
                assert!((l.killing_rate - lambda).abs() < 1e-12, "k = {k}");
            }
        }
    }

    #[test]
    fn non_conservative_models_are_rejected() {
        let d = DiscreteDislocation::new(1, vec![vec![]], vec![1.0], vec![], false).unwrap();
        assert!(matches!(spinal_levy_measure(&d, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_rate_path_is_flat() {
        let l = LevyAtoms::new(vec![(1.0, 0.0)], None, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = simulate_subordinator(&l, 10.0, &mut rng).unwrap();
        assert!(p.times.is_empty());
        assert_eq!(p.xi(5.0), 0.0);
    }

    #[test]
    fn functional_examples() {
        let flat = SubordinatorPath::new(3.0, vec![], vec![]).unwrap();
        let w = KnWindow::from_origin(3.0).unwrap();
        assert!((pjs_limit_functional(&flat, &w, 0.5).unwrap() - 3.0).abs() < 1e-15);
        let w2 = KnWindow::new(2f64.ln(), 0.0, 3.0).unwrap();
        assert!((pjs_limit_functional(&flat, &w2, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let one = SubordinatorPath::new(2.0, vec![1.0], vec![2f64.ln()]).unwrap();
        let w3 = KnWindow::from_origin(2.0).unwrap();
        assert!((pjs_limit_functional(&one, &w3, 1.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn kn_edge_cases() {
        let one = SubordinatorPath::new(2.0, vec![1.0], vec![2f64.ln()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = KnWindow::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(sample_kn(&one, &empty, 100, &mut rng).unwrap(), 0);
        let dead = KnWindow::new(f64::INFINITY, 0.0, 2.0).unwrap();
        assert_eq!(sample_kn(&one, &dead, 100, &mut rng).unwrap(), 0);
        let long = KnWindow::from_origin(5.0).unwrap();
        assert!(sample_kn(&one, &long, 1, &mut rng).is_err());
    }

    #[test]
    fn k2_single_jump_law() {
        // Each V lands on the jump with probability 1/2, so P(K₂ = 1) = 3/4.
        let one = SubordinatorPath::new(2.0, vec![1.0], vec![2f64.ln()]).unwrap();
        let w = KnWindow::new(0.0, 0.0, f64::INFINITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reps = 40_000;
        let ones = (0..reps).filter(|_| sample_kn(&one, &w, 2, &mut rng).unwrap() == 1).count();
        let f = ones as f64 / reps as f64;
        assert!((f - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / reps as f64).sqrt(), "{f}");
    }

    #[test]
    fn kn_sequence_is_monotone() {
        let l = LevyAtoms::power_law(0.5, 1e-4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = simulate_subordinator(&l, 5.0, &mut rng).unwrap();
        let seq = sample_kn_sequence(&p, &KnWindow::from_origin(5.0).unwrap(), 2000, &mut rng).unwrap();
        assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn deterministic_renewal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = renewal_moment(|_| 1.0, 7.5, 2, 10, &mut rng).unwrap();
        assert!((e.mean - (7.0f64 / 7.5).powi(2)).abs() < 1e-15);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn a_alpha_is_finite_and_decreasing_in_alpha() {
        let a1 = a_alpha(0.25);
        let a2 = a_alpha(0.5);
        assert!(a1.is_finite() && a2.is_finite() && a1 < a2);
    }

    #[test]
    fn reduced_crt_k2_is_a_cherry() {
        let d = DiscreteDislocation::single_atom();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let r = sample_reduced_crt(&d, 2, 0.0, &mut rng).unwrap();
            assert_eq!(r.tree.num_vertices(), 4);
            assert_eq!(r.tree.leaves().len(), 2);
        }
    }

    #[test]
    fn reduced_crt_leaf_edges_with_positive_index() {
        let d = DiscreteDislocation::conservative(
            1,
            vec![vec![NuAtom {
                s: MassPartition::new(vec![0.7, 0.3]).unwrap(),
                weight: 2.0,
            }]],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let r = sample_reduced_crt(&d, 3, 0.5, &mut rng).unwrap();
        assert!(!r.horizon_capped);
        assert_eq!(r.tree.leaves().len(), 3);
        assert!(r.tree.edge_lengths().iter().all(|&x| x > 0.0 && x.is_finite()));
    }
}
