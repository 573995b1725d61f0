//! Monte-Carlo calibration of the adaptation bandwidth.
//!
//! Homogeneous data `θ(·) ≡ θ` are simulated on a design, the smoother is run,
//! and for every iteration `k` and threshold `z` the exceedance frequency
//!
//! ```text
//! p̂(k, z) = #{i ∈ X⁰ : N̄_i^(k) KL(θ̃_i^(k), θ) > z} / n₀
//! ```
//!
//! is averaged over replications, where `X⁰` is the set of points whose final
//! neighbourhood is not clipped by the design boundary. The quantile surface
//! `𝔷(k, p) = inf{z : p̂(k, z) ≤ p}` must not increase in `k`; the smallest
//! `λ` with that property is `λ_opt`.
//!
//! Replication `r` draws its data from `rng::stream(seed, "phat", r)`, so
//! surfaces for different `θ` or `λ` with equal seeds share random numbers.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::design::{BandwidthSchedule, Design, KernelSpec};
use crate::families::{Family, DEFAULT_BOUNDARY_SHIFT};
use crate::math::{exp, ln, sample_sd, sqrt};
use crate::rng;
use crate::smoother::{Smoother, SmootherConfig, SmootherState};
use crate::{Error, Result};

/// Ascending, nonnegative thresholds `z`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZGrid {
    values: Vec<f64>,
}

impl ZGrid {
    pub fn geometric(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && points >= 2) {
            return Err(Error::InvalidArgument(
                "geometric z grid needs 0 < lo < hi and at least 2 points".into(),
            ));
        }
        Ok(ZGrid {
            values: geometric_points(lo, hi, points),
        })
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty()
            || values.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidArgument(
                "z grid must be nonempty, finite, nonnegative and strictly ascending".into(),
            ));
        }
        Ok(ZGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for ZGrid {
    /// 200 geometric points from `1e-3` to `50`.
    fn default() -> Self {
        ZGrid {
            values: geometric_points(1e-3, 50.0, 200),
        }
    }
}

fn geometric_points(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = ln(hi / lo) / (points - 1) as f64;
    let mut v: Vec<f64> = (0..points).map(|i| lo * exp(step * i as f64)).collect();
    v[0] = lo;
    v[points - 1] = hi;
    v
}

/// Everything a Monte-Carlo surface depends on except `θ` and `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSetup {
    pub family: Family,
    pub design: Design,
    pub schedule: BandwidthSchedule,
    pub loc_kernel: KernelSpec,
    pub ad_kernel: KernelSpec,
    pub reps: usize,
    pub seed: u64,
    pub z_grid: ZGrid,
    pub boundary_shift: f64,
}

impl CalibrationSetup {
    /// Default kernels and z grid.
    pub fn new(family: Family, design: Design, schedule: BandwidthSchedule, reps: usize, seed: u64) -> Self {
        CalibrationSetup {
            family,
            design,
            schedule,
            loc_kernel: KernelSpec::location_default(),
            ad_kernel: KernelSpec::adaptation_default(),
            reps,
            seed,
            z_grid: ZGrid::default(),
            boundary_shift: DEFAULT_BOUNDARY_SHIFT,
        }
    }

    fn smoother(&self, lambda: f64) -> Result<Smoother> {
        let cfg = SmootherConfig {
            family: self.family,
            lambda,
            schedule: self.schedule,
            loc_kernel: self.loc_kernel,
            ad_kernel: self.ad_kernel,
            projection: None,
            boundary_shift: self.boundary_shift,
        };
        Smoother::new(cfg, self.design)
    }

    /// The interior point set `X⁰`.
    pub fn interior(&self) -> Result<Vec<usize>> {
        self.design.interior(self.schedule.hmax())
    }

    /// Simulated statistics `T(Y)` of replication `rep`.
    pub fn replicate(&self, theta: f64, rep: usize) -> Result<Vec<f64>> {
        let mut r = rng::stream(self.seed, "phat", rep as u64);
        let ys = self.family.sample(theta, self.design.len(), &mut r)?;
        self.family.statistics(&ys)
    }
}

/// Per-replication exceedance counts, laid out `[rep][k][z]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExceedanceCounts {
    pub reps: usize,
    pub steps: usize,
    pub zs: usize,
    pub counts: Vec<u32>,
}

impl ExceedanceCounts {
    fn new(reps: usize, steps: usize, zs: usize) -> Self {
        ExceedanceCounts {
            reps,
            steps,
            zs,
            counts: vec![0; reps * steps * zs],
        }
    }

    #[inline]
    pub fn row(&self, rep: usize, k: usize) -> &[u32] {
        let start = (rep * self.steps + k) * self.zs;
        &self.counts[start..start + self.zs]
    }

    #[inline]
    fn row_mut(&mut self, rep: usize, k: usize) -> &mut [u32] {
        let start = (rep * self.steps + k) * self.zs;
        &mut self.counts[start..start + self.zs]
    }

    /// `p̂` averaged over the listed replications.
    fn surface(&self, reps: &[usize], n0: usize) -> Vec<Vec<f64>> {
        let denom = (reps.len() * n0) as f64;
        (0..self.steps)
            .map(|k| {
                let mut acc = vec![0u64; self.zs];
                for &r in reps {
                    for (a, &c) in acc.iter_mut().zip(self.row(r, k)) {
                        *a += u64::from(c);
                    }
                }
                acc.into_iter().map(|a| a as f64 / denom).collect()
            })
            .collect()
    }
}

/// Which estimator a surface or isoline belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Estimator {
    Adaptive,
    Nonadaptive,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Adaptive => "adaptive",
            Estimator::Nonadaptive => "nonadaptive",
        }
    }
}

/// Monte-Carlo exceedance surfaces of the adaptive and the non-adaptive
/// estimator, computed on the same simulated data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropagationCurve {
    pub lambda: f64,
    pub theta: f64,
    pub family: String,
    pub z_grid: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub reps: usize,
    pub n0: usize,
    pub design: Design,
    pub seed: u64,
    /// `p̂(k, z)` indexed `[k][z]`.
    pub phat: Vec<Vec<f64>>,
    pub phat_nonadaptive: Vec<Vec<f64>>,
    pub counts: ExceedanceCounts,
    pub counts_nonadaptive: ExceedanceCounts,
}

/// A quantile read off a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quantile {
    pub z: f64,
    /// Set when `p` is below the Monte-Carlo resolution or the quantile lies
    /// beyond the z grid.
    pub flagged: bool,
}

impl PropagationCurve {
    pub fn kstar(&self) -> usize {
        self.phat.len() - 1
    }

    /// `1 / (reps · n₀)`.
    pub fn resolution(&self) -> f64 {
        1.0 / (self.reps * self.n0) as f64
    }

    pub fn surface(&self, est: Estimator) -> &[Vec<f64>] {
        match est {
            Estimator::Adaptive => &self.phat,
            Estimator::Nonadaptive => &self.phat_nonadaptive,
        }
    }

    fn counts_of(&self, est: Estimator) -> &ExceedanceCounts {
        match est {
            Estimator::Adaptive => &self.counts,
            Estimator::Nonadaptive => &self.counts_nonadaptive,
        }
    }

    /// Monte-Carlo standard error of `p̂(k, z_l)` from the spread of the
    /// per-replication frequencies.
    pub fn standard_error(&self, est: Estimator, k: usize, l: usize) -> f64 {
        let c = self.counts_of(est);
        let n0 = self.n0 as f64;
        let per_rep: Vec<f64> = (0..self.reps).map(|r| f64::from(c.row(r, k)[l]) / n0).collect();
        sample_sd(&per_rep) / sqrt(self.reps as f64)
    }

    /// `𝔷(k, p)` of one estimator.
    pub fn z_quantile(&self, est: Estimator, k: usize, p: f64) -> Result<Quantile> {
        if k > self.kstar() {
            return Err(Error::StepOutOfRange { k, kstar: self.kstar() });
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidArgument("p must lie in (0, 1]".into()));
        }
        let q = quantile_of_row(&self.z_grid, &self.surface(est)[k], p);
        Ok(Quantile {
            z: q.z,
            flagged: q.flagged || p < self.resolution(),
        })
    }

    /// Same counts (and therefore the same surfaces) as `other`.
    pub fn same_surface(&self, other: &PropagationCurve) -> bool {
        self.counts == other.counts
            && self.counts_nonadaptive == other.counts_nonadaptive
            && self.z_grid == other.z_grid
    }
}

fn quantile_of_row(z: &[f64], row: &[f64], p: f64) -> Quantile {
    let l = row.partition_point(|&v| v > p);
    if l == 0 {
        return Quantile { z: z[0], flagged: false };
    }
    if l == row.len() {
        return Quantile {
            z: z[z.len() - 1],
            flagged: true,
        };
    }
    let (z0, z1) = (z[l - 1], z[l]);
    let (p0, p1) = (row[l - 1], row[l]);
    let frac = (p0 - p) / (p0 - p1);
    let zq = if z0 > 0.0 {
        exp(ln(z0) + (ln(z1) - ln(z0)) * frac)
    } else {
        z0 + (z1 - z0) * frac
    };
    Quantile { z: zq, flagged: false }
}

/// Add one replication's exceedances to `row` (`row[l]` counts values `> z_l`).
fn accumulate(z: &[f64], values: impl Iterator<Item = f64>, hist: &mut [u32], row: &mut [u32]) {
    hist.iter_mut().for_each(|h| *h = 0);
    for v in values {
        hist[z.partition_point(|&zl| zl < v)] += 1;
    }
    // row[l] = #{v : idx(v) > l}
    let mut above = 0u32;
    for l in (0..z.len()).rev() {
        above += hist[l + 1];
        row[l] = above;
    }
}

fn scaled_kl<'a>(
    family: Family,
    state: &'a SmootherState,
    interior: &'a [usize],
    theta: f64,
) -> impl Iterator<Item = f64> + 'a {
    interior
        .iter()
        .map(move |&i| state.n_bar[i] * family.kl_unchecked(state.theta_tilde[i], theta))
}

fn check_theta(family: &Family, theta: f64) -> Result<()> {
    if family.domain().contains(theta) {
        Ok(())
    } else {
        Err(Error::Domain {
            family: family.name(),
            value: theta,
            domain: family.domain().describe(),
        })
    }
}

fn simulate_counts(setup: &CalibrationSetup, theta: f64, lambda: f64, interior: &[usize]) -> Result<ExceedanceCounts> {
    let smoother = setup.smoother(lambda)?;
    let z = setup.z_grid.values();
    let steps = setup.schedule.kstar + 1;
    let mut counts = ExceedanceCounts::new(setup.reps, steps, z.len());
    let mut hist = vec![0u32; z.len() + 1];
    for rep in 0..setup.reps {
        let stats = setup.replicate(theta, rep)?;
        smoother.run_with_observer(&stats, |state| {
            let vals = scaled_kl(setup.family, state, interior, theta);
            accumulate(z, vals, &mut hist, counts.row_mut(rep, state.k));
        })?;
    }
    Ok(counts)
}

fn assemble(
    setup: &CalibrationSetup,
    theta: f64,
    lambda: f64,
    n0: usize,
    counts: ExceedanceCounts,
    counts_nonadaptive: ExceedanceCounts,
) -> PropagationCurve {
    let all: Vec<usize> = (0..setup.reps).collect();
    PropagationCurve {
        lambda,
        theta,
        family: setup.family.name().into(),
        z_grid: setup.z_grid.values().to_vec(),
        bandwidths: setup.schedule.bandwidths(),
        reps: setup.reps,
        n0,
        design: setup.design,
        seed: setup.seed,
        phat: counts.surface(&all, n0),
        phat_nonadaptive: counts_nonadaptive.surface(&all, n0),
        counts,
        counts_nonadaptive,
    }
}

fn validate_setup(setup: &CalibrationSetup, theta: f64) -> Result<Vec<usize>> {
    check_theta(&setup.family, theta)?;
    if setup.reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    setup.interior()
}

/// Exceedance surfaces for homogeneous data with parameter `theta`.
pub fn phat_surface(setup: &CalibrationSetup, theta: f64, lambda: f64) -> Result<PropagationCurve> {
    let interior = validate_setup(setup, theta)?;
    let nonadaptive = simulate_counts(setup, theta, f64::INFINITY, &interior)?;
    let adaptive = if lambda == f64::INFINITY {
        nonadaptive.clone()
    } else {
        simulate_counts(setup, theta, lambda, &interior)?
    };
    Ok(assemble(setup, theta, lambda, interior.len(), adaptive, nonadaptive))
}

/// Options of the monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckOptions {
    /// Smallest probability checked.
    pub epsilon: f64,
    /// Number of geometric p levels between `max(ε, resolution)` and 0.5.
    pub p_points: usize,
    /// Bootstrap resamples of the replications.
    pub bootstrap: usize,
    /// Multiple of the bootstrap standard error allowed as slack.
    pub se_multiplier: f64,
}

impl CheckOptions {
    pub fn new(epsilon: f64) -> Self {
        CheckOptions {
            epsilon,
            p_points: 16,
            bootstrap: 64,
            se_multiplier: 2.0,
        }
    }
}

/// An increase of `𝔷(·, p)` from step `k` to `k + 1` beyond the slack.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub k: usize,
    pub p: f64,
    pub dz: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropagationCheck {
    pub holds: bool,
    pub p_grid: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl PropagationCheck {
    /// Smallest level `p` of the grid such that no violation occurs at any
    /// `p' ≥ p`; `None` if the largest level already fails.
    pub fn epsilon_level(&self) -> Option<f64> {
        let mut best = None;
        for &p in self.p_grid.iter().rev() {
            if self.violations.iter().any(|v| v.p == p) {
                break;
            }
            best = Some(p);
        }
        best
    }
}

/// Check that `𝔷(k + 1, p) ≤ 𝔷(k, p) + slack` on a p grid.
///
/// The slack is `se_multiplier` bootstrap standard errors of the increment
/// plus any increase of the non-adaptive quantile at the same `(k, p)`; the
/// non-adaptive quantile itself is not monotone for every kernel and
/// schedule.
pub fn check_propagation(curve: &PropagationCurve, opts: &CheckOptions) -> Result<PropagationCheck> {
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    let p_lo = opts.epsilon.max(curve.resolution());
    let p_grid = if p_lo >= 0.5 || opts.p_points < 2 {
        vec![0.5]
    } else {
        geometric_points(p_lo, 0.5, opts.p_points)
    };
    let kstar = curve.kstar();
    let z = &curve.z_grid;
    let quant = |surface: &[Vec<f64>], k: usize, p: f64| quantile_of_row(z, &surface[k], p).z;

    // bootstrap increments [b][k][p]
    let mut boot: Vec<Vec<Vec<f64>>> = Vec::with_capacity(opts.bootstrap);
    let mut r = rng::stream(curve.seed, "bootstrap", 0);
    let mut idx = vec![0usize; curve.reps];
    for _ in 0..opts.bootstrap {
        for slot in idx.iter_mut() {
            *slot = r.random_range(0..curve.reps);
        }
        let s = curve.counts.surface(&idx, curve.n0);
        boot.push(
            (0..kstar)
                .map(|k| p_grid.iter().map(|&p| quant(&s, k + 1, p) - quant(&s, k, p)).collect())
                .collect(),
        );
    }

    let mut violations = Vec::new();
    for k in 0..kstar {
        for (pi, &p) in p_grid.iter().enumerate() {
            let dz = quant(&curve.phat, k + 1, p) - quant(&curve.phat, k, p);
            let dn = quant(&curve.phat_nonadaptive, k + 1, p) - quant(&curve.phat_nonadaptive, k, p);
            let draws: Vec<f64> = boot.iter().map(|b| b[k][pi]).collect();
            let slack = opts.se_multiplier * sample_sd(&draws) + dn.max(0.0);
            if dz > slack {
                violations.push(Violation { k, p, dz, slack });
            }
        }
    }
    Ok(PropagationCheck {
        holds: violations.is_empty(),
        p_grid,
        violations,
    })
}

/// One probe of the bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Probe {
    pub lambda: f64,
    pub holds: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaCalibration {
    pub lambda_opt: f64,
    pub thetas: Vec<f64>,
    pub epsilon: f64,
    pub probes: Vec<Probe>,
}

/// Smallest `λ` (to 1% relative width) whose surfaces pass
/// [`check_propagation`] for every `θ*` in `thetas`.
///
/// The check must fail at `bracket.0` and pass at `bracket.1`. All probes
/// reuse the same simulated data.
pub fn calibrate_lambda(
    setup: &CalibrationSetup,
    thetas: &[f64],
    opts: &CheckOptions,
    bracket: (f64, f64),
) -> Result<LambdaCalibration> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: "need 0 < lo < hi",
        });
    }
    if thetas.is_empty() {
        return Err(Error::InvalidArgument("at least one theta is required".into()));
    }
    let mut cached = Vec::with_capacity(thetas.len());
    let mut n0 = 0;
    let mut interior = Vec::new();
    for &theta in thetas {
        interior = validate_setup(setup, theta)?;
        n0 = interior.len();
        cached.push(simulate_counts(setup, theta, f64::INFINITY, &interior)?);
    }
    let mut probes = Vec::new();
    let mut probe = |lambda: f64| -> Result<bool> {
        let mut holds = true;
        let mut count = 0;
        for (&theta, nonadaptive) in thetas.iter().zip(&cached) {
            let adaptive = simulate_counts(setup, theta, lambda, &interior)?;
            let curve = assemble(setup, theta, lambda, n0, adaptive, nonadaptive.clone());
            let check = check_propagation(&curve, opts)?;
            count += check.violations.len();
            holds &= check.holds;
        }
        probes.push(Probe {
            lambda,
            holds,
            violations: count,
        });
        Ok(holds)
    };
    if probe(lo)? {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: "check already passes at the lower end",
        });
    }
    if !probe(hi)? {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: "check fails at the upper end",
        });
    }
    while hi / lo > 1.01 {
        let mid = sqrt(lo * hi);
        if probe(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaCalibration {
        lambda_opt: hi,
        thetas: thetas.to_vec(),
        epsilon: opts.epsilon,
        probes,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvarianceReport {
    pub thetas: Vec<f64>,
    pub lambda: f64,
    /// `max |p̂_θ - p̂_θ'|` over pairs, steps and thresholds (adaptive).
    pub max_discrepancy: f64,
    /// Whether all exceedance counts agree exactly.
    pub identical: bool,
    pub curves: Vec<PropagationCurve>,
}

/// Surfaces for several `θ` on common random numbers.
pub fn invariance_report(setup: &CalibrationSetup, thetas: &[f64], lambda: f64) -> Result<InvarianceReport> {
    let curves = thetas
        .iter()
        .map(|&t| phat_surface(setup, t, lambda))
        .collect::<Result<Vec<_>>>()?;
    let mut max_discrepancy: f64 = 0.0;
    let mut identical = true;
    for (a, ca) in curves.iter().enumerate() {
        for cb in &curves[a + 1..] {
            identical &= ca.same_surface(cb);
            for (ra, rb) in ca.phat.iter().zip(&cb.phat) {
                for (x, y) in ra.iter().zip(rb) {
                    max_discrepancy = max_discrepancy.max((x - y).abs());
                }
            }
        }
    }
    Ok(InvarianceReport {
        thetas: thetas.to_vec(),
        lambda,
        max_discrepancy,
        identical,
        curves,
    })
}

/// One point of an isoline `z = 𝔷(k, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IsolineRow {
    pub k: usize,
    pub h: f64,
    pub p: f64,
    pub z: f64,
    pub estimator: Estimator,
    pub flagged: bool,
}

/// Isolines of both estimators, ordered by `p`, then estimator, then `k`.
pub fn emit_isolines(curve: &PropagationCurve, p_levels: &[f64]) -> Result<Vec<IsolineRow>> {
    let mut rows = Vec::new();
    for &p in p_levels {
        for est in [Estimator::Adaptive, Estimator::Nonadaptive] {
            for k in 0..=curve.kstar() {
                let q = curve.z_quantile(est, k, p)?;
                rows.push(IsolineRow {
                    k,
                    h: curve.bandwidths[k],
                    p,
                    z: q.z,
                    estimator: est,
                    flagged: q.flagged,
                });
            }
        }
    }
    Ok(rows)
}
