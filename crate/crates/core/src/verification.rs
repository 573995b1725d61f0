//! Empirical checks of the exponential bound, the triangle-type inequality
//! for the divergence, separation, propagation under local homogeneity and
//! stability.
//!
//! Deterministic implications are checked exactly (zero violations allowed);
//! probability bounds are checked with a slack of three Monte-Carlo standard
//! errors.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::design::{BandwidthSchedule, Design, KernelSpec};
use crate::families::{Family, KappaSet, DEFAULT_BOUNDARY_SHIFT};
use crate::math::{exp, sqrt};
use crate::rng;
use crate::smoother::{Smoother, SmootherConfig, SmootherState};
use crate::{Error, Result};

/// Minimum number of replications on which a conditioning event must hold.
pub const MIN_ACCEPTED: usize = 200;

/// Direction of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundKind {
    /// `empirical ≤ bound + slack`.
    Upper,
    /// `empirical ≥ bound - slack`.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportEntry {
    pub label: String,
    pub empirical: f64,
    pub bound: f64,
    pub slack: f64,
    pub kind: BoundKind,
    pub pass: bool,
}

impl ReportEntry {
    pub fn new(label: String, empirical: f64, bound: f64, slack: f64, kind: BoundKind) -> Self {
        let pass = match kind {
            BoundKind::Upper => empirical <= bound + slack,
            BoundKind::Lower => empirical >= bound - slack,
        };
        ReportEntry {
            label,
            empirical,
            bound,
            slack,
            kind,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub check: String,
    pub family: String,
    pub reps: usize,
    pub seed: u64,
    pub pass: bool,
    /// `vacuous`, `underpowered`, ...
    pub flags: Vec<String>,
    pub entries: Vec<ReportEntry>,
}

impl VerificationReport {
    fn new(check: &str, family: &Family, reps: usize, seed: u64) -> Self {
        VerificationReport {
            check: check.to_string(),
            family: family.name().to_string(),
            reps,
            seed,
            pass: true,
            flags: Vec::new(),
            entries: Vec::new(),
        }
    }

    fn push(&mut self, entry: ReportEntry) {
        self.pass &= entry.pass;
        self.entries.push(entry);
    }

    fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        sqrt(p * (1.0 - p) / n as f64)
    }
}

/// `P(N KL(θ̄, θ) > z) ≤ 2 e^{-z}` for the weighted mean `θ̄` of `T(Y_j)`,
/// `N = Σ w_j`.
pub fn exp_bound_check(
    family: &Family,
    theta: f64,
    weights: &[f64],
    z_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if weights.is_empty() || weights.iter().any(|w| !(0.0..=1.0).contains(w)) || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidArgument("weights must lie in [0, 1] and not all vanish".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let n: f64 = weights.iter().sum();
    let mut r = rng::stream(seed, "expbound", 0);
    let mut draws = Vec::with_capacity(weights.len());
    let mut exceed = vec![0usize; z_grid.len()];
    for _ in 0..reps {
        draws.clear();
        family.sample_into(theta, weights.len(), &mut r, &mut draws)?;
        let mut s = 0.0;
        for (w, y) in weights.iter().zip(&draws) {
            s += w * family.apply_statistic(*y)?;
        }
        let v = n * family.kl_unchecked(s / n, theta);
        for (e, &z) in exceed.iter_mut().zip(z_grid) {
            if v > z {
                *e += 1;
            }
        }
    }
    let mut report = VerificationReport::new("expbound", family, reps, seed);
    for (&z, &e) in z_grid.iter().zip(&exceed) {
        let p = e as f64 / reps as f64;
        report.push(ReportEntry::new(
            format!("N={n} z={z}"),
            p,
            2.0 * exp(-z),
            3.0 * binomial_se(p, reps),
            BoundKind::Upper,
        ));
    }
    Ok(report)
}

/// `√KL(θ₀, θ_m) ≤ κ Σ_l √KL(θ_{l-1}, θ_l)` for random sequences in `Θ_κ`
/// of random length `1..=max_len`.
pub fn triangle_lemma_check(
    family: &Family,
    set: &KappaSet,
    max_len: usize,
    sequences: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if max_len == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let check = family.build_kappa_set(set.lower, set.upper)?;
    let kappa = set.kappa.max(check.kappa);
    let mut r = rng::stream(seed, "triangle", 0);
    let mut violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut seq = Vec::with_capacity(max_len + 1);
    for _ in 0..sequences {
        let m = r.random_range(1..=max_len);
        seq.clear();
        for _ in 0..=m {
            seq.push(set.lower + (set.upper - set.lower) * r.random::<f64>());
        }
        let lhs = sqrt(family.kl_unchecked(seq[0], seq[m]));
        let rhs: f64 = kappa * seq.windows(2).map(|w| sqrt(family.kl_unchecked(w[0], w[1]))).sum::<f64>();
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    let mut report = VerificationReport::new("triangle", family, sequences, seed);
    report.push(ReportEntry::new("violations".into(), violations as f64, 0.0, 0.0, BoundKind::Upper));
    report.push(ReportEntry::new(
        format!("max lhs/rhs, kappa={kappa}"),
        worst_ratio,
        1.0 + 1e-12,
        0.0,
        BoundKind::Upper,
    ));
    Ok(report)
}

/// Piecewise constant truth `θ(X_i)`. The vicinity of `i` is the set of
/// points sharing its value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HomogeneityPartition {
    pub theta: Vec<f64>,
}

impl HomogeneityPartition {
    pub fn new(theta: Vec<f64>) -> Self {
        HomogeneityPartition { theta }
    }

    /// `θ = left` on `0..split`, `right` on `split..n`.
    pub fn two_segment(n: usize, split: usize, left: f64, right: f64) -> Self {
        HomogeneityPartition {
            theta: (0..n).map(|i| if i < split { left } else { right }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    #[inline]
    pub fn same_vicinity(&self, i: usize, j: usize) -> bool {
        self.theta[i] == self.theta[j]
    }

    /// Gaps `φ_i` with `KL(θ_i, θ_j) > φ_i²` outside the vicinity;
    /// infinite for a single compartment.
    pub fn gaps(&self, family: &Family) -> Vec<f64> {
        let mut values: Vec<f64> = self.theta.clone();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        values.dedup();
        self.theta
            .iter()
            .map(|&ti| {
                let min = values
                    .iter()
                    .filter(|&&v| v != ti)
                    .map(|&v| family.kl_unchecked(ti, v))
                    .fold(f64::INFINITY, f64::min);
                if min.is_finite() {
                    sqrt(min) * (1.0 - 1e-12)
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectiveSamples {
    /// `n̄_i`: location weight mass inside the vicinity.
    pub n_bar_eff: Vec<f64>,
    /// `n_i`: minimum of `n̄_j` over the neighbourhood.
    pub n_min: Vec<f64>,
}

pub fn effective_samples(
    design: &Design,
    truth: &HomogeneityPartition,
    h: f64,
    loc_kernel: &KernelSpec,
) -> Result<EffectiveSamples> {
    if truth.len() != design.len() {
        return Err(Error::ShapeMismatch {
            expected: design.len(),
            got: truth.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let stencil = design.stencil(h);
    let mut n_bar_eff = vec![0.0; design.len()];
    for (i, slot) in n_bar_eff.iter_mut().enumerate() {
        for o in &stencil.offsets {
            if let Some(j) = design.shift(i, o) {
                if truth.same_vicinity(i, j) {
                    *slot += loc_kernel.eval(o.dist / h);
                }
            }
        }
    }
    let n_min = (0..design.len())
        .map(|i| {
            stencil
                .offsets
                .iter()
                .filter_map(|o| design.shift(i, o))
                .map(|j| n_bar_eff[j])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(EffectiveSamples { n_bar_eff, n_min })
}

/// A simulation scenario with piecewise constant truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub family: Family,
    pub design: Design,
    pub truth: HomogeneityPartition,
    pub schedule: BandwidthSchedule,
    pub loc_kernel: KernelSpec,
    pub ad_kernel: KernelSpec,
    pub kappa: KappaSet,
    pub lambda: f64,
    pub z: f64,
    pub epsilon: f64,
    pub reps: usize,
    pub seed: u64,
    /// Clamp estimates into `Θ_κ`.
    pub projection: bool,
}

impl Scenario {
    /// Default kernels, `z = 2 ln n`, `ε = n⁻²`, no projection.
    pub fn new(
        family: Family,
        design: Design,
        truth: HomogeneityPartition,
        schedule: BandwidthSchedule,
        kappa: KappaSet,
        lambda: f64,
        reps: usize,
        seed: u64,
    ) -> Self {
        let n = design.len() as f64;
        Scenario {
            family,
            design,
            truth,
            schedule,
            loc_kernel: KernelSpec::location_default(),
            ad_kernel: KernelSpec::adaptation_default(),
            kappa,
            lambda,
            z: 2.0 * crate::math::ln(n),
            epsilon: 1.0 / (n * n),
            reps,
            seed,
            projection: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.truth.len() != self.design.len() {
            return Err(Error::ShapeMismatch {
                expected: self.design.len(),
                got: self.truth.len(),
            });
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if !(self.z > 0.0) {
            return Err(Error::InvalidArgument("z must be positive".into()));
        }
        for &t in &self.truth.theta {
            if !self.family.domain().contains(t) {
                return Err(Error::Domain {
                    family: self.family.name(),
                    value: t,
                    domain: self.family.domain().describe(),
                });
            }
        }
        Ok(())
    }

    pub fn smoother(&self) -> Result<Smoother> {
        let cfg = SmootherConfig {
            family: self.family,
            lambda: self.lambda,
            schedule: self.schedule,
            loc_kernel: self.loc_kernel,
            ad_kernel: self.ad_kernel,
            projection: if self.projection { Some(self.kappa) } else { None },
            boundary_shift: DEFAULT_BOUNDARY_SHIFT,
        };
        Smoother::new(cfg, self.design)
    }

    /// Simulated statistics of replication `rep`.
    pub fn replicate(&self, rep: usize) -> Result<Vec<f64>> {
        let mut r = rng::stream(self.seed, "scenario", rep as u64);
        let mut ys = Vec::with_capacity(self.design.len());
        for &t in &self.truth.theta {
            self.family.sample_into(t, 1, &mut r, &mut ys)?;
        }
        self.family.statistics(&ys)
    }

    /// `max{2n e^{-z}, n ε}`.
    pub fn m_bound(&self) -> f64 {
        let n = self.design.len() as f64;
        (2.0 * n * exp(-self.z)).max(n * self.epsilon)
    }
}

fn accuracy(family: &Family, state: &SmootherState, i: usize, theta: f64, z: f64) -> bool {
    state.n_bar[i] * family.kl_unchecked(state.theta_tilde[i], theta) <= z
}

/// Cross-boundary weights at step `k + 1` vanish whenever both points were
/// accurate at step `k` and the gap exceeds
/// `κ(√(bλ/Ñ_{i1}) + √(z/N̄_{i1}) + √(z/N̄_{i2}))`, `b` the support end of the
/// adaptation kernel.
pub fn separation_check(scenario: &Scenario, k: usize) -> Result<VerificationReport> {
    scenario.validate()?;
    if k + 1 > scenario.schedule.kstar {
        return Err(Error::StepOutOfRange {
            k: k + 1,
            kstar: scenario.schedule.kstar,
        });
    }
    let fam = scenario.family;
    let smoother = scenario.smoother()?;
    let kappa = scenario.kappa.kappa;
    let blambda = scenario.lambda * scenario.ad_kernel.support_end;
    let z = scenario.z;
    let truth = &scenario.truth.theta;
    let h_next = scenario.schedule.bandwidth(k + 1)?;

    // cross pairs with positive location weight at k + 1
    let mut pairs = Vec::new();
    for i1 in 0..scenario.design.len() {
        for (i2, d) in scenario.design.neighborhood(i1, h_next)? {
            if truth[i1] != truth[i2] && scenario.loc_kernel.eval(d / h_next) > 0.0 {
                pairs.push((i1, i2, sqrt(fam.kl_unchecked(truth[i1], truth[i2]))));
            }
        }
    }
    let n_bar = smoother.nonadaptive(k, &vec![0.0; scenario.design.len()])?.n_bar;
    let threshold = |n_tilde: f64, i1: usize, i2: usize| {
        kappa * (sqrt(blambda / n_tilde) + sqrt(z / n_bar[i1]) + sqrt(z / n_bar[i2]))
    };
    if !pairs.iter().any(|&(i1, i2, gap)| gap > threshold(n_bar[i1], i1, i2)) {
        return Err(Error::ScenarioRejected(format!(
            "no cross pair can meet the separation bound at step {k}"
        )));
    }

    let mut conditioned_pairs = 0usize;
    let mut accepted = 0usize;
    let mut violations = 0usize;
    for rep in 0..scenario.reps {
        let stats = scenario.replicate(rep)?;
        let mut at_k = None;
        smoother.run_with_observer(&stats, |s| {
            if s.k == k {
                at_k = Some(s.clone());
            }
        })?;
        let state = at_k.expect("step k is within the schedule");
        let mut any = false;
        for &(i1, i2, gap) in &pairs {
            if !(accuracy(&fam, &state, i1, truth[i1], z) && accuracy(&fam, &state, i2, truth[i2], z)) {
                continue;
            }
            if !(scenario.kappa.contains(state.theta_tilde[i1]) && scenario.kappa.contains(state.theta_tilde[i2])) {
                continue;
            }
            if gap <= threshold(state.n_tilde[i1], i1, i2) {
                continue;
            }
            any = true;
            conditioned_pairs += 1;
            if smoother.weight(&state, k + 1, i1, i2)? != 0.0 {
                violations += 1;
            }
        }
        accepted += usize::from(any);
    }
    let mut report = VerificationReport::new("separation", &fam, scenario.reps, scenario.seed);
    report.push(ReportEntry::new(
        format!("nonzero cross weights among {conditioned_pairs} conditioned pairs"),
        violations as f64,
        0.0,
        0.0,
        BoundKind::Upper,
    ));
    report.push(ReportEntry::new(
        "replications with a conditioned pair".into(),
        accepted as f64,
        MIN_ACCEPTED as f64,
        0.0,
        BoundKind::Lower,
    ));
    if accepted < MIN_ACCEPTED {
        report.flag("underpowered");
    }
    Ok(report)
}

/// Largest step `k` whose gap condition
/// `φ_i > κ[√(bλ/Ñ_i) + 2√(z/n_i)]` fails with the least favourable
/// `Ñ_i = 1`, or `None` if it holds for all steps below `kprime`.
fn gap_failure(scenario: &Scenario, kprime: usize) -> Result<Option<(usize, usize)>> {
    let gaps = scenario.truth.gaps(&scenario.family);
    let blambda = scenario.lambda * scenario.ad_kernel.support_end;
    for k in 0..kprime {
        let h = scenario.schedule.bandwidth(k)?;
        let eff = effective_samples(&scenario.design, &scenario.truth, h, &scenario.loc_kernel)?;
        for (i, &phi) in gaps.iter().enumerate() {
            let need = scenario.kappa.kappa * (sqrt(blambda) + 2.0 * sqrt(scenario.z / eff.n_min[i]));
            if !(phi > need) {
                return Ok(Some((k, i)));
            }
        }
    }
    Ok(None)
}

/// Indicator of `𝓑^(k)(z)` for `k = 0..=kmax` in every replication.
fn simulate_events(scenario: &Scenario, kmax: usize) -> Result<Vec<Vec<bool>>> {
    let smoother = scenario.smoother()?;
    let fam = scenario.family;
    let truth = &scenario.truth.theta;
    let effs = (0..=kmax)
        .map(|k| {
            let h = scenario.schedule.bandwidth(k)?;
            effective_samples(&scenario.design, &scenario.truth, h, &scenario.loc_kernel).map(|e| e.n_bar_eff)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(scenario.reps);
    for rep in 0..scenario.reps {
        let stats = scenario.replicate(rep)?;
        let mut events = vec![false; kmax + 1];
        smoother.run_with_observer(&stats, |s| {
            if s.k <= kmax {
                let eff = &effs[s.k];
                events[s.k] = (0..truth.len())
                    .all(|i| eff[i] * fam.kl_unchecked(s.theta_tilde[i], truth[i]) <= scenario.z);
            }
        })?;
        out.push(events);
    }
    Ok(out)
}

fn check_gap(scenario: &Scenario, kprime: usize) -> Result<()> {
    if let Some((k, i)) = gap_failure(scenario, kprime)? {
        return Err(Error::ScenarioRejected(format!(
            "gap condition fails at step {k}, point {i}"
        )));
    }
    Ok(())
}

/// `P(𝓑^(k)(z)) ≥ 1 - (k + 1) max{2n e^{-z}, n ε}` for `k = 0..=kprime`,
/// with `𝓑^(k)(z) = {n̄_i KL(θ̃_i, θ_i) ≤ z for all i}`.
pub fn local_propagation_experiment(scenario: &Scenario, kprime: usize) -> Result<VerificationReport> {
    scenario.validate()?;
    scenario.schedule.bandwidth(kprime)?;
    check_gap(scenario, kprime)?;
    let events = simulate_events(scenario, kprime)?;
    let m = scenario.m_bound();
    let reps = scenario.reps;
    let mut report = VerificationReport::new("localprop", &scenario.family, reps, scenario.seed);
    for k in 0..=kprime {
        let hits = events.iter().filter(|e| e[k]).count();
        let p = hits as f64 / reps as f64;
        let bound = 1.0 - (k + 1) as f64 * m;
        if bound <= 0.0 {
            report.flag("vacuous");
        }
        report.push(ReportEntry::new(
            format!("P(B^({k}))"),
            p,
            bound,
            3.0 * binomial_se(p, reps),
            BoundKind::Lower,
        ));
    }
    Ok(report)
}

/// `P(𝓑^(k2) | 𝓑^(k1)) ≥ (1 - (k2 + 1)M) / (1 - (k1 + 1)M)`.
pub fn stability_experiment(scenario: &Scenario, k1: usize, k2: usize) -> Result<VerificationReport> {
    scenario.validate()?;
    if k1 > k2 {
        return Err(Error::InvalidArgument("need k1 <= k2".into()));
    }
    scenario.schedule.bandwidth(k2)?;
    let m = scenario.m_bound();
    if !((k2 + 1) as f64 * m < 1.0) {
        return Err(Error::Precondition(format!(
            "(k2 + 1) max{{2n e^-z, n eps}} = {} is not below 1",
            (k2 + 1) as f64 * m
        )));
    }
    check_gap(scenario, k2)?;
    let events = simulate_events(scenario, k2)?;
    let accepted: Vec<&Vec<bool>> = events.iter().filter(|e| e[k1]).collect();
    let hits = accepted.iter().filter(|e| e[k2]).count();
    let n_acc = accepted.len();
    let p = if n_acc == 0 { 0.0 } else { hits as f64 / n_acc as f64 };
    let bound = (1.0 - (k2 + 1) as f64 * m) / (1.0 - (k1 + 1) as f64 * m);
    let mut report = VerificationReport::new("stability", &scenario.family, scenario.reps, scenario.seed);
    report.push(ReportEntry::new(
        format!("P(B^({k2}) | B^({k1})) over {n_acc} accepted"),
        p,
        bound,
        3.0 * binomial_se(p, n_acc),
        BoundKind::Lower,
    ));
    if n_acc < MIN_ACCEPTED {
        report.flag("underpowered");
        report.pass = false;
    }
    Ok(report)
}
