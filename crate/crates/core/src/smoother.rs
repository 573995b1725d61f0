//! Non-adaptive and adaptive (propagation-separation) estimators.

use alloc::vec;
use alloc::vec::Vec;

use crate::design::{BandwidthSchedule, Design, KernelSpec};
use crate::families::{Family, KappaSet, DEFAULT_BOUNDARY_SHIFT};
use crate::{Error, Result};

/// Estimates after one iteration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmootherState {
    pub k: usize,
    pub theta_tilde: Vec<f64>,
    pub n_tilde: Vec<f64>,
    pub n_bar: Vec<f64>,
}

impl SmootherState {
    fn zeros(n: usize) -> Self {
        SmootherState {
            k: 0,
            theta_tilde: vec![0.0; n],
            n_tilde: vec![0.0; n],
            n_bar: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.theta_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_tilde.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmootherConfig {
    pub family: Family,
    /// Adaptation bandwidth; `f64::INFINITY` switches adaptation off.
    pub lambda: f64,
    pub schedule: BandwidthSchedule,
    pub loc_kernel: KernelSpec,
    pub ad_kernel: KernelSpec,
    /// Clamp every estimate into `Θ_κ`.
    pub projection: Option<KappaSet>,
    /// Distance kept from divergent boundaries when evaluating penalties.
    pub boundary_shift: f64,
}

impl SmootherConfig {
    /// Default kernels, no projection.
    pub fn new(family: Family, lambda: f64, schedule: BandwidthSchedule) -> Self {
        SmootherConfig {
            family,
            lambda,
            schedule,
            loc_kernel: KernelSpec::location_default(),
            ad_kernel: KernelSpec::adaptation_default(),
            projection: None,
            boundary_shift: DEFAULT_BOUNDARY_SHIFT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument("lambda must be positive".into()));
        }
        if !(self.boundary_shift >= 0.0) {
            return Err(Error::InvalidArgument("boundary shift must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    dr: isize,
    dc: isize,
    delta: isize,
    wloc: f64,
}

#[derive(Debug, Clone)]
struct StepStencil {
    entries: Vec<Entry>,
    reach_r: usize,
    reach_c: usize,
}

/// A configured smoother bound to one design, with location weights
/// precomputed for every step.
#[derive(Debug, Clone)]
pub struct Smoother {
    config: SmootherConfig,
    design: Design,
    steps: Vec<StepStencil>,
}

impl Smoother {
    pub fn new(config: SmootherConfig, design: Design) -> Result<Self> {
        config.validate()?;
        let (_, cols) = design.shape();
        let steps = config
            .schedule
            .bandwidths()
            .into_iter()
            .map(|h| {
                let stencil = design.stencil(h);
                let entries: Vec<Entry> = stencil
                    .offsets
                    .iter()
                    .map(|o| Entry {
                        dr: o.dr,
                        dc: o.dc,
                        delta: o.dr * cols as isize + o.dc,
                        wloc: config.loc_kernel.eval(o.dist / h),
                    })
                    .filter(|e| e.wloc > 0.0)
                    .collect();
                let reach_r = entries.iter().map(|e| e.dr.unsigned_abs()).max().unwrap_or(0);
                let reach_c = entries.iter().map(|e| e.dc.unsigned_abs()).max().unwrap_or(0);
                StepStencil {
                    entries,
                    reach_r,
                    reach_c,
                }
            })
            .collect();
        Ok(Smoother {
            config,
            design,
            steps,
        })
    }

    pub fn config(&self) -> &SmootherConfig {
        &self.config
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn kstar(&self) -> usize {
        self.config.schedule.kstar
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.design.len() {
            return Err(Error::ShapeMismatch {
                expected: self.design.len(),
                got,
            });
        }
        Ok(())
    }

    fn check_step(&self, k: usize) -> Result<()> {
        if k > self.kstar() {
            return Err(Error::StepOutOfRange { k, kstar: self.kstar() });
        }
        Ok(())
    }

    /// Calls `f(j, location weight)` for every `j` with positive location
    /// weight at step `k`, in ascending `j`.
    #[inline]
    fn for_each_neighbor(&self, k: usize, i: usize, mut f: impl FnMut(usize, f64)) {
        let st = &self.steps[k];
        let (rows, cols) = self.design.shape();
        let (r, c) = self.design.coords(i);
        let inside =
            r >= st.reach_r && r + st.reach_r < rows && c >= st.reach_c && c + st.reach_c < cols;
        if inside {
            for e in &st.entries {
                f((i as isize + e.delta) as usize, e.wloc);
            }
        } else {
            for e in &st.entries {
                let r2 = r as isize + e.dr;
                let c2 = c as isize + e.dc;
                if r2 >= 0 && c2 >= 0 && (r2 as usize) < rows && (c2 as usize) < cols {
                    f(r2 as usize * cols + c2 as usize, e.wloc);
                }
            }
        }
    }

    #[inline]
    fn project(&self, theta: f64) -> f64 {
        match &self.config.projection {
            Some(set) => set.project(theta),
            None => theta,
        }
    }

    fn shifted(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .map(|&t| self.config.family.shift_interior(t, self.config.boundary_shift))
            .collect()
    }

    /// Non-adaptive estimate at bandwidth `h^(k)`.
    pub fn nonadaptive(&self, k: usize, stats: &[f64]) -> Result<SmootherState> {
        self.check_len(stats.len())?;
        self.check_step(k)?;
        let mut out = SmootherState::zeros(stats.len());
        self.fill_step(None, k, stats, &mut out);
        Ok(out)
    }

    /// `s_ij = Ñ_i KL(θ̃_i, θ̃_j)` on a state.
    pub fn penalty(&self, state: &SmootherState, i: usize, j: usize) -> Result<f64> {
        let n = state.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        let f = &self.config.family;
        let dom = f.domain();
        for idx in [i, j] {
            let t = state.theta_tilde[idx];
            if !dom.contains(t) {
                return Err(Error::Domain {
                    family: f.name(),
                    value: t,
                    domain: dom.describe(),
                });
            }
        }
        let delta = self.config.boundary_shift;
        Ok(state.n_tilde[i] * f.kl_shifted(state.theta_tilde[i], state.theta_tilde[j], delta))
    }

    /// Adaptive weight `w̃_ij^(k)` computed from the step `k - 1` state.
    pub fn weight(&self, prev: &SmootherState, k: usize, i: usize, j: usize) -> Result<f64> {
        self.check_step(k)?;
        if k == 0 {
            return Err(Error::InvalidArgument("adaptive weights start at step 1".into()));
        }
        let dist = self.design.distance(i, j)?;
        let h = self.config.schedule.bandwidth(k)?;
        let wl = self.config.loc_kernel.eval(dist / h);
        if wl == 0.0 || self.config.lambda == f64::INFINITY {
            return Ok(wl);
        }
        let s = self.penalty(prev, i, j)?;
        Ok(wl * self.config.ad_kernel.eval(s / self.config.lambda))
    }

    fn fill_step(&self, prev: Option<&SmootherState>, k: usize, stats: &[f64], out: &mut SmootherState) {
        out.k = k;
        let adaptive = prev.filter(|_| self.config.lambda != f64::INFINITY);
        match adaptive {
            None => {
                for i in 0..stats.len() {
                    let mut sw = 0.0;
                    let mut swt = 0.0;
                    self.for_each_neighbor(k, i, |j, wl| {
                        sw += wl;
                        swt += wl * stats[j];
                    });
                    out.theta_tilde[i] = self.project(swt / sw);
                    out.n_tilde[i] = sw;
                    out.n_bar[i] = sw;
                }
            }
            Some(prev) => {
                let fam = self.config.family;
                let ad = self.config.ad_kernel;
                let inv_lambda = 1.0 / self.config.lambda;
                let theta = self.shifted(&prev.theta_tilde);
                for i in 0..stats.len() {
                    let ti = theta[i];
                    let scale = prev.n_tilde[i] * inv_lambda;
                    let mut sbar = 0.0;
                    let mut sw = 0.0;
                    let mut swt = 0.0;
                    self.for_each_neighbor(k, i, |j, wl| {
                        sbar += wl;
                        let wa = ad.eval(scale * fam.kl_unchecked(ti, theta[j]));
                        if wa > 0.0 {
                            let w = wl * wa;
                            sw += w;
                            swt += w * stats[j];
                        }
                    });
                    out.theta_tilde[i] = self.project(swt / sw);
                    out.n_tilde[i] = sw;
                    out.n_bar[i] = sbar;
                }
            }
        }
    }

    /// One adaptive iteration from the step `k - 1` state.
    pub fn step(&self, prev: &SmootherState, stats: &[f64]) -> Result<SmootherState> {
        self.check_len(stats.len())?;
        self.check_len(prev.len())?;
        let k = prev.k + 1;
        self.check_step(k)?;
        let mut out = SmootherState::zeros(stats.len());
        self.fill_step(Some(prev), k, stats, &mut out);
        Ok(out)
    }

    /// Initialization followed by `k*` adaptive steps; `observer` sees every
    /// state from `k = 0` to `k = k*`.
    pub fn run_with_observer<F>(&self, stats: &[f64], mut observer: F) -> Result<SmootherState>
    where
        F: FnMut(&SmootherState),
    {
        self.check_len(stats.len())?;
        let mut cur = SmootherState::zeros(stats.len());
        self.fill_step(None, 0, stats, &mut cur);
        observer(&cur);
        let mut next = SmootherState::zeros(stats.len());
        for k in 1..=self.kstar() {
            self.fill_step(Some(&cur), k, stats, &mut next);
            core::mem::swap(&mut cur, &mut next);
            observer(&cur);
        }
        Ok(cur)
    }

    /// Final state only.
    pub fn run(&self, stats: &[f64]) -> Result<SmootherState> {
        self.run_with_observer(stats, |_| {})
    }

    /// Every state from `k = 0` to `k = k*`.
    pub fn run_traced(&self, stats: &[f64]) -> Result<Vec<SmootherState>> {
        let mut trace = Vec::with_capacity(self.kstar() + 1);
        self.run_with_observer(stats, |s| trace.push(s.clone()))?;
        Ok(trace)
    }
}

/// Non-adaptive estimate `θ̄_i = Σ_j w̄_ij T(Y_j) / N̄_i`, `w̄_ij = K_loc(Δ/h)`.
/// `stats` holds the values `T(Y_j)`.
pub fn nonadaptive_estimate(
    design: &Design,
    stats: &[f64],
    h: f64,
    loc_kernel: &KernelSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if stats.len() != design.len() {
        return Err(Error::ShapeMismatch {
            expected: design.len(),
            got: stats.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let stencil = design.stencil(h);
    let mut theta = Vec::with_capacity(stats.len());
    let mut nbar = Vec::with_capacity(stats.len());
    for i in 0..design.len() {
        let mut sw = 0.0;
        let mut swt = 0.0;
        for o in &stencil.offsets {
            if let Some(j) = design.shift(i, o) {
                let w = loc_kernel.eval(o.dist / h);
                sw += w;
                swt += w * stats[j];
            }
        }
        theta.push(swt / sw);
        nbar.push(sw);
    }
    Ok((theta, nbar))
}

/// Largest deviation over points of
/// `Σ_j w̄_ij ln[p(Y_j, θ̄_i)/p(Y_j, θ)]` from `N̄_i KL(θ̄_i, θ)`.
pub fn fitted_loglik_identity_check(
    design: &Design,
    family: &Family,
    stats: &[f64],
    h: f64,
    loc_kernel: &KernelSpec,
    theta: f64,
) -> Result<f64> {
    if !family.domain().contains_interior(theta) {
        return Err(Error::DivergentBoundary {
            family: family.name(),
            value: theta,
        });
    }
    let (tbar, nbar) = nonadaptive_estimate(design, stats, h, loc_kernel)?;
    let stencil = design.stencil(h);
    let mut worst: f64 = 0.0;
    for i in 0..design.len() {
        let mut lhs = 0.0;
        for o in &stencil.offsets {
            if let Some(j) = design.shift(i, o) {
                let w = loc_kernel.eval(o.dist / h);
                lhs += w * family.log_likelihood_ratio(stats[j], tbar[i], theta);
            }
        }
        let rhs = nbar[i] * family.kl_unchecked(tbar[i], theta);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::KernelKind;
    use crate::rng;
    use proptest::prelude::*;

    fn gaussian_smoother(n: usize, lambda: f64, kstar: usize) -> Smoother {
        let cfg = SmootherConfig::new(
            Family::gaussian(1.0).unwrap(),
            lambda,
            BandwidthSchedule::new(1.0, 1.25, kstar).unwrap(),
        );
        Smoother::new(cfg, Design::line(n).unwrap()).unwrap()
    }

    #[test]
    fn nonadaptive_examples() {
        let d = Design::line(3).unwrap();
        let u = KernelSpec::standard(KernelKind::Uniform);
        let (t, n) = nonadaptive_estimate(&d, &[0.0, 3.0, 6.0], 1.0, &u).unwrap();
        assert_eq!(t, vec![1.5, 3.0, 4.5]);
        assert_eq!(n, vec![2.0, 3.0, 2.0]);
        let p = KernelSpec::location_default();
        let (t, n) = nonadaptive_estimate(&d, &[0.0, 3.0, 6.0], 1.0, &p).unwrap();
        assert_eq!(t, vec![0.0, 3.0, 6.0]);
        assert_eq!(n, vec![1.0; 3]);
        let (t, _) = nonadaptive_estimate(&d, &[2.5; 3], 5.0, &p).unwrap();
        assert!(t.iter().all(|&v| (v - 2.5).abs() < 1e-15));
    }

    #[test]
    fn penalty_examples() {
        let s = gaussian_smoother(2, 1.0, 1);
        let state = SmootherState {
            k: 0,
            theta_tilde: vec![1.0, 0.0],
            n_tilde: vec![4.0, 1.0],
            n_bar: vec![4.0, 1.0],
        };
        assert_eq!(s.penalty(&state, 0, 1).unwrap(), 2.0);
        assert_eq!(s.penalty(&state, 0, 0).unwrap(), 0.0);
        let mut doubled = state.clone();
        doubled.n_tilde[0] = 8.0;
        assert_eq!(s.penalty(&doubled, 0, 1).unwrap(), 4.0);
    }

    #[test]
    fn separated_pair_keeps_own_value() {
        let s = Smoother::new(
            SmootherConfig::new(
                Family::gaussian(1.0).unwrap(),
                1.0,
                BandwidthSchedule::new(1.0, 2.0, 1).unwrap(),
            ),
            Design::line(2).unwrap(),
        )
        .unwrap();
        let stats = [0.0, 10.0];
        let init = s.nonadaptive(0, &stats).unwrap();
        assert!(s.weight(&init, 1, 0, 1).unwrap() == 0.0);
        let next = s.step(&init, &stats).unwrap();
        assert_eq!(next.theta_tilde, vec![0.0, 10.0]);
        assert_eq!(next.n_tilde, vec![1.0, 1.0]);
    }

    #[test]
    fn kstar_zero_returns_initialization() {
        let s = gaussian_smoother(5, 3.0, 0);
        let stats = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(s.run(&stats).unwrap(), s.nonadaptive(0, &stats).unwrap());
    }

    #[test]
    fn constant_data_stays_constant() {
        let s = gaussian_smoother(40, 5.0, 12);
        let out = s.run(&[0.75; 40]).unwrap();
        assert!(out.theta_tilde.iter().all(|&v| (v - 0.75).abs() < 1e-14));
        assert!(out.n_tilde.iter().zip(&out.n_bar).all(|(a, b)| a == b));
    }

    #[test]
    fn infinite_lambda_matches_nonadaptive() {
        let s = gaussian_smoother(60, f64::INFINITY, 10);
        let mut r = rng::stream(3, "test", 0);
        let stats = Family::gaussian(1.0).unwrap().sample(0.0, 60, &mut r).unwrap();
        let trace = s.run_traced(&stats).unwrap();
        for st in &trace {
            let h = s.config().schedule.bandwidth(st.k).unwrap();
            let (t, n) = nonadaptive_estimate(s.design(), &stats, h, &KernelSpec::location_default()).unwrap();
            assert_eq!(st.theta_tilde, t);
            assert_eq!(st.n_bar, n);
        }
    }

    #[test]
    fn identity_residuals_small() {
        let d = Design::grid(6, 7).unwrap();
        let loc = KernelSpec::location_default();
        for (fam, theta) in [
            (Family::gaussian(1.3).unwrap(), 0.4),
            (Family::exponential(), 1.7),
            (Family::poisson(), 2.2),
        ] {
            let mut r = rng::stream(11, "identity", 0);
            let ys = fam.sample(theta, d.len(), &mut r).unwrap();
            let t = fam.statistics(&ys).unwrap();
            let res = fitted_loglik_identity_check(&d, &fam, &t, 2.3, &loc, theta * 1.1).unwrap();
            assert!(res <= 1e-9, "{} residual {res}", fam.name());
        }
        let single = Design::line(1).unwrap();
        let res = fitted_loglik_identity_check(&single, &Family::poisson(), &[3.0], 1.0, &loc, 3.0).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn projection_clamps() {
        let fam = Family::poisson();
        let mut cfg = SmootherConfig::new(fam, 2.0, BandwidthSchedule::new(1.0, 1.25, 6).unwrap());
        cfg.projection = Some(fam.build_kappa_set(1.0, 3.0).unwrap());
        let s = Smoother::new(cfg, Design::line(30).unwrap()).unwrap();
        let stats: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        for st in s.run_traced(&stats).unwrap() {
            assert!(st.theta_tilde.iter().all(|&v| (1.0..=3.0).contains(&v)));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn state_invariants(seed in 0u64..1000, lambda in 0.05f64..50.0, n in 2usize..60) {
            let s = gaussian_smoother(n, lambda, 8);
            let mut r = rng::stream(seed, "prop", 0);
            let stats = Family::gaussian(1.0).unwrap().sample(0.0, n, &mut r).unwrap();
            let lo = stats.iter().cloned().fold(f64::MAX, f64::min);
            let hi = stats.iter().cloned().fold(f64::MIN, f64::max);
            let trace = s.run_traced(&stats).unwrap();
            for st in &trace {
                for i in 0..n {
                    prop_assert!(st.n_tilde[i] >= 1.0);
                    prop_assert!(st.n_tilde[i] <= st.n_bar[i] + 1e-12);
                    prop_assert!(st.theta_tilde[i] >= lo - 1e-12 && st.theta_tilde[i] <= hi + 1e-12);
                }
            }
            for (k, prev) in trace.iter().enumerate().take(8) {
                for i in 0..n {
                    prop_assert_eq!(s.weight(prev, k + 1, i, i).unwrap(), 1.0);
                }
            }
        }

        #[test]
        fn nonadaptive_n_bar_grows(seed in 0u64..100, n in 2usize..40) {
            let s = gaussian_smoother(n, f64::INFINITY, 10);
            let mut r = rng::stream(seed, "grow", 0);
            let stats = Family::gaussian(1.0).unwrap().sample(0.0, n, &mut r).unwrap();
            let trace = s.run_traced(&stats).unwrap();
            for w in trace.windows(2) {
                for i in 0..n {
                    prop_assert!(w[1].n_tilde[i] >= w[0].n_tilde[i]);
                }
            }
        }

        #[test]
        fn reversal_equivariance(seed in 0u64..100, n in 2usize..40, lambda in 0.5f64..20.0) {
            let s = gaussian_smoother(n, lambda, 7);
            let mut r = rng::stream(seed, "perm", 0);
            let stats = Family::gaussian(1.0).unwrap().sample(0.0, n, &mut r).unwrap();
            let mut rev = stats.clone();
            rev.reverse();
            let a = s.run(&stats).unwrap();
            let b = s.run(&rev).unwrap();
            for i in 0..n {
                prop_assert!((a.theta_tilde[i] - b.theta_tilde[n - 1 - i]).abs() < 1e-12);
            }
        }
    }
}
