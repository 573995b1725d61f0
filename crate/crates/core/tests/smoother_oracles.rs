use psaws_core::design::{BandwidthSchedule, Design, KernelKind, KernelSpec};
use psaws_core::families::Family;
use psaws_core::rng;
use psaws_core::smoother::{
    fitted_loglik_identity_check, nonadaptive_estimate, Smoother, SmootherConfig, SmootherState,
};

fn parabola(x: f64) -> f64 {
    (1.0 - x * x).max(0.0)
}

fn plateau(x: f64) -> f64 {
    (2.0 - x).clamp(0.0, 1.0)
}

/// Direct O(n²) evaluation of the whole procedure with default kernels.
fn brute_force(fam: &Family, rows: usize, cols: usize, stats: &[f64], lambda: f64, hs: &[f64]) -> Vec<SmootherState> {
    let n = rows * cols;
    let dist = |i: usize, j: usize| {
        let (ri, ci) = ((i / cols) as f64, (i % cols) as f64);
        let (rj, cj) = ((j / cols) as f64, (j % cols) as f64);
        ((ri - rj).powi(2) + (ci - cj).powi(2)).sqrt()
    };
    let mut out: Vec<SmootherState> = Vec::new();
    for (k, &h) in hs.iter().enumerate() {
        let mut st = SmootherState {
            k,
            theta_tilde: vec![0.0; n],
            n_tilde: vec![0.0; n],
            n_bar: vec![0.0; n],
        };
        for i in 0..n {
            let (mut sw, mut swt, mut sbar) = (0.0, 0.0, 0.0);
            for j in 0..n {
                let wl = parabola(dist(i, j) / h);
                sbar += wl;
                let wa = match out.last() {
                    Some(prev) if lambda.is_finite() => {
                        let s = prev.n_tilde[i] * fam.kl_shifted(prev.theta_tilde[i], prev.theta_tilde[j], 1e-8);
                        plateau(s / lambda)
                    }
                    _ => 1.0,
                };
                sw += wl * wa;
                swt += wl * wa * stats[j];
            }
            st.theta_tilde[i] = swt / sw;
            st.n_tilde[i] = sw;
            st.n_bar[i] = sbar;
        }
        out.push(st);
    }
    out
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
}

#[test]
fn matches_brute_force_on_random_grids() {
    let cases = [(Family::gaussian(1.0).unwrap(), 1usize, 40usize, 3.0), (Family::poisson(), 7, 9, 2.0), (Family::exponential(), 6, 6, 5.0)];
    for (idx, (fam, rows, cols, lambda)) in cases.into_iter().enumerate() {
        let mut r = rng::stream(31, "brute", idx as u64);
        let truth: Vec<f64> = (0..rows * cols).map(|i| if i % cols < cols / 2 { 1.0 } else { 4.0 }).collect();
        let mut ys = Vec::new();
        for &t in &truth {
            fam.sample_into(t, 1, &mut r, &mut ys).unwrap();
        }
        let stats = fam.statistics(&ys).unwrap();
        let design = if rows == 1 { Design::line(cols).unwrap() } else { Design::grid(rows, cols).unwrap() };
        let schedule = BandwidthSchedule::new(1.0, BandwidthSchedule::default_factor(design.dim()), 8).unwrap();
        let s = Smoother::new(SmootherConfig::new(fam, lambda, schedule), design).unwrap();
        let trace = s.run_traced(&stats).unwrap();
        let want = brute_force(&fam, rows, cols, &stats, lambda, &schedule.bandwidths());
        for (got, want) in trace.iter().zip(&want) {
            assert!(close(&got.theta_tilde, &want.theta_tilde, 1e-12), "{} step {}", fam.name(), got.k);
            assert!(close(&got.n_tilde, &want.n_tilde, 1e-12));
            assert!(close(&got.n_bar, &want.n_bar, 1e-12));
        }
    }
}

#[test]
fn hand_computed_uniform_average() {
    let d = Design::line(3).unwrap();
    let k = KernelSpec::standard(KernelKind::Uniform);
    let (theta, nbar) = nonadaptive_estimate(&d, &[0.0, 3.0, 6.0], 1.0, &k).unwrap();
    assert_eq!(theta, vec![1.5, 3.0, 4.5]);
    assert_eq!(nbar, vec![2.0, 3.0, 2.0]);
}

#[test]
fn penalty_example() {
    let schedule = BandwidthSchedule::new(1.0, 1.25, 3).unwrap();
    let s = Smoother::new(SmootherConfig::new(Family::gaussian(1.0).unwrap(), 1.0, schedule), Design::line(2).unwrap()).unwrap();
    let st = SmootherState {
        k: 0,
        theta_tilde: vec![1.0, 0.0],
        n_tilde: vec![4.0, 1.0],
        n_bar: vec![4.0, 1.0],
    };
    assert_eq!(s.penalty(&st, 0, 1).unwrap(), 2.0);
}

#[test]
fn disconnected_pair_keeps_own_observation() {
    let schedule = BandwidthSchedule::new(1.5, 1.25, 1).unwrap();
    let s = Smoother::new(SmootherConfig::new(Family::gaussian(1.0).unwrap(), 1.0, schedule), Design::line(2).unwrap()).unwrap();
    let stats = [0.0, 10.0];
    let prev = s.nonadaptive(0, &stats).unwrap();
    // s_12 = 1 * 50 far beyond 2λ
    assert_eq!(s.weight(&prev, 1, 0, 1).unwrap(), 0.0);
    let next = s.step(&prev, &stats).unwrap();
    assert_eq!(next.theta_tilde, vec![0.0, 10.0]);
}

fn infinite_lambda_case(design: Design, seed: u64) {
    let fam = Family::gaussian(1.0).unwrap();
    let mut r = rng::stream(seed, "lambda-inf", 0);
    let ys = fam.sample(0.0, design.len(), &mut r).unwrap();
    let schedule = BandwidthSchedule::from_hmax(1.0, BandwidthSchedule::default_factor(design.dim()), 12.0).unwrap();
    let s = Smoother::new(SmootherConfig::new(fam, f64::INFINITY, schedule), design).unwrap();
    let trace = s.run_traced(&ys).unwrap();
    for st in &trace {
        let (theta, nbar) = nonadaptive_estimate(&design, &ys, schedule.bandwidth(st.k).unwrap(), &KernelSpec::location_default()).unwrap();
        assert_eq!(st.theta_tilde, theta, "step {}", st.k);
        assert_eq!(st.n_bar, nbar);
        assert_eq!(st.n_tilde, nbar);
    }
}

#[test]
fn infinite_lambda_is_nonadaptive_1d() {
    infinite_lambda_case(Design::line(1000).unwrap(), 32);
}

#[test]
fn infinite_lambda_is_nonadaptive_2d() {
    infinite_lambda_case(Design::grid(64, 64).unwrap(), 33);
}

#[test]
fn fitted_loglik_identity() {
    let mut r = rng::stream(34, "identity", 0);
    let g = Family::gaussian(1.0).unwrap();
    let d = Design::line(200).unwrap();
    let ys = g.sample(0.5, 200, &mut r).unwrap();
    let res = fitted_loglik_identity_check(&d, &g, &ys, 6.0, &KernelSpec::location_default(), 0.1).unwrap();
    assert!(res <= 1e-9, "{res}");
    let p = Family::poisson();
    let d = Design::grid(12, 12).unwrap();
    let ys = p.sample(3.0, 144, &mut r).unwrap();
    let res = fitted_loglik_identity_check(&d, &p, &ys, 3.0, &KernelSpec::location_default(), 2.5).unwrap();
    assert!(res <= 1e-9, "{res}");
}
