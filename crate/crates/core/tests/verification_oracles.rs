use psaws_core::design::{BandwidthSchedule, Design, KernelKind, KernelSpec};
use psaws_core::families::Family;
use psaws_core::smoother::nonadaptive_estimate;
use psaws_core::verification::{
    effective_samples, exp_bound_check, local_propagation_experiment, separation_check, stability_experiment,
    triangle_lemma_check, HomogeneityPartition, Scenario,
};
use psaws_core::Error;
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

#[test]
fn gaussian_single_observation_tail() {
    let g = Family::gaussian(1.0).unwrap();
    let reps = 100_000;
    let rep = exp_bound_check(&g, 0.0, &[1.0], &[0.0, 2.0], reps, 51).unwrap();
    assert!(rep.pass);
    // z = 0: bound 2 is trivial
    assert_eq!(rep.entries[0].bound, 2.0);
    let e = &rep.entries[1];
    let want = 1.0 - ChiSquared::new(1.0).unwrap().cdf(4.0);
    let se = (want * (1.0 - want) / reps as f64).sqrt();
    assert!((e.empirical - want).abs() <= 3.0 * se, "{} vs {want}", e.empirical);
    assert!((e.bound - 0.270_670_566).abs() < 1e-8);
}

/// Roots `r < 1 < R` of `n (r - 1 - ln r) = z`.
fn roots(n: f64, z: f64) -> (f64, f64) {
    let f = |r: f64| n * (r - 1.0 - r.ln()) - z;
    let solve = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == (f(a) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    (solve(1e-12, 1.0), solve(1.0, 100.0))
}

#[test]
fn exponential_mean_of_ten_tail() {
    let e = Family::exponential();
    let reps = 100_000;
    let zs = [1.0, 2.0, 5.0];
    let rep = exp_bound_check(&e, 2.0, &[1.0; 10], &zs, reps, 52).unwrap();
    assert!(rep.pass);
    // θ̄/θ ~ Γ(10, rate 10)
    let ratio = Gamma::new(10.0, 10.0).unwrap();
    for (entry, &z) in rep.entries.iter().zip(&zs) {
        let (lo, hi) = roots(10.0, z);
        let want = ratio.cdf(lo) + 1.0 - ratio.cdf(hi);
        let se = (want * (1.0 - want) / reps as f64).sqrt();
        assert!((entry.empirical - want).abs() <= 3.0 * se, "z={z}: {} vs {want}", entry.empirical);
    }
    assert!(rep.entries[2].empirical <= 2.0 * (-5.0f64).exp());
}

#[test]
fn triangle_inequality_has_no_violations() {
    let g = Family::gaussian(1.0).unwrap();
    let set = g.build_kappa_set(-5.0, 5.0).unwrap();
    assert_eq!(set.kappa, 1.0);
    let rep = triangle_lemma_check(&g, &set, 5, 10_000, 53).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.entries[0].empirical, 0.0);

    let e = Family::exponential();
    let set = e.build_kappa_set(1.0, 2.0).unwrap();
    assert_eq!(set.kappa, 2.0);
    let rep = triangle_lemma_check(&e, &set, 5, 10_000, 54).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.entries[0].empirical, 0.0);

    // m = 1: holds because κ ≥ 1
    let rep = triangle_lemma_check(&Family::poisson(), &Family::poisson().build_kappa_set(1.0, 9.0).unwrap(), 1, 1000, 55).unwrap();
    assert!(rep.pass);
}

#[test]
fn effective_samples_by_counting() {
    let n = 100;
    let d = Design::line(n).unwrap();
    let truth = HomogeneityPartition::two_segment(n, 50, 0.0, 1.0);
    let k = KernelSpec::standard(KernelKind::Uniform);
    let h = 10.0;
    let eff = effective_samples(&d, &truth, h, &k).unwrap();
    let (_, nbar) = nonadaptive_estimate(&d, &vec![0.0; n], h, &k).unwrap();
    // point 49 is the last of the left segment: 10 of its 21 neighbours lie across
    assert!((eff.n_bar_eff[49] - nbar[49] / 2.0).abs() <= 1.0);
    assert_eq!(eff.n_bar_eff[25], nbar[25]);
    for i in 0..n {
        assert!(eff.n_min[i] <= eff.n_bar_eff[i]);
        assert!(eff.n_bar_eff[i] <= nbar[i]);
    }
    // small bandwidth: neighbourhoods sit inside their segment
    let eff = effective_samples(&d, &truth, 1.0, &KernelSpec::location_default()).unwrap();
    let (_, nbar) = nonadaptive_estimate(&d, &vec![0.0; n], 1.0, &KernelSpec::location_default()).unwrap();
    assert_eq!(eff.n_bar_eff, nbar);
}

fn scenario(n: usize, split: usize, jump: f64, lambda: f64, kstar: usize, reps: usize) -> Scenario {
    let g = Family::gaussian(1.0).unwrap();
    let kappa = g.build_kappa_set(-10.0, 40.0).unwrap();
    Scenario::new(
        g,
        Design::line(n).unwrap(),
        HomogeneityPartition::two_segment(n, split, 0.0, jump),
        BandwidthSchedule::new(1.0, 1.25, kstar).unwrap(),
        kappa,
        lambda,
        reps,
        56,
    )
}

#[test]
fn identical_compartments_are_rejected() {
    let s = scenario(100, 50, 0.0, 5.0, 10, 10);
    assert!(matches!(separation_check(&s, 5), Err(Error::ScenarioRejected(_))));
}

#[test]
fn separation_holds_in_a_small_run() {
    let mut s = scenario(200, 100, 4.0, 5.0, 16, 250);
    s.z = 2.0;
    let rep = separation_check(&s, 15).unwrap();
    assert_eq!(rep.entries[0].empirical, 0.0);
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn stability_precondition() {
    let mut s = scenario(100, 50, 30.0, 1.0, 10, 10);
    s.z = 1.0;
    assert!(matches!(stability_experiment(&s, 2, 5), Err(Error::Precondition(_))));
}

#[test]
fn vacuous_bound_is_flagged() {
    let mut s = scenario(60, 30, 30.0, 0.5, 4, 20);
    s.z = 3.0;
    let rep = local_propagation_experiment(&s, 3).unwrap();
    assert!(rep.has_flag("vacuous"));
    assert!(rep.pass);
}

#[test]
fn small_jump_fails_the_gap_condition() {
    let s = scenario(200, 100, 2.0, 5.0, 10, 10);
    assert!(matches!(local_propagation_experiment(&s, 10), Err(Error::ScenarioRejected(_))));
}
