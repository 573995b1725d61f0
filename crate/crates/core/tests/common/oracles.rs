//! Independent reference densities and numeric divergences for every catalog
//! family, built on `statrs` and double-exponential quadrature.

#![allow(dead_code)]

use psaws_core::families::{Family, FamilyKind};
use statrs::distribution::{
    Bernoulli, Binomial, Continuous, Discrete, Erlang, Exp, Gamma, LogNormal, NegativeBinomial,
    Normal, Pareto, Poisson, Weibull,
};

/// One catalog entry per family, with a parameter range for random draws.
pub fn catalog() -> Vec<(Family, f64, f64)> {
    let f = |k| Family::new(k).unwrap();
    vec![
        (f(FamilyKind::Gaussian { sigma: 1.5 }), -5.0, 5.0),
        (f(FamilyKind::NormalVariance), 0.2, 5.0),
        (f(FamilyKind::LogNormal { sigma: 0.7 }), 0.1, 2.0),
        (f(FamilyKind::Gamma { shape: 2.5 }), 0.2, 5.0),
        (f(FamilyKind::Exponential), 0.2, 5.0),
        (f(FamilyKind::Erlang { n: 3 }), 0.2, 5.0),
        (f(FamilyKind::Rayleigh), 0.2, 5.0),
        (f(FamilyKind::Weibull { k: 1.7 }), 0.2, 5.0),
        (f(FamilyKind::ScaledChiSquared { k: 3.0 }), 0.2, 5.0),
        (f(FamilyKind::Pareto { x_m: 2.0 }), 0.05, 0.9),
        (f(FamilyKind::Poisson), 0.2, 20.0),
        (f(FamilyKind::Binomial { n: 12 }), 0.3, 11.7),
        (f(FamilyKind::NegativeBinomial { r: 2.5 }), 0.2, 10.0),
        (f(FamilyKind::Bernoulli), 0.05, 0.95),
    ]
}

enum Density {
    Cont(Box<dyn Fn(f64) -> f64>),
    Disc(Box<dyn Fn(u64) -> f64>),
}

fn density(fam: &Family, theta: f64) -> Density {
    macro_rules! cont {
        ($d:expr) => {{
            let d = $d.unwrap();
            Density::Cont(Box::new(move |y| d.ln_pdf(y)))
        }};
    }
    macro_rules! disc {
        ($d:expr) => {{
            let d = $d.unwrap();
            Density::Disc(Box::new(move |y| d.ln_pmf(y)))
        }};
    }
    match fam.kind() {
        FamilyKind::Gaussian { sigma } => cont!(Normal::new(theta, sigma)),
        FamilyKind::NormalVariance => cont!(Normal::new(0.0, theta.sqrt())),
        FamilyKind::LogNormal { sigma } => cont!(LogNormal::new(theta, sigma)),
        FamilyKind::Gamma { shape } => cont!(Gamma::new(shape, shape / theta)),
        FamilyKind::Exponential => cont!(Exp::new(1.0 / theta)),
        FamilyKind::Erlang { n } => cont!(Erlang::new(u64::from(n), f64::from(n) / theta)),
        FamilyKind::Rayleigh => cont!(Weibull::new(2.0, theta.sqrt())),
        FamilyKind::Weibull { k } => cont!(Weibull::new(k, theta.powf(1.0 / k))),
        FamilyKind::ScaledChiSquared { k } => cont!(Gamma::new(k / 2.0, k / (2.0 * theta))),
        FamilyKind::Pareto { x_m } => cont!(Pareto::new(x_m, 1.0 / theta)),
        FamilyKind::Poisson => disc!(Poisson::new(theta)),
        FamilyKind::Binomial { n } => disc!(Binomial::new(theta / f64::from(n), u64::from(n))),
        FamilyKind::NegativeBinomial { r } => disc!(NegativeBinomial::new(r, r / (r + theta))),
        FamilyKind::Bernoulli => disc!(Bernoulli::new(theta)),
    }
}

/// `p ln(p/q)` from log densities, with `0 ln 0 = 0`.
fn kl_term(lp: f64, lq: f64) -> f64 {
    if lp == f64::NEG_INFINITY {
        0.0
    } else {
        lp.exp() * (lp - lq)
    }
}

/// Support of the observation `Y` as `(anchor, scale, kind)`; kind 0 is the
/// real line, 1 is the half-line `[anchor, ∞)`.
fn support(fam: &Family, theta: f64) -> (f64, f64, u8) {
    match fam.kind() {
        FamilyKind::Gaussian { sigma } => (theta, sigma, 0),
        FamilyKind::NormalVariance => (0.0, theta.sqrt(), 0),
        FamilyKind::LogNormal { .. } => (0.0, theta.exp(), 1),
        FamilyKind::Rayleigh => (0.0, theta.sqrt(), 1),
        FamilyKind::Weibull { k } => (0.0, theta.powf(1.0 / k), 1),
        FamilyKind::Pareto { x_m } => (x_m, x_m, 1),
        _ => (0.0, theta, 1),
    }
}

/// Numeric `KL(P_θ, P_θ')` from the reference densities: double-exponential
/// quadrature after mapping the support onto bounded intervals, or direct
/// summation until the remaining mass is below `1e-15`.
pub fn numeric_kl(fam: &Family, theta: f64, theta_prime: f64) -> f64 {
    match (density(fam, theta), density(fam, theta_prime)) {
        (Density::Cont(p), Density::Cont(q)) => {
            let (c, s, kind) = support(fam, theta);
            // y = c + s t/(1-t) maps [0,1) onto [c, ∞).
            let half = |sign: f64| {
                let g = |t: f64| {
                    if t >= 1.0 {
                        return 0.0;
                    }
                    let u = t / (1.0 - t);
                    let y = c + sign * s * u;
                    let jac = s / ((1.0 - t) * (1.0 - t));
                    let v = kl_term(p(y), q(y)) * jac;
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                };
                quadrature::double_exponential::integrate(g, 0.0, 1.0, 1e-13).integral
            };
            if kind == 0 {
                half(1.0) + half(-1.0)
            } else {
                half(1.0)
            }
        }
        (Density::Disc(p), Density::Disc(q)) => {
            let mut total = 0.0;
            let mut mass = 0.0;
            let mut y = 0u64;
            while mass < 1.0 - 1e-15 && y < 1_000_000 {
                let lp = p(y);
                mass += lp.exp();
                total += kl_term(lp, q(y));
                y += 1;
                if lp == f64::NEG_INFINITY && y > 1 && mass > 0.5 {
                    break;
                }
            }
            total
        }
        _ => unreachable!(),
    }
}

/// Reference CDF of a continuous family, `None` for count families.
pub fn reference_cdf(fam: &Family, theta: f64) -> Option<Box<dyn Fn(f64) -> f64>> {
    use statrs::distribution::ContinuousCDF;
    macro_rules! cdf {
        ($d:expr) => {{
            let d = $d.unwrap();
            Some(Box::new(move |y| d.cdf(y)))
        }};
    }
    match fam.kind() {
        FamilyKind::Gaussian { sigma } => cdf!(Normal::new(theta, sigma)),
        FamilyKind::NormalVariance => cdf!(Normal::new(0.0, theta.sqrt())),
        FamilyKind::LogNormal { sigma } => cdf!(LogNormal::new(theta, sigma)),
        FamilyKind::Gamma { shape } => cdf!(Gamma::new(shape, shape / theta)),
        FamilyKind::Exponential => cdf!(Exp::new(1.0 / theta)),
        FamilyKind::Erlang { n } => cdf!(Erlang::new(u64::from(n), f64::from(n) / theta)),
        FamilyKind::Rayleigh => cdf!(Weibull::new(2.0, theta.sqrt())),
        FamilyKind::Weibull { k } => cdf!(Weibull::new(k, theta.powf(1.0 / k))),
        FamilyKind::ScaledChiSquared { k } => cdf!(Gamma::new(k / 2.0, k / (2.0 * theta))),
        FamilyKind::Pareto { x_m } => cdf!(Pareto::new(x_m, 1.0 / theta)),
        _ => None,
    }
}

/// Reference probability mass function of a count family.
pub fn reference_pmf(fam: &Family, theta: f64) -> Option<Box<dyn Fn(u64) -> f64>> {
    match density(fam, theta) {
        Density::Disc(lp) => Some(Box::new(move |k| lp(k).exp())),
        Density::Cont(_) => None,
    }
}
