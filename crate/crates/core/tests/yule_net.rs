use fracyule::fnbp::ProcessSpec;
use fracyule::rates::*;
use fracyule::yule_net::*;
use proptest::prelude::*;
use serde_json::Value;

fn oracle() -> Value {
    serde_json::from_str(include_str!("data/yule_oracle.json")).unwrap()
}

fn rows<'a>(v: &'a Value, key: &str) -> impl Iterator<Item = Vec<f64>> + 'a {
    v[key]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
}

fn model(nu: f64, beta: f64, rates: RateSequence) -> ModelParams {
    ModelParams::new(beta, ProcessSpec::new(nu, rates).unwrap()).unwrap()
}

#[test]
fn limiting_law_is_yule_simon() {
    let o = oracle();
    for r in rows(&o, "yule_simon") {
        let (a, n, want) = (r[0], r[1] as u64, r[2]);
        // β/λ = a with β = 1
        let mp = model(1.0, 1.0, make_linear(1.0 / a).unwrap());
        let p = limiting_pmf(&mp, n).unwrap();
        assert!((p.prob(n) / want - 1.0).abs() < 1e-10, "a={a} n={n}: {} vs {want}", p.prob(n));
    }
}

#[test]
fn limiting_examples() {
    let mp = model(0.7, 2.0, make_custom(vec![1.5, 0.5]).unwrap());
    let p = limiting_pmf(&mp, 3).unwrap();
    let bnu = 2f64.powf(0.7);
    assert!((p.prob(1) - bnu / (bnu + 1.5)).abs() < 1e-15);
    assert_eq!(p.truncation_tail_bound, Some(0.0));
    assert!((p.total() - 1.0).abs() < 1e-15);
    let mp = model(0.5, 4.0, make_linear(2.0).unwrap());
    let p = limiting_pmf(&mp, 50).unwrap();
    for n in 1..=50u64 {
        assert!((p.prob(n) - 1.0 / (n * (n + 1)) as f64).abs() < 1e-15);
    }
}

#[test]
fn fractional_order_is_absorbed_into_rho() {
    let a = limiting_pmf(&model(0.5, 4.0, make_linear(2.0).unwrap()), 1000).unwrap();
    let b = limiting_pmf(&model(1.0, 1.0, make_linear(1.0).unwrap()), 1000).unwrap();
    for n in 1..=1000 {
        assert!((a.prob(n) - b.prob(n)).abs() < 1e-12);
    }
    let a = limiting_pmf(&model(0.3, 8.0, make_s1(8f64.powf(0.3) * 0.2, 30).unwrap()), 30).unwrap();
    let b = limiting_pmf(&model(1.0, 1.0, make_s1(0.2, 30).unwrap()), 30).unwrap();
    assert!(a.tv_distance(&b) < 1e-12);
}

#[test]
fn s1_matches_product_form() {
    for &(rho, n_cap) in &[(0.3, 5u64), (2.0, 12), (0.01, 40), (0.05, 200)] {
        let p = limiting_pmf(&model(1.0, 1.0, make_s1(rho, n_cap).unwrap()), n_cap).unwrap();
        let mut total = 0.0;
        for n in 1..=n_cap {
            let v = limiting_pmf_saturating_s1(rho, n_cap, n).unwrap();
            assert!((v - p.prob(n)).abs() < 1e-10, "rho={rho} N={n_cap} n={n}: {v} vs {}", p.prob(n));
            total += v;
        }
        assert!((total - 1.0).abs() < 1e-8);
    }
}

#[test]
fn s2_matches_product_form() {
    for &(rho, n_cap) in &[(0.5, 4u64), (1.0, 200), (0.1, 200), (0.005, 200), (0.0001, 200), (0.02, 1000)] {
        let p = limiting_pmf(&model(1.0, 1.0, make_s2(rho, n_cap).unwrap()), n_cap).unwrap();
        let mut total = 0.0;
        for n in 1..=n_cap {
            let v = limiting_pmf_saturating_s2(rho, n_cap, n).unwrap();
            let w = saturating_s2_product(rho, n_cap, n).unwrap();
            assert!((v - p.prob(n)).abs() < 1e-10, "rho={rho} N={n_cap} n={n}: {v} vs {}", p.prob(n));
            assert!((w - p.prob(n)).abs() < 1e-12);
            total += v;
        }
        assert!((total - 1.0).abs() < 1e-8, "rho={rho} N={n_cap}: {total}");
    }
}

#[test]
fn closed_form_at_critical_rho() {
    for &n_cap in &[10u64, 100, 200, 1000] {
        let rho = 1.0 / (n_cap + 1) as f64;
        for n in 1..=n_cap {
            let v = limiting_pmf_saturating_s2(rho, n_cap, n).unwrap();
            let want = (1.0 + 1.0 / n_cap as f64) / ((n * n + n) as f64);
            let want = if n == n_cap { 1.0 / (n_cap * n_cap) as f64 } else { want };
            assert!((v - want).abs() < 1e-10, "N={n_cap} n={n}: {v} vs {want}");
        }
    }
    assert!((limiting_pmf_saturating_s2(1.0 / 201.0, 200, 1).unwrap() - 0.5025).abs() < 1e-10);
}

#[test]
fn tail_curve_matches_high_precision_products() {
    let o = oracle();
    for r in rows(&o, "s2_top") {
        let (alpha, n_cap, want) = (r[0], r[1] as u64, r[2]);
        let c = saturation_tail_curve(alpha, &[n_cap], TailState::Top, RhoBase::NPlusOne).unwrap();
        assert!((c[0].prob / want - 1.0).abs() < 1e-9, "alpha={alpha} N={n_cap}: {} vs {want}", c[0].prob);
    }
}

#[test]
fn tail_curve_dichotomy() {
    let grid: Vec<u64> = (1..=40).map(|i| (10f64.powf(1.0 + 3.0 * i as f64 / 40.0)).round() as u64).collect();
    let up = saturation_tail_curve(0.5, &grid, TailState::Top, RhoBase::NPlusOne).unwrap();
    let down = saturation_tail_curve(1.2, &grid, TailState::Top, RhoBase::NPlusOne).unwrap();
    assert!(up.windows(2).all(|w| w[1].prob > w[0].prob));
    assert!(down.windows(2).all(|w| w[1].prob < w[0].prob));
    let at_1000 = saturation_tail_curve(1.2, &[1000], TailState::Top, RhoBase::NPlusOne).unwrap();
    assert!(at_1000[0].prob < 1e-3);
    let exact = saturation_tail_curve(1.0, &[7, 50, 400], TailState::Top, RhoBase::NPlusOne).unwrap();
    for p in exact {
        assert!((p.prob - 1.0 / (p.n_cap * p.n_cap) as f64).abs() < 1e-10);
    }
    let below = saturation_tail_curve(1.0, &[50], TailState::BelowTop, RhoBase::NMinusOne).unwrap();
    assert!(below[0].prob > 0.0 && below[0].prob < 1.0);
}

#[test]
fn finite_time_classical_matches_quadrature_oracle() {
    let o = oracle();
    for r in rows(&o, "finite_yule") {
        let (beta, lam, t, n, want) = (r[0], r[1], r[2], r[3] as u64, r[4]);
        let mp = model(1.0, beta, make_linear(lam).unwrap());
        for route in [FiniteRoute::Auto, FiniteRoute::IncompleteBeta, FiniteRoute::Contour] {
            let p = finite_time_pmf_with(&mp, t, n, route).unwrap();
            assert!((p.prob(n) - want).abs() < 1e-10, "{route:?} {r:?}: {}", p.prob(n));
        }
    }
}

#[test]
fn incomplete_beta_route_matches_quadrature_route() {
    let mp = model(1.0, 1.0, make_linear(1.0).unwrap());
    for &t in &[0.2, 1.0, 6.0] {
        let a = finite_time_pmf_with(&mp, t, 20, FiniteRoute::IncompleteBeta).unwrap();
        let q = finite_time_pmf_with(&mp, t, 20, FiniteRoute::Quadrature).unwrap();
        for n in 1..=20 {
            assert!((a.prob(n) - q.prob(n)).abs() < 1e-8);
        }
    }
}

fn split_models() -> Vec<(ModelParams, FiniteRoute)> {
    vec![
        (model(0.6, 1.0, make_linear(1.0).unwrap()), FiniteRoute::LinearSplit),
        (model(0.4, 1.0, make_linear(1.0).unwrap()), FiniteRoute::LinearSplit),
        (
            model(0.7, 1.0, make_custom((0..15).map(|r| 0.25 * 1.8f64.powi(r)).collect()).unwrap()),
            FiniteRoute::PartialFraction,
        ),
        (
            model(0.5, 0.5, make_custom((0..15).map(|r| 0.1 * 2f64.powi(r)).collect()).unwrap()),
            FiniteRoute::PartialFraction,
        ),
    ]
}

#[test]
fn split_forms_match_direct_quadrature() {
    for (mp, route) in split_models() {
        for &t in &[0.5, 1.0, 2.0, 5.0, 10.0] {
            let a = finite_time_pmf_with(&mp, t, 15, route).unwrap();
            let q = finite_time_pmf_with(&mp, t, 15, FiniteRoute::Quadrature).unwrap();
            for n in 1..=15 {
                assert!((a.prob(n) - q.prob(n)).abs() < 1e-7, "nu={} t={t} n={n}", mp.nu());
            }
        }
    }
}

#[test]
fn explicit_routes_reject_unsuitable_models() {
    let mp = model(0.8, 1.0, make_s2(0.1, 10).unwrap());
    assert!(matches!(
        finite_time_pmf_with(&mp, 1.0, 10, FiniteRoute::PartialFraction),
        Err(fracyule::Error::Routing { .. })
    ));
    assert!(matches!(
        finite_time_pmf_with(&mp, 1.0, 10, FiniteRoute::IncompleteBeta),
        Err(fracyule::Error::Routing { .. })
    ));
    let p = finite_time_pmf(&mp, 1.0, 10).unwrap();
    assert!((p.total() - 1.0).abs() < 1e-8);
}

#[test]
fn young_pages_have_one_link() {
    // 1 − P(1) ≈ λ_1 t^ν / Γ(2 + ν) as t → 0
    for (mp, _) in split_models() {
        let (nu, lam) = (mp.nu(), mp.process.rate(1));
        for &t in &[1e-6, 1e-9] {
            let p = finite_time_pmf(&mp, t, 5).unwrap();
            let lead = lam * t.powf(nu) / fracyule::specfun::rgamma(2.0 + nu).recip();
            assert!(((1.0 - p.prob(1)) / lead - 1.0).abs() < 0.02, "nu={nu} t={t}: {}", p.prob(1));
        }
    }
}

#[test]
fn finite_time_approaches_limit() {
    let cases = [
        model(1.0, 1.0, make_linear(1.0).unwrap()),
        model(0.6, 1.0, make_linear(0.7).unwrap()),
        model(0.8, 2.0, make_s1(0.3, 25).unwrap()),
        model(0.7, 1.0, make_s2(0.01, 20).unwrap()),
    ];
    for mp in cases {
        let t = 40.0 / mp.beta;
        let a = finite_time_pmf(&mp, t, 20).unwrap();
        let b = limiting_pmf(&mp, 20).unwrap();
        for n in 1..=20 {
            assert!((a.prob(n) - b.prob(n)).abs() < 1e-6, "nu={} n={n}: {} vs {}", mp.nu(), a.prob(n), b.prob(n));
        }
    }
}

#[test]
fn saturating_finite_time_normalizes() {
    for mp in [
        model(0.5, 1.0, make_s1(0.2, 20).unwrap()),
        model(0.7, 1.0, make_s2(0.05, 20).unwrap()),
        model(1.0, 1.0, make_s1(0.2, 20).unwrap()),
    ] {
        for &t in &[0.1, 1.0, 8.0] {
            let p = finite_time_pmf(&mp, t, 20).unwrap();
            assert!((p.total() - 1.0).abs() < 1e-8, "nu={} t={t}: {}", mp.nu(), p.total());
        }
    }
}

#[test]
fn limiting_mean_matches_pmf_mean() {
    let mut models = vec![model(1.0, 1.0, make_custom(vec![1.0, 2.0]).unwrap())];
    for &n_cap in &[5u64, 20, 50] {
        models.push(model(1.0, 1.0, make_s1(0.3, n_cap).unwrap()));
        models.push(model(0.6, 2.0, make_saturating(3.0, 0.5, 1.5, n_cap).unwrap()));
        models.push(model(0.8, 1.0, make_s2(0.05, n_cap).unwrap()));
    }
    for mp in models {
        let n = mp.process.rates.support_max().unwrap();
        let m = limiting_mean(&mp, n).unwrap();
        let p = limiting_pmf(&mp, n).unwrap();
        assert!((m.value - p.mean()).abs() < 1e-8, "{:?}: {m:?} vs {}", mp.process.rates, p.mean());
    }
    let s1: f64 = (1..=5).map(|n| n as f64 * limiting_pmf_saturating_s1(0.3, 5, n).unwrap()).sum();
    let m = limiting_mean(&model(1.0, 1.0, make_s1(0.3, 5).unwrap()), 4).unwrap();
    assert!((m.value - s1).abs() < 1e-9);
}

#[test]
fn finite_time_mean_matches_pmf_mean() {
    for mp in [
        model(1.0, 1.0, make_s1(0.3, 12).unwrap()),
        model(0.6, 1.0, make_s1(0.3, 12).unwrap()),
        model(0.7, 1.5, make_s2(0.05, 12).unwrap()),
        model(0.5, 0.5, make_custom(vec![0.3, 1.1, 2.0, 4.5]).unwrap()),
    ] {
        assert_eq!(finite_time_mean(&mp, 0.0, 50).unwrap().value, 1.0);
        for &t in &[0.3, 2.0, 9.0] {
            let n = mp.process.rates.support_max().unwrap();
            let m = finite_time_mean(&mp, t, n).unwrap();
            let p = finite_time_pmf(&mp, t, n).unwrap();
            assert!((m.value - p.mean()).abs() < 1e-8, "nu={} t={t}: {m:?} vs {}", mp.nu(), p.mean());
        }
    }
    // linear Yule: β/(1−e^{−βt}) ∫_0^t e^{−βy} e^{λy} dy with β = 2, λ = 1
    let mp = model(1.0, 2.0, make_linear(1.0).unwrap());
    let t: f64 = 3.0;
    let want = 2.0 * (1.0 - (-t).exp()) / (1.0 - (-2.0 * t).exp());
    let m = finite_time_mean(&mp, t, 500).unwrap();
    assert!((m.value - want).abs() < 1e-8, "{m:?} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn limiting_pmf_depends_only_on_rho(nu in 0.1f64..=1.0, beta in 0.1f64..10.0, rho in 0.05f64..5.0, n_cap in 2u64..60) {
        let bnu = beta.powf(nu);
        let a = limiting_pmf(&model(nu, beta, make_s1(rho * bnu, n_cap).unwrap()), n_cap).unwrap();
        let b = limiting_pmf(&model(1.0, 1.0, make_s1(rho, n_cap).unwrap()), n_cap).unwrap();
        for n in 1..=n_cap {
            prop_assert!((a.prob(n) - b.prob(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn s2_forms_agree(rho in 1e-4f64..10.0, n_cap in 2u64..300) {
        let mut total = 0.0;
        for n in 1..=n_cap {
            let v = limiting_pmf_saturating_s2(rho, n_cap, n).unwrap();
            let w = saturating_s2_product(rho, n_cap, n).unwrap();
            prop_assert!((v - w).abs() < 1e-10);
            total += v;
        }
        prop_assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn limiting_pmf_with_tail_is_normalized(nu in 0.1f64..=1.0, beta in 0.1f64..5.0, lam in 0.05f64..5.0, n_max in 1u64..2000) {
        let p = limiting_pmf(&model(nu, beta, make_linear(lam).unwrap()), n_max).unwrap();
        prop_assert!((p.total() + p.truncation_tail_bound.unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(p.probs.windows(2).all(|w| w[1] <= w[0]));
    }
}
