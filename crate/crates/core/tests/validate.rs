use fracyule::fnbp::{state_laplace, state_pmf, ProcessSpec};
use fracyule::rates::*;
use fracyule::specfun::rgamma;
use fracyule::validate::*;

fn spec(nu: f64, rates: RateSequence) -> ProcessSpec {
    ProcessSpec::new(nu, rates).unwrap()
}

const GRID: [f64; 3] = [0.5, 1.0, 2.0];

#[test]
fn exponential_solves_the_classical_equation() {
    let s = spec(1.0, make_custom(vec![1.0]).unwrap());
    let r = caputo_residual(&s, 1, &[0.5, 1.0], 1e-4, 1e-8).unwrap();
    assert_eq!(r.status, ResidualStatus::Pass, "{r:?}");
}

#[test]
fn mittag_leffler_refines_at_the_l1_rate() {
    let s = spec(0.6, make_custom(vec![1.0]).unwrap());
    let f = refinement_factor(&s, 1, &GRID, 1e-3).unwrap();
    assert!((f / 2f64.powf(1.4) - 1.0).abs() < 0.15, "{f}");
}

#[test]
fn third_state_residual_is_small() {
    let s = spec(0.8, make_custom(vec![1.0, 2.0, 3.0]).unwrap());
    let r = caputo_residual(&s, 3, &GRID, 1e-3, 1e-4).unwrap();
    assert_eq!(r.status, ResidualStatus::Pass, "{r:?}");
}

#[test]
fn l1_scheme_order_on_smooth_functions() {
    // u = t², D^ν u = 2 t^{2−ν}/Γ(3−ν); u = t³, D^ν u = 6 t^{3−ν}/Γ(4−ν)
    let cases: [(fn(f64) -> f64, fn(f64, f64) -> f64); 2] = [
        (|t| t * t, |nu, t| 2.0 * t.powf(2.0 - nu) * rgamma(3.0 - nu)),
        (|t| t * t * t, |nu, t| 6.0 * t.powf(3.0 - nu) * rgamma(4.0 - nu)),
    ];
    for &nu in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for (u, d) in cases {
            let err = |h: f64| {
                let k = (1.0 / h).round() as usize;
                let samples: Vec<f64> = (0..=k).map(|j| u(j as f64 * h)).collect();
                (L1Caputo::new(nu, h, k).at(&samples, k) - d(nu, 1.0)).abs()
            };
            let order = (err(1e-3) / err(5e-4)).log2();
            assert!(order >= 1.8 - nu && order <= 2.2 - nu, "nu={nu}: {order}");
        }
    }
}

#[test]
fn state_probability_refinement_order() {
    // p_n behaves like a power t^{ν} near the origin, which caps the order
    // at min(2 − ν, 1 + ν)
    for &nu in &[0.4, 0.6, 0.8] {
        let s = spec(nu, make_custom(vec![1.0, 2.0, 3.0]).unwrap());
        let expected = (2.0 - nu).min(1.0 + nu);
        for n in 1..=3 {
            let order = refinement_factor(&s, n, &GRID, 1e-3).unwrap().log2();
            assert!((order - expected).abs() < 0.35, "nu={nu} n={n}: {order}");
        }
    }
}

#[test]
fn forward_equations_hold_on_every_route() {
    let cases = [
        (spec(0.5, make_linear(1.0).unwrap()), 4),
        (spec(0.7, make_s1(0.3, 6).unwrap()), 6),
        (spec(0.9, make_s2(0.4, 5).unwrap()), 5),
        (ProcessSpec::with_start(0.6, make_linear(0.5).unwrap(), 3).unwrap(), 5),
        (spec(0.75, make_custom(vec![1.0, 2.0, 1.0, 2.0]).unwrap()), 4),
    ];
    for (s, n) in cases {
        for m in s.start_count..=n {
            let r = caputo_residual(&s, m, &[1.0, 2.0], 1e-3, 1e-3).unwrap();
            assert_eq!(r.status, ResidualStatus::Pass, "{s:?} n={m}: {r:?}");
        }
    }
}

#[test]
fn laplace_examples() {
    let s = spec(1.0, make_linear(1.0).unwrap());
    let c = laplace_quadrature_check(&s, 1.0, 1, 60.0).unwrap();
    assert!(c.rel_error < 1e-10 && (c.analytic - 0.5).abs() < 1e-15);
    let s = spec(0.5, make_custom(vec![1.0, 3.0]).unwrap());
    assert!(laplace_quadrature_check(&s, 2.0, 2, 30.0).unwrap().rel_error < 1e-6);
    for &(nu, z) in &[(0.3, 0.5), (0.7, 3.0), (0.95, 1.0)] {
        let s = spec(nu, make_custom(vec![1.7]).unwrap());
        let c = laplace_quadrature_check(&s, z, 1, 60.0 / z).unwrap();
        let want = z.powf(nu - 1.0) / (z.powf(nu) + 1.7);
        assert!((c.analytic - want).abs() < 1e-14 * want);
        assert!(c.rel_error < 1e-8, "nu={nu}: {c:?}");
    }
}

#[test]
fn laplace_consistency_grid() {
    let rate_sets = [make_linear(1.0).unwrap(), make_s1(0.5, 8).unwrap(), make_s2(0.2, 6).unwrap()];
    for rates in rate_sets {
        for &nu in &[0.3, 0.6, 1.0] {
            let s = spec(nu, rates.clone());
            for &z in &[0.5, 2.0] {
                for n in [1, 3, 6] {
                    let c = laplace_quadrature_check(&s, z, n, 80.0 / z).unwrap();
                    assert!(c.rel_error < 1e-6, "nu={nu} z={z} n={n}: {c:?}");
                }
            }
        }
    }
}

#[test]
fn state_probabilities_start_at_the_initial_state() {
    let s = spec(0.5, make_linear(1.0).unwrap());
    let p = state_pmf(&s, 0.0, 3).unwrap();
    assert_eq!(p.probs, vec![1.0, 0.0, 0.0]);
    assert!(state_laplace(&s, 1.0, 1).unwrap() > 0.0);
}
