use std::f64::consts::PI;

use approx::assert_relative_eq;
use kdvb::diagnostics::{
    decay_fit, dissipation_residual, gn_check, lipschitz_probe, observability_ratio, sobolev_series,
    weighted_identity_residual,
};
use kdvb::solver::simulate;
use kdvb::{DampingSpec, Field, Grid, InitialCondition, NonlinearitySpec, SimConfig};
use proptest::prelude::*;

fn linear_mode(horizon: f64) -> SimConfig {
    SimConfig {
        half_length: PI,
        n_points: 64,
        dt: 1e-3,
        horizon,
        snapshot_every: 100,
        nonlinearity: NonlinearitySpec::none(),
        damping: DampingSpec::Constant { lambda0: 0.5 },
        initial_condition: InitialCondition::SingleMode { k: 1, amplitude: 1.0 },
        ..SimConfig::default()
    }
}

#[test]
fn observability_ratio_of_a_single_mode() {
    // ||u||^2 = pi e^{-3t}; the denominator integrates (1 + 0.5) pi e^{-3t} over [0, 2].
    let tr = simulate(&linear_mode(2.0)).unwrap();
    let denom = 1.5 * PI * (1.0 - (-6.0f64).exp()) / 3.0;
    let oracle = PI / denom;
    assert_relative_eq!(oracle, 2.0 / (1.0 - (-6.0f64).exp()), max_relative = 1e-15);
    assert_relative_eq!(observability_ratio(&tr), oracle, max_relative = 1e-6);
}

#[test]
fn identities_hold_for_a_single_mode() {
    // Trapezoid error is about 9 dt^2 / 12 here, so the identity needs dt = 1e-4 to reach 1e-8.
    let fine = SimConfig {
        dt: 1e-4,
        snapshot_every: 1000,
        ..linear_mode(2.0)
    };
    let tr = simulate(&fine).unwrap();
    assert!(dissipation_residual(&tr).iter().all(|r| r.abs() < 1e-8));
    assert!(weighted_identity_residual(&tr).abs() < 1e-6);

    // Closed form of the right-hand side of the weighted identity with T = 2, rate 3.
    let m = |k: f64| (1.0 - (-6.0f64).exp()) / k;
    let int_t = (1.0 - 7.0 * (-6.0f64).exp()) / 9.0;
    let rhs = 0.5 * PI * m(3.0) + 1.5 * PI * (2.0 * m(3.0) - int_t);
    assert_relative_eq!(rhs, PI, max_relative = 1e-12);
}

#[test]
fn burgers_kdv_identities() {
    let tr = simulate(&SimConfig::default()).unwrap();
    let worst = dissipation_residual(&tr).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(worst < 1e-6, "{worst}");
    assert!(weighted_identity_residual(&tr).abs() < 1e-5);
    let h3 = sobolev_series(&tr, 3.0).unwrap();
    let bound = h3.iter().filter(|(t, _)| *t >= 0.5).fold(0.0f64, |m, &(_, v)| m.max(v));
    assert!(bound.is_finite() && bound < 10.0);
}

#[test]
fn decay_rate_of_the_exact_mode() {
    let tr = simulate(&linear_mode(4.0)).unwrap();
    let fit = decay_fit(&tr.l2_series(), (0.8, 3.6)).unwrap();
    assert!((fit.rate - 1.5).abs() < 1e-6);
    assert!(fit.r_squared > 1.0 - 1e-10);
}

#[test]
fn lipschitz_ratio_stabilizes() {
    let cfg = SimConfig {
        horizon: 2.0,
        snapshot_every: 100,
        ..SimConfig::default()
    };
    let g = cfg.grid().unwrap();
    let u0 = cfg.initial_condition.sample(&g).unwrap();
    let bump = Field::from_fn(&g, |x: f64| (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
    let probe = |eps: f64| lipschitz_probe(&cfg, &u0, &u0.add(&bump.scaled(eps)).unwrap()).unwrap();
    let a = probe(1e-3);
    let b = probe(5e-4);
    assert!(a.l2_ratio.is_finite() && a.h1_ratio.is_finite());
    assert!((a.l2_ratio / b.l2_ratio - 1.0).abs() < 0.05);
    assert_eq!(lipschitz_probe(&cfg, &u0, &u0).unwrap().l2_ratio, 0.0);

    let linear = SimConfig {
        nonlinearity: NonlinearitySpec::none(),
        damping: DampingSpec::Constant { lambda0: 0.5 },
        ..cfg
    };
    let r = lipschitz_probe(&linear, &u0, &u0.add(&bump).unwrap()).unwrap();
    assert!(r.l2_ratio <= 1.0);
}

#[test]
fn gn_margin_over_localized_fields() {
    let g = Grid::new(32.0, 512).unwrap();
    let envelope: Vec<f64> = g.points().iter().map(|x| (-(x / 5.0).powi(2)).exp()).collect();
    let mut worst = f64::INFINITY;
    for seed in 0..1000 {
        let noise = Field::random_band_limited(&g, seed, 80, 1.0).unwrap();
        let values = noise.values().iter().zip(&envelope).map(|(v, e)| v * e).collect();
        let f = Field::new(&g, values).unwrap();
        worst = worst.min(gn_check(&f).unwrap());
    }
    assert!(worst >= -1e-9, "{worst}");
    assert_eq!(gn_check(&Field::zeros(&g)).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_fits_are_exact(amp in 0.1f64..10.0, rate in 0.01f64..3.0) {
        let series: Vec<(f64, f64)> = (0..=200).map(|i| {
            let t = i as f64 * 0.025;
            (t, amp * (-rate * t).exp())
        }).collect();
        let fit = decay_fit(&series, (0.0, 5.0)).unwrap();
        prop_assert!((fit.rate - rate).abs() < 1e-10);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }
}
