use std::f64::consts::PI;

use kdvb::diagnostics::decay_fit;
use kdvb::dynamics::DampingKind;
use kdvb::solver::{etdrk4_step, linear_propagator, picard_solve, simulate, simulate_from};
use kdvb::spectral::{inverse, sobolev_norm, transform};
use kdvb::{DampingSpec, Field, Grid, InitialCondition, NonlinearitySpec, SimConfig};
use proptest::prelude::*;

fn burgers(horizon: f64, dt: f64) -> SimConfig {
    SimConfig {
        dt,
        horizon,
        snapshot_every: (horizon / dt).round() as usize,
        ..SimConfig::default()
    }
}

#[test]
fn linear_mode_decays_at_exact_rate() {
    let cfg = SimConfig {
        half_length: PI,
        n_points: 256,
        dt: 1e-3,
        horizon: 4.0,
        snapshot_every: 1000,
        nonlinearity: NonlinearitySpec::none(),
        damping: DampingSpec::Constant { lambda0: 0.5 },
        initial_condition: InitialCondition::SingleMode { k: 1, amplitude: 1.0 },
        ..SimConfig::default()
    };
    let tr = simulate(&cfg).unwrap();
    let n0 = tr.ledger[0].l2_sq.sqrt();
    assert!((n0 - PI.sqrt()).abs() < 1e-12);
    for e in &tr.ledger {
        let exact = n0 * (-1.5 * e.t).exp();
        assert!((e.l2_sq.sqrt() - exact).abs() <= 1e-8 * exact, "t = {}", e.t);
    }
    let fit = decay_fit(&tr.l2_series(), (0.8, 3.6)).unwrap();
    assert!((fit.rate - 1.5).abs() < 1e-6);
}

#[test]
fn one_step_without_nonlinearity_is_the_propagator() {
    let cfg = SimConfig {
        half_length: PI,
        n_points: 64,
        nonlinearity: NonlinearitySpec::none(),
        ..SimConfig::default()
    };
    let g = cfg.grid().unwrap();
    for k in [1usize, 3, 7] {
        let u = InitialCondition::SingleMode { k, amplitude: 1.0 }.sample(&g).unwrap();
        let stepped = etdrk4_step(&u, &cfg, 0.01).unwrap();
        let exact = inverse(&linear_propagator(&transform(&u), 0.01).unwrap());
        assert!(stepped.sub(&exact).unwrap().sup_norm() < 1e-12);
    }
}

#[test]
fn etdrk4_is_fourth_order() {
    let end = |dt: f64| simulate(&burgers(1.0, dt)).unwrap().last().clone();
    let a = end(0.1);
    let b = end(0.05);
    let c = end(0.025);
    let order = (a.sub(&b).unwrap().l2_norm() / b.sub(&c).unwrap().l2_norm()).log2();
    assert!(order >= 3.8, "observed order {order}");
}

#[test]
fn replay_is_bit_identical() {
    let cfg = SimConfig {
        initial_condition: InitialCondition::RandomBandLimited {
            seed: 42,
            cutoff: 40,
            amplitude: 1.0,
        },
        damping: DampingSpec::Indefinite {
            lambda0: 0.2,
            bump_amplitude: 0.22,
        },
        ..burgers(0.5, 1e-3)
    };
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.snapshots, b.snapshots);
}

#[test]
fn energy_is_monotone_under_nonnegative_damping() {
    for damping in [
        DampingSpec::Zero,
        DampingSpec::Constant { lambda0: 0.5 },
        DampingSpec::Localized {
            lambda0: 0.5,
            alpha: -5.0,
            beta: 5.0,
            width: 1.0,
        },
    ] {
        let tr = simulate(&SimConfig {
            damping,
            ..burgers(2.0, 1e-3)
        })
        .unwrap();
        for w in tr.ledger.windows(2) {
            assert!(
                w[1].l2_sq <= w[0].l2_sq * (1.0 + 1e-9),
                "{:?} at t = {}",
                damping.kind(),
                w[1].t
            );
        }
    }
}

#[test]
fn constant_damping_obeys_the_energy_law() {
    let tr = simulate(&SimConfig {
        damping: DampingSpec::Constant { lambda0: 0.5 },
        ..burgers(5.0, 1e-3)
    })
    .unwrap();
    assert_eq!(tr.config.damping.kind(), DampingKind::Constant);
    let n0 = tr.ledger[0].l2_sq.sqrt();
    for e in &tr.ledger {
        assert!(e.l2_sq.sqrt() <= (-0.5 * e.t).exp() * n0 + 1e-8);
    }
}

#[test]
fn smoothing_bound_is_attained_near_the_optimal_mode() {
    // With L = pi * sqrt(2) the first mode has xi^2 = 1/2, the maximizer of (1 + y)^3 e^{-2y}.
    let oracle = 1.5f64.powf(1.5) * (-0.5f64).exp();
    let g = Grid::new(PI * 2f64.sqrt(), 64).unwrap();
    let u = InitialCondition::SingleMode { k: 1, amplitude: 1.0 }
        .sample(&g)
        .unwrap();
    let out = inverse(&linear_propagator(&transform(&u), 1.0).unwrap());
    let ratio = sobolev_norm(&out, 3.0).unwrap() / u.l2_norm();
    assert!((ratio - oracle).abs() < 1e-12, "{ratio} vs {oracle}");
    assert!(oracle <= 1.115);
}

#[test]
fn picard_matches_fine_etdrk4() {
    let cfg = SimConfig {
        initial_condition: InitialCondition::Gaussian {
            amplitude: 0.1,
            width: 2.0,
            center: 0.0,
        },
        ..SimConfig::default()
    };
    let g = cfg.grid().unwrap();
    let u0 = cfg.initial_condition.sample(&g).unwrap();
    let report = picard_solve(&u0, &cfg, 0.2, 10, 64).unwrap();
    assert!(report.contraction_ratios.iter().all(|&q| q < 0.5));
    let reference = simulate_from(
        &SimConfig {
            dt: 1e-4,
            horizon: 0.2,
            snapshot_every: 2000,
            ..cfg
        },
        &u0,
    )
    .unwrap();
    let rel = report.final_iterate().sub(reference.last()).unwrap().l2_norm() / reference.last().l2_norm();
    assert!(rel < 1e-4, "relative gap {rel}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_law(seed in 0u64..10_000, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let g = Grid::new(8.0, 128).unwrap();
        let s = transform(&Field::random_band_limited(&g, seed, 63, 1.0).unwrap());
        let ab = linear_propagator(&linear_propagator(&s, t1).unwrap(), t2).unwrap();
        let direct = linear_propagator(&s, t1 + t2).unwrap();
        for (a, b) in ab.coeffs().iter().zip(direct.coeffs()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn propagator_contracts(seed in 0u64..10_000, t in 0.0f64..5.0) {
        let g = Grid::new(8.0, 128).unwrap();
        let f = Field::random_band_limited(&g, seed, 63, 1.0).unwrap();
        let out = inverse(&linear_propagator(&transform(&f), t).unwrap());
        prop_assert!(out.l2_norm() <= f.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn rough_data_is_smoothed(seed in 0u64..10_000, cutoff in 4usize..63) {
        let g = Grid::new(8.0, 128).unwrap();
        let f = Field::random_band_limited(&g, seed, cutoff, 1.0).unwrap();
        let out = inverse(&linear_propagator(&transform(&f), 1.0).unwrap());
        prop_assert!(sobolev_norm(&out, 3.0).unwrap() <= 1.115 * f.l2_norm());
    }
}
