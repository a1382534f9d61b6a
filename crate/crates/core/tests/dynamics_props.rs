use approx::assert_relative_eq;
use kdvb::dynamics::{
    c_p, check_hyp_a, check_hyp_b, gaussian_bump_lp_norm, make_damping, rhs_nonlinear, NonlinearForm,
};
use kdvb::spectral::l2_inner;
use kdvb::{DampingSpec, Field, Grid, NonlinearitySpec};
use proptest::prelude::*;

#[test]
fn indefinite_preset_margin() {
    let g = Grid::new(32.0, 512).unwrap();
    let d = make_damping(
        DampingSpec::Indefinite {
            lambda0: 0.2,
            bump_amplitude: 0.22,
        },
        &g,
    )
    .unwrap();
    let r = check_hyp_b(&d, 1.0).unwrap();
    let oracle_lhs = 0.22 * std::f64::consts::PI.sqrt();
    assert!(r.pass);
    assert_relative_eq!(r.lhs, oracle_lhs, max_relative = 1e-8);
    assert_relative_eq!(r.rhs, 0.2f64.sqrt(), max_relative = 1e-12);
    assert!((r.margin - (0.4472 - 0.3899)).abs() < 1e-3);
    assert_eq!(c_p(1.0), 1.0);
    assert_eq!(c_p(2.0), 0.75);
}

#[test]
fn lp_norm_quadrature_matches_closed_form() {
    let g = Grid::new(32.0, 1024).unwrap();
    for p in [1.0, 1.5, 2.0, 3.0] {
        let d = make_damping(
            DampingSpec::Indefinite {
                lambda0: 0.5,
                bump_amplitude: 0.3,
            },
            &g,
        )
        .unwrap();
        let r = check_hyp_b(&d, p).unwrap();
        assert_relative_eq!(r.lhs, gaussian_bump_lp_norm(0.3, p), max_relative = 1e-8);
    }
}

#[test]
fn localized_preset_passes_hyp_a() {
    let g = Grid::new(32.0, 512).unwrap();
    let d = make_damping(
        DampingSpec::Localized {
            lambda0: 1.0,
            alpha: -5.0,
            beta: 5.0,
            width: 1.0,
        },
        &g,
    )
    .unwrap();
    assert!(check_hyp_a(&d).pass);
    let z = make_damping(DampingSpec::Zero, &g).unwrap();
    assert!(!check_hyp_a(&z).pass);
}

fn localized_field(seed: u64) -> Field {
    let g = Grid::new(32.0, 512).unwrap();
    let noise = Field::random_band_limited(&g, seed, 60, 1.0).unwrap();
    let values = noise
        .values()
        .iter()
        .zip(g.points())
        .map(|(v, x)| v * (-(x / 6.0).powi(2)).exp())
        .collect();
    Field::new(&g, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn primitive_derivative_is_a(p in 1.0f64..5.0, mu in -10.0f64..10.0, form in 0usize..3) {
        let form = [NonlinearForm::Identity, NonlinearForm::SignedPower, NonlinearForm::AbsPower][form];
        let s = NonlinearitySpec::new(form, p, 1.0).unwrap();
        let h = 1e-5 * mu.abs().max(1.0);
        prop_assume!(mu.abs() > 2.0 * h);
        let fd = (s.a_primitive(mu + h) - s.a_primitive(mu - h)) / (2.0 * h);
        let a = s.a_eval(mu);
        prop_assert!((fd - a).abs() <= 1e-6 * a.abs().max(1.0), "{fd} vs {a}");
    }

    #[test]
    fn scaling_lambda1_never_helps(amp in 0.01f64..1.0, tau in 1.0f64..10.0, p in 1.0f64..4.0) {
        let g = Grid::new(32.0, 256).unwrap();
        let base = make_damping(DampingSpec::Indefinite { lambda0: 0.2, bump_amplitude: amp }, &g).unwrap();
        let big = make_damping(DampingSpec::Indefinite { lambda0: 0.2, bump_amplitude: amp * tau }, &g).unwrap();
        let r0 = check_hyp_b(&base, p).unwrap();
        let r1 = check_hyp_b(&big, p).unwrap();
        prop_assert!(r1.lhs >= r0.lhs);
        prop_assert!(r0.pass || !r1.pass);
    }

    // Odd p makes the primitive a polynomial, so the discrete identity is exact.
    #[test]
    fn flux_is_orthogonal_to_the_field(seed in 0u64..10_000, p in prop::sample::select(vec![1u32, 3, 5])) {
        let u = localized_field(seed).scaled(0.5);
        let g = u.grid().clone();
        let zero = make_damping(DampingSpec::Zero, &g).unwrap();
        let spec = NonlinearitySpec::signed_power(p as f64);
        let n = rhs_nonlinear(&u, &spec, &zero).unwrap();
        let dot = l2_inner(&n, &u).unwrap();
        prop_assert!(dot.abs() < 1e-9, "dot {dot}");
    }
}
