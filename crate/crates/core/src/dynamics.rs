//! Nonlinearity `a(u)`, damping `b(x)`, the damping hypotheses and the
//! spatial right-hand side `N(u) = -d/dx A(u) - b u`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{dealias_in_place, derivative_symbol, Field, Grid};

/// Shape of the convection coefficient `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NonlinearForm {
    /// `a = 0`: the linear KdV-Burgers flow.
    None,
    /// `a(mu) = mu`: classical KdV-Burgers.
    Identity,
    /// `a(mu) = mu |mu|^(p-1)`.
    SignedPower,
    /// `a(mu) = |mu|^p`.
    AbsPower,
}

impl NonlinearForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Identity => "identity",
            Self::SignedPower => "signed_power",
            Self::AbsPower => "abs_power",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" | "zero" => Some(Self::None),
            "identity" => Some(Self::Identity),
            "signed_power" => Some(Self::SignedPower),
            "abs_power" => Some(Self::AbsPower),
            _ => None,
        }
    }
}

/// Anything that can play the role of `a` in the growth check.
pub trait Nonlinearity<S: Real> {
    fn a(&self, mu: S) -> S;
    /// Growth exponent `p`.
    fn exponent(&self) -> S;
    /// Growth constant `C`.
    fn growth_constant(&self) -> S;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearitySpec<S: Real> {
    pub form: NonlinearForm,
    pub p: S,
    pub growth_constant: S,
}

impl<S: Real> NonlinearitySpec<S> {
    pub fn new(form: NonlinearForm, p: S, growth_constant: S) -> Result<Self> {
        if !(p >= S::one()) || !p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("growth exponent must be >= 1, got {p}"),
            });
        }
        if !(growth_constant > S::zero()) || !growth_constant.is_finite() {
            return Err(Error::InvalidParameter {
                name: "growth_constant",
                reason: format!("must be positive, got {growth_constant}"),
            });
        }
        Ok(Self {
            form,
            p,
            growth_constant,
        })
    }

    pub fn identity() -> Self {
        Self {
            form: NonlinearForm::Identity,
            p: S::one(),
            growth_constant: S::one(),
        }
    }

    pub fn none() -> Self {
        Self {
            form: NonlinearForm::None,
            p: S::one(),
            growth_constant: S::one(),
        }
    }

    pub fn signed_power(p: S) -> Self {
        Self {
            form: NonlinearForm::SignedPower,
            p,
            growth_constant: p.max(S::one()),
        }
    }

    /// `a(mu)`.
    pub fn a_eval(&self, mu: S) -> S {
        match self.form {
            NonlinearForm::None => S::zero(),
            NonlinearForm::Identity => mu,
            NonlinearForm::SignedPower => mu * mu.abs().powf(self.p - S::one()),
            NonlinearForm::AbsPower => mu.abs().powf(self.p),
        }
    }

    /// `A(mu) = int_0^mu a`.
    pub fn a_primitive(&self, mu: S) -> S {
        let q = self.p + S::one();
        match self.form {
            NonlinearForm::None => S::zero(),
            NonlinearForm::Identity => mu * mu / S::lit(2.0),
            NonlinearForm::SignedPower => mu.abs().powf(q) / q,
            NonlinearForm::AbsPower => mu.signum() * mu.abs().powf(q) / q,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.form == NonlinearForm::None
    }
}

impl<S: Real> Nonlinearity<S> for NonlinearitySpec<S> {
    fn a(&self, mu: S) -> S {
        self.a_eval(mu)
    }
    fn exponent(&self) -> S {
        self.p
    }
    fn growth_constant(&self) -> S {
        self.growth_constant
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthReport<S: Real> {
    pub pass: bool,
    /// Smallest `(bound - |a^(j)|) / bound` over all samples and orders.
    pub worst_margin: S,
    pub worst_at: S,
    /// Derivative order `j` at which the worst margin occurred.
    pub worst_order: u32,
}

/// Relative slack granted to the finite-difference derivatives.
const GROWTH_FD_SLACK: f64 = 1e-6;

/// Samples `|a^(j)(mu)| <= C (1 + |mu|^(p-j))` on `[-range_max, range_max]`,
/// `j = 0, 1` and additionally `j = 2` when `p >= 2`.
pub fn check_growth<S: Real, N: Nonlinearity<S>>(n: &N, range_max: S, n_samples: usize) -> Result<GrowthReport<S>> {
    if !(range_max > S::zero()) {
        return Err(Error::InvalidParameter {
            name: "range_max",
            reason: "must be positive".into(),
        });
    }
    let samples = n_samples.max(2);
    let p = n.exponent();
    let c = n.growth_constant();
    let max_order = if p >= S::lit(2.0) { 2 } else { 1 };
    let mut report = GrowthReport {
        pass: true,
        worst_margin: S::infinity(),
        worst_at: S::zero(),
        worst_order: 0,
    };
    for i in 0..samples {
        let mu = -range_max + (range_max + range_max) * S::from_count(i) / S::from_count(samples - 1);
        let scale = S::one().max(mu.abs());
        for order in 0..=max_order {
            let value = match order {
                0 => n.a(mu),
                1 => {
                    let h = S::lit(1e-6) * scale;
                    (n.a(mu + h) - n.a(mu - h)) / (h + h)
                }
                _ => {
                    let h = S::lit(1e-4) * scale;
                    (n.a(mu + h) - n.a(mu) - n.a(mu) + n.a(mu - h)) / (h * h)
                }
            };
            let bound = c * (S::one() + mu.abs().powf(p - S::from_count(order as usize)));
            let margin = if value.is_finite() {
                (bound - value.abs()) / bound
            } else {
                S::neg_infinity()
            };
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_at = mu;
                report.worst_order = order;
            }
        }
    }
    report.pass = report.worst_margin >= -S::lit(GROWTH_FD_SLACK);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DampingKind {
    Zero,
    Constant,
    Indefinite,
    Localized,
}

impl DampingKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Constant => "constant",
            Self::Indefinite => "indefinite",
            Self::Localized => "localized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(Self::Zero),
            "constant" => Some(Self::Constant),
            "indefinite" => Some(Self::Indefinite),
            "localized" => Some(Self::Localized),
            _ => None,
        }
    }
}

/// Parameters of a damping profile, independent of any grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DampingSpec<S: Real> {
    Zero,
    Constant {
        lambda0: S,
    },
    /// `b(x) = lambda0 - bump_amplitude * exp(-x^2)`.
    Indefinite {
        lambda0: S,
        bump_amplitude: S,
    },
    /// `b(x) = lambda0 (1 - bump(x))` with the bump supported in `(alpha, beta)`.
    Localized {
        lambda0: S,
        alpha: S,
        beta: S,
        width: S,
    },
}

impl<S: Real> DampingSpec<S> {
    pub fn kind(&self) -> DampingKind {
        match self {
            Self::Zero => DampingKind::Zero,
            Self::Constant { .. } => DampingKind::Constant,
            Self::Indefinite { .. } => DampingKind::Indefinite,
            Self::Localized { .. } => DampingKind::Localized,
        }
    }

    pub fn lambda0(&self) -> S {
        match *self {
            Self::Zero => S::zero(),
            Self::Constant { lambda0 } | Self::Indefinite { lambda0, .. } | Self::Localized { lambda0, .. } => lambda0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        match *self {
            Self::Zero => Ok(()),
            Self::Constant { lambda0 } => {
                if lambda0 > S::zero() && lambda0.is_finite() {
                    Ok(())
                } else {
                    bad("lambda0", "constant damping needs lambda0 > 0")
                }
            }
            Self::Indefinite {
                lambda0,
                bump_amplitude,
            } => {
                if !(lambda0 > S::zero() && lambda0.is_finite()) {
                    bad("lambda0", "indefinite damping needs lambda0 > 0")
                } else if !(bump_amplitude >= S::zero() && bump_amplitude.is_finite()) {
                    bad("amp", "bump amplitude must be >= 0")
                } else {
                    Ok(())
                }
            }
            Self::Localized {
                lambda0,
                alpha,
                beta,
                width,
            } => {
                if !(lambda0 >= S::zero() && lambda0.is_finite()) {
                    bad("lambda0", "must be >= 0")
                } else if !(alpha < beta) {
                    bad("alpha", "need alpha < beta")
                } else if !(width > S::zero()) {
                    bad("width", "transition width must be positive for a C^1 profile")
                } else if width > (beta - alpha) / S::lit(2.0) {
                    bad("width", "transition width exceeds (beta - alpha) / 2")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// `b(x)`.
    pub fn eval(&self, x: S) -> S {
        match *self {
            Self::Zero => S::zero(),
            Self::Constant { lambda0 } => lambda0,
            Self::Indefinite {
                lambda0,
                bump_amplitude,
            } => lambda0 - bump_amplitude * (-x * x).exp(),
            Self::Localized {
                lambda0,
                alpha,
                beta,
                width,
            } => lambda0 * (S::one() - plateau(x, alpha, beta, width)),
        }
    }

    /// The `lambda1` part of `b = lambda0 + lambda1`, when the split is explicit.
    pub fn lambda1(&self, x: S) -> Option<S> {
        match *self {
            Self::Constant { .. } => Some(S::zero()),
            Self::Indefinite { bump_amplitude, .. } => Some(-bump_amplitude * (-x * x).exp()),
            _ => None,
        }
    }

    /// Interval on which hyp-a allows `b` to vanish.
    pub fn free_interval(&self) -> (S, S) {
        match *self {
            Self::Localized { alpha, beta, .. } => (alpha, beta),
            _ => (S::zero(), S::zero()),
        }
    }
}

fn smoothstep<S: Real>(t: S) -> S {
    let t = t.max(S::zero()).min(S::one());
    t * t * (S::lit(3.0) - S::lit(2.0) * t)
}

/// C^1 bump: 1 on `[alpha + w, beta - w]`, 0 outside `(alpha, beta)`.
fn plateau<S: Real>(x: S, alpha: S, beta: S, w: S) -> S {
    if x <= alpha || x >= beta {
        S::zero()
    } else {
        smoothstep((x - alpha) / w).min(smoothstep((beta - x) / w))
    }
}

/// A damping profile sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingProfile<S: Real> {
    pub spec: DampingSpec<S>,
    pub samples: Field<S>,
}

impl<S: Real> DampingProfile<S> {
    pub fn kind(&self) -> DampingKind {
        self.spec.kind()
    }

    pub fn lambda0(&self) -> S {
        self.spec.lambda0()
    }

    pub fn grid(&self) -> &Grid<S> {
        self.samples.grid()
    }
}

pub fn make_damping<S: Real>(spec: DampingSpec<S>, grid: &Grid<S>) -> Result<DampingProfile<S>> {
    spec.validate()?;
    let samples = Field::from_fn(grid, |x| spec.eval(x))?;
    Ok(DampingProfile { spec, samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    /// Indefinite damping, `||lambda1||_p < (lambda0 / c_p)^(1 - 1/(2p))`.
    HypB,
    /// Localized damping, `b >= 0` and `b >= lambda0 > 0` off `(alpha, beta)`.
    HypA,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Self::HypB => "hyp_b",
            Self::HypA => "hyp_a",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypReport<S: Real> {
    pub hypothesis: Hypothesis,
    pub pass: bool,
    pub c_p: Option<S>,
    pub lhs: S,
    pub rhs: S,
    pub margin: S,
}

/// `c_p = (1 - 1/(2p)) (2/p)^(1/(2p-1))`.
pub fn c_p<S: Real>(p: S) -> S {
    let two = S::lit(2.0);
    (S::one() - S::one() / (two * p)) * (two / p).powf(S::one() / (two * p - S::one()))
}

/// Closed-form `||A exp(-x^2)||_{L^p(R)} = A (pi/p)^(1/(2p))`.
pub fn gaussian_bump_lp_norm<S: Real>(amplitude: S, p: S) -> S {
    amplitude * (S::PI() / p).powf(S::one() / (p + p))
}

pub fn check_hyp_b<S: Real>(d: &DampingProfile<S>, p: S) -> Result<HypReport<S>> {
    match d.kind() {
        DampingKind::Constant | DampingKind::Indefinite => {}
        other => {
            return Err(Error::NotApplicable(format!(
                "hyp_b needs an explicit lambda0/lambda1 split, damping kind is {}",
                other.name()
            )))
        }
    }
    if !(p >= S::one()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "must be >= 1".into(),
        });
    }
    let grid = d.grid();
    let cp = c_p(p);
    let sum = grid.points().iter().fold(S::zero(), |acc, &x| {
        let l1 = d.spec.lambda1(x).unwrap_or_else(S::zero);
        acc + l1.abs().powf(p)
    });
    let lhs = (sum * grid.dx()).powf(S::one() / p);
    let rhs = (d.lambda0() / cp).powf(S::one() - S::one() / (p + p));
    let margin = rhs - lhs;
    Ok(HypReport {
        hypothesis: Hypothesis::HypB,
        pass: margin > S::zero(),
        c_p: Some(cp),
        lhs,
        rhs,
        margin,
    })
}

/// Checks hyp-a on the grid.
///
/// `lhs` is the declared `lambda0`, `rhs` the minimum of `b` at grid points
/// outside `(alpha, beta)`. The margin is that exterior minimum when `b >= 0`
/// everywhere and the (negative) global minimum of `b` otherwise, so the
/// report passes exactly when some positive `lambda0` is admissible.
pub fn check_hyp_a<S: Real>(d: &DampingProfile<S>) -> HypReport<S> {
    let (alpha, beta) = d.spec.free_interval();
    let grid = d.grid();
    let mut min_all = S::infinity();
    let mut min_out = S::infinity();
    for (&x, &b) in grid.points().iter().zip(d.samples.values()) {
        min_all = min_all.min(b);
        if x <= alpha || x >= beta {
            min_out = min_out.min(b);
        }
    }
    let margin = if min_all < S::zero() { min_all } else { min_out };
    let declared_ok = min_out >= d.lambda0() - S::lit(1e-12);
    HypReport {
        hypothesis: Hypothesis::HypA,
        pass: margin > S::zero() && declared_ok,
        c_p: None,
        lhs: d.lambda0(),
        rhs: min_out,
        margin,
    }
}

/// Spectral evaluation of `-d/dx P[A(u)] - b u` with reusable scratch buffers.
///
/// `P` is the two-thirds dealiasing projection. The damping term is skipped
/// when `damping` is `None` (used when a constant rate is folded into the
/// linear symbol).
pub(crate) struct FluxOperator<S: Real> {
    grid: Grid<S>,
    spec: NonlinearitySpec<S>,
    damping: Option<Vec<S>>,
    neg_ddx: Vec<Complex<S>>,
    phys: Vec<S>,
    work: Vec<S>,
    buf: Vec<Complex<S>>,
    buf2: Vec<Complex<S>>,
}

impl<S: Real> FluxOperator<S> {
    pub(crate) fn new(grid: &Grid<S>, spec: NonlinearitySpec<S>, damping: Option<&Field<S>>) -> Self {
        let n = grid.n_points();
        let neg_ddx = derivative_symbol(grid, 1)
            .expect("order 1 is valid")
            .into_iter()
            .map(|m| -m)
            .collect();
        Self {
            grid: grid.clone(),
            spec,
            damping: damping.map(|f| f.values().to_vec()),
            neg_ddx,
            phys: vec![S::zero(); n],
            work: vec![S::zero(); n],
            buf: vec![Complex::new(S::zero(), S::zero()); n],
            buf2: vec![Complex::new(S::zero(), S::zero()); n],
        }
    }

    /// Evaluates `N` for input given in physical space.
    pub(crate) fn eval_physical(&mut self, u: &[S], out: &mut [Complex<S>]) -> Result<()> {
        self.phys.copy_from_slice(u);
        self.apply(out)
    }

    /// Evaluates `N` for input given by its coefficients.
    pub(crate) fn eval_spectral(&mut self, v: &[Complex<S>], out: &mut [Complex<S>]) -> Result<()> {
        self.buf.copy_from_slice(v);
        self.grid.backward_into(&mut self.buf, &mut self.phys);
        self.apply(out)
    }

    fn apply(&mut self, out: &mut [Complex<S>]) -> Result<()> {
        let zero = Complex::new(S::zero(), S::zero());
        if self.spec.is_zero() {
            out.iter_mut().for_each(|o| *o = zero);
        } else {
            for (j, (w, &u)) in self.work.iter_mut().zip(&self.phys).enumerate() {
                *w = self.spec.a_primitive(u);
                if !w.is_finite() {
                    return Err(Error::NonFinite(j));
                }
            }
            self.grid.forward_into(&self.work, out);
            dealias_in_place(out);
            for (o, &m) in out.iter_mut().zip(&self.neg_ddx) {
                *o = *o * m;
            }
        }
        if let Some(b) = &self.damping {
            for (w, (&bj, &u)) in self.work.iter_mut().zip(b.iter().zip(&self.phys)) {
                *w = bj * u;
            }
            self.grid.forward_into(&self.work, &mut self.buf2);
            for (o, &d) in out.iter_mut().zip(&self.buf2) {
                *o = *o - d;
            }
        }
        Ok(())
    }
}

/// `-d/dx dealias(A(u)) - b u` in physical space.
pub fn rhs_nonlinear<S: Real>(u: &Field<S>, spec: &NonlinearitySpec<S>, d: &DampingProfile<S>) -> Result<Field<S>> {
    let grid = u.grid();
    if grid != d.grid() {
        return Err(Error::GridMismatch);
    }
    let mut op = FluxOperator::new(grid, *spec, Some(&d.samples));
    let mut out = vec![Complex::new(S::zero(), S::zero()); grid.n_points()];
    op.eval_physical(u.values(), &mut out)?;
    let mut values = vec![S::zero(); grid.n_points()];
    grid.backward_into(&mut out, &mut values);
    Field::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{differentiate, l2_inner};
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        let id = NonlinearitySpec::<f64>::identity();
        assert_eq!(id.a_eval(2.0), 2.0);
        assert_eq!(id.a_primitive(2.0), 2.0);
        let sp = NonlinearitySpec::<f64>::new(NonlinearForm::SignedPower, 2.0, 2.0).unwrap();
        assert_eq!(sp.a_eval(-3.0), -9.0);
        assert!((sp.a_primitive(-3.0) - 9.0).abs() < 1e-14);
        for form in [
            NonlinearForm::None,
            NonlinearForm::Identity,
            NonlinearForm::SignedPower,
            NonlinearForm::AbsPower,
        ] {
            let s = NonlinearitySpec::<f64>::new(form, 1.7, 2.0).unwrap();
            assert_eq!(s.a_eval(0.0), 0.0);
            assert_eq!(s.a_primitive(0.0), 0.0);
        }
    }

    #[test]
    fn primitive_derivative_matches_a() {
        for form in [
            NonlinearForm::Identity,
            NonlinearForm::SignedPower,
            NonlinearForm::AbsPower,
        ] {
            for p in [1.0, 1.5, 2.0, 3.0, 4.5] {
                let s = NonlinearitySpec::<f64>::new(form, p, 1.0).unwrap();
                for i in 0..=200 {
                    let mu = -10.0 + 0.1 * i as f64;
                    let h = 1e-5 * mu.abs().max(1.0);
                    let fd = (s.a_primitive(mu + h) - s.a_primitive(mu - h)) / (2.0 * h);
                    let a = s.a_eval(mu);
                    assert!(
                        (fd - a).abs() <= 1e-6 * a.abs().max(1.0) + h,
                        "{form:?} p={p} mu={mu}: {fd} vs {a}"
                    );
                }
            }
        }
    }

    struct Exponential;
    impl Nonlinearity<f64> for Exponential {
        fn a(&self, mu: f64) -> f64 {
            mu.exp()
        }
        fn exponent(&self) -> f64 {
            2.0
        }
        fn growth_constant(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn growth_checks() {
        let id = NonlinearitySpec::<f64>::identity();
        assert!(check_growth(&id, 20.0, 401).unwrap().pass);
        // a' = 2|mu| needs C >= 2 against 1 + |mu|.
        let sp1 = NonlinearitySpec::<f64>::new(NonlinearForm::SignedPower, 2.0, 1.0).unwrap();
        let r = check_growth(&sp1, 20.0, 401).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_order, 1);
        let sp2 = NonlinearitySpec::<f64>::new(NonlinearForm::SignedPower, 2.0, 2.0).unwrap();
        assert!(check_growth(&sp2, 20.0, 401).unwrap().pass);
        let r = check_growth(&Exponential, 50.0, 101).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_at, 50.0);
        assert!(check_growth(&id, 0.0, 10).is_err());
    }

    fn grid() -> Grid<f64> {
        Grid::<f64>::new(32.0, 512).unwrap()
    }

    #[test]
    fn damping_profiles() {
        let g = grid();
        let c = make_damping(DampingSpec::<f64>::Constant { lambda0: 0.5 }, &g).unwrap();
        assert!(c.samples.values().iter().all(|&b| b == 0.5));
        let ind = DampingSpec::<f64>::Indefinite {
            lambda0: 0.2,
            bump_amplitude: 0.22,
        };
        assert!((ind.eval(0.0) + 0.02).abs() < 1e-15);
        let loc = DampingSpec::<f64>::Localized {
            lambda0: 1.0,
            alpha: -5.0,
            beta: 5.0,
            width: 1.0,
        };
        assert_eq!(loc.eval(0.0), 0.0);
        assert_eq!(loc.eval(8.0), 1.0);
        assert_eq!(loc.eval(-8.0), 1.0);
        assert!((loc.eval(-4.5) - 0.5).abs() < 1e-15);

        let bad = [
            DampingSpec::<f64>::Indefinite {
                lambda0: 0.2,
                bump_amplitude: -1.0,
            },
            DampingSpec::<f64>::Localized {
                lambda0: 1.0,
                alpha: 5.0,
                beta: 5.0,
                width: 1.0,
            },
            DampingSpec::<f64>::Localized {
                lambda0: 1.0,
                alpha: -1.0,
                beta: 1.0,
                width: 1.5,
            },
            DampingSpec::<f64>::Constant { lambda0: 0.0 },
        ];
        for spec in bad {
            assert!(make_damping(spec, &g).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn localized_profile_is_c1() {
        let spec = DampingSpec::<f64>::Localized {
            lambda0: 1.0,
            alpha: -5.0,
            beta: 5.0,
            width: 1.0,
        };
        let h = 1e-7;
        for x in [-5.0, -4.0, 4.0, 5.0] {
            let left = (spec.eval(x) - spec.eval(x - h)) / h;
            let right = (spec.eval(x + h) - spec.eval(x)) / h;
            assert!((left - right).abs() < 1e-5, "kink at {x}");
        }
    }

    #[test]
    fn c_p_values() {
        assert!((c_p(1.0f64) - 1.0).abs() < 1e-15);
        assert!((c_p(2.0f64) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn hyp_b_indefinite_preset() {
        let d = make_damping(
            DampingSpec::<f64>::Indefinite {
                lambda0: 0.2,
                bump_amplitude: 0.22,
            },
            &grid(),
        )
        .unwrap();
        let r = check_hyp_b(&d, 1.0).unwrap();
        // Gaussian integral: int exp(-x^2) = sqrt(pi).
        let lhs_oracle = 0.22 * PI.sqrt();
        assert!((r.lhs - lhs_oracle).abs() < 1e-8);
        assert!((r.lhs - gaussian_bump_lp_norm(0.22, 1.0)).abs() < 1e-8);
        assert!((r.rhs - 0.2f64.sqrt()).abs() < 1e-15);
        assert!(r.pass);
        assert!((r.margin - 0.0573).abs() < 1e-3);

        for p in [1.5, 2.0, 3.0] {
            let r = check_hyp_b(&d, p).unwrap();
            assert!((r.lhs - gaussian_bump_lp_norm(0.22, p)).abs() < 1e-8);
        }
    }

    #[test]
    fn hyp_b_rejects_localized() {
        let d = make_damping(
            DampingSpec::<f64>::Localized {
                lambda0: 1.0,
                alpha: -5.0,
                beta: 5.0,
                width: 1.0,
            },
            &grid(),
        )
        .unwrap();
        assert!(matches!(check_hyp_b(&d, 1.0), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn hyp_a_cases() {
        let g = grid();
        let loc = make_damping(
            DampingSpec::<f64>::Localized {
                lambda0: 1.0,
                alpha: -5.0,
                beta: 5.0,
                width: 1.0,
            },
            &g,
        )
        .unwrap();
        let r = check_hyp_a(&loc);
        assert!(r.pass);
        assert_eq!(r.margin, 1.0);

        let zero = make_damping(DampingSpec::<f64>::Zero, &g).unwrap();
        assert!(!check_hyp_a(&zero).pass);

        let c = make_damping(DampingSpec::<f64>::Constant { lambda0: 1.0 }, &g).unwrap();
        assert!(check_hyp_a(&c).pass);

        let ind = make_damping(
            DampingSpec::<f64>::Indefinite {
                lambda0: 0.2,
                bump_amplitude: 0.22,
            },
            &g,
        )
        .unwrap();
        let r = check_hyp_a(&ind);
        assert!(!r.pass);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn rhs_closed_forms() {
        let g = Grid::<f64>::new(PI, 64).unwrap();
        let u = Field::<f64>::from_fn(&g, f64::sin).unwrap();
        let id = NonlinearitySpec::<f64>::identity();
        let zero = make_damping(DampingSpec::<f64>::Zero, &g).unwrap();
        let one = make_damping(DampingSpec::<f64>::Constant { lambda0: 1.0 }, &g).unwrap();
        let r0 = rhs_nonlinear(&u, &id, &zero).unwrap();
        let r1 = rhs_nonlinear(&u, &id, &one).unwrap();
        for (j, &x) in g.points().iter().enumerate() {
            let flux = -0.5 * (2.0 * x).sin();
            assert!((r0.values()[j] - flux).abs() < 1e-10);
            assert!((r1.values()[j] - (flux - x.sin())).abs() < 1e-10);
        }
        assert!(rhs_nonlinear(&Field::<f64>::zeros(&g), &id, &one).unwrap().sup_norm() == 0.0);
    }

    #[test]
    fn flux_is_l2_orthogonal_for_localized_data() {
        let g = grid();
        let zero = make_damping(DampingSpec::<f64>::Zero, &g).unwrap();
        for form in [
            NonlinearForm::Identity,
            NonlinearForm::SignedPower,
            NonlinearForm::AbsPower,
        ] {
            let spec = NonlinearitySpec::<f64>::new(form, 2.0, 2.0).unwrap();
            let u =
                Field::<f64>::from_fn(&g, |x| 0.8 * (-(x / 2.0) * (x / 2.0)).exp() * (1.0 + 0.3 * x.sin())).unwrap();
            let r = rhs_nonlinear(&u, &spec, &zero).unwrap();
            assert!(l2_inner(&r, &u).unwrap().abs() < 1e-9, "{form:?}");
        }
        // Sanity: the term really is a derivative of something nonzero.
        let u = Field::<f64>::from_fn(&g, |x| (-x * x / 4.0).exp()).unwrap();
        let r = rhs_nonlinear(&u, &NonlinearitySpec::<f64>::identity(), &zero).unwrap();
        let direct = differentiate(&Field::<f64>::from_fn(&g, |x| 0.5 * (-x * x / 2.0).exp()).unwrap(), 1).unwrap();
        let diff = r.add(&direct).unwrap();
        assert!(diff.sup_norm() < 1e-10);
    }
}
