//! Successive approximations `u_{n+1} = Gamma(u_n)` for the Duhamel formula
//!
//! ```text
//! Gamma(u)(t) = S(t) u0 + int_0^t S(t - s) N(u(s)) ds,   N(u) = -d/dx A(u) - b u
//! ```
//!
//! on a uniform time slab, with the integral evaluated by the composite
//! trapezoid rule.

use num_complex::Complex;

use crate::dynamics::{DampingKind, FluxOperator};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid};

use super::config::SimConfig;
use super::etdrk4::{folded_rate, linear_symbol};

/// Successive differences below this fraction of the iterate's slab norm stop
/// the iteration; further ratios would only measure rounding noise.
pub const PICARD_FLOOR: f64 = 1e-13;

/// Iterates whose last difference is below this fraction count as converged.
const CONVERGED_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PicardReport<S: Real> {
    /// Each iterate evaluated at the end of the slab, starting with `S(T) u0`.
    pub iterates: Vec<Field<S>>,
    /// Slab-norm distance between consecutive iterates.
    pub sup_norm_diffs: Vec<S>,
    /// `diff[n+1] / diff[n]`.
    pub contraction_ratios: Vec<S>,
    pub converged: bool,
    /// Set when the ratio exceeded 1 three times in a row.
    pub diverged: bool,
}

impl<S: Real> PicardReport<S> {
    pub fn final_iterate(&self) -> &Field<S> {
        self.iterates.last().expect("at least one iterate")
    }
}

type Slab<S> = Vec<Vec<Complex<S>>>;

struct SlabNorm<S: Real> {
    weight: S,
    xi_sq: Vec<S>,
    h: S,
}

impl<S: Real> SlabNorm<S> {
    /// `max_t ||w(t)||_2 + (int ||w_x(t)||_2^2 dt)^(1/2)`.
    fn eval(&self, slab: &[Vec<Complex<S>>]) -> S {
        let mut sup = S::zero();
        let mut integral = S::zero();
        let last = slab.len() - 1;
        for (m, w) in slab.iter().enumerate() {
            let mut l2 = S::zero();
            let mut grad = S::zero();
            for (c, &k2) in w.iter().zip(&self.xi_sq) {
                let a = c.norm_sqr();
                l2 = l2 + a;
                grad = grad + k2 * a;
            }
            sup = sup.max((l2 * self.weight).sqrt());
            let tw = if m == 0 || m == last { S::lit(0.5) } else { S::one() };
            integral = integral + tw * grad * self.weight;
        }
        sup + (integral * self.h).sqrt()
    }

    fn distance(&self, a: &Slab<S>, b: &Slab<S>) -> S {
        let diff: Slab<S> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
            .collect();
        self.eval(&diff)
    }
}

/// Picard iteration on `[0, t_loc]` with `substeps` trapezoid panels.
pub fn picard_solve<S: Real>(
    u0: &Field<S>,
    cfg: &SimConfig<S>,
    t_loc: S,
    n_iter: usize,
    substeps: usize,
) -> Result<PicardReport<S>> {
    if !(t_loc > S::zero() && t_loc <= S::lit(0.5)) {
        return Err(Error::InvalidParameter {
            name: "picard.t_loc",
            reason: "local time must lie in (0, 0.5]".into(),
        });
    }
    if n_iter == 0 || n_iter > 30 {
        return Err(Error::InvalidParameter {
            name: "picard.iterations",
            reason: "must lie in 1..=30".into(),
        });
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter {
            name: "picard.substeps",
            reason: "must be positive".into(),
        });
    }
    cfg.damping.validate()?;
    let grid: Grid<S> = u0.grid().clone();
    let n = grid.n_points();
    let h = t_loc / S::from_count(substeps);
    let symbol = linear_symbol(&grid, folded_rate(cfg));
    let step: Vec<Complex<S>> = symbol.iter().map(|&l| (l * h).exp()).collect();
    let damping = match cfg.damping.kind() {
        DampingKind::Constant | DampingKind::Zero => None,
        _ => Some(Field::from_fn(&grid, |x| cfg.damping.eval(x))?),
    };
    let mut op = FluxOperator::new(&grid, cfg.nonlinearity, damping.as_ref());
    let norm = SlabNorm {
        weight: grid.parseval_weight(),
        xi_sq: grid.wavenumbers().iter().map(|&k| k * k).collect(),
        h,
    };

    let zero = Complex::new(S::zero(), S::zero());
    let mut free = vec![vec![zero; n]; substeps + 1];
    grid.forward_into(u0.values(), &mut free[0]);
    for m in 1..=substeps {
        let (done, rest) = free.split_at_mut(m);
        for ((out, &prev), &e) in rest[0].iter_mut().zip(&done[m - 1]).zip(&step) {
            *out = prev * e;
        }
    }

    let to_field = |coeffs: &[Complex<S>]| -> Result<Field<S>> {
        let mut buf = coeffs.to_vec();
        let mut values = vec![S::zero(); n];
        grid.backward_into(&mut buf, &mut values);
        Field::new(&grid, values)
    };

    let mut current = free.clone();
    let mut report = PicardReport {
        iterates: vec![to_field(&current[substeps])?],
        sup_norm_diffs: Vec::new(),
        contraction_ratios: Vec::new(),
        converged: false,
        diverged: false,
    };
    let mut forcing = vec![vec![zero; n]; substeps + 1];
    let mut above_one = 0;
    let half_h = h * S::lit(0.5);

    for _ in 0..n_iter {
        for (m, f) in forcing.iter_mut().enumerate() {
            op.eval_spectral(&current[m], f)?;
        }
        // I_m = E I_{m-1} + h/2 (E N_{m-1} + N_m)
        let mut next = free.clone();
        let mut integral = vec![zero; n];
        for m in 1..=substeps {
            for i in 0..n {
                integral[i] = step[i] * (integral[i] + forcing[m - 1][i] * half_h) + forcing[m][i] * half_h;
                next[m][i] = next[m][i] + integral[i];
            }
        }
        let diff = norm.distance(&next, &current);
        let scale = norm.eval(&next);
        report.iterates.push(to_field(&next[substeps])?);
        if let Some(&prev) = report.sup_norm_diffs.last() {
            let ratio = if prev > S::zero() { diff / prev } else { S::zero() };
            report.contraction_ratios.push(ratio);
            above_one = if ratio > S::one() { above_one + 1 } else { 0 };
        }
        report.sup_norm_diffs.push(diff);
        current = next;
        if !diff.is_finite() || above_one >= 3 {
            report.diverged = true;
            break;
        }
        if diff <= S::lit(PICARD_FLOOR) * scale {
            break;
        }
    }
    let last = *report.sup_norm_diffs.last().expect("at least one iteration");
    let scale = norm.eval(&current);
    report.converged = !report.diverged && last <= S::lit(CONVERGED_TOL) * scale.max(S::min_positive_value());
    Ok(report)
}
