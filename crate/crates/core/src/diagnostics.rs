//! Post-processing of trajectories: energy identities, decay fits,
//! observability ratios, Sobolev series, interpolation inequalities and the
//! Lipschitz probe of the solution map.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::{simulate_from, SimConfig, Trajectory};
use crate::spectral::{derivative_symbol, l2_inner, sobolev_norm, transform, Field};

/// Fields with a larger boundary tail are refused by the functional inequalities.
pub const LOCALIZED_TAIL: f64 = 1e-3;

/// Norms below this value are dropped from log-linear fits.
pub const NORM_FLOOR: f64 = 1e-13;

/// Energy balance terms at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLedgerEntry<S: Real> {
    pub t: S,
    /// `||u||_2^2`
    pub l2_sq: S,
    /// `||u_x||_2^2`
    pub grad_sq: S,
    /// `int b u^2 dx`
    pub damp_quad: S,
    pub tail_fraction: S,
    /// `||u||_{H^3}^2`
    pub h3_sq: S,
}

impl<S: Real> EnergyLedgerEntry<S> {
    pub fn h1_sq(&self) -> S {
        self.l2_sq + self.grad_sq
    }

    pub fn energy(&self) -> S {
        self.l2_sq / S::lit(2.0)
    }
}

/// `E = (1/2) int u^2`.
pub fn energy<S: Real>(f: &Field<S>) -> S {
    l2_inner(f, f).expect("same grid") / S::lit(2.0)
}

/// Cumulative trapezoid integral of `g(entry)` over the ledger.
fn cumulative<S: Real>(ledger: &[EnergyLedgerEntry<S>], g: impl Fn(&EnergyLedgerEntry<S>) -> S) -> Vec<S> {
    let mut out = Vec::with_capacity(ledger.len());
    let mut acc = S::zero();
    out.push(acc);
    for w in ledger.windows(2) {
        acc = acc + (w[1].t - w[0].t) * (g(&w[0]) + g(&w[1])) / S::lit(2.0);
        out.push(acc);
    }
    out
}

/// Relative defect of `||u||^2 + 2 int ||u_x||^2 + 2 int int b u^2 = ||u0||^2` at each ledger time.
pub fn dissipation_residual<S: Real>(tr: &Trajectory<S>) -> Vec<S> {
    let ledger = &tr.ledger;
    let l0 = ledger.first().map(|e| e.l2_sq).unwrap_or_else(S::zero);
    if l0 == S::zero() {
        return vec![S::zero(); ledger.len()];
    }
    let grad = cumulative(ledger, |e| e.grad_sq);
    let damp = cumulative(ledger, |e| e.damp_quad);
    let two = S::lit(2.0);
    ledger
        .iter()
        .zip(grad.iter().zip(&damp))
        .map(|(e, (&g, &d))| (e.l2_sq + two * g + two * d - l0) / l0)
        .collect()
}

/// Relative defect of the identity obtained with the multiplier `(T - t) u`:
/// `(T/2)||u0||^2 = (1/2) int ||u||^2 + int (T-t)||u_x||^2 + int (T-t) int b u^2`.
pub fn weighted_identity_residual<S: Real>(tr: &Trajectory<S>) -> S {
    let ledger = &tr.ledger;
    let (Some(first), Some(last)) = (ledger.first(), ledger.last()) else {
        return S::zero();
    };
    let horizon = last.t;
    let lhs = horizon / S::lit(2.0) * first.l2_sq;
    if lhs == S::zero() {
        return S::zero();
    }
    let half = S::lit(0.5);
    let rhs = *cumulative(ledger, |e| half * e.l2_sq + (horizon - e.t) * (e.grad_sq + e.damp_quad))
        .last()
        .expect("nonempty");
    (rhs - lhs) / lhs
}

/// `||u0||^2 / (||u_x||^2_{L2 L2} + int int b u^2)`.
///
/// Zero initial data gives 0; a vanishing denominator with nonzero data gives
/// infinity.
pub fn observability_ratio<S: Real>(tr: &Trajectory<S>) -> S {
    let ledger = &tr.ledger;
    let l0 = ledger.first().map(|e| e.l2_sq).unwrap_or_else(S::zero);
    if l0 == S::zero() {
        return S::zero();
    }
    let denom = *cumulative(ledger, |e| e.grad_sq + e.damp_quad)
        .last()
        .expect("nonempty");
    if denom > S::zero() {
        l0 / denom
    } else {
        S::infinity()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit<S: Real> {
    /// `eta` in `||u(t)|| ~ amplitude * exp(-eta t)`.
    pub rate: S,
    pub amplitude: S,
    pub r_squared: S,
    pub window: (S, S),
    pub points: usize,
}

/// Default fit window `[0.2 T, 0.9 T]`.
pub fn default_window<S: Real>(horizon: S) -> (S, S) {
    (S::lit(0.2) * horizon, S::lit(0.9) * horizon)
}

/// Least-squares fit of `log ||u|| = log A - eta t` over `window`.
pub fn decay_fit<S: Real>(series: &[(S, S)], window: (S, S)) -> Result<DecayFit<S>> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::Fit(format!("empty window [{t0}, {t1}]")));
    }
    let mut pts = Vec::new();
    for &(t, norm) in series.iter().filter(|(t, _)| *t >= t0 && *t <= t1) {
        if !(norm > S::zero()) {
            return Err(Error::Fit(format!("non-positive norm {norm} at t = {t}")));
        }
        if norm >= S::lit(NORM_FLOOR) {
            pts.push((t, norm.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::Fit("fewer than two usable points in window".into()));
    }
    let n = S::from_count(pts.len());
    let mean_t = pts.iter().fold(S::zero(), |a, p| a + p.0) / n;
    let mean_y = pts.iter().fold(S::zero(), |a, p| a + p.1) / n;
    let (mut stt, mut sty, mut syy) = (S::zero(), S::zero(), S::zero());
    for &(t, y) in &pts {
        let dt = t - mean_t;
        let dy = y - mean_y;
        stt = stt + dt * dt;
        sty = sty + dt * dy;
        syy = syy + dy * dy;
    }
    if stt == S::zero() {
        return Err(Error::Fit("all points share one time".into()));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let ss_res = pts.iter().fold(S::zero(), |a, &(t, y)| {
        let r = y - (intercept + slope * t);
        a + r * r
    });
    let r_squared = if syy > S::zero() {
        (S::one() - ss_res / syy).max(S::zero()).min(S::one())
    } else {
        S::one()
    };
    Ok(DecayFit {
        rate: -slope,
        amplitude: intercept.exp(),
        r_squared,
        window,
        points: pts.len(),
    })
}

/// `(t, ||u(t)||_{H^s})` at every snapshot.
pub fn sobolev_series<S: Real>(tr: &Trajectory<S>, s: S) -> Result<Vec<(S, S)>> {
    tr.times
        .iter()
        .zip(&tr.snapshots)
        .map(|(&t, f)| Ok((t, sobolev_norm(f, s)?)))
        .collect()
}

fn require_localized<S: Real>(f: &Field<S>) -> Result<()> {
    let tail = f.tail_fraction();
    if tail >= S::lit(LOCALIZED_TAIL) {
        Err(Error::NotLocalized(tail.to_f64_lossy()))
    } else {
        Ok(())
    }
}

/// `||d^j f||_2` from the spectrum.
fn derivative_norm<S: Real>(coeffs: &[num_complex::Complex<S>], f: &Field<S>, j: u32) -> Result<S> {
    let symbol = derivative_symbol(f.grid(), j)?;
    let sum = coeffs
        .iter()
        .zip(&symbol)
        .fold(S::zero(), |a, (c, m)| a + (c * m).norm_sqr());
    Ok((sum * f.grid().parseval_weight()).sqrt())
}

/// Margin `2 ||f||_2 ||f_x||_2 - ||f||_inf^2` of the embedding `H^1 -> L^inf`.
pub fn gn_check<S: Real>(f: &Field<S>) -> Result<S> {
    require_localized(f)?;
    let coeffs = transform(f).into_coeffs();
    let l2 = derivative_norm(&coeffs, f, 0)?;
    let grad = derivative_norm(&coeffs, f, 1)?;
    let sup = f.sup_norm();
    Ok(S::lit(2.0) * l2 * grad - sup * sup)
}

/// `||d^j f|| / (||d^m f||^(j/m) ||f||^(1 - j/m))` for `0 <= j <= m <= 3`, `m >= 1`.
pub fn gn_interp_check<S: Real>(f: &Field<S>, j: u32, m: u32) -> Result<S> {
    if m == 0 || m > 3 || j > m {
        return Err(Error::InvalidParameter {
            name: "j, m",
            reason: format!("need 0 <= j <= m <= 3 and m >= 1, got j={j}, m={m}"),
        });
    }
    require_localized(f)?;
    let coeffs = transform(f).into_coeffs();
    let top = derivative_norm(&coeffs, f, j)?;
    let high = derivative_norm(&coeffs, f, m)?;
    let base = derivative_norm(&coeffs, f, 0)?;
    if top == S::zero() {
        return Ok(S::zero());
    }
    let theta = S::from_count(j as usize) / S::from_count(m as usize);
    Ok(top / (high.powf(theta) * base.powf(S::one() - theta)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzReport<S: Real> {
    /// `max_t ||u(t) - v(t)||_2 / ||u0 - v0||_2` over snapshot times.
    pub l2_ratio: S,
    /// `(int ||(u - v)_x||_2^2 dt)^(1/2) / ||u0 - v0||_2`, trapezoid over snapshots.
    pub h1_ratio: S,
}

/// Runs both initial data under `cfg` and measures how far the solutions separate.
pub fn lipschitz_probe<S: Real>(cfg: &SimConfig<S>, u0: &Field<S>, v0: &Field<S>) -> Result<LipschitzReport<S>> {
    let d0 = u0.sub(v0)?.l2_norm();
    if d0 == S::zero() {
        return Ok(LipschitzReport {
            l2_ratio: S::zero(),
            h1_ratio: S::zero(),
        });
    }
    let a = simulate_from(cfg, u0)?;
    let b = simulate_from(cfg, v0)?;
    let mut l2_ratio = S::zero();
    let mut prev: Option<(S, S)> = None;
    let mut integral = S::zero();
    for ((&t, ua), ub) in a.times.iter().zip(&a.snapshots).zip(&b.snapshots) {
        let diff = ua.sub(ub)?;
        l2_ratio = l2_ratio.max(diff.l2_norm() / d0);
        let coeffs = transform(&diff).into_coeffs();
        let g = derivative_norm(&coeffs, &diff, 1)?;
        let g2 = g * g;
        if let Some((tp, gp)) = prev {
            integral = integral + (t - tp) * (gp + g2) / S::lit(2.0);
        }
        prev = Some((t, g2));
    }
    Ok(LipschitzReport {
        l2_ratio,
        h1_ratio: integral.sqrt() / d0,
    })
}
