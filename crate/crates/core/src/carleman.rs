//! Carleman weights for `P = d_t - d_xx + d_xxx` on `(-L, L) x (0, T)`.
//!
//! With `phi(t, x) = psi(x) / (t (T - t))` and `u = exp(-s phi) q`, the
//! conjugated operator reads `w = A u + B u_x + C u_xx + u_xxx + u_t` and
//! the positivity of the quadratic form `D u^2 + E u_x^2 + F u_xx^2` yields
//! the weighted estimate. The weight is the quadratic
//! `psi(x) = M - (x - x0)^2`, `|x0| > L`, for which every derivative of
//! order three or more vanishes.
//!
//! All coefficient formulas below are written against the generic jet of
//! `phi` (space derivatives up to order six, mixed derivatives up to order
//! three in `x` and two in `t`), so they stay valid for any smooth `psi`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Points per axis used to verify the weight conditions on `[-L, L]`.
pub const CONDITION_GRID: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlemanWeight<S: Real> {
    pub half_width: S,
    pub x0: S,
    pub offset: S,
    pub epsilon: S,
    pub horizon: S,
}

/// Values of the weight conditions over `[-L, L]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightConditions<S: Real> {
    pub min_psi: S,
    /// `min |psi_x|`
    pub min_abs_psi_x: S,
    /// `max psi_xx`, must be negative.
    pub max_psi_xx: S,
    /// `min ((1 - eps) psi_xx^2 - psi_x psi_xxx)`, must be positive.
    pub c2_margin: S,
}

impl<S: Real> CarlemanWeight<S> {
    /// Quadratic weight with the default offset `M = (|x0| + L)^2 + 1`.
    pub fn new(half_width: S, x0: S, epsilon: S, horizon: S) -> Result<Self> {
        let offset = (x0.abs() + half_width).powi(2) + S::one();
        Self::with_offset(half_width, x0, offset, epsilon, horizon)
    }

    pub fn with_offset(half_width: S, x0: S, offset: S, epsilon: S, horizon: S) -> Result<Self> {
        let invalid = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(half_width > S::zero()) {
            return invalid("carleman.L", "must be positive".into());
        }
        if !(x0.abs() > half_width) {
            return invalid(
                "carleman.x0",
                format!(
                    "|x0| = {} must exceed L = {half_width} so that psi_x never vanishes",
                    x0.abs()
                ),
            );
        }
        if !(epsilon > S::zero() && epsilon < S::one()) {
            return invalid("carleman.epsilon", "must lie in (0, 1)".into());
        }
        if !(horizon > S::zero()) {
            return invalid("carleman.T", "must be positive".into());
        }
        let w = Self {
            half_width,
            x0,
            offset,
            epsilon,
            horizon,
        };
        let c = w.conditions();
        if !(c.min_psi > S::zero()) {
            return invalid("carleman.M", format!("psi must stay positive, min is {}", c.min_psi));
        }
        if !(c.min_abs_psi_x > S::zero() && c.max_psi_xx < S::zero()) {
            return invalid("carleman.x0", "condition |psi_x| > 0, psi_xx < 0 fails".into());
        }
        if !(c.c2_margin > S::zero()) {
            return invalid(
                "carleman.epsilon",
                "condition psi_x psi_xxx < (1 - eps) psi_xx^2 fails".into(),
            );
        }
        Ok(w)
    }

    /// `psi^(order)(x)`.
    pub fn psi(&self, x: S, order: usize) -> S {
        let two = S::lit(2.0);
        let y = x - self.x0;
        match order {
            0 => self.offset - y * y,
            1 => -two * y,
            2 => -two,
            _ => S::zero(),
        }
    }

    pub fn conditions(&self) -> WeightConditions<S> {
        let mut out = WeightConditions {
            min_psi: S::infinity(),
            min_abs_psi_x: S::infinity(),
            max_psi_xx: S::neg_infinity(),
            c2_margin: S::infinity(),
        };
        let n = CONDITION_GRID;
        for i in 0..n {
            let x = -self.half_width + (self.half_width + self.half_width) * S::from_count(i) / S::from_count(n - 1);
            let (p0, p1, p2, p3) = (self.psi(x, 0), self.psi(x, 1), self.psi(x, 2), self.psi(x, 3));
            out.min_psi = out.min_psi.min(p0);
            out.min_abs_psi_x = out.min_abs_psi_x.min(p1.abs());
            out.max_psi_xx = out.max_psi_xx.max(p2);
            out.c2_margin = out.c2_margin.min((S::one() - self.epsilon) * p2 * p2 - p1 * p3);
        }
        out
    }

    /// `t (T - t)`.
    pub fn theta(&self, t: S) -> S {
        t * (self.horizon - t)
    }

    /// `d^j/dt^j [1 / (t (T - t))]` for `j <= 2`.
    fn time_factor(&self, t: S, order: usize) -> S {
        let th = self.theta(t);
        let dth = self.horizon - t - t;
        match order {
            0 => S::one() / th,
            1 => -dth / (th * th),
            _ => S::lit(2.0) / (th * th) + S::lit(2.0) * dth * dth / (th * th * th),
        }
    }

    /// Jet of `phi = psi(x) / (t (T - t))`.
    pub fn phi_jet(&self, t: S, x: S) -> PhiJet<S> {
        let g = [self.time_factor(t, 0), self.time_factor(t, 1), self.time_factor(t, 2)];
        let mut dx = [S::zero(); 7];
        let mut dxt = [S::zero(); 4];
        let mut dxtt = [S::zero(); 2];
        for (i, v) in dx.iter_mut().enumerate() {
            *v = self.psi(x, i) * g[0];
        }
        for (i, v) in dxt.iter_mut().enumerate() {
            *v = self.psi(x, i) * g[1];
        }
        for (i, v) in dxtt.iter_mut().enumerate() {
            *v = self.psi(x, i) * g[2];
        }
        PhiJet { dx, dxt, dxtt }
    }
}

/// Partial derivatives of `phi`: `dx[i] = d_x^i phi`, `dxt[i] = d_x^i d_t phi`,
/// `dxtt[i] = d_x^i d_tt phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiJet<S: Real> {
    pub dx: [S; 7],
    pub dxt: [S; 4],
    pub dxtt: [S; 2],
}

/// Conjugation coefficients at one point `(x, t, s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffSample<S: Real> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
    pub e: S,
    pub f: S,
}

/// Coefficients together with the derivatives that enter `D` and `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffTerms<S: Real> {
    pub sample: CoeffSample<S>,
    pub a_t: S,
    pub a_x: S,
    pub a_xxx: S,
    pub b_x: S,
    pub c_x: S,
    pub c_t: S,
    pub ab_x: S,
    pub cxa_x: S,
    pub ccx_x: S,
}

/// Evaluates every coefficient from the jet of `phi`.
pub fn coefficient_terms<S: Real>(jet: &PhiJet<S>, s: S, epsilon: S) -> CoeffTerms<S> {
    let [_, p1, p2, p3, p4, p5, p6] = jet.dx;
    let [pt, p1t, p2t, p3t] = jet.dxt;
    let [ptt, _] = jet.dxtt;
    let l = S::lit;
    let s2 = s * s;
    let s3 = s2 * s;

    let a = s * (pt - p2 + p3) + l(3.0) * s2 * p1 * p2 + s3 * p1 * p1 * p1 - s2 * p1 * p1;
    let a_x =
        s * (p1t - p3 + p4) + l(3.0) * s2 * (p2 * p2 + p1 * p3) + l(3.0) * s3 * p1 * p1 * p2 - l(2.0) * s2 * p1 * p2;
    let a_xxx = s * (p3t - p5 + p6)
        + l(3.0) * s2 * (l(3.0) * p3 * p3 + l(4.0) * p2 * p4 + p1 * p5)
        + l(3.0) * s3 * (l(2.0) * p2 * p2 * p2 + l(6.0) * p1 * p2 * p3 + p1 * p1 * p4)
        - l(2.0) * s2 * (l(3.0) * p2 * p3 + p1 * p4);
    let a_t = s * (ptt - p2t + p3t) + l(3.0) * s2 * (p1t * p2 + p1 * p2t) + l(3.0) * s3 * p1 * p1 * p1t
        - l(2.0) * s2 * p1 * p1t;

    let b = l(3.0) * s * p2 + l(3.0) * s2 * p1 * p1 - l(2.0) * s * p1;
    let b_x = l(3.0) * s * p3 + l(6.0) * s2 * p1 * p2 - l(2.0) * s * p2;

    let c = l(3.0) * s * p1 - S::one();
    let c_x = l(3.0) * s * p2;
    let c_xx = l(3.0) * s * p3;
    let c_xxx = l(3.0) * s * p4;
    let c_t = l(3.0) * s * p1t;

    let ab_x = a_x * b + a * b_x;
    let cxa_x = c_xx * a + c_x * a_x;
    let ccx_x = c_x * c_x + c * c_xx;

    let d = -(a_t + a_xxx + ab_x + cxa_x);
    let e = l(3.0) * a_x + b * c_x - b_x * c - ccx_x + c_xxx + c_t - epsilon * c_x * c_x;
    let f = -l(3.0) * c_x;

    CoeffTerms {
        sample: CoeffSample { a, b, c, d, e, f },
        a_t,
        a_x,
        a_xxx,
        b_x,
        c_x,
        c_t,
        ab_x,
        cxa_x,
        ccx_x,
    }
}

/// `A, B, C, D, E, F` at `(x, t)` for parameter `s`.
pub fn carleman_coefficients<S: Real>(w: &CarlemanWeight<S>, s: S, t: S, x: S) -> Result<CoeffSample<S>> {
    if !(t > S::zero() && t < w.horizon) {
        return Err(Error::TimeOutOfRange {
            t: t.to_f64_lossy(),
            horizon: w.horizon.to_f64_lossy(),
        });
    }
    if !(s > S::zero()) {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "must be positive".into(),
        });
    }
    Ok(coefficient_terms(&w.phi_jet(t, x), s, w.epsilon).sample)
}

/// Minima of the scaled coefficients at one value of `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow<S: Real> {
    pub s: S,
    /// `min D t^5 (T-t)^5 / s^5`
    pub min_d: S,
    /// `min E t^2 (T-t)^2 / s^2`
    pub min_e: S,
    /// `min F t (T-t) / s`
    pub min_f: S,
}

impl<S: Real> ScanRow<S> {
    pub fn all_positive(&self) -> bool {
        self.min_d > S::zero() && self.min_e > S::zero() && self.min_f > S::zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport<S: Real> {
    pub rows: Vec<ScanRow<S>>,
    /// First sampled `s` at which all three minima are positive.
    pub s_star: Option<S>,
    /// Scaled minima at the largest sampled `s`: empirical `C1, C2, C3`.
    pub plateau: (S, S, S),
}

/// Scans the scaled `D, E, F` over `[-L, L] x [T/20, 19T/20]`.
pub fn positivity_scan<S: Real>(w: &CarlemanWeight<S>, s_values: &[S], grid_n: usize) -> Result<ScanReport<S>> {
    if s_values.is_empty() || s_values.iter().any(|&s| !(s > S::zero())) {
        return Err(Error::InvalidParameter {
            name: "s_values",
            reason: "need at least one positive value".into(),
        });
    }
    if s_values.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::InvalidParameter {
            name: "s_values",
            reason: "must be strictly ascending".into(),
        });
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            reason: "need at least two points per axis".into(),
        });
    }
    let horizon = w.horizon;
    let t_lo = horizon / S::lit(20.0);
    let t_hi = horizon * S::lit(19.0) / S::lit(20.0);
    let span = S::from_count(grid_n - 1);
    let jets: Vec<(S, PhiJet<S>)> = (0..grid_n)
        .flat_map(|i| {
            let t = t_lo + (t_hi - t_lo) * S::from_count(i) / span;
            (0..grid_n).map(move |j| {
                let x = -w.half_width + (w.half_width + w.half_width) * S::from_count(j) / span;
                (t, x)
            })
        })
        .map(|(t, x)| (w.theta(t), w.phi_jet(t, x)))
        .collect();

    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let mut row = ScanRow {
            s,
            min_d: S::infinity(),
            min_e: S::infinity(),
            min_f: S::infinity(),
        };
        for (theta, jet) in &jets {
            let c = coefficient_terms(jet, s, w.epsilon).sample;
            let r = *theta / s;
            row.min_d = row.min_d.min(c.d * r.powi(5));
            row.min_e = row.min_e.min(c.e * r * r);
            row.min_f = row.min_f.min(c.f * r);
        }
        rows.push(row);
    }
    let s_star = rows.iter().find(|r| r.all_positive()).map(|r| r.s);
    let last = rows.last().expect("nonempty");
    let plateau = (last.min_d, last.min_e, last.min_f);
    Ok(ScanReport { rows, s_star, plateau })
}

/// Admissible test functions `q = (L^2 - x^2)^3 g(t)`; `q`, `q_x`, `q_xx`
/// vanish at `x = +-L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFunction {
    Zero,
    /// `g = 1`
    Stationary,
    /// `g = sin(pi t / T)`
    Sine,
    /// `g = t (T - t)`
    Parabolic,
}

impl TestFunction {
    pub const FAMILY: [TestFunction; 3] = [Self::Stationary, Self::Sine, Self::Parabolic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Stationary => "stationary",
            Self::Sine => "sine",
            Self::Parabolic => "parabolic",
        }
    }

    /// `(g, g')` at `t`.
    fn time_profile<S: Real>(self, t: S, horizon: S) -> (S, S) {
        match self {
            Self::Zero => (S::zero(), S::zero()),
            Self::Stationary => (S::one(), S::zero()),
            Self::Sine => {
                let k = S::PI() / horizon;
                ((k * t).sin(), k * (k * t).cos())
            }
            Self::Parabolic => (t * (horizon - t), horizon - t - t),
        }
    }

    /// `[q, q_x, q_xx, q_xxx, q_t]` at `(x, t)`.
    pub fn eval<S: Real>(self, half_width: S, horizon: S, x: S, t: S) -> [S; 5] {
        let (g, dg) = self.time_profile(t, horizon);
        let l = S::lit;
        let r = half_width * half_width - x * x;
        let p0 = r * r * r;
        let p1 = -l(6.0) * x * r * r;
        let p2 = -l(6.0) * r * r + l(24.0) * x * x * r;
        let p3 = l(72.0) * x * r - l(48.0) * x * x * x;
        [p0 * g, p1 * g, p2 * g, p3 * g, p0 * dg]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlemanRatio<S: Real> {
    pub lhs: S,
    pub rhs: S,
    pub ratio: S,
}

/// Both sides of the weighted inequality for a test function.
///
/// The weight `exp(-2 s psi / (t (T - t)))` is divided by its peak value
/// `exp(-2 s min psi / (T^2 / 4))`; the ratio is unaffected and `lhs`, `rhs`
/// stay representable for large `s`.
pub fn carleman_ratio<S: Real>(
    q: TestFunction,
    w: &CarlemanWeight<S>,
    s: S,
    grid_n: usize,
    time_n: usize,
) -> Result<CarlemanRatio<S>> {
    if grid_n < 2 || time_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_n, time_n",
            reason: "need at least two intervals per axis".into(),
        });
    }
    let horizon = w.horizon;
    let hw = w.half_width;
    let hx = (hw + hw) / S::from_count(grid_n);
    let ht = horizon / S::from_count(time_n);
    let min_psi = w.conditions().min_psi;
    let peak = S::lit(2.0) * s * min_psi / (horizon * horizon / S::lit(4.0));
    let half = S::lit(0.5);
    let mut lhs = S::zero();
    let mut rhs = S::zero();
    // Endpoint times contribute nothing: the weight vanishes to all orders there.
    for it in 1..time_n {
        let t = ht * S::from_count(it);
        let theta = w.theta(t);
        let r = s / theta;
        let (r3, r5) = (r * r * r, r * r * r * r * r);
        for ix in 0..=grid_n {
            let x = -hw + hx * S::from_count(ix);
            let wx = if ix == 0 || ix == grid_n { half } else { S::one() };
            let weight = (peak - S::lit(2.0) * s * w.psi(x, 0) / theta).exp();
            if weight == S::zero() {
                continue;
            }
            let [v, vx, vxx, vxxx, vt] = q.eval(hw, horizon, x, t);
            let res = vt - vxx + vxxx;
            lhs = lhs + wx * weight * (r5 * v * v + r3 * vx * vx + r * vxx * vxx);
            rhs = rhs + wx * weight * res * res;
        }
    }
    lhs = lhs * hx * ht;
    rhs = rhs * hx * ht;
    let ratio = if rhs > S::zero() {
        lhs / rhs
    } else if lhs == S::zero() {
        S::zero()
    } else {
        S::infinity()
    };
    Ok(CarlemanRatio { lhs, rhs, ratio })
}
