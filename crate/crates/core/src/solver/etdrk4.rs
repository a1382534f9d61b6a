//! Fourth-order exponential time differencing (Cox-Matthews scheme with
//! contour-averaged coefficients).

use num_complex::Complex;

use crate::dynamics::{DampingKind, FluxOperator};
use crate::error::Result;
use crate::scalar::Real;
use crate::spectral::{Field, Grid};

use super::config::SimConfig;

/// Number of contour nodes used to evaluate the phi-functions.
pub const CONTOUR_POINTS: usize = 32;

/// Symbol of `d_xx - d_xxx`, i.e. `i xi^3 - xi^2`, minus `rate`.
///
/// The odd part vanishes at the Nyquist mode, matching the derivative rule.
pub fn linear_symbol<S: Real>(grid: &Grid<S>, rate: S) -> Vec<Complex<S>> {
    let nyq = grid.nyquist_index();
    grid.wavenumbers()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let dispersive = if i == nyq { S::zero() } else { xi * xi * xi };
            Complex::new(-xi * xi - rate, dispersive)
        })
        .collect()
}

/// Rate folded into the linear symbol: `lambda0` for constant damping, else 0.
pub(crate) fn folded_rate<S: Real>(cfg: &SimConfig<S>) -> S {
    if cfg.damping.kind() == DampingKind::Constant {
        cfg.damping.lambda0()
    } else {
        S::zero()
    }
}

/// Coefficients of one ETDRK4 step for a diagonal linear part.
#[derive(Clone, Debug)]
pub struct EtdCoefficients<S: Real> {
    pub e: Vec<Complex<S>>,
    pub e2: Vec<Complex<S>>,
    pub q: Vec<Complex<S>>,
    pub f1: Vec<Complex<S>>,
    pub f2: Vec<Complex<S>>,
    pub f3: Vec<Complex<S>>,
}

impl<S: Real> EtdCoefficients<S> {
    pub fn new(symbol: &[Complex<S>], dt: S) -> Self {
        let n = symbol.len();
        let mut out = Self {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        let m = S::from_count(CONTOUR_POINTS);
        let roots: Vec<Complex<S>> = (0..CONTOUR_POINTS)
            .map(|j| {
                let theta = S::TAU() * (S::from_count(j) + S::lit(0.5)) / m;
                Complex::new(theta.cos(), theta.sin())
            })
            .collect();
        let one = Complex::new(S::one(), S::zero());
        let c = |x: f64| Complex::new(S::lit(x), S::zero());
        for &l in symbol {
            let hl = l * dt;
            out.e.push(hl.exp());
            out.e2.push((hl * S::lit(0.5)).exp());
            let zero = Complex::new(S::zero(), S::zero());
            let (mut q, mut f1, mut f2, mut f3) = (zero, zero, zero, zero);
            for &root in &roots {
                let r = hl + root;
                let er = r.exp();
                let r3 = r * r * r;
                q = q + ((r * S::lit(0.5)).exp() - one) / r;
                f1 = f1 + (c(-4.0) - r + er * (c(4.0) - r * S::lit(3.0) + r * r)) / r3;
                f2 = f2 + (c(2.0) + r + er * (r - c(2.0))) / r3;
                f3 = f3 + (c(-4.0) - r * S::lit(3.0) - r * r + er * (c(4.0) - r)) / r3;
            }
            let w = dt / m;
            out.q.push(q * w);
            out.f1.push(f1 * w);
            out.f2.push(f2 * w);
            out.f3.push(f3 * w);
        }
        out
    }
}

/// Reusable stepper for a fixed configuration and step size.
pub struct Etdrk4<S: Real> {
    coeffs: EtdCoefficients<S>,
    op: FluxOperator<S>,
    nv: Vec<Complex<S>>,
    na: Vec<Complex<S>>,
    nb: Vec<Complex<S>>,
    nc: Vec<Complex<S>>,
    a: Vec<Complex<S>>,
    b: Vec<Complex<S>>,
    c: Vec<Complex<S>>,
}

impl<S: Real> Etdrk4<S> {
    pub fn new(cfg: &SimConfig<S>, grid: &Grid<S>, dt: S) -> Result<Self> {
        let rate = folded_rate(cfg);
        let symbol = linear_symbol(grid, rate);
        let damping = if cfg.damping.kind() == DampingKind::Constant || cfg.damping.kind() == DampingKind::Zero {
            None
        } else {
            cfg.damping.validate()?;
            Some(Field::from_fn(grid, |x| cfg.damping.eval(x))?)
        };
        let n = grid.n_points();
        let zero = vec![Complex::new(S::zero(), S::zero()); n];
        Ok(Self {
            coeffs: EtdCoefficients::new(&symbol, dt),
            op: FluxOperator::new(grid, cfg.nonlinearity, damping.as_ref()),
            nv: zero.clone(),
            na: zero.clone(),
            nb: zero.clone(),
            nc: zero.clone(),
            a: zero.clone(),
            b: zero.clone(),
            c: zero,
        })
    }

    pub fn coefficients(&self) -> &EtdCoefficients<S> {
        &self.coeffs
    }

    /// Advances the coefficient vector `v` by one step in place.
    pub fn step(&mut self, v: &mut [Complex<S>]) -> Result<()> {
        let k = &self.coeffs;
        self.op.eval_spectral(v, &mut self.nv)?;
        for i in 0..v.len() {
            self.a[i] = k.e2[i] * v[i] + k.q[i] * self.nv[i];
        }
        self.op.eval_spectral(&self.a, &mut self.na)?;
        for i in 0..v.len() {
            self.b[i] = k.e2[i] * v[i] + k.q[i] * self.na[i];
        }
        self.op.eval_spectral(&self.b, &mut self.nb)?;
        let two = S::lit(2.0);
        for i in 0..v.len() {
            self.c[i] = k.e2[i] * self.a[i] + k.q[i] * (self.nb[i] * two - self.nv[i]);
        }
        self.op.eval_spectral(&self.c, &mut self.nc)?;
        for i in 0..v.len() {
            v[i] =
                k.e[i] * v[i] + self.nv[i] * k.f1[i] + (self.na[i] + self.nb[i]) * k.f2[i] * two + self.nc[i] * k.f3[i];
        }
        Ok(())
    }
}

/// One ETDRK4 step of size `dt` from `u` under the dynamics of `cfg`.
pub fn etdrk4_step<S: Real>(u: &Field<S>, cfg: &SimConfig<S>, dt: S) -> Result<Field<S>> {
    let grid = u.grid();
    let sup = u.sup_norm();
    if sup > cfg.blowup_guard {
        return Err(crate::Error::BlowUp {
            t: 0.0,
            step: 0,
            sup_norm: sup.to_f64_lossy(),
        });
    }
    let mut stepper = Etdrk4::new(cfg, grid, dt)?;
    let mut v = vec![Complex::new(S::zero(), S::zero()); grid.n_points()];
    grid.forward_into(u.values(), &mut v);
    stepper.step(&mut v)?;
    let mut values = vec![S::zero(); grid.n_points()];
    grid.backward_into(&mut v, &mut values);
    Field::new(grid, values)
}
