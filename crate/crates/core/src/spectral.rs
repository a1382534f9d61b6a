//! Periodic grid, discrete Fourier transforms and spectral calculus.
//!
//! The real line is truncated to the periodic box `[-half_length, half_length)`
//! sampled at `n` equispaced points `x_j = -half_length + j dx`. Spectral
//! coefficients are stored in FFT order (`k = 0, 1, .., n/2 - 1, -n/2, .., -1`)
//! and normalized so that
//!
//! ```text
//! u_hat[k] = (1/n) * sum_j u_j exp(-2 pi i j k / n)
//! dx * sum_j u_j^2 = 2 * half_length * sum_k |u_hat[k]|^2
//! ```
//!
//! `u_hat[k]` is therefore the amplitude of `exp(i xi_k (x + half_length))`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fraction of the box (measured from each end) that counts as the boundary tail.
pub const TAIL_BAND: f64 = 0.1;

struct GridData<S: Real> {
    half_length: S,
    n: usize,
    dx: S,
    points: Vec<S>,
    wavenumbers: Vec<S>,
    forward: Arc<dyn Fft<S>>,
    backward: Arc<dyn Fft<S>>,
}

/// Uniform periodic grid on `[-half_length, half_length)`.
///
/// Cloning is cheap; clones share FFT plans.
#[derive(Clone)]
pub struct Grid<S: Real>(Arc<GridData<S>>);

impl<S: Real> fmt::Debug for Grid<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.0.half_length)
            .field("n_points", &self.0.n)
            .finish()
    }
}

impl<S: Real> PartialEq for Grid<S> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.half_length == other.0.half_length)
    }
}

impl<S: Real> Grid<S> {
    /// Builds a grid. `n_points` must be a power of two no smaller than 16.
    pub fn new(half_length: S, n_points: usize) -> Result<Self> {
        if !half_length.is_finite() || half_length <= S::zero() {
            return Err(Error::InvalidGrid(format!(
                "half_length must be finite and positive, got {half_length}"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        let n = n_points;
        let nf = S::from_count(n);
        let dx = (half_length + half_length) / nf;
        let points = (0..n).map(|j| -half_length + S::from_count(j) * dx).collect();
        let base = S::PI() / half_length;
        let wavenumbers = (0..n)
            .map(|i| {
                let k = mode_number(i, n);
                base * S::lit(k as f64)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let backward = planner.plan_fft_inverse(n);
        Ok(Self(Arc::new(GridData {
            half_length,
            n,
            dx,
            points,
            wavenumbers,
            forward,
            backward,
        })))
    }

    pub fn half_length(&self) -> S {
        self.0.half_length
    }

    pub fn n_points(&self) -> usize {
        self.0.n
    }

    pub fn dx(&self) -> S {
        self.0.dx
    }

    /// Sample locations `x_j`.
    pub fn points(&self) -> &[S] {
        &self.0.points
    }

    /// Wavenumbers `xi_k = pi k / half_length`, in FFT storage order.
    pub fn wavenumbers(&self) -> &[S] {
        &self.0.wavenumbers
    }

    /// Integer mode number `k` stored at FFT index `i`.
    pub fn mode_number(&self, i: usize) -> isize {
        mode_number(i, self.0.n)
    }

    /// FFT index of the Nyquist mode `k = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.0.n / 2
    }

    /// Forward transform of real samples into normalized coefficients.
    pub fn forward_into(&self, values: &[S], out: &mut [Complex<S>]) {
        debug_assert_eq!(values.len(), self.0.n);
        let scale = S::one() / S::from_count(self.0.n);
        for (o, &v) in out.iter_mut().zip(values) {
            *o = Complex::new(v, S::zero());
        }
        self.0.forward.process(out);
        for o in out.iter_mut() {
            *o = *o * scale;
        }
    }

    /// Inverse transform; `buf` is overwritten, real parts land in `out`.
    pub fn backward_into(&self, buf: &mut [Complex<S>], out: &mut [S]) {
        debug_assert_eq!(buf.len(), self.0.n);
        self.0.backward.process(buf);
        for (o, c) in out.iter_mut().zip(buf.iter()) {
            *o = c.re;
        }
    }

    /// Parseval weight `w` with `dx * sum u_j^2 = w * sum |u_hat|^2`.
    pub fn parseval_weight(&self) -> S {
        self.0.half_length + self.0.half_length
    }

    /// Fraction of the discrete L2 mass carried by points in the outer tail band.
    pub fn tail_fraction(&self, values: &[S]) -> S {
        let cut = S::lit(1.0 - TAIL_BAND) * self.0.half_length;
        let mut total = S::zero();
        let mut tail = S::zero();
        for (&x, &u) in self.0.points.iter().zip(values) {
            let m = u * u;
            total = total + m;
            if x.abs() > cut {
                tail = tail + m;
            }
        }
        if total > S::zero() {
            tail / total
        } else {
            S::zero()
        }
    }
}

/// Builds a grid; see [`Grid::new`].
pub fn make_grid<S: Real>(half_length: S, n_points: usize) -> Result<Grid<S>> {
    Grid::new(half_length, n_points)
}

fn mode_number(i: usize, n: usize) -> isize {
    if i < n / 2 {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<S: Real> {
    grid: Grid<S>,
    values: Vec<S>,
}

impl<S: Real> Field<S> {
    pub fn new(grid: &Grid<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub(crate) fn from_vec_unchecked(grid: &Grid<S>, values: Vec<S>) -> Self {
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid<S>) -> Self {
        Self::from_vec_unchecked(grid, vec![S::zero(); grid.n_points()])
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: &Grid<S>, f: impl Fn(S) -> S) -> Result<Self> {
        Self::new(grid, grid.points().iter().map(|&x| f(x)).collect())
    }

    /// Seeded band-limited random field with modes `1 <= |k| <= cutoff`,
    /// scaled to discrete L2 norm `amplitude`.
    pub fn random_band_limited(grid: &Grid<S>, seed: u64, cutoff: usize, amplitude: S) -> Result<Self> {
        let n = grid.n_points();
        if cutoff == 0 || cutoff >= n / 2 {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                reason: format!("must lie in 1..{}", n / 2),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![Complex::new(S::zero(), S::zero()); n];
        for k in 1..=cutoff {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let c = Complex::new(S::lit(re), S::lit(im));
            coeffs[k] = c;
            coeffs[n - k] = c.conj();
        }
        let mut values = vec![S::zero(); n];
        grid.backward_into(&mut coeffs, &mut values);
        let field = Self::from_vec_unchecked(grid, values);
        let norm = field.l2_norm();
        if norm > S::zero() {
            Ok(field.scaled(amplitude / norm))
        } else {
            Ok(field)
        }
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// Discrete L2 norm `(dx sum u_j^2)^(1/2)`.
    pub fn l2_norm(&self) -> S {
        let sum = self.values.iter().fold(S::zero(), |acc, &v| acc + v * v);
        (sum * self.grid.dx()).sqrt()
    }

    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn tail_fraction(&self) -> S {
        self.grid.tail_fraction(&self.values)
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self::from_vec_unchecked(&self.grid, self.values.iter().map(|&v| v * factor).collect())
    }

    /// `self - other`, pointwise.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect();
        Ok(Self::from_vec_unchecked(&self.grid, values))
    }

    /// `self + other`, pointwise.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Ok(Self::from_vec_unchecked(&self.grid, values))
    }
}

/// Normalized discrete Fourier coefficients of a [`Field`], in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<S: Real> {
    grid: Grid<S>,
    coeffs: Vec<Complex<S>>,
}

impl<S: Real> Spectrum<S> {
    pub fn new(grid: &Grid<S>, coeffs: Vec<Complex<S>>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub(crate) fn from_vec_unchecked(grid: &Grid<S>, coeffs: Vec<Complex<S>>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<S>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<S>> {
        self.coeffs
    }

    /// Largest violation of `c[-k] = conj(c[k])`, relative to the largest coefficient.
    pub fn conjugate_asymmetry(&self) -> S {
        let n = self.coeffs.len();
        let scale = self.coeffs.iter().fold(S::zero(), |m, c| m.max(c.norm()));
        if scale == S::zero() {
            return S::zero();
        }
        let mut worst = (self.coeffs[0].im).abs().max(self.coeffs[n / 2].im.abs());
        for k in 1..n / 2 {
            worst = worst.max((self.coeffs[k] - self.coeffs[n - k].conj()).norm());
        }
        worst / scale
    }
}

/// Forward transform.
pub fn transform<S: Real>(f: &Field<S>) -> Spectrum<S> {
    let mut coeffs = vec![Complex::new(S::zero(), S::zero()); f.grid.n_points()];
    f.grid.forward_into(&f.values, &mut coeffs);
    Spectrum::from_vec_unchecked(&f.grid, coeffs)
}

/// Inverse transform; imaginary residue is discarded.
pub fn inverse<S: Real>(s: &Spectrum<S>) -> Field<S> {
    let mut buf = s.coeffs.clone();
    let mut values = vec![S::zero(); buf.len()];
    s.grid.backward_into(&mut buf, &mut values);
    Field::from_vec_unchecked(&s.grid, values)
}

/// Fourier symbol `(i xi)^order` for each stored mode; odd orders vanish at Nyquist.
pub fn derivative_symbol<S: Real>(grid: &Grid<S>, order: u32) -> Result<Vec<Complex<S>>> {
    if order > 4 {
        return Err(Error::DerivativeOrder(order));
    }
    let nyq = grid.nyquist_index();
    Ok(grid
        .wavenumbers()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            if order % 2 == 1 && i == nyq {
                Complex::new(S::zero(), S::zero())
            } else {
                Complex::new(S::zero(), xi).powu(order)
            }
        })
        .collect())
}

/// Multiplies by `(i xi)^order`, `0 <= order <= 4`.
pub fn spectral_derivative<S: Real>(s: &Spectrum<S>, order: u32) -> Result<Spectrum<S>> {
    let symbol = derivative_symbol(&s.grid, order)?;
    let coeffs = s.coeffs.iter().zip(&symbol).map(|(&c, &m)| c * m).collect();
    Ok(Spectrum::from_vec_unchecked(&s.grid, coeffs))
}

/// Physical-space derivative of a field.
pub fn differentiate<S: Real>(f: &Field<S>, order: u32) -> Result<Field<S>> {
    Ok(inverse(&spectral_derivative(&transform(f), order)?))
}

/// Whether mode number `k` survives the two-thirds rule on `n` points.
#[inline]
pub fn keeps_mode(k: isize, n: usize) -> bool {
    3 * k.unsigned_abs() <= n
}

/// In-place two-thirds rule on a coefficient buffer in FFT order.
pub fn dealias_in_place<S: Real>(coeffs: &mut [Complex<S>]) {
    let n = coeffs.len();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if !keeps_mode(mode_number(i, n), n) {
            *c = Complex::new(S::zero(), S::zero());
        }
    }
}

/// Zeroes every mode with `|k| > n/3`.
pub fn dealias<S: Real>(s: &Spectrum<S>) -> Spectrum<S> {
    let mut coeffs = s.coeffs.clone();
    dealias_in_place(&mut coeffs);
    Spectrum::from_vec_unchecked(&s.grid, coeffs)
}

/// `sum_k (1 + xi_k^2)^s |c_k|^2`, times the Parseval weight.
pub fn sobolev_norm_sq_of_coeffs<S: Real>(grid: &Grid<S>, coeffs: &[Complex<S>], s: S) -> S {
    let sum = grid.wavenumbers().iter().zip(coeffs).fold(S::zero(), |acc, (&xi, c)| {
        acc + (S::one() + xi * xi).powf(s) * c.norm_sqr()
    });
    sum * grid.parseval_weight()
}

/// `H^s` norm with Fourier multiplier `(1 + xi^2)^(s/2)`, `0 <= s <= 4`.
pub fn sobolev_norm<S: Real>(f: &Field<S>, s: S) -> Result<S> {
    if !(s >= S::zero() && s <= S::lit(4.0)) {
        return Err(Error::SobolevIndex(s.to_f64_lossy()));
    }
    let spec = transform(f);
    Ok(sobolev_norm_sq_of_coeffs(&f.grid, &spec.coeffs, s).sqrt())
}

/// Quadrature inner product `dx sum f_j g_j`.
pub fn l2_inner<S: Real>(f: &Field<S>, g: &Field<S>) -> Result<S> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let sum = f
        .values
        .iter()
        .zip(&g.values)
        .fold(S::zero(), |acc, (&a, &b)| acc + a * b);
    Ok(sum * f.grid.dx())
}
