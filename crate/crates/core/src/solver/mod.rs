//! Time evolution: exact linear semigroup, ETDRK4 production stepper and the
//! Picard iteration on the Duhamel formula.

mod config;
mod etdrk4;
mod picard;

use num_complex::Complex;

pub use config::{InitialCondition, SimConfig, MAX_DT};
pub use etdrk4::{etdrk4_step, linear_symbol, EtdCoefficients, Etdrk4, CONTOUR_POINTS};
pub use picard::{picard_solve, PicardReport, PICARD_FLOOR};

use crate::diagnostics::EnergyLedgerEntry;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{sobolev_norm_sq_of_coeffs, Field, Grid, Spectrum};

/// Applies the semigroup of `u_t + u_xxx - u_xx = 0` for time `dt`:
/// every coefficient is multiplied by `exp(dt (i xi^3 - xi^2))`.
pub fn linear_propagator<S: Real>(s: &Spectrum<S>, dt: S) -> Result<Spectrum<S>> {
    if !(dt >= S::zero()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "propagation time must be >= 0".into(),
        });
    }
    let symbol = linear_symbol(s.grid(), S::zero());
    let coeffs = s
        .coeffs()
        .iter()
        .zip(&symbol)
        .map(|(&c, &l)| c * (l * dt).exp())
        .collect();
    Spectrum::new(s.grid(), coeffs)
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct Trajectory<S: Real> {
    pub config: SimConfig<S>,
    /// Snapshot times.
    pub times: Vec<S>,
    pub snapshots: Vec<Field<S>>,
    /// One entry per step, plus the initial state.
    pub ledger: Vec<EnergyLedgerEntry<S>>,
    /// Set when the boundary tail exceeded `config.tail_threshold` at some step.
    pub tail_warning: bool,
}

impl<S: Real> Trajectory<S> {
    pub fn grid(&self) -> &Grid<S> {
        self.snapshots[0].grid()
    }

    pub fn initial(&self) -> &Field<S> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Field<S> {
        self.snapshots.last().expect("at least the initial snapshot")
    }

    /// `(t, ||u(t)||_2)` at every ledger entry.
    pub fn l2_series(&self) -> Vec<(S, S)> {
        self.ledger.iter().map(|e| (e.t, e.l2_sq.sqrt())).collect()
    }

    pub fn max_tail_fraction(&self) -> S {
        self.ledger.iter().fold(S::zero(), |m, e| m.max(e.tail_fraction))
    }
}

pub(crate) struct LedgerProbe<S: Real> {
    grid: Grid<S>,
    damping: Vec<S>,
    xi_sq: Vec<S>,
}

impl<S: Real> LedgerProbe<S> {
    pub(crate) fn new(grid: &Grid<S>, damping: &crate::dynamics::DampingSpec<S>) -> Self {
        Self {
            grid: grid.clone(),
            damping: grid.points().iter().map(|&x| damping.eval(x)).collect(),
            xi_sq: grid.wavenumbers().iter().map(|&xi| xi * xi).collect(),
        }
    }

    pub(crate) fn entry(&self, t: S, u: &[S], v: &[Complex<S>]) -> EnergyLedgerEntry<S> {
        let dx = self.grid.dx();
        let w = self.grid.parseval_weight();
        let mut l2 = S::zero();
        let mut damp = S::zero();
        for (&uj, &bj) in u.iter().zip(&self.damping) {
            l2 = l2 + uj * uj;
            damp = damp + bj * uj * uj;
        }
        let grad = self
            .xi_sq
            .iter()
            .zip(v)
            .fold(S::zero(), |acc, (&k2, c)| acc + k2 * c.norm_sqr())
            * w;
        EnergyLedgerEntry {
            t,
            l2_sq: l2 * dx,
            grad_sq: grad,
            damp_quad: damp * dx,
            tail_fraction: self.grid.tail_fraction(u),
            h3_sq: sobolev_norm_sq_of_coeffs(&self.grid, v, S::lit(3.0)),
        }
    }
}

/// Runs `cfg` from its configured initial condition.
pub fn simulate<S: Real>(cfg: &SimConfig<S>) -> Result<Trajectory<S>> {
    let grid = cfg.grid()?;
    let u0 = cfg.initial_condition.sample(&grid)?;
    simulate_from(cfg, &u0)
}

/// Runs `cfg` from an explicit initial field.
pub fn simulate_from<S: Real>(cfg: &SimConfig<S>, u0: &Field<S>) -> Result<Trajectory<S>> {
    let steps = cfg.validate()?;
    let grid = u0.grid().clone();
    if grid.n_points() != cfg.n_points || grid.half_length() != cfg.half_length {
        return Err(Error::GridMismatch);
    }
    let n = grid.n_points();
    let mut stepper = Etdrk4::new(cfg, &grid, cfg.dt)?;
    let probe = LedgerProbe::new(&grid, &cfg.damping);

    let mut v = vec![Complex::new(S::zero(), S::zero()); n];
    grid.forward_into(u0.values(), &mut v);
    let mut u = u0.values().to_vec();
    let mut buf = v.clone();

    let mut ledger = Vec::with_capacity(steps + 1);
    let mut times = vec![S::zero()];
    let mut snapshots = vec![u0.clone()];
    let first = probe.entry(S::zero(), &u, &v);
    let mut tail_warning = first.tail_fraction > cfg.tail_threshold;
    ledger.push(first);

    for step in 1..=steps {
        let t = cfg.dt * S::from_count(step);
        stepper.step(&mut v).map_err(|_| Error::BlowUp {
            t: t.to_f64_lossy(),
            step,
            sup_norm: f64::INFINITY,
        })?;
        buf.copy_from_slice(&v);
        grid.backward_into(&mut buf, &mut u);
        let sup = u.iter().fold(
            S::zero(),
            |m, x| if x.is_finite() { m.max(x.abs()) } else { S::infinity() },
        );
        if !(sup <= cfg.blowup_guard) {
            return Err(Error::BlowUp {
                t: t.to_f64_lossy(),
                step,
                sup_norm: sup.to_f64_lossy(),
            });
        }
        let entry = probe.entry(t, &u, &v);
        tail_warning |= entry.tail_fraction > cfg.tail_threshold;
        ledger.push(entry);
        if step % cfg.snapshot_every == 0 {
            times.push(t);
            snapshots.push(Field::from_vec_unchecked(&grid, u.clone()));
        }
    }

    Ok(Trajectory {
        config: cfg.clone(),
        times,
        snapshots,
        ledger,
        tail_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DampingSpec, NonlinearitySpec};
    use crate::spectral::{transform, Field};
    use std::f64::consts::PI;

    #[test]
    fn propagator_multipliers() {
        let g = Grid::<f64>::new(PI, 16).unwrap();
        let ones = Spectrum::new(&g, vec![Complex::new(1.0, 0.0); 16]).unwrap();
        let out = linear_propagator(&ones, 1.0).unwrap();
        assert_eq!(out.coeffs()[0], Complex::new(1.0, 0.0));
        let m = out.coeffs()[1];
        let expected = Complex::new(-1.0, 1.0).exp();
        assert!((m - expected).norm() < 1e-15);
        assert!((m.norm() - 0.36787944117144233).abs() < 1e-15);
        assert_eq!(linear_propagator(&ones, 0.0).unwrap(), ones);
        assert!(linear_propagator(&ones, -1.0).is_err());
    }

    #[test]
    fn semigroup_law_and_contraction() {
        let g = Grid::<f64>::new(8.0, 128).unwrap();
        let f = Field::<f64>::random_band_limited(&g, 11, 60, 1.0).unwrap();
        let s = transform(&f);
        let ab = linear_propagator(&linear_propagator(&s, 0.3).unwrap(), 0.45).unwrap();
        let direct = linear_propagator(&s, 0.75).unwrap();
        for (a, b) in ab.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm())));
        }
        for t in [0.0, 1e-3, 0.5, 3.0] {
            let p = linear_propagator(&s, t).unwrap();
            for (a, b) in p.coeffs().iter().zip(s.coeffs()) {
                assert!(a.norm() <= b.norm());
            }
        }
    }

    #[test]
    fn zero_initial_condition_stays_zero() {
        let cfg = SimConfig::<f64> {
            horizon: 0.1,
            snapshot_every: 10,
            initial_condition: InitialCondition::Zero,
            ..SimConfig::<f64>::default()
        };
        let tr = simulate(&cfg).unwrap();
        assert_eq!(tr.ledger.len(), 101);
        assert!(tr
            .ledger
            .iter()
            .all(|e| e.l2_sq == 0.0 && e.grad_sq == 0.0 && e.damp_quad == 0.0));
        assert!(tr.snapshots.iter().all(|s| s.sup_norm() == 0.0));
        assert!(!tr.tail_warning);
    }

    #[test]
    fn linear_single_mode_is_exact() {
        let cfg = SimConfig::<f64> {
            half_length: PI,
            n_points: 64,
            dt: 1e-3,
            horizon: 1.0,
            snapshot_every: 100,
            nonlinearity: NonlinearitySpec::<f64>::none(),
            damping: DampingSpec::<f64>::Constant { lambda0: 0.5 },
            initial_condition: InitialCondition::SingleMode { k: 1, amplitude: 1.0 },
            ..SimConfig::<f64>::default()
        };
        let tr = simulate(&cfg).unwrap();
        let n0 = tr.ledger[0].l2_sq.sqrt();
        for e in &tr.ledger {
            let exact = (-1.5 * e.t).exp() * n0;
            assert!((e.l2_sq.sqrt() - exact).abs() <= 1e-8 * exact);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::<f64> {
            dt: 0.2,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.dt = 3e-3;
        cfg.horizon = 1.0;
        assert!(cfg.validate().is_err());
        cfg.dt = 1e-3;
        cfg.snapshot_every = 3;
        assert!(cfg.validate().is_err());
        cfg.snapshot_every = 100;
        assert_eq!(cfg.validate().unwrap(), 1000);
    }

    #[test]
    fn blowup_guard_trips() {
        let cfg = SimConfig::<f64> {
            horizon: 0.01,
            snapshot_every: 1,
            blowup_guard: 0.5,
            ..SimConfig::<f64>::default()
        };
        assert!(matches!(simulate(&cfg), Err(Error::BlowUp { .. })));
    }
}
