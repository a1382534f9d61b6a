use crate::dynamics::{DampingSpec, NonlinearitySpec};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition<S: Real> {
    /// `amplitude * exp(-((x - center) / width)^2)`.
    Gaussian {
        amplitude: S,
        width: S,
        center: S,
    },
    /// `amplitude * sin(xi_k x)` with `xi_k = pi k / half_length`.
    SingleMode {
        k: usize,
        amplitude: S,
    },
    /// Seeded band-limited noise with modes `1..=cutoff`, scaled to L2 norm `amplitude`.
    RandomBandLimited {
        seed: u64,
        cutoff: usize,
        amplitude: S,
    },
    Zero,
}

impl<S: Real> InitialCondition<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::SingleMode { .. } => "single_mode",
            Self::RandomBandLimited { .. } => "random_band_limited",
            Self::Zero => "zero",
        }
    }

    pub fn sample(&self, grid: &Grid<S>) -> Result<Field<S>> {
        match *self {
            Self::Gaussian {
                amplitude,
                width,
                center,
            } => {
                if !(width > S::zero()) {
                    return Err(Error::InvalidParameter {
                        name: "ic.width",
                        reason: "must be positive".into(),
                    });
                }
                Field::from_fn(grid, |x| {
                    let z = (x - center) / width;
                    amplitude * (-z * z).exp()
                })
            }
            Self::SingleMode { k, amplitude } => {
                if k >= grid.n_points() / 2 {
                    return Err(Error::InvalidParameter {
                        name: "ic.k",
                        reason: format!("mode {k} not resolved by {} points", grid.n_points()),
                    });
                }
                let xi = S::PI() * S::from_count(k) / grid.half_length();
                Field::from_fn(grid, |x| amplitude * (xi * x).sin())
            }
            Self::RandomBandLimited {
                seed,
                cutoff,
                amplitude,
            } => Field::random_band_limited(grid, seed, cutoff, amplitude),
            Self::Zero => Ok(Field::zeros(grid)),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig<S: Real> {
    pub half_length: S,
    pub n_points: usize,
    pub dt: S,
    pub horizon: S,
    pub snapshot_every: usize,
    pub nonlinearity: NonlinearitySpec<S>,
    pub damping: DampingSpec<S>,
    pub initial_condition: InitialCondition<S>,
    /// Allowed fraction of L2 mass in the outer tail band.
    pub tail_threshold: S,
    /// Sup-norm ceiling; exceeding it aborts the run.
    pub blowup_guard: S,
}

pub const MAX_DT: f64 = 0.1;

impl<S: Real> Default for SimConfig<S> {
    fn default() -> Self {
        Self {
            half_length: S::lit(32.0),
            n_points: 512,
            dt: S::lit(1e-3),
            horizon: S::lit(5.0),
            snapshot_every: 500,
            nonlinearity: NonlinearitySpec::identity(),
            damping: DampingSpec::Zero,
            initial_condition: InitialCondition::Gaussian {
                amplitude: S::one(),
                width: S::lit(2.0),
                center: S::zero(),
            },
            tail_threshold: S::lit(1e-6),
            blowup_guard: S::lit(1e6),
        }
    }
}

impl<S: Real> SimConfig<S> {
    pub fn grid(&self) -> Result<Grid<S>> {
        Grid::new(self.half_length, self.n_points)
    }

    /// Number of time steps `T / dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > S::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "time.dt",
                reason: "must be positive".into(),
            });
        }
        if self.dt > S::lit(MAX_DT) {
            return Err(Error::InvalidParameter {
                name: "time.dt",
                reason: format!("must not exceed {MAX_DT}"),
            });
        }
        if !(self.horizon > S::zero()) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "time.horizon",
                reason: "must be positive".into(),
            });
        }
        let ratio = self.horizon / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > S::lit(1e-6) * steps.max(S::one()) {
            return Err(Error::InvalidParameter {
                name: "time.dt",
                reason: "horizon must be an integer multiple of dt".into(),
            });
        }
        Ok(steps.to_usize().unwrap_or(0).max(1))
    }

    pub fn validate(&self) -> Result<usize> {
        let steps = self.steps()?;
        if self.snapshot_every == 0 || steps % self.snapshot_every != 0 {
            return Err(Error::InvalidParameter {
                name: "time.snapshot_every",
                reason: format!("must divide the step count {steps}"),
            });
        }
        if !(self.tail_threshold > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "time.tail_threshold",
                reason: "must be positive".into(),
            });
        }
        if !(self.blowup_guard > S::zero()) {
            return Err(Error::InvalidParameter {
                name: "time.blowup_guard",
                reason: "must be positive".into(),
            });
        }
        self.damping.validate()?;
        Ok(steps)
    }
}
