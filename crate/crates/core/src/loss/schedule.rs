use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Coefficients of the forward noising path `x_t = alpha(t) x0 + sigma(t) eps`.
pub trait NoiseSchedule {
    fn alpha(&self, t: f64) -> f64;
    fn sigma(&self, t: f64) -> f64;
    /// `(d alpha / dt, d sigma / dt)`, if the schedule knows them.
    fn derivatives(&self, t: f64) -> Option<(f64, f64)>;
}

/// Closed-form schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Rectified flow: `alpha = 1 - t`, `sigma = t`.
    #[default]
    Linear,
    /// `alpha = cos(pi t / 2)`, `sigma = sin(pi t / 2)`.
    Cosine,
}

impl NoiseSchedule for Schedule {
    fn alpha(&self, t: f64) -> f64 {
        match self {
            Schedule::Linear => 1.0 - t,
            Schedule::Cosine => (FRAC_PI_2 * t).cos(),
        }
    }

    fn sigma(&self, t: f64) -> f64 {
        match self {
            Schedule::Linear => t,
            Schedule::Cosine => (FRAC_PI_2 * t).sin(),
        }
    }

    fn derivatives(&self, t: f64) -> Option<(f64, f64)> {
        Some(match self {
            Schedule::Linear => (-1.0, 1.0),
            Schedule::Cosine => (-FRAC_PI_2 * (FRAC_PI_2 * t).sin(), FRAC_PI_2 * (FRAC_PI_2 * t).cos()),
        })
    }
}

type Coefficient = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A schedule defined by arbitrary functions, with optional derivatives.
pub struct CustomSchedule {
    alpha: Coefficient,
    sigma: Coefficient,
    derivatives: Option<(Coefficient, Coefficient)>,
}

impl CustomSchedule {
    pub fn new(
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomSchedule { alpha: Box::new(alpha), sigma: Box::new(sigma), derivatives: None }
    }

    pub fn with_derivatives(
        mut self,
        alpha_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivatives = Some((Box::new(alpha_dot), Box::new(sigma_dot)));
        self
    }
}

impl fmt::Debug for CustomSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSchedule")
            .field("has_derivatives", &self.derivatives.is_some())
            .finish()
    }
}

impl NoiseSchedule for CustomSchedule {
    fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    fn sigma(&self, t: f64) -> f64 {
        (self.sigma)(t)
    }

    fn derivatives(&self, t: f64) -> Option<(f64, f64)> {
        self.derivatives.as_ref().map(|(a, s)| (a(t), s(t)))
    }
}
