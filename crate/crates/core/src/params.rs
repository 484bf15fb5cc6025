//! Dimensionless parameters shared by the whole pipeline.
//!
//! Time is measured in `q = Γ'₀ t / (2γ)`, velocity separations in units of
//! `c Γ'₀ / ω'₀`, and rates per unit `q`. Converting a rate to physical units
//! means multiplying by `Γ'₀ / (2γ)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Mean speed and velocity separation of the two-particle sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleParams {
    beta: f64,
    gamma: f64,
    delta_v: f64,
}

impl SampleParams {
    /// Validates `beta ∈ [0, 1)` and a finite `delta_v`.
    ///
    /// The kernel only depends on `delta_v` through a phase that is odd in it,
    /// and every downstream observable is even, so negative separations are
    /// folded to `|delta_v|`. Use [`SampleParams::with_signed_delta`] when the
    /// sign has to be kept (parity checks).
    pub fn new(beta: f64, delta_v: f64) -> Result<Self> {
        let mut p = Self::with_signed_delta(beta, delta_v)?;
        p.delta_v = p.delta_v.abs();
        Ok(p)
    }

    pub fn with_signed_delta(beta: f64, delta_v: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("{beta} is outside [0, 1)")));
        }
        if !delta_v.is_finite() {
            return Err(Error::invalid("delta_v", format!("{delta_v} is not finite")));
        }
        Ok(Self {
            beta,
            gamma: lorentz_factor(beta),
            delta_v,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta_v(&self) -> f64 {
        self.delta_v
    }

    /// Same speed, different separation.
    pub fn with_delta(&self, delta_v: f64) -> Result<Self> {
        Self::new(self.beta, delta_v)
    }
}

pub fn lorentz_factor(beta: f64) -> f64 {
    1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt()
}

/// Inverse of [`lorentz_factor`] on `gamma ≥ 1`.
pub fn beta_from_gamma(gamma: f64) -> f64 {
    ((gamma - 1.0) * (gamma + 1.0)).sqrt() / gamma
}

/// Converts a time measured in rest-frame lifetimes `1/Γ'₀` into `q`.
pub fn q_from_rest_time(beta: f64, t: f64) -> f64 {
    t / (2.0 * lorentz_factor(beta))
}

pub const DEFAULT_Q_MAX: f64 = 8.0;
pub const DEFAULT_DQ: f64 = 1e-3;

/// Uniform grid `{0, dq, 2dq, …}` in `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QGrid {
    q_max: f64,
    dq: f64,
    n: usize,
}

impl QGrid {
    pub fn new(q_max: f64, dq: f64) -> Result<Self> {
        if !dq.is_finite() || dq <= 0.0 {
            return Err(Error::invalid("dq", format!("{dq} must be positive")));
        }
        if !q_max.is_finite() || q_max < dq {
            return Err(Error::invalid(
                "q_max",
                format!("{q_max} must be finite and at least dq = {dq}"),
            ));
        }
        // Absorb representation error so that q_max = k·dq yields k+1 points.
        let n = (q_max / dq * (1.0 + 1e-12)).floor() as usize + 1;
        Ok(Self { q_max, dq, n })
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Last sample actually on the grid (≤ `q_max`).
    pub fn q_last(&self) -> f64 {
        self.q(self.n - 1)
    }

    #[inline]
    pub fn q(&self, j: usize) -> f64 {
        j as f64 * self.dq
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.q(j))
    }
}

impl Default for QGrid {
    fn default() -> Self {
        Self::new(DEFAULT_Q_MAX, DEFAULT_DQ).expect("default grid is valid")
    }
}
