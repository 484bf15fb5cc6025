//! Single-particle photon emission: time-dilated survival, the emission
//! propagator into one mode, and its asymptotic Doppler-shifted Lorentzian.
//!
//! Frequencies are in units of `ω'₀`; the line width enters only through
//! `linewidth_ratio = Γ'₀/ω'₀`. Amplitudes and intensities share one
//! arbitrary normalization under which the line peaks at 1.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::lorentz_factor;

/// Dipole orientation relative to the particle velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Parallel,
    Perpendicular,
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(Orientation::Parallel),
            "perpendicular" => Ok(Orientation::Perpendicular),
            other => Err(Error::invalid(
                "orientation",
                format!("`{other}` is neither `parallel` nor `perpendicular`"),
            )),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Parallel => "parallel",
            Orientation::Perpendicular => "perpendicular",
        })
    }
}

pub const DEFAULT_LINEWIDTH_RATIO: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmissionConfig {
    pub beta: f64,
    pub orientation: Orientation,
    /// Polar angle of the mode direction from the velocity.
    pub theta: f64,
    /// Azimuth of the mode direction; only used for perpendicular dipoles.
    pub phi: f64,
    pub linewidth_ratio: f64,
}

impl EmissionConfig {
    pub fn new(
        beta: f64,
        orientation: Orientation,
        theta: f64,
        phi: f64,
        linewidth_ratio: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::invalid("beta", format!("{beta} is outside [0, 1)")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("{theta} is outside [0, π]")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::invalid("phi", format!("{phi} is outside [0, 2π)")));
        }
        if !(linewidth_ratio > 0.0) || !linewidth_ratio.is_finite() {
            return Err(Error::invalid(
                "linewidth_ratio",
                format!("{linewidth_ratio} must be positive"),
            ));
        }
        Ok(Self {
            beta,
            orientation,
            theta,
            phi,
            linewidth_ratio,
        })
    }

    pub fn gamma(&self) -> f64 {
        lorentz_factor(self.beta)
    }

    /// `α_k = 1 − β cos θ`.
    pub fn doppler_factor(&self) -> f64 {
        1.0 - self.beta * self.theta.cos()
    }

    /// Line centre `ω/ω'₀ = 1/[γ(1 − β cos θ)]`.
    pub fn doppler_peak(&self) -> f64 {
        1.0 / (self.gamma() * self.doppler_factor())
    }

    /// Half width at half maximum in `ω/ω'₀`.
    pub fn half_width(&self) -> f64 {
        self.half_linewidth() / self.doppler_factor()
    }

    /// `Γ'₀/(2γ)` in units of `ω'₀`.
    fn half_linewidth(&self) -> f64 {
        self.linewidth_ratio / (2.0 * self.gamma())
    }

    /// `α_k ω − ω'₀/γ` in units of `ω'₀`.
    fn detuning(&self, omega_over_omega0: f64) -> f64 {
        self.doppler_factor() * omega_over_omega0 - 1.0 / self.gamma()
    }
}

/// Coupling of the dipole to the two transverse polarizations of a mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularFactors {
    pub theta_pol: f64,
    pub phi_pol: f64,
}

impl AngularFactors {
    pub fn total_sq(&self) -> f64 {
        self.theta_pol * self.theta_pol + self.phi_pol * self.phi_pol
    }
}

/// Parallel dipole: `sin θ/γ` into θ-polarization only. Perpendicular
/// dipole: `sin θ − β cos φ` (θ) and `cos θ sin φ` (φ).
pub fn angular_factors(cfg: &EmissionConfig) -> AngularFactors {
    let (sin_t, cos_t) = cfg.theta.sin_cos();
    match cfg.orientation {
        Orientation::Parallel => AngularFactors {
            theta_pol: sin_t / cfg.gamma(),
            phi_pol: 0.0,
        },
        Orientation::Perpendicular => {
            let (sin_p, cos_p) = cfg.phi.sin_cos();
            AngularFactors {
                theta_pol: sin_t - cfg.beta * cos_p,
                phi_pol: cos_t * sin_p,
            }
        }
    }
}

/// Excited-state survival `e^{−2q}`.
pub fn survival_probability(q: f64) -> f64 {
    (-2.0 * q).exp()
}

/// Survival after a lab-frame time `t` measured in `1/Γ'₀`: `e^{−t/γ}`.
pub fn survival_after(beta: f64, t: f64) -> f64 {
    (-t / lorentz_factor(beta)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmissionAmplitude {
    pub theta_pol: Complex64,
    pub phi_pol: Complex64,
}

impl EmissionAmplitude {
    pub fn probability(&self) -> f64 {
        self.theta_pol.norm_sqr() + self.phi_pol.norm_sqr()
    }
}

/// Amplitude to find the photon in mode `(ω, θ, φ)` at time `q` after
/// starting excited:
///
/// ```text
/// −i·f/(h + iΔ)·[e^{iΔ·τ} − e^{−q}],   τ = ω'₀Δt = 2γq/(Γ'₀/ω'₀)
/// ```
///
/// with `h = Γ'₀/(2γ)` and `Δ = α_k ω − ω'₀/γ`, scaled by `h/|f|` so the
/// asymptotic probability peaks at 1.
pub fn emission_amplitude(cfg: &EmissionConfig, omega_over_omega0: f64, q: f64) -> EmissionAmplitude {
    let f = angular_factors(cfg);
    let norm = f.total_sq().sqrt();
    if norm == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return EmissionAmplitude {
            theta_pol: zero,
            phi_pol: zero,
        };
    }
    let h = cfg.half_linewidth();
    let det = cfg.detuning(omega_over_omega0);
    let tau = 2.0 * cfg.gamma() * q / cfg.linewidth_ratio;
    let time_part = Complex64::from_polar(1.0, det * tau) - (-q).exp();
    let common = -Complex64::i() * h / Complex64::new(h, det) * time_part / norm;
    EmissionAmplitude {
        theta_pol: common * f.theta_pol,
        phi_pol: common * f.phi_pol,
    }
}

/// Asymptotic emission probability density over `ω`: a Lorentzian in the
/// detuning, normalized to 1 at the Doppler-shifted centre, or 0 when the
/// dipole does not couple to the direction at all.
pub fn line_shape(cfg: &EmissionConfig, omega_over_omega0: f64) -> f64 {
    if angular_factors(cfg).total_sq() == 0.0 {
        return 0.0;
    }
    let h = cfg.half_linewidth();
    let det = cfg.detuning(omega_over_omega0);
    h * h / (det * det + h * h)
}

/// `points` samples spanning `± half_widths` line half-widths around the
/// Doppler centre.
pub fn spectrum_window(cfg: &EmissionConfig, half_widths: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::invalid("points", "need at least two samples"));
    }
    if !(half_widths > 0.0) || !half_widths.is_finite() {
        return Err(Error::invalid("window", format!("{half_widths} must be positive")));
    }
    let centre = cfg.doppler_peak();
    let span = half_widths * cfg.half_width();
    let lo = (centre - span).max(0.0);
    let hi = centre + span;
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            let w = lo + k as f64 * step;
            (w, line_shape(cfg, w))
        })
        .collect())
}
