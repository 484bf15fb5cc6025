//! The relativistic velocity coherence kernel
//!
//! ```text
//! C(q) = 3/(8γ²) ∫_{-1}^{1} dx  N(x; β)/(1 − βx)⁴ · exp(i·2δ·x·q/(1 − βx))
//! N(x; β) = (1 + β²)(1 + x²) − 4βx
//! ```
//!
//! over `x = cos θ_k`. The quadrature runs in `y = x/(1 − βx)`, where the
//! phase `2δq·y` is linear and the remaining weight is a smooth low-order
//! function, using equal Gauss–Legendre panels refined until the
//! inter-order error estimate meets the tolerance.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{QGrid, SampleParams};
use crate::quadrature::{integrate_adaptive, integrate_oscillatory, AdaptiveOptions};

/// Target phase advance per initial panel, in radians. Chosen so the
/// low-order rule already resolves a panel and bisection is rare.
const PHASE_PER_PANEL: f64 = 56.0;

#[inline]
pub fn angular_numerator(beta: f64, x: f64) -> f64 {
    (1.0 + beta * beta) * (1.0 + x * x) - 4.0 * beta * x
}

#[inline]
fn weight(beta: f64, x: f64) -> f64 {
    let d = 1.0 - beta * x;
    let d2 = d * d;
    angular_numerator(beta, x) / (d2 * d2)
}

/// Panel boundaries on `[-1, 1]` equally spaced in `x/(1 − βx)`, which
/// crowds them towards `x = 1` where `(1 − βx)⁻⁴` peaks.
fn forward_breaks(beta: f64, m: usize) -> Vec<f64> {
    let y_lo = -1.0 / (1.0 + beta);
    let y_hi = 1.0 / (1.0 - beta);
    let mut breaks: Vec<f64> = (0..=m)
        .map(|i| {
            let y = y_lo + (y_hi - y_lo) * i as f64 / m as f64;
            y / (1.0 + beta * y)
        })
        .collect();
    breaks[0] = -1.0;
    breaks[m] = 1.0;
    breaks
}

/// `C(q)` for the given sample; `delta_v` may carry a sign.
pub fn eval_kernel(params: &SampleParams, q: f64) -> Result<Complex64> {
    eval_kernel_with(params, q, AdaptiveOptions::default())
}

pub fn eval_kernel_with(params: &SampleParams, q: f64, opts: AdaptiveOptions) -> Result<Complex64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::invalid("q", format!("{q} must be finite and non-negative")));
    }
    let beta = params.beta();
    let a = 2.0 * params.delta_v() * q;
    let gamma = params.gamma();
    let prefactor = 3.0 / (8.0 * gamma * gamma);
    // The prefactor scales the integral by up to ~γ⁻², so tighten the raw
    // tolerance to keep the final absolute error below `opts.tol`.
    let raw_opts = AdaptiveOptions {
        tol: opts.tol / prefactor,
        ..opts
    };
    // In y = x/(1 − βx) the phase is a·y and dx = dy/(1 + βy)².
    let y_lo = -1.0 / (1.0 + beta);
    let y_hi = 1.0 / (1.0 - beta);
    let g = |y: f64| {
        let s = 1.0 + beta * y;
        weight(beta, y / s) / (s * s)
    };
    let min_panels = ((a.abs() * (y_hi - y_lo)) / PHASE_PER_PANEL).ceil() as usize;
    match integrate_oscillatory(&g, a, y_lo, y_hi, min_panels.max(2), raw_opts) {
        Ok(r) => Ok(r.value * prefactor),
        Err(e) => Err(Error::QuadratureBudget {
            beta,
            delta_v: params.delta_v(),
            q,
            budget: opts.max_panels,
            estimate: e.0.error * prefactor,
        }),
    }
}

/// `∫₀^q C(s) ds` without discretizing `s`: the time integral of the phase
/// factor is done analytically, leaving
/// `q · 3/(8γ²) ∫ g(y)·(e^{iκy} − 1)/(iκy) dy` with `κ = 2δq`.
pub fn kernel_integral(params: &SampleParams, q: f64) -> Result<Complex64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::invalid("q", format!("{q} must be finite and non-negative")));
    }
    let beta = params.beta();
    let kappa = 2.0 * params.delta_v() * q;
    let gamma = params.gamma();
    let prefactor = 3.0 / (8.0 * gamma * gamma);
    let (y_lo, y_hi) = (-1.0 / (1.0 + beta), 1.0 / (1.0 - beta));
    let f = |y: f64| {
        let s = 1.0 + beta * y;
        let g = weight(beta, y / s) / (s * s);
        let z = kappa * y;
        let h = if z.abs() < 1e-4 {
            Complex64::new(1.0 - z * z / 6.0, z / 2.0)
        } else {
            (Complex64::from_polar(1.0, z) - 1.0) / Complex64::new(0.0, z)
        };
        h * g
    };
    let m = ((kappa.abs() * (y_hi - y_lo)) / PHASE_PER_PANEL).ceil().max(2.0) as usize;
    let breaks: Vec<f64> = (0..=m)
        .map(|i| y_lo + (y_hi - y_lo) * i as f64 / m as f64)
        .collect();
    let opts = AdaptiveOptions {
        tol: 1e-12 / prefactor,
        ..AdaptiveOptions::default()
    };
    integrate_adaptive(&f, &breaks, opts)
        .map(|r| r.value * prefactor * q)
        .map_err(|e| Error::QuadratureBudget {
            beta,
            delta_v: params.delta_v(),
            q,
            budget: opts.max_panels,
            estimate: e.0.error * prefactor * q,
        })
}

/// Kernel sampled on a q-grid plus the midpoints `q_j + dq/2` that the RK4
/// stages need.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub params: SampleParams,
    pub grid: QGrid,
    /// `values[j] = C(q_j)`.
    pub values: Vec<Complex64>,
    /// `midpoints[j] = C(q_j + dq/2)`, length `grid.len() - 1`.
    pub midpoints: Vec<Complex64>,
}

impl KernelTable {
    /// A table holding a prescribed kernel, for driving the propagator
    /// integrator with synthetic inputs (e.g. `C ≡ 0`).
    pub fn from_fn(params: SampleParams, grid: QGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let dq = grid.dq();
        let values = grid.points().map(&f).collect();
        let midpoints = (0..grid.len() - 1)
            .map(|j| f(grid.q(j) + 0.5 * dq))
            .collect();
        Self {
            params,
            grid,
            values,
            midpoints,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates the kernel at every full and half step of `grid`.
pub fn build_kernel_table(params: &SampleParams, grid: &QGrid) -> Result<KernelTable> {
    build_kernel_table_with(params, grid, AdaptiveOptions::default())
}

pub fn build_kernel_table_with(
    params: &SampleParams,
    grid: &QGrid,
    opts: AdaptiveOptions,
) -> Result<KernelTable> {
    let n = grid.len();
    let half = 0.5 * grid.dq();
    let all: Vec<Complex64> = (0..2 * n - 1)
        .into_par_iter()
        .map(|k| eval_kernel_with(params, k as f64 * half, opts))
        .collect::<Result<_>>()?;
    let values = all.iter().step_by(2).copied().collect();
    let midpoints = all.iter().skip(1).step_by(2).copied().collect();
    Ok(KernelTable {
        params: *params,
        grid: *grid,
        values,
        midpoints,
    })
}

/// `|C(q)|²` on the grid.
pub fn kernel_sq_profile(params: &SampleParams, grid: &QGrid) -> Result<Vec<f64>> {
    grid.points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| eval_kernel(params, q).map(|c| c.norm_sqr()))
        .collect()
}

/// First `q` at which a profile starting at 1 falls to 1/2, linearly
/// interpolated; `None` if it never does on the grid.
pub fn profile_half_width(profile: &[f64], grid: &QGrid) -> Option<f64> {
    let k = profile.iter().position(|&v| v <= 0.5)?;
    if k == 0 {
        return Some(0.0);
    }
    let (v0, v1) = (profile[k - 1], profile[k]);
    let q0 = grid.q(k - 1);
    Some(q0 + (v0 - 0.5) / (v0 - v1) * grid.dq())
}

/// `∫_{-1}^{1} (1 − x²)/(1 − βx)⁴ dx`, the angular factor of the
/// single-particle self-energy.
pub fn self_energy_angular_integral(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::invalid("beta", format!("{beta} is outside [0, 1)")));
    }
    let f = |x: f64| {
        let d = 1.0 - beta * x;
        let d2 = d * d;
        Complex64::new((1.0 - x * x) / (d2 * d2), 0.0)
    };
    let opts = AdaptiveOptions {
        tol: 1e-13,
        ..AdaptiveOptions::default()
    };
    integrate_adaptive(&f, &forward_breaks(beta, 4), opts)
        .map(|r| r.value.re)
        .map_err(|e| Error::QuadratureBudget {
            beta,
            delta_v: 0.0,
            q: 0.0,
            budget: opts.max_panels,
            estimate: e.0.error,
        })
}

/// Closed-form references used to validate the quadrature.
pub mod oracle {
    use num_complex::Complex64;

    use crate::params::lorentz_factor;

    /// `(4/3)·γ⁴`: the self-energy angular integral in closed form.
    pub fn self_energy(beta: f64) -> f64 {
        let g = lorentz_factor(beta);
        4.0 / 3.0 * g.powi(4)
    }

    /// The kernel for any `β` from the substitution `y = x/(1 − βx)`, which
    /// turns the integrand into `P(y)·e^{iay}` with the quadratic
    /// `P(y) = (1 + β²) − 2β(1 − β²)y + (1 − β²)²y²`, integrated exactly.
    pub fn polynomial_form_kernel(beta: f64, delta_v: f64, q: f64) -> Complex64 {
        let a = 2.0 * delta_v * q;
        let g2 = 1.0 - beta * beta;
        let c = [1.0 + beta * beta, -2.0 * beta * g2, g2 * g2];
        let (lo, hi) = (-1.0 / (1.0 + beta), 1.0 / (1.0 - beta));
        let prefactor = 3.0 / 8.0 * g2;
        let i = Complex64::i();
        let value = if a.abs() * hi.max(-lo) < 1.0 {
            // Σ_k (ia)^k/k! ∫ P(y) y^k dy
            let mut sum = Complex64::new(0.0, 0.0);
            let mut coef = Complex64::new(1.0, 0.0);
            for k in 0..60 {
                let moment: f64 = (0..3)
                    .map(|m| {
                        let p = (k + m + 1) as i32;
                        c[m] * (hi.powi(p) - lo.powi(p)) / p as f64
                    })
                    .sum();
                sum += coef * moment;
                coef *= i * a / (k + 1) as f64;
            }
            sum
        } else {
            let anti = |y: f64| {
                let p = c[0] + c[1] * y + c[2] * y * y;
                let dp = c[1] + 2.0 * c[2] * y;
                let ddp = 2.0 * c[2];
                let ia = i * a;
                Complex64::from_polar(1.0, a * y) * (p / ia - dp / (ia * ia) + ddp / (ia * ia * ia))
            };
            anti(hi) - anti(lo)
        };
        value * prefactor
    }

    /// Rest-frame (`β = 0`) kernel, `3/8 ∫(1 + x²) e^{iax} dx` with `a = 2δq`.
    pub fn rest_frame_kernel(delta_v: f64, q: f64) -> Complex64 {
        let a = 2.0 * delta_v * q;
        let s = a.abs();
        let v = if s < 0.5 {
            // Σ_k (−1)^k a^{2k}/(2k)! · [2/(2k+1) + 2/(2k+3)]
            let mut term = 1.0;
            let mut sum = 0.0;
            for k in 0..30 {
                let kk = 2.0 * k as f64;
                sum += term * (2.0 / (kk + 1.0) + 2.0 / (kk + 3.0));
                term *= -s * s / ((kk + 1.0) * (kk + 2.0));
            }
            sum
        } else {
            let (sin, cos) = s.sin_cos();
            2.0 * sin / s + 2.0 * ((s * s - 2.0) * sin + 2.0 * s * cos) / (s * s * s)
        };
        Complex64::new(3.0 / 8.0 * v, 0.0)
    }
}
