//! The velocity coherence metric
//!
//! ```text
//! G(δ) = (1/A) ∫₀^{q_max} [R_δ(q) − 4e^{−2q}]² dq,    A such that G(0) = 1
//! ```
//!
//! and the full width at half maximum of `G` over `δ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{assemble_density, build_blocks, independent_rate, DensityTransient};
use crate::error::{Error, Result};
use crate::kernel::build_kernel_table_with;
use crate::params::{QGrid, SampleParams};
use crate::propagators::integrate_rk4;
use crate::quadrature::AdaptiveOptions;

/// Kernel table → RK4 propagators → blocks → density transient.
pub fn simulate_transient(params: &SampleParams, grid: &QGrid) -> Result<DensityTransient> {
    simulate_transient_with(params, grid, AdaptiveOptions::default())
}

pub fn simulate_transient_with(
    params: &SampleParams,
    grid: &QGrid,
    opts: AdaptiveOptions,
) -> Result<DensityTransient> {
    let table = build_kernel_table_with(params, grid, opts)?;
    let props = integrate_rk4(&table)?;
    Ok(assemble_density(&build_blocks(&props)))
}

/// Trapezoidal `∫ (R − R_independent)²` over the transient's grid.
pub fn squared_departure(transient: &DensityTransient) -> f64 {
    let grid = transient.grid;
    let f: Vec<f64> = grid
        .points()
        .zip(&transient.rate)
        .map(|(q, r)| {
            let d = r - independent_rate(q);
            d * d
        })
        .collect();
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    grid.dq() * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

/// Unnormalized metric for one separation.
pub fn g_metric(beta: f64, delta_v: f64, grid: &QGrid) -> Result<f64> {
    g_metric_with(beta, delta_v, grid, AdaptiveOptions::default())
}

pub fn g_metric_with(beta: f64, delta_v: f64, grid: &QGrid, opts: AdaptiveOptions) -> Result<f64> {
    let params = SampleParams::with_signed_delta(beta, delta_v)?;
    Ok(squared_departure(&simulate_transient_with(&params, grid, opts)?))
}

/// `{0, step, 2·step, …}` up to `max` inclusive.
pub fn delta_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid("delta_v_step", format!("{step} must be positive")));
    }
    if !max.is_finite() || max < step {
        return Err(Error::invalid(
            "delta_v_max",
            format!("{max} must be finite and at least one step ({step})"),
        ));
    }
    let n = (max / step * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

/// Default separation grid: `0..20` in steps of 0.1 for `β ≥ 0.8`,
/// otherwise `0..30` in steps of 0.25.
pub fn default_delta_grid(beta: f64) -> Vec<f64> {
    let (max, step) = default_delta_range(beta);
    delta_grid(max, step).expect("default delta grid is valid")
}

pub fn default_delta_range(beta: f64) -> (f64, f64) {
    if beta >= 0.8 {
        (20.0, 0.1)
    } else {
        (30.0, 0.25)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceScan {
    pub beta: f64,
    pub delta_grid: Vec<f64>,
    pub g_values: Vec<f64>,
    /// Unnormalized metric at `δ = 0`.
    pub normalization_a: f64,
    /// `None` when `G` never drops to 1/2 on the grid.
    pub fwhm: Option<f64>,
}

fn check_delta_grid(deltas: &[f64]) -> Result<()> {
    match deltas.first() {
        Some(d) if *d >= 0.0 => {}
        _ => return Err(Error::invalid("delta_grid", "must be non-empty and start at δ ≥ 0")),
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) || deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::invalid("delta_grid", "must be finite and strictly increasing"));
    }
    Ok(())
}

/// Normalized `G` on `deltas` (parallel over separations, results in grid
/// order) with the FWHM if the half maximum is bracketed. A grid not
/// starting at 0 gets its normalization from an extra `δ = 0` run.
pub fn scan_metric(beta: f64, deltas: &[f64], grid: &QGrid) -> Result<CoherenceScan> {
    scan_metric_with(beta, deltas, grid, AdaptiveOptions::default())
}

pub fn scan_metric_with(
    beta: f64,
    deltas: &[f64],
    grid: &QGrid,
    opts: AdaptiveOptions,
) -> Result<CoherenceScan> {
    check_delta_grid(deltas)?;
    SampleParams::new(beta, 0.0)?;
    let starts_at_zero = deltas[0] == 0.0;
    let mut points = Vec::with_capacity(deltas.len() + 1);
    if !starts_at_zero {
        points.push(0.0);
    }
    points.extend_from_slice(deltas);
    let mut raw: Vec<f64> = points
        .par_iter()
        .map(|&d| g_metric_with(beta, d, grid, opts))
        .collect::<Result<_>>()?;
    let a = raw[0];
    if !starts_at_zero {
        raw.remove(0);
    }
    let g_values: Vec<f64> = raw.iter().map(|v| v / a).collect();
    let fwhm = half_max_crossing(deltas, &g_values).map(|d| 2.0 * d);
    Ok(CoherenceScan {
        beta,
        delta_grid: deltas.to_vec(),
        g_values,
        normalization_a: a,
        fwhm,
    })
}

/// Like [`scan_metric`] but fails when the half maximum is not bracketed.
pub fn scan_fwhm(beta: f64, deltas: &[f64], grid: &QGrid) -> Result<CoherenceScan> {
    let scan = scan_metric(beta, deltas, grid)?;
    require_fwhm(scan)
}

pub fn require_fwhm(scan: CoherenceScan) -> Result<CoherenceScan> {
    if scan.fwhm.is_none() {
        return Err(Error::HalfMaxNotBracketed {
            last_delta: *scan.delta_grid.last().unwrap(),
        });
    }
    Ok(scan)
}

/// First `δ` where `g` falls to 1/2, by linear interpolation between the
/// bracketing samples. `None` unless some sample lies above 1/2 first.
pub fn half_max_crossing(deltas: &[f64], g: &[f64]) -> Option<f64> {
    let k = g.iter().position(|&v| v <= 0.5)?;
    if k == 0 {
        return None;
    }
    let (g0, g1) = (g[k - 1], g[k]);
    let (d0, d1) = (deltas[k - 1], deltas[k]);
    Some(d0 + (g0 - 0.5) / (g0 - g1) * (d1 - d0))
}

/// Centered moving average with a window of `width` samples (shrinking at
/// the ends).
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    let r = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + r + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}
