//! Singly-excited two-particle propagators.
//!
//! In `q`-units the symmetry-reduced system is
//!
//! ```text
//! dU11/dq = −U11 − C(q)·U12
//! dU12/dq = −U12 − C(q)·U11,     U11(0) = 1, U12(0) = 0
//! ```
//!
//! with `U22 = U11`, `U21 = U12`, and the doubly-excited `Uee = e^{−2q}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::kernel::{kernel_integral, KernelTable};
use crate::params::{QGrid, SampleParams};

#[derive(Clone, Debug)]
pub struct PropagatorSet {
    pub grid: QGrid,
    pub u11: Vec<Complex64>,
    pub u12: Vec<Complex64>,
    pub uee: Vec<Complex64>,
}

/// `U_{e;e}(q) = e^{−2q}`.
#[inline]
pub fn doubly_excited(q: f64) -> f64 {
    (-2.0 * q).exp()
}

fn uee_column(grid: &QGrid) -> Vec<Complex64> {
    grid.points()
        .map(|q| Complex64::new(doubly_excited(q), 0.0))
        .collect()
}

#[inline]
fn rhs(c: Complex64, y: [Complex64; 2]) -> [Complex64; 2] {
    [-y[0] - c * y[1], -y[1] - c * y[0]]
}

#[inline]
fn axpy(y: [Complex64; 2], h: f64, k: [Complex64; 2]) -> [Complex64; 2] {
    [y[0] + k[0] * h, y[1] + k[1] * h]
}

/// Classical fixed-step RK4 using the tabulated kernel at `q_j`,
/// `q_j + dq/2` and `q_{j+1}`.
pub fn integrate_rk4(table: &KernelTable) -> Result<PropagatorSet> {
    let grid = table.grid;
    let n = grid.len();
    let h = grid.dq();
    let mut u11 = Vec::with_capacity(n);
    let mut u12 = Vec::with_capacity(n);
    let mut y = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    u11.push(y[0]);
    u12.push(y[1]);
    for j in 0..n - 1 {
        let (c0, cm, c1) = (table.values[j], table.midpoints[j], table.values[j + 1]);
        let k1 = rhs(c0, y);
        let k2 = rhs(cm, axpy(y, 0.5 * h, k1));
        let k3 = rhs(cm, axpy(y, 0.5 * h, k2));
        let k4 = rhs(c1, axpy(y, h, k3));
        for i in 0..2 {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        if !(y[0].re.is_finite() && y[0].im.is_finite() && y[1].re.is_finite() && y[1].im.is_finite()) {
            return Err(Error::NonFinite { q: grid.q(j + 1) });
        }
        u11.push(y[0]);
        u12.push(y[1]);
    }
    Ok(PropagatorSet {
        uee: uee_column(&grid),
        grid,
        u11,
        u12,
    })
}

/// Builds the propagators from `∫₀^q C`: the sum `U11 + U12` obeys
/// `dS/dq = −(1 + C)S` and the difference `dD/dq = −(1 − C)D`, so
/// `S = exp(−q − ∫C)`, `D = exp(−q + ∫C)`.
pub fn from_kernel_integral(grid: QGrid, integral: &[Complex64]) -> PropagatorSet {
    let mut u11 = Vec::with_capacity(grid.len());
    let mut u12 = Vec::with_capacity(grid.len());
    for (q, &ic) in grid.points().zip(integral) {
        let s = (-q - ic).exp();
        let d = (-q + ic).exp();
        u11.push((s + d) * 0.5);
        u12.push((s - d) * 0.5);
    }
    PropagatorSet {
        uee: uee_column(&grid),
        grid,
        u11,
        u12,
    }
}

/// Exponential-of-integral solution with `∫₀^q C` accumulated panel by
/// panel from the table by Simpson's rule on `(q_j, q_j + dq/2, q_{j+1})`.
pub fn analytic_solution(table: &KernelTable) -> PropagatorSet {
    let grid = table.grid;
    let h = grid.dq();
    let mut integral = Vec::with_capacity(grid.len());
    let mut acc = Complex64::new(0.0, 0.0);
    integral.push(acc);
    for j in 0..grid.len() - 1 {
        acc += (table.values[j] + table.midpoints[j] * 4.0 + table.values[j + 1]) * (h / 6.0);
        integral.push(acc);
    }
    from_kernel_integral(grid, &integral)
}

/// Reference solution with `∫₀^q C` evaluated without time discretization
/// (see [`kernel_integral`]); independent of the table and of `dq` apart from
/// where it is sampled.
pub fn exact_solution(params: &SampleParams, grid: QGrid) -> Result<PropagatorSet> {
    let integral: Vec<Complex64> = grid
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|q| kernel_integral(params, q))
        .collect::<Result<_>>()?;
    Ok(from_kernel_integral(grid, &integral))
}

/// Largest pointwise deviation between two propagator sets on the same grid.
pub fn max_deviation(a: &PropagatorSet, b: &PropagatorSet) -> f64 {
    a.u11
        .iter()
        .zip(&b.u11)
        .chain(a.u12.iter().zip(&b.u12))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
