//! Block propagators, vertical-photon diagram assembly and the emission
//! rate.
//!
//! With `Σ = B_a + 2·Re B_b + B_c` and `⋆` the causal convolution in `q`:
//!
//! ```text
//! ρ_ee = B_e = e^{−4q}
//! ρ_11 = ρ_22 = 2·(B_e ⋆ Σ)
//! ρ_gg = 16·∫₀^q (B_e ⋆ Σ)
//! R    = −d/dq (2ρ_ee + 2ρ_11) = 8e^{−4q} − 4Σ + 16·(B_e ⋆ Σ)
//! ```
//!
//! Each vertical photon contributes `Γ'₀/γ` and each convolution over `t`
//! a Jacobian `2γ/Γ'₀`, hence the factors 2 and 16.

use num_complex::Complex64;

use crate::params::QGrid;
use crate::propagators::PropagatorSet;

#[derive(Clone, Debug)]
pub struct BlockSet {
    pub grid: QGrid,
    pub b_e: Vec<f64>,
    pub b_a: Vec<f64>,
    pub b_b: Vec<Complex64>,
    pub b_c: Vec<f64>,
    pub sigma: Vec<f64>,
}

pub fn build_blocks(props: &PropagatorSet) -> BlockSet {
    let b_e: Vec<f64> = props.uee.iter().map(|u| u.norm_sqr()).collect();
    let b_a: Vec<f64> = props.u11.iter().map(|u| u.norm_sqr()).collect();
    let b_b: Vec<Complex64> = props
        .u11
        .iter()
        .zip(&props.u12)
        .map(|(u11, u12)| u11.conj() * u12)
        .collect();
    let b_c: Vec<f64> = props.u12.iter().map(|u| u.norm_sqr()).collect();
    let sigma = b_a
        .iter()
        .zip(&b_b)
        .zip(&b_c)
        .map(|((a, b), c)| a + 2.0 * b.re + c)
        .collect();
    BlockSet {
        grid: props.grid,
        b_e,
        b_a,
        b_b,
        b_c,
        sigma,
    }
}

/// `(f ⋆ g)(q_j) = ∫₀^{q_j} f(q_j − s)·g(s) ds` by the trapezoidal rule on
/// the shared uniform grid.
pub fn convolve_trapezoid(f: &[f64], g: &[f64], dq: f64) -> Vec<f64> {
    assert_eq!(f.len(), g.len());
    let n = f.len();
    let mut out = vec![0.0; n];
    for j in 1..n {
        let mut acc = 0.5 * (f[j] * g[0] + f[0] * g[j]);
        for k in 1..j {
            acc += f[j - k] * g[k];
        }
        out[j] = acc * dq;
    }
    out
}

/// Running trapezoidal integral `∫₀^{q_j} f`.
pub fn cumulative_trapezoid(f: &[f64], dq: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in f.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dq;
        out.push(acc);
    }
    out
}

/// Emission rate of two independent particles, `4e^{−2q}` per unit `q`.
#[inline]
pub fn independent_rate(q: f64) -> f64 {
    4.0 * (-2.0 * q).exp()
}

#[derive(Clone, Debug)]
pub struct DensityTransient {
    pub grid: QGrid,
    pub rho_ee: Vec<f64>,
    /// `ρ_11 = ρ_22`.
    pub rho_1: Vec<f64>,
    pub rho_gg: Vec<f64>,
    pub rate: Vec<f64>,
    /// `ρ_ee + 2ρ_11 + ρ_gg`; equals 1 only in the coherent limit.
    pub trace: Vec<f64>,
}

pub fn assemble_density(blocks: &BlockSet) -> DensityTransient {
    let grid = blocks.grid;
    let dq = grid.dq();
    let conv = convolve_trapezoid(&blocks.b_e, &blocks.sigma, dq);
    let rho_ee = blocks.b_e.clone();
    let rho_1: Vec<f64> = conv.iter().map(|c| 2.0 * c).collect();
    let rho_gg: Vec<f64> = cumulative_trapezoid(&conv, dq)
        .into_iter()
        .map(|v| 16.0 * v)
        .collect();
    let rate = blocks
        .b_e
        .iter()
        .zip(&blocks.sigma)
        .zip(&conv)
        .map(|((be, s), c)| 8.0 * be - 4.0 * s + 16.0 * c)
        .collect();
    let trace = rho_ee
        .iter()
        .zip(&rho_1)
        .zip(&rho_gg)
        .map(|((e, r1), g)| e + 2.0 * r1 + g)
        .collect();
    DensityTransient {
        grid,
        rho_ee,
        rho_1,
        rho_gg,
        rate,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel_table, KernelTable};
    use crate::params::SampleParams;
    use crate::propagators::integrate_rk4;

    fn limit_transient(c: f64) -> (QGrid, BlockSet, DensityTransient) {
        let grid = QGrid::default();
        let p = SampleParams::new(0.0, 0.0).unwrap();
        let table = KernelTable::from_fn(p, grid, |_| Complex64::new(c, 0.0));
        let blocks = build_blocks(&integrate_rk4(&table).unwrap());
        let dens = assemble_density(&blocks);
        (grid, blocks, dens)
    }

    #[test]
    fn coherent_limit_closed_forms() {
        let (grid, blocks, d) = limit_transient(1.0);
        for (j, q) in grid.points().enumerate() {
            let e4 = (-4.0 * q).exp();
            assert!((blocks.sigma[j] - e4).abs() < 1e-12);
            assert!((d.rho_1[j] - 2.0 * q * e4).abs() < 1e-5);
            assert!((d.rho_gg[j] - (1.0 - e4 * (1.0 + 4.0 * q))).abs() < 1e-5);
            assert!((d.trace[j] - 1.0).abs() < 1e-5);
            assert!((d.rate[j] - 4.0 * e4 * (1.0 + 4.0 * q)).abs() < 1e-5);
        }
    }

    #[test]
    fn independent_limit_closed_forms() {
        let (grid, blocks, d) = limit_transient(0.0);
        for (j, q) in grid.points().enumerate() {
            let e2 = (-2.0 * q).exp();
            assert!((blocks.b_a[j] - e2).abs() < 1e-12);
            assert_eq!(blocks.b_b[j], Complex64::new(0.0, 0.0));
            assert_eq!(blocks.b_c[j], 0.0);
            assert!((d.rho_1[j] - (e2 - e2 * e2)).abs() < 1e-5);
            assert!((d.rate[j] - independent_rate(q)).abs() < 1e-5);
        }
        // ρ_gg → 2 as printed; trace exceeds 1 away from δ = 0.
        assert!((d.rho_gg.last().unwrap() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn boundary_values() {
        for c in [0.0, 0.4, 1.0] {
            let (_, blocks, d) = limit_transient(c);
            assert_eq!(blocks.b_e[0], 1.0);
            assert_eq!(blocks.b_a[0], 1.0);
            assert_eq!(blocks.b_c[0], 0.0);
            assert_eq!(blocks.sigma[0], 1.0);
            assert_eq!(d.rate[0], 4.0);
            assert_eq!(d.rho_1[0], 0.0);
            assert_eq!(d.rho_gg[0], 0.0);
            assert_eq!(d.rho_ee[0], 1.0);
        }
    }

    #[test]
    fn sigma_is_squared_sum() {
        let grid = QGrid::new(8.0, 1e-2).unwrap();
        let table = build_kernel_table(&SampleParams::new(0.8, 1.5).unwrap(), &grid).unwrap();
        let props = integrate_rk4(&table).unwrap();
        let blocks = build_blocks(&props);
        for j in 0..grid.len() {
            let s = (props.u11[j] + props.u12[j]).norm_sqr();
            assert!((blocks.sigma[j] - s).abs() < 1e-12);
            assert!(blocks.sigma[j] >= 0.0);
        }
    }

    #[test]
    fn rate_matches_finite_difference() {
        let grid = QGrid::default();
        let table = build_kernel_table(&SampleParams::new(0.0, 4.0).unwrap(), &grid).unwrap();
        let d = assemble_density(&build_blocks(&integrate_rk4(&table).unwrap()));
        let h = grid.dq();
        let energy: Vec<f64> = d.rho_ee.iter().zip(&d.rho_1).map(|(e, r)| 2.0 * e + 2.0 * r).collect();
        for j in 1..grid.len() - 1 {
            let fd = -(energy[j + 1] - energy[j - 1]) / (2.0 * h);
            assert!((fd - d.rate[j]).abs() < 1e-4, "q={} fd={fd} rate={}", grid.q(j), d.rate[j]);
            assert!(d.rate[j] >= 0.0);
        }
    }

    #[test]
    fn convolution_of_exponentials() {
        // e^{-q} ⋆ e^{-3q} = (e^{-q} − e^{-3q})/2
        let grid = QGrid::new(4.0, 1e-3).unwrap();
        let f: Vec<f64> = grid.points().map(|q| (-q).exp()).collect();
        let g: Vec<f64> = grid.points().map(|q| (-3.0 * q).exp()).collect();
        let c = convolve_trapezoid(&f, &g, grid.dq());
        for (j, q) in grid.points().enumerate() {
            let exact = 0.5 * ((-q).exp() - (-3.0 * q).exp());
            assert!((c[j] - exact).abs() < 1e-6);
        }
    }
}
