//! End-to-end checks across kernel, propagators, density and coherence.

use num_complex::Complex64;

use relsr::coherence::{g_metric, scan_fwhm, simulate_transient};
use relsr::density::{assemble_density, build_blocks};
use relsr::kernel::{build_kernel_table, kernel_sq_profile, oracle};
use relsr::params::{QGrid, SampleParams};
use relsr::propagators::{analytic_solution, integrate_rk4, max_deviation};

fn grid() -> QGrid {
    QGrid::new(8.0, 1e-3).unwrap()
}

#[test]
fn rest_normalization_is_one_ninth() {
    let a = g_metric(0.0, 0.0, &grid()).unwrap();
    assert!((a - 1.0 / 9.0).abs() < 1e-6, "{a}");
}

#[test]
fn metric_near_rest_half_width() {
    let g = grid();
    let a = g_metric(0.0, 0.0, &g).unwrap();
    let half = g_metric(0.0, 4.55, &g).unwrap() / a;
    assert!((half - 0.5).abs() < 0.05, "{half}");
    let far = g_metric(0.0, 100.0, &g).unwrap() / a;
    assert!(far < 0.01, "{far}");
}

#[test]
fn coherent_transient_for_every_beta() {
    // δ = 0 makes C ≡ 1 regardless of β.
    let g = QGrid::new(4.0, 1e-3).unwrap();
    for beta in [0.0, 0.8, 0.95] {
        let d = simulate_transient(&SampleParams::new(beta, 0.0).unwrap(), &g).unwrap();
        for (j, q) in g.points().enumerate() {
            let e4 = (-4.0 * q).exp();
            assert!((d.rho_gg[j] - (1.0 - e4 * (1.0 + 4.0 * q))).abs() < 1e-5);
            assert!((d.trace[j] - 1.0).abs() < 1e-5);
        }
    }
}

#[test]
fn stages_compose_to_simulate_transient() {
    let g = QGrid::new(3.0, 1e-3).unwrap();
    let p = SampleParams::new(0.8, 1.5).unwrap();
    let table = build_kernel_table(&p, &g).unwrap();
    let props = integrate_rk4(&table).unwrap();
    assert!(max_deviation(&props, &analytic_solution(&table)) < 1e-9);
    let manual = assemble_density(&build_blocks(&props));
    let direct = simulate_transient(&p, &g).unwrap();
    assert_eq!(manual.rate, direct.rate);
}

#[test]
fn rest_frame_profile_matches_closed_form() {
    let g = QGrid::new(2.0, 0.01).unwrap();
    let profile = kernel_sq_profile(&SampleParams::new(0.0, 3.0).unwrap(), &g).unwrap();
    for (j, q) in g.points().enumerate() {
        let c: Complex64 = oracle::rest_frame_kernel(3.0, q);
        assert!((profile[j] - c.norm_sqr()).abs() < 1e-9);
    }
}

#[test]
fn moving_profile_lies_below_rest_envelope() {
    // The rest profile has exact nodes, so compare against its decreasing
    // envelope max_{q' >= q} |C_0(q')|^2 rather than pointwise.
    let g = QGrid::new(8.0, 0.005).unwrap();
    let rest = kernel_sq_profile(&SampleParams::new(0.0, 1.0).unwrap(), &g).unwrap();
    let fast = kernel_sq_profile(&SampleParams::new(0.95, 1.0).unwrap(), &g).unwrap();
    let mut envelope = rest.clone();
    for j in (0..envelope.len() - 1).rev() {
        envelope[j] = envelope[j].max(envelope[j + 1]);
    }
    let k = rest.iter().position(|&v| v <= 0.5).unwrap();
    for j in k..g.len() {
        assert!(fast[j] <= envelope[j], "q={}", g.q(j));
    }
}

#[test]
fn fwhm_ordering_on_coarse_grids() {
    // Coarse time step and δ grids keep this fast; ordering is robust to both.
    let g = QGrid::new(6.0, 0.01).unwrap();
    let deltas = |max: f64, step: f64| relsr::coherence::delta_grid(max, step).unwrap();
    let w0 = scan_fwhm(0.0, &deltas(8.0, 0.5), &g).unwrap().fwhm.unwrap();
    let w8 = scan_fwhm(0.8, &deltas(2.0, 0.1), &g).unwrap().fwhm.unwrap();
    let w95 = scan_fwhm(0.95, &deltas(0.5, 0.025), &g).unwrap().fwhm.unwrap();
    assert!(w95 < w8 && w8 < w0, "{w0} {w8} {w95}");
    assert!(w0 / w95 > 1.0 / (1.0 - 0.95 * 0.95));
}
