//! Gauss–Legendre rules and a globally adaptive panel integrator for
//! complex-valued integrands on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guess; weights `2 / ((1 - x²) P_n'(x)²)`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            if 2 * i + 1 == n {
                x = 0.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, f: &F) -> Complex64
    where
        F: Fn(f64) -> Complex64 + ?Sized,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    pub fn integrate_real<F>(&self, a: f64, b: f64, f: &F) -> f64
    where
        F: Fn(f64) -> f64 + ?Sized,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let acc: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(mid + half * x) * w)
            .sum();
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub const LOW_ORDER: usize = 48;
pub const HIGH_ORDER: usize = 64;

fn low_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(LOW_ORDER))
}

fn high_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(HIGH_ORDER))
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    /// Absolute tolerance on the summed inter-order error estimate.
    pub tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_panels: 1 << 14,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Returned when the panel budget runs out; carries the best estimate.
#[derive(Clone, Copy, Debug)]
pub struct BudgetExhausted(pub Quadrature);

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_panel<F>(a: f64, b: f64, f: &F) -> Panel
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let hi = high_rule().integrate(a, b, f);
    let lo = low_rule().integrate(a, b, f);
    Panel {
        a,
        b,
        value: hi,
        error: (hi - lo).norm(),
    }
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the panels
/// delimited by `breaks` (strictly increasing, at least two entries).
///
/// The panel with the largest `|G_high − G_low|` is bisected until the
/// summed estimate drops below `opts.tol`.
pub fn integrate_adaptive<F>(
    f: &F,
    breaks: &[f64],
    opts: AdaptiveOptions,
) -> Result<Quadrature, BudgetExhausted>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap: BinaryHeap<Panel> = breaks
        .windows(2)
        .map(|w| eval_panel(w[0], w[1], f))
        .collect();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();

    loop {
        if total_err <= opts.tol {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(BudgetExhausted(summarize(&heap)));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point.
            heap.push(worst);
            return Err(BudgetExhausted(summarize(&heap)));
        }
        let left = eval_panel(worst.a, mid, f);
        let right = eval_panel(mid, worst.b, f);
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // The running total can drift below the true sum; confirm before exit.
        if total_err <= opts.tol {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(summarize(&heap))
}

/// `∫_lo^hi g(y)·e^{iωy} dy` on `m` equal panels, doubling `m` until the
/// summed inter-order estimate is within `opts.tol`.
///
/// Equal panels share the node phase factors `e^{iω·h·t_k}`, so each node
/// costs one real evaluation of `g` and a complex multiply.
pub fn integrate_oscillatory<G>(
    g: &G,
    omega: f64,
    lo: f64,
    hi: f64,
    min_panels: usize,
    opts: AdaptiveOptions,
) -> Result<Quadrature, BudgetExhausted>
where
    G: Fn(f64) -> f64 + ?Sized,
{
    let low = low_rule();
    let high = high_rule();
    let mut m = min_panels.max(1);
    let mut fac_lo = Vec::with_capacity(low.len());
    let mut fac_hi = Vec::with_capacity(high.len());
    loop {
        let width = (hi - lo) / m as f64;
        let half = 0.5 * width;
        fac_lo.clear();
        fac_lo.extend(
            low.nodes()
                .iter()
                .zip(low.weights())
                .map(|(t, w)| Complex64::from_polar(*w, omega * half * t)),
        );
        fac_hi.clear();
        fac_hi.extend(
            high.nodes()
                .iter()
                .zip(high.weights())
                .map(|(t, w)| Complex64::from_polar(*w, omega * half * t)),
        );

        let mut total = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        for p in 0..m {
            let mid = lo + (p as f64 + 0.5) * width;
            let mut s_hi = Complex64::new(0.0, 0.0);
            for (t, f) in high.nodes().iter().zip(&fac_hi) {
                s_hi += f * g(mid + half * t);
            }
            let mut s_lo = Complex64::new(0.0, 0.0);
            for (t, f) in low.nodes().iter().zip(&fac_lo) {
                s_lo += f * g(mid + half * t);
            }
            error += half * (s_hi - s_lo).norm();
            total += s_hi * Complex64::from_polar(half, omega * mid);
        }
        let result = Quadrature {
            value: total,
            error,
            panels: m,
        };
        if error <= opts.tol {
            return Ok(result);
        }
        if 2 * m > opts.max_panels {
            return Err(BudgetExhausted(result));
        }
        m *= 2;
    }
}

fn summarize(heap: &BinaryHeap<Panel>) -> Quadrature {
    // Sum in position order for a result independent of heap layout.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Quadrature {
        value,
        error,
        panels: panels.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 30, 40, 64] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let r = GaussLegendre::new(10);
        // ∫_0^2 x^19 dx = 2^20 / 20
        let v = r.integrate_real(0.0, 2.0, &|x: f64| x.powi(19));
        assert!((v / (2f64.powi(20) / 20.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let r = GaussLegendre::new(31);
        assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        for (a, b) in r.nodes().iter().zip(r.nodes().iter().rev()) {
            assert!((a + b).abs() < 1e-15);
        }
        assert_eq!(r.nodes()[15], 0.0);
    }

    #[test]
    fn adaptive_oscillatory() {
        // ∫_{-1}^{1} e^{i k x} dx = 2 sin k / k
        let k = 300.0;
        let f = |x: f64| Complex64::from_polar(1.0, k * x);
        let q = integrate_adaptive(&f, &[-1.0, 1.0], AdaptiveOptions::default()).unwrap();
        let exact = 2.0 * f64::sin(k) / k;
        assert!((q.value.re - exact).abs() < 1e-10);
        assert!(q.value.im.abs() < 1e-10);
        assert!(q.panels > 1);
    }

    #[test]
    fn oscillatory_matches_closed_form() {
        // ∫_0^3 y² e^{iωy} dy against its antiderivative.
        let omega = 57.0;
        let q = integrate_oscillatory(&|y: f64| y * y, omega, 0.0, 3.0, 1, AdaptiveOptions::default())
            .unwrap();
        let anti = |y: f64| {
            let i = Complex64::i();
            Complex64::from_polar(1.0, omega * y)
                * (y * y / (i * omega) + 2.0 * y / (omega * omega) - 2.0 / (i * omega.powi(3)))
        };
        assert!((q.value - (anti(3.0) - anti(0.0))).norm() < 1e-12);
    }

    #[test]
    fn oscillatory_refines_and_gives_up() {
        let g = |_: f64| 1.0;
        let q = integrate_oscillatory(&g, 500.0, -1.0, 1.0, 1, AdaptiveOptions::default()).unwrap();
        assert!(q.panels > 1);
        assert!((q.value.re - 2.0 * f64::sin(500.0) / 500.0).abs() < 1e-10);
        let opts = AdaptiveOptions {
            tol: 1e-12,
            max_panels: 4,
        };
        assert!(integrate_oscillatory(&g, 1e6, -1.0, 1.0, 1, opts).is_err());
    }

    #[test]
    fn budget_exhaustion_reported() {
        let f = |x: f64| Complex64::from_polar(1.0, 1e7 * x);
        let opts = AdaptiveOptions {
            tol: 1e-12,
            max_panels: 8,
        };
        assert!(integrate_adaptive(&f, &[-1.0, 1.0], opts).is_err());
    }
}
