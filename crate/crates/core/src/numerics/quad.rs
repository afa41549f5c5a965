//! Composite Gauss-Legendre quadrature.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

/// Values that can be accumulated by the quadrature rules.
pub trait Integrand: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule of order `n`.
    pub fn get(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Box::leak(Box::new(GaussLegendre::compute(n))))
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over `[a, b]` with `panels` equal panels of an `order`-point rule.
pub fn composite<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, panels: usize, order: usize) -> T {
    let rule = GaussLegendre::get(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut part = T::zero();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            part = part.add(f(mid + 0.5 * h * x).scale(*w));
        }
        acc = acc.add(part.scale(0.5 * h));
    }
    acc
}

/// Panel quadrature with an embedded error estimate.
///
/// Uses a 16-point rule per panel and reports the difference against the
/// 8-point rule on the same panels, which bounds the 16-point error from above
/// for smooth integrands.
pub fn composite_with_error<T: Integrand, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
) -> (T, f64) {
    let hi = composite(&f, a, b, panels, 16);
    let lo = composite(&f, a, b, panels, 8);
    let diff = hi.add(lo.scale(-1.0)).magnitude();
    (hi, diff)
}

/// Number of panels so that each spans at most `1/panels_per_oscillation`
/// of an oscillation, given the total phase variation over the interval.
pub fn panels_for_phase(total_phase: f64, panels_per_oscillation: usize) -> usize {
    let oscillations = total_phase.abs() / (2.0 * std::f64::consts::PI);
    ((oscillations * panels_per_oscillation as f64).ceil() as usize).max(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [4, 8, 16, 32] {
            let r = GaussLegendre::get(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // 8-point rule integrates degree 15 exactly.
        let v = composite(|x: f64| x.powi(14), -1.0, 1.0, 1, 8);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let (v, err) = composite_with_error(|x: f64| (50.0 * x).cos(), 0.0, 1.0, panels_for_phase(50.0, 10));
        assert!((v - 50f64.sin() / 50.0).abs() < 1e-13);
        assert!(err < 1e-8);
    }
}
