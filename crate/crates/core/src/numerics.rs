//! Small numerical helpers: Gauss-Legendre rules, golden-section search and
//! evenly spaced samples.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss-Legendre nodes/weights on `[a, b]` split into `panels` pieces.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

/// Maximizes a unimodal `f` on `[lo, hi]`; returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `i`-th of `n` evenly spaced points on `[lo, hi]`; endpoints and the
/// midpoint of a symmetric range are exact.
pub fn linspace_at(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n < 2 {
        return lo;
    }
    let t = i as f64 / (n - 1) as f64;
    if i == n - 1 {
        hi
    } else {
        lo + (hi - lo) * t
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| linspace_at(lo, hi, n, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            // exact up to degree 2n - 1
            let deg = 2 * n - 2;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(approx, 2.0 / (deg as f64 + 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn composite_gaussian() {
        let rule = composite_rule(-8.0, 8.0, 16, 16);
        let s: f64 = rule.iter().map(|(x, w)| w * (-x * x).exp()).sum();
        assert_relative_eq!(s, PI.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, y) = golden_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-10);
        // The argmax is only determined to about sqrt(machine epsilon).
        assert!((x - 0.3).abs() < 1e-6);
        assert_relative_eq!(y, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn linspace_midpoint_exact() {
        let xs = linspace(-7.3, 7.3, 201);
        assert_eq!(xs[100], 0.0);
        assert_eq!(xs[0], -7.3);
        assert_eq!(xs[200], 7.3);
    }
}
