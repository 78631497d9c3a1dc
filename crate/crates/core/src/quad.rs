//! Gauss–Legendre quadrature: fixed rules and an adaptive integrator.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, found by Newton
/// iteration on the Legendre polynomial `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

fn fixed(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = rule10();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * x.iter().zip(w).map(|(&t, &wt)| wt * f(c + r * t)).sum::<f64>()
}

/// Integral of `f` over `[a, b]` with adaptive bisection of 10-point rules
/// until the estimated error is below `rel_tol` times the integral of `|f|`.
/// Extra `breaks` inside the interval (kinks of `f`) are honoured.
pub(crate) fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64, breaks: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);

    let scale = pts.windows(2).map(|w| fixed(&mut |t| f(t).abs(), w[0], w[1])).sum::<f64>();
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    let total_len = b - a;
    pts.windows(2)
        .map(|w| {
            let whole = fixed(&mut f, w[0], w[1]);
            adapt(&mut f, w[0], w[1], whole, tol * (w[1] - w[0]) / total_len, 0)
        })
        .sum()
}

fn adapt(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let refined = left + right;
    if (refined - whole).abs() <= tol || depth >= 40 {
        return refined;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1) + adapt(f, m, b, right, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in [1, 2, 5, 10, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // exact up to degree 2n - 1
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = integrate(|t: f64| (t - 0.3).abs(), -1.0, 1.0, 1e-10, &[]);
        let exact = (1.3f64.powi(2) + 0.7f64.powi(2)) / 2.0;
        assert!((v - exact).abs() < 1e-9);
        let v = integrate(|t: f64| t.sqrt(), 0.0, 1.0, 1e-10, &[]);
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
        let v = integrate(|t: f64| t.sin(), 0.0, std::f64::consts::PI, 1e-12, &[1.0]);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
