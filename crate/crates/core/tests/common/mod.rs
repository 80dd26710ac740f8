//! Reference integrators written independently of the library.
#![allow(dead_code)]

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite rule on [a, b] with `panels` equal panels.
pub fn composite(a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        for &(x, w) in rule {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Nested composite Gauss-Legendre over 0 < x_1 < ... < x_n < l.
pub fn nested_simplex<F: Fn(&[f64]) -> Complex64>(f: &F, n: usize, l: f64, panels: usize, order: usize) -> Complex64 {
    let rule = legendre_rule(order);
    let mut x = vec![0.0; n];
    fn rec<F: Fn(&[f64]) -> Complex64>(
        f: &F,
        level: usize,
        upper: f64,
        x: &mut Vec<f64>,
        panels: usize,
        rule: &[(f64, f64)],
    ) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (t, w) in composite(0.0, upper, panels, rule) {
            x[level] = t;
            s += w * if level == 0 { f(x) } else { rec(f, level - 1, t, x, panels, rule) };
        }
        s
    }
    rec(f, n - 1, l, &mut x, panels, &rule)
}

/// Adaptive Simpson for complex integrands.
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn step<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: usize,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
