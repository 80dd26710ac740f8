//! Simplex moments through divided differences of the exponential.
//!
//! In gap coordinates `t_0 = x_1`, `t_i = x_{i+1} - x_i`, `t_N = L - x_N` the
//! ordered simplex becomes the standard simplex scaled by `L`, and
//! `λ·x = Σ_i t_i R_i` with tail sums `R_i = Σ_{m >= i} λ_m`. The
//! Hermite-Genocchi formula then turns every moment into a divided
//! difference of `exp` at the nodes `y_i = -i L R_i`, possibly with
//! repeated nodes. These stay accurate where closed-form antiderivatives
//! cancel catastrophically.

use num_complex::Complex64;

const MAX_POINTS: usize = 12;

type Mat = [[Complex64; MAX_POINTS]; MAX_POINTS];

fn matmul_upper(a: &Mat, b: &Mat, n: usize) -> Mat {
    let mut out = [[Complex64::new(0.0, 0.0); MAX_POINTS]; MAX_POINTS];
    for i in 0..n {
        for j in i..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in i..=j {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// `exp[z_0, ..., z_{n-1}]`, the divided difference of `exp` over the given
/// nodes (repeats allowed), via the exponential of the bidiagonal matrix.
///
/// # Panics
/// If more than 12 nodes are given or none at all.
pub fn exp_divided_difference(points: &[Complex64]) -> Complex64 {
    let n = points.len();
    assert!((1..=MAX_POINTS).contains(&n), "between 1 and {MAX_POINTS} nodes supported");
    if n == 1 {
        return points[0].exp();
    }
    let radius = points.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())) + 1.0;
    let squarings = if radius > 0.5 { (radius / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5_f64.powi(squarings);

    let mut a = [[Complex64::new(0.0, 0.0); MAX_POINTS]; MAX_POINTS];
    for i in 0..n {
        a[i][i] = points[i] * scale;
        if i + 1 < n {
            a[i][i + 1] = Complex64::new(scale, 0.0);
        }
    }
    // Taylor series of the scaled matrix; its norm is at most 1/2
    let mut e = [[Complex64::new(0.0, 0.0); MAX_POINTS]; MAX_POINTS];
    let mut term = [[Complex64::new(0.0, 0.0); MAX_POINTS]; MAX_POINTS];
    for i in 0..n {
        e[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..=24 {
        term = matmul_upper(&term, &a, n);
        let inv = 1.0 / k as f64;
        let mut size = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                term[i][j] *= inv;
                e[i][j] += term[i][j];
                size = size.max(term[i][j].norm());
            }
        }
        if size < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        e = matmul_upper(&e, &e, n);
    }
    e[0][n - 1]
}

/// Zeroth, first and second moments of `exp(-i λ·x)` over the ordered simplex,
/// expressed in gap coordinates `t_0, ..., t_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMoments {
    pub n: usize,
    /// `∫ e^{-iλ·x}`.
    pub m0: Complex64,
    /// `∫ t_i e^{-iλ·x}`.
    pub m1: Vec<Complex64>,
    /// `∫ t_i t_j e^{-iλ·x}`, row-major; empty unless requested.
    pub m2: Vec<Complex64>,
}

impl SimplexMoments {
    pub fn second(&self, i: usize, j: usize) -> Complex64 {
        self.m2[i * self.n + j]
    }

    /// `∫ x_m e^{-iλ·x}` for a 0-based coordinate index.
    pub fn coordinate_first(&self, m: usize) -> Complex64 {
        self.m1[..=m].iter().sum()
    }

    /// `∫ x_m x_p e^{-iλ·x}` for 0-based coordinate indices.
    pub fn coordinate_second(&self, m: usize, p: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..=m {
            for j in 0..=p {
                s += self.second(i, j);
            }
        }
        s
    }

    /// `∫ (Σ_m α_m x_m) e^{-iλ·x}` given tail sums `a_i = Σ_{m >= i} α_m`.
    pub fn linear(&self, tails: &[Complex64]) -> Complex64 {
        self.m1.iter().zip(tails).map(|(m, a)| m * a).sum()
    }

    /// `∫ (Σ α_m x_m)(Σ β_m x_m) e^{-iλ·x}` given tail sums of `α` and `β`.
    pub fn bilinear(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..self.n {
                row += self.second(i, j) * b[j];
            }
            s += a[i] * row;
        }
        s
    }

    pub fn conj(&self) -> SimplexMoments {
        SimplexMoments {
            n: self.n,
            m0: self.m0.conj(),
            m1: self.m1.iter().map(|z| z.conj()).collect(),
            m2: self.m2.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// Tail sums `a_i = Σ_{m >= i} α_m`.
pub fn tail_sums<T: Copy + std::ops::Add<Output = T>>(alpha: &[T]) -> Vec<T> {
    let mut out = alpha.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i] + out[i + 1];
    }
    out
}

/// Moments of `exp(-i λ·x)` over `0 < x_1 < ... < x_N < L`.
pub fn simplex_moments(lambda: &[f64], l: f64, with_second: bool) -> SimplexMoments {
    let n = lambda.len();
    let tails = tail_sums(lambda);
    let mut y: Vec<Complex64> = tails.iter().map(|r| Complex64::new(0.0, -l * r)).collect();
    y.push(Complex64::new(0.0, 0.0));

    let ln = l.powi(n as i32);
    let m0 = exp_divided_difference(&y) * ln;

    let mut buf = y.clone();
    let m1 = (0..n)
        .map(|i| {
            buf.truncate(n + 1);
            buf.push(y[i]);
            exp_divided_difference(&buf) * (ln * l)
        })
        .collect();

    let mut m2 = Vec::new();
    if with_second {
        m2 = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                buf.truncate(n + 1);
                buf.push(y[i]);
                buf.push(y[j]);
                let f = if i == j { 2.0 } else { 1.0 };
                let v = exp_divided_difference(&buf) * (ln * l * l * f);
                m2[i * n + j] = v;
                m2[j * n + i] = v;
            }
        }
    }
    SimplexMoments { n, m0, m1, m2 }
}
