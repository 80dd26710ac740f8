//! Iterated Gauss-Legendre rules on ordered simplices and boxes.
//!
//! Work is split on the outermost node index and the partial sums are
//! combined in index order, so results do not depend on the thread count.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Values that quadrature can accumulate.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: f64) -> Self;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
}

impl<const K: usize> QuadValue for [f64; K] {
    fn zero() -> Self {
        [0.0; K]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
        self
    }
    fn scale(mut self, w: f64) -> Self {
        for a in &mut self {
            *a *= w;
        }
        self
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussLegendre::new(order)
        .map_err(|_| Error::InvalidArgument(format!("quadrature order must be >= 2, got {order}")))?;
    Ok(rule.iter().map(|(x, w)| (*x, *w)).unzip())
}

/// Nodes of the ordered simplex `a <= y_1 <= ... <= y_m <= b`, flattened.
struct SimplexNodes {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SimplexNodes {
    fn new(a: f64, b: f64, dim: usize, rule: &(Vec<f64>, Vec<f64>)) -> Self {
        let (xs, ws) = rule;
        // grow from the outermost coordinate inwards; stored in reverse order
        let mut points: Vec<f64> = Vec::new();
        let mut weights = vec![1.0];
        let mut uppers = vec![b];
        for level in 0..dim {
            let count = weights.len() * xs.len();
            let mut np = Vec::with_capacity(count * (level + 1));
            let mut nw = Vec::with_capacity(count);
            let mut nu = Vec::with_capacity(count);
            for (idx, (&w, &up)) in weights.iter().zip(&uppers).enumerate() {
                let half = 0.5 * (up - a);
                for (&x, &wx) in xs.iter().zip(ws) {
                    let y = a + half * (x + 1.0);
                    np.extend_from_slice(&points[idx * level..(idx + 1) * level]);
                    np.push(y);
                    nw.push(w * wx * half);
                    nu.push(y);
                }
            }
            points = np;
            weights = nw;
            uppers = nu;
        }
        for chunk in points.chunks_mut(dim.max(1)) {
            chunk.reverse();
        }
        SimplexNodes { dim, points, weights }
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Tensor product of simplex blocks; each block fills its own coordinate slots.
fn integrate_blocks<T, F>(blocks: &[(Vec<usize>, SimplexNodes)], n: usize, f: &F) -> T
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    if blocks.is_empty() {
        return T::zero();
    }
    let (first_slots, first) = &blocks[0];
    let rest = &blocks[1..];
    let partials: Vec<T> = (0..first.len())
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; n];
            for (slot, v) in first_slots.iter().zip(first.point(i0)) {
                x[*slot] = *v;
            }
            let w0 = first.weights[i0];
            let mut idx = vec![0usize; rest.len()];
            let mut acc = T::zero();
            'outer: loop {
                let mut w = w0;
                for (b, (slots, nodes)) in rest.iter().enumerate() {
                    for (slot, v) in slots.iter().zip(nodes.point(idx[b])) {
                        x[*slot] = *v;
                    }
                    w *= nodes.weights[idx[b]];
                }
                acc = acc.add(f(&x).scale(w));
                for b in (0..rest.len()).rev() {
                    idx[b] += 1;
                    if idx[b] < rest[b].1.len() {
                        continue 'outer;
                    }
                    idx[b] = 0;
                }
                break;
            }
            acc
        })
        .collect();
    partials.into_iter().fold(T::zero(), T::add)
}

/// Integral of `f` over `0 <= x_1 <= ... <= x_N <= L` by nested Gauss-Legendre.
/// `f` receives ordered points.
pub fn simplex_quadrature<T, F>(f: F, n: usize, l: f64, order: usize) -> Result<T>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    if n == 0 {
        return invalid("simplex dimension must be >= 1");
    }
    if !(l > 0.0 && l.is_finite()) {
        return invalid("simplex length must be positive");
    }
    let rule = gauss_legendre(order)?;
    let blocks = vec![((0..n).collect(), SimplexNodes::new(0.0, l, n, &rule))];
    Ok(integrate_blocks(&blocks, n, &f))
}

/// Integral over a box given per-coordinate intervals.
///
/// Coordinates sharing an identical interval form a block that is integrated
/// over its ordered sub-simplex and multiplied by the block size factorial,
/// so `f` must be symmetric within each such block. Points passed to `f` are
/// ascending within every block.
pub fn box_quadrature<T, F>(f: F, intervals: &[(f64, f64)], order: usize) -> Result<T>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    if intervals.iter().any(|(a, b)| !(a.is_finite() && b.is_finite()) || b < a) {
        return invalid("box intervals must be finite with lo <= hi");
    }
    if intervals.iter().any(|(a, b)| a == b) {
        return Ok(T::zero());
    }
    let rule = gauss_legendre(order)?;
    let mut groups: Vec<((f64, f64), Vec<usize>)> = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| g == iv) {
            Some((_, slots)) => slots.push(i),
            None => groups.push((*iv, vec![i])),
        }
    }
    let mut factor = 1.0;
    let blocks: Vec<(Vec<usize>, SimplexNodes)> = groups
        .into_iter()
        .map(|((a, b), slots)| {
            factor *= (1..=slots.len()).map(|v| v as f64).product::<f64>();
            let nodes = SimplexNodes::new(a, b, slots.len(), &rule);
            (slots, nodes)
        })
        .collect();
    Ok(integrate_blocks(&blocks, intervals.len(), &f).scale(factor))
}
