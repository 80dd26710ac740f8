//! Integrals over the ordered simplex `0 < x_1 < ... < x_N < L`.
//!
//! Three engines live here:
//! - a symbolic recursion over exponential-polynomial terms ([`simplex_exp_integral`]),
//! - divided differences of `exp` giving all low moments at once ([`divided`]),
//! - iterated Gauss-Legendre quadrature over simplices and boxes ([`quadrature`]).

pub mod divided;
pub mod quadrature;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use divided::{exp_divided_difference, simplex_moments, SimplexMoments};
pub use quadrature::{box_quadrature, gauss_legendre, simplex_quadrature, QuadValue};

/// `coeff * x^power * exp(-i * wavenumber * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub coeff: Complex64,
    pub power: u32,
    pub wavenumber: f64,
}

impl ExpPolyTerm {
    pub fn new(coeff: Complex64, power: u32, wavenumber: f64) -> Self {
        ExpPolyTerm { coeff, power, wavenumber }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeff * x.powi(self.power as i32) * Complex64::from_polar(1.0, -self.wavenumber * x)
    }
}

/// Wavenumbers below this (times the problem scale) take the polynomial branch.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

fn factorial(p: u32) -> f64 {
    (1..=p).map(f64::from).product()
}

/// Closed-form antiderivative of an [`ExpPolyTerm`], evaluated at `x`.
///
/// For a vanishing wavenumber this is `coeff x^{p+1}/(p+1)`.
pub fn antiderivative(term: &ExpPolyTerm, x: f64) -> Complex64 {
    antiderivative_terms(term, DEGENERACY_THRESHOLD).iter().map(|t| t.eval(x)).sum()
}

/// `∫_0^x term(t) dt`, accurate on both sides of the degeneracy threshold.
pub fn primitive_from_zero(term: &ExpPolyTerm, x: f64) -> Complex64 {
    let p = term.power as i32;
    let mu = term.wavenumber;
    if (mu * x).abs() < 1.0 {
        let z = Complex64::new(0.0, -mu * x);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..60 {
            let t = zn / (fact * (p + n + 1) as f64);
            acc += t;
            if t.norm() < 1e-18 * acc.norm() {
                break;
            }
            zn *= z;
            fact *= (n + 1) as f64;
        }
        return term.coeff * x.powi(p + 1) * acc;
    }
    antiderivative(term, x) - antiderivative(term, 0.0)
}

/// The antiderivative as a list of terms sharing the input wavenumber.
fn antiderivative_terms(term: &ExpPolyTerm, threshold: f64) -> Vec<ExpPolyTerm> {
    let p = term.power;
    if term.wavenumber.abs() < threshold {
        return vec![ExpPolyTerm::new(term.coeff / f64::from(p + 1), p + 1, 0.0)];
    }
    // ∫ x^p e^{ikx} = -p! (i/k)^{p+1} e^{ikx} Σ_s (-ikx)^s / s!
    let k = -term.wavenumber;
    let lead = -term.coeff * factorial(p) * Complex64::new(0.0, 1.0 / k).powu(p + 1);
    let mut out = Vec::with_capacity(p as usize + 1);
    let mut ms = Complex64::new(1.0, 0.0);
    for s in 0..=p {
        out.push(ExpPolyTerm::new(lead * ms / factorial(s), s, term.wavenumber));
        ms *= Complex64::new(0.0, -k);
    }
    out
}

/// Request for `∫_simplex x_m^α x_n^β exp(-i Σ λ_j x_j) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexIntegralRequest {
    pub lambda: Vec<f64>,
    pub alpha: u32,
    pub beta: u32,
    /// 1-based coordinate index for `α`; ignored when `α = 0`.
    pub m: Option<usize>,
    /// 1-based coordinate index for `β`; ignored when `β = 0`.
    pub n: Option<usize>,
    pub l: f64,
    /// Cap on the number of live terms per level.
    pub max_terms: usize,
}

impl SimplexIntegralRequest {
    pub fn plain(lambda: Vec<f64>, l: f64) -> Self {
        SimplexIntegralRequest { lambda, alpha: 0, beta: 0, m: None, n: None, l, max_terms: 200_000 }
    }

    pub fn with_powers(mut self, alpha: u32, m: usize, beta: u32, n: usize) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self.m = Some(m);
        self.n = Some(n);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.lambda.len();
        if n == 0 {
            return invalid("empty wavenumber list");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return invalid("simplex length must be positive");
        }
        if self.lambda.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite wavenumber");
        }
        for (power, idx) in [(self.alpha, self.m), (self.beta, self.n)] {
            if power > 0 {
                match idx {
                    Some(i) if (1..=n).contains(&i) => {}
                    _ => return invalid(format!("power index must lie in 1..={n}")),
                }
            }
        }
        Ok(())
    }

    fn power_at(&self, j: usize) -> u32 {
        let mut p = 0;
        if self.alpha > 0 && self.m == Some(j + 1) {
            p += self.alpha;
        }
        if self.beta > 0 && self.n == Some(j + 1) {
            p += self.beta;
        }
        p
    }
}

/// Sorts by (power, wavenumber) and merges terms whose wavenumbers agree within `threshold`.
fn merge_terms(mut terms: Vec<ExpPolyTerm>, threshold: f64) -> Vec<ExpPolyTerm> {
    terms.sort_by(|a, b| a.power.cmp(&b.power).then(a.wavenumber.total_cmp(&b.wavenumber)));
    let mut out: Vec<ExpPolyTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.power == t.power && (last.wavenumber - t.wavenumber).abs() < threshold => {
                last.coeff += t.coeff;
            }
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
    out
}

/// Nested integral by innermost-to-outermost symbolic recursion.
pub fn simplex_exp_integral(req: &SimplexIntegralRequest) -> Result<Complex64> {
    req.validate()?;
    let n = req.lambda.len();
    let scale = req.lambda.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let threshold = DEGENERACY_THRESHOLD * scale;

    let mut level = vec![ExpPolyTerm::new(Complex64::new(1.0, 0.0), req.power_at(0), req.lambda[0])];
    for j in 0..n {
        // integrate x_j over [0, x_{j+1}] (or [0, L] at the top)
        let mut next = Vec::with_capacity(level.len() * 3);
        for t in &level {
            let prim = antiderivative_terms(t, threshold);
            let at_zero: Complex64 = prim.iter().filter(|q| q.power == 0).map(|q| q.coeff).sum();
            next.extend(prim);
            if at_zero != Complex64::new(0.0, 0.0) {
                next.push(ExpPolyTerm::new(-at_zero, 0, 0.0));
            }
        }
        if j + 1 < n {
            let p = req.power_at(j + 1);
            for t in &mut next {
                t.power += p;
                t.wavenumber += req.lambda[j + 1];
            }
        }
        level = merge_terms(next, threshold);
        if level.len() > req.max_terms {
            return Err(Error::ResourceLimit(format!(
                "{} terms at level {} exceed the cap of {}",
                level.len(),
                j + 1,
                req.max_terms
            )));
        }
    }
    Ok(level.iter().map(|t| t.eval(req.l)).sum())
}
