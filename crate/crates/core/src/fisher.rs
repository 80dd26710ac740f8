//! Quantum and classical Fisher information of the coupling `c`.
//!
//! All wavefunctions are normalized on the ordered domain, which is
//! equivalent to the symmetric normalization on the whole cube. Writing
//! `ψ̃ = Σ_a w_a e^{iκ_a·x}` and `∂_c ψ̃ = Σ_a u_a(x) e^{iκ_a·x}` with
//! `u_a = w_a' + i w_a Σ_m κ_am' x_m`, the QFI is
//! `4/𝒩² [∫|∂ψ̃|² - |∫ψ̃*∂ψ̃|²/𝒩²]`, and every pair `(a, b)` reduces to
//! simplex moments at `λ = κ_a - κ_b`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe::{dnorm_sq_dc, norm_sq, solve_bethe, BetheSolution, ModelParams, StateSpec};
use crate::error::{invalid, Error, Result};
use crate::integrals::divided::tail_sums;
use crate::integrals::{simplex_moments, simplex_quadrature, SimplexMoments};
use crate::wavefunction::{amplitudes, eval_unchecked, global_phase_class, AmplitudeTable, CompensatedSum, PhaseClass};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default Gauss-Legendre order per dimension for wavefunction quadrature.
pub fn default_order(n: usize) -> usize {
    match n {
        0..=3 => 48,
        4 => 24,
        _ => 16,
    }
}

fn moment_key(lambda: &[f64]) -> (Vec<u64>, bool) {
    let flip = lambda.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0);
    let key = lambda
        .iter()
        .map(|&x| {
            let v = if flip { -x } else { x };
            if v == 0.0 {
                0
            } else {
                v.to_bits()
            }
        })
        .collect();
    (key, flip)
}

/// Moments for every pair `λ = κ_a - κ_b`, shared between pairs with equal `±λ`.
struct PairMoments {
    unique: Vec<SimplexMoments>,
    /// `(index into unique, conjugate?)` for pair `a * len + b`.
    index: Vec<(usize, bool)>,
    len_b: usize,
}

impl PairMoments {
    fn build(left: &[Vec<f64>], right: &[Vec<f64>], l: f64, with_second: bool) -> Self {
        let mut keys: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut lambdas: Vec<Vec<f64>> = Vec::new();
        let mut index = Vec::with_capacity(left.len() * right.len());
        for ka in left {
            for kb in right {
                let lambda: Vec<f64> = ka.iter().zip(kb).map(|(a, b)| a - b).collect();
                let (key, flip) = moment_key(&lambda);
                let next = lambdas.len();
                let id = *keys.entry(key).or_insert_with(|| {
                    lambdas.push(lambda.iter().map(|x| if flip { -x } else { *x }).collect());
                    next
                });
                index.push((id, flip));
            }
        }
        let unique = lambdas.par_iter().map(|lam| simplex_moments(lam, l, with_second)).collect();
        PairMoments { unique, index, len_b: right.len() }
    }

    fn get(&self, a: usize, b: usize) -> (&SimplexMoments, bool) {
        let (id, flip) = self.index[a * self.len_b + b];
        (&self.unique[id], flip)
    }
}

fn cj(z: Complex64, flip: bool) -> Complex64 {
    if flip {
        z.conj()
    } else {
        z
    }
}

/// Pieces of the analytic QFI evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiBreakdown {
    pub qfi: f64,
    /// Gaudin-determinant norm.
    pub norm_sq: f64,
    /// The same norm from the moment sums.
    pub norm_sq_integral: f64,
    /// `d𝒩²/dc = 2 Re ∫ψ̃*∂ψ̃`.
    pub dnorm_sq_dc: f64,
    /// `|Im ∫|∂ψ̃|²| / |∫|∂ψ̃|²|` before it is discarded.
    pub imaginary_residue: f64,
}

/// Analytic QFI from a solved state and its amplitudes.
pub fn qfi_breakdown(solution: &BetheSolution, table: &AmplitudeTable) -> Result<QfiBreakdown> {
    let l = solution.params.l;
    let kappas: Vec<Vec<f64>> = table.terms.iter().map(|t| t.kappa.clone()).collect();
    let moments = PairMoments::build(&kappas, &kappas, l, true);
    let tails: Vec<Vec<Complex64>> = table
        .terms
        .iter()
        .map(|t| tail_sums(&t.dkappa_dc).into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        .collect();

    let rows: Vec<[Complex64; 3]> = (0..table.len())
        .into_par_iter()
        .map(|a| {
            let ta = &table.terms[a];
            let (wa, dwa) = (ta.weight().conj(), ta.dweight_dc().conj());
            let mut x = CompensatedSum::default();
            let mut y = CompensatedSum::default();
            let mut nn = CompensatedSum::default();
            for (b, tb) in table.terms.iter().enumerate() {
                let (m, flip) = moments.get(a, b);
                let (wb, dwb) = (tb.weight(), tb.dweight_dc());
                let m0 = cj(m.m0, flip);
                let lin_a = cj(m.linear(&tails[a]), flip);
                let lin_b = cj(m.linear(&tails[b]), flip);
                let quad = cj(m.bilinear(&tails[a], &tails[b]), flip);
                x.add(dwa * dwb * m0 + dwa * I * wb * lin_b - I * wa * dwb * lin_a + wa * wb * quad);
                y.add(wa * (dwb * m0 + I * wb * lin_b));
                nn.add(wa * wb * m0);
            }
            [x.total(), y.total(), nn.total()]
        })
        .collect();
    let mut sums = [CompensatedSum::default(); 3];
    for r in &rows {
        for (s, v) in sums.iter_mut().zip(r) {
            s.add(*v);
        }
    }
    let [x, y, nn] = sums.map(|s| s.total());

    let norm = norm_sq(&solution.k, &solution.params, solution.bc()).norm_sq;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-positive squared norm {norm}")));
    }
    let qfi = 4.0 * (x.re / norm - y.norm_sqr() / (norm * norm));
    if !qfi.is_finite() {
        return Err(Error::NumericalFailure("non-finite QFI".into()));
    }
    Ok(QfiBreakdown {
        qfi: qfi.max(0.0),
        norm_sq: norm,
        norm_sq_integral: nn.re,
        dnorm_sq_dc: 2.0 * y.re,
        imaginary_residue: if x.norm() > 0.0 { x.im.abs() / x.norm() } else { 0.0 },
    })
}

/// QFI of `c` for one eigenstate.
pub fn qfi_analytic(spec: &StateSpec, params: &ModelParams) -> Result<f64> {
    let sol = solve_bethe(spec, params)?;
    let table = amplitudes(&sol)?;
    Ok(qfi_breakdown(&sol, &table)?.qfi)
}

/// `⟨ψ̃_1|ψ̃_2⟩` over the ordered simplex.
pub fn overlap(s1: &BetheSolution, t1: &AmplitudeTable, s2: &BetheSolution, t2: &AmplitudeTable) -> Result<Complex64> {
    if s1.params.l != s2.params.l || t1.n != t2.n {
        return invalid("overlaps need equal L and N");
    }
    let left: Vec<Vec<f64>> = t1.terms.iter().map(|t| t.kappa.clone()).collect();
    let right: Vec<Vec<f64>> = t2.terms.iter().map(|t| t.kappa.clone()).collect();
    let moments = PairMoments::build(&left, &right, s1.params.l, false);
    let rows: Vec<Complex64> = (0..t1.len())
        .into_par_iter()
        .map(|a| {
            let wa = t1.terms[a].weight().conj();
            let mut s = CompensatedSum::default();
            for (b, tb) in t2.terms.iter().enumerate() {
                let (m, flip) = moments.get(a, b);
                s.add(wa * tb.weight() * cj(m.m0, flip));
            }
            s.total()
        })
        .collect();
    let mut total = CompensatedSum::default();
    rows.into_iter().for_each(|r| total.add(r));
    Ok(total.total())
}

/// Default fidelity step.
pub fn default_overlap_delta(c: f64) -> f64 {
    1e-4 * c.max(1.0)
}

/// QFI from the fidelity of neighbouring states, `4(2 - |⟨ψ_c|ψ_{c+δ}⟩| - |⟨ψ_c|ψ_{c-δ}⟩|)/δ²`.
pub fn qfi_overlap_oracle(spec: &StateSpec, params: &ModelParams, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid("fidelity step must be positive");
    }
    if params.c <= 0.0 {
        return invalid("the fidelity oracle needs c > 0");
    }
    let delta = delta.min(0.5 * params.c);
    let state = |c: f64| -> Result<(BetheSolution, AmplitudeTable)> {
        let sol = solve_bethe(spec, &params.with_c(c)?)?;
        let table = amplitudes(&sol)?;
        Ok((sol, table))
    };
    let (s0, t0) = state(params.c)?;
    let n0 = overlap(&s0, &t0, &s0, &t0)?.re;
    let mut fidelity_sum = 0.0;
    for c in [params.c + delta, params.c - delta] {
        let (s1, t1) = state(c)?;
        let n1 = overlap(&s1, &t1, &s1, &t1)?.re;
        fidelity_sum += overlap(&s0, &t0, &s1, &t1)?.norm() / (n0 * n1).sqrt();
    }
    Ok(4.0 * (2.0 - fidelity_sum) / (delta * delta))
}

/// Position-measurement CFI by quadrature over the ordered simplex.
pub fn cfi_quadrature(spec: &StateSpec, params: &ModelParams, order: usize) -> Result<f64> {
    let sol = solve_bethe(spec, params)?;
    let table = amplitudes(&sol)?;
    let norm = norm_sq(&sol.k, &sol.params, sol.bc()).norm_sq;
    let dnorm = dnorm_sq_dc(spec, params)?;
    let shift = dnorm / (2.0 * norm);
    let integral: f64 = simplex_quadrature(
        |x| {
            let (v, dv) = eval_unchecked(&table, &sol, x);
            let p = v.norm_sqr();
            if p < 1e-300 {
                return 0.0;
            }
            let m = p.sqrt();
            let g = (v.conj() * dv).re / m - m * shift;
            g * g
        },
        sol.n(),
        sol.params.l,
        order,
    )?;
    let cfi = 4.0 * integral / norm;
    if !cfi.is_finite() {
        return Err(Error::Quadrature("non-finite CFI integrand".into()));
    }
    Ok(cfi)
}

/// How the CFI entry of a report was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfiPath {
    /// Phase class guarantees CFI = QFI.
    Saturated,
    Quadrature,
}

/// Numerical provenance of a [`FisherReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherMethod {
    pub qfi_path: String,
    pub cfi_path: CfiPath,
    pub quadrature_order: Option<usize>,
    pub solver_residual: f64,
    pub norm_sq: f64,
    /// Relative gap between the Gaudin norm and the integrated norm.
    pub norm_consistency: f64,
    pub imaginary_residue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub state: StateSpec,
    pub params: ModelParams,
    pub qfi: f64,
    pub cfi: f64,
    /// `qfi - cfi`.
    pub phase_variance_term: f64,
    pub phase_class: PhaseClass,
    pub method: FisherMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FisherOptions {
    /// Integrate the CFI even when the phase class makes it equal to the QFI.
    pub force_quadrature: bool,
    pub order: Option<usize>,
}

pub fn fisher_report(spec: &StateSpec, params: &ModelParams) -> Result<FisherReport> {
    fisher_report_with(spec, params, &FisherOptions::default())
}

pub fn fisher_report_with(spec: &StateSpec, params: &ModelParams, opts: &FisherOptions) -> Result<FisherReport> {
    let sol = solve_bethe(spec, params)?;
    let table = amplitudes(&sol)?;
    let qb = qfi_breakdown(&sol, &table)?;
    let phase_class = global_phase_class(spec, &sol);
    let order = opts.order.unwrap_or_else(|| default_order(spec.n()));
    let (cfi, cfi_path, quadrature_order) = if phase_class != PhaseClass::General && !opts.force_quadrature {
        (qb.qfi, CfiPath::Saturated, None)
    } else {
        (cfi_quadrature(spec, params, order)?, CfiPath::Quadrature, Some(order))
    };
    Ok(FisherReport {
        state: spec.clone(),
        params: sol.params,
        qfi: qb.qfi,
        cfi,
        phase_variance_term: qb.qfi - cfi,
        phase_class,
        method: FisherMethod {
            qfi_path: "analytic".into(),
            cfi_path,
            quadrature_order,
            solver_residual: sol.residual,
            norm_sq: qb.norm_sq,
            norm_consistency: (qb.norm_sq_integral - qb.norm_sq).abs() / qb.norm_sq,
            imaginary_residue: qb.imaginary_residue,
        },
    })
}

/// Position-measurement CFI; equals the QFI for real or imaginary states.
pub fn cfi(spec: &StateSpec, params: &ModelParams) -> Result<f64> {
    Ok(fisher_report(spec, params)?.cfi)
}

/// Location and height of the CFI maximum over `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmaxResult {
    pub l_max: f64,
    pub f_max: f64,
    pub c: f64,
    pub c_l_max: f64,
    pub evaluations: usize,
}

/// Default search bracket for [`lmax`].
pub fn default_bracket(c: f64) -> (f64, f64) {
    (2.0 / c, 40.0 / c)
}

/// Maximizes the CFI over `L` at fixed `c` by a coarse scan followed by golden-section search.
pub fn lmax(spec: &StateSpec, c: f64, bracket: (f64, f64)) -> Result<LmaxResult> {
    let (lo, hi) = bracket;
    if !(c > 0.0 && c.is_finite()) {
        return invalid("L_max search needs c > 0");
    }
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return invalid(format!("bad bracket [{lo}, {hi}]"));
    }
    let f = |l: f64| -> Result<f64> { cfi(spec, &ModelParams::new(c, l)?) };
    let tol = 1e-3 / c;

    const SCAN: usize = 17;
    let grid: Vec<f64> = (0..SCAN).map(|i| lo + (hi - lo) * i as f64 / (SCAN - 1) as f64).collect();
    let values = grid.par_iter().map(|&l| f(l)).collect::<Result<Vec<f64>>>()?;
    let best = values.iter().enumerate().fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    if best == 0 || best == SCAN - 1 {
        return Err(Error::Bracket { lo, hi });
    }

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    let mut evaluations = SCAN + 2;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        }
        evaluations += 1;
    }
    let l_max = 0.5 * (a + b);
    let f_max = f(l_max)?;
    Ok(LmaxResult { l_max, f_max, c, c_l_max: c * l_max, evaluations: evaluations + 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "L")]
    L,
}

/// Shape of the CFI curve across the successful sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    /// Rises to a single maximum at this grid index, then falls.
    SinglePeak(usize),
    Mixed,
    TooFewPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Option<FisherReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub fixed: f64,
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub monotonicity: Monotonicity,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_none()).count()
    }
}

fn classify(values: &[(usize, f64)]) -> Monotonicity {
    if values.len() < 2 {
        return Monotonicity::TooFewPoints;
    }
    let ups: Vec<bool> = values.windows(2).map(|w| w[1].1 > w[0].1).collect();
    let downs: Vec<bool> = values.windows(2).map(|w| w[1].1 < w[0].1).collect();
    if ups.iter().all(|&u| u) {
        return Monotonicity::Increasing;
    }
    if downs.iter().all(|&d| d) {
        return Monotonicity::Decreasing;
    }
    if let Some(turn) = downs.iter().position(|&d| d) {
        if turn > 0 && ups[..turn].iter().all(|&u| u) && downs[turn..].iter().all(|&d| d) {
            return Monotonicity::SinglePeak(values[turn].0);
        }
    }
    Monotonicity::Mixed
}

/// One Fisher report per grid point along `c` (at fixed `L`) or `L` (at fixed `c`).
pub fn sweep(spec: &StateSpec, axis: SweepAxis, grid: &[f64], fixed: f64) -> Result<SweepResult> {
    if grid.is_empty() {
        return invalid("sweep grid is empty");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|v| !v.is_finite()) {
        return invalid("sweep grid must be finite and strictly increasing");
    }
    let build = |v: f64| match axis {
        SweepAxis::C => ModelParams::new(v, fixed),
        SweepAxis::L => ModelParams::new(fixed, v),
    };
    build(grid[0])?;
    build(grid[grid.len() - 1])?;
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&v| match build(v).and_then(|p| fisher_report(spec, &p)) {
            Ok(r) => SweepPoint { value: v, report: Some(r), error: None },
            Err(e) => SweepPoint { value: v, report: None, error: Some(e.to_string()) },
        })
        .collect();
    let values: Vec<(usize, f64)> =
        points.iter().enumerate().filter_map(|(i, p)| p.report.as_ref().map(|r| (i, r.cfi))).collect();
    Ok(SweepResult { axis, fixed, grid: grid.to_vec(), monotonicity: classify(&values), points })
}
