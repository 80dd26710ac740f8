//! Bethe-ansatz wavefunctions and their derivative with respect to `c`.
//!
//! On the ordered domain `0 <= x_1 <= ... <= x_N <= L` the unnormalized
//! wavefunction is a finite sum of plane waves, `ψ̃(x) = Σ_a w_a exp(i κ_a·x)`.
//! Each term carries its signed, permuted quasimomenta `κ_a`, the weight
//! `w_a` and their `c`-derivatives. On the ring the terms run over
//! permutations `P`, in the box over sign vectors `ε` and permutations.

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheSolution, BoundaryCondition, StateSpec};
use crate::error::{invalid, Error, Result};

/// Default particle caps; beyond them the permutation sums explode.
pub const MAX_N_PERIODIC: usize = 5;
pub const MAX_N_HARDWALL: usize = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One plane-wave component of the ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTerm {
    /// `perm[j]` is the index of the quasimomentum attached to coordinate `j`.
    pub perm: Vec<usize>,
    /// Sign vector `ε` (all `+1` on the ring).
    pub signs: Vec<i8>,
    /// `κ_j = ε_j k_{P_j}`.
    pub kappa: Vec<f64>,
    pub dkappa_dc: Vec<f64>,
    pub amplitude: Complex64,
    pub damplitude_dc: Complex64,
    /// `π_ε = Π ε_j`.
    pub sign: f64,
}

impl AmplitudeTerm {
    /// Signed amplitude `π_ε A`.
    pub fn weight(&self) -> Complex64 {
        self.amplitude * self.sign
    }

    pub fn dweight_dc(&self) -> Complex64 {
        self.damplitude_dc * self.sign
    }
}

/// All amplitudes of one solved state.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable {
    pub bc: BoundaryCondition,
    pub n: usize,
    pub terms: Vec<AmplitudeTerm>,
}

impl AmplitudeTable {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, perm: &[usize], signs: &[i8]) -> Option<&AmplitudeTerm> {
        self.terms.iter().find(|t| t.perm == perm && t.signs == signs)
    }
}

/// Wavefunction value and `c`-derivative at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEval {
    pub value: Complex64,
    pub dvalue_dc: Complex64,
    pub at: Vec<f64>,
}

/// Global phase structure, deciding whether position measurements saturate the QFI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseClass {
    Real,
    Imaginary,
    General,
}

fn check_cap(bc: BoundaryCondition, n: usize) -> Result<()> {
    let cap = match bc {
        BoundaryCondition::Periodic => MAX_N_PERIODIC,
        BoundaryCondition::HardWall => MAX_N_HARDWALL,
    };
    if n > cap {
        return Err(Error::ResourceLimit(format!(
            "N = {n} exceeds the {bc} cap of {cap}; use the uncapped entry point to override"
        )));
    }
    Ok(())
}

/// Builds the amplitude table, enforcing the default particle caps.
pub fn amplitudes(solution: &BetheSolution) -> Result<AmplitudeTable> {
    check_cap(solution.bc(), solution.n())?;
    amplitudes_uncapped(solution)
}

pub fn amplitudes_uncapped(solution: &BetheSolution) -> Result<AmplitudeTable> {
    let bc = solution.bc();
    let n = solution.n();
    let c = solution.params.c;
    let k = &solution.k;
    let dk = &solution.dk_dc;
    let scale = k.iter().fold(c, |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);

    let sign_vectors: Vec<Vec<i8>> = match bc {
        BoundaryCondition::Periodic => vec![vec![1; n]],
        BoundaryCondition::HardWall => {
            (0..1usize << n).map(|mask| (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect()).collect()
        }
    };

    let mut terms = Vec::with_capacity(sign_vectors.len() * (1..=n).product::<usize>());
    for perm in (0..n).permutations(n) {
        for signs in &sign_vectors {
            let kappa: Vec<f64> = (0..n).map(|j| signs[j] as f64 * k[perm[j]]).collect();
            let dkappa: Vec<f64> = (0..n).map(|j| signs[j] as f64 * dk[perm[j]]).collect();
            let mut amp = Complex64::new(1.0, 0.0);
            let mut log_deriv = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for l in j + 1..n {
                    let d = kappa[j] - kappa[l];
                    let dd = dkappa[j] - dkappa[l];
                    if d.abs() < 1e-14 * scale {
                        return Err(Error::DegenerateState(format!("coincident quasimomenta in permutation {perm:?}")));
                    }
                    amp *= 1.0 + I * c / d;
                    log_deriv += I * (d - c * dd) / (d * (d + I * c));
                    if bc == BoundaryCondition::HardWall {
                        let s = kappa[j] + kappa[l];
                        let ds = dkappa[j] + dkappa[l];
                        if s.abs() < 1e-14 * scale {
                            return Err(Error::DegenerateState(format!(
                                "vanishing quasimomentum sum in permutation {perm:?}"
                            )));
                        }
                        amp *= 1.0 - I * c / s;
                        log_deriv += -I * (s - c * ds) / (s * (s - I * c));
                    }
                }
            }
            let sign = signs.iter().map(|&s| s as f64).product();
            terms.push(AmplitudeTerm {
                perm: perm.clone(),
                signs: signs.clone(),
                kappa,
                dkappa_dc: dkappa,
                amplitude: amp,
                damplitude_dc: amp * log_deriv,
                sign,
            });
        }
    }
    Ok(AmplitudeTable { bc, n, terms })
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub(crate) fn total(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// Evaluates the ansatz at an ordered point without checking the ordering.
pub(crate) fn eval_unchecked(table: &AmplitudeTable, solution: &BetheSolution, x: &[f64]) -> (Complex64, Complex64) {
    let n = table.n;
    // phases[m * n + j] = exp(i k_m x_j)
    let mut phases = Vec::with_capacity(n * n);
    for &km in &solution.k {
        for &xj in x {
            phases.push(Complex64::from_polar(1.0, km * xj));
        }
    }
    let mut value = CompensatedSum::default();
    let mut deriv = CompensatedSum::default();
    for t in &table.terms {
        let mut e = Complex64::new(1.0, 0.0);
        let mut lin = 0.0;
        for j in 0..n {
            let p = phases[t.perm[j] * n + j];
            e *= if t.signs[j] < 0 { p.conj() } else { p };
            lin += t.dkappa_dc[j] * x[j];
        }
        let w = t.weight();
        value.add(w * e);
        deriv.add((t.dweight_dc() + I * w * lin) * e);
    }
    (value.total(), deriv.total())
}

fn check_point(solution: &BetheSolution, x: &[f64]) -> Result<()> {
    if x.len() != solution.n() {
        return invalid(format!("expected {} coordinates, got {}", solution.n(), x.len()));
    }
    let l = solution.params.l;
    if x.iter().any(|&v| !v.is_finite() || v < 0.0 || v > l) {
        return invalid(format!("coordinates must lie in [0, {l}]"));
    }
    Ok(())
}

/// Evaluates `ψ̃` and `∂_c ψ̃` at `0 <= x_1 <= ... <= x_N <= L`.
pub fn eval_ordered(table: &AmplitudeTable, solution: &BetheSolution, x: &[f64]) -> Result<PointEval> {
    check_point(solution, x)?;
    if x.windows(2).any(|w| w[0] > w[1]) {
        return invalid("eval_ordered needs non-decreasing coordinates");
    }
    let (value, dvalue_dc) = eval_unchecked(table, solution, x);
    Ok(PointEval { value, dvalue_dc, at: x.to_vec() })
}

/// Bosonic extension to the whole cube `[0, L]^N`.
pub fn eval_symmetric(table: &AmplitudeTable, solution: &BetheSolution, x: &[f64]) -> Result<PointEval> {
    check_point(solution, x)?;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (value, dvalue_dc) = eval_unchecked(table, solution, &sorted);
    Ok(PointEval { value, dvalue_dc, at: x.to_vec() })
}

/// Box states alternate real/imaginary with `N`; ring states are real up to a
/// `c`-independent plane wave when their quantum numbers are mirror symmetric.
pub fn global_phase_class(spec: &StateSpec, _solution: &BetheSolution) -> PhaseClass {
    match spec.bc() {
        BoundaryCondition::HardWall => {
            if spec.n() % 2 == 0 {
                PhaseClass::Real
            } else {
                PhaseClass::Imaginary
            }
        }
        BoundaryCondition::Periodic => {
            let q = spec.quantum_numbers();
            let n = q.len();
            let centre = q[0].twice() + q[n - 1].twice();
            if (0..n).all(|j| q[j].twice() + q[n - 1 - j].twice() == centre) {
                PhaseClass::Real
            } else {
                PhaseClass::General
            }
        }
    }
}
