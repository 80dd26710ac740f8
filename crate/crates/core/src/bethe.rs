//! Bethe-equation solver for few-body Lieb-Liniger eigenstates.
//!
//! Units are ħ = 2m = 1 throughout. Two geometries are supported: a ring of
//! circumference `L` (periodic boundary condition) and a box `[0, L]` with
//! hard walls. An eigenstate is labelled by a [`StateSpec`]; solving its
//! Bethe equations for given [`ModelParams`] gives a [`BetheSolution`].
//!
//! The log-form Bethe equations are the gradient of a strictly convex
//! Yang-Yang action, whose Hessian is the Gaudin matrix. The solver is a
//! damped Newton iteration on that gradient with the Gaudin matrix as the
//! Jacobian.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Geometry of the one-dimensional system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    #[serde(rename = "periodic")]
    Periodic,
    #[serde(rename = "hardwall")]
    HardWall,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Periodic => f.write_str("periodic"),
            BoundaryCondition::HardWall => f.write_str("hardwall"),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "ring" | "p" => Ok(BoundaryCondition::Periodic),
            "hardwall" | "hard-wall" | "box" | "h" => Ok(BoundaryCondition::HardWall),
            other => invalid(format!("unknown boundary condition `{other}`")),
        }
    }
}

/// Integer or half-odd-integer quantum number, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantumNumber(i64);

impl QuantumNumber {
    pub const fn from_int(value: i64) -> Self {
        QuantumNumber(2 * value)
    }

    pub const fn from_twice(twice: i64) -> Self {
        QuantumNumber(twice)
    }

    /// Rejects anything that is not a multiple of 1/2.
    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice.round() != twice || twice.abs() > 1e15 {
            return invalid(format!("quantum number {value} is not an integer or half-integer"));
        }
        Ok(QuantumNumber(twice as i64))
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for QuantumNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl FromStr for QuantumNumber {
    type Err = Error;

    /// Accepts decimals (`-0.5`, `3`) and halves written as fractions (`-1/2`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 =
                num.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad quantum number `{s}`")))?;
            return match den.trim() {
                "1" => Ok(QuantumNumber::from_int(num)),
                "2" => Ok(QuantumNumber::from_twice(num)),
                _ => invalid(format!("quantum number `{s}` must have denominator 1 or 2")),
            };
        }
        let v: f64 = s.parse().map_err(|_| Error::InvalidArgument(format!("bad quantum number `{s}`")))?;
        QuantumNumber::from_f64(v)
    }
}

impl Serialize for QuantumNumber {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for QuantumNumber {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(deserializer)?;
        QuantumNumber::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Identifies one eigenstate: geometry plus the ordered quantum numbers `I_1 < ... < I_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawStateSpec")]
pub struct StateSpec {
    bc: BoundaryCondition,
    quantum_numbers: Vec<QuantumNumber>,
}

#[derive(Deserialize)]
struct RawStateSpec {
    bc: BoundaryCondition,
    quantum_numbers: Vec<QuantumNumber>,
}

impl TryFrom<RawStateSpec> for StateSpec {
    type Error = Error;

    fn try_from(raw: RawStateSpec) -> Result<Self> {
        StateSpec::new(raw.bc, raw.quantum_numbers)
    }
}

impl StateSpec {
    pub fn new(bc: BoundaryCondition, quantum_numbers: Vec<QuantumNumber>) -> Result<Self> {
        let n = quantum_numbers.len();
        if n == 0 {
            return invalid("a state needs at least one particle");
        }
        if quantum_numbers.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("quantum numbers must be strictly increasing without duplicates");
        }
        match bc {
            BoundaryCondition::Periodic => {
                let want_integer = n % 2 == 1;
                if quantum_numbers.iter().any(|q| q.is_integer() != want_integer) {
                    let kind = if want_integer { "integers" } else { "half-odd-integers" };
                    return invalid(format!("periodic quantum numbers for N = {n} must be {kind}"));
                }
            }
            BoundaryCondition::HardWall => {
                if quantum_numbers.iter().any(|q| !q.is_integer() || q.twice() <= 0) {
                    return invalid("hard-wall quantum numbers must be positive integers");
                }
            }
        }
        Ok(StateSpec { bc, quantum_numbers })
    }

    pub fn from_values(bc: BoundaryCondition, values: &[f64]) -> Result<Self> {
        let qns = values.iter().map(|&v| QuantumNumber::from_f64(v)).collect::<Result<Vec<_>>>()?;
        StateSpec::new(bc, qns)
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n(&self) -> usize {
        self.quantum_numbers.len()
    }

    pub fn quantum_numbers(&self) -> &[QuantumNumber] {
        &self.quantum_numbers
    }

    pub fn values(&self) -> Vec<f64> {
        self.quantum_numbers.iter().map(|q| q.value()).collect()
    }

    /// Shifts every quantum number by the same integer.
    pub fn translated(&self, shift: i64) -> Result<Self> {
        let qns = self.quantum_numbers.iter().map(|q| QuantumNumber::from_twice(q.twice() + 2 * shift)).collect();
        StateSpec::new(self.bc, qns)
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.bc)?;
        for (i, q) in self.quantum_numbers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str("]")
    }
}

/// Interaction strength `c` (1/length) and system size `L` (length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl ModelParams {
    pub fn new(c: f64, l: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return invalid(format!("interaction strength must be finite and >= 0, got {c}"));
        }
        if !l.is_finite() || l <= 0.0 {
            return invalid(format!("system size must be finite and > 0, got {l}"));
        }
        Ok(ModelParams { c, l })
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        ModelParams::new(c, self.l)
    }

    pub fn with_l(self, l: f64) -> Result<Self> {
        ModelParams::new(self.c, l)
    }
}

/// Ground state: symmetric about zero on the ring, `1..=N` in the box.
pub fn ground_state(bc: BoundaryCondition, n: usize) -> Result<StateSpec> {
    if n < 1 {
        return invalid("particle number must be >= 1");
    }
    let n = n as i64;
    let twice: Vec<i64> = match bc {
        BoundaryCondition::Periodic => (0..n).map(|j| -(n - 1) + 2 * j).collect(),
        BoundaryCondition::HardWall => (1..=n).map(|j| 2 * j).collect(),
    };
    StateSpec::new(bc, twice.into_iter().map(QuantumNumber::from_twice).collect())
}

/// Type-I excitation: the outermost particle is lifted by `q`.
pub fn type1_excitation(bc: BoundaryCondition, n: usize, q: usize) -> Result<StateSpec> {
    if q < 1 {
        return invalid("type-I excitation index q must be >= 1");
    }
    let ground = ground_state(bc, n)?;
    let mut twice: Vec<i64> = ground.quantum_numbers.iter().map(|x| x.twice()).collect();
    let last = twice.len() - 1;
    twice[last] += 2 * q as i64;
    StateSpec::new(bc, twice.into_iter().map(QuantumNumber::from_twice).collect())
}

/// Type-II excitation: a hole at position `q`, every particle from `q` on shifted by one.
/// On the ring `q = 1` is the Umklapp case.
pub fn type2_excitation(bc: BoundaryCondition, n: usize, q: usize) -> Result<StateSpec> {
    if n < 2 || q < 1 || q > n - 1 {
        return invalid(format!("type-II excitation index q must lie in [1, N-1], got q = {q}, N = {n}"));
    }
    let ground = ground_state(bc, n)?;
    let twice: Vec<i64> = ground
        .quantum_numbers
        .iter()
        .enumerate()
        .map(|(j, x)| if j + 1 >= q { x.twice() + 2 } else { x.twice() })
        .collect();
    StateSpec::new(bc, twice.into_iter().map(QuantumNumber::from_twice).collect())
}

/// Newton solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Residual max-norm target is `tolerance * max(1, L * max|k|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Geometric continuation steps used when direct Newton fails at small `c L`.
    pub continuation_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-12, max_iterations: 200, continuation_steps: 10 }
    }
}

/// Solved quasimomenta of one eigenstate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetheSolution {
    pub spec: StateSpec,
    pub params: ModelParams,
    /// Strictly increasing quasimomenta (all positive for the box).
    pub k: Vec<f64>,
    pub dk_dc: Vec<f64>,
    pub energy: f64,
    /// Total momentum on the ring, pseudo-momentum in the box.
    pub momentum: f64,
    /// Max-norm of the log-form Bethe residual.
    pub residual: f64,
    pub iterations: usize,
}

impl BetheSolution {
    pub fn bc(&self) -> BoundaryCondition {
        self.spec.bc()
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }
}

/// Gaudin matrix (or Hessian of the Yang-Yang action in the box) with the squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NormData {
    pub matrix: DMatrix<f64>,
    pub det: f64,
    pub norm_sq: f64,
}

pub fn solve_bethe(spec: &StateSpec, params: &ModelParams) -> Result<BetheSolution> {
    solve_bethe_with(spec, params, &SolverOptions::default())
}

pub fn solve_bethe_with(spec: &StateSpec, params: &ModelParams, opts: &SolverOptions) -> Result<BetheSolution> {
    let params = ModelParams::new(params.c, params.l)?;
    let bc = spec.bc();
    let qn = spec.values();

    let (k, residual, iterations) = if params.c == 0.0 {
        (free_limit(spec, &params)?, 0.0, 0)
    } else {
        let k0 = strong_coupling_limit(bc, &qn, params.l);
        match newton(bc, &qn, params.c, params.l, k0.clone(), opts) {
            Ok(found) => found,
            Err(failure) => continuation(bc, &qn, &params, opts).map_err(|_| failure)?,
        }
    };

    check_ordering(bc, &k)?;
    let dk = dk_dc(&k, &params, bc)?;
    let energy = k.iter().map(|x| x * x).sum();
    let mut solution =
        BetheSolution { spec: spec.clone(), params, k, dk_dc: dk, energy, momentum: 0.0, residual, iterations };
    solution.momentum = momentum(spec, &solution);
    Ok(solution)
}

fn strong_coupling_limit(bc: BoundaryCondition, qn: &[f64], l: f64) -> Vec<f64> {
    let scale = match bc {
        BoundaryCondition::Periodic => 2.0 * PI / l,
        BoundaryCondition::HardWall => PI / l,
    };
    qn.iter().map(|i| scale * i).collect()
}

/// Free-gas limit `c -> 0+`; only defined when the limiting momenta stay distinct.
fn free_limit(spec: &StateSpec, params: &ModelParams) -> Result<Vec<f64>> {
    let n = spec.n() as i64;
    let k: Vec<f64> = spec
        .quantum_numbers()
        .iter()
        .enumerate()
        .map(|(j, q)| {
            let j = j as i64 + 1;
            match spec.bc() {
                // 2 I_j - (2j - N - 1) is even for every valid state.
                BoundaryCondition::Periodic => {
                    let twice_n = q.twice() - (2 * j - n - 1);
                    PI * twice_n as f64 / params.l
                }
                BoundaryCondition::HardWall => PI * (q.twice() / 2 - j + 1) as f64 / params.l,
            }
        })
        .collect();
    if k.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateState(format!(
            "{spec} has coinciding free momenta at c = 0; use a small positive c"
        )));
    }
    Ok(k)
}

fn check_ordering(bc: BoundaryCondition, k: &[f64]) -> Result<()> {
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite quasimomentum".into()));
    }
    if k.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateState("quasimomenta are not strictly increasing".into()));
    }
    if bc == BoundaryCondition::HardWall && k[0] <= 0.0 {
        return Err(Error::DegenerateState("hard-wall quasimomenta must be positive".into()));
    }
    Ok(())
}

/// Log-form Bethe residual, zero at a solution.
pub fn bethe_residual(bc: BoundaryCondition, qn: &[f64], k: &[f64], c: f64, l: f64) -> Vec<f64> {
    let n = k.len();
    (0..n)
        .map(|j| {
            let mut r = l * k[j];
            for m in 0..n {
                if m == j {
                    continue;
                }
                match bc {
                    BoundaryCondition::Periodic => r += 2.0 * ((k[j] - k[m]) / c).atan(),
                    BoundaryCondition::HardWall => r += ((k[j] - k[m]) / c).atan() + ((k[j] + k[m]) / c).atan(),
                }
            }
            r - match bc {
                BoundaryCondition::Periodic => 2.0 * PI * qn[j],
                BoundaryCondition::HardWall => PI * qn[j],
            }
        })
        .collect()
}

/// `∫_0^x atan(t/c) dt`.
fn atan_integral(x: f64, c: f64) -> f64 {
    x * (x / c).atan() - c * (x / c).hypot(1.0).ln()
}

/// Yang-Yang action; its gradient is [`bethe_residual`].
fn yang_yang(bc: BoundaryCondition, qn: &[f64], k: &[f64], c: f64, l: f64) -> f64 {
    let n = k.len();
    let lin = match bc {
        BoundaryCondition::Periodic => 2.0 * PI,
        BoundaryCondition::HardWall => PI,
    };
    let mut b: f64 = k.iter().zip(qn).map(|(kj, ij)| 0.5 * l * kj * kj - lin * ij * kj).sum();
    for a in 0..n {
        for m in a + 1..n {
            b += match bc {
                BoundaryCondition::Periodic => 2.0 * atan_integral(k[a] - k[m], c),
                BoundaryCondition::HardWall => atan_integral(k[a] - k[m], c) + atan_integral(k[a] + k[m], c),
            };
        }
    }
    b
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn target_residual(opts: &SolverOptions, k: &[f64], l: f64) -> f64 {
    opts.tolerance * (l * max_norm(k)).max(1.0)
}

fn newton_direction(k: &[f64], r: &[f64], params: &ModelParams, bc: BoundaryCondition) -> Option<Vec<f64>> {
    let h = gaudin_matrix(k, params, bc);
    let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
    h.lu().solve(&rhs).map(|d| d.iter().copied().collect())
}

/// Damped Newton; returns `(k, residual, iterations)` or the failing `Error`.
fn newton(
    bc: BoundaryCondition,
    qn: &[f64],
    c: f64,
    l: f64,
    mut k: Vec<f64>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let params = ModelParams { c, l };
    let mut r = bethe_residual(bc, qn, &k, c, l);
    let mut rn = max_norm(&r);
    for iter in 0..opts.max_iterations {
        if rn <= target_residual(opts, &k, l) {
            // a few full steps to reach the rounding floor
            for _ in 0..3 {
                let Some(d) = newton_direction(&k, &r, &params, bc) else { break };
                let trial: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a + b).collect();
                let tr = bethe_residual(bc, qn, &trial, c, l);
                let trn = max_norm(&tr);
                if trn < rn {
                    k = trial;
                    r = tr;
                    rn = trn;
                } else {
                    break;
                }
            }
            return Ok((k, rn, iter));
        }
        let d = newton_direction(&k, &r, &params, bc).ok_or(Error::SolverFailure { iterations: iter, residual: rn })?;
        let b0 = yang_yang(bc, qn, &k, c, l);
        let slope: f64 = r.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let tr = bethe_residual(bc, qn, &trial, c, l);
            let trn = max_norm(&tr);
            let armijo = yang_yang(bc, qn, &trial, c, l) <= b0 + 1e-4 * t * slope;
            if trn.is_finite() && (trn < (1.0 - 1e-4 * t) * rn || armijo) {
                k = trial;
                r = tr;
                rn = trn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::SolverFailure { iterations: iter, residual: rn });
        }
    }
    if rn <= target_residual(opts, &k, l) {
        return Ok((k, rn, opts.max_iterations));
    }
    Err(Error::SolverFailure { iterations: opts.max_iterations, residual: rn })
}

/// Continuation in `c` from `c L = 10` down to the requested coupling.
fn continuation(
    bc: BoundaryCondition,
    qn: &[f64],
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let c_start = 10.0 / params.l;
    if params.c >= c_start {
        return Err(Error::SolverFailure { iterations: 0, residual: f64::NAN });
    }
    let (mut k, _, mut total) = newton(bc, qn, c_start, params.l, strong_coupling_limit(bc, qn, params.l), opts)?;
    let steps = opts.continuation_steps.max(1);
    let ratio = params.c / c_start;
    let mut last = (k.clone(), f64::NAN, 0);
    for s in 1..=steps {
        let c = c_start * ratio.powf(s as f64 / steps as f64);
        let c = if s == steps { params.c } else { c };
        last = newton(bc, qn, c, params.l, k, opts)?;
        k = last.0.clone();
        total += last.2;
    }
    Ok((last.0, last.1, total))
}

/// Jacobian of the log-form Bethe equations with respect to `k`.
///
/// On the ring this is the Gaudin matrix of the norm formula; in the box it
/// is the Hessian of the Yang-Yang action.
pub fn gaudin_matrix(k: &[f64], params: &ModelParams, bc: BoundaryCondition) -> DMatrix<f64> {
    let n = k.len();
    let c = params.c;
    let lorentz = |x: f64| c / (x * x + c * c);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = params.l;
        for m in 0..n {
            if m == i {
                continue;
            }
            let (d, off) = match bc {
                BoundaryCondition::Periodic => {
                    let v = 2.0 * lorentz(k[i] - k[m]);
                    (v, -v)
                }
                BoundaryCondition::HardWall => {
                    let minus = lorentz(k[i] - k[m]);
                    let plus = lorentz(k[i] + k[m]);
                    (minus + plus, plus - minus)
                }
            };
            diag += d;
            h[(i, m)] = off;
        }
        h[(i, i)] = diag;
    }
    h
}

/// `dk_j/dc` from differentiating the Bethe equations at fixed `L`.
pub fn dk_dc(k: &[f64], params: &ModelParams, bc: BoundaryCondition) -> Result<Vec<f64>> {
    let n = k.len();
    let c = params.c;
    let rhs = DVector::from_iterator(
        n,
        (0..n).map(|a| {
            let mut s = 0.0;
            for m in 0..n {
                if m == a {
                    continue;
                }
                let d = k[a] - k[m];
                match bc {
                    BoundaryCondition::Periodic => s += 2.0 * d / (c * c + d * d),
                    BoundaryCondition::HardWall => {
                        let p = k[a] + k[m];
                        s += d / (c * c + d * d) + p / (c * c + p * p);
                    }
                }
            }
            s
        }),
    );
    let h = gaudin_matrix(k, params, bc);
    let sol = h.lu().solve(&rhs).ok_or_else(|| Error::NumericalFailure("singular Gaudin matrix in dk/dc".into()))?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite dk/dc".into()));
    }
    Ok(sol.iter().copied().collect())
}

/// Squared norm of the unnormalized ansatz over the ordered domain `0 < x_1 < ... < x_N < L`.
pub fn norm_sq(k: &[f64], params: &ModelParams, bc: BoundaryCondition) -> NormData {
    let n = k.len();
    let c2 = params.c * params.c;
    let matrix = gaudin_matrix(k, params, bc);
    let det = matrix.clone().lu().determinant();
    let mut prefactor = match bc {
        BoundaryCondition::Periodic => 1.0,
        BoundaryCondition::HardWall => 2f64.powi(n as i32),
    };
    for j in 0..n {
        for m in j + 1..n {
            let d = k[j] - k[m];
            prefactor *= 1.0 + c2 / (d * d);
            if bc == BoundaryCondition::HardWall {
                let p = k[j] + k[m];
                prefactor *= 1.0 + c2 / (p * p);
            }
        }
    }
    NormData { matrix, det, norm_sq: prefactor * det }
}

/// Finite-difference step used by [`dnorm_sq_dc`].
pub fn dnorm_step(c: f64) -> f64 {
    let h = 1e-5 * c.max(1.0);
    if c > 0.0 {
        h.min(0.5 * c)
    } else {
        h
    }
}

/// `d(N^2)/dc` along the solution branch `k(c)`, by central differences.
pub fn dnorm_sq_dc(spec: &StateSpec, params: &ModelParams) -> Result<f64> {
    let c = params.c;
    let h = dnorm_step(c);
    let at = |cc: f64| -> Result<f64> {
        let p = params.with_c(cc)?;
        let sol = solve_bethe(spec, &p)?;
        Ok(norm_sq(&sol.k, &p, spec.bc()).norm_sq)
    };
    if c == 0.0 {
        let (f0, f1, f2) = (at(0.0)?, at(h)?, at(2.0 * h)?);
        return Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h));
    }
    Ok((at(c + h)? - at(c - h)?) / (2.0 * h))
}

/// Total momentum on the ring; the pseudo-momentum `(π/L) Σ (I_j - j + 1)` in the box.
pub fn momentum(spec: &StateSpec, solution: &BetheSolution) -> f64 {
    match spec.bc() {
        BoundaryCondition::Periodic => solution.k.iter().sum(),
        BoundaryCondition::HardWall => {
            let s: i64 = spec.quantum_numbers().iter().enumerate().map(|(j, q)| q.twice() / 2 - j as i64).sum();
            PI * s as f64 / solution.params.l
        }
    }
}
