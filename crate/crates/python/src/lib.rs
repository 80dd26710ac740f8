//! Python bindings: states, Bethe solutions, Fisher information and imaging.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use llfisher::Error;

/// Python exception for a library error.
pub fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::ResourceLimit(_) | Error::Bracket { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn bc_from(s: &str) -> PyResult<llfisher::bethe::BoundaryCondition> {
    s.parse().map_err(to_py_err)
}

#[pymodule]
pub mod pyllfisher {
    use num_complex::Complex64;
    use pyo3::prelude::*;

    use llfisher::bethe::{self, ModelParams, StateSpec};
    use llfisher::{fisher, imaging, wavefunction as wf};

    use super::{bc_from, to_py_err};

    #[pymodule_export]
    const VERSION: &str = env!("CARGO_PKG_VERSION");

    fn params(c: f64, l: f64) -> PyResult<ModelParams> {
        ModelParams::new(c, l).map_err(to_py_err)
    }

    /// An eigenstate label: boundary condition plus quantum numbers.
    #[pyclass(name = "State", frozen, eq, hash, from_py_object)]
    #[derive(Clone, PartialEq, Eq, Hash)]
    pub struct State {
        pub inner: StateSpec,
    }

    #[pymethods]
    impl State {
        #[new]
        fn new(bc: &str, quantum_numbers: Vec<f64>) -> PyResult<Self> {
            Ok(State { inner: StateSpec::from_values(bc_from(bc)?, &quantum_numbers).map_err(to_py_err)? })
        }

        #[staticmethod]
        fn ground(bc: &str, n: usize) -> PyResult<Self> {
            Ok(State { inner: bethe::ground_state(bc_from(bc)?, n).map_err(to_py_err)? })
        }

        #[staticmethod]
        fn type1(bc: &str, n: usize, q: usize) -> PyResult<Self> {
            Ok(State { inner: bethe::type1_excitation(bc_from(bc)?, n, q).map_err(to_py_err)? })
        }

        #[staticmethod]
        fn type2(bc: &str, n: usize, q: usize) -> PyResult<Self> {
            Ok(State { inner: bethe::type2_excitation(bc_from(bc)?, n, q).map_err(to_py_err)? })
        }

        #[getter]
        fn bc(&self) -> String {
            self.inner.bc().to_string()
        }

        #[getter]
        fn n(&self) -> usize {
            self.inner.n()
        }

        #[getter]
        fn quantum_numbers(&self) -> Vec<f64> {
            self.inner.values()
        }

        fn translated(&self, shift: i64) -> PyResult<Self> {
            Ok(State { inner: self.inner.translated(shift).map_err(to_py_err)? })
        }

        fn __repr__(&self) -> String {
            format!("State('{}')", self.inner)
        }
    }

    #[pyclass(name = "Solution", frozen, get_all)]
    pub struct Solution {
        pub k: Vec<f64>,
        pub dk_dc: Vec<f64>,
        pub energy: f64,
        pub momentum: f64,
        pub residual: f64,
        pub iterations: usize,
        pub norm_sq: f64,
        pub dnorm_sq_dc: f64,
    }

    /// Solve the Bethe equations.
    #[pyfunction]
    #[pyo3(name = "solve")]
    fn solve(state: &State, c: f64, l: f64) -> PyResult<Solution> {
        let p = params(c, l)?;
        let sol = bethe::solve_bethe(&state.inner, &p).map_err(to_py_err)?;
        let nd = bethe::norm_sq(&sol.k, &p, state.inner.bc());
        let dnorm = bethe::dnorm_sq_dc(&state.inner, &p).map_err(to_py_err)?;
        Ok(Solution {
            k: sol.k,
            dk_dc: sol.dk_dc,
            energy: sol.energy,
            momentum: sol.momentum,
            residual: sol.residual,
            iterations: sol.iterations,
            norm_sq: nd.norm_sq,
            dnorm_sq_dc: dnorm,
        })
    }

    /// Unnormalized wavefunction and its c-derivative at one configuration.
    #[pyfunction]
    fn wavefunction(state: &State, c: f64, l: f64, x: Vec<f64>) -> PyResult<(Complex64, Complex64)> {
        let sol = bethe::solve_bethe(&state.inner, &params(c, l)?).map_err(to_py_err)?;
        let table = wf::amplitudes(&sol).map_err(to_py_err)?;
        let e = wf::eval_symmetric(&table, &sol, &x).map_err(to_py_err)?;
        Ok((e.value, e.dvalue_dc))
    }

    #[pyclass(name = "FisherReport", frozen, get_all)]
    pub struct Report {
        pub qfi: f64,
        pub cfi: f64,
        pub gap: f64,
        pub phase_class: String,
        pub cfi_path: String,
        pub norm_consistency: f64,
    }

    #[pymethods]
    impl Report {
        fn __repr__(&self) -> String {
            format!("FisherReport(qfi={}, cfi={}, phase_class='{}')", self.qfi, self.cfi, self.phase_class)
        }
    }

    #[pyfunction]
    #[pyo3(signature = (state, c, l, force_quadrature = false, order = None))]
    fn fisher_report(state: &State, c: f64, l: f64, force_quadrature: bool, order: Option<usize>) -> PyResult<Report> {
        let r = fisher::fisher_report_with(
            &state.inner,
            &params(c, l)?,
            &fisher::FisherOptions { force_quadrature, order },
        )
        .map_err(to_py_err)?;
        Ok(Report {
            qfi: r.qfi,
            cfi: r.cfi,
            gap: r.phase_variance_term,
            phase_class: format!("{:?}", r.phase_class).to_lowercase(),
            cfi_path: format!("{:?}", r.method.cfi_path).to_lowercase(),
            norm_consistency: r.method.norm_consistency,
        })
    }

    #[pyfunction]
    fn qfi(state: &State, c: f64, l: f64) -> PyResult<f64> {
        fisher::qfi_analytic(&state.inner, &params(c, l)?).map_err(to_py_err)
    }

    #[pyfunction]
    fn cfi(state: &State, c: f64, l: f64) -> PyResult<f64> {
        fisher::cfi(&state.inner, &params(c, l)?).map_err(to_py_err)
    }

    /// `(l_max, f_max, c * l_max)`.
    #[pyfunction]
    #[pyo3(signature = (state, c, bracket = None))]
    fn lmax(state: &State, c: f64, bracket: Option<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
        if !(c > 0.0) {
            return Err(to_py_err(llfisher::Error::InvalidArgument("c must be positive".into())));
        }
        let r =
            fisher::lmax(&state.inner, c, bracket.unwrap_or_else(|| fisher::default_bracket(c))).map_err(to_py_err)?;
        Ok((r.l_max, r.f_max, r.c_l_max))
    }

    fn distribution(state: &State, c: f64, l: f64, n_pixels: usize) -> PyResult<imaging::ImageDistribution> {
        let grid = imaging::PixelGrid::tiling(l, n_pixels).map_err(to_py_err)?;
        imaging::image_distribution(&state.inner, &params(c, l)?, &grid).map_err(to_py_err)
    }

    /// All images on an exact tiling as `(counts, probability, dprob_dc)`.
    #[pyfunction]
    fn image_distribution(state: &State, c: f64, l: f64, n_pixels: usize) -> PyResult<Vec<(Vec<u32>, f64, f64)>> {
        Ok(distribution(state, c, l, n_pixels)?
            .entries
            .into_iter()
            .map(|e| (e.image.counts, e.probability, e.dprob_dc))
            .collect())
    }

    #[pyfunction]
    fn imaging_cfi(state: &State, c: f64, l: f64, n_pixels: usize) -> PyResult<f64> {
        Ok(imaging::imaging_cfi(&distribution(state, c, l, n_pixels)?))
    }

    #[pyfunction]
    fn sample_images(
        state: &State,
        c: f64,
        l: f64,
        n_pixels: usize,
        shots: usize,
        seed: u64,
    ) -> PyResult<Vec<Vec<u32>>> {
        let dist = distribution(state, c, l, n_pixels)?;
        Ok(imaging::sample_images(&dist, shots, seed).map_err(to_py_err)?.into_iter().map(|im| im.counts).collect())
    }

    /// Maximum-likelihood `c` from images on a grid of candidate couplings.
    #[pyfunction]
    fn mle(images: Vec<Vec<u32>>, state: &State, l: f64, n_pixels: usize, c_grid: Vec<f64>) -> PyResult<f64> {
        let grid = imaging::PixelGrid::tiling(l, n_pixels).map_err(to_py_err)?;
        let images: Vec<_> = images.into_iter().map(imaging::AbsorptionImage::new).collect();
        Ok(imaging::mle_estimate(&images, &state.inner, l, &grid, &c_grid).map_err(to_py_err)?.c_hat)
    }

    #[pyfunction]
    fn multiplicity(counts: Vec<u32>) -> u128 {
        imaging::multiplicity(&imaging::AbsorptionImage::new(counts))
    }
}
