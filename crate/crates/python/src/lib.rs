//! Python bindings for the `randes` model-selection library.
//!
//! Matrices cross the boundary as lists of rows and vectors as lists of
//! floats. Model indices are 0-based on the Python side.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use randes::baselines::{adaptive_lasso_cv, lasso_cv, LassoConfig};
use randes::experiments::{power_and_fdr, run_experiment, ExperimentConfig};
use randes::stochastic::{sample_dataset, CovarianceKind};

fn err(e: randes::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Support set of a linear model, as sorted 0-based column indices.
#[pyclass(name = "Model", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyModel(randes::Model);

#[pymethods]
impl PyModel {
    #[new]
    fn new(indices: Vec<usize>, p: usize) -> PyResult<Self> {
        let mut idx = indices;
        idx.sort_unstable();
        randes::Model::new(idx, p).map(Self).map_err(err)
    }

    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.0.indices().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.0.indices())
    }
}

/// Data-generating distribution: `Y = <θ, X> + ε`, `X ~ N(0, Σ)`, `ε ~ N(0, σ²)`.
#[pyclass(name = "GroundTruth", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroundTruth(randes::GroundTruth);

#[pymethods]
impl PyGroundTruth {
    /// `sigma` defaults to the identity.
    #[new]
    #[pyo3(signature = (theta, sigma = None, noise_var = 1.0))]
    fn new(theta: Vec<f64>, sigma: Option<Vec<Vec<f64>>>, noise_var: f64) -> PyResult<Self> {
        let p = theta.len();
        let sigma = match sigma {
            Some(rows) => matrix(&rows)?,
            None => DMatrix::identity(p, p),
        };
        randes::GroundTruth::new(DVector::from_vec(theta), sigma, noise_var)
            .map(Self)
            .map_err(err)
    }

    /// Circulant covariance `exp(-omega |i-j|_p)`.
    #[staticmethod]
    #[pyo3(signature = (theta, omega, noise_var = 1.0))]
    fn exp_circulant(theta: Vec<f64>, omega: f64, noise_var: f64) -> PyResult<Self> {
        let sigma = CovarianceKind::ExpCirculant { p: theta.len(), omega }.build().map_err(err)?;
        randes::GroundTruth::new(DVector::from_vec(theta), sigma, noise_var)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.0.theta().iter().copied().collect()
    }

    #[getter]
    fn sigma(&self) -> Vec<Vec<f64>> {
        rows_of(self.0.sigma())
    }

    #[getter]
    fn noise_var(&self) -> f64 {
        self.0.noise_var()
    }

    /// Exact risk `E l(θ̂_m, θ)` of the least-squares estimator on `model`.
    fn closed_form_risk(&self, model: &PyModel, n: usize) -> PyResult<f64> {
        randes::closed_form_risk(&self.0, &model.0, n).map_err(err)
    }

    /// `θ_m`, the population projection of `θ` onto `model`.
    fn project(&self, model: &PyModel) -> PyResult<Vec<f64>> {
        randes::project_theta(&self.0, &model.0)
            .map(|v| v.iter().copied().collect())
            .map_err(err)
    }

    /// Population loss `l(a, b) = (a − b)ᵀ Σ (a − b)`.
    fn loss(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
        randes::population_loss(&self.0, &DVector::from_vec(a), &DVector::from_vec(b)).map_err(err)
    }

    /// Draws replication `rep` of an `n`-sample from the stream of `seed`.
    #[pyo3(signature = (n, seed, rep = 0))]
    fn sample(&self, n: usize, seed: u64, rep: u64) -> PyResult<PyDataSet> {
        sample_dataset(&self.0, n, &randes::SeedSpec::new(seed), rep)
            .map(PyDataSet)
            .map_err(err)
    }
}

/// Design matrix and response.
#[pyclass(name = "DataSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataSet(randes::DataSet);

#[pymethods]
impl PyDataSet {
    #[new]
    fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Self> {
        randes::DataSet::new(matrix(&x)?, DVector::from_vec(y)).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        rows_of(self.0.x())
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().iter().copied().collect()
    }

    /// Least-squares fit on `model`: `(coefficients, empirical loss)`.
    fn fit(&self, model: &PyModel) -> PyResult<(Vec<f64>, f64)> {
        let f = randes::fit_least_squares(&self.0, &model.0).map_err(err)?;
        Ok((f.coefficients.iter().copied().collect(), f.empirical_loss))
    }
}

/// Collection of candidate models.
#[pyclass(name = "ModelCollection", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelCollection(randes::ModelCollection);

#[pymethods]
impl PyModelCollection {
    /// Nested models `{0}, {0,1}, …` up to `max_dim`, plus the empty model.
    #[staticmethod]
    fn ordered(p: usize, max_dim: usize) -> PyResult<Self> {
        randes::ModelCollection::ordered(p, max_dim).map(Self).map_err(err)
    }

    /// Every subset of size at most `max_dim`.
    #[staticmethod]
    fn complete(p: usize, max_dim: usize) -> PyResult<Self> {
        randes::ModelCollection::complete(p, max_dim).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (p, models, priors = None))]
    fn explicit(p: usize, models: Vec<PyModel>, priors: Option<Vec<f64>>) -> PyResult<Self> {
        let models = models.into_iter().map(|m| m.0).collect();
        randes::ModelCollection::explicit(p, models, priors).map(Self).map_err(err)
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    #[getter]
    fn max_dim(&self) -> usize {
        self.0.max_dim()
    }

    fn count_at(&self, d: usize) -> u128 {
        self.0.count_at(d)
    }

    fn __len__(&self) -> PyResult<usize> {
        usize::try_from(self.0.len()).map_err(|_| PyValueError::new_err("collection too large"))
    }

    fn models(&self) -> Vec<PyModel> {
        self.0.enumerate().map(PyModel).collect()
    }
}

/// Penalty value of `model` within `collection` for a sample of size `n`.
#[pyfunction]
#[pyo3(signature = (collection, model, n, penalty = "complete", k = 2.0))]
fn penalty_value(collection: &PyModelCollection, model: &PyModel, n: usize, penalty: &str, k: f64) -> PyResult<f64> {
    let spec = randes::PenaltySpec::from_name(penalty, k).map_err(err)?;
    spec.value(&collection.0, &model.0, n).map_err(err)
}

/// Minimises `‖Y − Π_m Y‖²_n (1 + pen(m))` over the collection.
///
/// Returns a dict with `model`, `estimate`, `criterion` and, if `audit`, the
/// list of `(model, criterion)` pairs in enumeration order.
#[pyfunction]
#[pyo3(signature = (data, collection, penalty = "complete", k = 2.0, audit = false))]
fn select<'py>(
    py: Python<'py>,
    data: &PyDataSet,
    collection: &PyModelCollection,
    penalty: &str,
    k: f64,
    audit: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = randes::PenaltySpec::from_name(penalty, k).map_err(err)?;
    let r = randes::select_many(&data.0, &collection.0, &[spec], audit)
        .map_err(err)?
        .remove(0);
    let out = PyDict::new(py);
    out.set_item("model", PyModel(r.chosen))?;
    out.set_item("estimate", r.estimate.iter().copied().collect::<Vec<f64>>())?;
    out.set_item("criterion", r.criterion)?;
    if audit {
        let rows: Vec<(PyModel, f64)> = r.criterion_values.into_iter().map(|(m, c)| (PyModel(m), c)).collect();
        out.set_item("audit", rows)?;
    }
    Ok(out)
}

/// Lasso with `λ` chosen by leave-one-out CV: `(estimate, lambda)`.
#[pyfunction]
fn lasso(data: &PyDataSet) -> PyResult<(Vec<f64>, f64)> {
    let fit = lasso_cv(&data.0, &LassoConfig::default()).map_err(err)?;
    Ok((fit.estimate.iter().copied().collect(), fit.lambda))
}

/// Adaptive Lasso with `(λ, γ)` chosen by leave-one-out CV: `(estimate, lambda, gamma)`.
#[pyfunction]
fn adaptive_lasso(data: &PyDataSet) -> PyResult<(Vec<f64>, f64, f64)> {
    let fit = adaptive_lasso_cv(&data.0, &LassoConfig::default(), None).map_err(err)?;
    Ok((fit.estimate.iter().copied().collect(), fit.lambda, fit.gamma))
}

/// Per-replication `(power, fdr)` of an estimate against the true coefficients.
#[pyfunction]
fn power_fdr(theta_true: Vec<f64>, theta_hat: Vec<f64>) -> PyResult<(f64, f64)> {
    power_and_fdr(&DVector::from_vec(theta_true), &DVector::from_vec(theta_hat)).map_err(err)
}

/// Runs one of the two built-in simulation designs and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (experiment, n, replications, seed))]
fn simulate<'py>(
    py: Python<'py>,
    experiment: u8,
    n: usize,
    replications: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::preset(experiment, n, replications, randes::SeedSpec::new(seed)).map_err(err)?;
    let report = py.detach(|| run_experiment(&cfg)).map_err(err)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pymodule]
fn randes_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PyDataSet>()?;
    m.add_class::<PyModelCollection>()?;
    m.add_function(wrap_pyfunction!(penalty_value, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(lasso, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_lasso, m)?)?;
    m.add_function(wrap_pyfunction!(power_fdr, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("GENERATOR", randes::stochastic::GENERATOR_VERSION)?;
    Ok(())
}
