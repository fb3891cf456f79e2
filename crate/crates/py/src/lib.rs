//! Python bindings: series, elastic distances, kernels, Gram spectra and classifiers.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twk::classify::{error_rate, knn1_predict, svm_train_with, SvmKernel};
use twk::datasets::{parse_ucr, synth_train_test, Split};
use twk::gram::{build_gram, definiteness_report, eigen_symmetric, GramMatrix, DEFAULT_TAU};
use twk::{
    Boundary, CostParams, DistanceKind, Error, KernelFamily, KernelId, KernelParams,
    LabeledDataset, Norm, SvmModel, TimeSeries,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// A time-stamped series of samples. Timestamps default to 1..N.
#[pyclass(name = "TimeSeries", module = "twk_py", frozen)]
struct PyTimeSeries {
    inner: TimeSeries,
}

#[pymethods]
impl PyTimeSeries {
    #[new]
    #[pyo3(signature = (values, times=None))]
    fn new(values: &Bound<'_, PyAny>, times: Option<Vec<f64>>) -> PyResult<Self> {
        let samples: Vec<Vec<f64>> = match values.extract::<Vec<f64>>() {
            Ok(v) => v.into_iter().map(|x| vec![x]).collect(),
            Err(_) => values.extract::<Vec<Vec<f64>>>()?,
        };
        let times = times.unwrap_or_else(|| (1..=samples.len()).map(|t| t as f64).collect());
        let dim = samples.first().map_or(1, Vec::len);
        let inner = if samples.is_empty() {
            TimeSeries::empty(dim)
        } else {
            TimeSeries::new(samples, times).map_err(to_py)?
        };
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| self.inner.value(i).to_vec())
            .collect()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "TimeSeries(len={}, dim={})",
            self.inner.len(),
            self.inner.dim()
        )
    }
}

/// A distance or kernel together with its parameters.
#[pyclass(name = "Measure", module = "twk_py", frozen)]
struct PyMeasure {
    inner: twk::Measure,
}

#[allow(clippy::too_many_arguments)]
fn cost_params(
    norm: u32,
    nu: f64,
    lambda_: f64,
    g: Option<Vec<f64>>,
    corridor: Option<usize>,
    free_boundary: bool,
) -> PyResult<CostParams> {
    let p = CostParams {
        norm: Norm::from_order(norm).map_err(to_py)?,
        g: g.unwrap_or_default(),
        lambda: lambda_,
        nu,
        corridor,
        boundary: if free_boundary {
            Boundary::Free
        } else {
            Boundary::Anchored
        },
    };
    p.validate().map_err(to_py)?;
    Ok(p)
}

#[pymethods]
impl PyMeasure {
    /// Elastic distance: lev, dtw, erp, twed, ed, twip1, twip2.
    #[staticmethod]
    #[pyo3(signature = (name, *, nu=1.0, lambda_=0.0, g=None, norm=1, corridor=None, free_boundary=false))]
    fn distance(
        name: &str,
        nu: f64,
        lambda_: f64,
        g: Option<Vec<f64>>,
        norm: u32,
        corridor: Option<usize>,
        free_boundary: bool,
    ) -> PyResult<Self> {
        let kind = DistanceKind::parse(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown distance {name:?}")))?;
        let p = cost_params(norm, nu, lambda_, g, corridor, free_boundary)?;
        Ok(Self {
            inner: twk::Measure::distance(kind, p),
        })
    }

    /// Kernel: stwk_lev, stwk_dtw, stwk_erp, stwk_twed, twip1, twip2, euclid_dot.
    #[staticmethod]
    #[pyo3(signature = (name, *, nu_prime=1.0, nu=1.0, lambda_=0.0, g=None, norm=1, corridor=None, free_boundary=false))]
    #[allow(clippy::too_many_arguments)]
    fn kernel(
        name: &str,
        nu_prime: f64,
        nu: f64,
        lambda_: f64,
        g: Option<Vec<f64>>,
        norm: u32,
        corridor: Option<usize>,
        free_boundary: bool,
    ) -> PyResult<Self> {
        let family = KernelFamily::parse(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown kernel {name:?}")))?;
        let base = cost_params(norm, nu, lambda_, g, corridor, free_boundary)?;
        let params = KernelParams {
            nu_prime,
            nu,
            xi: None,
            base,
        };
        Ok(Self {
            inner: twk::Measure::kernel(KernelId::new(family, params)),
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn is_kernel(&self) -> bool {
        self.inner.is_kernel()
    }

    /// Parameters as a JSON string.
    fn params_json(&self) -> String {
        self.inner.params_json().to_string()
    }

    /// Distance value, or kernel value for kernels.
    fn value(&self, a: &PyTimeSeries, b: &PyTimeSeries) -> PyResult<f64> {
        self.inner.value(&a.inner, &b.inner).map_err(to_py)
    }

    /// Distance value, or the induced distance for kernels.
    fn dissimilarity(&self, a: &PyTimeSeries, b: &PyTimeSeries) -> PyResult<f64> {
        self.inner.dissimilarity(&a.inner, &b.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Measure({}, {})",
            self.inner.name(),
            self.inner.params_json()
        )
    }
}

/// Labelled series with class names.
#[pyclass(name = "Dataset", module = "twk_py", frozen)]
struct PyDataset {
    inner: LabeledDataset,
}

#[pymethods]
impl PyDataset {
    /// Reads a UCR-format file (label first, then values; whitespace or commas).
    #[staticmethod]
    fn from_ucr(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: parse_ucr(&path, Split::Train).map_err(to_py)?,
        })
    }

    /// Warped-sinusoid train/test pair.
    #[staticmethod]
    #[pyo3(signature = (classes=3, train_per_class=20, test_per_class=50, length=40, noise=0.1, seed=1))]
    fn synthetic(
        classes: usize,
        train_per_class: usize,
        test_per_class: usize,
        length: usize,
        noise: f64,
        seed: u64,
    ) -> PyResult<(Self, Self)> {
        let (tr, te) = synth_train_test(
            classes,
            train_per_class,
            test_per_class,
            length,
            noise,
            seed,
        )
        .map_err(to_py)?;
        Ok((Self { inner: tr }, Self { inner: te }))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels.clone()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.clone()
    }

    fn series(&self, i: usize) -> PyResult<PyTimeSeries> {
        self.inner
            .items
            .get(i)
            .map(|s| PyTimeSeries { inner: s.clone() })
            .ok_or_else(|| PyValueError::new_err(format!("index {i} out of range")))
    }
}

/// A one-vs-one SVM over an RBF of a measure's dissimilarity.
#[pyclass(name = "SvmModel", module = "twk_py", frozen)]
struct PySvmModel {
    model: SvmModel,
    train: LabeledDataset,
}

#[pymethods]
impl PySvmModel {
    /// `direct=True` uses the (normalised) kernel itself and ignores `sigma2`.
    #[new]
    #[pyo3(signature = (train, measure, c, sigma2=1.0, direct=false))]
    fn new(
        train: &PyDataset,
        measure: &PyMeasure,
        c: f64,
        sigma2: f64,
        direct: bool,
    ) -> PyResult<Self> {
        let mode = if direct {
            SvmKernel::Direct
        } else {
            SvmKernel::Rbf
        };
        let model = svm_train_with(&train.inner, &measure.inner, mode, c, sigma2).map_err(to_py)?;
        Ok(Self {
            model,
            train: train.inner.clone(),
        })
    }

    #[getter]
    fn converged(&self) -> bool {
        self.model.all_converged()
    }

    fn predict(&self, test: &PyDataset) -> PyResult<Vec<usize>> {
        self.model
            .predict(&self.train, &test.inner.items)
            .map_err(to_py)
    }

    fn error_rate(&self, test: &PyDataset) -> PyResult<f64> {
        Ok(error_rate(&self.predict(test)?, &test.inner.labels))
    }

    fn to_json(&self) -> PyResult<String> {
        self.model.to_json().map_err(to_py)
    }
}

/// 1-NN test error rate of `measure` on `test` with `train` as reference set.
#[pyfunction]
fn knn_error(train: &PyDataset, test: &PyDataset, measure: &PyMeasure) -> PyResult<f64> {
    let pred = knn1_predict(&train.inner, &test.inner.items, &measure.inner).map_err(to_py)?;
    Ok(error_rate(&pred, &test.inner.labels))
}

/// Pairwise matrix of `measure.value` over `items`.
#[pyfunction]
fn gram(items: Vec<PyRef<'_, PyTimeSeries>>, measure: &PyMeasure) -> PyResult<Vec<Vec<f64>>> {
    let items: Vec<TimeSeries> = items.iter().map(|s| s.inner.clone()).collect();
    Ok(build_gram(&items, &measure.inner).map_err(to_py)?.rows())
}

/// Eigenvalues (descending) and column eigenvectors of a symmetric matrix.
#[pyfunction]
fn eigh(matrix: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    let flat: Vec<f64> = matrix.into_iter().flatten().collect();
    if flat.len() != n * n {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let e = eigen_symmetric(&flat, n).map_err(to_py)?;
    let vectors = (0..n)
        .map(|r| e.vectors[r * n..(r + 1) * n].to_vec())
        .collect();
    Ok((e.values, vectors))
}

/// Spectrum summary: eigenvalues, pev_count, delta_p, verdict, threshold.
#[pyfunction]
#[pyo3(signature = (matrix, tau=DEFAULT_TAU))]
fn definiteness<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<f64>>,
    tau: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = GramMatrix::from_rows(matrix).map_err(to_py)?;
    let r = definiteness_report(&g, tau).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues.clone())?;
    d.set_item("pev_count", r.pev_count)?;
    d.set_item("delta_p", r.delta_p)?;
    d.set_item("verdict", r.verdict.label())?;
    d.set_item("threshold", r.threshold)?;
    Ok(d)
}

/// Levenshtein distance between two strings.
#[pyfunction]
fn levenshtein(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    twk::levenshtein(&a, &b)
}

#[pymodule]
fn twk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PySvmModel>()?;
    m.add_function(wrap_pyfunction!(knn_error, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(definiteness, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    Ok(())
}
