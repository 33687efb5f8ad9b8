//! Python bindings: datasets, the linear and neural models, comparison
//! statistics and cycle-life estimation.

use leocell_core as core;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: core::Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn target(name: &str) -> PyResult<core::Target> {
    name.parse().map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, json: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

/// A validated set of cycling records.
#[pyclass(name = "Dataset", module = "leocell", frozen)]
struct PyDataset(core::CyclingDataset);

#[pymethods]
impl PyDataset {
    /// Synthetic data from the default degradation model on the reference grid.
    #[staticmethod]
    #[pyo3(signature = (noise_rc=0.0, noise_eodv=0.0, seed=0, settings=None, cycle_end=None, cycle_step=None))]
    fn simulate(
        noise_rc: f64,
        noise_eodv: f64,
        seed: u64,
        settings: Option<Vec<(f64, f64)>>,
        cycle_end: Option<u32>,
        cycle_step: Option<u32>,
    ) -> PyResult<Self> {
        let mut plan = core::SimulationPlan {
            noise_sd_rc: noise_rc,
            noise_sd_eodv: noise_eodv,
            seed,
            ..Default::default()
        };
        if let Some(s) = settings {
            plan.settings = s;
        }
        if let Some(v) = cycle_end {
            plan.cycle_end = v;
        }
        if let Some(v) = cycle_step {
            plan.cycle_step = v;
        }
        plan.generate(&core::DegradationModelParams::default())
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        core::CyclingDataset::read_csv(path).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        core::CyclingDataset::from_csv_reader(text.as_bytes(), "<string>".into())
            .map(Self)
            .map_err(err)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.0.write_csv(path).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv_string()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// `(temperature_c, dod_pct, cycle, rc_pct, eodv_v)` tuples.
    fn records(&self) -> Vec<(f64, f64, u32, Option<f64>, Option<f64>)> {
        self.0
            .records()
            .iter()
            .map(|r| (r.temperature_c, r.dod_pct, r.cycle, r.rc_pct, r.eodv_v))
            .collect()
    }

    fn target_values(&self, target_name: &str) -> PyResult<Vec<f64>> {
        self.0.target_values(target(target_name)?).map_err(err)
    }

    /// `(even, odd)` halves by cycle rank within each setting.
    fn split_even_odd(&self) -> (Self, Self) {
        let (e, o) = self.0.split_even_odd();
        (Self(e), Self(o))
    }
}

/// Least-squares linear model of RC or EODV.
#[pyclass(name = "LinearModel", module = "leocell", frozen)]
struct PyLinearModel(core::LinearModel);

#[pymethods]
impl PyLinearModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        match core::AnyModel::load(path).map_err(err)? {
            core::AnyModel::Linear(m) => Ok(Self(m)),
            core::AnyModel::Mlp(_) => Err(PyValueError::new_err(format!("{path} holds an MLP model"))),
        }
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.0.to_kv_string())
            .map_err(|e| PyValueError::new_err(format!("cannot write {path}: {e}")))
    }

    /// `(intercept, temperature, dod, cycle)`, signed.
    fn coefficients(&self) -> (f64, f64, f64, f64) {
        let [a, b, c, d] = self.0.coefficients();
        (a, b, c, d)
    }

    #[getter]
    fn target(&self) -> String {
        self.0.target.to_string()
    }

    fn predict(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> f64 {
        self.0.predict(temperature_c, dod_pct, cycle)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyfunction]
fn fit_ols(dataset: &PyDataset, target_name: &str) -> PyResult<PyLinearModel> {
    core::regress::fit_ols(&dataset.0, target(target_name)?)
        .map(PyLinearModel)
        .map_err(err)
}

/// Sigmoid feedforward network trained by online backpropagation.
#[pyclass(name = "MlpModel", module = "leocell")]
struct PyMlpModel(core::MlpModel);

#[pymethods]
impl PyMlpModel {
    /// Seeded initial weights; scaling ranges are taken from `dataset`.
    #[new]
    #[pyo3(signature = (dataset, target_name, hidden=vec![9, 9], seed=0))]
    fn new(dataset: &PyDataset, target_name: &str, hidden: Vec<usize>, seed: u64) -> PyResult<Self> {
        let t = target(target_name)?;
        let topology = core::NetworkTopology::with_hidden(&hidden).map_err(err)?;
        let norm = core::NormalizationSpec::fit(
            &dataset.0,
            t,
            core::dataset::DEFAULT_OUTPUT_LOW,
            core::dataset::DEFAULT_OUTPUT_HIGH,
        )
        .map_err(err)?;
        core::MlpModel::init(topology, seed, norm, t)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        core::MlpModel::load(path).map(Self).map_err(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(err)
    }

    /// Trains in place and returns the training report as a dict.
    #[pyo3(signature = (dataset, error_target=0.7, learning_rate=0.4, momentum=0.0, max_epochs=200_000, eval_every=100, shuffle=false, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn train<'py>(
        &mut self,
        py: Python<'py>,
        dataset: &PyDataset,
        error_target: f64,
        learning_rate: f64,
        momentum: f64,
        max_epochs: u64,
        eval_every: u64,
        shuffle: bool,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let config = core::TrainingConfig {
            learning_rate,
            momentum,
            error_target_pct: error_target,
            max_epochs,
            seed,
            shuffle_each_epoch: shuffle,
            eval_every,
        };
        let model = &self.0;
        let data = &dataset.0;
        let (trained, report) = py.detach(|| model.train(data, &config)).map_err(err)?;
        self.0 = trained;
        let json = serde_json::to_string(&report).expect("report serializes");
        json_to_py(py, &json)
    }

    fn predict(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> f64 {
        self.0.predict(temperature_c, dod_pct, cycle)
    }

    /// Training-style MAPE (percent) over `dataset`.
    fn mape(&self, dataset: &PyDataset) -> PyResult<f64> {
        self.0.mape(&dataset.0).map_err(err)
    }

    /// Worst relative gap between backprop and central differences on one record.
    #[pyo3(signature = (dataset, index, epsilon=1e-5))]
    fn gradient_check(&self, dataset: &PyDataset, index: usize, epsilon: f64) -> PyResult<f64> {
        let record = dataset
            .0
            .records()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("no record {index}")))?;
        self.0.gradient_check(record, epsilon).map_err(err)
    }

    fn parameters(&self) -> Vec<f64> {
        self.0.parameters()
    }

    #[getter]
    fn parameter_count(&self) -> usize {
        self.0.parameter_count()
    }

    #[getter]
    fn epochs_trained(&self) -> u64 {
        self.0.epochs_trained
    }

    #[getter]
    fn target(&self) -> String {
        self.0.target.to_string()
    }
}

/// AAPE, Pearson r, CV and Bland-Altman statistics as a dict.
#[pyfunction]
#[pyo3(signature = (observed, predicted, ba_mode="absolute"))]
fn comparison_report<'py>(
    py: Python<'py>,
    observed: Vec<f64>,
    predicted: Vec<f64>,
    ba_mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: core::BlandAltmanMode = ba_mode.parse().map_err(err)?;
    let series = core::PairedSeries::from_slices(&observed, &predicted).map_err(err)?;
    json_to_py(py, &series.comparison_report(mode).to_json())
}

/// First failing cycle under the default degradation model.
#[pyfunction]
#[pyo3(signature = (temperature_c, dod_pct, rc_floor=40.0, eodv_floor=2.5, horizon=1_000_000))]
fn cycle_life<'py>(
    py: Python<'py>,
    temperature_c: f64,
    dod_pct: f64,
    rc_floor: f64,
    eodv_floor: f64,
    horizon: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let life = core::DegradationModelParams::default()
        .cycle_life(temperature_c, dod_pct, rc_floor, eodv_floor, horizon);
    let out = PyDict::new(py);
    match life {
        core::CycleLife::Fails { cycle, criterion } => {
            out.set_item("cycle", cycle)?;
            let name = serde_json::to_value(criterion).expect("criterion serializes");
            out.set_item("criterion", name.as_str())?;
        }
        core::CycleLife::NoFailure { horizon } => {
            out.set_item("cycle", py.None())?;
            out.set_item("horizon", horizon)?;
        }
    }
    Ok(out)
}

#[pymodule]
#[pyo3(name = "leocell")]
fn leocell_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyLinearModel>()?;
    m.add_class::<PyMlpModel>()?;
    m.add_function(wrap_pyfunction!(fit_ols, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_report, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_life, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
