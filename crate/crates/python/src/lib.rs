//! Python bindings for the drsim toolkit.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use drsim::analysis;
use drsim::anfis::{AnfisNetwork, MfFamily};
use drsim::harness::{self, ScenarioConfig};
use drsim::kinematics::{self, DrModel, ExtrapolationOrder, Vec3};
use drsim::netsim::{self, MetricsReport};
use drsim::reckoning::EntityStatePdu;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn v3(v: Vec3) -> (f64, f64, f64) {
    (v.x, v.y, v.z)
}

fn order(o: u8) -> PyResult<ExtrapolationOrder> {
    ExtrapolationOrder::from_index(o).ok_or_else(|| err(format!("order must be 0, 1 or 2, got {o}")))
}

/// Entity state at one instant.
#[pyclass(name = "KinematicState", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyState(kinematics::KinematicState);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (position, velocity=(0.0, 0.0, 0.0), acceleration=(0.0, 0.0, 0.0), orientation=0.0, timestamp=0.0))]
    fn new(
        position: (f64, f64, f64),
        velocity: (f64, f64, f64),
        acceleration: (f64, f64, f64),
        orientation: f64,
        timestamp: f64,
    ) -> Self {
        let v = |(x, y, z)| Vec3::new(x, y, z);
        PyState(kinematics::KinematicState::new(v(position), v(velocity), v(acceleration), orientation, timestamp))
    }

    #[getter]
    fn position(&self) -> (f64, f64, f64) {
        v3(self.0.position)
    }

    #[getter]
    fn velocity(&self) -> (f64, f64, f64) {
        v3(self.0.velocity)
    }

    #[getter]
    fn acceleration(&self) -> (f64, f64, f64) {
        v3(self.0.acceleration)
    }

    #[getter]
    fn orientation(&self) -> f64 {
        self.0.orientation
    }

    #[getter]
    fn timestamp(&self) -> f64 {
        self.0.timestamp
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Analytic ground-truth motion.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory(kinematics::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[staticmethod]
    fn circular(radius: f64, angular_rate: f64, duration: f64) -> PyResult<Self> {
        kinematics::Trajectory::circular(radius, angular_rate, duration).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (amplitude, angular_rate, duration, drift_velocity=1.0))]
    fn sinusoidal(amplitude: f64, angular_rate: f64, duration: f64, drift_velocity: f64) -> PyResult<Self> {
        kinematics::Trajectory::sinusoidal(amplitude, angular_rate, drift_velocity, duration).map(Self).map_err(err)
    }

    #[staticmethod]
    fn linear(velocity: (f64, f64, f64), duration: f64) -> PyResult<Self> {
        let (x, y, z) = velocity;
        kinematics::Trajectory::linear(Vec3::new(x, y, z), duration).map(Self).map_err(err)
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.0.duration()
    }

    fn state(&self, t: f64) -> PyResult<PyState> {
        self.0.sample_state(t).map(PyState).map_err(err)
    }
}

/// Extrapolated position of `state` at time `t`.
#[pyfunction]
#[pyo3(signature = (state, t, order=2, literal=false))]
fn extrapolate(state: &PyState, t: f64, order: u8, literal: bool) -> PyResult<(f64, f64, f64)> {
    let o = self::order(order)?;
    let model = if literal { DrModel::literal(o) } else { DrModel::new(o) };
    model.extrapolate(&state.0, t).map(v3).map_err(err)
}

/// Encode an entity-state packet.
#[pyfunction]
fn encode_pdu<'py>(py: Python<'py>, entity_id: u32, sequence: u32, state: &PyState) -> Bound<'py, PyBytes> {
    let pdu = EntityStatePdu {
        entity_id,
        sequence,
        send_time: state.0.timestamp,
        state: state.0,
    };
    PyBytes::new(py, &pdu.encode())
}

/// Decode an entity-state packet into `(entity_id, sequence, state)`.
#[pyfunction]
fn decode_pdu(data: &[u8]) -> PyResult<(u32, u32, PyState)> {
    let p = EntityStatePdu::decode(data).map_err(err)?;
    Ok((p.entity_id, p.sequence, PyState(p.state)))
}

/// Worst-case receiver error for the given threshold, deviations and delay.
#[pyfunction]
fn emax_bound(th_pos: f64, v_dev_max: f64, a_dev_max: f64, dt_max: f64) -> PyResult<f64> {
    analysis::emax_bound(th_pos, v_dev_max, a_dev_max, dt_max).map(|b| b.e_max).map_err(err)
}

/// Sugeno neuro-fuzzy threshold network.
#[pyclass(name = "AnfisNetwork")]
struct PyAnfis(AnfisNetwork);

#[pymethods]
impl PyAnfis {
    #[staticmethod]
    #[pyo3(signature = (universes, family="gbell"))]
    fn default(universes: [(f64, f64); 3], family: &str) -> PyResult<Self> {
        let fam = match family {
            "gbell" => MfFamily::GBell,
            "sigmoid" => MfFamily::Sigmoid,
            other => return Err(err(format!("unknown family `{other}`"))),
        };
        AnfisNetwork::with_default_rules(universes, fam).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        AnfisNetwork::load(path).map(Self).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(path).map_err(err)
    }

    fn output(&self, a1: f64, a2: f64, a3: f64) -> PyResult<f64> {
        self.0.output(a1, a2, a3).map_err(err)
    }

    #[getter]
    fn rule_count(&self) -> usize {
        self.0.rules.len()
    }
}

/// Result of one scenario run.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    report: MetricsReport,
    violations: Vec<String>,
}

#[pymethods]
impl PyReport {
    fn summary(&self) -> HashMap<&'static str, f64> {
        self.report.summary().into_iter().collect()
    }

    /// Columns `t`, `e_s`, `e_r`, `th`.
    fn series(&self) -> HashMap<&'static str, Vec<f64>> {
        let s = &self.report.series;
        HashMap::from([
            ("t", s.iter().map(|x| x.t).collect()),
            ("e_s", s.iter().map(|x| x.e_s).collect()),
            ("e_r", s.iter().map(|x| x.e_r).collect()),
            ("th", s.iter().map(|x| x.th).collect()),
        ])
    }

    #[getter]
    fn qos_violations(&self) -> Vec<String> {
        self.violations.clone()
    }

    fn csv(&self) -> String {
        harness::report_csv(&self.report)
    }
}

/// Parsed scenario configuration.
#[pyclass(name = "Scenario")]
struct PyScenario {
    config: ScenarioConfig,
    base_dir: PathBuf,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    #[pyo3(signature = (text, base_dir=None))]
    fn parse(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let config = harness::parse_scenario(text).map_err(err)?;
        Ok(Self {
            config,
            base_dir: base_dir.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let config = ScenarioConfig::load(&path).map_err(err)?;
        let base_dir = path.parent().map(PathBuf::from).unwrap_or_default();
        Ok(Self { config, base_dir })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.config.run.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.config.run.seed = seed;
    }

    fn emit(&self) -> String {
        self.config.emit()
    }

    fn run(&self, py: Python<'_>) -> PyResult<PyReport> {
        let sc = self.config.to_scenario(&self.base_dir).map_err(err)?;
        let report = py.detach(|| netsim::run_scenario(&sc)).map_err(err)?;
        let violations = netsim::qos_check(&sc.qos, &report).iter().map(|v| v.to_string()).collect();
        Ok(PyReport { report, violations })
    }
}

#[pymodule]
fn drsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PDU_SIZE", drsim::reckoning::PDU_SIZE)?;
    m.add_class::<PyState>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyAnfis>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(encode_pdu, m)?)?;
    m.add_function(wrap_pyfunction!(decode_pdu, m)?)?;
    m.add_function(wrap_pyfunction!(emax_bound, m)?)?;
    Ok(())
}
