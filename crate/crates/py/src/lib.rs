use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qroute::decoders::{logical_error_rate, BpOsdDecoder, DecoderConfig, OsdConfig, ShotSource};
use qroute::dem::{compile_dem, sample_dem, DetectorErrorModel};
use qroute::distance::{estimate_circuit_distance, DistanceConfig};
use qroute::experiment::CodeSpec;
use qroute::gf2::{BitMatrix, BitVector};
use qroute::noise::NoiseModel;
use qroute::sampler::sample_frames;
use qroute::schedules::ScheduleKind;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &BitMatrix) -> Vec<Vec<bool>> {
    (0..m.rows()).map(|r| m.row(r).to_bools()).collect()
}

fn decoder_config(osd_order: Option<usize>) -> DecoderConfig {
    match osd_order {
        Some(order) => DecoderConfig { osd: OsdConfig::osd_cs(order), ..Default::default() },
        None => DecoderConfig::default(),
    }
}

/// A CSS code: surface, bivariate bicycle or toric.
#[pyclass(name = "Code", frozen)]
struct PyCode {
    inner: qroute::codes::CssCode,
}

#[pymethods]
impl PyCode {
    /// `spec` is `surface:5`, `bb72`, `bb:6,6,3,-1,-1,3` or `toric:3,3`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let spec: CodeSpec = spec.parse().map_err(err)?;
        Ok(PyCode { inner: spec.build().map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    fn hx(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.hx)
    }

    fn hz(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.hz)
    }

    fn logical_z(&self) -> Vec<Vec<bool>> {
        rows(&self.inner.logical_z)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Code({}, n={}, k={})", self.inner.name(), self.inner.n, self.inner.k)
    }
}

#[pyclass(name = "Circuit", frozen)]
struct PyCircuit {
    inner: qroute::Circuit,
}

#[pymethods]
impl PyCircuit {
    /// Memory-experiment circuit; `noise` is `si1000:0.001`, `uniform:0.002` or `none`.
    #[staticmethod]
    #[pyo3(signature = (code, scheme, rounds, noise = "none", flag_detectors = false))]
    fn generate(code: &str, scheme: &str, rounds: usize, noise: &str, flag_detectors: bool) -> PyResult<Self> {
        let code: CodeSpec = code.parse().map_err(err)?;
        let kind = ScheduleKind::parse(scheme).ok_or_else(|| err(format!("unknown scheme {scheme:?}")))?;
        let noise = NoiseModel::parse_option(noise).map_err(err)?;
        let sched = code.schedule(kind).map_err(err)?;
        Ok(PyCircuit { inner: sched.generate(rounds, noise.as_ref(), flag_detectors).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyCircuit { inner: qroute::Circuit::from_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.qubit_count()
    }

    #[getter]
    fn num_detectors(&self) -> usize {
        self.inner.num_detectors()
    }

    #[getter]
    fn num_observables(&self) -> usize {
        self.inner.num_observables()
    }

    fn cnot_layer_count(&self) -> usize {
        self.inner.cnot_layer_count()
    }

    fn detector_error_model(&self) -> PyResult<PyDem> {
        Ok(PyDem { inner: compile_dem(&self.inner).map_err(err)? })
    }

    /// Returns `(detectors, observables)` as per-shot boolean lists.
    fn sample(&self, py: Python<'_>, shots: usize, seed: u64) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
        let batch = py.detach(|| sample_frames(&self.inner, shots, seed));
        (rows(&batch.detectors), rows(&batch.observables))
    }
}

#[pyclass(name = "DetectorErrorModel", frozen)]
struct PyDem {
    inner: DetectorErrorModel,
}

#[pymethods]
impl PyDem {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyDem { inner: DetectorErrorModel::from_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn num_detectors(&self) -> usize {
        self.inner.detector_count
    }

    #[getter]
    fn num_observables(&self) -> usize {
        self.inner.observable_count
    }

    fn __len__(&self) -> usize {
        self.inner.mechanisms.len()
    }

    fn sample(&self, py: Python<'_>, shots: usize, seed: u64) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
        let batch = py.detach(|| sample_dem(&self.inner, shots, seed));
        (rows(&batch.detectors), rows(&batch.observables))
    }

    /// Upper bound on the circuit distance with its witness mechanisms.
    #[pyo3(signature = (samples = 1000, seed = 0))]
    fn estimate_distance<'py>(&self, py: Python<'py>, samples: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let cfg = DistanceConfig { samples, ..Default::default() };
        let est = py.detach(|| estimate_circuit_distance(&self.inner, &cfg, seed)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("upper_bound", est.upper_bound)?;
        d.set_item("witness", est.witness)?;
        d.set_item("samples", est.samples_used)?;
        Ok(d)
    }
}

/// BP-OSD decoder over a detector error model. `osd_order=None` selects OSD-0.
#[pyclass(name = "Decoder", frozen)]
struct PyDecoder {
    inner: BpOsdDecoder,
    detectors: usize,
}

#[pymethods]
impl PyDecoder {
    #[new]
    #[pyo3(signature = (dem, osd_order = None))]
    fn new(dem: &PyDem, osd_order: Option<usize>) -> PyResult<Self> {
        let inner = BpOsdDecoder::new(&dem.inner, decoder_config(osd_order)).map_err(err)?;
        Ok(PyDecoder { inner, detectors: dem.inner.detector_count })
    }

    /// Predicted observable flips for one shot of detector events.
    fn decode(&self, detectors: Vec<bool>) -> PyResult<Vec<bool>> {
        if detectors.len() != self.detectors {
            return Err(err(format!("expected {} detector bits, got {}", self.detectors, detectors.len())));
        }
        let res = self.inner.decode(&BitVector::from_bools(&detectors)).map_err(err)?;
        Ok(res.predicted_observables.to_bools())
    }
}

/// Samples and decodes `shots` shots of a circuit.
#[pyfunction]
#[pyo3(signature = (circuit, shots, rounds, seed = 0, osd_order = None))]
fn logical_error_rate_of<'py>(
    py: Python<'py>,
    circuit: &PyCircuit,
    shots: usize,
    rounds: usize,
    seed: u64,
    osd_order: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let dem = compile_dem(&circuit.inner).map_err(err)?;
    let decoder = BpOsdDecoder::new(&dem, decoder_config(osd_order)).map_err(err)?;
    let r = py.detach(|| logical_error_rate(ShotSource::Circuit(&circuit.inner), &decoder, shots, rounds, seed));
    let d = PyDict::new(py);
    d.set_item("shots", r.shots)?;
    d.set_item("failures", r.failures)?;
    d.set_item("rate", r.rate)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("rate_per_round", r.rate_per_round)?;
    Ok(d)
}

#[pymodule]
fn pyqroute(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCode>()?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyDem>()?;
    m.add_class::<PyDecoder>()?;
    m.add_function(wrap_pyfunction!(logical_error_rate_of, m)?)?;
    Ok(())
}
