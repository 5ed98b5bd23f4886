//! Python bindings. Tensors cross the boundary as flat `float` lists plus a
//! shape; everything runs in double precision except `train`, which uses the
//! same single-precision path as the command line.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use onespike::bench::{report_csv, run_sweep, SweepSpec};
use onespike::data::{gen_synthetic, SpikeSource, gen_yinyang, load_spikes, ttfs_encode, TtfsEncoderCfg};
use onespike::fastpath;
use onespike::neuron;
use onespike::numerics::ConvBackend;
use onespike::seq::{seq_layer_forward, Firing, LayerParams, SpikeMode};
use onespike::training::{evaluate, load_checkpoint, run_training, ModelVariant, Network as CoreNetwork, NetworkConfig, RunConfig};
use onespike::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Numeric(m) => PyArithmeticError::new_err(m),
        Error::State(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_json<S: serde::Serialize>(v: &S) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Dense row-major float64 tensor.
#[pyclass(name = "Tensor", module = "pyonespike", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: onespike::Tensor<f64>,
}

impl From<onespike::Tensor<f64>> for PyTensor {
    fn from(inner: onespike::Tensor<f64>) -> Self {
        PyTensor { inner }
    }
}

#[pymethods]
impl PyTensor {
    #[new]
    fn new(data: Vec<f64>, shape: Vec<usize>) -> PyResult<Self> {
        Ok(onespike::Tensor::from_vec(&shape, data).map_err(py_err)?.into())
    }

    #[staticmethod]
    fn zeros(shape: Vec<usize>) -> Self {
        onespike::Tensor::zeros(&shape).into()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    /// Flat row-major values.
    fn tolist(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn sum(&self) -> f64 {
        self.inner.sum()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Tensor(shape={:?})", self.inner.shape())
    }
}

fn backend(name: &str) -> PyResult<ConvBackend> {
    match name {
        "auto" => Ok(ConvBackend::Auto),
        "direct" => Ok(ConvBackend::Direct),
        "transform" => Ok(ConvBackend::Transform),
        other => Err(PyValueError::new_err(format!("unknown backend {other:?}"))),
    }
}

fn layer(weights: &PyTensor, bias: &PyTensor, beta: &PyTensor) -> PyResult<LayerParams<f64>> {
    LayerParams::new(weights.inner.clone(), bias.inner.clone(), beta.inner.clone(), true).map_err(py_err)
}

#[pyfunction]
fn beta_from_tau(tau: f64, dt: f64) -> PyResult<f64> {
    neuron::beta_from_tau(tau, dt).map_err(py_err)
}

#[pyfunction]
fn spike_fn(v: f64) -> f64 {
    neuron::spike_fn(v)
}

#[pyfunction]
#[pyo3(signature = (v, slope = neuron::DEFAULT_SURROGATE_SLOPE))]
fn surrogate_grad(v: f64, slope: f64) -> f64 {
    neuron::surrogate_grad(v, slope)
}

/// Ramp convolution of binary spikes `[B, N, T]`; the first spike maps to exactly 1.
#[pyfunction]
#[pyo3(signature = (raw_spikes, backend = "auto"))]
fn phi(raw_spikes: &PyTensor, backend: &str) -> PyResult<PyTensor> {
    Ok(fastpath::phi_with(&raw_spikes.inner, self::backend(backend)?).map_err(py_err)?.into())
}

#[pyfunction]
fn extract_first_spike(latent: &PyTensor) -> PyTensor {
    fastpath::extract_first_spike(&latent.inner).into()
}

/// Potentials without reset for currents `[B, N, T]`, per-neuron `beta` `[N]`
/// and optional initial potentials `[N]`.
#[pyfunction]
#[pyo3(signature = (current, beta, v0 = None, backend = "auto"))]
fn no_reset_potentials(current: &PyTensor, beta: &PyTensor, v0: Option<&PyTensor>, backend: &str) -> PyResult<PyTensor> {
    let v = fastpath::no_reset_potentials_with(&current.inner, &beta.inner, v0.map(|t| &t.inner), self::backend(backend)?)
        .map_err(py_err)?;
    Ok(v.into())
}

/// Output spikes of a single-spike layer computed without a loop over time.
#[pyfunction]
#[pyo3(signature = (input, weights, bias, beta, backend = "auto"))]
fn fast_layer_forward(input: &PyTensor, weights: &PyTensor, bias: &PyTensor, beta: &PyTensor, backend: &str) -> PyResult<PyTensor> {
    let params = layer(weights, bias, beta)?;
    let trace = fastpath::fast_layer_forward(&input.inner, &params, self::backend(backend)?).map_err(py_err)?;
    Ok(trace.out_spikes.into())
}

/// Step-by-step layer simulation. `mode` is `single`, `multi` or `readout`
/// (the last returns potentials instead of spikes).
#[pyfunction]
#[pyo3(name = "seq_layer_forward", signature = (input, weights, bias, beta, mode = "single"))]
fn seq_layer_forward_py(input: &PyTensor, weights: &PyTensor, bias: &PyTensor, beta: &PyTensor, mode: &str) -> PyResult<PyTensor> {
    let firing = match mode {
        "single" => Firing::Spiking(SpikeMode::Single),
        "multi" => Firing::Spiking(SpikeMode::Multi),
        "readout" => Firing::Readout,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let params = layer(weights, bias, beta)?;
    let trace = seq_layer_forward(&input.inner, &params, firing).map_err(py_err)?;
    Ok(trace.output().clone().into())
}

/// Time-to-first-spike code of `[B, N]` intensities in `[0, i_max]`.
#[pyfunction]
#[pyo3(signature = (values, steps, i_max = 1.0))]
fn ttfs(values: &PyTensor, steps: usize, i_max: f64) -> PyResult<PyTensor> {
    Ok(ttfs_encode(&values.inner, &TtfsEncoderCfg { i_max, steps }).map_err(py_err)?.into())
}

/// `(points [n, 4], labels)` of the Yin-Yang task.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn yinyang(n: usize, seed: u64) -> PyResult<(PyTensor, Vec<usize>)> {
    let (x, y) = gen_yinyang::<f64>(n, seed).map_err(py_err)?;
    Ok((x.into(), y))
}

/// Bernoulli spikes `[b, n, t]` with a per-sample rate drawn from `rate` Hz.
#[pyfunction]
#[pyo3(signature = (b, n, t, dt = 1.0, rate = (0.0, 200.0), seed = 0))]
fn synthetic(b: usize, n: usize, t: usize, dt: f64, rate: (f64, f64), seed: u64) -> PyResult<PyTensor> {
    Ok(gen_synthetic::<f64>(b, n, t, dt, rate, seed).map_err(py_err)?.into())
}

/// `(spikes, labels)` from an encoded spike file.
#[pyfunction]
fn load_spike_file(path: std::path::PathBuf) -> PyResult<(PyTensor, Vec<usize>)> {
    let ds = load_spikes(&path).map_err(py_err)?;
    Ok((ds.spikes::<f64>().into(), SpikeSource::<f64>::labels(&ds).to_vec()))
}

/// A feed-forward network with freshly initialised or loaded parameters.
#[pyclass(name = "Network", module = "pyonespike", frozen)]
struct PyNetwork {
    inner: CoreNetwork<f64>,
}

#[pymethods]
impl PyNetwork {
    /// `layers` lists sizes after the input, the last being the readout.
    #[new]
    #[pyo3(signature = (inputs, layers, steps, variant = "fast", dt = 1.0, seed = 0))]
    fn new(inputs: usize, layers: Vec<usize>, steps: usize, variant: &str, dt: f64, seed: u64) -> PyResult<Self> {
        let variant: ModelVariant = variant.parse().map_err(py_err)?;
        let mut cfg = NetworkConfig::dense(inputs, &layers, variant, steps, dt);
        cfg.seed = seed;
        Ok(PyNetwork {
            inner: CoreNetwork::new(cfg).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let tr = load_checkpoint::<f32>(&path).map_err(py_err)?;
        Ok(PyNetwork { inner: tr.net.cast() })
    }

    #[getter]
    fn config(&self) -> PyResult<String> {
        to_json(&self.inner.cfg)
    }

    /// `(weights, bias, beta)` of layer `i`.
    fn params(&self, i: usize) -> PyResult<(PyTensor, PyTensor, PyTensor)> {
        let p = self
            .inner
            .layers
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("layer {i} out of range")))?;
        Ok((p.weights.clone().into(), p.bias.clone().into(), p.beta.clone().into()))
    }

    /// Class scores `[B, C]` for input spikes `[B, N, T]`.
    fn scores(&self, input: &PyTensor) -> PyResult<PyTensor> {
        let trace = self.inner.forward(&input.inner).map_err(py_err)?;
        Ok(self.inner.scores(&trace).map_err(py_err)?.into())
    }

    /// Total hidden spikes for input spikes `[B, N, T]`.
    fn hidden_spikes(&self, input: &PyTensor) -> PyResult<f64> {
        Ok(self.inner.forward(&input.inner).map_err(py_err)?.hidden_spikes())
    }

    /// Accuracy and spike metrics on an encoded spike file, as JSON.
    #[pyo3(signature = (path, batch = 1024))]
    fn evaluate(&self, path: std::path::PathBuf, batch: usize) -> PyResult<String> {
        let ds = load_spikes(&path).map_err(py_err)?;
        to_json(&evaluate(&self.inner, &ds, batch).map_err(py_err)?)
    }
}

/// Runs a JSON training config (same schema as `onespike train`) and returns
/// the run summary as JSON. The GIL is released while training.
#[pyfunction]
fn train(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = RunConfig::from_json(config).map_err(py_err)?;
    let summary = py
        .detach(|| run_training::<f32>(&cfg, |_| {}).map(|(_, s)| s))
        .map_err(py_err)?;
    to_json(&summary)
}

/// Runs a JSON benchmark sweep and returns CSV rows.
#[pyfunction]
#[pyo3(name = "bench")]
fn bench_sweep(py: Python<'_>, spec: &str) -> PyResult<String> {
    let spec: SweepSpec = serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| run_sweep::<f32>(&spec)).map_err(py_err)?;
    Ok(report_csv(&report.records))
}

#[pymodule]
fn pyonespike(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(beta_from_tau, m)?)?;
    m.add_function(wrap_pyfunction!(spike_fn, m)?)?;
    m.add_function(wrap_pyfunction!(surrogate_grad, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(extract_first_spike, m)?)?;
    m.add_function(wrap_pyfunction!(no_reset_potentials, m)?)?;
    m.add_function(wrap_pyfunction!(fast_layer_forward, m)?)?;
    m.add_function(wrap_pyfunction!(seq_layer_forward_py, m)?)?;
    m.add_function(wrap_pyfunction!(ttfs, m)?)?;
    m.add_function(wrap_pyfunction!(yinyang, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(load_spike_file, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(bench_sweep, m)?)?;
    Ok(())
}
