//! Python bindings: filter geometry and netlists, lifetime sweeps, spectrum
//! and reset fits, cascade schedules and readout analysis.
//!
//! Parameter bundles and reports cross the boundary as plain dicts with the
//! same field names as the JSON the command-line tool writes.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::de::DeserializeOwned;
use serde::Serialize;

use purcell_core::filter::{self, ReYMethod, TpValue, Variant};
use purcell_core::network::{self, Compiled, FrequencySweep, SPoint, Spacing};
use purcell_core::readout::{self, BlobFit, GaussianBlob, IQShotSet, Shot};
use purcell_core::reset::{self, CascadeSchedule, Level, Populations, ResetParams};
use purcell_core::spectrum::{self, S21ModelParams, SpectrumData};
use purcell_core::tline::Response;
use purcell_core::{synth, Error};

type Matrix = Vec<Vec<Complex64>>;

fn err(e: Error) -> PyErr {
    match e {
        Error::Singular { .. } | Error::Unreachable { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn finite(r: Response) -> Option<Complex64> {
    r.finite()
}

/// Physical filter description: segment lengths, line medium and coupling
/// capacitances, all in SI units.
#[pyclass(name = "FilterGeometry", module = "purcell")]
struct PyFilterGeometry {
    inner: filter::FilterGeometry,
}

#[pymethods]
impl PyFilterGeometry {
    /// Built-in geometry: `default` or `wide`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(Self { inner: filter::FilterGeometry::preset(name).map_err(err)? })
    }

    #[staticmethod]
    fn preset_names() -> Vec<&'static str> {
        filter::FilterGeometry::preset_names()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: filter::FilterGeometry::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn from_dict(d: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner: filter::FilterGeometry = from_py(d)?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn total_length(&self) -> f64 {
        self.inner.total_length()
    }

    #[getter]
    fn c_q(&self) -> f64 {
        self.inner.c_q
    }

    /// Copy with every length scaled by `s`.
    fn scaled(&self, s: f64) -> Self {
        Self { inner: self.inner.scaled(s) }
    }

    /// Copy whose stub is a quarter wave at `f` Hz.
    fn with_stub_notch_at(&self, f: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_stub_notch_at(f).map_err(err)? })
    }

    /// Full filter netlist with feedline ports `1`, `2` and qubit port `3`.
    #[pyo3(signature = (variant = "with_stub"))]
    fn netlist(&self, variant: &str) -> PyResult<PyNetlist> {
        Ok(PyNetlist { inner: filter::build_netlist(&self.inner, parse(variant)?).map_err(err)? })
    }

    /// Feedline two-port used for transmission sweeps.
    #[pyo3(signature = (variant = "with_stub"))]
    fn spectrum_netlist(&self, variant: &str) -> PyResult<PyNetlist> {
        Ok(PyNetlist {
            inner: filter::spectrum_netlist(&self.inner, parse(variant)?).map_err(err)?,
        })
    }

    /// Closed-form qubit-to-output transfer impedance; `None` at a pole.
    fn z23(&self, f: f64) -> PyResult<Option<Complex64>> {
        Ok(finite(filter::z23_closed_form(&self.inner, f).map_err(err)?))
    }

    /// `(frequency, family)` of every transmission zero in `[lo, hi]`.
    fn notch_frequencies(&self, lo: f64, hi: f64) -> PyResult<Vec<(f64, String)>> {
        Ok(filter::notch_frequencies(&self.inner, lo, hi)
            .map_err(err)?
            .into_iter()
            .map(|n| (n.frequency, format!("{:?}", n.family)))
            .collect())
    }

    /// Purcell-limited lifetime over a linear grid.
    #[pyo3(signature = (start, stop, points, variant = "with_stub", method = "output_power"))]
    fn tp_curve(
        &self,
        py: Python<'_>,
        start: f64,
        stop: f64,
        points: usize,
        variant: &str,
        method: &str,
    ) -> PyResult<PyTpCurve> {
        let variant: Variant = parse(variant)?;
        let method: ReYMethod = parse(method)?;
        let grid = FrequencySweep::new(start, stop, points, Spacing::Linear).map_err(err)?;
        let geom = self.inner;
        let inner =
            py.detach(move || filter::tp_curve(&geom, variant, &grid, method)).map_err(err)?;
        Ok(PyTpCurve { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "FilterGeometry(l_p1={:e}, l_p2={:e}, l_p3={:e})",
            self.inner.l_p1, self.inner.l_p2, self.inner.l_p3
        )
    }
}

/// `T_p(f)` in seconds: `inf` above the measurable ceiling, `nan` where the
/// network was singular.
#[pyclass(name = "TpCurve", module = "purcell")]
struct PyTpCurve {
    inner: filter::TpCurve,
}

#[pymethods]
impl PyTpCurve {
    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.frequencies.clone()
    }

    #[getter]
    fn tp(&self) -> Vec<f64> {
        self.inner
            .tp
            .iter()
            .map(|t| match t {
                TpValue::Gap => f64::NAN,
                other => other.as_seconds().unwrap_or(f64::NAN),
            })
            .collect()
    }

    /// Total bandwidth in Hz where `T_p ≥ threshold`.
    fn width_above(&self, threshold: f64) -> f64 {
        self.inner.width_above(threshold)
    }

    /// Contiguous `(lo, hi)` band around `f` with `T_p ≥ threshold`.
    fn band_above(&self, threshold: f64, f: f64) -> Option<(f64, f64)> {
        self.inner.band_above(threshold, f)
    }

    fn local_maxima(&self) -> Vec<f64> {
        self.inner.local_maxima()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Lumped/distributed netlist with named ports.
#[pyclass(name = "Netlist", module = "purcell")]
struct PyNetlist {
    inner: network::Netlist,
}

#[pymethods]
impl PyNetlist {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: network::Netlist::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn ports(&self) -> Vec<String> {
        self.inner.ports.iter().map(|p| p.name.clone()).collect()
    }

    /// Full S matrix at `f`, rows and columns in port order.
    fn s_parameters(&self, f: f64) -> PyResult<Matrix> {
        let s = network::s_parameters(&self.inner, f).map_err(err)?;
        Ok(matrix(&s))
    }

    /// S matrices over a frequency list, computed in parallel.
    fn s_sweep(&self, py: Python<'_>, frequencies: Vec<f64>) -> PyResult<Vec<Matrix>> {
        let compiled = Compiled::new(&self.inner).map_err(err)?;
        let rows = py.detach(|| network::sweep(&frequencies, |f| compiled.s_parameters(f)));
        rows.into_iter().map(|r| r.map(|s| matrix(&s)).map_err(err)).collect()
    }

    /// `V(v_port)/I(i_port)` with every other port open; `None` at a pole.
    fn transfer_impedance(
        &self,
        v_port: &str,
        i_port: &str,
        f: f64,
    ) -> PyResult<Option<Complex64>> {
        Ok(finite(network::transfer_impedance(&self.inner, v_port, i_port, f).map_err(err)?))
    }

    fn driving_point_admittance(&self, port: &str, f: f64) -> PyResult<Complex64> {
        network::driving_point_admittance(&self.inner, port, f).map_err(err)
    }

    /// Touchstone v1 text of the S matrices at `frequencies`.
    fn touchstone(&self, frequencies: Vec<f64>) -> PyResult<String> {
        let compiled = Compiled::new(&self.inner).map_err(err)?;
        let points = frequencies
            .iter()
            .map(|&f| Ok(SPoint { frequency: f, s: compiled.s_parameters(f)? }))
            .collect::<Result<Vec<_>, Error>>()
            .map_err(err)?;
        let z_ref = self.inner.ports.first().map_or(50.0, |p| p.z_ref);
        network::write_touchstone(&points, z_ref).map_err(err)
    }
}

fn matrix(s: &purcell_core::linalg::CMatrix) -> Matrix {
    let n = s.dim();
    (0..n).map(|i| (0..n).map(|j| s[(i, j)]).collect()).collect()
}

/// `(frequencies, matrices)` parsed from Touchstone v1 text.
#[pyfunction]
fn read_touchstone(text: &str, n_ports: usize) -> PyResult<(Vec<f64>, Vec<Matrix>)> {
    let t = network::read_touchstone(text, n_ports).map_err(err)?;
    Ok(t.points.iter().map(|p| (p.frequency, matrix(&p.s))).unzip())
}

/// `|S21|` in dB of the transmission model at each frequency.
#[pyfunction]
fn s21_model_db(params: &Bound<'_, PyAny>, frequencies: Vec<f64>) -> PyResult<Vec<f64>> {
    let p: S21ModelParams = from_py(params)?;
    p.validate().map_err(err)?;
    Ok(frequencies.iter().map(|&f| spectrum::s21_db_with_background(&p, f)).collect())
}

#[pyfunction]
#[pyo3(signature = (frequencies, s21_db, n_resonators = 0))]
fn auto_initial_guess(
    py: Python<'_>,
    frequencies: Vec<f64>,
    s21_db: Vec<f64>,
    n_resonators: usize,
) -> PyResult<Py<PyAny>> {
    let data = SpectrumData::new(frequencies, s21_db).map_err(err)?;
    to_py(py, &spectrum::auto_initial_guess(&data, n_resonators).map_err(err)?)
}

/// Least-squares fit of the transmission model. Without `initial` the
/// starting point comes from [`auto_initial_guess`].
#[pyfunction]
#[pyo3(signature = (frequencies, s21_db, initial = None, n_resonators = 0))]
fn fit_s21(
    py: Python<'_>,
    frequencies: Vec<f64>,
    s21_db: Vec<f64>,
    initial: Option<&Bound<'_, PyAny>>,
    n_resonators: usize,
) -> PyResult<Py<PyAny>> {
    let data = SpectrumData::new(frequencies, s21_db).map_err(err)?;
    let start = match initial {
        Some(d) => from_py(d)?,
        None => spectrum::auto_initial_guess(&data, n_resonators).map_err(err)?,
    };
    let fit = py.detach(|| spectrum::fit_s21(&data, &start)).map_err(err)?;
    to_py(py, &fit)
}

/// Reference parameters of one reset stage: `eg` or `fe`.
#[pyfunction]
fn reset_reference(py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
    let p = match name {
        "eg" => ResetParams::reference_eg(),
        "fe" => ResetParams::reference_fe(),
        other => return Err(PyValueError::new_err(format!("unknown reset preset `{other}`"))),
    };
    to_py(py, &p)
}

fn reset_params(g_qf: f64, kappa_f: f64, p_exc_ss: f64) -> PyResult<ResetParams> {
    ResetParams::new(g_qf, kappa_f, p_exc_ss).map_err(err)
}

/// Residual excitation at each time (s); rates in Hz.
#[pyfunction]
#[pyo3(signature = (g_qf, kappa_f, times, p_exc_ss = 0.0))]
fn residual_excitation(
    g_qf: f64,
    kappa_f: f64,
    times: Vec<f64>,
    p_exc_ss: f64,
) -> PyResult<Vec<f64>> {
    Ok(reset::residual_curve(&reset_params(g_qf, kappa_f, p_exc_ss)?, &times))
}

/// The same curve integrated numerically, for cross-checks.
#[pyfunction]
#[pyo3(signature = (g_qf, kappa_f, times, p_exc_ss = 0.0))]
fn residual_excitation_ode(
    g_qf: f64,
    kappa_f: f64,
    times: Vec<f64>,
    p_exc_ss: f64,
) -> PyResult<Vec<f64>> {
    Ok(reset::oracle_curve(&reset_params(g_qf, kappa_f, p_exc_ss)?, &times))
}

/// `underdamped`, `critically_damped` or `overdamped`.
#[pyfunction]
fn classify_regime(g_qf: f64, kappa_f: f64) -> PyResult<String> {
    let r = reset::classify_regime(&reset_params(g_qf, kappa_f, 0.0)?);
    serde_json::to_value(r)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .ok_or_else(|| PyValueError::new_err("unnamed regime"))
}

/// Last time the residual excitation exceeds `threshold`; raises
/// `ArithmeticError` when the floor makes it unreachable.
#[pyfunction]
#[pyo3(signature = (g_qf, kappa_f, threshold, p_exc_ss = 0.0))]
fn time_to_threshold(g_qf: f64, kappa_f: f64, threshold: f64, p_exc_ss: f64) -> PyResult<f64> {
    reset::time_to_threshold(&reset_params(g_qf, kappa_f, p_exc_ss)?, threshold).map_err(err)
}

#[pyfunction]
fn fit_reset_curve(py: Python<'_>, times: Vec<f64>, p_e: Vec<f64>) -> PyResult<Py<PyAny>> {
    let fit = py.detach(|| reset::fit_reset_curve(&times, &p_e)).map_err(err)?;
    to_py(py, &fit)
}

/// `(64 + 242) ns` schedule through a reset mode at `mode_frequency` Hz.
#[pyfunction]
#[pyo3(signature = (mode_frequency = 3.567e9))]
fn reference_schedule(py: Python<'_>, mode_frequency: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &CascadeSchedule::reference(mode_frequency))
}

/// f→e stage only, for `t_rst_f` seconds.
#[pyfunction]
#[pyo3(signature = (t_rst_f, mode_frequency = 3.567e9))]
fn lru_schedule(py: Python<'_>, t_rst_f: f64, mode_frequency: f64) -> PyResult<Py<PyAny>> {
    to_py(py, &CascadeSchedule::lru(t_rst_f, mode_frequency))
}

/// Final populations and duration of a two-stage reset from a pure level.
#[pyfunction]
#[pyo3(signature = (schedule, fe, eg, initial = "f"))]
fn cascade_evaluate(
    py: Python<'_>,
    schedule: &Bound<'_, PyAny>,
    fe: &Bound<'_, PyAny>,
    eg: &Bound<'_, PyAny>,
    initial: &str,
) -> PyResult<Py<PyAny>> {
    let schedule: CascadeSchedule = from_py(schedule)?;
    let fe: ResetParams = from_py(fe)?;
    let eg: ResetParams = from_py(eg)?;
    let level: Level = parse(initial)?;
    let out =
        reset::cascade_evaluate(&schedule, &fe, &eg, Populations::pure(level)).map_err(err)?;
    to_py(py, &out)
}

fn shot_set(labels: Vec<String>, i: Vec<f64>, q: Vec<f64>) -> PyResult<IQShotSet> {
    if labels.len() != i.len() || i.len() != q.len() {
        return Err(PyValueError::new_err("labels, i and q differ in length"));
    }
    let shots = labels
        .iter()
        .zip(i.iter().zip(&q))
        .map(|(l, (&i, &q))| Ok(Shot { label: parse(l)?, i, q }))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(IQShotSet::new(shots))
}

fn blob_fit(method: &str, core_radius: f64) -> PyResult<BlobFit> {
    match method {
        "core" => Ok(BlobFit::Core { radius: core_radius }),
        "moments" => Ok(BlobFit::Moments),
        other => Err(PyValueError::new_err(format!("unknown blob fit `{other}` (core, moments)"))),
    }
}

/// Blob fit, assignment matrix and error breakdown of labelled IQ shots.
#[pyfunction]
#[pyo3(signature = (labels, i, q, method = "core", core_radius = readout::DEFAULT_CORE_RADIUS))]
fn analyze_shots(
    py: Python<'_>,
    labels: Vec<String>,
    i: Vec<f64>,
    q: Vec<f64>,
    method: &str,
    core_radius: f64,
) -> PyResult<Py<PyAny>> {
    let shots = shot_set(labels, i, q)?;
    let method = blob_fit(method, core_radius)?;
    let report = py.detach(|| readout::analyze_with(&shots, method)).map_err(err)?;
    to_py(py, &report)
}

/// Same as [`analyze_shots`] for `label,i,q` CSV text.
#[pyfunction]
fn analyze_csv(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let shots = IQShotSet::from_csv(text).map_err(err)?;
    let report = py.detach(|| readout::analyze(&shots)).map_err(err)?;
    to_py(py, &report)
}

/// `(ε_a, ε_b)`: probability mass of each blob on the other's side of the
/// maximum-likelihood boundary.
#[pyfunction]
fn separation_error(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
    let a: GaussianBlob = from_py(a)?;
    let b: GaussianBlob = from_py(b)?;
    a.validate().map_err(err)?;
    b.validate().map_err(err)?;
    Ok(readout::separation_error(&a, &b))
}

#[pyfunction]
fn t1_error_bound(t1: f64, tau_m: f64) -> PyResult<f64> {
    readout::t1_error_bound(t1, tau_m).map_err(err)
}

#[pyfunction]
fn effective_temperature(p_e: f64, p_g: f64, f_eg: f64) -> PyResult<f64> {
    readout::effective_temperature(p_e, p_g, f_eg).map_err(err)
}

/// `(labels, i, q)` from the two-state reference readout generator.
#[pyfunction]
#[pyo3(signature = (n_per_label, seed))]
fn synth_shots(n_per_label: usize, seed: u64) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let shots = synth::ReadoutGenerator::reference().shots(n_per_label, seed);
    let labels = shots.iter().map(|s| s.label.to_string()).collect();
    let i = shots.iter().map(|s| s.i).collect();
    let q = shots.iter().map(|s| s.q).collect();
    (labels, i, q)
}

/// Expected assignment errors of the reference readout generator.
#[pyfunction]
fn synth_expected_errors() -> Vec<f64> {
    synth::ReadoutGenerator::reference().expected_errors()
}

/// `(frequencies, s21_db)` of filter mode `a` or `b` over ±`half_widths`
/// linewidths with Gaussian dB noise.
#[pyfunction]
#[pyo3(signature = (mode, points, noise_db, seed, half_widths = 10.0))]
fn synth_spectrum(
    mode: &str,
    points: usize,
    noise_db: f64,
    seed: u64,
    half_widths: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = match mode {
        "a" => synth::mode_a_params(),
        "b" => synth::mode_b_params(),
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}` (a, b)"))),
    };
    let d = synth::spectrum(&p, &synth::window_grid(&p, half_widths, points), noise_db, seed);
    Ok((d.frequencies, d.s21_db))
}

/// `(times, p_e)` of a noisy reset curve on a uniform grid.
#[pyfunction]
#[pyo3(signature = (g_qf, kappa_f, p_exc_ss, dt, points, noise, seed))]
fn synth_reset_curve(
    g_qf: f64,
    kappa_f: f64,
    p_exc_ss: f64,
    dt: f64,
    points: usize,
    noise: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = reset_params(g_qf, kappa_f, p_exc_ss)?;
    let t = synth::time_grid(dt, points);
    let y = synth::reset_curve(&p, &t, noise, seed);
    Ok((t, y))
}

#[pymodule]
fn purcell(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFilterGeometry>()?;
    m.add_class::<PyTpCurve>()?;
    m.add_class::<PyNetlist>()?;
    m.add_function(wrap_pyfunction!(read_touchstone, m)?)?;
    m.add_function(wrap_pyfunction!(s21_model_db, m)?)?;
    m.add_function(wrap_pyfunction!(auto_initial_guess, m)?)?;
    m.add_function(wrap_pyfunction!(fit_s21, m)?)?;
    m.add_function(wrap_pyfunction!(reset_reference, m)?)?;
    m.add_function(wrap_pyfunction!(residual_excitation, m)?)?;
    m.add_function(wrap_pyfunction!(residual_excitation_ode, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(time_to_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fit_reset_curve, m)?)?;
    m.add_function(wrap_pyfunction!(reference_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(lru_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(cascade_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_shots, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_csv, m)?)?;
    m.add_function(wrap_pyfunction!(separation_error, m)?)?;
    m.add_function(wrap_pyfunction!(t1_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(effective_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(synth_shots, m)?)?;
    m.add_function(wrap_pyfunction!(synth_expected_errors, m)?)?;
    m.add_function(wrap_pyfunction!(synth_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(synth_reset_curve, m)?)?;
    Ok(())
}
