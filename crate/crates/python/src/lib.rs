//! Python module `hrtf_lab`. Signals cross the boundary as lists of floats;
//! every library error is raised as `HrtfError` with the variant name first.

use hrtf_core::apf::{self, ApfSpec};
use hrtf_core::dsp::{self, CoordinateSystem, Direction, Ear, HrirRecord};
use hrtf_core::eval;
use hrtf_core::fbs::{self, FbsConfig, FitMethod};
use hrtf_core::io::{self as hio, Plane};
use hrtf_core::model::{self, ModelConfig, ReconstructionMode};
use hrtf_core::notch::{self, NotchConfig, NotchSource};
use hrtf_core::render::{self, FilterBank, RenderConfig, Trajectory};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyComplex;

create_exception!(hrtf_lab, HrtfError, PyValueError);

fn err(e: impl Into<hrtf_core::Error>) -> PyErr {
    HrtfError::new_err(e.into().to_string())
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(|e: String| PyValueError::new_err(e))
}

fn record(samples: Vec<f64>, fs: f64) -> PyResult<HrirRecord> {
    HrirRecord::new(samples, fs).map_err(err)
}

fn notch_config(threshold: f64, lp_order: usize) -> PyResult<NotchConfig> {
    let cfg = NotchConfig {
        threshold,
        lp_order,
        ..NotchConfig::default()
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// Minimum-phase / all-pass factorization of one HRIR.
#[pyclass(frozen, skip_from_py_object)]
struct Decomposition {
    inner: dsp::DecomposedHrtf,
}

#[pymethods]
impl Decomposition {
    #[getter]
    fn round_trip_error(&self) -> f64 {
        self.inner.round_trip_error()
    }

    #[getter]
    fn additivity_error(&self) -> f64 {
        self.inner.additivity_error()
    }

    #[getter]
    fn all_pass_flatness(&self) -> f64 {
        self.inner.all_pass_flatness()
    }

    #[getter]
    fn linear_phase_delay(&self) -> i64 {
        dsp::linear_phase_delay(&self.inner.composite)
    }

    #[getter]
    fn valid_mask(&self) -> Vec<bool> {
        self.inner.valid_mask()
    }

    /// Minimum-phase impulse response.
    fn min_phase(&self) -> Vec<f64> {
        self.inner.min_phase.to_real_sequence()
    }

    fn all_pass(&self) -> Vec<f64> {
        self.inner.all_pass.to_real_sequence()
    }

    /// Group delays in samples: (composite, min_phase, all_pass).
    fn group_delays(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            self.inner.gd_composite.values.clone(),
            self.inner.gd_min.values.clone(),
            self.inner.gd_ap.values.clone(),
        )
    }
}

#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0))]
fn decompose(samples: Vec<f64>, fs: f64) -> PyResult<Decomposition> {
    let inner = dsp::decompose(&record(samples, fs)?).map_err(err)?;
    Ok(Decomposition { inner })
}

#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0))]
fn minimum_phase(samples: Vec<f64>, fs: f64) -> PyResult<Vec<f64>> {
    Ok(dsp::minimum_phase(&record(samples, fs)?).map_err(err)?.to_real_sequence())
}

#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0))]
fn group_delay(samples: Vec<f64>, fs: f64) -> PyResult<Vec<f64>> {
    Ok(dsp::group_delay(&samples, fs).map_err(err)?.values)
}

#[pyclass(frozen, get_all, skip_from_py_object)]
struct Notch {
    frequency_hz: f64,
    depth: f64,
    bin_index: usize,
    source: &'static str,
}

#[pymethods]
impl Notch {
    fn __repr__(&self) -> String {
        format!(
            "Notch(frequency_hz={}, depth={}, bin_index={}, source='{}')",
            self.frequency_hz, self.depth, self.bin_index, self.source
        )
    }
}

#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0, source="composite", threshold=-0.8, lp_order=12))]
fn notches(samples: Vec<f64>, fs: f64, source: &str, threshold: f64, lp_order: usize) -> PyResult<Vec<Notch>> {
    let src: NotchSource = parse(source)?;
    let found = notch::record_notches(&record(samples, fs)?, src, &notch_config(threshold, lp_order)?).map_err(err)?;
    Ok(found
        .into_iter()
        .map(|n| Notch {
            frequency_hz: n.frequency_hz,
            depth: n.depth,
            bin_index: n.bin_index,
            source: n.source.as_str(),
        })
        .collect())
}

/// Returns `(class, min_all_pass_gd)`.
#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0, threshold=-0.8, lp_order=12))]
fn classify(samples: Vec<f64>, fs: f64, threshold: f64, lp_order: usize) -> PyResult<(&'static str, f64)> {
    let c = model::classify_direction(&record(samples, fs)?, &notch_config(threshold, lp_order)?).map_err(err)?;
    Ok((c.class.as_str(), c.min_ap_gd))
}

/// Rebuilds an HRIR of the same length from its model. `mode` is
/// "m-hrtf" or "min-pd".
#[pyfunction]
#[pyo3(signature = (samples, fs=44100.0, mode="m-hrtf", in_pure_set=false))]
fn reconstruct(samples: Vec<f64>, fs: f64, mode: &str, in_pure_set: bool) -> PyResult<(Vec<f64>, &'static str)> {
    let h = record(samples, fs)?;
    let mode: ReconstructionMode = parse(mode)?;
    let m = model::reconstruct_with(&h, in_pure_set, mode, &ModelConfig::default()).map_err(err)?;
    let out = model::model_to_hrir(&m, h.len()).map_err(err)?;
    Ok((out.samples().to_vec(), m.flavor.as_str()))
}

/// Second-order all-pass section with poles at `r e^{+-j theta0}`.
#[pyclass(name = "ApfSpec", frozen, skip_from_py_object)]
struct PyApfSpec {
    inner: ApfSpec,
}

#[pymethods]
impl PyApfSpec {
    #[new]
    #[pyo3(signature = (r, f0, fs=44100.0))]
    fn new(r: f64, f0: f64, fs: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ApfSpec::new(r, f0, fs).map_err(err)?,
        })
    }

    /// Spec whose peak group delay is `tau` samples.
    #[staticmethod]
    #[pyo3(signature = (f0, tau, fs=44100.0))]
    fn from_peak_delay(f0: f64, tau: f64, fs: f64) -> PyResult<Self> {
        let r = apf::solve_r(f0, fs, tau).map_err(err)?;
        Self::new(r, f0, fs)
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.fs
    }

    #[getter]
    fn theta0(&self) -> f64 {
        self.inner.theta0()
    }

    fn peak_delay(&self) -> f64 {
        self.inner.peak_delay()
    }

    /// Analytic group delay in samples at `omega` rad/sample.
    fn group_delay(&self, omega: f64) -> f64 {
        apf::apf_group_delay(&self.inner, omega)
    }

    /// `(b, a)` with `a[0] = 1`.
    fn coefficients(&self) -> ([f64; 3], [f64; 3]) {
        self.inner.coefficients()
    }

    #[pyo3(signature = (tail_rel=1e-9))]
    fn impulse_response(&self, tail_rel: f64) -> Vec<f64> {
        apf::impulse_response(&self.inner, tail_rel).taps
    }

    fn __repr__(&self) -> String {
        format!("ApfSpec(r={}, theta0={}, fs={})", self.inner.r, self.inner.theta0(), self.inner.fs)
    }
}

#[pyfunction]
#[pyo3(signature = (f0, tau, fs=44100.0))]
fn solve_r(f0: f64, tau: f64, fs: f64) -> PyResult<f64> {
    apf::solve_r(f0, fs, tau).map_err(err)
}

/// Returns `(psi_star, lag_at_peak)`.
#[pyfunction]
#[pyo3(signature = (gt, test, max_lag=None))]
fn ncc(gt: Vec<f64>, test: Vec<f64>, max_lag: Option<usize>) -> PyResult<(f64, i64)> {
    let lag = max_lag.unwrap_or(gt.len().max(test.len()));
    let r = eval::ncc(&gt, &test, lag).map_err(err)?;
    Ok((r.psi_star, r.lag_at_peak))
}

#[pyfunction]
#[pyo3(signature = (gt, apf, mpd, max_lag=None))]
fn psi_d(gt: Vec<f64>, apf: Vec<f64>, mpd: Vec<f64>, max_lag: Option<usize>) -> PyResult<f64> {
    let lag = max_lag.unwrap_or(gt.len());
    eval::psi_d(&gt, &apf, &mpd, lag).map_err(err)
}

/// Three-cluster 1-D k-means; returns `(labels, centroids)`.
#[pyfunction]
fn kmeans3(values: Vec<f64>) -> PyResult<(Vec<&'static str>, [f64; 3])> {
    let r = eval::kmeans3_1d(&values).map_err(err)?;
    Ok((r.labels.iter().map(|l| l.as_str()).collect(), r.centroids))
}

/// Fourier-Bessel series model of HRIRs on a circle.
#[pyclass(name = "FbsModel", frozen, skip_from_py_object)]
struct PyFbsModel {
    inner: fbs::FbsModel,
}

#[pymethods]
impl PyFbsModel {
    /// Fits HRIRs sampled at uniform `thetas` (radians).
    #[staticmethod]
    #[pyo3(signature = (hrirs, thetas, fs=44100.0, m_max=10, k_min=1, k_max=70, f_max=None, method="least-squares"))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        hrirs: Vec<Vec<f64>>,
        thetas: Vec<f64>,
        fs: f64,
        m_max: usize,
        k_min: usize,
        k_max: usize,
        f_max: Option<f64>,
        method: &str,
    ) -> PyResult<Self> {
        let method: FitMethod = parse(method)?;
        let records = hrirs
            .into_iter()
            .map(|h| record(h, fs))
            .collect::<PyResult<Vec<_>>>()?;
        let cfg = FbsConfig {
            m_max,
            k_min,
            k_max,
            f_max,
            method,
        };
        Ok(Self {
            inner: fbs::fbs_fit(&records, &thetas, &cfg).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: fbs::format::load_model(path).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        fbs::format::save_model(&self.inner, path).map_err(err)
    }

    #[getter]
    fn m_max(&self) -> usize {
        self.inner.m_max
    }

    #[getter]
    fn k_range(&self) -> (usize, usize) {
        (self.inner.k_min, self.inner.k_max)
    }

    #[getter]
    fn fit_residual(&self) -> f64 {
        self.inner.fit_residual
    }

    /// Coefficient `C_{m,k}` as a complex number, or None outside the model.
    fn coefficient<'py>(&self, py: Python<'py>, m: i64, k: usize) -> Option<Bound<'py, PyComplex>> {
        self.inner.coeff(m, k).map(|c| PyComplex::from_doubles(py, c.re, c.im))
    }

    /// HRIR of `n` samples at `theta` radians.
    fn hrir(&self, theta: f64, n: usize) -> PyResult<Vec<f64>> {
        Ok(fbs::fbs_reconstruct_hrir(&self.inner, theta, n).map_err(err)?.samples().to_vec())
    }
}

/// HRIR dataset: a JSON manifest next to a little-endian f32 blob.
#[pyclass(name = "Dataset", skip_from_py_object)]
struct PyDataset {
    inner: hio::Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: hio::load_dataset(path).map_err(err)?,
        })
    }

    /// Builds a dataset from `(azimuth_deg, elevation_deg, ear, samples)` tuples.
    #[staticmethod]
    #[pyo3(signature = (name, records, fs=44100.0, coordinates="interaural-polar"))]
    fn from_records(name: &str, records: Vec<(f64, f64, String, Vec<f64>)>, fs: f64, coordinates: &str) -> PyResult<Self> {
        let cs: CoordinateSystem = parse(coordinates)?;
        let recs = records
            .into_iter()
            .map(|(az, el, ear, x)| {
                let ear: Ear = parse(&ear)?;
                Ok(record(x, fs)?.with_direction(Direction::new(az, el)).with_ear(ear))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: hio::Dataset::new(name, cs, recs).map_err(err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        hio::save_dataset(&self.inner, path).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.fs
    }

    #[getter]
    fn hrir_length(&self) -> usize {
        self.inner.hrir_length
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    /// `(azimuth_deg, elevation_deg, ear)` of every record, in order.
    fn directions(&self) -> Vec<(f64, f64, &'static str)> {
        self.inner
            .records
            .iter()
            .map(|r| (r.direction.azimuth_deg, r.direction.elevation_deg, r.ear.as_str()))
            .collect()
    }

    #[pyo3(signature = (azimuth_deg, elevation_deg, ear="left"))]
    fn hrir(&self, azimuth_deg: f64, elevation_deg: f64, ear: &str) -> PyResult<Option<Vec<f64>>> {
        let ear: Ear = parse(ear)?;
        Ok(self
            .inner
            .find(Direction::new(azimuth_deg, elevation_deg), ear)
            .map(|r| r.samples().to_vec()))
    }

    /// HRIRs of one ear on a plane, with their circle angles in radians.
    #[pyo3(signature = (plane="median", ear="left"))]
    fn circle(&self, plane: &str, ear: &str) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
        let plane: Plane = parse(plane)?;
        let ear: Ear = parse(ear)?;
        let c = hio::select_plane(&self.inner, plane, ear).map_err(err)?;
        Ok((c.records.iter().map(|r| r.samples().to_vec()).collect(), c.thetas))
    }
}

/// Renders mono `x` through the dataset filters along `(azimuth, elevation)`
/// waypoints given as `(sample_index, azimuth_deg, elevation_deg)`.
#[pyfunction]
#[pyo3(signature = (x, dataset, waypoints, block_size=4096, xfade=0))]
fn render_binaural(
    x: Vec<f64>,
    dataset: &PyDataset,
    waypoints: Vec<(usize, f64, f64)>,
    block_size: usize,
    xfade: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let traj = Trajectory::new(
        waypoints
            .into_iter()
            .map(|(start_sample, az, el)| render::TrajectoryPoint {
                start_sample,
                direction: Direction::new(az, el),
            })
            .collect(),
    )
    .map_err(err)?;
    let bank = FilterBank::from_dataset(&dataset.inner);
    let cfg = RenderConfig { block_size, xfade };
    let y = render::render(&x, dataset.inner.fs, &traj, &bank, &cfg).map_err(err)?;
    Ok((y.left, y.right))
}

#[pymodule]
fn hrtf_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HrtfError", m.py().get_type::<HrtfError>())?;
    m.add_class::<Decomposition>()?;
    m.add_class::<Notch>()?;
    m.add_class::<PyApfSpec>()?;
    m.add_class::<PyFbsModel>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(minimum_phase, m)?)?;
    m.add_function(wrap_pyfunction!(group_delay, m)?)?;
    m.add_function(wrap_pyfunction!(notches, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(solve_r, m)?)?;
    m.add_function(wrap_pyfunction!(ncc, m)?)?;
    m.add_function(wrap_pyfunction!(psi_d, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans3, m)?)?;
    m.add_function(wrap_pyfunction!(render_binaural, m)?)?;
    Ok(())
}
