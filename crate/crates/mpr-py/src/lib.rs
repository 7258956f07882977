//! Python bindings for the multi-packet-reception schedule toolkit.
//!
//! The module mirrors the core library: schedule matrices, channel
//! simulation, exhaustive property verification, randomized construction,
//! and the closed-form length bounds.

use mpr_core::bounds;
use mpr_core::channel;
use mpr_core::construct::{self, GenMode, PropertySpec};
use mpr_core::verify;
use mpr_core::{
    KGCode, KGParams, ScheduleMatrix, SelectorParams, SelectorSample, SimulationTrace, StationSet,
    VerificationReport, VerifyOptions,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: mpr_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn stations(members: Vec<u32>) -> PyResult<StationSet> {
    StationSet::new(members).map_err(err)
}

fn mode_of(mode: &str) -> PyResult<GenMode> {
    mode.parse().map_err(err)
}

fn options(force: bool, parallel: bool, max_combos: Option<u64>) -> VerifyOptions {
    let defaults = VerifyOptions::default();
    VerifyOptions {
        force,
        parallel,
        max_combos: max_combos.unwrap_or(defaults.max_combos),
    }
}

/// Binary transmission schedule: `t` slots (rows) by `n` stations (columns);
/// a 1 in row `i`, column `j` means station `j` transmits in slot `i`.
#[pyclass(name = "Matrix", from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: ScheduleMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        Ok(Self { inner: ScheduleMatrix::from_rows(&rows).map_err(err)? })
    }

    /// Parses the `MPRMAT 1 <t> <n>` text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ScheduleMatrix::from_text(text).map_err(err)? })
    }

    #[staticmethod]
    fn zeros(t: usize, n: u32) -> PyResult<Self> {
        Ok(Self { inner: ScheduleMatrix::zeros(t, n).map_err(err)? })
    }

    #[staticmethod]
    fn all_ones(t: usize, n: u32) -> PyResult<Self> {
        Ok(Self { inner: ScheduleMatrix::all_ones(t, n).map_err(err)? })
    }

    #[staticmethod]
    fn identity(n: u32) -> PyResult<Self> {
        Ok(Self { inner: ScheduleMatrix::identity(n).map_err(err)? })
    }

    /// Concatenates schedules vertically (same station count).
    #[staticmethod]
    fn stack(parts: Vec<PyMatrix>) -> PyResult<Self> {
        let mats: Vec<ScheduleMatrix> = parts.into_iter().map(|p| p.inner).collect();
        Ok(Self { inner: ScheduleMatrix::stack(&mats).map_err(err)? })
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.t()
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    /// Entry at 1-based (slot, station).
    fn bit(&self, slot: usize, station: u32) -> PyResult<bool> {
        if slot == 0 || slot > self.inner.t() {
            return Err(err(mpr_core::Error::SlotOutOfRange { slot, t: self.inner.t() }));
        }
        if station == 0 || station > self.inner.n() {
            return Err(err(mpr_core::Error::StationOutOfRange {
                station,
                n: self.inner.n(),
            }));
        }
        Ok(self.inner.bit(slot, station))
    }

    /// Total number of 1 entries.
    fn ones(&self) -> u64 {
        self.inner.ones()
    }

    /// Rows as lists of 0/1 integers.
    fn rows(&self) -> Vec<Vec<u32>> {
        (1..=self.inner.t())
            .map(|slot| {
                (1..=self.inner.n()).map(|st| self.inner.bit(slot, st) as u32).collect()
            })
            .collect()
    }

    /// Number of listed stations transmitting in the given 1-based slot.
    fn restricted_weight(&self, slot: usize, stations_list: Vec<u32>) -> PyResult<u32> {
        let s = stations(stations_list)?;
        self.inner.restricted_row_weight(slot, &s).map_err(err)
    }

    /// Submatrix keeping only the listed stations, in ascending order.
    fn column_submatrix(&self, stations_list: Vec<u32>) -> PyResult<PyMatrix> {
        let s = stations(stations_list)?;
        Ok(Self { inner: self.inner.column_submatrix(&s).map_err(err)? })
    }

    /// Relabels stations: `perm[j-1]` is the new label of station `j`.
    fn permute_columns(&self, perm: Vec<u32>) -> PyResult<PyMatrix> {
        Ok(Self { inner: self.inner.permute_columns(&perm).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Matrix(t={}, n={})", self.inner.t(), self.inner.n())
    }
}

/// Slot-by-slot record of a channel run.
#[pyclass(name = "Trace")]
struct PyTrace {
    inner: SimulationTrace,
}

#[pymethods]
impl PyTrace {
    /// True when no initially active station is left unresolved.
    fn resolved(&self) -> bool {
        self.inner.resolved()
    }

    /// Stations still active after the last slot.
    fn residual(&self) -> Vec<u32> {
        self.inner.residual().members().to_vec()
    }

    /// 1-based slot in which the station succeeded, if it did.
    fn success_slot(&self, station: u32) -> Option<usize> {
        self.inner.success_slot(station)
    }

    /// Last slot with a success, or 0 if none.
    fn last_success_slot(&self) -> usize {
        self.inner.last_success_slot()
    }

    /// Slots needed to resolve everyone, or None if unresolved.
    fn slots_to_resolution(&self) -> Option<usize> {
        self.inner.slots_to_resolution()
    }

    /// Per-slot tuples (slot, kind, transmitters, succeeded).
    fn outcomes(&self) -> Vec<(usize, String, Vec<u32>, Vec<u32>)> {
        self.inner
            .outcomes()
            .iter()
            .map(|o| {
                (
                    o.slot,
                    o.kind.as_str().to_string(),
                    o.transmitters.members().to_vec(),
                    o.succeeded.members().to_vec(),
                )
            })
            .collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.outcomes().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(slots={}, resolved={}, residual={})",
            self.inner.outcomes().len(),
            self.inner.resolved(),
            self.inner.residual().len()
        )
    }
}

/// Outcome of an exhaustive property check.
#[pyclass(name = "Report")]
struct PyReport {
    inner: VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    /// First failing station set in scan order, if any.
    #[getter]
    fn counterexample(&self) -> Option<Vec<u32>> {
        self.inner.counterexample.as_ref().map(|s| s.members().to_vec())
    }

    #[getter]
    fn subsets_checked(&self) -> u64 {
        self.inner.subsets_checked
    }

    /// Witness for the first checked subset on pass, as JSON.
    #[getter]
    fn witness_json(&self) -> Option<String> {
        self.inner
            .witness
            .as_ref()
            .map(|w| serde_json::to_string(w).expect("witness serializes"))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __bool__(&self) -> bool {
        self.inner.pass
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(passed={}, subsets_checked={})",
            self.inner.pass, self.inner.subsets_checked
        )
    }
}

/// A closed-form bound evaluation.
#[pyclass(name = "Bound")]
struct PyBound {
    inner: bounds::BoundValue,
}

#[pymethods]
impl PyBound {
    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn raw(&self) -> f64 {
        self.inner.raw
    }

    #[getter]
    fn integral(&self) -> i64 {
        self.inner.integral
    }

    #[getter]
    fn preconditions_met(&self) -> bool {
        self.inner.preconditions_met
    }

    #[getter]
    fn notes(&self) -> String {
        self.inner.notes.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Bound(name={:?}, raw={}, integral={})", self.inner.name, self.inner.raw, self.inner.integral)
    }
}

/// A generated selector together with its generation record.
#[pyclass(name = "Selector")]
struct PySelector {
    inner: SelectorSample,
}

#[pymethods]
impl PySelector {
    #[getter]
    fn matrix(&self) -> PyMatrix {
        PyMatrix { inner: self.inner.matrix.clone() }
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.params.k
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.params.m
    }

    #[getter]
    fn d(&self) -> u32 {
        self.inner.params.d
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.params.n
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn attempts(&self) -> u64 {
        self.inner.attempts
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.plan.p
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.plan.t
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.plan.eps
    }

    #[getter]
    fn effective_d(&self) -> u32 {
        self.inner.plan.effective_d
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.plan.mode.to_string()
    }

    fn sidecar_json(&self) -> String {
        self.inner.sidecar_json()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!(
            "Selector(k={}, m={}, d={}, n={}, t={}, seed={})",
            p.k, p.m, p.d, p.n, self.inner.plan.t, self.inner.seed
        )
    }
}

/// A constructed conflict-resolution schedule with its component plan.
#[pyclass(name = "Code")]
struct PyCode {
    inner: KGCode,
}

#[pymethods]
impl PyCode {
    #[getter]
    fn matrix(&self) -> PyMatrix {
        PyMatrix { inner: self.inner.matrix.clone() }
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.params.k
    }

    #[getter]
    fn d(&self) -> u32 {
        self.inner.params.d
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.params.n
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    /// Component records as (k, m, effective d, slots) tuples.
    #[getter]
    fn plan(&self) -> Vec<(u32, u32, u32, usize)> {
        self.inner.plan.iter().map(|c| (c.k, c.m, c.d_eff, c.t)).collect()
    }

    fn sidecar_json(&self) -> String {
        self.inner.sidecar_json()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!(
            "Code(k={}, d={}, n={}, t={}, seed={})",
            p.k, p.d, p.n, self.inner.matrix.t(), self.inner.seed
        )
    }
}

/// Runs the schedule against the capacity-`d` channel with the given active
/// stations and returns the slot-by-slot trace.
#[pyfunction]
fn simulate(matrix: &PyMatrix, active: Vec<u32>, d: u32) -> PyResult<PyTrace> {
    let s = stations(active)?;
    Ok(PyTrace { inner: channel::simulate(&matrix.inner, &s, d).map_err(err)? })
}

/// Runs several schedules back to back as one session.
#[pyfunction]
fn staged_simulate(stages: Vec<PyMatrix>, active: Vec<u32>, d: u32) -> PyResult<PyTrace> {
    let mats: Vec<ScheduleMatrix> = stages.into_iter().map(|p| p.inner).collect();
    let s = stations(active)?;
    Ok(PyTrace { inner: channel::staged_simulate(&mats, &s, d).map_err(err)? })
}

/// Stations still active after running the whole schedule.
#[pyfunction]
fn residual_active(matrix: &PyMatrix, active: Vec<u32>, d: u32) -> PyResult<Vec<u32>> {
    let s = stations(active)?;
    Ok(channel::residual_active(&matrix.inner, &s, d)
        .map_err(err)?
        .members()
        .to_vec())
}

/// Checks conflict resolution by simulating every size-k active set.
#[pyfunction]
#[pyo3(signature = (matrix, k, d, force=false, parallel=false, max_combos=None))]
fn is_kg_sim(
    matrix: &PyMatrix,
    k: u32,
    d: u32,
    force: bool,
    parallel: bool,
    max_combos: Option<u64>,
) -> PyResult<PyReport> {
    let p = KGParams::new(k, d, matrix.inner.n()).map_err(err)?;
    let opts = options(force, parallel, max_combos);
    Ok(PyReport { inner: verify::is_kg_sim(&matrix.inner, &p, &opts).map_err(err)? })
}

/// Checks conflict resolution via the defining slot/block partition; agrees
/// with `is_kg_sim` and additionally returns a witness on pass.
#[pyfunction]
#[pyo3(signature = (matrix, k, d, force=false, parallel=false, max_combos=None))]
fn is_kg_def(
    matrix: &PyMatrix,
    k: u32,
    d: u32,
    force: bool,
    parallel: bool,
    max_combos: Option<u64>,
) -> PyResult<PyReport> {
    let p = KGParams::new(k, d, matrix.inner.n()).map_err(err)?;
    let opts = options(force, parallel, max_combos);
    Ok(PyReport { inner: verify::is_kg_def(&matrix.inner, &p, &opts).map_err(err)? })
}

/// Checks the selector property: every k-set has rows of restricted weight
/// in [1, d] covering at least m of its stations.
#[pyfunction]
#[pyo3(signature = (matrix, k, m, d, force=false, parallel=false, max_combos=None))]
fn is_selector(
    matrix: &PyMatrix,
    k: u32,
    m: u32,
    d: u32,
    force: bool,
    parallel: bool,
    max_combos: Option<u64>,
) -> PyResult<PyReport> {
    let p = SelectorParams::new_relaxed(k, m, d, matrix.inner.n()).map_err(err)?;
    let opts = options(force, parallel, max_combos);
    Ok(PyReport { inner: verify::is_selector(&matrix.inner, &p, &opts).map_err(err)? })
}

/// Checks local thinness for every active-set size from d to k.
#[pyfunction]
#[pyo3(signature = (matrix, k, d, force=false, parallel=false, max_combos=None))]
fn is_locally_thin_leq(
    matrix: &PyMatrix,
    k: u32,
    d: u32,
    force: bool,
    parallel: bool,
    max_combos: Option<u64>,
) -> PyResult<PyReport> {
    let p = KGParams::new(k, d, matrix.inner.n()).map_err(err)?;
    let opts = options(force, parallel, max_combos);
    Ok(PyReport { inner: verify::is_locally_thin_leq(&matrix.inner, &p, &opts).map_err(err)? })
}

/// Checks local thinness for active sets of size exactly k.
#[pyfunction]
#[pyo3(signature = (matrix, k, d, force=false, parallel=false, max_combos=None))]
fn is_locally_thin_exact(
    matrix: &PyMatrix,
    k: u32,
    d: u32,
    force: bool,
    parallel: bool,
    max_combos: Option<u64>,
) -> PyResult<PyReport> {
    let p = KGParams::new(k, d, matrix.inner.n()).map_err(err)?;
    let opts = options(force, parallel, max_combos);
    Ok(PyReport { inner: verify::is_locally_thin_exact(&matrix.inner, &p, &opts).map_err(err)? })
}

/// Samples (and in `verified` mode certifies) a random selector.
#[pyfunction]
#[pyo3(signature = (k, m, d, n, eps=0.5, seed=0, mode="verified", attempt_cap=None, relaxed=false))]
#[allow(clippy::too_many_arguments)]
fn gen_selector(
    k: u32,
    m: u32,
    d: u32,
    n: u32,
    eps: f64,
    seed: u64,
    mode: &str,
    attempt_cap: Option<u64>,
    relaxed: bool,
) -> PyResult<PySelector> {
    let params = if relaxed {
        SelectorParams::new_relaxed(k, m, d, n).map_err(err)?
    } else {
        SelectorParams::new(k, m, d, n).map_err(err)?
    };
    let mode = mode_of(mode)?;
    let cap = attempt_cap.unwrap_or(construct::DEFAULT_ATTEMPT_CAP);
    let sample =
        construct::gen_selector_with(&params, eps, seed, mode, &VerifyOptions::default(), cap)
            .map_err(err)?;
    Ok(PySelector { inner: sample })
}

/// Builds the recursive conflict-resolution schedule for known bound k.
#[pyfunction]
#[pyo3(signature = (k, d, n, eps=0.5, seed=0, mode="verified", attempt_cap=None))]
fn build_kg(
    k: u32,
    d: u32,
    n: u32,
    eps: f64,
    seed: u64,
    mode: &str,
    attempt_cap: Option<u64>,
) -> PyResult<PyCode> {
    let params = KGParams::new(k, d, n).map_err(err)?;
    let mode = mode_of(mode)?;
    let cap = attempt_cap.unwrap_or(construct::DEFAULT_ATTEMPT_CAP);
    let code = construct::build_kg_with(&params, eps, seed, mode, &VerifyOptions::default(), cap)
        .map_err(err)?;
    Ok(PyCode { inner: code })
}

/// Builds the doubling ladder of schedules for unknown active-set size.
#[pyfunction]
#[pyo3(signature = (n, d, eps=0.5, seed=0, mode="verified", attempt_cap=None))]
fn build_staged(
    n: u32,
    d: u32,
    eps: f64,
    seed: u64,
    mode: &str,
    attempt_cap: Option<u64>,
) -> PyResult<Vec<PyCode>> {
    let mode = mode_of(mode)?;
    let cap = attempt_cap.unwrap_or(construct::DEFAULT_ATTEMPT_CAP);
    let codes = construct::build_staged_with(n, d, eps, seed, mode, &VerifyOptions::default(), cap)
        .map_err(err)?;
    Ok(codes.into_iter().map(|inner| PyCode { inner }).collect())
}

/// Sampling plan (probability, length, effective capacity) for a selector.
#[pyfunction]
#[pyo3(signature = (k, m, d, n, eps=0.5))]
fn plan_selector(py: Python<'_>, k: u32, m: u32, d: u32, n: u32, eps: f64) -> PyResult<Py<PyDict>> {
    let params = SelectorParams::new_relaxed(k, m, d, n).map_err(err)?;
    let plan = construct::plan_selector(&params, eps).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("p", plan.p)?;
    out.set_item("t", plan.t)?;
    out.set_item("eps", plan.eps)?;
    out.set_item("effective_d", plan.effective_d)?;
    out.set_item("mode", plan.mode.to_string())?;
    Ok(out.into())
}

/// Expected-length upper bound for a random selector.
#[pyfunction]
fn tsel_upper(k: u32, m: u32, d: u32, n: u32) -> PyResult<PyBound> {
    let params = SelectorParams::new_relaxed(k, m, d, n).map_err(err)?;
    Ok(PyBound { inner: bounds::tsel_upper(&params) })
}

/// Length of the recursive construction, component by component.
#[pyfunction]
#[pyo3(signature = (k, d, n, eps=0.5))]
fn tkg_upper(k: u32, d: u32, n: u32, eps: f64) -> PyResult<PyBound> {
    let params = KGParams::new(k, d, n).map_err(err)?;
    Ok(PyBound { inner: bounds::tkg_upper_explicit(&params, eps).map_err(err)? })
}

/// Lower bound on schedules locally thin at all sizes d..=k.
#[pyfunction]
fn tlt_lower_leq(k: u32, d: u32, n: u32) -> PyResult<PyBound> {
    let params = KGParams::new(k, d, n).map_err(err)?;
    Ok(PyBound { inner: bounds::tlt_lower_leq(&params) })
}

/// Lower bound on schedules locally thin at size exactly k.
#[pyfunction]
fn tlt_lower_exact(k: u32, d: u32, n: u32) -> PyResult<PyBound> {
    let params = KGParams::new(k, d, n).map_err(err)?;
    Ok(PyBound { inner: bounds::tlt_lower_exact(&params) })
}

/// Closed-form per-row success rate claimed for the prescribed probability.
#[pyfunction]
fn claim1_rate(k: u32, m: u32, d: u32) -> PyResult<f64> {
    bounds::claim1_rate(k, m, d).map_err(err)
}

/// Row sampling probability used by the generator.
#[pyfunction]
fn prescribed_p(k: u32, d: u32) -> f64 {
    bounds::prescribed_p(k, d)
}

/// Exact failure terms (P1, P2) and the resulting log rate; `p` defaults to
/// the prescribed probability at the effective capacity.
#[pyfunction]
#[pyo3(signature = (k, m, d, p=None))]
fn p1p2(k: u32, m: u32, d: u32, p: Option<f64>) -> PyResult<(f64, f64, f64)> {
    let p = p.unwrap_or_else(|| bounds::prescribed_p(k, d.min(m)));
    let v = bounds::p1p2(k, m, d, p).map_err(err)?;
    Ok((v.p1, v.p2, v.log_rate))
}

/// Shortest schedule length with the property, by exhaustive search over
/// column multisets. `prop` is one of kg, selector, lt-leq, lt-exact;
/// `selector` needs `m`.
#[pyfunction]
#[pyo3(signature = (prop, k, d, n, m=None, t_max=4, force=false))]
fn minimal_t_search(
    prop: &str,
    k: u32,
    d: u32,
    n: u32,
    m: Option<u32>,
    t_max: usize,
    force: bool,
) -> PyResult<Option<usize>> {
    let spec = match prop {
        "kg" => PropertySpec::Kg(KGParams::new(k, d, n).map_err(err)?),
        "selector" => {
            let m = m.ok_or_else(|| PyValueError::new_err("selector search needs m"))?;
            PropertySpec::Selector(SelectorParams::new_relaxed(k, m, d, n).map_err(err)?)
        }
        "lt-leq" => PropertySpec::LocallyThinLeq(KGParams::new(k, d, n).map_err(err)?),
        "lt-exact" => PropertySpec::LocallyThinExact(KGParams::new(k, d, n).map_err(err)?),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown property {other:?} (expected kg, selector, lt-leq, or lt-exact)"
            )))
        }
    };
    construct::minimal_t_search(&spec, t_max, force).map_err(err)
}

/// Deterministic subseed derivation used by the parameter-sweep runner.
#[pyfunction]
fn derive_subseed(seed: u64, tags: Vec<u64>) -> u64 {
    construct::derive_subseed(seed, &tags)
}

/// Deterministic random station subset of the given size.
#[pyfunction]
fn sample_station_subset(n: u32, size: u32, seed: u64) -> PyResult<Vec<u32>> {
    Ok(construct::sample_station_subset(n, size, seed)
        .map_err(err)?
        .members()
        .to_vec())
}

#[pymodule]
fn mpr_codes(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyBound>()?;
    m.add_class::<PySelector>()?;
    m.add_class::<PyCode>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(staged_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(residual_active, m)?)?;
    m.add_function(wrap_pyfunction!(is_kg_sim, m)?)?;
    m.add_function(wrap_pyfunction!(is_kg_def, m)?)?;
    m.add_function(wrap_pyfunction!(is_selector, m)?)?;
    m.add_function(wrap_pyfunction!(is_locally_thin_leq, m)?)?;
    m.add_function(wrap_pyfunction!(is_locally_thin_exact, m)?)?;
    m.add_function(wrap_pyfunction!(gen_selector, m)?)?;
    m.add_function(wrap_pyfunction!(build_kg, m)?)?;
    m.add_function(wrap_pyfunction!(build_staged, m)?)?;
    m.add_function(wrap_pyfunction!(plan_selector, m)?)?;
    m.add_function(wrap_pyfunction!(tsel_upper, m)?)?;
    m.add_function(wrap_pyfunction!(tkg_upper, m)?)?;
    m.add_function(wrap_pyfunction!(tlt_lower_leq, m)?)?;
    m.add_function(wrap_pyfunction!(tlt_lower_exact, m)?)?;
    m.add_function(wrap_pyfunction!(claim1_rate, m)?)?;
    m.add_function(wrap_pyfunction!(prescribed_p, m)?)?;
    m.add_function(wrap_pyfunction!(p1p2, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_t_search, m)?)?;
    m.add_function(wrap_pyfunction!(derive_subseed, m)?)?;
    m.add_function(wrap_pyfunction!(sample_station_subset, m)?)?;
    m.add("GENERATOR_ID", construct::GENERATOR_ID)?;
    m.add("DEFAULT_EPS", construct::DEFAULT_EPS)?;
    m.add("DEFAULT_ATTEMPT_CAP", construct::DEFAULT_ATTEMPT_CAP)?;
    m.add("MAX_EXHAUSTIVE_N", verify::MAX_EXHAUSTIVE_N)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
