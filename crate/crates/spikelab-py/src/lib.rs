//! Python bindings: the main types and operations of spikelab-core as an
//! extension module.
//!
//! Build with `cargo build -p spikelab-py --release`, then rename
//! `libspikelab.so` to `spikelab.so` somewhere on the Python path (see
//! python/smoke_test.py, which does exactly that).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spikelab_core::cf::Convergents;
use spikelab_core::dimension::{
    dim_estimate, dyadic_scales, CoverInput, CoverMetric, QuasiMetric,
};
use spikelab_core::diophantine::{
    bad_set_scan, bad_subspace_test, minkowski_solutions, spike_correspondence, AffineSubspace,
    BadTestConfig,
};
use spikelab_core::dynamics::{
    cf_heaviness, empirical_measure, excursions, lambda1_series, PsiFamily,
};
use spikelab_core::flow::FlowSpec as CoreFlow;
use spikelab_core::fractal::{
    bad_interval_sets, dim_lower_estimate, dip_start_lambda1, excursion_data,
    mass_distribution_check, resolved_radii, verify_offset_sigma, CfLattice,
};
use spikelab_core::lattice::{Grid as CoreGrid, Lattice as CoreLattice, Norm};
use spikelab_core::region::BoxRegion as CoreRegion;
use spikelab_core::spikes::{avoid_test, grid_spike_points, hit_times, DEFAULT_ENUM_BUDGET};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_norm(name: &str) -> PyResult<Norm> {
    match name {
        "sup" => Ok(Norm::Sup),
        "euclidean" => Ok(Norm::Euclidean),
        other => Err(PyValueError::new_err(format!(
            "norm must be 'sup' or 'euclidean', got '{other}'"
        ))),
    }
}

/// Diagonal flow diag(e^{c_1 t}, ..., e^{c_d t}) with trace-free exponents.
#[pyclass(name = "FlowSpec")]
#[derive(Clone)]
struct PyFlowSpec {
    inner: CoreFlow,
}

#[pymethods]
impl PyFlowSpec {
    #[new]
    fn new(exponents: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreFlow::new(exponents).map_err(err)?,
        })
    }

    #[staticmethod]
    fn standard_2d() -> Self {
        Self {
            inner: CoreFlow::standard_2d(),
        }
    }

    #[staticmethod]
    fn approximation(n: usize) -> Self {
        Self {
            inner: CoreFlow::approximation_flow(n),
        }
    }

    fn exponents(&self) -> Vec<f64> {
        self.inner.exponents().to_vec()
    }

    fn expansion_rate(&self) -> f64 {
        self.inner.expansion_rate()
    }

    fn unstable_indices(&self) -> Vec<usize> {
        self.inner.unstable_indices()
    }

    fn apply_point(&self, t: f64, p: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply_point(t, &p).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("FlowSpec({:?})", self.inner.exponents())
    }
}

/// Unimodular lattice given by basis columns.
#[pyclass(name = "Lattice")]
#[derive(Clone)]
struct PyLattice {
    inner: CoreLattice,
}

#[pymethods]
impl PyLattice {
    #[new]
    fn new(basis_columns: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreLattice::from_basis(basis_columns).map_err(err)?,
        })
    }

    #[staticmethod]
    fn standard(d: usize) -> Self {
        Self {
            inner: CoreLattice::standard(d),
        }
    }

    /// The lattice x_v capturing Diophantine properties of the vector v.
    #[staticmethod]
    fn from_vector(v: Vec<f64>) -> Self {
        Self {
            inner: CoreLattice::from_vector(&v),
        }
    }

    /// x_alpha for the continued fraction [0; a_1, a_2, ...], exact.
    #[staticmethod]
    fn from_quotients(quotients: Vec<u64>) -> PyResult<Self> {
        let conv = Convergents::from_quotients(&quotients).map_err(err)?;
        Ok(Self {
            inner: CoreLattice::from_vector_rational(&[conv.value().clone()]),
        })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn basis(&self) -> Vec<Vec<f64>> {
        self.inner.basis().to_vec()
    }

    #[pyo3(signature = (norm = "sup"))]
    fn lambda1(&self, norm: &str) -> PyResult<f64> {
        self.inner.lambda1(parse_norm(norm)?).map_err(err)
    }

    #[pyo3(signature = (norm = "sup"))]
    fn lambda1_vector(&self, norm: &str) -> PyResult<(f64, Vec<f64>, Vec<i64>)> {
        self.inner.lambda1_vector(parse_norm(norm)?).map_err(err)
    }

    fn flow(&self, flow: &PyFlowSpec, t: f64) -> PyResult<PyLattice> {
        Ok(PyLattice {
            inner: self.inner.flow(&flow.inner, t).map_err(err)?,
        })
    }

    fn grid(&self, offset: Vec<f64>) -> PyResult<PyGrid> {
        Ok(PyGrid {
            inner: self.inner.grid(offset).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(dim={}, exact={})",
            self.inner.dim(),
            self.inner.is_exact()
        )
    }
}

/// Coset lattice + offset, reduced into the fundamental domain.
#[pyclass(name = "Grid")]
#[derive(Clone)]
struct PyGrid {
    inner: CoreGrid,
}

#[pymethods]
impl PyGrid {
    fn offset(&self) -> Vec<f64> {
        self.inner.offset().to_vec()
    }

    #[pyo3(signature = (norm = "sup"))]
    fn sigma(&self, norm: &str) -> PyResult<f64> {
        self.inner.sigma(parse_norm(norm)?).map_err(err)
    }

    fn flow(&self, flow: &PyFlowSpec, t: f64) -> PyResult<PyGrid> {
        Ok(PyGrid {
            inner: self.inner.flow(&flow.inner, t).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Grid(dim={})", self.inner.dim())
    }
}

/// Finite union of bounded open boxes.
#[pyclass(name = "BoxRegion")]
#[derive(Clone)]
struct PyBoxRegion {
    inner: CoreRegion,
}

#[pymethods]
impl PyBoxRegion {
    #[new]
    fn new(boxes: Vec<Vec<(f64, f64)>>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreRegion::new(boxes).map_err(err)?,
        })
    }

    #[staticmethod]
    fn cube(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreRegion::centered_cube(dim, radius).map_err(err)?,
        })
    }

    fn contains(&self, p: Vec<f64>) -> bool {
        self.inner.contains(&p)
    }

    fn __repr__(&self) -> String {
        format!(
            "BoxRegion(dim={}, boxes={})",
            self.inner.dim(),
            self.inner.boxes().len()
        )
    }
}

/// Exact times t > 0 at which the flowed point lies in the region, as a
/// list of (lo, hi) intervals.
#[pyfunction(name = "hit_times")]
fn py_hit_times(
    flow: &PyFlowSpec,
    p: Vec<f64>,
    region: &PyBoxRegion,
) -> PyResult<Vec<(f64, f64)>> {
    Ok(hit_times(&flow.inner, &p, &region.inner)
        .map_err(err)?
        .intervals()
        .to_vec())
}

/// Grid points whose hit times meet (0, t_max], with their intervals.
#[pyfunction(name = "grid_spike_points")]
fn py_grid_spike_points(
    py: Python<'_>,
    flow: &PyFlowSpec,
    grid: &PyGrid,
    region: &PyBoxRegion,
    t_max: f64,
) -> PyResult<Vec<Py<PyDict>>> {
    let hits = grid_spike_points(&flow.inner, &grid.inner, &region.inner, t_max, DEFAULT_ENUM_BUDGET)
        .map_err(err)?;
    let mut out = Vec::with_capacity(hits.len());
    for (lp, times) in hits {
        let d = PyDict::new(py);
        d.set_item("point", lp.point)?;
        d.set_item("coeffs", lp.coeffs)?;
        d.set_item("layer", lp.layer)?;
        d.set_item("intervals", times.intervals().to_vec())?;
        out.push(d.unbind());
    }
    Ok(out)
}

/// True when no grid point is hit during [r, t_max].
#[pyfunction(name = "avoid_test")]
fn py_avoid_test(
    flow: &PyFlowSpec,
    grid: &PyGrid,
    region: &PyBoxRegion,
    r: f64,
    t_max: f64,
) -> PyResult<bool> {
    avoid_test(&flow.inner, &grid.inner, &region.inner, r, t_max, DEFAULT_ENUM_BUDGET).map_err(err)
}

/// lambda1(a_t x) over an increasing time grid (sup norm).
#[pyfunction(name = "lambda1_series")]
fn py_lambda1_series(
    flow: &PyFlowSpec,
    lattice: &PyLattice,
    t_grid: Vec<f64>,
) -> PyResult<Vec<(f64, f64)>> {
    lambda1_series(&flow.inner, &lattice.inner, &t_grid).map_err(err)
}

type IntervalPairs = (Vec<(f64, f64)>, Vec<(f64, f64)>);

/// Threshold excursions: ([(s_i, t_i)], [(dip_start, dip_end)]).
#[pyfunction(name = "excursions")]
#[pyo3(signature = (flow, lattice, threshold = 0.1, t_max = 20.0))]
fn py_excursions(
    flow: &PyFlowSpec,
    lattice: &PyLattice,
    threshold: f64,
    t_max: f64,
) -> PyResult<IntervalPairs> {
    let e = excursions(&flow.inner, &lattice.inner, threshold, t_max).map_err(err)?;
    Ok((
        e.above.intervals().to_vec(),
        e.dips.iter().map(|d| (d.start, d.end)).collect(),
    ))
}

/// Empirical-measure masses of the dyadic psi family along the time-one
/// orbit: (masses, min_lambda1).
#[pyfunction(name = "empirical_masses")]
#[pyo3(signature = (flow, lattice, t_count, i_max = 5))]
fn py_empirical_masses(
    flow: &PyFlowSpec,
    lattice: &PyLattice,
    t_count: u64,
    i_max: usize,
) -> PyResult<(Vec<f64>, f64)> {
    let psi = PsiFamily::dyadic(i_max).map_err(err)?;
    let rep = empirical_measure(&flow.inner, &lattice.inner, t_count, &psi).map_err(err)?;
    Ok((rep.masses, rep.min_lambda1))
}

/// (1/N) sum of max(log(eps a_k), 0) over the first N partial quotients.
#[pyfunction(name = "cf_heaviness")]
fn py_cf_heaviness(quotients: Vec<u64>, eps: f64, n: usize) -> PyResult<f64> {
    cf_heaviness(&quotients, eps, n).map_err(err)
}

/// Truncated bad-target test: (verdict, min_value, argmin_k).
#[pyfunction(name = "bad_target_test")]
#[pyo3(signature = (v, w, eps, k_max, weights = None))]
fn py_bad_target_test(
    v: Vec<f64>,
    w: Vec<f64>,
    eps: f64,
    k_max: u64,
    weights: Option<Vec<f64>>,
) -> PyResult<(bool, f64, u64)> {
    let mut cfg = BadTestConfig::new(v, eps, k_max).map_err(err)?;
    if let Some(ws) = weights {
        cfg = cfg.with_weights(ws).map_err(err)?;
    }
    let r = spikelab_core::diophantine::bad_target_test(&cfg, &w).map_err(err)?;
    Ok((r.verdict, r.min_value, r.argmin_k))
}

/// Survivor scan over the dyadic target grid; returns a summary dict.
#[pyfunction(name = "bad_set_scan")]
#[pyo3(signature = (v, eps, k_max, resolution, threads = 1))]
fn py_bad_set_scan(
    py: Python<'_>,
    v: Vec<f64>,
    eps: f64,
    k_max: u64,
    resolution: u32,
    threads: usize,
) -> PyResult<Py<PyDict>> {
    let cfg = BadTestConfig::new(v, eps, k_max).map_err(err)?;
    let scan = bad_set_scan(&cfg, resolution, threads).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("survivor_count", scan.survivor_count)?;
    d.set_item("survivor_fraction", scan.survivor_fraction)?;
    d.set_item("per_scale_counts", scan.per_scale_counts)?;
    d.set_item("box_dim_slope", scan.box_dim_slope)?;
    Ok(d.unbind())
}

/// Layer correspondence: (bad_proxy, spike_count, consistent).
#[pyfunction(name = "spike_correspondence")]
fn py_spike_correspondence(
    v: Vec<f64>,
    w: Vec<f64>,
    s: f64,
    eps: f64,
    k_max: u64,
) -> PyResult<(bool, u64, bool)> {
    let r = spike_correspondence(&v, &w, s, eps, k_max).map_err(err)?;
    Ok((r.bad_proxy, r.spike_count, r.consistent))
}

/// Integer points near a linear subspace satisfying the convex-body bound.
#[pyfunction(name = "minkowski_solutions")]
fn py_minkowski_solutions(spanning: Vec<Vec<f64>>, bound: f64) -> PyResult<Vec<Vec<i64>>> {
    let d = spanning
        .first()
        .map(|v| v.len())
        .ok_or_else(|| PyValueError::new_err("need a spanning vector"))?;
    let sub = AffineSubspace::new(spanning, vec![0.0; d]).map_err(err)?;
    minkowski_solutions(&sub, bound).map_err(err)
}

/// Truncated badly-approximable test for an affine subspace.
#[pyfunction(name = "bad_subspace_test")]
fn py_bad_subspace_test(
    spanning: Vec<Vec<f64>>,
    offset: Vec<f64>,
    eps: f64,
    bound: f64,
) -> PyResult<(bool, f64, Vec<i64>)> {
    let sub = AffineSubspace::new(spanning, offset).map_err(err)?;
    let r = bad_subspace_test(&sub, eps, bound).map_err(err)?;
    Ok((r.verdict, r.min_value, r.argmin))
}

/// Box-counting slope of the unit square in the flow's quasi-metric.
#[pyfunction(name = "quasi_box_dimension")]
#[pyo3(signature = (exponents, scale_from = 4, scale_to = 10))]
fn py_quasi_box_dimension(
    exponents: Vec<f64>,
    scale_from: u32,
    scale_to: u32,
) -> PyResult<f64> {
    let flow = CoreFlow::new(exponents).map_err(err)?;
    let q = QuasiMetric::from_flow(&flow);
    let sq = CoreRegion::new(vec![vec![(0.0, 1.0), (0.0, 1.0)]]).map_err(err)?;
    let est = dim_estimate(
        &CoverInput::Boxes(sq),
        &CoverMetric::Quasi(q),
        &dyadic_scales(scale_from, scale_to),
    )
    .map_err(err)?;
    Ok(est.slope)
}

/// Full fractal pipeline at the given depth; returns a summary dict.
#[pyfunction(name = "fractal_pipeline")]
#[pyo3(signature = (quotients, depth, gamma_samples = 40, t_samples = 10, threads = 1))]
fn py_fractal_pipeline(
    py: Python<'_>,
    quotients: Vec<u64>,
    depth: usize,
    gamma_samples: usize,
    t_samples: usize,
    threads: usize,
) -> PyResult<Py<PyDict>> {
    let cf = CfLattice::build(&quotients, depth).map_err(err)?;
    let data = excursion_data(&cf, depth).map_err(err)?;
    let approx = bad_interval_sets(&data, 500_000).map_err(err)?;
    let mut min_sigma = f64::INFINITY;
    for d in &data {
        let rep = verify_offset_sigma(&cf, d, gamma_samples, t_samples, threads).map_err(err)?;
        min_sigma = min_sigma.min(rep.min_sigma);
    }
    let est = dim_lower_estimate(&approx).map_err(err)?;
    let radii = resolved_radii(&approx, 4);
    let mass = mass_distribution_check(&approx, 0.3, &radii, 16).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item(
        "t",
        data.iter().map(|d| d.t_i).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "ell",
        data.iter().map(|d| d.ell).collect::<Vec<_>>(),
    )?;
    d.set_item("min_sigma", min_sigma)?;
    d.set_item("sharpness_lambda1", dip_start_lambda1(&cf, &data[0]))?;
    d.set_item("dim_slope", est.slope)?;
    d.set_item("mass_ratio", mass.max_ratio)?;
    d.set_item("interval_counts", approx.counts.clone())?;
    Ok(d.unbind())
}

/// Run one acceptance criterion; returns (pass, details).
#[pyfunction(name = "run_criterion")]
#[pyo3(signature = (id, threads = 1))]
fn py_run_criterion(id: u32, threads: usize) -> (bool, String) {
    let r = spikelab_core::accept::run_criterion(id, threads);
    (r.pass, r.details)
}

#[pymodule]
fn spikelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFlowSpec>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyBoxRegion>()?;
    m.add_function(wrap_pyfunction!(py_hit_times, m)?)?;
    m.add_function(wrap_pyfunction!(py_grid_spike_points, m)?)?;
    m.add_function(wrap_pyfunction!(py_avoid_test, m)?)?;
    m.add_function(wrap_pyfunction!(py_lambda1_series, m)?)?;
    m.add_function(wrap_pyfunction!(py_excursions, m)?)?;
    m.add_function(wrap_pyfunction!(py_empirical_masses, m)?)?;
    m.add_function(wrap_pyfunction!(py_cf_heaviness, m)?)?;
    m.add_function(wrap_pyfunction!(py_bad_target_test, m)?)?;
    m.add_function(wrap_pyfunction!(py_bad_set_scan, m)?)?;
    m.add_function(wrap_pyfunction!(py_spike_correspondence, m)?)?;
    m.add_function(wrap_pyfunction!(py_minkowski_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(py_bad_subspace_test, m)?)?;
    m.add_function(wrap_pyfunction!(py_quasi_box_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(py_fractal_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_criterion, m)?)?;
    Ok(())
}
