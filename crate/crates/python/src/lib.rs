//! Python bindings. Matrices cross the boundary as lists of rows, phase
//! vectors as stacked lists `[xi..., eta...]`.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use symsector::cocycle::{
    analyze_sequence, check_criterion69, limit_subspace, Example69Spec, GrowthVerdict,
    MapSequence,
};
use symsector::expansion::{image_distance, mc_inf_beta as mc_inf_beta_rs, sigma_complementary};
use symsector::lagrangian::{distance as distance_rs, mobius, order_compare as order_rs};
use symsector::linalg::{matrix_from_rows, matrix_to_rows, SymMatrix};
use symsector::{
    beta as beta_rs, canonical_form, factor_qpr, is_symplectic as is_symplectic_rs,
    monotonicity_class, omega as omega_rs, q_standard, BlockMap, LagrangianSubspace, PhaseVector,
    SectorError,
};

fn err(e: SectorError) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn dense(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    matrix_from_rows(&rows).map_err(err)
}

fn phase(v: Vec<f64>) -> PyResult<PhaseVector> {
    PhaseVector::from_stacked(&DVector::from_vec(v)).map_err(err)
}

fn stacked(w: &PhaseVector) -> Vec<f64> {
    w.stacked().as_slice().to_vec()
}

/// A symplectic block map `[[A, B], [C, D]]`.
#[pyclass(name = "BlockMap", module = "symsector_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyBlockMap {
    inner: BlockMap,
}

#[pymethods]
impl PyBlockMap {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = BlockMap::from_matrix(dense(rows)?).map_err(err)?;
        Ok(PyBlockMap { inner })
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        PyBlockMap {
            inner: BlockMap::identity(d),
        }
    }

    #[staticmethod]
    fn q_isometry(a: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = symsector::q_isometry(&dense(a)?).map_err(err)?;
        Ok(PyBlockMap { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn __matmul__(&self, other: &PyBlockMap) -> PyResult<Self> {
        if other.inner.dim() != self.inner.dim() {
            return Err(err(SectorError::DimensionMismatch {
                expected: self.inner.dim(),
                got: other.inner.dim(),
            }));
        }
        Ok(PyBlockMap {
            inner: &self.inner * &other.inner,
        })
    }

    fn apply(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        let w = phase(w)?;
        if w.dim() != self.inner.dim() {
            return Err(err(SectorError::DimensionMismatch {
                expected: self.inner.dim(),
                got: w.dim(),
            }));
        }
        Ok(stacked(&self.inner.apply(&w)))
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn is_symplectic(&self, tol: f64) -> bool {
        is_symplectic_rs(&self.inner, tol)
    }

    fn monotonicity_class(&self) -> PyResult<&'static str> {
        monotonicity_class(&self.inner).map(|c| c.as_str()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("BlockMap(d={}, rows={:?})", self.inner.dim(), self.inner.to_rows())
    }
}

/// A Lagrangian subspace given by a graph matrix or a `2d x d` basis.
#[pyclass(name = "Subspace", module = "symsector_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySubspace {
    inner: LagrangianSubspace,
}

#[pymethods]
impl PySubspace {
    #[staticmethod]
    fn from_graph(u: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = LagrangianSubspace::from_graph_matrix(dense(u)?).map_err(err)?;
        Ok(PySubspace { inner })
    }

    #[staticmethod]
    fn from_basis(b: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = LagrangianSubspace::from_basis(dense(b)?).map_err(err)?;
        Ok(PySubspace { inner })
    }

    /// The graph of `e^u I`.
    #[staticmethod]
    fn z(d: usize, u: f64) -> Self {
        PySubspace {
            inner: symsector::z_subspace(d, u),
        }
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }

    fn graph(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.graph().map(SymMatrix::to_rows)
    }

    fn basis(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.inner.basis())
    }

    fn in_lag_c(&self) -> bool {
        self.inner.in_lag_c()
    }

    fn image(&self, l: &PyBlockMap) -> PyResult<Self> {
        let inner = mobius(&l.inner, &self.inner).map_err(err)?;
        Ok(PySubspace { inner })
    }
}

#[pyclass(module = "symsector_py", get_all, frozen)]
pub struct Factorization {
    a: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    p_class: String,
    r_class: String,
    cond_a: f64,
    monotone_class: &'static str,
}

#[pyclass(module = "symsector_py", get_all, frozen)]
pub struct Expansion {
    sigma: f64,
    t1: f64,
    witness: Option<Vec<f64>>,
    sigma_complementary: f64,
}

#[pyclass(module = "symsector_py", get_all, frozen)]
pub struct Canonical {
    t: Vec<f64>,
    left_iso: Vec<Vec<f64>>,
    right_iso: Vec<Vec<f64>>,
    core: Vec<Vec<f64>>,
    residual: f64,
}

#[pyclass(module = "symsector_py", get_all, frozen)]
pub struct SequenceSummary {
    sigma_n: Vec<f64>,
    t1_n: Vec<f64>,
    diameter_n: Vec<f64>,
    q_probes: Vec<Vec<f64>>,
    strict_at_step: Option<usize>,
    certified_growth: bool,
    limit_estimate: Option<Vec<Vec<f64>>>,
    limit_diameter_bound: f64,
    conditioning_stop: Option<usize>,
}

#[pyclass(module = "symsector_py", get_all, frozen)]
pub struct Criterion69 {
    series_partial: f64,
    q_trajectory: Vec<f64>,
    nondecreasing: bool,
    ratio_bound_holds: bool,
    certified: bool,
}

#[pyfunction]
fn omega(w1: Vec<f64>, w2: Vec<f64>) -> PyResult<f64> {
    omega_rs(&phase(w1)?, &phase(w2)?).map_err(err)
}

#[pyfunction]
fn q(w: Vec<f64>) -> PyResult<f64> {
    Ok(q_standard(&phase(w)?))
}

#[pyfunction]
fn factor(l: &PyBlockMap) -> PyResult<Factorization> {
    let f = factor_qpr(&l.inner).map_err(err)?;
    Ok(Factorization {
        a: matrix_to_rows(&f.a),
        p: f.p.to_rows(),
        r: f.r.to_rows(),
        p_class: format!("{:?}", f.p_class.class),
        r_class: format!("{:?}", f.r_class.class),
        cond_a: f.cond_a,
        monotone_class: f.monotone_class().as_str(),
    })
}

#[pyfunction]
fn canonical(l: &PyBlockMap) -> PyResult<Canonical> {
    let c = canonical_form(&l.inner).map_err(err)?;
    Ok(Canonical {
        residual: c.residual(&l.inner),
        t: c.t,
        left_iso: c.left_iso.to_rows(),
        right_iso: c.right_iso.to_rows(),
        core: c.core.to_rows(),
    })
}

#[pyfunction]
fn sigma(l: &PyBlockMap) -> PyResult<Expansion> {
    let e = symsector::sigma(&l.inner).map_err(err)?;
    Ok(Expansion {
        sigma: e.sigma,
        t1: e.t1,
        witness: e.witness.as_ref().map(stacked),
        sigma_complementary: sigma_complementary(&l.inner).map_err(err)?,
    })
}

#[pyfunction]
fn beta(w: Vec<f64>, l: &PyBlockMap) -> PyResult<f64> {
    beta_rs(&phase(w)?, &l.inner).map_err(err)
}

/// `(closed form, from t1, direct metric)` of the distance between `LV1` and `LV2`.
#[pyfunction]
fn image_distances(l: &PyBlockMap) -> PyResult<(f64, f64, f64)> {
    let d = image_distance(&l.inner).map_err(err)?;
    Ok((d.closed_form, d.from_t1, d.direct))
}

#[pyfunction]
#[pyo3(signature = (l, samples = 100_000, seed = 0))]
fn mc_inf_beta(py: Python<'_>, l: &PyBlockMap, samples: usize, seed: u64) -> PyResult<f64> {
    let map = l.inner.clone();
    py.detach(move || mc_inf_beta_rs(&map, samples, seed))
        .map_err(err)
}

#[pyfunction]
fn distance(a: &PySubspace, b: &PySubspace) -> PyResult<f64> {
    distance_rs(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn order_compare(a: &PySubspace, b: &PySubspace) -> PyResult<String> {
    order_rs(&a.inner, &b.inner)
        .map(|o| format!("{o:?}"))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (maps, n_max, probes = Vec::new()))]
fn analyze(maps: Vec<PyBlockMap>, n_max: usize, probes: Vec<Vec<f64>>) -> PyResult<SequenceSummary> {
    let seq = MapSequence::new(maps.into_iter().map(|m| m.inner).collect()).map_err(err)?;
    let probes = probes.into_iter().map(phase).collect::<PyResult<Vec<_>>>()?;
    let r = analyze_sequence(&seq, n_max, &probes).map_err(err)?;
    Ok(SequenceSummary {
        sigma_n: r.steps.iter().map(|s| s.sigma_n).collect(),
        t1_n: r.steps.iter().map(|s| s.t1_n).collect(),
        diameter_n: r.steps.iter().map(|s| s.diameter_n).collect(),
        q_probes: r.steps.iter().map(|s| s.q_probes.clone()).collect(),
        strict_at_step: r.flags.strict_at_step,
        certified_growth: r.flags.certified_growth,
        limit_estimate: r
            .flags
            .limit_estimate
            .as_ref()
            .map(|l| matrix_to_rows(&l.estimate.basis())),
        limit_diameter_bound: r.flags.limit_diameter_bound,
        conditioning_stop: r.flags.conditioning_stop,
    })
}

/// Graph matrix of the limit estimate (in rotated coordinates) and its bound.
#[pyfunction]
fn limit(maps: Vec<PyBlockMap>, n_max: usize) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let seq = MapSequence::new(maps.into_iter().map(|m| m.inner).collect()).map_err(err)?;
    let l = limit_subspace(&seq, n_max).map_err(err)?;
    Ok((l.rotated.to_rows(), l.bound))
}

/// Growth check for `L_n = diag(A_n, A_n^{-T}) [[I, 0], [P_n, I]] [[I, R_n], [0, I]]`.
#[pyfunction]
#[pyo3(signature = (a, p, tau, probe, horizon = None))]
fn criterion69(
    a: Vec<Vec<Vec<f64>>>,
    p: Vec<Vec<Vec<f64>>>,
    tau: Vec<(f64, f64)>,
    probe: Vec<f64>,
    horizon: Option<usize>,
) -> PyResult<Criterion69> {
    let a = a.into_iter().map(dense).collect::<PyResult<Vec<_>>>()?;
    let p = p
        .into_iter()
        .map(|m| SymMatrix::new(dense(m)?).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let n = tau.len();
    let spec = Example69Spec::new(a, p, tau, None, None).map_err(err)?;
    let rep = check_criterion69(&spec, horizon.unwrap_or(n), &phase(probe)?).map_err(err)?;
    Ok(Criterion69 {
        series_partial: rep.series_partial,
        nondecreasing: rep.nondecreasing,
        ratio_bound_holds: rep.ratio_bound_holds,
        certified: matches!(rep.verdict, GrowthVerdict::CertifiedGrowth { .. }),
        q_trajectory: rep.q_trajectory,
    })
}

#[pymodule]
fn symsector_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBlockMap>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<Factorization>()?;
    m.add_class::<Expansion>()?;
    m.add_class::<Canonical>()?;
    m.add_class::<SequenceSummary>()?;
    m.add_class::<Criterion69>()?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(q, m)?)?;
    m.add_function(wrap_pyfunction!(factor, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(image_distances, m)?)?;
    m.add_function(wrap_pyfunction!(mc_inf_beta, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(order_compare, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(limit, m)?)?;
    m.add_function(wrap_pyfunction!(criterion69, m)?)?;
    Ok(())
}
