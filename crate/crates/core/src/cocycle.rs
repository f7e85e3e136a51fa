//! Products of monotone maps and finite-horizon growth certificates.
//!
//! For a sequence `L_1, L_2, ...` with products `Lⁿ = L_n ⋯ L_1`, growth of the
//! least expansion `σ(Lⁿ)` is equivalent to the nested pull-backs
//! `(Lⁿ)⁻¹ C'` of the complementary sector shrinking to a single Lagrangian
//! subspace; the diameter at step `n` is `ln((σ² + 1)/(σ² - 1))`. Everything
//! here is evaluated at a finite horizon and reported as `CertifiedGrowth` or
//! `NoVerdict`, never as a statement about limits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, SectorError};
use crate::expansion::{complementary_conjugate, expansion_from_factors, image_distance_from_sigma};
use crate::factorization::{
    canonical_core, factor_qpr_with, lower_shear, monotonicity_class_with, q_isometry,
    upper_shear,
};
use crate::lagrangian::{distance, mobius, LagrangianSubspace};
use crate::linalg::{classify_values, operator_norm, SymMatrix, Tolerances};
use crate::symplectic::{q_standard, BlockMap, PhaseVector};

/// Default threshold on `σ(Lⁿ)` for a growth certificate.
pub const GROWTH_THRESHOLD: f64 = 10.0;
/// Products with `σ` above this value stop the analysis: the nested diameters
/// (about `2/σ²`) are then at the level of rounding noise.
pub const CONDITIONING_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Explicit,
    Example69,
}

/// A finite sequence of monotone symplectic maps of a common dimension.
#[derive(Debug, Clone)]
pub struct MapSequence {
    maps: Vec<BlockMap>,
    pub provenance: Provenance,
}

impl MapSequence {
    pub fn new(maps: Vec<BlockMap>) -> Result<Self> {
        Self::with_provenance(maps, Provenance::Explicit)
    }

    fn with_provenance(maps: Vec<BlockMap>, provenance: Provenance) -> Result<Self> {
        let tol = Tolerances::default();
        let d = maps.first().map_or(0, BlockMap::dim);
        for (index, l) in maps.iter().enumerate() {
            if l.dim() != d {
                return Err(SectorError::DimensionMismatch {
                    expected: d,
                    got: l.dim(),
                });
            }
            let monotone = monotonicity_class_with(l, &tol).is_ok_and(|c| c.is_monotone());
            if !monotone {
                return Err(SectorError::NotMonotoneElement { index });
            }
        }
        Ok(MapSequence { maps, provenance })
    }

    /// `n` copies of `l`.
    pub fn constant(l: BlockMap, n: usize) -> Result<Self> {
        Self::new(vec![l; n])
    }

    pub fn maps(&self) -> &[BlockMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps.first().map_or(0, BlockMap::dim)
    }

    /// The sequence without its first `k` maps.
    pub fn skip(&self, k: usize) -> MapSequence {
        MapSequence {
            maps: self.maps[k.min(self.maps.len())..].to_vec(),
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub growth_threshold: f64,
    pub conditioning_limit: f64,
    pub tol: Tolerances,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            growth_threshold: GROWTH_THRESHOLD,
            conditioning_limit: CONDITIONING_LIMIT,
            tol: Tolerances::default(),
        }
    }
}

/// Diagnostics of the product `Lⁿ`.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub n: usize,
    pub sigma_n: f64,
    pub t1_n: f64,
    /// Diameter of the nested pulled-back sector; `+inf` while `σ(Lⁿ) = 1`.
    pub diameter_n: f64,
    pub image_v1: LagrangianSubspace,
    pub image_v2: LagrangianSubspace,
    /// `Q(Lⁿ w)` for each probe, in input order.
    pub q_probes: Vec<f64>,
    /// Condition number of the `A` block of `Lⁿ`.
    pub cond_a: f64,
}

#[derive(Debug, Clone)]
pub struct SequenceFlags {
    /// First `n` with `σ(Lⁿ) > 1 + τ`.
    pub strict_at_step: Option<usize>,
    /// `σ` at the last analyzed step reached the growth threshold.
    pub certified_growth: bool,
    pub limit_estimate: Option<LimitEstimate>,
    pub limit_diameter_bound: f64,
    /// Step at which `σ` exceeded the conditioning limit.
    pub conditioning_stop: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SequenceReport {
    pub steps: Vec<StepReport>,
    pub flags: SequenceFlags,
}

impl SequenceReport {
    pub fn verdict(&self, threshold: f64) -> GrowthVerdict {
        match self.steps.last() {
            Some(s) if self.flags.certified_growth => GrowthVerdict::CertifiedGrowth {
                threshold,
                n: s.n,
            },
            _ => GrowthVerdict::NoVerdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GrowthVerdict {
    CertifiedGrowth { threshold: f64, n: usize },
    NoVerdict,
}

fn check_probes(probes: &[PhaseVector], d: usize) -> Result<()> {
    for w in probes {
        if w.dim() != d {
            return Err(SectorError::DimensionMismatch {
                expected: d,
                got: w.dim(),
            });
        }
        if q_standard(w) < 0.0 || w.norm() == 0.0 {
            return Err(SectorError::InvalidParameter(
                "probes must be nonzero vectors of the sector".into(),
            ));
        }
    }
    Ok(())
}

pub fn analyze_sequence(
    seq: &MapSequence,
    n_max: usize,
    probes: &[PhaseVector],
) -> Result<SequenceReport> {
    analyze_sequence_with(seq, n_max, probes, &AnalyzeOptions::default())
}

/// Accumulates `Lⁿ` for `n = 1..=min(n_max, len)` and records per-step
/// expansion, diameters, images of `V1`, `V2` and probe trajectories.
pub fn analyze_sequence_with(
    seq: &MapSequence,
    n_max: usize,
    probes: &[PhaseVector],
    opts: &AnalyzeOptions,
) -> Result<SequenceReport> {
    if n_max == 0 || seq.is_empty() {
        return Err(SectorError::InvalidParameter(
            "need at least one map and n_max >= 1".into(),
        ));
    }
    let d = seq.dim();
    check_probes(probes, d)?;
    let horizon = n_max.min(seq.len());
    let strict_tol = opts.tol.definiteness;

    let mut product = BlockMap::identity(d);
    let mut trajectories: Vec<PhaseVector> = probes.to_vec();
    let mut steps = Vec::with_capacity(horizon);
    let mut strict_at_step = None;
    let mut conditioning_stop = None;

    for (idx, l) in seq.maps().iter().take(horizon).enumerate() {
        let n = idx + 1;
        product = l * &product;
        let f = factor_qpr_with(&product, &opts.tol)
            .map_err(|_| SectorError::NotMonotoneElement { index: idx })?;
        let exp = expansion_from_factors(&f, &opts.tol)
            .map_err(|_| SectorError::NotMonotoneElement { index: idx })?;
        for w in trajectories.iter_mut() {
            *w = l.apply(w);
        }
        let strict = exp.sigma > 1.0 + strict_tol;
        if strict && strict_at_step.is_none() {
            strict_at_step = Some(n);
        }
        let diameter_n = if strict {
            image_distance_from_sigma(exp.sigma)
        } else {
            f64::INFINITY
        };
        steps.push(StepReport {
            n,
            sigma_n: exp.sigma,
            t1_n: exp.t1,
            diameter_n,
            image_v1: LagrangianSubspace::v1(d).image(&product)?,
            image_v2: LagrangianSubspace::v2(d).image(&product)?,
            q_probes: trajectories.iter().map(q_standard).collect(),
            cond_a: f.cond_a,
        });
        if exp.sigma > opts.conditioning_limit {
            conditioning_stop = Some(n);
            break;
        }
    }

    let last = steps.last().expect("at least one step");
    let final_sigma = last.sigma_n;
    let limit_estimate = if final_sigma > 1.0 + strict_tol {
        Some(limit_from_product(&product, last.n, final_sigma, conditioning_stop.is_some())?)
    } else {
        None
    };
    let flags = SequenceFlags {
        strict_at_step,
        certified_growth: final_sigma >= opts.growth_threshold,
        limit_diameter_bound: image_distance_from_sigma(final_sigma),
        limit_estimate,
        conditioning_stop,
    };
    Ok(SequenceReport { steps, flags })
}

/// Midpoint estimate of the subspace the pulled-back complementary sectors
/// shrink to.
#[derive(Debug, Clone)]
pub struct LimitEstimate {
    /// Estimate in the original coordinates; a graph of a negative definite
    /// matrix, strictly inside the complementary sector.
    pub estimate: LagrangianSubspace,
    /// Graph matrices of the bounding subspaces and of the estimate after the
    /// rotation `[[0, -I], [I, 0]]` that carries the complementary sector onto
    /// the standard one. There `lower < estimate < upper`.
    pub lower: SymMatrix,
    pub upper: SymMatrix,
    pub rotated: SymMatrix,
    /// Diameter of the nested sector at step `n`; the limit lies within it.
    pub bound: f64,
    pub n: usize,
    pub sigma: f64,
    pub conditioning_stop: bool,
}

impl LimitEstimate {
    /// Distance between two estimates in the metric of the complementary sector.
    pub fn distance_to(&self, other: &LimitEstimate) -> Result<f64> {
        distance(
            &LagrangianSubspace::from_graph(self.rotated.clone()),
            &LagrangianSubspace::from_graph(other.rotated.clone()),
        )
    }
}

fn limit_from_product(
    product: &BlockMap,
    n: usize,
    sigma: f64,
    conditioning_stop: bool,
) -> Result<LimitEstimate> {
    let d = product.dim();
    // rotated pull-back of C' is the image of C under the conjugate map
    let conj = complementary_conjugate(product);
    let lower = mobius(&conj, &LagrangianSubspace::v1(d))?;
    let upper = mobius(&conj, &LagrangianSubspace::v2(d))?;
    let lower = lower.graph().expect("mobius returns graphs").clone();
    let upper = upper.graph().expect("mobius returns graphs").clone();
    let rotated = SymMatrix::from_symmetric_part(&((lower.as_matrix() + upper.as_matrix()) * 0.5));
    let estimate = LagrangianSubspace::from_graph(rotated.clone()).image(&BlockMap::rotation(d))?;
    Ok(LimitEstimate {
        estimate,
        lower,
        upper,
        rotated,
        bound: image_distance_from_sigma(sigma),
        n,
        sigma,
        conditioning_stop,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LimitOptions {
    /// Prepend the strictly monotone core `[[I, I], [I, 2I]]` before the
    /// sequence, for sequences whose early products are not strictly monotone.
    pub prepend_core: bool,
    pub conditioning_limit: f64,
    pub tol: Tolerances,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            prepend_core: false,
            conditioning_limit: CONDITIONING_LIMIT,
            tol: Tolerances::default(),
        }
    }
}

pub fn limit_subspace(seq: &MapSequence, n_max: usize) -> Result<LimitEstimate> {
    limit_subspace_with(seq, n_max, &LimitOptions::default())
}

/// Estimate of the single Lagrangian subspace in the intersection of the
/// sectors `(Lⁿ)⁻¹ C'`, with the diameter bound at the last analyzed step.
pub fn limit_subspace_with(
    seq: &MapSequence,
    n_max: usize,
    opts: &LimitOptions,
) -> Result<LimitEstimate> {
    if n_max == 0 || seq.is_empty() {
        return Err(SectorError::InvalidParameter(
            "need at least one map and n_max >= 1".into(),
        ));
    }
    let d = seq.dim();
    let mut product = if opts.prepend_core {
        canonical_core(&vec![1.0; d])
    } else {
        BlockMap::identity(d)
    };
    let mut sigma = 1.0;
    let mut n = 0;
    let mut stopped = false;
    for (idx, l) in seq.maps().iter().take(n_max).enumerate() {
        product = l * &product;
        n = idx + 1;
        let f = factor_qpr_with(&product, &opts.tol)
            .map_err(|_| SectorError::NotMonotoneElement { index: idx })?;
        sigma = expansion_from_factors(&f, &opts.tol)?.sigma;
        if sigma > opts.conditioning_limit {
            stopped = true;
            break;
        }
    }
    if sigma <= 1.0 + opts.tol.definiteness {
        return Err(SectorError::NoContraction { sigma });
    }
    limit_from_product(&product, n, sigma, stopped)
}

/// Data of the family `L_n = diag(A_n, A_n^{-T}) [[I, 0], [P_n, I]] [[I, R_n], [0, I]]`
/// with nonexpanding `A_n`, `P_n >= 0` and `τ_n I <= R_n <= τ'_n I`.
#[derive(Debug, Clone)]
pub struct Example69Spec {
    pub a_list: Vec<DMatrix<f64>>,
    pub p_list: Vec<SymMatrix>,
    pub tau_list: Vec<(f64, f64)>,
    pub c_bound: f64,
    pub r_list: Vec<SymMatrix>,
}

const SPEC_TOL: f64 = 1e-12;

impl Example69Spec {
    /// Validates the data. Without an explicit `c_bound` the largest ratio
    /// `τ'_n / τ_n` is used. Without explicit `R_n`, each `R_n` is diagonal
    /// with entries evenly spaced from `τ_n` to `τ'_n`.
    pub fn new(
        a_list: Vec<DMatrix<f64>>,
        p_list: Vec<SymMatrix>,
        tau_list: Vec<(f64, f64)>,
        c_bound: Option<f64>,
        r_list: Option<Vec<SymMatrix>>,
    ) -> Result<Self> {
        let n = tau_list.len();
        if a_list.len() != n || p_list.len() != n {
            return Err(SectorError::SpecViolation(format!(
                "list lengths differ: A {}, P {}, tau {}",
                a_list.len(),
                p_list.len(),
                n
            )));
        }
        if n == 0 {
            return Err(SectorError::SpecViolation("empty specification".into()));
        }
        let d = a_list[0].nrows();
        for (k, (tau, tau_p)) in tau_list.iter().enumerate() {
            if !(*tau > 0.0 && tau <= tau_p && tau_p.is_finite()) {
                return Err(SectorError::SpecViolation(format!(
                    "step {}: need 0 < tau <= tau', got ({tau}, {tau_p})",
                    k + 1
                )));
            }
        }
        let max_ratio = tau_list.iter().map(|(t, tp)| tp / t).fold(1.0, f64::max);
        let c_bound = c_bound.unwrap_or(max_ratio);
        if max_ratio > c_bound * (1.0 + SPEC_TOL) {
            return Err(SectorError::SpecViolation(format!(
                "tau'/tau reaches {max_ratio}, above the bound {c_bound}"
            )));
        }
        for (k, a) in a_list.iter().enumerate() {
            if a.nrows() != d || a.ncols() != d {
                return Err(SectorError::SpecViolation(format!(
                    "step {}: A must be {d}x{d}",
                    k + 1
                )));
            }
            let norm = operator_norm(a);
            if norm > 1.0 + SPEC_TOL {
                return Err(SectorError::SpecViolation(format!(
                    "step {}: A is expanding (norm {norm})",
                    k + 1
                )));
            }
        }
        for (k, p) in p_list.iter().enumerate() {
            if p.dim() != d || !classify_values(&p.eigenvalues(), crate::linalg::DEFINITENESS_TOL).is_psd() {
                return Err(SectorError::SpecViolation(format!(
                    "step {}: P must be a positive semidefinite {d}x{d} matrix",
                    k + 1
                )));
            }
        }
        let r_list = match r_list {
            Some(r) => r,
            None => tau_list
                .iter()
                .map(|&(t, tp)| {
                    let diag: Vec<f64> = (0..d)
                        .map(|i| {
                            if d == 1 {
                                t
                            } else {
                                t + (tp - t) * i as f64 / (d - 1) as f64
                            }
                        })
                        .collect();
                    SymMatrix::from_diagonal(&diag)
                })
                .collect(),
        };
        if r_list.len() != n {
            return Err(SectorError::SpecViolation("R list length differs".into()));
        }
        for (k, (r, (t, tp))) in r_list.iter().zip(&tau_list).enumerate() {
            let vals = r.eigenvalues();
            let slack = SPEC_TOL * (1.0 + tp);
            if r.dim() != d || vals[0] < t - slack || vals[d - 1] > tp + slack {
                return Err(SectorError::SpecViolation(format!(
                    "step {}: eigenvalues of R outside [{t}, {tp}]",
                    k + 1
                )));
            }
        }
        Ok(Example69Spec {
            a_list,
            p_list,
            tau_list,
            c_bound,
            r_list,
        })
    }

    /// Builds the data from a per-step generator; `f` receives `n = 1..=len`.
    pub fn from_fn(
        len: usize,
        c_bound: Option<f64>,
        mut f: impl FnMut(usize) -> (DMatrix<f64>, SymMatrix, (f64, f64)),
    ) -> Result<Self> {
        let mut a_list = Vec::with_capacity(len);
        let mut p_list = Vec::with_capacity(len);
        let mut tau_list = Vec::with_capacity(len);
        for n in 1..=len {
            let (a, p, tau) = f(n);
            a_list.push(a);
            p_list.push(p);
            tau_list.push(tau);
        }
        Self::new(a_list, p_list, tau_list, c_bound, None)
    }

    pub fn len(&self) -> usize {
        self.tau_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_list.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.a_list[0].nrows()
    }

    /// `L_n` for `n = 1..=len` (1-based).
    pub fn map(&self, n: usize) -> Result<BlockMap> {
        let k = n - 1;
        let d = self.dim();
        let iso = q_isometry(&self.a_list[k])
            .map_err(|_| SectorError::SpecViolation(format!("step {n}: A is singular")))?;
        Ok(&(&iso * &lower_shear(&self.p_list[k])) * &upper_shear(&self.r_list[k], d))
    }
}

pub fn build_example69(spec: &Example69Spec) -> Result<MapSequence> {
    let maps = (1..=spec.len())
        .map(|n| spec.map(n))
        .collect::<Result<Vec<_>>>()?;
    MapSequence::with_provenance(maps, Provenance::Example69)
}

/// Finite-horizon check of the growth criterion for the example family.
#[derive(Debug, Clone)]
pub struct Criterion69Report {
    /// `Σ_{n <= horizon} τ_n`.
    pub series_partial: f64,
    /// `Q(w_n)` for `n = 1..=horizon + 1`, `w_{n+1} = L_n w_n`.
    pub q_trajectory: Vec<f64>,
    pub nondecreasing: bool,
    /// Every step satisfies
    /// `q_{n+1}/q_n >= 1 + τ_n‖η_n‖ / (‖ξ_1‖ + Σ_{i<n} τ'_i‖η_i‖)`.
    pub ratio_bound_holds: bool,
    /// Smallest relative slack of that bound over all steps.
    pub min_ratio_slack: f64,
    pub verdict: GrowthVerdict,
}

/// Relative tolerance applied to the step-ratio inequality.
pub const RATIO_TOL: f64 = 1e-8;

pub fn check_criterion69(
    spec: &Example69Spec,
    horizon: usize,
    probe: &PhaseVector,
) -> Result<Criterion69Report> {
    check_criterion69_with(spec, horizon, probe, GROWTH_THRESHOLD)
}

/// Runs `w_{n+1} = L_n w_n` and checks monotonicity of `q_n = Q(w_n)` and the
/// step-ratio inequality. Growth is certified when both hold and
/// `q_{horizon+1} / q_1` reaches `threshold`.
pub fn check_criterion69_with(
    spec: &Example69Spec,
    horizon: usize,
    probe: &PhaseVector,
    threshold: f64,
) -> Result<Criterion69Report> {
    if probe.dim() != spec.dim() {
        return Err(SectorError::DimensionMismatch {
            expected: spec.dim(),
            got: probe.dim(),
        });
    }
    let q1 = q_standard(probe);
    if !(q1 > 0.0) {
        return Err(SectorError::ProbeOnBoundary { q: q1 });
    }
    if horizon == 0 || horizon > spec.len() {
        return Err(SectorError::InvalidParameter(format!(
            "horizon must lie in 1..={}",
            spec.len()
        )));
    }
    let xi1_norm = probe.xi.norm();
    let mut w = probe.clone();
    let mut q_trajectory = Vec::with_capacity(horizon + 1);
    q_trajectory.push(q1);
    let mut weighted_sum = 0.0; // Σ_{i<n} τ'_i ‖η_i‖
    let mut nondecreasing = true;
    let mut ratio_bound_holds = true;
    let mut min_ratio_slack = f64::INFINITY;
    for n in 1..=horizon {
        let (tau, tau_p) = spec.tau_list[n - 1];
        let q_n = *q_trajectory.last().expect("nonempty");
        let eta_norm = w.eta.norm();
        let lower = 1.0 + tau * eta_norm / (xi1_norm + weighted_sum);
        w = step69(spec, n, &w);
        let q_next = q_standard(&w);
        let ratio = q_next / q_n;
        let slack = (ratio - lower) / lower;
        min_ratio_slack = min_ratio_slack.min(slack);
        if slack < -RATIO_TOL {
            ratio_bound_holds = false;
        }
        if q_next < q_n {
            nondecreasing = false;
        }
        weighted_sum += tau_p * eta_norm;
        q_trajectory.push(q_next);
    }
    let series_partial = spec.tau_list[..horizon].iter().map(|t| t.0).sum();
    let growth = q_trajectory[horizon] / q1;
    let verdict = if nondecreasing && ratio_bound_holds && growth >= threshold {
        GrowthVerdict::CertifiedGrowth {
            threshold,
            n: horizon,
        }
    } else {
        GrowthVerdict::NoVerdict
    };
    Ok(Criterion69Report {
        series_partial,
        q_trajectory,
        nondecreasing,
        ratio_bound_holds,
        min_ratio_slack,
        verdict,
    })
}

/// `w ↦ L_n w` through the factors: `xi' = A(xi + Rη)`,
/// `η' = A^{-T}(P(xi + Rη) + η)`.
fn step69(spec: &Example69Spec, n: usize, w: &PhaseVector) -> PhaseVector {
    let k = n - 1;
    let a = &spec.a_list[k];
    let moved: DVector<f64> = &w.xi + spec.r_list[k].as_matrix() * &w.eta;
    let sheared: DVector<f64> = spec.p_list[k].as_matrix() * &moved + &w.eta;
    let eta = a
        .transpose()
        .lu()
        .solve(&sheared)
        .expect("A is invertible for a valid specification");
    PhaseVector { xi: a * moved, eta }
}

/// `Σ_{n=1}^{N} a_n / Σ_{i=0}^{n-1} a_i` for positive `a_0, ..., a_N`.
pub fn relative_increment_sum(a: &[f64]) -> Result<f64> {
    if a.len() < 2 || a.iter().any(|x| !(*x > 0.0)) {
        return Err(SectorError::InvalidParameter(
            "need at least two positive terms".into(),
        ));
    }
    let mut prefix = a[0];
    let mut total = 0.0;
    for &x in &a[1..] {
        total += x / prefix;
        prefix += x;
    }
    Ok(total)
}
