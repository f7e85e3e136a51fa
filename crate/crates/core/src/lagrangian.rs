//! Lagrangian subspaces and the space of those strictly inside a sector.
//!
//! A Lagrangian subspace transversal to `V2 = {0} x R^d` is the graph
//! `{(xi, U xi)}` of a symmetric `U`; it lies strictly inside the standard
//! sector iff `U` is positive definite. On such subspaces the partial order is
//! the order of symmetric matrices and the distance is
//! `½ max |ln λ_i(Ua^{-1/2} Ub Ua^{-1/2})|`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, SectorError};
use crate::factorization::q_isometry;
use crate::linalg::{
    checked_inverse, classify_values, condition_number, max_abs, psd_sqrt, sym_eigen,
    SymMatrix, COND_LIMIT, DEFINITENESS_TOL,
};
use crate::sampling::{gaussian_vector, rng_from_seed};
use crate::symplectic::{j_matrix, omega_stacked, q_stacked, BlockMap, PhaseVector};

/// Isotropy tolerance for basis representations, relative to `‖b‖²`.
const ISOTROPY_TOL: f64 = 1e-10;

/// A `d`-dimensional Lagrangian subspace of `R^d x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum LagrangianSubspace {
    /// `{(xi, U xi)}`.
    Graph(SymMatrix),
    /// Column span of a `2d x d` matrix; used when the subspace is not a graph
    /// over `V1`. Columns are orthonormal.
    Basis(DMatrix<f64>),
}

impl LagrangianSubspace {
    /// Graph of a symmetric matrix.
    pub fn from_graph(u: SymMatrix) -> Self {
        LagrangianSubspace::Graph(u)
    }

    /// Graph of a raw matrix, rejecting nonsymmetric input.
    pub fn from_graph_matrix(u: DMatrix<f64>) -> Result<Self> {
        Ok(LagrangianSubspace::Graph(SymMatrix::new(u)?))
    }

    /// Column span of `b`. The result is stored as a graph whenever the
    /// subspace is transversal to `V2`.
    pub fn from_basis(b: DMatrix<f64>) -> Result<Self> {
        if b.nrows() != 2 * b.ncols() {
            return Err(SectorError::DimensionMismatch {
                expected: 2 * b.ncols(),
                got: b.nrows(),
            });
        }
        let d = b.ncols();
        let cond = condition_number(&b);
        if !(cond <= COND_LIMIT) {
            return Err(SectorError::NotLagrangian { defect: f64::INFINITY });
        }
        let scale = max_abs(&b);
        let gram = b.transpose() * j_matrix(d) * &b;
        let defect = max_abs(&gram);
        if defect > ISOTROPY_TOL * (1.0 + scale * scale) {
            return Err(SectorError::NotLagrangian { defect });
        }
        Ok(Self::canonical(&b))
    }

    /// Canonical representation of the span of an isotropic `2d x d` matrix.
    fn canonical(b: &DMatrix<f64>) -> Self {
        let d = b.ncols();
        let top = b.rows(0, d).into_owned();
        let bottom = b.rows(d, d).into_owned();
        match checked_inverse(&top, COND_LIMIT) {
            Ok(inv) => LagrangianSubspace::Graph(SymMatrix::from_symmetric_part(&(bottom * inv))),
            Err(_) => LagrangianSubspace::Basis(b.clone().qr().q()),
        }
    }

    /// `V1 = R^d x {0}`.
    pub fn v1(d: usize) -> Self {
        LagrangianSubspace::Graph(SymMatrix::zeros(d))
    }

    /// `V2 = {0} x R^d`.
    pub fn v2(d: usize) -> Self {
        let mut b = DMatrix::zeros(2 * d, d);
        b.view_mut((d, 0), (d, d)).fill_with_identity();
        LagrangianSubspace::Basis(b)
    }

    pub fn dim(&self) -> usize {
        match self {
            LagrangianSubspace::Graph(u) => u.dim(),
            LagrangianSubspace::Basis(b) => b.ncols(),
        }
    }

    /// A `2d x d` matrix whose columns span the subspace.
    pub fn basis(&self) -> DMatrix<f64> {
        match self {
            LagrangianSubspace::Graph(u) => {
                let d = u.dim();
                let mut b = DMatrix::zeros(2 * d, d);
                b.view_mut((0, 0), (d, d)).fill_with_identity();
                b.view_mut((d, 0), (d, d)).copy_from(u.as_matrix());
                b
            }
            LagrangianSubspace::Basis(b) => b.clone(),
        }
    }

    pub fn graph(&self) -> Option<&SymMatrix> {
        match self {
            LagrangianSubspace::Graph(u) => Some(u),
            LagrangianSubspace::Basis(_) => None,
        }
    }

    /// Whether the subspace lies strictly inside the standard sector, i.e. is
    /// the graph of a positive definite matrix.
    pub fn in_lag_c(&self) -> bool {
        self.graph()
            .is_some_and(|u| classify_values(&u.eigenvalues(), DEFINITENESS_TOL).is_pd())
    }

    /// Image under a linear map, in canonical representation.
    pub fn image(&self, l: &BlockMap) -> Result<Self> {
        if l.dim() != self.dim() {
            return Err(SectorError::DimensionMismatch {
                expected: self.dim(),
                got: l.dim(),
            });
        }
        Self::from_basis(l.matrix() * self.basis())
    }

    /// The vector of the subspace over `xi`, for graph subspaces.
    pub fn lift(&self, xi: &DVector<f64>) -> Option<PhaseVector> {
        self.graph().map(|u| PhaseVector {
            xi: xi.clone(),
            eta: u.as_matrix() * xi,
        })
    }

    fn graph_in_lag_c(&self) -> Result<&SymMatrix> {
        match self.graph() {
            Some(u) if self.in_lag_c() => Ok(u),
            _ => Err(SectorError::NotInLagC),
        }
    }
}

/// Graph subspace `{(xi, U xi)}`.
pub fn subspace_from_graph(u: SymMatrix) -> LagrangianSubspace {
    LagrangianSubspace::from_graph(u)
}

/// `Z_u = {(xi, e^u xi)}` in dimension `d`.
pub fn z_subspace(d: usize, u: f64) -> LagrangianSubspace {
    LagrangianSubspace::Graph(SymMatrix::scaled_identity(d, u.exp()))
}

/// An ordered pair of transversal Lagrangian subspaces and its quadratic form.
#[derive(Debug, Clone)]
pub struct Sector {
    pub e1: LagrangianSubspace,
    pub e2: LagrangianSubspace,
    b1: DMatrix<f64>,
    b2: DMatrix<f64>,
    /// Inverse of `[B1 B2]`: maps `w` to its coordinates along `e1` and `e2`.
    coords: DMatrix<f64>,
    /// Condition number of `[B1 B2]`, the transversality certificate.
    pub cond: f64,
}

impl Sector {
    pub fn new(e1: LagrangianSubspace, e2: LagrangianSubspace) -> Result<Self> {
        if e1.dim() != e2.dim() {
            return Err(SectorError::DimensionMismatch {
                expected: e1.dim(),
                got: e2.dim(),
            });
        }
        let d = e1.dim();
        let b1 = e1.basis();
        let b2 = e2.basis();
        let mut stacked = DMatrix::zeros(2 * d, 2 * d);
        stacked.view_mut((0, 0), (2 * d, d)).copy_from(&b1);
        stacked.view_mut((0, d), (2 * d, d)).copy_from(&b2);
        let cond = condition_number(&stacked);
        let coords = checked_inverse(&stacked, COND_LIMIT)
            .map_err(|cond| SectorError::NotTransversal { cond })?;
        Ok(Sector {
            e1,
            e2,
            b1,
            b2,
            coords,
            cond,
        })
    }

    /// `C(V1, V2) = {<xi, eta> >= 0}`.
    pub fn standard(d: usize) -> Self {
        Self::new(LagrangianSubspace::v1(d), LagrangianSubspace::v2(d))
            .expect("V1 and V2 are transversal")
    }

    /// The complementary sector `C(V2, V1)`.
    pub fn complementary(&self) -> Self {
        Self::new(self.e2.clone(), self.e1.clone()).expect("transversality is symmetric")
    }

    pub fn dim(&self) -> usize {
        self.e1.dim()
    }

    /// Splits `w = v1 + v2` with `v_i` in `e_i`.
    pub fn split(&self, w: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let d = self.dim();
        let c = &self.coords * w;
        (&self.b1 * c.rows(0, d), &self.b2 * c.rows(d, d))
    }

    pub(crate) fn q_stacked(&self, w: &DVector<f64>) -> f64 {
        let (v1, v2) = self.split(w);
        omega_stacked(&v1, &v2)
    }

    /// `Q(w) = omega(v1, v2)` for the unique split `w = v1 + v2`.
    pub fn q(&self, w: &PhaseVector) -> Result<f64> {
        if w.dim() != self.dim() {
            return Err(SectorError::DimensionMismatch {
                expected: self.dim(),
                got: w.dim(),
            });
        }
        Ok(self.q_stacked(&w.stacked()))
    }

    pub fn contains(&self, w: &PhaseVector, tol: f64) -> Result<bool> {
        Ok(self.q(w)? >= -tol * w.norm().powi(2))
    }

    pub(crate) fn basis_pair(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.b1, &self.b2)
    }
}

/// Quadratic form of the sector `s` evaluated at `w`.
pub fn general_sector_q(s: &Sector, w: &PhaseVector) -> Result<f64> {
    s.q(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubspaceOrder {
    Less,
    LessOrEqual,
    Equal,
    GreaterOrEqual,
    Greater,
    Incomparable,
}

impl SubspaceOrder {
    /// `ea <= eb` in the partial order.
    pub fn is_le(self) -> bool {
        matches!(
            self,
            SubspaceOrder::Less | SubspaceOrder::LessOrEqual | SubspaceOrder::Equal
        )
    }
}

/// Compares two subspaces of `Lag(C)` through the definiteness of `Ub - Ua`.
pub fn order_compare(ea: &LagrangianSubspace, eb: &LagrangianSubspace) -> Result<SubspaceOrder> {
    let ua = ea.graph_in_lag_c()?;
    let ub = eb.graph_in_lag_c()?;
    check_dims(ua.dim(), ub.dim())?;
    let diff = ub.as_matrix() - ua.as_matrix();
    let vals = sym_eigen(&diff).values;
    let scale = 1.0 + max_abs(ua.as_matrix()).max(max_abs(ub.as_matrix()));
    let tau = DEFINITENESS_TOL * scale;
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    Ok(if lo.abs() <= tau && hi.abs() <= tau {
        SubspaceOrder::Equal
    } else if lo > tau {
        SubspaceOrder::Less
    } else if lo >= -tau {
        SubspaceOrder::LessOrEqual
    } else if hi < -tau {
        SubspaceOrder::Greater
    } else if hi <= tau {
        SubspaceOrder::GreaterOrEqual
    } else {
        SubspaceOrder::Incomparable
    })
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(SectorError::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// Eigenvalues of the pencil `(Ub, Ua)`, ascending. `Ua` must be PD.
pub(crate) fn pencil_eigenvalues(ua: &SymMatrix, ub: &SymMatrix) -> Result<Vec<f64>> {
    let chol = ua
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(SectorError::NotInLagC)?;
    let l = chol.l();
    let l_inv_ub = l
        .solve_lower_triangular(ub.as_matrix())
        .ok_or(SectorError::NotInLagC)?;
    let m = l
        .solve_lower_triangular(&l_inv_ub.transpose())
        .ok_or(SectorError::NotInLagC)?;
    Ok(sym_eigen(&SymMatrix::from_symmetric_part(&m).into_inner()).values)
}

fn lex_cmp(a: &DMatrix<f64>, b: &DMatrix<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// `d(Ea, Eb) = ½ max_i |ln λ_i|` over the eigenvalues of `Ua^{-1/2} Ub Ua^{-1/2}`.
pub fn distance(ea: &LagrangianSubspace, eb: &LagrangianSubspace) -> Result<f64> {
    let ua = ea.graph_in_lag_c()?;
    let ub = eb.graph_in_lag_c()?;
    check_dims(ua.dim(), ub.dim())?;
    if ua == ub {
        return Ok(0.0);
    }
    // a fixed argument order keeps the result exactly symmetric
    let (first, second) = if lex_cmp(ua.as_matrix(), ub.as_matrix()).is_le() {
        (ua, ub)
    } else {
        (ub, ua)
    };
    let vals = pencil_eigenvalues(first, second)?;
    if vals.first().is_none_or(|&x| x <= 0.0) {
        return Err(SectorError::NotInLagC);
    }
    Ok(0.5 * vals.iter().map(|x| x.ln().abs()).fold(0.0, f64::max))
}

/// Induced action on graph matrices, `U ↦ (C + DU)(A + BU)⁻¹`. Also accepts
/// basis-represented subspaces; the image must be a graph.
pub fn mobius(l: &BlockMap, e: &LagrangianSubspace) -> Result<LagrangianSubspace> {
    check_dims(e.dim(), l.dim())?;
    let d = l.dim();
    let img = l.matrix() * e.basis();
    let top = img.rows(0, d).into_owned();
    let bottom = img.rows(d, d).into_owned();
    let inv = checked_inverse(&top, COND_LIMIT).map_err(|cond| SectorError::ImageNotGraph { cond })?;
    Ok(LagrangianSubspace::Graph(SymMatrix::from_symmetric_part(
        &(bottom * inv),
    )))
}

/// Outcome of the sector-inclusion predicates for a triple `(e1, e2, e)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InclusionPredicates {
    /// `e1 < e2`.
    pub order_less: bool,
    /// Sampled containment `C(e1, e2) ⊂ C`.
    pub sector_in_c: bool,
    /// `e1 <= e <= e2`.
    pub e_between: bool,
    /// Sampled containment `e ⊂ C(e1, e2)`.
    pub e_in_sector: bool,
}

pub const INCLUSION_SAMPLES: usize = 10_000;
/// Relative slack of the sampled membership tests, scaled by `‖w‖²`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

pub fn inclusion_predicates(
    e1: &LagrangianSubspace,
    e2: &LagrangianSubspace,
    e: &LagrangianSubspace,
) -> Result<InclusionPredicates> {
    inclusion_predicates_with(e1, e2, e, INCLUSION_SAMPLES, 0)
}

/// Evaluates the order predicates exactly and the containment predicates on a
/// deterministic sample: all `±` basis rays plus `samples` random vectors.
pub fn inclusion_predicates_with(
    e1: &LagrangianSubspace,
    e2: &LagrangianSubspace,
    e: &LagrangianSubspace,
    samples: usize,
    seed: u64,
) -> Result<InclusionPredicates> {
    for sub in [e1, e2, e] {
        sub.graph_in_lag_c()?;
    }
    let sector = Sector::new(e1.clone(), e2.clone())?;
    let order_less = order_compare(e1, e2)? == SubspaceOrder::Less;
    let e_between = order_compare(e1, e)?.is_le() && order_compare(e, e2)?.is_le();

    let standard_q = |w: &DVector<f64>| q_stacked(w) >= -MEMBERSHIP_TOL * w.norm_squared();
    let sector_in_c = sample_sector(&sector, samples, seed).all(|w| standard_q(&w));
    let e_in_sector = sample_subspace(e, samples, seed.wrapping_add(1))
        .all(|w| sector.q_stacked(&w) >= -MEMBERSHIP_TOL * w.norm_squared());
    Ok(InclusionPredicates {
        order_less,
        sector_in_c,
        e_between,
        e_in_sector,
    })
}

/// Deterministic sample of vectors of the sector: `±` basis rays of both sides
/// followed by random `v1 + v2` with `omega(v1, v2) >= 0`.
pub fn sample_sector(
    sector: &Sector,
    samples: usize,
    seed: u64,
) -> impl Iterator<Item = DVector<f64>> + '_ {
    let (b1, b2) = sector.basis_pair();
    let d = sector.dim();
    let rays = (0..d).flat_map(move |k| {
        let c1 = b1.column(k).into_owned();
        let c2 = b2.column(k).into_owned();
        [c1.clone(), -c1, c2.clone(), -c2]
    });
    let mut rng = rng_from_seed(seed);
    let random = (0..samples).map(move |_| {
        let v1 = b1 * gaussian_vector(&mut rng, d);
        let v2 = b2 * gaussian_vector(&mut rng, d);
        if omega_stacked(&v1, &v2) >= 0.0 {
            v1 + v2
        } else {
            v1 - v2
        }
    });
    rays.chain(random)
}

/// Deterministic sample of vectors of a subspace: `±` basis columns followed by
/// random combinations.
pub fn sample_subspace(
    e: &LagrangianSubspace,
    samples: usize,
    seed: u64,
) -> impl Iterator<Item = DVector<f64>> {
    let b = e.basis();
    let d = e.dim();
    let rays: Vec<DVector<f64>> = (0..d)
        .flat_map(|k| {
            let c = b.column(k).into_owned();
            [c.clone(), -c]
        })
        .collect();
    let mut rng = rng_from_seed(seed);
    let random = (0..samples).map(move |_| &b * gaussian_vector(&mut rng, d));
    rays.into_iter().chain(random)
}

/// `C_ρ = {‖eta‖ <= ρ ‖xi‖}`.
pub fn in_c_rho(w: &PhaseVector, rho: f64, tol: f64) -> bool {
    w.eta.norm() <= rho * w.xi.norm() + tol
}

/// `u = ln((1 + ρ²) / (1 - ρ²))`, the half-width of `C(Z_{-u}, Z_u)` matched
/// to `C_ρ`.
pub fn rho_half_width(rho: f64) -> f64 {
    ((1.0 + rho * rho) / (1.0 - rho * rho)).ln()
}

/// The symplectic change of coordinates
/// `xi' = (ρ^{-1/2} xi - ρ^{1/2} eta)/√2`, `eta' = (ρ^{-1/2} xi + ρ^{1/2} eta)/√2`,
/// which sends `C_{1/ρ}` onto the standard sector and `C_ρ` onto
/// `C(Z_{-u}, Z_u)`.
pub fn rho_coordinate_change(d: usize, rho: f64) -> BlockMap {
    let a = rho.powf(-0.5) / std::f64::consts::SQRT_2;
    let b = rho.sqrt() / std::f64::consts::SQRT_2;
    let i = DMatrix::<f64>::identity(d, d);
    BlockMap::from_blocks(&(&i * a), &(&i * -b), &(&i * a), &(&i * b))
        .expect("square blocks of equal size")
}

/// Symplectic map sending the standard sector onto `C_{1/ρ}` and `C(e1, e2)`
/// into `C_ρ`. It is the Q-isometry taking `e1` to `Z_{-u}` followed by the
/// inverse of [`rho_coordinate_change`].
pub fn normalize_to_rho(
    e1: &LagrangianSubspace,
    e2: &LagrangianSubspace,
    rho: f64,
) -> Result<BlockMap> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(SectorError::InvalidParameter(format!(
            "rho must lie in (0, 1), got {rho}"
        )));
    }
    let u1 = e1.graph_in_lag_c()?;
    e2.graph_in_lag_c()?;
    if order_compare(e1, e2)? != SubspaceOrder::Less {
        return Err(SectorError::NotOrdered);
    }
    let u = rho_half_width(rho);
    let dist = distance(e1, e2)?;
    if dist > u * (1.0 + 1e-12) {
        return Err(SectorError::DistanceTooLarge {
            distance: dist,
            bound: u,
        });
    }
    let a = psd_sqrt(u1)?.into_inner() * (0.5 * u).exp();
    let g = q_isometry(&a)?;
    let l_rho = rho_coordinate_change(u1.dim(), rho);
    Ok(&l_rho.symplectic_inverse() * &g)
}
