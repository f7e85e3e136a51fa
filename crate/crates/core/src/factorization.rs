//! Monotonicity of symplectic maps with respect to the standard sector.
//!
//! A symplectic map whose diagonal block `A` is invertible factors uniquely as
//!
//! ```text
//! L = [[A, 0], [0, A^{-T}]] · [[I, 0], [P, I]] · [[I, R], [0, I]]
//! ```
//!
//! with `P`, `R` symmetric. The map is monotone exactly when `P, R ≥ 0` and
//! strictly monotone exactly when `P, R > 0`. Strictly monotone maps are
//! conjugate by Q-isometries to `[[I, I], [T, I + T]]` with `T` diagonal.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, SectorError};
use crate::linalg::{
    asymmetry, checked_inverse, classify_values, condition_number, max_abs, psd_sqrt,
    relative_error, Definiteness, SymMatrix, Tolerances,
};
use crate::symplectic::{is_symplectic, BlockMap};

/// The triple `(A, P, R)` of the left factorization of a symplectic map.
#[derive(Debug, Clone)]
pub struct QprFactorization {
    pub a: DMatrix<f64>,
    pub p: SymMatrix,
    pub r: SymMatrix,
    pub p_class: Definiteness,
    pub r_class: Definiteness,
    /// 2-norm condition number of `A`; `P` and `R` lose accuracy roughly in
    /// proportion to it.
    pub cond_a: f64,
}

impl QprFactorization {
    /// Multiplies the three factors back together.
    pub fn reassemble(&self) -> BlockMap {
        let d = self.a.nrows();
        let iso = q_isometry(&self.a).expect("A was inverted during factorization");
        &(&iso * &lower_shear(&self.p)) * &upper_shear(&self.r, d)
    }

    pub fn monotone_class(&self) -> MonotoneClass {
        if self.p_class.is_pd() && self.r_class.is_pd() {
            MonotoneClass::StrictlyMonotone
        } else if self.p_class.is_psd() && self.r_class.is_psd() {
            MonotoneClass::Monotone
        } else {
            MonotoneClass::NotMonotone
        }
    }
}

/// `[[I, 0], [P, I]]`
pub fn lower_shear(p: &SymMatrix) -> BlockMap {
    let d = p.dim();
    let i = DMatrix::identity(d, d);
    BlockMap::from_blocks(&i, &DMatrix::zeros(d, d), p.as_matrix(), &i)
        .expect("square blocks of equal size")
}

/// `[[I, R], [0, I]]`
pub fn upper_shear(r: &SymMatrix, d: usize) -> BlockMap {
    let i = DMatrix::identity(d, d);
    BlockMap::from_blocks(&i, r.as_matrix(), &DMatrix::zeros(d, d), &i)
        .expect("square blocks of equal size")
}

/// Monotonicity class with respect to the standard sector, ordered from
/// weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum MonotoneClass {
    NotMonotone,
    Monotone,
    StrictlyMonotone,
}

impl MonotoneClass {
    pub fn is_monotone(self) -> bool {
        self >= MonotoneClass::Monotone
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MonotoneClass::NotMonotone => "NotMonotone",
            MonotoneClass::Monotone => "Monotone",
            MonotoneClass::StrictlyMonotone => "StrictlyMonotone",
        }
    }
}

pub fn factor_qpr(l: &BlockMap) -> Result<QprFactorization> {
    factor_qpr_with(l, &Tolerances::default())
}

/// Computes `R = A⁻¹B` and `P = AᵀC`.
pub fn factor_qpr_with(l: &BlockMap, tol: &Tolerances) -> Result<QprFactorization> {
    if !is_symplectic(l, tol.symplectic) {
        return Err(SectorError::NotSymplectic {
            defect: l.symplectic_defect(),
        });
    }
    let a = l.a();
    let a_inv = checked_inverse(&a, tol.cond_limit)
        .map_err(|cond| SectorError::BlockSingular { block: 'A', cond })?;
    let cond_a = condition_number(&a);
    let cond_d = condition_number(&l.d_block());
    if !(cond_d <= tol.cond_limit) {
        return Err(SectorError::BlockSingular {
            block: 'D',
            cond: cond_d,
        });
    }
    let r_raw = &a_inv * l.b();
    let p_raw = a.transpose() * l.c();
    for m in [&p_raw, &r_raw] {
        let asym = asymmetry(m);
        if asym > tol.symmetry * (1.0 + max_abs(m)) {
            return Err(SectorError::NotSymplectic { defect: asym });
        }
    }
    let p = SymMatrix::from_symmetric_part(&p_raw);
    let r = SymMatrix::from_symmetric_part(&r_raw);
    let p_class = classify_values(&p.eigenvalues(), tol.definiteness);
    let r_class = classify_values(&r.eigenvalues(), tol.definiteness);
    Ok(QprFactorization {
        a,
        p,
        r,
        p_class,
        r_class,
        cond_a,
    })
}

pub fn monotonicity_class(l: &BlockMap) -> Result<MonotoneClass> {
    monotonicity_class_with(l, &Tolerances::default())
}

/// A singular `A` or `D` block rules out monotonicity, since a monotone map
/// sends `V1` to a subspace transversal to `V2` and vice versa.
pub fn monotonicity_class_with(l: &BlockMap, tol: &Tolerances) -> Result<MonotoneClass> {
    match factor_qpr_with(l, tol) {
        Ok(f) => Ok(f.monotone_class()),
        Err(SectorError::BlockSingular { .. }) => Ok(MonotoneClass::NotMonotone),
        Err(e) => Err(e),
    }
}

/// `[[A, 0], [0, A^{-T}]]`, a symplectic map preserving `Q` exactly.
pub fn q_isometry(a: &DMatrix<f64>) -> Result<BlockMap> {
    if a.nrows() != a.ncols() {
        return Err(SectorError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let d = a.nrows();
    let inv = checked_inverse(a, crate::linalg::COND_LIMIT)
        .map_err(|cond| SectorError::SingularMatrix { cond })?;
    BlockMap::from_blocks(a, &DMatrix::zeros(d, d), &DMatrix::zeros(d, d), &inv.transpose())
}

/// Block-diagonal map `[[X, 0], [0, Y]]` with no validation.
pub(crate) fn block_diag(x: &DMatrix<f64>, y: &DMatrix<f64>) -> BlockMap {
    let d = x.nrows();
    BlockMap::from_blocks(x, &DMatrix::zeros(d, d), &DMatrix::zeros(d, d), y)
        .expect("square blocks of equal size")
}

/// `[[I, I], [T, I + T]]` with `T = diag(t)`.
pub fn canonical_core(t: &[f64]) -> BlockMap {
    let d = t.len();
    let i = DMatrix::<f64>::identity(d, d);
    let tm = SymMatrix::from_diagonal(t).into_inner();
    BlockMap::from_blocks(&i, &i, &tm, &(&i + &tm)).expect("square blocks of equal size")
}

/// Normal form of a strictly monotone map under Q-isometries.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Diagonal of `T`, nondecreasing; the spectrum of `CᵀB`.
    pub t: Vec<f64>,
    pub left_iso: BlockMap,
    pub right_iso: BlockMap,
    /// `left_iso · L · right_iso = [[I, I], [T, I + T]]`.
    pub core: BlockMap,
}

impl CanonicalForm {
    /// `max|left · L · right - core| / (1 + max|core|)`.
    pub fn residual(&self, l: &BlockMap) -> f64 {
        let prod = &(&self.left_iso * l) * &self.right_iso;
        relative_error(prod.matrix(), self.core.matrix())
    }
}

pub fn canonical_form(l: &BlockMap) -> Result<CanonicalForm> {
    let f = factor_qpr(l)?;
    if f.monotone_class() != MonotoneClass::StrictlyMonotone {
        return Err(SectorError::NotStrictlyMonotone);
    }
    canonical_from_factors(&f)
}

pub(crate) fn canonical_from_factors(f: &QprFactorization) -> Result<CanonicalForm> {
    let s = psd_sqrt(&f.r)?;
    let s_inv = checked_inverse(s.as_matrix(), f64::INFINITY)
        .map_err(|_| SectorError::NotStrictlyMonotone)?;
    let k = SymMatrix::from_symmetric_part(&(s.as_matrix() * f.p.as_matrix() * s.as_matrix()));
    let eig = k.eigen();
    let fm = &eig.vectors;
    let a_inv = checked_inverse(&f.a, f64::INFINITY)
        .map_err(|cond| SectorError::BlockSingular { block: 'A', cond })?;

    // left = diag(Fᵀ, Fᵀ) · diag(S⁻¹, S) · diag(A⁻¹, Aᵀ)
    let left_iso = block_diag(
        &(fm.transpose() * &s_inv * &a_inv),
        &(fm.transpose() * s.as_matrix() * f.a.transpose()),
    );
    // right = diag(S, S⁻¹) · diag(F, F)
    let right_iso = block_diag(&(s.as_matrix() * fm), &(&s_inv * fm));
    Ok(CanonicalForm {
        core: canonical_core(&eig.values),
        t: eig.values,
        left_iso,
        right_iso,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DefinitenessClass;
    use crate::symplectic::q_standard;
    use crate::symplectic::PhaseVector;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn scalar_map() -> BlockMap {
        BlockMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    #[test]
    fn factor_scalar_example() {
        let f = factor_qpr(&scalar_map()).unwrap();
        assert_relative_eq!(f.a[(0, 0)], 1.0);
        assert_relative_eq!(f.p.as_matrix()[(0, 0)], 1.0);
        assert_relative_eq!(f.r.as_matrix()[(0, 0)], 1.0);
        // [[1,0],[1,1]] · [[1,1],[0,1]] = [[1,1],[1,2]]
        let prod = &lower_shear(&f.p) * &upper_shear(&f.r, 1);
        assert_eq!(prod.matrix(), scalar_map().matrix());
        assert!(relative_error(f.reassemble().matrix(), scalar_map().matrix()) < 1e-15);
    }

    #[test]
    fn factor_identity_and_isometry() {
        let f = factor_qpr(&BlockMap::identity(2)).unwrap();
        assert_eq!(f.a, DMatrix::identity(2, 2));
        assert_eq!(f.p.as_matrix(), &DMatrix::zeros(2, 2));
        assert_eq!(f.r.as_matrix(), &DMatrix::zeros(2, 2));
        assert_eq!(f.p_class.class, DefinitenessClass::PositiveSemidefinite);

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let f = factor_qpr(&q_isometry(&a).unwrap()).unwrap();
        assert_relative_eq!(f.a.clone(), a, epsilon = 1e-15);
        assert!(max_abs(f.p.as_matrix()) < 1e-15);
        assert!(max_abs(f.r.as_matrix()) < 1e-15);
    }

    #[test]
    fn factor_rejects_non_symplectic() {
        let l = BlockMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(factor_qpr(&l), Err(SectorError::NotSymplectic { .. })));
        assert!(matches!(
            monotonicity_class(&l),
            Err(SectorError::NotSymplectic { .. })
        ));
    }

    #[test]
    fn singular_block_is_not_monotone() {
        let rot = BlockMap::rotation(2);
        assert!(matches!(
            factor_qpr(&rot),
            Err(SectorError::BlockSingular { block: 'A', .. })
        ));
        assert_eq!(monotonicity_class(&rot).unwrap(), MonotoneClass::NotMonotone);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            monotonicity_class(&scalar_map()).unwrap(),
            MonotoneClass::StrictlyMonotone
        );
        assert_eq!(
            monotonicity_class(&BlockMap::identity(3)).unwrap(),
            MonotoneClass::Monotone
        );
        let iso = BlockMap::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(monotonicity_class(&iso).unwrap(), MonotoneClass::Monotone);
        // P = -1: shear in the wrong direction
        let bad = BlockMap::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(monotonicity_class(&bad).unwrap(), MonotoneClass::NotMonotone);
    }

    #[test]
    fn q_isometry_examples() {
        assert_eq!(q_isometry(&DMatrix::identity(2, 2)).unwrap(), BlockMap::identity(2));
        let iso = q_isometry(&DMatrix::from_element(1, 1, 3.0)).unwrap();
        assert_relative_eq!(iso.matrix()[(0, 0)], 3.0);
        assert_relative_eq!(iso.matrix()[(1, 1)], 1.0 / 3.0);
        assert!(is_symplectic(&iso, 1e-12));
        let w = PhaseVector::from_slices(&[0.7], &[-2.0]).unwrap();
        assert_relative_eq!(q_standard(&iso.apply(&w)), q_standard(&w), epsilon = 1e-14);

        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            q_isometry(&singular),
            Err(SectorError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn canonical_form_scalar() {
        let cf = canonical_form(&scalar_map()).unwrap();
        assert_relative_eq!(cf.t[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(cf.core.matrix().clone(), scalar_map().matrix().clone());
        assert!(cf.residual(&scalar_map()) < 1e-12);
    }

    #[test]
    fn canonical_form_diagonal_p() {
        let p = SymMatrix::from_diagonal(&[4.0, 1.0]);
        let r = SymMatrix::identity(2);
        let l = &lower_shear(&p) * &upper_shear(&r, 2);
        let cf = canonical_form(&l).unwrap();
        assert_relative_eq!(cf.t[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(cf.t[1], 4.0, epsilon = 1e-12);
        assert!(cf.residual(&l) < 1e-12);
        assert!(is_symplectic(&cf.left_iso, 1e-12));
        assert!(is_symplectic(&cf.right_iso, 1e-12));
    }

    #[test]
    fn canonical_form_invariant_under_isometries() {
        let core = canonical_core(&[0.5, 2.0]);
        let g1 = q_isometry(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.5])).unwrap();
        let g2 = q_isometry(&DMatrix::from_row_slice(2, 2, &[0.3, -1.0, 1.0, 0.2])).unwrap();
        let l = &(&g1 * &core) * &g2;
        let cf = canonical_form(&l).unwrap();
        assert_relative_eq!(cf.t[0], 0.5, epsilon = 1e-10);
        assert_relative_eq!(cf.t[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn canonical_form_refuses_non_strict() {
        assert!(matches!(
            canonical_form(&BlockMap::identity(2)),
            Err(SectorError::NotStrictlyMonotone)
        ));
    }
}
