//! Tolerance-aware dense linear algebra shared by every other module.
//!
//! All predicates use one relative tolerance policy: thresholds are scaled by
//! `1 + max|entry|` (or `1 + max|eigenvalue|` for definiteness), so results do
//! not depend on the overall scale of the input.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Result, SectorError};

/// Relative symmetry tolerance.
pub const SYM_TOL: f64 = 1e-10;
/// Relative tolerance of the `LᵀJL = J` test.
pub const SYMPLECTIC_TOL: f64 = 1e-9;
/// Default relative tolerance for definiteness classification.
pub const DEFINITENESS_TOL: f64 = 1e-9;
/// Matrices with a larger 2-norm condition number are treated as singular.
pub const COND_LIMIT: f64 = 1e12;

/// Bundle of the tolerances used by the monotonicity predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub symmetry: f64,
    pub symplectic: f64,
    pub definiteness: f64,
    pub cond_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            symmetry: SYM_TOL,
            symplectic: SYMPLECTIC_TOL,
            definiteness: DEFINITENESS_TOL,
            cond_limit: COND_LIMIT,
        }
    }
}

impl Tolerances {
    pub fn with_definiteness(tol: f64) -> Self {
        Tolerances {
            definiteness: tol,
            ..Default::default()
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// A real symmetric matrix. The stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates symmetry within `SYM_TOL * (1 + max|M|)` and stores the
    /// symmetric part.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, SYM_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, sym_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(SectorError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(SectorError::NonFinite);
        }
        let limit = sym_tol * (1.0 + max_abs(&m));
        let asym = asymmetry(&m);
        if asym > limit {
            return Err(SectorError::NonSymmetricInput {
                asymmetry: asym,
                limit,
            });
        }
        Ok(SymMatrix(symmetrize(&m)))
    }

    /// Takes the symmetric part of `m` without validation.
    pub fn from_symmetric_part(m: &DMatrix<f64>) -> Self {
        SymMatrix(symmetrize(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        SymMatrix(DMatrix::zeros(d, d))
    }

    pub fn scaled_identity(d: usize, s: f64) -> Self {
        SymMatrix(DMatrix::identity(d, d) * s)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Eigen-decomposition with eigenvalues in ascending order.
    pub fn eigen(&self) -> SymEigen {
        sym_eigen(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.0)
    }
}

/// Eigenpairs of a symmetric matrix sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> SymEigen {
    let n = m.nrows();
    if n == 0 {
        return SymEigen {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    SymEigen { values, vectors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DefinitenessClass {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
    NegativeSemidefinite,
    NegativeDefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Definiteness {
    pub class: DefinitenessClass,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl Definiteness {
    /// Positive definite or semidefinite.
    pub fn is_psd(&self) -> bool {
        matches!(
            self.class,
            DefinitenessClass::PositiveDefinite | DefinitenessClass::PositiveSemidefinite
        )
    }

    pub fn is_pd(&self) -> bool {
        self.class == DefinitenessClass::PositiveDefinite
    }
}

/// Classifies a symmetric matrix by the signs of its extreme eigenvalues,
/// with threshold `tol * (1 + max|eigenvalue|)`. A matrix that is both
/// positive and negative semidefinite within tolerance is reported as
/// positive semidefinite.
pub fn classify_definiteness(m: &SymMatrix, tol: f64) -> Definiteness {
    classify_values(&m.eigenvalues(), tol)
}

pub(crate) fn classify_values(values: &[f64], tol: f64) -> Definiteness {
    let min_eig = values.first().copied().unwrap_or(0.0);
    let max_eig = values.last().copied().unwrap_or(0.0);
    let tau = tol * (1.0 + min_eig.abs().max(max_eig.abs()));
    let class = if min_eig > tau {
        DefinitenessClass::PositiveDefinite
    } else if min_eig >= -tau {
        DefinitenessClass::PositiveSemidefinite
    } else if max_eig < -tau {
        DefinitenessClass::NegativeDefinite
    } else if max_eig <= tau {
        DefinitenessClass::NegativeSemidefinite
    } else {
        DefinitenessClass::Indefinite
    };
    Definiteness {
        class,
        min_eig,
        max_eig,
    }
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues within
/// tolerance of zero are clipped to zero.
pub fn psd_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = m.eigen();
    let def = classify_values(&eig.values, DEFINITENESS_TOL);
    if !def.is_psd() {
        return Err(SectorError::NotPsd {
            min_eig: def.min_eig,
        });
    }
    Ok(spectral_map(&eig, |x| x.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = m.eigen();
    let def = classify_values(&eig.values, DEFINITENESS_TOL);
    if !def.is_pd() {
        return Err(SectorError::NotPsd {
            min_eig: def.min_eig,
        });
    }
    Ok(spectral_map(&eig, |x| 1.0 / x.sqrt()))
}

/// `V f(Λ) Vᵀ` for a symmetric eigen-decomposition.
pub(crate) fn spectral_map(eig: &SymEigen, f: impl Fn(f64) -> f64) -> SymMatrix {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for k in 0..n {
        let s = f(eig.values[k]);
        scaled.column_mut(k).scale_mut(s);
    }
    SymMatrix::from_symmetric_part(&(scaled * eig.vectors.transpose()))
}

/// 2-norm condition number; `inf` for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0_f64, f64::max)
}

/// Inverse of a square matrix whose condition number does not exceed
/// `cond_limit`. On failure the condition number is returned.
pub fn checked_inverse(
    m: &DMatrix<f64>,
    cond_limit: f64,
) -> std::result::Result<DMatrix<f64>, f64> {
    let cond = condition_number(m);
    if !(cond <= cond_limit) {
        return Err(cond);
    }
    m.clone().try_inverse().ok_or(cond)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(SectorError::DimensionMismatch {
            expected: ncols,
            got: bad.len(),
        });
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SectorError::NonFinite);
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `max|a - b| / (1 + max|b|)`.
pub fn relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b)) / (1.0 + max_abs(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_positive_definite() {
        let def = classify_definiteness(&SymMatrix::identity(2), DEFINITENESS_TOL);
        assert_eq!(def.class, DefinitenessClass::PositiveDefinite);
        assert_eq!(def.min_eig, 1.0);
    }

    #[test]
    fn zero_matrix_resolves_to_psd() {
        let def = classify_definiteness(&SymMatrix::zeros(3), DEFINITENESS_TOL);
        assert_eq!(def.class, DefinitenessClass::PositiveSemidefinite);
    }

    #[test]
    fn signature_cases() {
        let cases = [
            (vec![1.0, -1.0], DefinitenessClass::Indefinite),
            (vec![-1.0, -2.0], DefinitenessClass::NegativeDefinite),
            (vec![0.0, -2.0], DefinitenessClass::NegativeSemidefinite),
            (vec![0.0, 3.0], DefinitenessClass::PositiveSemidefinite),
        ];
        for (diag, class) in cases {
            let def = classify_definiteness(&SymMatrix::from_diagonal(&diag), DEFINITENESS_TOL);
            assert_eq!(def.class, class, "{diag:?}");
        }
    }

    #[test]
    fn nonsymmetric_input_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            SymMatrix::new(m),
            Err(SectorError::NonSymmetricInput { .. })
        ));
        let tiny = DMatrix::from_row_slice(2, 2, &[1.0, 1e-13, 0.0, 1.0]);
        assert!(SymMatrix::new(tiny).is_ok());
    }

    #[test]
    fn sqrt_of_diagonal_and_identity() {
        let s = psd_sqrt(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_relative_eq!(
            s.as_matrix().clone(),
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])),
            epsilon = 1e-14
        );
        let i = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        assert_relative_eq!(i.as_matrix().clone(), DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_of_coupled_matrix() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = psd_sqrt(&m).unwrap();
        let sq = s.as_matrix() * s.as_matrix();
        assert!(relative_error(&sq, m.as_matrix()) < 1e-10);
        let vals = s.eigenvalues();
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 3.0_f64.sqrt(), epsilon = 1e-12);
        // eigenvector (1,-1)/sqrt2 carries eigenvalue 1
        let v = DVector::from_vec(vec![1.0, -1.0]) / 2.0_f64.sqrt();
        assert_relative_eq!(s.as_matrix() * &v, v, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let err = psd_sqrt(&SymMatrix::from_diagonal(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, SectorError::NotPsd { .. }));
    }

    #[test]
    fn condition_and_inverse() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(checked_inverse(&m, COND_LIMIT).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let inv = checked_inverse(&m, COND_LIMIT).unwrap();
        assert_relative_eq!(inv[(0, 0)], 0.5);
        assert_relative_eq!(condition_number(&m), 4.0, epsilon = 1e-12);
    }
}
