//! The standard symplectic space `R^d x R^d`, its form, and block maps.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SectorError};
use crate::linalg::{matrix_from_rows, matrix_to_rows, max_abs};

/// A point `w = (xi, eta)` of the standard symplectic space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
}

impl PhaseVector {
    pub fn new(xi: DVector<f64>, eta: DVector<f64>) -> Result<Self> {
        if xi.len() != eta.len() {
            return Err(SectorError::DimensionMismatch {
                expected: xi.len(),
                got: eta.len(),
            });
        }
        if xi.iter().chain(eta.iter()).any(|x| !x.is_finite()) {
            return Err(SectorError::NonFinite);
        }
        Ok(PhaseVector { xi, eta })
    }

    pub fn from_slices(xi: &[f64], eta: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(xi), DVector::from_column_slice(eta))
    }

    /// Splits a stacked vector of length `2d` into its halves.
    pub fn from_stacked(v: &DVector<f64>) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(SectorError::OddDimension(v.len()));
        }
        let d = v.len() / 2;
        Self::new(v.rows(0, d).into_owned(), v.rows(d, d).into_owned())
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn stacked(&self) -> DVector<f64> {
        let d = self.dim();
        DVector::from_fn(2 * d, |i, _| if i < d { self.xi[i] } else { self.eta[i - d] })
    }

    pub fn norm(&self) -> f64 {
        (self.xi.norm_squared() + self.eta.norm_squared()).sqrt()
    }
}

/// `omega(w1, w2) = <xi1, eta2> - <xi2, eta1>`.
pub fn omega(w1: &PhaseVector, w2: &PhaseVector) -> Result<f64> {
    if w1.dim() != w2.dim() {
        return Err(SectorError::DimensionMismatch {
            expected: w1.dim(),
            got: w2.dim(),
        });
    }
    Ok(w1.xi.dot(&w2.eta) - w2.xi.dot(&w1.eta))
}

/// Symplectic form on stacked vectors; both must have even length `2d`.
pub(crate) fn omega_stacked(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let d = a.len() / 2;
    a.rows(0, d).dot(&b.rows(d, d)) - b.rows(0, d).dot(&a.rows(d, d))
}

/// Quadratic form of the standard sector, `<xi, eta>`.
pub fn q_standard(w: &PhaseVector) -> f64 {
    w.xi.dot(&w.eta)
}

pub(crate) fn q_stacked(v: &DVector<f64>) -> f64 {
    let d = v.len() / 2;
    v.rows(0, d).dot(&v.rows(d, d))
}

/// Matrix of the symplectic form: `omega(a, b) = aᵀ J b`, `J = [[0, I], [-I, 0]]`.
pub fn j_matrix(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    j
}

/// A linear map of `R^d x R^d` with its blocks relative to the splitting
/// `V1 = R^d x {0}`, `V2 = {0} x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    full: DMatrix<f64>,
    d: usize,
}

impl BlockMap {
    /// Reads the blocks `A, B, C, D` of a `2d x 2d` matrix.
    pub fn from_matrix(full: DMatrix<f64>) -> Result<Self> {
        if full.nrows() != full.ncols() {
            return Err(SectorError::NotSquare {
                rows: full.nrows(),
                cols: full.ncols(),
            });
        }
        if full.nrows() % 2 != 0 {
            return Err(SectorError::OddDimension(full.nrows()));
        }
        if full.iter().any(|x| !x.is_finite()) {
            return Err(SectorError::NonFinite);
        }
        let d = full.nrows() / 2;
        Ok(BlockMap { full, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_matrix(matrix_from_rows(rows)?)
    }

    pub fn from_blocks(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        c: &DMatrix<f64>,
        dd: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = a.nrows();
        for m in [a, b, c, dd] {
            if m.nrows() != d || m.ncols() != d {
                return Err(SectorError::DimensionMismatch {
                    expected: d,
                    got: m.nrows().max(m.ncols()),
                });
            }
        }
        let mut full = DMatrix::zeros(2 * d, 2 * d);
        full.view_mut((0, 0), (d, d)).copy_from(a);
        full.view_mut((0, d), (d, d)).copy_from(b);
        full.view_mut((d, 0), (d, d)).copy_from(c);
        full.view_mut((d, d), (d, d)).copy_from(dd);
        Self::from_matrix(full)
    }

    pub fn identity(d: usize) -> Self {
        BlockMap {
            full: DMatrix::identity(2 * d, 2 * d),
            d,
        }
    }

    /// `[[0, I], [-I, 0]]`, which carries the standard sector onto its
    /// complement, `V1` onto `V2` and `V2` onto `V1`.
    pub fn rotation(d: usize) -> Self {
        BlockMap {
            full: j_matrix(d),
            d,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.full
    }

    pub fn a(&self) -> DMatrix<f64> {
        self.full.view((0, 0), (self.d, self.d)).into_owned()
    }

    pub fn b(&self) -> DMatrix<f64> {
        self.full.view((0, self.d), (self.d, self.d)).into_owned()
    }

    pub fn c(&self) -> DMatrix<f64> {
        self.full.view((self.d, 0), (self.d, self.d)).into_owned()
    }

    pub fn d_block(&self) -> DMatrix<f64> {
        self.full.view((self.d, self.d), (self.d, self.d)).into_owned()
    }

    pub fn apply(&self, w: &PhaseVector) -> PhaseVector {
        let v = &self.full * w.stacked();
        let d = self.d;
        PhaseVector {
            xi: v.rows(0, d).into_owned(),
            eta: v.rows(d, d).into_owned(),
        }
    }

    /// Inverse of a symplectic map, `-J Lᵀ J = [[Dᵀ, -Bᵀ], [-Cᵀ, Aᵀ]]`.
    /// Only meaningful when `self` is symplectic.
    pub fn symplectic_inverse(&self) -> BlockMap {
        let j = j_matrix(self.d);
        BlockMap {
            full: -(&j * self.full.transpose() * &j),
            d: self.d,
        }
    }

    pub fn transpose(&self) -> BlockMap {
        BlockMap {
            full: self.full.transpose(),
            d: self.d,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.full)
    }

    /// `max|Lᵀ J L - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = j_matrix(self.d);
        max_abs(&(self.full.transpose() * &j * &self.full - &j))
    }
}

impl Mul for &BlockMap {
    type Output = BlockMap;

    fn mul(self, rhs: &BlockMap) -> BlockMap {
        assert_eq!(self.d, rhs.d, "block map dimensions differ");
        BlockMap {
            full: &self.full * &rhs.full,
            d: self.d,
        }
    }
}

impl Mul for BlockMap {
    type Output = BlockMap;

    fn mul(self, rhs: BlockMap) -> BlockMap {
        &self * &rhs
    }
}

/// Extracts the blocks of a square matrix of even size.
pub fn blocks(l: DMatrix<f64>) -> Result<BlockMap> {
    BlockMap::from_matrix(l)
}

/// `LᵀJL = J` within `tol * (1 + ‖L‖_F²)`.
pub fn is_symplectic(l: &BlockMap, tol: f64) -> bool {
    let norm = l.matrix().norm();
    l.symplectic_defect() <= tol * (1.0 + norm * norm)
}
