use thiserror::Error;

/// Errors raised by the sector calculus.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SectorError {
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e} exceeds {limit:.3e})")]
    NonSymmetricInput { asymmetry: f64, limit: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.6e})")]
    NotPsd { min_eig: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} is odd; a 2d x 2d map is required")]
    OddDimension(usize),
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("map is not symplectic (defect {defect:.3e})")]
    NotSymplectic { defect: f64 },
    #[error("block {block} is numerically singular (condition {cond:.3e})")]
    BlockSingular { block: char, cond: f64 },
    #[error("matrix is numerically singular (condition {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("map is not monotone with respect to the sector")]
    NotMonotone,
    #[error("map is not strictly monotone with respect to the sector")]
    NotStrictlyMonotone,
    #[error("vector is not in the interior of the sector (Q = {q:.6e})")]
    NotInterior { q: f64 },
    #[error("columns do not span a Lagrangian subspace (defect {defect:.3e})")]
    NotLagrangian { defect: f64 },
    #[error("subspace is not strictly inside the sector")]
    NotInLagC,
    #[error("subspaces are not transversal (condition {cond:.3e})")]
    NotTransversal { cond: f64 },
    #[error("image subspace is not a graph over the first factor (condition {cond:.3e})")]
    ImageNotGraph { cond: f64 },
    #[error("subspaces are not strictly ordered")]
    NotOrdered,
    #[error("distance {distance:.6e} exceeds admissible bound {bound:.6e}")]
    DistanceTooLarge { distance: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("element {index} of the sequence is not a monotone symplectic map")]
    NotMonotoneElement { index: usize },
    #[error("example specification violated: {0}")]
    SpecViolation(String),
    #[error("probe lies on the boundary of the sector (Q = {q:.6e})")]
    ProbeOnBoundary { q: f64 },
    #[error("no contraction: least expansion of the product is {sigma:.6e}")]
    NoContraction { sigma: f64 },
}

impl SectorError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            SectorError::NonSymmetricInput { .. } => "NonSymmetricInput",
            SectorError::NotPsd { .. } => "NotPSD",
            SectorError::DimensionMismatch { .. } => "DimensionMismatch",
            SectorError::NotSquare { .. } => "NotSquare",
            SectorError::OddDimension(_) => "OddDimension",
            SectorError::NonFinite => "NonFinite",
            SectorError::NotSymplectic { .. } => "NotSymplectic",
            SectorError::BlockSingular { .. } => "BlockSingular",
            SectorError::SingularMatrix { .. } => "SingularA",
            SectorError::NotMonotone => "NotMonotone",
            SectorError::NotStrictlyMonotone => "NotStrictlyMonotone",
            SectorError::NotInterior { .. } => "NotInterior",
            SectorError::NotLagrangian { .. } => "NotLagrangian",
            SectorError::NotInLagC => "NotInLagC",
            SectorError::NotTransversal { .. } => "NotTransversal",
            SectorError::ImageNotGraph { .. } => "ImageNotGraph",
            SectorError::NotOrdered => "NotOrdered",
            SectorError::DistanceTooLarge { .. } => "DistanceTooLarge",
            SectorError::InvalidParameter(_) => "InvalidParameter",
            SectorError::NotMonotoneElement { .. } => "NotMonotoneElement",
            SectorError::SpecViolation(_) => "SpecViolation",
            SectorError::ProbeOnBoundary { .. } => "ProbeOnBoundary",
            SectorError::NoContraction { .. } => "NoContraction",
        }
    }
}

pub type Result<T> = std::result::Result<T, SectorError>;
