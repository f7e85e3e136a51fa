//! Seeded random generators for matrices, subspaces and symplectic maps.
//!
//! Every generator takes an explicit RNG so that results are reproducible from
//! a seed. The symplectic generator builds maps from the left factorization,
//! which makes the monotonicity class known by construction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::factorization::{block_diag, lower_shear, q_isometry, upper_shear, MonotoneClass};
use crate::linalg::SymMatrix;
use crate::symplectic::{BlockMap, PhaseVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

pub fn gaussian_phase_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PhaseVector {
    PhaseVector {
        xi: gaussian_vector(rng, d),
        eta: gaussian_vector(rng, d),
    }
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, d, d).qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            out.column_mut(k).neg_mut();
        }
    }
    out
}

/// `O diag(λ) Oᵀ` with the given eigenvalues and a random orthogonal `O`.
pub fn random_sym_with_eigs<R: Rng + ?Sized>(rng: &mut R, eigs: &[f64]) -> SymMatrix {
    let d = eigs.len();
    let o = random_orthogonal(rng, d);
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(eigs));
    SymMatrix::from_symmetric_part(&(&o * lam * o.transpose()))
}

/// Positive definite matrix with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, d: usize, lo: f64, hi: f64) -> SymMatrix {
    let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
    random_sym_with_eigs(rng, &eigs)
}

/// Well-conditioned invertible matrix with singular values in `[0.5, 2]`.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let u = random_orthogonal(rng, d);
    let v = random_orthogonal(rng, d);
    let s: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..=2.0)).collect();
    u * DMatrix::from_diagonal(&DVector::from_vec(s)) * v.transpose()
}

/// Kind of map produced by [`random_symplectic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `P, R` positive definite.
    Strict,
    /// `P, R` positive semidefinite with at least one of them singular.
    Boundary,
    /// A pure Q-isometry.
    Isometry,
    /// `P` or `R` has an eigenvalue at most `-0.5`.
    Indefinite,
    /// A monotone map composed with `[[0, I], [-I, 0]]`.
    Rotated,
}

impl MapKind {
    pub const ALL: [MapKind; 5] = [
        MapKind::Strict,
        MapKind::Boundary,
        MapKind::Isometry,
        MapKind::Indefinite,
        MapKind::Rotated,
    ];

    /// Class implied by the construction. `Rotated` maps have no fixed class.
    pub fn expected_class(self) -> Option<MonotoneClass> {
        match self {
            MapKind::Strict => Some(MonotoneClass::StrictlyMonotone),
            MapKind::Boundary | MapKind::Isometry => Some(MonotoneClass::Monotone),
            MapKind::Indefinite => Some(MonotoneClass::NotMonotone),
            MapKind::Rotated => None,
        }
    }
}

fn eigs_in<R: Rng + ?Sized>(rng: &mut R, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..=hi)).collect()
}

/// `diag(A, A^{-T}) · [[I, 0], [P, I]] · [[I, R], [0, I]]` with random factors
/// of the requested kind.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, d: usize, kind: MapKind) -> BlockMap {
    let a = random_invertible(rng, d);
    let iso = q_isometry(&a).expect("well-conditioned by construction");
    let (p_eigs, r_eigs) = match kind {
        MapKind::Strict => (eigs_in(rng, d, 0.2, 3.0), eigs_in(rng, d, 0.2, 3.0)),
        MapKind::Boundary => {
            let mut p = eigs_in(rng, d, 0.2, 3.0);
            let mut r = eigs_in(rng, d, 0.2, 3.0);
            let which = rng.random_range(0..3);
            let k = rng.random_range(0..d);
            if which != 1 {
                p[k] = 0.0;
            }
            if which != 0 {
                r[k] = 0.0;
            }
            (p, r)
        }
        MapKind::Isometry => (vec![0.0; d], vec![0.0; d]),
        MapKind::Indefinite => {
            let mut p = eigs_in(rng, d, 0.2, 3.0);
            let mut r = eigs_in(rng, d, 0.2, 3.0);
            let k = rng.random_range(0..d);
            let neg = -rng.random_range(0.5..=2.0);
            if rng.random_bool(0.5) {
                p[k] = neg;
            } else {
                r[k] = neg;
            }
            (p, r)
        }
        MapKind::Rotated => (eigs_in(rng, d, 0.2, 3.0), eigs_in(rng, d, 0.2, 3.0)),
    };
    let p = random_sym_with_eigs(rng, &p_eigs);
    let r = random_sym_with_eigs(rng, &r_eigs);
    let l = &(&iso * &lower_shear(&p)) * &upper_shear(&r, d);
    if kind == MapKind::Rotated {
        &BlockMap::rotation(d) * &l
    } else {
        l
    }
}

/// Strictly monotone map with `P`, `R` eigenvalues in `[0.2, 3]`.
pub fn random_strictly_monotone<R: Rng + ?Sized>(rng: &mut R, d: usize) -> BlockMap {
    random_symplectic(rng, d, MapKind::Strict)
}

/// Random Q-isometry `diag(A, A^{-T})`.
pub fn random_q_isometry<R: Rng + ?Sized>(rng: &mut R, d: usize) -> BlockMap {
    let a = random_invertible(rng, d);
    let inv_t = a.clone().try_inverse().expect("invertible").transpose();
    block_diag(&a, &inv_t)
}
