//! Expansion of the sector form under monotone maps.
//!
//! For a monotone `L` with `t1` the least eigenvalue of `CᵀB`, the least
//! expansion coefficient `inf β(w, L)` over the interior of the sector equals
//! `√(1 + t1) + √t1`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Result, SectorError};
use crate::factorization::{
    canonical_from_factors, factor_qpr_with, monotonicity_class, MonotoneClass, QprFactorization,
};
use crate::lagrangian::{distance, mobius, LagrangianSubspace};
use crate::linalg::{psd_sqrt, SymMatrix, Tolerances};
use crate::sampling::{gaussian_matrix, rng_stream, unit_vector};
use crate::symplectic::{q_stacked, q_standard, BlockMap, PhaseVector};

#[derive(Debug, Clone)]
pub struct ExpansionResult {
    /// Least expansion coefficient, `√(1 + t1) + √t1 >= 1`.
    pub sigma: f64,
    /// Least eigenvalue of `CᵀB`, clipped to zero within tolerance.
    pub t1: f64,
    /// Interior vector attaining the infimum; present for strictly monotone maps.
    pub witness: Option<PhaseVector>,
}

/// `√(1 + t) + √t`.
pub fn sigma_from_t1(t1: f64) -> f64 {
    (1.0 + t1).sqrt() + t1.sqrt()
}

fn require_monotone(l: &BlockMap) -> Result<MonotoneClass> {
    let class = monotonicity_class(l)?;
    if !class.is_monotone() {
        return Err(SectorError::NotMonotone);
    }
    Ok(class)
}

/// `β(w, L) = √(Q(Lw) / Q(w))` for `w` in the interior of the sector.
pub fn beta(w: &PhaseVector, l: &BlockMap) -> Result<f64> {
    if w.dim() != l.dim() {
        return Err(SectorError::DimensionMismatch {
            expected: l.dim(),
            got: w.dim(),
        });
    }
    let q = q_standard(w);
    if !(q > 0.0) {
        return Err(SectorError::NotInterior { q });
    }
    require_monotone(l)?;
    Ok(beta_stacked(l, &w.stacked()))
}

fn beta_stacked(l: &BlockMap, w: &DVector<f64>) -> f64 {
    (q_stacked(&(l.matrix() * w)) / q_stacked(w)).sqrt()
}

pub fn sigma(l: &BlockMap) -> Result<ExpansionResult> {
    sigma_with(l, &Tolerances::default())
}

pub fn sigma_with(l: &BlockMap, tol: &Tolerances) -> Result<ExpansionResult> {
    let f = match factor_qpr_with(l, tol) {
        Ok(f) => f,
        Err(SectorError::BlockSingular { .. }) => return Err(SectorError::NotMonotone),
        Err(e) => return Err(e),
    };
    expansion_from_factors(&f, tol)
}

/// Eigenvalues of `K = R^{1/2} P R^{1/2}`, which is similar to `PR = CᵀB`.
pub(crate) fn product_spectrum(f: &QprFactorization) -> Result<Vec<f64>> {
    let s = psd_sqrt(&f.r)?;
    let k = SymMatrix::from_symmetric_part(&(s.as_matrix() * f.p.as_matrix() * s.as_matrix()));
    Ok(k.eigenvalues())
}

pub(crate) fn expansion_from_factors(
    f: &QprFactorization,
    tol: &Tolerances,
) -> Result<ExpansionResult> {
    let class = f.monotone_class();
    if !class.is_monotone() {
        return Err(SectorError::NotMonotone);
    }
    let spectrum = product_spectrum(f)?;
    let raw = spectrum[0];
    let largest = spectrum.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let t1 = if raw <= tol.definiteness * (1.0 + largest) {
        0.0
    } else {
        raw
    };
    let sigma = sigma_from_t1(t1);
    let witness = if class == MonotoneClass::StrictlyMonotone && t1 > 0.0 {
        let cf = canonical_from_factors(f)?;
        let t = cf.t[0];
        let d = f.a.nrows();
        let mut xi = DVector::zeros(d);
        let mut eta = DVector::zeros(d);
        // equality case of the lower bound in canonical coordinates, Q = 1
        xi[0] = ((1.0 + t) / t).powf(0.25);
        eta[0] = (t / (1.0 + t)).powf(0.25);
        Some(cf.right_iso.apply(&PhaseVector { xi, eta }))
    } else {
        None
    };
    Ok(ExpansionResult {
        sigma,
        t1,
        witness,
    })
}

/// Least expansion of `L⁻¹` with respect to the complementary sector, computed
/// as the least expansion of `[[0, -I], [I, 0]] L⁻¹ [[0, I], [-I, 0]]` with
/// respect to the standard sector.
pub fn sigma_complementary(l: &BlockMap) -> Result<f64> {
    require_monotone(l)?;
    let conj = complementary_conjugate(l);
    Ok(sigma(&conj)?.sigma)
}

/// `[[0, -I], [I, 0]] · L⁻¹ · [[0, I], [-I, 0]]`.
pub fn complementary_conjugate(l: &BlockMap) -> BlockMap {
    let rot = BlockMap::rotation(l.dim());
    &(&rot.symplectic_inverse() * &l.symplectic_inverse()) * &rot
}

/// Distance between `L V1` and `L V2` in `Lag(C)`, three ways.
#[derive(Debug, Clone, Copy)]
pub struct ImageDistance {
    /// `ln((σ² + 1) / (σ² - 1))`.
    pub closed_form: f64,
    /// `½ ln(1 + 1/t1)`.
    pub from_t1: f64,
    /// Metric evaluated on the image graphs `C A⁻¹` and `D B⁻¹`.
    pub direct: f64,
}

/// `ln((σ² + 1)/(σ² - 1))`; infinite for `σ <= 1`.
pub fn image_distance_from_sigma(sigma: f64) -> f64 {
    if sigma <= 1.0 {
        f64::INFINITY
    } else {
        (2.0 / (sigma * sigma - 1.0)).ln_1p()
    }
}

pub fn image_distance(l: &BlockMap) -> Result<ImageDistance> {
    let class = monotonicity_class(l)?;
    if class != MonotoneClass::StrictlyMonotone {
        return Err(SectorError::NotStrictlyMonotone);
    }
    let exp = sigma(l)?;
    if exp.t1 <= 0.0 {
        return Err(SectorError::NotStrictlyMonotone);
    }
    let d = l.dim();
    let img1 = mobius(l, &LagrangianSubspace::v1(d))?;
    let img2 = mobius(l, &LagrangianSubspace::v2(d))?;
    Ok(ImageDistance {
        closed_form: image_distance_from_sigma(exp.sigma),
        from_t1: 0.5 * (1.0 / exp.t1).ln_1p(),
        direct: distance(&img1, &img2)?,
    })
}

/// Regularization added to the random graph matrices of [`mc_inf_beta`].
pub const MC_EPSILON: f64 = 1e-3;
/// Multiplicative coordinate step of the local refinement.
pub const MC_STEP: f64 = 1.05;
/// Number of refinement sweeps.
pub const MC_REFINE_STEPS: usize = 100;
const MC_CHUNK: usize = 4096;

/// Best point found by [`mc_search`].
#[derive(Debug, Clone)]
pub struct McSearch {
    pub min_beta: f64,
    pub best: PhaseVector,
}

/// Sampled infimum of `β(w, L)` over the interior of the sector.
pub fn mc_inf_beta(l: &BlockMap, samples: usize, seed: u64) -> Result<f64> {
    Ok(mc_search(l, samples, seed)?.min_beta)
}

/// Draws `w = (xi, U xi)` with `xi` uniform on the sphere and
/// `U = GᵀG + εI`, keeps the smallest `β`, then refines it by coordinate
/// descent: each coordinate is scaled by `1.05^{±1}` or shifted by `±0.05 ‖w‖`. Samples are split in fixed chunks with one RNG stream
/// per chunk, so the result does not depend on the thread count.
pub fn mc_search(l: &BlockMap, samples: usize, seed: u64) -> Result<McSearch> {
    if samples == 0 {
        return Err(SectorError::InvalidParameter(
            "samples must be at least 1".into(),
        ));
    }
    require_monotone(l)?;
    let d = l.dim();
    let n_chunks = samples.div_ceil(MC_CHUNK);
    let (best_beta, best_w) = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rng_stream(seed, chunk as u64);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut best = (f64::INFINITY, DVector::zeros(2 * d));
            for _ in 0..count {
                let xi = unit_vector(&mut rng, d);
                let g = gaussian_matrix(&mut rng, d, d);
                let mut u = g.transpose() * g;
                for i in 0..d {
                    u[(i, i)] += MC_EPSILON;
                }
                let eta = u * &xi;
                let mut w = DVector::zeros(2 * d);
                w.rows_mut(0, d).copy_from(&xi);
                w.rows_mut(d, d).copy_from(&eta);
                let w = w.normalize();
                let b = beta_stacked(l, &w);
                if b < best.0 {
                    best = (b, w);
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, DVector::zeros(2 * d)),
            |a, b| if b.0 < a.0 { b } else { a },
        );
    let (min_beta, w) = refine(l, best_beta, best_w);
    Ok(McSearch {
        min_beta,
        best: PhaseVector::from_stacked(&w)?,
    })
}

fn refine(l: &BlockMap, mut value: f64, mut w: DVector<f64>) -> (f64, DVector<f64>) {
    for _ in 0..MC_REFINE_STEPS {
        let mut improved = false;
        let shift = (MC_STEP - 1.0) * w.norm();
        for i in 0..w.len() {
            let here = w[i];
            for moved in [here * MC_STEP, here / MC_STEP, here + shift, here - shift] {
                let mut trial = w.clone();
                trial[i] = moved;
                if q_stacked(&trial) <= 0.0 {
                    continue;
                }
                let b = beta_stacked(l, &trial);
                if b < value {
                    value = b;
                    w = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (value, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{canonical_core, q_isometry};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn scalar_map() -> BlockMap {
        BlockMap::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap()
    }

    fn pv(xi: &[f64], eta: &[f64]) -> PhaseVector {
        PhaseVector::from_slices(xi, eta).unwrap()
    }

    #[test]
    fn beta_examples() {
        let w = pv(&[0.3, 2.0], &[1.0, 0.7]);
        assert_eq!(beta(&w, &BlockMap::identity(2)).unwrap(), 1.0);
        assert_relative_eq!(
            beta(&pv(&[1.0], &[1.0]), &scalar_map()).unwrap(),
            6.0_f64.sqrt(),
            epsilon = 1e-15
        );
        let iso = q_isometry(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5])).unwrap();
        assert_relative_eq!(beta(&w, &iso).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn beta_errors() {
        assert!(matches!(
            beta(&pv(&[1.0], &[-1.0]), &scalar_map()),
            Err(SectorError::NotInterior { .. })
        ));
        let bad = BlockMap::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        assert!(matches!(
            beta(&pv(&[1.0], &[1.0]), &bad),
            Err(SectorError::NotMonotone)
        ));
    }

    #[test]
    fn sigma_scalar_map() {
        let res = sigma(&scalar_map()).unwrap();
        assert_relative_eq!(res.t1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(res.sigma, 1.0 + 2.0_f64.sqrt(), epsilon = 1e-14);
        let w = res.witness.unwrap();
        assert!(q_standard(&w) > 0.0);
        assert_relative_eq!(beta(&w, &scalar_map()).unwrap(), res.sigma, epsilon = 1e-12);
    }

    #[test]
    fn sigma_of_isometry_is_one() {
        let iso = q_isometry(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 0.5])).unwrap();
        let res = sigma(&iso).unwrap();
        assert_eq!(res.t1, 0.0);
        assert_eq!(res.sigma, 1.0);
        assert!(res.witness.is_none());
    }

    #[test]
    fn sigma_governed_by_least_eigenvalue() {
        let res = sigma(&canonical_core(&[1.0, 4.0])).unwrap();
        assert_relative_eq!(res.sigma, 1.0 + 2.0_f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn sigma_rejects_non_monotone() {
        let bad = BlockMap::from_rows(&[vec![1.0, 0.0], vec![-1.0, 1.0]]).unwrap();
        assert!(matches!(sigma(&bad), Err(SectorError::NotMonotone)));
        assert!(matches!(
            sigma(&BlockMap::rotation(1)),
            Err(SectorError::NotMonotone)
        ));
    }

    #[test]
    fn complementary_examples() {
        assert_eq!(sigma_complementary(&BlockMap::identity(2)).unwrap(), 1.0);
        assert_relative_eq!(
            sigma_complementary(&scalar_map()).unwrap(),
            1.0 + 2.0_f64.sqrt(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn image_distance_examples() {
        let dist = image_distance(&scalar_map()).unwrap();
        let half_ln2 = 0.5 * 2.0_f64.ln();
        assert_relative_eq!(dist.closed_form, half_ln2, epsilon = 1e-14);
        assert_relative_eq!(dist.from_t1, half_ln2, epsilon = 1e-15);
        assert_relative_eq!(dist.direct, half_ln2, epsilon = 1e-14);

        let dist = image_distance(&canonical_core(&[1.0, 4.0])).unwrap();
        assert_relative_eq!(dist.direct, half_ln2, epsilon = 1e-13);

        let mut last = f64::INFINITY;
        for t in [0.1, 1.0, 10.0, 100.0, 1000.0] {
            let dist = image_distance(&canonical_core(&[t])).unwrap();
            assert!(dist.closed_form < last);
            last = dist.closed_form;
        }
        assert!(matches!(
            image_distance(&BlockMap::identity(1)),
            Err(SectorError::NotStrictlyMonotone)
        ));
    }

    #[test]
    fn mc_examples() {
        assert_eq!(mc_inf_beta(&BlockMap::identity(2), 500, 3).unwrap(), 1.0);
        let iso = q_isometry(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 0.5])).unwrap();
        assert_relative_eq!(mc_inf_beta(&iso, 500, 3).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            mc_inf_beta(&scalar_map(), 0, 0),
            Err(SectorError::InvalidParameter(_))
        ));
    }

    #[test]
    fn mc_is_deterministic() {
        let a = mc_inf_beta(&scalar_map(), 10_000, 11).unwrap();
        let b = mc_inf_beta(&scalar_map(), 10_000, 11).unwrap();
        assert_eq!(a, b);
    }
}
