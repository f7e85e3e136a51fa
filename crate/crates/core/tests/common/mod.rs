//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls the library's eigen, Cholesky or factorization
//! routines; the oracles use power iteration, real Schur decomposition and
//! direct evaluation of the quadratic form.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use symsector::linalg::SymMatrix;
use symsector::sampling::{gaussian_vector, random_orthogonal, SeededRng};
use symsector::symplectic::BlockMap;

/// `Q(w) = ⟨xi, eta⟩` for a stacked vector.
pub fn q_of(w: &DVector<f64>) -> f64 {
    let d = w.len() / 2;
    w.rows(0, d).dot(&w.rows(d, d))
}

/// Largest value of `xᵀ B x / xᵀ A x` by power iteration on `A⁻¹ B` from
/// several starts; `A`, `B` positive definite.
fn max_form_ratio(a: &DMatrix<f64>, b: &DMatrix<f64>, iters: usize) -> f64 {
    let d = a.nrows();
    let lu = a.clone().lu();
    let ratio = |x: &DVector<f64>| x.dot(&(b * x)) / x.dot(&(a * x));
    let mut starts: Vec<DVector<f64>> = (0..d)
        .map(|k| DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 }))
        .collect();
    starts.push(DVector::from_element(d, 1.0));
    starts.push(DVector::from_fn(d, |i, _| 1.0 + 0.37 * i as f64 * (-1f64).powi(i as i32)));
    let mut best = f64::NEG_INFINITY;
    for mut x in starts {
        for _ in 0..iters {
            let y = lu.solve(&(b * &x)).expect("positive definite");
            let n = y.norm();
            if !(n > 0.0) {
                break;
            }
            x = y / n;
        }
        best = best.max(ratio(&x));
    }
    best
}

/// `½ sup_x |ln(xᵀ Ub x / xᵀ Ua x)|` for positive definite graph matrices.
pub fn sup_ratio_distance(ua: &DMatrix<f64>, ub: &DMatrix<f64>) -> f64 {
    let hi = max_form_ratio(ua, ub, 4000);
    let lo = 1.0 / max_form_ratio(ub, ua, 4000);
    0.5 * hi.ln().abs().max(lo.ln().abs())
}

/// Eigenvalues of `Cᵀ B` from the real Schur form, sorted ascending.
pub fn schur_spectrum_ctb(l: &BlockMap) -> Vec<f64> {
    let m = l.c().transpose() * l.b();
    let mut vals: Vec<f64> = m
        .schur()
        .eigenvalues()
        .expect("real spectrum for monotone maps")
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Matrix of `w ↦ Q(Lw) - Q(w)` as a symmetric `2d x 2d` matrix.
pub fn q_gain_matrix(l: &BlockMap) -> DMatrix<f64> {
    let n = l.matrix().nrows();
    let d = n / 2;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..d {
        s[(i, d + i)] = 0.5;
        s[(d + i, i)] = 0.5;
    }
    let m = l.matrix().transpose() * &s * l.matrix() - &s;
    (&m + m.transpose()) * 0.5
}

/// Sampled check of `Q(Lw) >= Q(w)`: `samples` Gaussian vectors, the
/// coordinate vectors and their pairwise sums and differences, and the
/// most-decreasing direction of the gain form. Returns `true` when no
/// violation beyond `1e-9 (1 + |Q(w)|)` was found, for unit vectors `w`.
pub fn sampled_q_monotone(l: &BlockMap, rng: &mut SeededRng, samples: usize) -> bool {
    let n = l.matrix().nrows();
    let mut probes: Vec<DVector<f64>> = (0..samples).map(|_| gaussian_vector(rng, n)).collect();
    let unit = |i: usize| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
    for i in 0..n {
        probes.push(unit(i));
        for j in i + 1..n {
            probes.push(unit(i) + unit(j));
            probes.push(unit(i) - unit(j));
        }
    }
    let gain = q_gain_matrix(l);
    let eig = gain.clone().symmetric_eigen();
    let k = eig.eigenvalues.imin();
    probes.push(eig.eigenvectors.column(k).into_owned());
    probes.iter().all(|w| {
        let w = w / w.norm();
        let lw = l.matrix() * &w;
        let qw = q_of(&w);
        q_of(&lw) - qw >= -1e-9 * (1.0 + qw.abs())
    })
}

/// Closed form of the Q growth of the scalar recursion `xi ← xi + τ_n eta`,
/// `eta` fixed: `Q_{N+1}/Q_1 = (xi_1 + eta Σ_{n<=N} τ_n) / xi_1`, evaluated by
/// compensated summation.
pub fn scalar_shear_growth(xi1: f64, eta: f64, taus: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &t in taus {
        let y = t - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    (xi1 + eta * sum) / xi1
}

/// Random symmetric matrix with eigenvalues uniform in `[lo, hi]`, built with
/// the test-side orthogonal generator.
pub fn spd_with_eigs_in(rng: &mut SeededRng, d: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let o = random_orthogonal(rng, d);
    let eigs = DVector::from_fn(d, |_, _| rng.random_range(lo..=hi));
    &o * DMatrix::from_diagonal(&eigs) * o.transpose()
}

/// `S^{1/2} M S^{1/2}` for a positive definite `S`, using nalgebra directly.
pub fn congruence_sqrt(s: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    &root * m * &root
}

pub fn sym(m: DMatrix<f64>) -> SymMatrix {
    SymMatrix::from_symmetric_part(&m)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn dims() -> impl Iterator<Item = usize> {
    [1usize, 2, 3].into_iter().cycle()
}
