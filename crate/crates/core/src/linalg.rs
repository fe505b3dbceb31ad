//! Largest singular values of dense complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{purpose, stream};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;
/// Dimensions up to this size use the dense decomposition directly.
pub const DENSE_MAX_DIM: usize = 64;

const START_SEED: u64 = 0x5EED_0F_D15C;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    /// Dense decomposition up to [`DENSE_MAX_DIM`], Lanczos above.
    #[default]
    Auto,
    Power,
    Lanczos,
    Dense,
    /// Power iteration checked against the dense decomposition.
    CrossCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// False when the power iteration hit its cap before meeting the tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// `|power - dense|` in cross-check mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn operator_norm(m: &DMatrix<Complex64>, tol: f64) -> NormEstimate {
    operator_norm_with(m, tol, NormMethod::Auto)
}

pub fn operator_norm_with(m: &DMatrix<Complex64>, tol: f64, method: NormMethod) -> NormEstimate {
    let dense = || NormEstimate {
        value: singular_values(m).first().copied().unwrap_or(0.0),
        converged: true,
        iterations: 0,
        cross_check: None,
    };
    match method {
        NormMethod::Dense => dense(),
        NormMethod::Auto if m.nrows().max(m.ncols()) <= DENSE_MAX_DIM => dense(),
        NormMethod::Auto | NormMethod::Lanczos => lanczos(m, tol, MAX_ITERATIONS),
        NormMethod::Power => power_iteration(m, tol, MAX_ITERATIONS),
        NormMethod::CrossCheck => {
            let mut est = power_iteration(m, tol, MAX_ITERATIONS);
            est.cross_check = Some((est.value - dense().value).abs());
            est
        }
    }
}

fn start_vector(cols: usize) -> DVector<Complex64> {
    let mut rng = stream(START_SEED, purpose::POWER_START, cols as u64);
    let mut v = DVector::from_fn(cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    v /= Complex64::new(v.norm(), 0.0);
    v
}

/// Largest Krylov subspace built before restarting from the current Ritz vector.
const LANCZOS_MAX_BASIS: usize = 120;

/// Lanczos on `M^dagger M` with full reorthogonalization and explicit restarts.
///
/// Converged once the Ritz residual `beta_k |y_k|` is at most `tol` times the
/// Ritz value. `iterations` counts products with `M^dagger M`.
pub fn lanczos(m: &DMatrix<Complex64>, tol: f64, max_iter: usize) -> NormEstimate {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return NormEstimate { value: 0.0, converged: true, iterations: 0, cross_check: None };
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let basis_cap = LANCZOS_MAX_BASIS.min(cols);
    let mut tmp = DVector::from_element(rows, zero);
    let mut start = start_vector(cols);
    let mut iterations = 0;
    let mut theta = 0.0;

    while iterations < max_iter {
        let mut basis: Vec<DVector<Complex64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            let v = basis.last().unwrap();
            tmp.gemv(one, m, v, zero);
            let mut w = DVector::from_element(cols, zero);
            w.gemv_ad(one, m, &tmp, zero);
            iterations += 1;
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dotc(&w);
                    w.axpy(-proj, q, one);
                }
            }
            let alpha = tmp.norm_squared();
            alphas.push(alpha);
            let beta = w.norm();
            let k = alphas.len();
            let (ritz, last) = top_ritz_pair(&alphas, &betas);
            theta = ritz;
            let residual = beta * last.abs();
            let invariant = beta <= f64::EPSILON * ritz.max(f64::MIN_POSITIVE);
            if theta == 0.0 && invariant {
                return NormEstimate { value: 0.0, converged: true, iterations, cross_check: None };
            }
            if residual <= tol * theta || invariant || k == cols {
                return NormEstimate { value: theta.sqrt(), converged: true, iterations, cross_check: None };
            }
            if k == basis_cap || iterations >= max_iter {
                start = ritz_vector(&basis, &alphas, &betas);
                break;
            }
            betas.push(beta);
            basis.push(w / Complex64::new(beta, 0.0));
        }
    }
    NormEstimate { value: theta.sqrt(), converged: false, iterations, cross_check: None }
}

fn tridiagonal(alphas: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    t
}

/// Largest eigenvalue of the Lanczos tridiagonal and the last entry of its eigenvector.
fn top_ritz_pair(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let eig = tridiagonal(alphas, &betas[..alphas.len() - 1]).symmetric_eigen();
    let top = eig.eigenvalues.imax();
    (eig.eigenvalues[top], eig.eigenvectors[(alphas.len() - 1, top)])
}

fn ritz_vector(basis: &[DVector<Complex64>], alphas: &[f64], betas: &[f64]) -> DVector<Complex64> {
    let eig = tridiagonal(alphas, &betas[..alphas.len() - 1]).symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let mut v = DVector::from_element(basis[0].len(), Complex64::new(0.0, 0.0));
    for (i, q) in basis.iter().enumerate() {
        v.axpy(Complex64::new(eig.eigenvectors[(i, top)], 0.0), q, Complex64::new(1.0, 0.0));
    }
    let len = v.norm();
    v / Complex64::new(len, 0.0)
}

/// Power iteration on `M^dagger M` from a seeded Gaussian start vector.
///
/// Stops once the Rayleigh quotient changes by less than `tol` relative to its
/// value, then runs one more pass. Returns the square root of the final
/// Rayleigh quotient.
pub fn power_iteration(m: &DMatrix<Complex64>, tol: f64, max_iter: usize) -> NormEstimate {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return NormEstimate { value: 0.0, converged: true, iterations: 0, cross_check: None };
    }
    let mut v = start_vector(cols);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut w = DVector::from_element(rows, zero);
    let mut u = DVector::from_element(cols, zero);

    let mut rayleigh = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut refine = false;
    while iterations < max_iter {
        iterations += 1;
        w.gemv(one, m, &v, zero);
        let next = w.norm_squared();
        if next == 0.0 {
            return NormEstimate { value: 0.0, converged: true, iterations, cross_check: None };
        }
        let gap = (next - rayleigh).abs();
        rayleigh = next;
        if refine {
            converged = true;
            break;
        }
        if gap <= tol * next {
            refine = true;
        }
        u.gemv_ad(one, m, &w, zero);
        let len = u.norm();
        v.copy_from(&u);
        v /= Complex64::new(len, 0.0);
    }
    NormEstimate { value: rayleigh.sqrt(), converged, iterations, cross_check: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_norm() {
        for n in [1usize, 5, 80] {
            let id = DMatrix::<Complex64>::identity(n, n);
            assert!((lanczos(&id, DEFAULT_TOL, MAX_ITERATIONS).value - 1.0).abs() < 1e-12);
            assert!((operator_norm(&id, DEFAULT_TOL).value - 1.0).abs() < 1e-12);
            assert!((power_iteration(&id, DEFAULT_TOL, MAX_ITERATIONS).value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_norm() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 0.9),
            Complex64::new(-0.5, 0.0),
        ]));
        assert!((operator_norm(&d, DEFAULT_TOL).value - 0.9).abs() < 1e-14);
        let p = power_iteration(&d, DEFAULT_TOL, MAX_ITERATIONS);
        assert!(p.converged);
        assert!((p.value - 0.9).abs() < 1e-9);
    }

    #[test]
    fn zero_matrix() {
        let z = DMatrix::<Complex64>::zeros(70, 70);
        assert_eq!(operator_norm(&z, DEFAULT_TOL).value, 0.0);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        // nearly degenerate top pair: cannot converge in 3 steps
        let mut diag = vec![Complex64::new(0.5, 0.0); 10];
        diag[0] = Complex64::new(1.0, 0.0);
        diag[1] = Complex64::new(0.999, 0.0);
        let d = DMatrix::from_diagonal(&DVector::from_vec(diag));
        let p = power_iteration(&d, DEFAULT_TOL, 3);
        assert!(!p.converged);
        assert!(p.value <= 1.0 + 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let mut rng = stream(9, purpose::POWER_START, 0);
        for n in [1usize, 7, 90, 300] {
            let m = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            }) / Complex64::new(n as f64, 0.0);
            let est = lanczos(&m, DEFAULT_TOL, MAX_ITERATIONS);
            assert!(est.converged);
            let dense = singular_values(&m)[0];
            assert!((est.value - dense).abs() < 1e-9 * dense, "n={n}");
        }
        // near-degenerate top pair with a large bulk
        let mut diag: Vec<Complex64> = (0..200).map(|i| Complex64::new(0.5 * i as f64 / 200.0, 0.0)).collect();
        diag[17] = Complex64::new(1.0, 0.0);
        diag[42] = Complex64::new(0.0, 0.9999);
        let d = DMatrix::from_diagonal(&DVector::from_vec(diag));
        let est = lanczos(&d, DEFAULT_TOL, MAX_ITERATIONS);
        assert!(est.converged && (est.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cross_check_reports_difference() {
        let m = DMatrix::from_fn(20, 20, |i, j| Complex64::new((i * j) as f64 / 400.0, (i as f64 - j as f64) / 40.0));
        let est = operator_norm_with(&m, DEFAULT_TOL, NormMethod::CrossCheck);
        assert!(est.cross_check.unwrap() < 1e-8);
    }
}
