//! Restarted symmetric Lanczos for one extremal eigenpair.
//!
//! Each cycle grows a Krylov basis (optionally fully reorthogonalized),
//! watches the Ritz residual estimate `beta_k |y_k|`, and on exit forms the
//! Ritz vector and measures its true residual. A cycle that ends above
//! tolerance restarts from the current Ritz vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{End, Reorthogonalization, SpectralConfig};
use crate::error::{Error, Result};
use crate::model::LinearOperator;

const CHECK_EVERY: usize = 5;
const MIN_KRYLOV: usize = 20;
const MAX_KRYLOV: usize = 300;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||A v - value v||`
    pub residual: f64,
    pub matvecs: usize,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [f64], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

/// Seeded start vector with entries uniform in `[-1, 1)`, normalized.
pub fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = norm(&v);
    scale(&mut v, 1.0 / n);
    v
}

fn krylov_limit(dim: usize, cfg: &SpectralConfig) -> usize {
    let by_memory = if cfg.krylov_dim > 0 {
        cfg.krylov_dim
    } else {
        let bytes = cfg.memory_budget_mb.saturating_mul(1 << 20);
        (bytes / (8 * dim.max(1))).clamp(MIN_KRYLOV, MAX_KRYLOV)
    };
    by_memory.min(dim).max(1)
}

/// Extremal eigenpair of the tridiagonal matrix `(alpha, beta)`.
fn tridiagonal_extremal(alpha: &[f64], beta: &[f64], end: End) -> (f64, Vec<f64>, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let idx = match end {
        End::Lowest => eig.eigenvalues.imin(),
        End::Highest => eig.eigenvalues.imax(),
    };
    let spread = eig.eigenvalues.amax();
    (
        eig.eigenvalues[idx],
        eig.eigenvectors.column(idx).iter().copied().collect(),
        spread,
    )
}

/// Lowest or highest eigenpair of a real symmetric operator.
pub fn lanczos_extremal(
    op: &dyn LinearOperator,
    end: End,
    cfg: &SpectralConfig,
    start: Option<&[f64]>,
) -> Result<Eigenpair> {
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::InvalidParameter("eigensolve on an empty operator".into()));
    }
    let mut w = vec![0.0; dim];
    if dim == 1 {
        op.apply(&[1.0], &mut w);
        return Ok(Eigenpair {
            value: w[0],
            vector: vec![1.0],
            residual: 0.0,
            matvecs: 1,
        });
    }

    let kmax = krylov_limit(dim, cfg);
    let mut v = match start {
        Some(s) if s.len() == dim && norm(s) > 0.0 => {
            let mut v = s.to_vec();
            let n = norm(&v);
            scale(&mut v, 1.0 / n);
            v
        }
        Some(s) if s.len() != dim => {
            return Err(Error::DimensionMismatch {
                left: s.len(),
                right: dim,
            })
        }
        _ => start_vector(dim, cfg.seed),
    };

    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut anorm: f64 = 0.0;

    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax);
        let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        basis.push(std::mem::take(&mut v));
        let mut ritz: Option<(f64, Vec<f64>)> = None;

        for k in 0..kmax {
            op.apply(&basis[k], &mut w);
            matvecs += 1;
            let mut a = dot(&w, &basis[k]);
            axpy(-a, &basis[k], &mut w);
            if k > 0 {
                axpy(-beta[k - 1], &basis[k - 1], &mut w);
            }
            if cfg.reorth == Reorthogonalization::Full {
                // two passes of classical Gram-Schmidt
                for _ in 0..2 {
                    for (j, q) in basis.iter().enumerate() {
                        let c = dot(&w, q);
                        axpy(-c, q, &mut w);
                        if j == k {
                            a += c;
                        }
                    }
                }
            }
            alpha.push(a);
            let b = norm(&w);

            let last = k + 1 == kmax || matvecs >= cfg.max_iter;
            let breakdown = b <= 1e-13 * anorm.max(a.abs()).max(f64::MIN_POSITIVE);
            if (k + 1) % CHECK_EVERY == 0 || last || breakdown {
                let (theta, y, spread) = tridiagonal_extremal(&alpha, &beta, end);
                anorm = anorm.max(spread);
                let estimate = b * y[k].abs();
                ritz = Some((theta, y));
                if breakdown || last || estimate <= 0.1 * cfg.tol * anorm {
                    break;
                }
            }
            beta.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
        }

        let (_, y) = ritz.expect("at least one Ritz check per cycle");
        let mut x = vec![0.0; dim];
        for (coef, q) in y.iter().zip(&basis) {
            axpy(*coef, q, &mut x);
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        drop(basis);

        op.apply(&x, &mut w);
        matvecs += 1;
        let value = dot(&x, &w);
        axpy(-value, &x, &mut w);
        let residual = norm(&w);
        anorm = anorm.max(value.abs());
        best_residual = best_residual.min(residual);

        if residual <= cfg.tol * anorm {
            return Ok(Eigenpair {
                value,
                vector: x,
                residual,
                matvecs,
            });
        }
        if matvecs >= cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations: matvecs,
                residual: best_residual,
            });
        }
        log::debug!("lanczos restart after {matvecs} matvecs, residual {residual:.3e}");
        v = x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SparseOperator;

    fn cfg() -> SpectralConfig {
        SpectralConfig {
            dense_threshold: 1,
            ..SpectralConfig::default()
        }
    }

    #[test]
    fn diagonal_lowest_and_highest() {
        let op = SparseOperator::from_diagonal(vec![3.0, 1.0, 2.0]);
        let lo = lanczos_extremal(&op, End::Lowest, &cfg(), None).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-12);
        assert!((lo.vector[1].abs() - 1.0).abs() < 1e-10);
        let hi = lanczos_extremal(&op, End::Highest, &cfg(), None).unwrap();
        assert!((hi.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn restarts_with_small_krylov_space() {
        let n = 400;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64).sqrt()).collect();
        let mut trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, diag[i])).collect();
        for i in 0..n - 1 {
            trip.push((i, i + 1, 0.3));
            trip.push((i + 1, i, 0.3));
        }
        let op = SparseOperator::from_triplets(n, trip);
        let small = SpectralConfig {
            krylov_dim: 25,
            ..cfg()
        };
        let a = lanczos_extremal(&op, End::Lowest, &small, None).unwrap();
        let dense = op.to_dense().symmetric_eigenvalues().min();
        assert!((a.value - dense).abs() < 1e-9);
        assert!(a.residual <= 1e-9 * 30.0);
    }

    #[test]
    fn nonconvergence_reports_best_residual() {
        let n = 500;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + 1e-6 * i as f64).collect();
        let op = SparseOperator::from_diagonal(diag);
        let tight = SpectralConfig {
            krylov_dim: 3,
            max_iter: 8,
            tol: 1e-15,
            ..cfg()
        };
        match lanczos_extremal(&op, End::Lowest, &tight, None) {
            Err(Error::NoConvergence { residual, .. }) => assert!(residual.is_finite()),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn start_vector_is_reproducible() {
        assert_eq!(start_vector(10, 7), start_vector(10, 7));
        assert_ne!(start_vector(10, 7), start_vector(10, 8));
        assert!((norm(&start_vector(10, 7)) - 1.0).abs() < 1e-15);
    }
}
