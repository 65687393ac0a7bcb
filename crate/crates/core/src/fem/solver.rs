use serde::{Deserialize, Serialize};

use crate::error::{EitError, Result};

/// Settings for the preconditioned conjugate gradient solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual target `‖b − Ax‖ ≤ tol·‖b‖`.
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_iter_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-10,
            max_iter_factor: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// (semi-)definite operator. `x` holds the initial guess on entry.
///
/// The right-hand side must lie in the range of the operator; for the
/// singular pure-Neumann stiffness this means `b ⟂ 1`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    options: &SolverOptions,
) -> Result<SolveStats> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let target = options.rel_tol * bnorm;
    let max_iter = options.max_iter_factor * n.max(1);

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    loop {
        apply(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
            z[i] = r[i] * inv_diag[i];
        }
        let true_res = dot(&r, &r).sqrt();
        if true_res <= target {
            return Ok(SolveStats {
                iterations,
                relative_residual: true_res / bnorm,
            });
        }
        // the recurrence residual drifts from the true one; restart a few times
        if iterations >= max_iter || restarts > 3 {
            return Err(EitError::SolverDiverged {
                iterations,
                residual: true_res / bnorm,
            });
        }
        restarts += 1;
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let mut rnorm = true_res;
        while rnorm > target && iterations < max_iter {
            apply(&p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            iterations += 1;
            rnorm = dot(&r, &r).sqrt();
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // tridiagonal 1D Laplacian + identity
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 3.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let stats = pcg(
            apply,
            &vec![1.0 / 3.0; n],
            &b,
            &mut x,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(stats.relative_residual < 1e-9);
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let n = 10;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (i as f64 + 1.0) * x[i];
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let opts = SolverOptions {
            rel_tol: 1e-12,
            max_iter_factor: 0,
        };
        assert!(matches!(
            pcg(apply, &vec![1.0; n], &b, &mut x, &opts),
            Err(EitError::SolverDiverged { .. })
        ));
    }
}
