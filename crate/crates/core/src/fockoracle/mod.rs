//! Truncated number-basis Hamiltonians and their low-lying eigenvalues.
//!
//! Basis index `2n + spin` with spin 0 = up (σ_z = +1), unless the
//! spin-major ordering is requested.

mod eigen;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FockModel {
    /// `a†a + μσ_z + λσ_x(a + a†) + εσ_x`
    RabiEps { lambda: f64, mu: f64, eps: f64 },
    /// `(ω + U/2 σ_z) a†a + ω₀/2 σ_z + gσ_x(a + a†)`
    NonlinearU { omega: f64, omega0: f64, g: f64, u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisOrder {
    #[default]
    NumberMajor,
    SpinMajor,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("truncation N = {0} is too small (need N >= 2)")]
    TruncationTooSmall(usize),
    #[error("requested {k} eigenvalues from a {dim}-dimensional matrix")]
    TooManyEigenvalues { k: usize, dim: usize },
    #[error("QL iteration did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("eigenpair {index} has residual {residual:.3e} above the bound {bound:.3e}")]
    ResidualTooLarge { index: usize, residual: f64, bound: f64 },
    #[error("truncation list must be nonempty and increasing")]
    BadTruncationList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub n_trunc: usize,
    pub dim: usize,
    /// Dense symmetric matrix, `matrix[row][col]`.
    pub matrix: Vec<Vec<f64>>,
    pub model: FockModel,
    pub order: BasisOrder,
}

const QL_MAX_ITER: usize = 60;

pub fn build_hamiltonian(model: FockModel, n_trunc: usize) -> Result<FockOperator, OracleError> {
    build_hamiltonian_ordered(model, n_trunc, BasisOrder::NumberMajor)
}

pub fn build_hamiltonian_ordered(
    model: FockModel,
    n_trunc: usize,
    order: BasisOrder,
) -> Result<FockOperator, OracleError> {
    if n_trunc < 2 {
        return Err(OracleError::TruncationTooSmall(n_trunc));
    }
    let dim = 2 * n_trunc;
    let idx = |n: usize, spin: usize| match order {
        BasisOrder::NumberMajor => 2 * n + spin,
        BasisOrder::SpinMajor => spin * n_trunc + n,
    };
    let sz = |spin: usize| if spin == 0 { 1.0 } else { -1.0 };
    let (flip, hop) = match model {
        FockModel::RabiEps { lambda, eps, .. } => (eps, lambda),
        FockModel::NonlinearU { g, .. } => (0.0, g),
    };
    let mut m = vec![vec![0.0; dim]; dim];
    for n in 0..n_trunc {
        let nf = n as f64;
        for spin in 0..2 {
            let i = idx(n, spin);
            m[i][i] = match model {
                FockModel::RabiEps { mu, .. } => nf + mu * sz(spin),
                FockModel::NonlinearU { omega, omega0, u, .. } => {
                    (omega + 0.5 * u * sz(spin)) * nf + 0.5 * omega0 * sz(spin)
                }
            };
            if spin == 0 {
                let j = idx(n, 1);
                m[i][j] += flip;
                m[j][i] += flip;
            }
            if n + 1 < n_trunc {
                let j = idx(n + 1, 1 - spin);
                let amp = hop * (nf + 1.0).sqrt();
                m[i][j] += amp;
                m[j][i] += amp;
            }
        }
    }
    Ok(FockOperator { n_trunc, dim, matrix: m, model, order })
}

impl FockOperator {
    /// Infinity norm (maximum absolute row sum).
    pub fn norm(&self) -> f64 {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max((self.matrix[i][j] - self.matrix[j][i]).abs());
            }
        }
        worst
    }
}

/// The `k` lowest eigenvalues in ascending order, each certified by
/// `‖Hv − Ev‖ ≤ 1e-10 ‖H‖`.
pub fn eigenvalues(op: &FockOperator, k: usize) -> Result<Vec<f64>, OracleError> {
    if k > op.dim {
        return Err(OracleError::TooManyEigenvalues { k, dim: op.dim });
    }
    let eig = eigen::sym_eigen(&op.matrix, QL_MAX_ITER).ok_or(OracleError::ConvergenceFailure(QL_MAX_ITER))?;
    let bound = 1e-10 * op.norm().max(1.0);
    for c in 0..k {
        let e = eig.values[c];
        let residual = (0..op.dim)
            .map(|i| {
                let hv: f64 = (0..op.dim).map(|j| op.matrix[i][j] * eig.vectors[j][c]).sum();
                (hv - e * eig.vectors[i][c]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if residual > bound {
            return Err(OracleError::ResidualTooLarge { index: c, residual, bound });
        }
    }
    Ok(eig.values[..k].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_trunc: usize,
    /// `max_i |E_i(N) − E_i(N_last)|` over the `k` lowest levels.
    pub drift: f64,
}

pub fn convergence_check(model: FockModel, n_list: &[usize], k: usize) -> Result<Vec<ConvergenceRow>, OracleError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OracleError::BadTruncationList);
    }
    let spectra: Vec<Vec<f64>> = n_list
        .iter()
        .map(|&n| eigenvalues(&build_hamiltonian(model, n)?, k))
        .collect::<Result<_, _>>()?;
    let last = spectra.last().expect("nonempty");
    Ok(n_list
        .iter()
        .zip(&spectra)
        .map(|(&n, s)| ConvergenceRow {
            n_trunc: n,
            drift: s.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_rabi_is_diagonal() {
        let op = build_hamiltonian(FockModel::RabiEps { lambda: 0.0, mu: 0.3, eps: 0.0 }, 4).unwrap();
        for i in 0..op.dim {
            for j in 0..op.dim {
                if i != j {
                    assert_eq!(op.matrix[i][j], 0.0);
                }
            }
            let n = (i / 2) as f64;
            let expect = if i % 2 == 0 { n + 0.3 } else { n - 0.3 };
            assert_eq!(op.matrix[i][i], expect);
        }
    }

    #[test]
    fn decoupled_nonlinear_is_diagonal() {
        let (omega, omega0, u) = (2.0, 1.0, -2.0);
        let op = build_hamiltonian(FockModel::NonlinearU { omega, omega0, g: 0.0, u }, 5).unwrap();
        let mut expect: Vec<f64> = (0..5)
            .flat_map(|n| {
                let n = n as f64;
                [n * (omega + u / 2.0) + omega0 / 2.0, n * (omega - u / 2.0) - omega0 / 2.0]
            })
            .collect();
        expect.sort_by(f64::total_cmp);
        assert_eq!(eigenvalues(&op, 10).unwrap(), expect);
    }

    #[test]
    fn zero_coupling_closed_form() {
        let (mu, eps) = (0.7f64, 0.2f64);
        let r = (mu * mu + eps * eps).sqrt();
        let op = build_hamiltonian(FockModel::RabiEps { lambda: 0.0, mu, eps }, 10).unwrap();
        let mut expect: Vec<f64> = (0..10).flat_map(|n| [n as f64 - r, n as f64 + r]).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in eigenvalues(&op, 20).unwrap().iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn displaced_oscillator_levels() {
        let lambda = 0.5;
        let op = build_hamiltonian(FockModel::RabiEps { lambda, mu: 0.0, eps: 0.0 }, 60).unwrap();
        let ev = eigenvalues(&op, 8).unwrap();
        for (i, e) in ev.iter().enumerate() {
            let n = (i / 2) as f64;
            assert!((e - (n - lambda * lambda)).abs() < 1e-10, "{i}: {e}");
        }
    }

    #[test]
    fn reduces_to_rabi_at_zero_nonlinearity() {
        let (lambda, mu) = (0.6, 0.35);
        let a = build_hamiltonian(FockModel::RabiEps { lambda, mu, eps: 0.0 }, 12).unwrap();
        let b = build_hamiltonian(FockModel::NonlinearU { omega: 1.0, omega0: 2.0 * mu, g: lambda, u: 0.0 }, 12).unwrap();
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn ordering_invariance() {
        let model = FockModel::NonlinearU { omega: 2.0, omega0: 1.0, g: 0.7, u: -2.0 };
        let a = eigenvalues(&build_hamiltonian(model, 40).unwrap(), 12).unwrap();
        let b = eigenvalues(&build_hamiltonian_ordered(model, 40, BasisOrder::SpinMajor).unwrap(), 12).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_matrix() {
        let op = build_hamiltonian(FockModel::RabiEps { lambda: 0.9, mu: 0.4, eps: 0.3 }, 30).unwrap();
        assert!(op.max_asymmetry() <= 1e-14);
    }

    #[test]
    fn preconditions() {
        let m = FockModel::RabiEps { lambda: 0.1, mu: 0.1, eps: 0.0 };
        assert_eq!(build_hamiltonian(m, 1), Err(OracleError::TruncationTooSmall(1)));
        let op = build_hamiltonian(m, 2).unwrap();
        assert_eq!(eigenvalues(&op, 5), Err(OracleError::TooManyEigenvalues { k: 5, dim: 4 }));
        assert_eq!(convergence_check(m, &[4, 3], 2), Err(OracleError::BadTruncationList));
    }

    #[test]
    fn decoupled_drift_is_zero() {
        let m = FockModel::RabiEps { lambda: 0.0, mu: 0.4, eps: 0.0 };
        let rows = convergence_check(m, &[6, 8, 10], 6).unwrap();
        assert!(rows.iter().all(|r| r.drift == 0.0));
    }

    #[test]
    fn rabi_self_convergence() {
        let m = FockModel::RabiEps { lambda: 0.7, mu: 0.4, eps: 0.0 };
        let rows = convergence_check(m, &[120, 160], 8).unwrap();
        assert!(rows[0].drift < 1e-8, "{rows:?}");
    }
}
