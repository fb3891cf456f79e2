//! Sequential minimal optimisation for the soft-margin SVM dual.
//!
//! Minimises `½ αᵀQα − Σα` with `Q_ij = y_i y_j K_ij`, `0 ≤ α ≤ C` and
//! `Σ α_i y_i = 0`, updating the maximal violating pair at each step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel evaluations allowed per binary machine; each iteration reads two
/// kernel rows.
pub const KERNEL_EVAL_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    pub c: f64,
    pub tol: f64,
    /// Defaults to `KERNEL_EVAL_BUDGET / (2n)`.
    pub max_iter: Option<usize>,
}

impl SmoConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: 1e-3,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Added to `Σ α_i y_i K(x_i, x)`.
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final maximal KKT violation `m(α) − M(α)`.
    pub violation: f64,
    /// Dual objective `Σα − ½αᵀQα` after each iteration (starts at 0).
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl BinarySolution {
    pub fn decision(&self, y: &[f64], k_row: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(y)
            .zip(k_row)
            .filter(|((a, _), _)| **a > 0.0)
            .map(|((a, yi), k)| a * yi * k)
            .sum::<f64>()
            + self.bias
    }
}

/// Trains one binary machine on a row-major `n × n` kernel matrix with
/// labels in `{−1, +1}`. Hitting the iteration cap is reported through
/// `converged = false`, not as an error.
pub fn smo_train_binary(k: &[f64], y: &[f64], cfg: &SmoConfig) -> Result<BinarySolution> {
    let n = y.len();
    if k.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: k.len(),
        });
    }
    if !(cfg.c > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::InvalidParam(format!(
            "SMO needs C > 0 and tol > 0, got C = {}, tol = {}",
            cfg.c, cfg.tol
        )));
    }
    if let Some(bad) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidParam(format!(
            "label {} at {bad} is not ±1",
            y[bad]
        )));
    }
    let c = cfg.c;
    let max_iter = cfg
        .max_iter
        .unwrap_or((KERNEL_EVAL_BUDGET / (2 * n.max(1))).max(1));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = vec![0.0];
    let mut iterations = 0;
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];

    let select = |alpha: &[f64], grad: &[f64]| -> Option<(usize, usize, f64)> {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut bi, mut bj) = (None, None);
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if up && v > gmax {
                gmax = v;
                bi = Some(t);
            }
            if low && v < gmin {
                gmin = v;
                bj = Some(t);
            }
        }
        Some((bi?, bj?, gmax - gmin))
    };

    let mut violation = 0.0;
    let mut converged = false;
    loop {
        let Some((i, j, gap)) = select(&alpha, &grad) else {
            converged = true;
            break;
        };
        violation = gap;
        if gap < cfg.tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = 1e-12;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = 1e-12;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        trace.push(dual_objective(&alpha, &grad));
    }

    Ok(BinarySolution {
        bias: -rho(&alpha, &grad, y, c),
        alpha,
        converged,
        iterations,
        violation,
        objective_trace: trace,
    })
}

/// `Σα − ½αᵀQα`, using `∇ = Qα − 1`.
fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    -0.5 * alpha
        .iter()
        .zip(grad)
        .map(|(a, g)| a * (g - 1.0))
        .sum::<f64>()
}

fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rbf_matrix(x: &[[f64; 2]], sigma2: f64) -> Vec<f64> {
        let n = x.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2 = (x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2);
                k[i * n + j] = (-d2 / (2.0 * sigma2)).exp();
            }
        }
        k
    }

    fn check_feasible(sol: &BinarySolution, y: &[f64], c: f64) {
        for &a in &sol.alpha {
            assert!((0.0..=c).contains(&a));
        }
        let s: f64 = sol.alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        assert!(s.abs() < 1e-6);
    }

    #[test]
    fn two_points_linear() {
        let k = [1.0, 0.0, 0.0, 1.0];
        let y = [1.0, -1.0];
        let sol = smo_train_binary(&k, &y, &SmoConfig::new(10.0)).unwrap();
        assert!(sol.converged);
        assert!(sol.alpha.iter().all(|&a| a > 0.0));
        assert!(sol.decision(&y, &k[0..2]) > 0.0);
        assert!(sol.decision(&y, &k[2..4]) < 0.0);
        check_feasible(&sol, &y, 10.0);
    }

    #[test]
    fn xor_with_narrow_rbf() {
        let x = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let k = rbf_matrix(&x, 0.1);
        let sol = smo_train_binary(&k, &y, &SmoConfig::new(100.0)).unwrap();
        assert!(sol.converged);
        check_feasible(&sol, &y, 100.0);
        // Direct evaluation of f(x) = Σ α_i y_i K(x_i, x) + b.
        for t in 0..4 {
            let f: f64 = (0..4)
                .map(|i| sol.alpha[i] * y[i] * k[i * 4 + t])
                .sum::<f64>()
                + sol.bias;
            assert_eq!(f.signum(), y[t]);
        }
    }

    #[test]
    fn objective_is_monotone_and_kkt_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<[f64; 2]> = (0..40)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|p| {
                if p[0] * p[1] + 0.3 * rng.random_range(-1.0..1.0) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let k = rbf_matrix(&x, 0.5);
        let sol = smo_train_binary(&k, &y, &SmoConfig::new(2.0)).unwrap();
        assert!(sol.converged);
        assert!(sol.violation < 1e-3);
        assert!(sol.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        check_feasible(&sol, &y, 2.0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<[f64; 2]> = (0..30)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = (0..30)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let k = rbf_matrix(&x, 0.05);
        let cfg = SmoConfig {
            max_iter: Some(2),
            ..SmoConfig::new(100.0)
        };
        let sol = smo_train_binary(&k, &y, &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(smo_train_binary(&[1.0], &[1.0], &SmoConfig::new(0.0)).is_err());
        assert!(smo_train_binary(&[1.0], &[0.5], &SmoConfig::new(1.0)).is_err());
        assert!(smo_train_binary(&[1.0, 0.0], &[1.0], &SmoConfig::new(1.0)).is_err());
    }
}
