//! Kernel SVM trained by sequential minimal optimization.
//!
//! Solves the dual `min 1/2 a'Qa - e'a` subject to `0 <= a_i <= C` and
//! `y'a = 0`, with `Q_ij = y_i y_j K(x_i, x_j)`, by updating one pair of
//! multipliers at a time. The pair is the maximal violating pair under the
//! second-order working-set rule; the solver stops once the KKT gap
//! `m(a) - M(a)` is within `tol` or the update budget (`100 n`) runs out.
//! Indefinite kernels (sigmoid) are handled by flooring the pair curvature.

use serde::{Deserialize, Serialize};

use super::logistic::{self, LogisticModel};
use super::{KernelConfig, Prediction, SmoParams};
use crate::corpus::Label;
use crate::error::Result;
use crate::featurize::{FeatureMatrix, SparseVector};

const TAU: f64 = 1e-12;
const CALIBRATION_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoModel {
    pub kernel: KernelConfig,
    pub support_vectors: Vec<SparseVector>,
    /// `alpha_i * y_i` for each support vector.
    pub coefficients: Vec<f64>,
    pub rho: f64,
    /// Maps decision values to probabilities when present.
    pub calibrator: Option<LogisticModel>,
    pub converged: bool,
    pub updates: usize,
    pub kkt_gap: f64,
}

impl SmoModel {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.apply(sv.dot(x)))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let f = self.decision(x);
        match &self.calibrator {
            Some(cal) => Prediction::from_positive_probability(cal.probability_scalar(f)),
            None => Prediction::from_decision(f),
        }
    }
}

/// Result of the dual solve, exposed for inspection in tests.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub updates: usize,
    /// `m(a) - M(a)` at exit.
    pub kkt_gap: f64,
}

impl DualSolution {
    /// `1/2 a'Qa - e'a` for the given Gram matrix.
    pub fn objective(&self, gram: &[Vec<f64>], y: &[f64]) -> f64 {
        dual_objective(&self.alpha, gram, y)
    }
}

pub fn dual_objective(alpha: &[f64], gram: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i][j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

pub fn gram_matrix(x: &FeatureMatrix, kernel: &KernelConfig) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.apply(x.row(i).dot(x.row(j)));
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// SMO on a precomputed Gram matrix with labels in {+1, -1}.
pub fn solve_dual(gram: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_updates: usize) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let qd: Vec<f64> = (0..n).map(|i| gram[i][i]).collect();
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i][j];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut updates = 0;
    let mut converged = false;
    let mut gap;
    loop {
        // i: maximal -y_t G_t over I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // j: second-order choice over I_low; gmax2 tracks max y_t G_t.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let yg = y[t] * grad[t];
                if yg > gmax2 {
                    gmax2 = yg;
                }
                let b = gmax + yg;
                if b > 0.0 {
                    let mut a = qd[i] + qd[t] - 2.0 * gram[i][t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        gap = gmax + gmax2;
        if !gap.is_finite() || gap < tol {
            converged = true;
            if !gap.is_finite() {
                gap = 0.0;
            }
            break;
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if updates >= max_updates {
            break;
        }
        updates += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
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
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
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
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias from free multipliers, else the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
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
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    DualSolution {
        alpha,
        rho,
        converged,
        updates,
        kkt_gap: gap,
    }
}

pub(super) fn fit(x: &FeatureMatrix, y: &[Label], params: &SmoParams) -> Result<SmoModel> {
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    if !(signs.contains(&1.0) && signs.contains(&-1.0)) {
        // One class only: constant decision with that class's sign.
        return Ok(SmoModel {
            kernel: params.kernel,
            support_vectors: Vec::new(),
            coefficients: Vec::new(),
            rho: -signs[0],
            calibrator: None,
            converged: true,
            updates: 0,
            kkt_gap: 0.0,
        });
    }
    let gram = gram_matrix(x, &params.kernel);
    let sol = solve_dual(&gram, &signs, params.c, params.tol, 100 * y.len());
    if !sol.converged {
        log::warn!(
            "SMO stopped after {} updates with KKT gap {:.3e} (tol {:.1e})",
            sol.updates,
            sol.kkt_gap,
            params.tol
        );
    }
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(x.row(i).clone());
            coefficients.push(a * signs[i]);
        }
    }
    let mut model = SmoModel {
        kernel: params.kernel,
        support_vectors,
        coefficients,
        rho: sol.rho,
        calibrator: None,
        converged: sol.converged,
        updates: sol.updates,
        kkt_gap: sol.kkt_gap,
    };
    if params.calibrate {
        // Decision values on the training set are the logistic model's only input.
        let outputs: Vec<Vec<f64>> = x.rows().iter().map(|r| vec![model.decision(r)]).collect();
        let design = FeatureMatrix::from_dense(&outputs)?;
        model.calibrator = Some(logistic::fit(&design, &signs, None, CALIBRATION_RIDGE, 100, 1e-8));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use Label::{Misinformation as M, NoMisinformation as N};

    fn params(kernel: KernelConfig) -> SmoParams {
        SmoParams {
            kernel,
            c: 10.0,
            tol: 1e-6,
            calibrate: false,
        }
    }

    #[test]
    fn two_point_linear() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![-1.0]]).unwrap();
        let m = fit(&x, &[M, N], &params(KernelConfig::linear())).unwrap();
        assert_eq!(m.support_vectors.len(), 2);
        // w = 1, b = 0: boundary at the midpoint.
        assert!(m.decision(&SparseVector::zeros(1)).abs() < 1e-9);
        assert!((m.decision(x.row(0)) - 1.0).abs() < 1e-9);
        assert!(m.converged);
    }

    fn xor() -> (FeatureMatrix, Vec<f64>) {
        let x =
            FeatureMatrix::from_dense(&[vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        (x, vec![1.0, 1.0, -1.0, -1.0])
    }

    #[test]
    fn xor_polynomial_matches_brute_force_dual() {
        let (x, y) = xor();
        let kernel = KernelConfig::polynomial(1.0, 1.0, 2);
        let gram = gram_matrix(&x, &kernel);
        let c = 1.0;
        let sol = solve_dual(&gram, &y, c, 1e-9, 10_000);
        assert!(sol.converged);

        // Oracle: grid over (a0, a1, a2) in [0, C]^3, a3 fixed by y'a = 0.
        let steps = 100;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let a = [i, j, k].map(|s| c * s as f64 / steps as f64);
                    let a3 = a[0] + a[1] - a[2];
                    if !(0.0..=c).contains(&a3) {
                        continue;
                    }
                    let alpha = [a[0], a[1], a[2], a3];
                    best = best.min(dual_objective(&alpha, &gram, &y));
                }
            }
        }
        let got = sol.objective(&gram, &y);
        assert!(got <= best + 1e-9, "solver {got} worse than grid {best}");
        assert!(best - got < 1e-3, "grid {best} vs solver {got}");

        let labels = [M, M, N, N];
        let m = fit(&x, &labels, &SmoParams { c, ..params(kernel) }).unwrap();
        for (r, l) in x.rows().iter().zip(labels) {
            assert_eq!(m.predict(r).label, l);
        }
    }

    #[test]
    fn kkt_and_box_constraints_on_separable_set() {
        let (x, labels) = synthetic::linearly_separable(200, 5, 4);
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let gram = gram_matrix(&x, &KernelConfig::linear());
        let c = 100.0;
        let tol = 1e-3;
        let sol = solve_dual(&gram, &y, c, tol, 100 * y.len());
        assert!(sol.converged);
        assert!(sol.kkt_gap <= tol);
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() <= tol);
    }

    #[test]
    fn sigmoid_kernel_respects_update_cap() {
        let (x, labels) = synthetic::linearly_separable(40, 4, 8);
        let p = SmoParams {
            kernel: KernelConfig::sigmoid(0.4, -1.0),
            c: 1.0,
            tol: 1e-12,
            calibrate: false,
        };
        let m = fit(&x, &labels, &p).unwrap();
        assert!(m.updates <= 100 * 40);
        assert!(m.decision(x.row(0)).is_finite());
    }

    #[test]
    fn calibrated_outputs_are_probabilities() {
        let (x, labels) = synthetic::linearly_separable(60, 3, 1);
        let p = SmoParams {
            kernel: KernelConfig::polynomial(1.0, 1.0, 2),
            c: 1.0,
            tol: 1e-3,
            calibrate: true,
        };
        let m = fit(&x, &labels, &p).unwrap();
        for r in x.rows() {
            let pr = m.predict(r);
            assert!(pr.probabilistic);
            assert!((pr.scores[0] + pr.scores[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_class_gives_constant_model() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
        let m = fit(&x, &[N, N], &params(KernelConfig::linear())).unwrap();
        assert_eq!(m.predict(x.row(0)).label, N);
    }
}
