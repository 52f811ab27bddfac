//! L2-regularized (ridge) binary logistic regression, i.e. the MAP estimate
//! under a zero-mean Gaussian prior on the weights.
//!
//! Minimizes `lambda/2 * |w|^2 + sum_i c_i * log(1 + exp(-y_i (w.x_i + b)))`
//! with a truncated Newton (conjugate gradient) method and Armijo
//! backtracking. The intercept gets a much weaker penalty so it can absorb
//! label imbalance while keeping the problem strictly convex.

use serde::{Deserialize, Serialize};

use crate::featurize::{FeatureMatrix, SparseVector};

const BIAS_PENALTY_SCALE: f64 = 1e-6;
const MAX_CG_ITERS: usize = 250;
const MAX_LINE_SEARCH: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    /// Probability of the positive label.
    pub fn probability(&self, x: &SparseVector) -> f64 {
        sigmoid(self.decision(x))
    }

    /// Probability for a one-dimensional input, used when calibrating scores.
    pub fn probability_scalar(&self, v: f64) -> f64 {
        sigmoid(self.weights.first().copied().unwrap_or(0.0) * v + self.bias)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-m))` without overflow.
fn log_loss(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a FeatureMatrix,
    y: &'a [f64],
    c: Vec<f64>,
    lambda: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.x.dim()
    }

    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        self.x
            .rows()
            .iter()
            .zip(self.y)
            .map(|(r, &y)| y * (r.dot_dense(w) + b))
            .collect()
    }

    fn objective(&self, w: &[f64], b: f64) -> f64 {
        let reg = 0.5 * self.lambda * (dot(w, w) + BIAS_PENALTY_SCALE * b * b);
        let loss: f64 = self
            .margins(w, b)
            .iter()
            .zip(&self.c)
            .map(|(&m, &c)| c * log_loss(m))
            .sum();
        reg + loss
    }

    /// Gradient and Hessian diagonal weights at `(w, b)`.
    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64, Vec<f64>) {
        let mut g: Vec<f64> = w.iter().map(|v| self.lambda * v).collect();
        let mut gb = self.lambda * BIAS_PENALTY_SCALE * b;
        let mut d = Vec::with_capacity(self.y.len());
        for ((row, &y), (&m, &c)) in self
            .x
            .rows()
            .iter()
            .zip(self.y)
            .zip(self.margins(w, b).iter().zip(&self.c))
        {
            let s = sigmoid(m);
            let coef = c * (s - 1.0) * y;
            for (f, v) in row.iter() {
                g[f] += coef * v;
            }
            gb += coef;
            d.push(c * s * (1.0 - s));
        }
        (g, gb, d)
    }

    fn hess_vec(&self, d: &[f64], v: &[f64], vb: f64) -> (Vec<f64>, f64) {
        let mut out: Vec<f64> = v.iter().map(|x| self.lambda * x).collect();
        let mut ob = self.lambda * BIAS_PENALTY_SCALE * vb;
        for (row, &di) in self.x.rows().iter().zip(d) {
            let z = di * (row.dot_dense(v) + vb);
            if z != 0.0 {
                for (f, val) in row.iter() {
                    out[f] += z * val;
                }
                ob += z;
            }
        }
        (out, ob)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits the model. `y` holds +1 / -1; `weights` default to one.
/// Stops when the gradient norm falls below `tol` times its initial value
/// (or `tol` absolutely for tiny gradients); `converged` is false if
/// `max_iter` Newton steps were not enough.
pub fn fit(
    x: &FeatureMatrix,
    y: &[f64],
    weights: Option<&[f64]>,
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> LogisticModel {
    let problem = Problem {
        x,
        y,
        c: weights.map_or_else(|| vec![1.0; y.len()], <[f64]>::to_vec),
        lambda,
    };
    let n = problem.dim();
    let mut w = vec![0.0; n];
    let mut b = 0.0;
    let mut f = problem.objective(&w, b);
    let (mut g, mut gb, mut d) = problem.gradient(&w, b);
    let g0 = (dot(&g, &g) + gb * gb).sqrt();
    let threshold = tol * g0.max(1.0);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        let gnorm = (dot(&g, &g) + gb * gb).sqrt();
        if gnorm <= threshold {
            converged = true;
            break;
        }
        iterations += 1;

        // Conjugate gradient on H s = -g.
        let mut s = vec![0.0; n];
        let mut sb = 0.0;
        let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut rb = -gb;
        let mut p = r.clone();
        let mut pb = rb;
        let mut rr = dot(&r, &r) + rb * rb;
        let cg_tol = (0.5f64).min(gnorm.sqrt()) * gnorm;
        for _ in 0..MAX_CG_ITERS {
            if rr.sqrt() <= cg_tol {
                break;
            }
            let (hp, hpb) = problem.hess_vec(&d, &p, pb);
            let php = dot(&p, &hp) + pb * hpb;
            if php <= 0.0 {
                break;
            }
            let alpha = rr / php;
            for i in 0..n {
                s[i] += alpha * p[i];
                r[i] -= alpha * hp[i];
            }
            sb += alpha * pb;
            rb -= alpha * hpb;
            let rr_new = dot(&r, &r) + rb * rb;
            let beta = rr_new / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            pb = rb + beta * pb;
            rr = rr_new;
        }

        let slope = dot(&g, &s) + gb * sb;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_LINE_SEARCH {
            let w_new: Vec<f64> = w.iter().zip(&s).map(|(a, b)| a + step * b).collect();
            let b_new = b + step * sb;
            let f_new = problem.objective(&w_new, b_new);
            if f_new <= f + 1e-4 * step * slope {
                w = w_new;
                b = b_new;
                f = f_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        (g, gb, d) = problem.gradient(&w, b);
    }
    if !converged {
        let gnorm = (dot(&g, &g) + gb * gb).sqrt();
        converged = gnorm <= threshold;
    }
    LogisticModel {
        weights: w,
        bias: b,
        lambda,
        converged,
        iterations,
    }
}
