//! Class-weighted, L2-regularized logistic regression with an unregularized
//! intercept, solved by a truncated Newton method.
//!
//! Objective over parameters `(w, b)`:
//!
//! ```text
//! f(w, b) = ½‖w‖² + C · Σᵢ αᵢ · [softplus(zᵢ) − yᵢ zᵢ],   zᵢ = w·xᵢ + b
//! ```

use super::{ClassifierError, Matrix};

/// How per-example loss weights are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassWeighting {
    /// `αᵢ = n / (2 · n_class(yᵢ))`: both classes carry equal total weight.
    #[default]
    Balanced,
    /// Every example has weight 1.
    Uniform,
}

pub fn class_weights(y: &[bool], weighting: ClassWeighting) -> Vec<f64> {
    match weighting {
        ClassWeighting::Uniform => vec![1.0; y.len()],
        ClassWeighting::Balanced => {
            let n = y.len() as f64;
            let pos = y.iter().filter(|&&v| v).count() as f64;
            let neg = n - pos;
            y.iter()
                .map(|&v| if v { n / (2.0 * pos) } else { n / (2.0 * neg) })
                .collect()
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// The weighted regularized logistic loss over a fixed training set.
pub struct LogisticObjective<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    weights: Vec<f64>,
    cost: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a [bool], weights: Vec<f64>, cost: f64) -> Self {
        assert_eq!(x.rows(), y.len());
        assert_eq!(weights.len(), y.len());
        Self { x, y, weights, cost }
    }

    /// Number of parameters: feature weights plus intercept.
    pub fn dim(&self) -> usize {
        self.x.cols() + 1
    }

    fn margins(&self, params: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let (w, b) = (&params[..d], params[d]);
        self.x
            .iter_rows()
            .map(|row| row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b)
            .collect()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let d = self.x.cols();
        let reg: f64 = params[..d].iter().map(|v| v * v).sum::<f64>() * 0.5;
        let z = self.margins(params);
        let data: f64 = z
            .iter()
            .zip(self.y)
            .zip(&self.weights)
            .map(|((&zi, &yi), &a)| a * (softplus(zi) - if yi { zi } else { 0.0 }))
            .sum();
        reg + self.cost * data
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let z = self.margins(params);
        self.gradient_at(params, &z)
    }

    fn gradient_at(&self, params: &[f64], z: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut g = vec![0.0; d + 1];
        g[..d].copy_from_slice(&params[..d]);
        for (i, row) in self.x.iter_rows().enumerate() {
            let r = self.cost * self.weights[i] * (sigmoid(z[i]) - if self.y[i] { 1.0 } else { 0.0 });
            if r != 0.0 {
                for (gj, xj) in g[..d].iter_mut().zip(row) {
                    *gj += r * xj;
                }
                g[d] += r;
            }
        }
        g
    }

    /// Hessian-vector product given per-example curvature `C·αᵢ·σ(zᵢ)(1−σ(zᵢ))`.
    fn hessian_vec(&self, curvature: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut out = vec![0.0; d + 1];
        out[..d].copy_from_slice(&v[..d]);
        for (i, row) in self.x.iter_rows().enumerate() {
            let c = curvature[i];
            if c == 0.0 {
                continue;
            }
            let xv = row.iter().zip(&v[..d]).map(|(a, b)| a * b).sum::<f64>() + v[d];
            let s = c * xv;
            for (oj, xj) in out[..d].iter_mut().zip(row) {
                *oj += s * xj;
            }
            out[d] += s;
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub initial_gradient_norm: f64,
    pub final_gradient_norm: f64,
    pub converged: bool,
}

/// Minimizes the objective from the zero vector until
/// `‖∇f‖ ≤ 1e-9 · max(1, ‖∇f(0)‖)`.
pub fn minimize(obj: &LogisticObjective<'_>) -> (Vec<f64>, SolverReport) {
    const MAX_NEWTON: usize = 200;
    let dim = obj.dim();
    let mut params = vec![0.0; dim];
    let mut z = obj.margins(&params);
    let mut g = obj.gradient_at(&params, &z);
    let g0 = norm(&g);
    let tol = 1e-9 * g0.max(1.0);
    let mut f = obj.value(&params);
    let mut iterations = 0;
    let mut gnorm = g0;
    while gnorm > tol && iterations < MAX_NEWTON {
        iterations += 1;
        let curvature: Vec<f64> = z
            .iter()
            .zip(&obj.weights)
            .map(|(&zi, &a)| {
                let s = sigmoid(zi);
                obj.cost * a * s * (1.0 - s)
            })
            .collect();
        // conjugate gradient on H p = -g
        let forcing = (gnorm / g0.max(f64::MIN_POSITIVE)).sqrt().min(0.1);
        let cg_tol = (forcing * gnorm).max(0.1 * tol);
        let mut p = vec![0.0; dim];
        let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut dir = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..(2 * dim + 20) {
            if rr.sqrt() <= cg_tol {
                break;
            }
            let hd = obj.hessian_vec(&curvature, &dir);
            let curv = dot(&dir, &hd);
            if !(curv > 0.0) {
                break;
            }
            let alpha = rr / curv;
            for k in 0..dim {
                p[k] += alpha * dir[k];
                r[k] -= alpha * hd[k];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for k in 0..dim {
                dir[k] = r[k] + beta * dir[k];
            }
        }
        if p.iter().all(|&v| v == 0.0) {
            p = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&g, &p);
        if !(slope < 0.0) {
            p = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&g, &p);
        // backtracking Armijo line search
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&p).map(|(a, b)| a + step * b).collect();
            let ft = obj.value(&trial);
            // near the optimum the decrease can fall below rounding noise in f
            let flat = step == 1.0 && ft - f <= 8.0 * f64::EPSILON * f.abs();
            if ft <= f + 1e-4 * step * slope || flat {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            break;
        };
        params = next;
        f = fnext;
        z = obj.margins(&params);
        g = obj.gradient_at(&params, &z);
        gnorm = norm(&g);
    }
    let report = SolverReport {
        iterations,
        initial_gradient_norm: g0,
        final_gradient_norm: gnorm,
        converged: gnorm <= tol,
    };
    (params, report)
}

/// Linear decision function `w·x + b` with the cost it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub cost: f64,
}

impl LinearModel {
    /// The constant 0.5-probability model.
    pub fn trivial(dim: usize, cost: f64) -> Self {
        Self {
            weights: vec![0.0; dim],
            intercept: 0.0,
            cost,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_value(x))
    }
}

/// Trains a linear model on standardized features.
pub fn train_linear(
    x: &Matrix,
    y: &[bool],
    cost: f64,
    weighting: ClassWeighting,
) -> Result<LinearModel, ClassifierError> {
    train_linear_with_report(x, y, cost, weighting).map(|(m, _)| m)
}

pub fn train_linear_with_report(
    x: &Matrix,
    y: &[bool],
    cost: f64,
    weighting: ClassWeighting,
) -> Result<(LinearModel, SolverReport), ClassifierError> {
    if x.rows() != y.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if !(cost > 0.0) || !cost.is_finite() {
        return Err(ClassifierError::InvalidCost(cost));
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(ClassifierError::DegenerateLabel);
    }
    let obj = LogisticObjective::new(x, y, class_weights(y, weighting), cost);
    let (params, report) = minimize(&obj);
    if !report.converged {
        log::warn!(
            "logistic solver stopped after {} iterations with gradient norm {:.3e}",
            report.iterations,
            report.final_gradient_norm
        );
    }
    let d = x.cols();
    Ok((
        LinearModel {
            weights: params[..d].to_vec(),
            intercept: params[d],
            cost,
        },
        report,
    ))
}
