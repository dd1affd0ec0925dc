//! L2-regularized logistic regression fit by damped Newton iteration, plus
//! per-fold feature standardization.
//!
//! The objective is the summed negative log-likelihood plus
//! (l2 / 2) * ||w||^2 with an unpenalized intercept. Convergence is a
//! gradient max-norm below `tol` or hitting `max_iter` (reported, not an
//! error).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogisticError {
    #[error("feature matrix is empty")]
    Empty,
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("non-finite value in feature column {0}")]
    NonFiniteColumn(usize),
    #[error("labels and rows differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("singular normal equations; try more regularization")]
    Singular,
}

/// Column means and standard deviations estimated on a training fold.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    /// Estimate from the given rows only; constant columns get sd 0 and are
    /// later mapped to 0.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Standardizer, LogisticError> {
        if rows.is_empty() {
            return Err(LogisticError::Empty);
        }
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(LogisticError::RaggedRow { row: i, got: row.len(), expected: d });
            }
            for (j, v) in row.iter().enumerate() {
                means[j] += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut sds = vec![0.0; d];
        for row in rows {
            for (j, v) in row.iter().enumerate() {
                sds[j] += (v - means[j]).powi(2);
            }
        }
        for s in &mut sds {
            *s = (*s / n).sqrt();
        }
        Ok(Standardizer { means, sds })
    }

    /// Standardize a row with training statistics; constant columns go to 0.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| {
                if self.sds[j] > 0.0 {
                    (v - self.means[j]) / self.sds[j]
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
}

impl LogisticModel {
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let z = self.intercept
            + row
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>();
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable ln(1 + e^z).
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Regularized objective: sum_i [ln(1 + e^{z_i}) - y_i z_i] + (l2/2)||w||^2.
pub fn logistic_loss(rows: &[Vec<f64>], labels: &[u8], weights: &[f64], intercept: f64, l2: f64) -> f64 {
    let mut loss = 0.0;
    for (row, &y) in rows.iter().zip(labels) {
        let z = intercept + row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>();
        loss += log1p_exp(z) - f64::from(y) * z;
    }
    loss + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Solve the symmetric system H x = g in place by Cholesky decomposition.
fn solve_cholesky(h: &mut [Vec<f64>], g: &[f64]) -> Result<Vec<f64>, LogisticError> {
    let n = g.len();
    for j in 0..n {
        for k in 0..j {
            let l = h[j][k];
            for i in j..n {
                h[i][j] -= h[i][k] * l;
            }
        }
        if h[j][j] <= 1e-12 {
            return Err(LogisticError::Singular);
        }
        let diag = h[j][j].sqrt();
        for i in j..n {
            h[i][j] /= diag;
        }
    }
    // forward substitution L y = g
    let mut y = g.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = y[k];
            y[i] -= h[i][k] * v;
        }
        y[i] /= h[i][i];
    }
    // back substitution L^T x = y
    let mut x = y;
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let v = x[k];
            x[i] -= h[k][i] * v;
        }
        x[i] /= h[i][i];
    }
    Ok(x)
}

/// Fit by damped Newton steps; the step is halved while it does not reduce
/// the objective.
pub fn fit_logistic(
    rows: &[Vec<f64>],
    labels: &[u8],
    l2: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LogisticModel, LogisticError> {
    if rows.is_empty() {
        return Err(LogisticError::Empty);
    }
    if rows.len() != labels.len() {
        return Err(LogisticError::LengthMismatch(rows.len(), labels.len()));
    }
    let d = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(LogisticError::RaggedRow { row: i, got: row.len(), expected: d });
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(LogisticError::NonFiniteColumn(j));
            }
        }
    }

    // Parameter vector: weights then intercept at index d.
    let mut theta = vec![0.0; d + 1];
    let mut loss = logistic_loss(rows, labels, &theta[..d], theta[d], l2);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iter {
        iterations = iter + 1;

        let mut grad = vec![0.0; d + 1];
        let mut hess = vec![vec![0.0; d + 1]; d + 1];
        for (row, &y) in rows.iter().zip(labels) {
            let z = theta[d] + row.iter().zip(&theta[..d]).map(|(x, w)| x * w).sum::<f64>();
            let p = sigmoid(z);
            let resid = p - f64::from(y);
            let s = (p * (1.0 - p)).max(1e-12);
            for j in 0..d {
                grad[j] += resid * row[j];
                for k in 0..=j {
                    hess[j][k] += s * row[j] * row[k];
                }
            }
            grad[d] += resid;
            for k in 0..d {
                hess[d][k] += s * row[k];
            }
            hess[d][d] += s;
        }
        for j in 0..d {
            grad[j] += l2 * theta[j];
            hess[j][j] += l2;
        }
        for j in 0..=d {
            for k in (j + 1)..=d {
                hess[j][k] = hess[k][j];
            }
        }

        let max_grad = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if max_grad < tol {
            converged = true;
            break;
        }

        let step = solve_cholesky(&mut hess, &grad)?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&step)
                .map(|(t, s)| t - scale * s)
                .collect();
            let new_loss = logistic_loss(rows, labels, &candidate[..d], candidate[d], l2);
            if new_loss <= loss {
                theta = candidate;
                loss = new_loss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            converged = max_grad < tol.max(1e-6);
            break;
        }
    }

    Ok(LogisticModel {
        weights: theta[..d].to_vec(),
        intercept: theta[d],
        converged,
        iterations,
        final_loss: loss,
    })
}
