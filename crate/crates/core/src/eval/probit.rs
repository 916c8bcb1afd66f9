//! Probit regression by Newton-Raphson with analytic gradient and Hessian.
//!
//! The likelihood is written through q = 2y - 1, so every observation
//! contributes ln Phi(q * eta). Both ln Phi and the inverse Mills ratio
//! switch to asymptotic expansions deep in the lower tail, which keeps the
//! fit finite even when the index runs past what erfc can resolve.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::EvalError;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;
const TAIL_Z: f64 = -30.0;
/// On the probit index scale this is far beyond any attainable effect for
/// unit-scale covariates; a coefficient out here means the classes separate.
const SEPARATION_BOUND: f64 = 50.0;
const RANK_EPS: f64 = 1e-7;

/// Named model matrix. Rows are observations; the first column is the
/// intercept when built through [`DesignBuilder`].
#[derive(Debug, Clone)]
pub struct Design {
    names: Vec<String>,
    x: DMatrix<f64>,
}

impl Design {
    pub fn new(names: Vec<String>, x: DMatrix<f64>) -> Self {
        assert_eq!(names.len(), x.ncols(), "one name per column");
        Design { names, x }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn cols(&self) -> usize {
        self.x.ncols()
    }
}

/// Assembles an intercept, continuous columns, and dummy-encoded categorical
/// families (first level in sort order is the reference and gets no column).
#[derive(Debug)]
pub struct DesignBuilder {
    n: usize,
    names: Vec<String>,
    cols: Vec<Vec<f64>>,
}

impl DesignBuilder {
    pub fn new(n: usize) -> Self {
        DesignBuilder {
            n,
            names: vec!["intercept".into()],
            cols: vec![vec![1.0; n]],
        }
    }

    pub fn add_continuous(&mut self, name: &str, values: &[f64]) -> &mut Self {
        assert_eq!(values.len(), self.n, "column length");
        self.names.push(name.to_string());
        self.cols.push(values.to_vec());
        self
    }

    pub fn add_categorical(&mut self, family: &str, values: &[String]) -> &mut Self {
        assert_eq!(values.len(), self.n, "column length");
        let mut levels: Vec<&String> = values.iter().collect();
        levels.sort();
        levels.dedup();
        for level in levels.into_iter().skip(1) {
            self.names.push(format!("{family}={level}"));
            self.cols
                .push(values.iter().map(|v| f64::from(v == level)).collect());
        }
        self
    }

    pub fn build(self) -> Design {
        let p = self.cols.len();
        let x = DMatrix::from_fn(self.n, p, |i, j| self.cols[j][i]);
        Design::new(self.names, x)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the score vector.
    pub tol: f64,
}

impl Default for ProbitConfig {
    fn default() -> Self {
        ProbitConfig {
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbitFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// From the inverse observed information; NaN when the fit broke down.
    pub standard_errors: Vec<f64>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    /// McFadden pseudo R-squared, 1 - ll / ll_null.
    pub pseudo_r2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub separated: bool,
}

impl ProbitFit {
    pub fn z_values(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.standard_errors)
            .map(|(b, se)| b / se)
            .collect()
    }

    /// Two-sided normal p-values.
    pub fn p_values(&self) -> Vec<f64> {
        self.z_values()
            .iter()
            .map(|z| erfc(z.abs() / std::f64::consts::SQRT_2))
            .collect()
    }
}

pub fn probit_fit(
    design: &Design,
    y: &[bool],
    config: &ProbitConfig,
) -> Result<ProbitFit, EvalError> {
    let x = design.matrix();
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(EvalError::ShapeMismatch {
            rows: n,
            outcomes: y.len(),
        });
    }
    if n < p {
        return Err(EvalError::TooFewRows { rows: n, cols: p });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::Numeric("non-finite design entry".into()));
    }
    let n_pos = y.iter().filter(|&&v| v).count();
    if n_pos == 0 || n_pos == n {
        return Err(EvalError::SingleClass);
    }
    let bad = collinear_columns(x, design.names());
    if !bad.is_empty() {
        return Err(EvalError::RankDeficient(bad.join(", ")));
    }

    let mut beta = DVector::zeros(p);
    let mut ll = ll_at(x, y, &beta);
    let mut converged = false;
    let mut separated = false;
    let mut iterations = 0;

    for iter in 1..=config.max_iter {
        iterations = iter;
        let (grad, neg_hess) = score_and_information(x, y, &beta);
        if grad.amax() < config.tol {
            converged = true;
            break;
        }
        let delta = match solve_spd(&neg_hess, &grad) {
            Some(d) => d,
            None => {
                separated = true;
                break;
            }
        };
        // Halve the step until the likelihood stops getting worse.
        let mut step = 1.0;
        loop {
            let cand = &beta + &delta * step;
            let cand_ll = ll_at(x, y, &cand);
            if cand_ll >= ll - 1e-12 || step < 1e-4 {
                beta = cand;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
        }
        if beta.amax() > SEPARATION_BOUND {
            separated = true;
            break;
        }
    }

    // Complete separation also shows up as every observation sitting deep on
    // its own side of the index: the likelihood then has no interior maximum
    // and a small gradient does not mean a genuine MLE.
    let final_eta = x * &beta;
    let min_margin = y
        .iter()
        .zip(final_eta.iter())
        .map(|(&yi, &e)| if yi { e } else { -e })
        .fold(f64::INFINITY, f64::min);
    if min_margin > 3.0 {
        separated = true;
    }
    if separated {
        converged = false;
    }

    let (_, neg_hess) = score_and_information(x, y, &beta);
    let standard_errors = match Cholesky::new(neg_hess) {
        Some(chol) => {
            let cov = chol.inverse();
            (0..p).map(|k| cov[(k, k)].sqrt()).collect()
        }
        None => vec![f64::NAN; p],
    };

    let pos_frac = n_pos as f64 / n as f64;
    let null_log_likelihood =
        n_pos as f64 * pos_frac.ln() + (n - n_pos) as f64 * (1.0 - pos_frac).ln();

    Ok(ProbitFit {
        names: design.names().to_vec(),
        coefficients: beta.as_slice().to_vec(),
        standard_errors,
        log_likelihood: ll,
        null_log_likelihood,
        pseudo_r2: 1.0 - ll / null_log_likelihood,
        iterations,
        converged,
        separated,
    })
}

/// Log-likelihood at an arbitrary coefficient vector.
pub fn log_likelihood(design: &Design, y: &[bool], beta: &[f64]) -> f64 {
    assert_eq!(design.rows(), y.len());
    assert_eq!(design.cols(), beta.len());
    ll_at(design.matrix(), y, &DVector::from_column_slice(beta))
}

/// Analytic score vector at an arbitrary coefficient vector.
pub fn gradient(design: &Design, y: &[bool], beta: &[f64]) -> DVector<f64> {
    assert_eq!(design.rows(), y.len());
    assert_eq!(design.cols(), beta.len());
    let (grad, _) = score_and_information(design.matrix(), y, &DVector::from_column_slice(beta));
    grad
}

/// Analytic Hessian of the log-likelihood (negative semidefinite).
pub fn hessian(design: &Design, y: &[bool], beta: &[f64]) -> DMatrix<f64> {
    assert_eq!(design.rows(), y.len());
    assert_eq!(design.cols(), beta.len());
    let (_, neg_hess) =
        score_and_information(design.matrix(), y, &DVector::from_column_slice(beta));
    -neg_hess
}

fn ll_at(x: &DMatrix<f64>, y: &[bool], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| norm_log_cdf(if yi { e } else { -e }))
        .sum()
}

/// Score vector and observed information (negative Hessian) in one pass.
fn score_and_information(
    x: &DMatrix<f64>,
    y: &[bool],
    beta: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = x.nrows();
    let eta = x * beta;
    let mut g = DVector::zeros(n);
    let mut xw = x.clone();
    for i in 0..n {
        let q = if y[i] { 1.0 } else { -1.0 };
        let z = q * eta[i];
        let m = inv_mills(z);
        g[i] = q * m;
        // m(m + z) > 0 for every finite z; this is the probit weight.
        let w = m * (m + z);
        xw.row_mut(i).scale_mut(w);
    }
    (x.tr_mul(&g), x.tr_mul(&xw))
}

fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Some(chol.solve(b));
    }
    a.clone().lu().solve(b)
}

/// ln Phi(z), stable across both tails.
pub(crate) fn norm_log_cdf(z: f64) -> f64 {
    if z > 8.0 {
        // ln(1 - Phi(-z)) with Phi(-z) tiny.
        (-0.5 * erfc(z / std::f64::consts::SQRT_2)).ln_1p()
    } else if z >= TAIL_Z {
        (0.5 * erfc(-z / std::f64::consts::SQRT_2)).ln()
    } else {
        // Phi(z) ~ phi(z)/(-z) * (1 - z^-2 + 3 z^-4) below the erfc range.
        let z2 = z * z;
        -0.5 * z2 - LN_SQRT_2PI - (-z).ln() + (-1.0 / z2 + 3.0 / (z2 * z2)).ln_1p()
    }
}

/// phi(z) / Phi(z).
pub(crate) fn inv_mills(z: f64) -> f64 {
    if z < TAIL_Z {
        let z2 = z * z;
        -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))
    } else {
        (-0.5 * z * z - LN_SQRT_2PI - norm_log_cdf(z)).exp()
    }
}

/// Greedy forward pass over unit-normalized columns: a column that fails to
/// raise the rank of the previously kept set is reported by name.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let p = x.ncols();
    let mut normed = x.clone();
    let mut zero_norm = vec![false; p];
    for j in 0..p {
        let norm = normed.column(j).norm();
        if norm > 0.0 {
            normed.column_mut(j).scale_mut(1.0 / norm);
        } else {
            zero_norm[j] = true;
        }
    }
    let mut kept: Vec<usize> = Vec::new();
    let mut bad: Vec<String> = Vec::new();
    for j in 0..p {
        if zero_norm[j] {
            bad.push(names[j].clone());
            continue;
        }
        let mut cols = kept.clone();
        cols.push(j);
        let sub = normed.select_columns(&cols);
        if sub.rank(RANK_EPS) == cols.len() {
            kept.push(j);
        } else {
            bad.push(names[j].clone());
        }
    }
    bad
}
