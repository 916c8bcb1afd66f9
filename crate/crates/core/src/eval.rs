//! Validation of novelty scores against labeled outcomes: matched-control
//! sampling, discrimination (AUC), probit regression with dummy-encoded
//! fixed effects, and repeated-run robustness summaries.

pub mod auc;
pub mod matching;
pub mod probit;

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PaperRecord;

pub use auc::auc;
pub use matching::{match_controls, key_value, MatchKey, MatchedDataset, MatchedPair};
pub use probit::{
    gradient, hessian, log_likelihood, probit_fit, Design, DesignBuilder, ProbitConfig, ProbitFit,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels differ in length: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("need both outcome classes; labels are single-class")]
    SingleClass,
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
    #[error("design/outcome shape mismatch: {rows} rows vs {outcomes} outcomes")]
    ShapeMismatch { rows: usize, outcomes: usize },
    #[error("design has {cols} columns but only {rows} rows")]
    TooFewRows { rows: usize, cols: usize },
    #[error("design is rank-deficient; collinear column(s): {0}")]
    RankDeficient(String),
    #[error("match keys must be non-empty")]
    EmptyKeys,
    #[error("id {0:?} appears in both cases and pool")]
    NonDisjoint(String),
    #[error("record {id:?} must carry label {expected} to enter matching")]
    BadLabel { id: String, expected: u8 },
    #[error("matching produced no pairs")]
    NoPairs,
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("probit numeric failure: {0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One matching + probit + AUC pass.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub run: usize,
    pub n_pairs: usize,
    pub dropped: usize,
    /// Probit coefficient on the novelty score.
    pub coefficient: f64,
    pub std_error: f64,
    pub z_value: f64,
    pub p_value: f64,
    pub pseudo_r2: f64,
    /// AUC of the raw score against the labels.
    pub auc_score: f64,
    /// AUC of the fitted probit index against the labels.
    pub auc_fitted: f64,
    pub converged: bool,
    pub separated: bool,
}

/// Repeated-validation outcome plus bookkeeping about records that never
/// entered matching because they had no score.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub runs: Vec<RunResult>,
    pub cases_without_scores: usize,
    pub pool_without_scores: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub keys: Vec<MatchKey>,
    pub runs: usize,
    pub seed: u64,
    /// Standardize the score covariate within each run's sample before
    /// fitting. Off by default; AUC is unaffected either way.
    pub zscore: bool,
    pub probit: ProbitConfig,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            keys: vec![MatchKey::Year],
            runs: 10,
            seed: 42,
            zscore: false,
            probit: ProbitConfig::default(),
        }
    }
}

/// Re-match, fit, and score `config.runs` times. Each run draws its matching
/// seed from an independent stream of the master seed, so runs are stable no
/// matter how or in what order they execute.
pub fn repeated_validation(
    cases: &[PaperRecord],
    pool: &[PaperRecord],
    scores: &HashMap<String, f64>,
    config: &ValidationConfig,
) -> Result<ValidationReport, EvalError> {
    if config.runs == 0 {
        return Err(EvalError::NoRuns);
    }
    let scored_cases: Vec<PaperRecord> = cases
        .iter()
        .filter(|r| scores.contains_key(&r.id))
        .cloned()
        .collect();
    let scored_pool: Vec<PaperRecord> = pool
        .iter()
        .filter(|r| scores.contains_key(&r.id))
        .cloned()
        .collect();
    let cases_without_scores = cases.len() - scored_cases.len();
    let pool_without_scores = pool.len() - scored_pool.len();

    let mut runs = Vec::with_capacity(config.runs);
    for run in 1..=config.runs {
        let mut stream = ChaCha8Rng::seed_from_u64(config.seed);
        stream.set_stream(run as u64);
        let run_seed: u64 = stream.gen();
        runs.push(one_run(
            run,
            &scored_cases,
            &scored_pool,
            scores,
            run_seed,
            config,
        )?);
    }
    Ok(ValidationReport {
        runs,
        cases_without_scores,
        pool_without_scores,
    })
}

fn one_run(
    run: usize,
    cases: &[PaperRecord],
    pool: &[PaperRecord],
    scores: &HashMap<String, f64>,
    run_seed: u64,
    config: &ValidationConfig,
) -> Result<RunResult, EvalError> {
    let dataset = match_controls(cases, pool, &config.keys, run_seed)?;
    if dataset.pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }

    let by_id: HashMap<&str, &PaperRecord> = cases
        .iter()
        .chain(pool.iter())
        .map(|r| (r.id.as_str(), r))
        .collect();

    // Case row then control row per pair; covariates read off the records.
    let mut ids: Vec<&str> = Vec::with_capacity(dataset.pairs.len() * 2);
    let mut labels: Vec<bool> = Vec::with_capacity(ids.capacity());
    for pair in &dataset.pairs {
        ids.push(&pair.case_id);
        labels.push(true);
        ids.push(&pair.control_id);
        labels.push(false);
    }
    let mut score_col: Vec<f64> = ids.iter().map(|id| scores[*id]).collect();
    if config.zscore {
        standardize(&mut score_col);
    }

    let n = ids.len();
    let mut builder = DesignBuilder::new(n);
    builder.add_continuous("score", &score_col);
    for &key in &config.keys {
        let values: Vec<String> = ids
            .iter()
            .map(|id| key_value(by_id[id], key).unwrap_or_default())
            .collect();
        builder.add_categorical(key.as_str(), &values);
    }
    let design = builder.build();

    let fit = probit_fit(&design, &labels, &config.probit)?;
    let score_idx = design
        .names()
        .iter()
        .position(|n| n == "score")
        .expect("score column present");
    let coefficient = fit.coefficients[score_idx];
    let std_error = fit.standard_errors[score_idx];
    let z_value = coefficient / std_error;
    let p_value = statrs::function::erf::erfc(z_value.abs() / std::f64::consts::SQRT_2);

    let fitted = design.matrix() * nalgebra::DVector::from_column_slice(&fit.coefficients);
    let auc_score = auc(&score_col, &labels)?;
    let auc_fitted = auc(fitted.as_slice(), &labels)?;

    Ok(RunResult {
        run,
        n_pairs: dataset.pairs.len(),
        dropped: dataset.dropped.len(),
        coefficient,
        std_error,
        z_value,
        p_value,
        pseudo_r2: fit.pseudo_r2,
        auc_score,
        auc_fitted,
        converged: fit.converged,
        separated: fit.separated,
    })
}

fn standardize(xs: &mut [f64]) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        for x in xs.iter_mut() {
            *x = (*x - mean) / sd;
        }
    } else {
        for x in xs.iter_mut() {
            *x = 0.0;
        }
    }
}

/// Per-run rows followed by mean and standard-deviation summary rows.
pub fn write_validation_csv<W: Write>(mut w: W, runs: &[RunResult]) -> Result<(), EvalError> {
    writeln!(
        w,
        "run,n_pairs,dropped,coefficient,std_error,z_value,p_value,pseudo_r2,auc_score,\
         auc_fitted,converged,separated"
    )?;
    for r in runs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.n_pairs,
            r.dropped,
            r.coefficient,
            r.std_error,
            r.z_value,
            r.p_value,
            r.pseudo_r2,
            r.auc_score,
            r.auc_fitted,
            r.converged,
            r.separated
        )?;
    }
    let cols: [fn(&RunResult) -> f64; 7] = [
        |r| r.coefficient,
        |r| r.std_error,
        |r| r.z_value,
        |r| r.p_value,
        |r| r.pseudo_r2,
        |r| r.auc_score,
        |r| r.auc_fitted,
    ];
    let n = runs.len() as f64;
    let means: Vec<f64> = cols
        .iter()
        .map(|f| runs.iter().map(|r| f(r)).sum::<f64>() / n)
        .collect();
    let sds: Vec<f64> = cols
        .iter()
        .zip(&means)
        .map(|(f, m)| (runs.iter().map(|r| (f(r) - m) * (f(r) - m)).sum::<f64>() / n).sqrt())
        .collect();
    for (tag, vals) in [("mean", &means), ("sd", &sds)] {
        let joined = vals.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        writeln!(w, "{tag},,,{joined},,")?;
    }
    Ok(())
}
