use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FBeta {
    pub precision: f64,
    pub recall: f64,
    pub beta: f64,
    pub score: f64,
}

impl FBeta {
    pub fn compute(tp: u64, fp: u64, fn_: u64, beta: f64) -> Result<Self> {
        if tp == 0 && fp == 0 && fn_ == 0 {
            return Err(Error::EmptyEvaluation);
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let b2 = beta * beta;
        let score = if precision == 0.0 && recall == 0.0 {
            0.0
        } else {
            (1.0 + b2) * precision * recall / (b2 * precision + recall)
        };
        Ok(FBeta {
            precision,
            recall,
            beta,
            score,
        })
    }
}

/// Weighted harmonic mean of precision and recall; `beta < 1` favours
/// precision.
pub fn f_beta(tp: u64, fp: u64, fn_: u64, beta: f64) -> Result<f64> {
    FBeta::compute(tp, fp, fn_, beta).map(|f| f.score)
}
