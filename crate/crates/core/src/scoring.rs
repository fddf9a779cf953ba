//! Score functions and log-space aggregation of `Exp(S) = Σ exp(ε·σ)`.

use serde::{Deserialize, Serialize};

use crate::error::ScoringError;
use crate::graph::Profile;

/// Largest `ε·v_max` accepted, in natural-log units.
pub const MAX_LOG_SCORE: f64 = 700.0;

/// Slack allowed when a ratio of sums overshoots 1 through rounding.
pub const RATIO_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// `σ(θ, o_i) = v_i`.
    #[default]
    Linear,
}

impl ScoreKind {
    pub fn score(self, valuation: f64) -> f64 {
        match self {
            ScoreKind::Linear => valuation,
        }
    }

    /// Worst-case score change when one valuation moves within `[0, v_max]`.
    pub fn sensitivity(self, v_max: f64) -> f64 {
        match self {
            ScoreKind::Linear => v_max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub epsilon: f64,
    pub kind: ScoreKind,
    pub v_max: f64,
}

impl ScoreConfig {
    pub fn new(epsilon: f64, v_max: f64) -> Result<Self, ScoringError> {
        let cfg = ScoreConfig {
            epsilon,
            kind: ScoreKind::Linear,
            v_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(ScoringError::InvalidConfig(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.v_max > 0.0) || !self.v_max.is_finite() {
            return Err(ScoringError::InvalidConfig(format!(
                "v_max must be finite and > 0, got {}",
                self.v_max
            )));
        }
        if self.epsilon * self.kind.score(self.v_max) > MAX_LOG_SCORE {
            return Err(ScoringError::InvalidConfig(format!(
                "epsilon * v_max = {} exceeds {MAX_LOG_SCORE}",
                self.epsilon * self.v_max
            )));
        }
        Ok(())
    }

    /// Same config with a different privacy parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ScoringError> {
        let cfg = ScoreConfig { epsilon, ..*self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sensitivity(&self) -> f64 {
        self.kind.sensitivity(self.v_max)
    }

    pub fn log_score(&self, valuation: f64) -> LogScore {
        LogScore(self.epsilon * self.kind.score(valuation))
    }
}

/// `ε·σ(θ', o_i)`, i.e. the natural log of one buyer's `Exp` weight.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogScore(pub f64);

/// Linear score of a profile.
pub fn score(profile: &Profile) -> f64 {
    ScoreKind::Linear.score(profile.valuation)
}

/// `log Σ exp(x)` with the max-shift trick and compensated summation.
pub fn log_exp_sum(scores: &[LogScore]) -> Result<f64, ScoringError> {
    if scores.is_empty() {
        return Err(ScoringError::EmptySet);
    }
    Ok(lse_iter(scores.iter().map(|s| s.0)))
}

/// Log-sum-exp over raw log values; `-inf` for an empty input.
pub(crate) fn lse_iter(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    // Neumaier summation keeps 1e-12 relative accuracy on very long lists.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = (v - max).exp();
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    max + (sum + comp).ln()
}

/// `log(exp(a) + exp(b))`, treating `-inf` as an empty term.
#[inline]
pub(crate) fn lse2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `exp(log_num - log_den)` as a probability.
///
/// Overshoot above 1 by less than [`RATIO_SLACK`] is clamped; more is an
/// internal-consistency error. A numerator of `-inf` (empty set) gives 0.
pub fn exp_ratio(log_num: f64, log_den: f64) -> Result<f64, ScoringError> {
    if log_num == f64::NEG_INFINITY && log_den.is_finite() {
        return Ok(0.0);
    }
    if !log_num.is_finite() || !log_den.is_finite() {
        return Err(ScoringError::NonFinite);
    }
    let r = (log_num - log_den).exp();
    if r > 1.0 + RATIO_SLACK {
        return Err(ScoringError::RatioAboveOne { log_num, log_den });
    }
    Ok(r.min(1.0))
}
