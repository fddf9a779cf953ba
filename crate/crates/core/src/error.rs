use std::path::PathBuf;

use thiserror::Error;

use crate::graph::BuyerId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("buyer {buyer} has invalid valuation {valuation}; valuations must be finite and >= 0")]
    InvalidValuation { buyer: BuyerId, valuation: f64 },
    #[error("id 0 is reserved for the seller and cannot carry a buyer profile")]
    SellerProfile,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("log-sum-exp of an empty set is undefined")]
    EmptySet,
    #[error("probability ratio exp({log_num} - {log_den}) exceeds 1")]
    RatioAboveOne { log_num: f64, log_den: f64 },
    #[error("non-finite input to probability ratio")]
    NonFinite,
    #[error("invalid score config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("invalid gamma sequence: {0}")]
    InvalidGamma(String),
    #[error("buyer {0} is not reachable from the seller")]
    Unreachable(BuyerId),
    #[error("payment undefined for buyer {0}: zero winning probability")]
    UndefinedPayment(BuyerId),
    #[error("valuation {valuation} of buyer {buyer} exceeds the bound v_max = {v_max}")]
    AboveBound {
        buyer: BuyerId,
        valuation: f64,
        v_max: f64,
    },
    #[error("{0} is deterministic and has no payment integral")]
    NotRandomized(&'static str),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: no edges")]
    EmptyGraph(PathBuf),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}
