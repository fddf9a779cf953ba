//! Self-contained auction instances, used to save counterexamples and to
//! replay them from the command line.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, MechanismError};
use crate::graph::{BuyerId, GlobalProfile};
use crate::mechanisms::{Mechanism, MechanismTag};
use crate::scoring::ScoreConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub profiles: GlobalProfile,
    pub epsilon: f64,
    pub v_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismTag>,
    /// Geometric parameter of the layered rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Buyer the property was checked for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buyer: Option<BuyerId>,
    /// Second profile of a neighboring pair or of a misreport.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviated: Option<GlobalProfile>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Instance {
    pub fn new(profiles: GlobalProfile, cfg: &ScoreConfig) -> Self {
        Instance {
            profiles,
            epsilon: cfg.epsilon,
            v_max: cfg.v_max,
            mechanism: None,
            a: None,
            buyer: None,
            deviated: None,
            note: String::new(),
        }
    }

    pub fn with_mechanism(mut self, mech: &Mechanism) -> Self {
        self.mechanism = Some(mech.tag());
        if let Mechanism::Lay(g) = mech {
            self.a = g.a();
        }
        self
    }

    pub fn with_buyer(mut self, buyer: BuyerId) -> Self {
        self.buyer = Some(buyer);
        self
    }

    pub fn with_deviated(mut self, deviated: GlobalProfile) -> Self {
        self.deviated = Some(deviated);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn score_config(&self) -> Result<ScoreConfig, MechanismError> {
        Ok(ScoreConfig::new(self.epsilon, self.v_max)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }

    pub fn save(&self, path: &Path) -> Result<(), ExperimentError> {
        fs::write(path, self.to_json() + "\n").map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ExperimentError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}
