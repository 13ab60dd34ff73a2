use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::WeightTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Next admissible server in id order after the previous choice.
    RoundRobin,
    /// Admissible server with the smallest weighted instantaneous load.
    LeastComposite,
    /// Admissible server whose assignment leaves the smallest system
    /// imbalance (mean `SIL_i`).
    #[serde(rename = "least_sil")]
    LeastSil,
    /// Least-composite placement followed by threshold-triggered migration.
    ThresholdMigration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    pub migration_threshold: f64,
    pub weights: WeightTriple,
}

impl Policy {
    pub fn new(kind: PolicyKind, weights: WeightTriple) -> Self {
        Policy {
            kind,
            migration_threshold: 0.0,
            weights,
        }
    }

    pub fn threshold_migration(threshold: f64, weights: WeightTriple) -> Self {
        Policy {
            kind: PolicyKind::ThresholdMigration,
            migration_threshold: threshold,
            weights,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if !(self.migration_threshold >= 0.0) {
            return Err(Error::validation(
                "migration_threshold must be non-negative",
            ));
        }
        Ok(())
    }
}
