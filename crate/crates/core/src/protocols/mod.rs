//! Training protocols between the demander and the owners.

pub mod lr;
pub mod metrics;
pub mod model;
pub mod nb;
pub mod schedule;
pub mod svm;

pub use lr::{lr_train, sigmoid_share};
pub use metrics::Metrics;
pub use model::{predict_linear, setup_linear, ModelParams, Refresh, TrainConfig, TrainOutcome};
pub use nb::{nb_train, NbFeature, NbModel, NbRecord, NbSchema, NbStats, NbValue};
pub use schedule::Schedule;
pub use svm::svm_train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Lr,
    Svm,
    Nb,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Lr => "lr",
            Protocol::Svm => "svm",
            Protocol::Nb => "nb",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lr" => Ok(Protocol::Lr),
            "svm" => Ok(Protocol::Svm),
            "nb" => Ok(Protocol::Nb),
            _ => Err(format!("unknown protocol {s:?} (expected lr, svm or nb)")),
        }
    }
}
