use serde::{Deserialize, Serialize};

use crate::phe::SUPPORTED_KEY_BITS;
use crate::{Error, Result};

/// Side-by-side comparison with the quantized plaintext oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub accuracy: f64,
    pub trace_identical: bool,
    pub first_divergence: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub protocol: String,
    pub dataset: String,
    pub n_owners: u32,
    pub key_bits: u64,
    pub iters: u32,
    pub accuracy: f64,
    pub interactions: u64,
    pub bytes: u64,
    pub sim_latency_ms: u64,
    pub wall_ms_demander: f64,
    pub wall_ms_owner_total: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

impl Metrics {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("invalid metrics: {m}")));
        if !["lr", "svm", "nb"].contains(&self.protocol.as_str()) {
            return bad("protocol");
        }
        if self.dataset.is_empty() {
            return bad("dataset");
        }
        if self.n_owners == 0 {
            return bad("n_owners");
        }
        if !SUPPORTED_KEY_BITS.contains(&self.key_bits) {
            return bad("key_bits");
        }
        if !(0.0..=1.0).contains(&self.accuracy) {
            return bad("accuracy");
        }
        if !self.wall_ms_demander.is_finite() || self.wall_ms_demander < 0.0 {
            return bad("wall_ms_demander");
        }
        if !self.wall_ms_owner_total.is_finite() || self.wall_ms_owner_total < 0.0 {
            return bad("wall_ms_owner_total");
        }
        if let Some(o) = &self.oracle {
            if !(0.0..=1.0).contains(&o.accuracy) {
                return bad("oracle.accuracy");
            }
        }
        Ok(())
    }

    /// Metrics without the wall-clock fields, which vary between runs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("metrics serialize");
        if let Some(map) = v.as_object_mut() {
            map.remove("wall_ms_demander");
            map.remove("wall_ms_owner_total");
        }
        serde_json::to_string(&v).expect("value serializes")
    }
}
