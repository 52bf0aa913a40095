use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Envelope, PartyId, Payload, Taint};
use crate::phe::hex;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub interactions: u64,
    pub bytes: u64,
    pub messages: u64,
    pub latency_ms: u64,
}

/// Plaintext values a party obtained, by decryption or in the clear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disclosure {
    pub party: PartyId,
    pub rt: u64,
    pub label: String,
    #[serde(with = "hex::vec_bigint")]
    pub values: Vec<BigInt>,
}

/// Fields the audit needs, kept so the transcript never has to be re-parsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EnvelopeMeta {
    pub seq: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub rt: u64,
    pub kind: &'static str,
    pub taint: Taint,
    pub sign_bit: Option<u8>,
}

#[derive(Clone, Debug, Default)]
pub struct Transcript {
    lines: Vec<String>,
    pub(crate) metas: Vec<EnvelopeMeta>,
    disclosures: Vec<Disclosure>,
    iteration_starts: Vec<u64>,
    counters: Counters,
    latency_per_rt: u64,
    aborted: Option<String>,
}

impl Transcript {
    pub fn new(latency_ms: u64) -> Self {
        Transcript { latency_per_rt: latency_ms, ..Default::default() }
    }

    /// Appends an envelope and returns its canonical encoding.
    pub fn record(&mut self, env: &Envelope) -> String {
        let line = env.to_canonical();
        self.counters.bytes += line.len() as u64;
        self.counters.messages += 1;
        self.metas.push(EnvelopeMeta {
            seq: env.seq,
            from: env.from,
            to: env.to,
            rt: env.rt,
            kind: env.body.kind(),
            taint: env.taint.clone(),
            sign_bit: match env.body {
                Payload::SignBit { bit } => Some(bit),
                _ => None,
            },
        });
        self.lines.push(line.clone());
        line
    }

    pub fn complete_round_trip(&mut self) {
        self.counters.interactions += 1;
        self.counters.latency_ms += self.latency_per_rt;
    }

    pub fn disclose(&mut self, d: Disclosure) {
        self.disclosures.push(d);
    }

    pub fn mark_iteration(&mut self) {
        self.iteration_starts.push(self.counters.interactions);
    }

    pub fn mark_aborted(&mut self, reason: &str) {
        self.aborted.get_or_insert_with(|| reason.to_string());
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn disclosures(&self) -> &[Disclosure] {
        &self.disclosures
    }

    pub fn aborted(&self) -> Option<&str> {
        self.aborted.as_deref()
    }

    pub fn iterations(&self) -> usize {
        self.iteration_starts.len()
    }

    /// Interactions spent in each marked iteration.
    pub fn interactions_per_iteration(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.iteration_starts.len());
        for (i, &start) in self.iteration_starts.iter().enumerate() {
            let end = self.iteration_starts.get(i + 1).copied().unwrap_or(self.counters.interactions);
            out.push(end - start);
        }
        out
    }

    /// Plaintext values seen by `party`.
    pub fn received_plaintexts(&self, party: PartyId) -> impl Iterator<Item = &BigInt> {
        self.disclosures.iter().filter(move |d| d.party == party).flat_map(|d| d.values.iter())
    }

    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for l in &self.lines {
            h.update(l.as_bytes());
            h.update(b"\n");
        }
        h.finalize().into()
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::with_capacity(self.lines.iter().map(|l| l.len() + 1).sum());
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    pub fn export_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for l in &self.lines {
            f.write_all(l.as_bytes())?;
            f.write_all(b"\n")?;
        }
        f.flush()
    }
}
