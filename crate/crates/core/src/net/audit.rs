use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Payload, Taint, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationCode {
    /// An owner received decryptable content that was not blinded.
    A,
    /// The demander received a plaintext record value that was not blinded.
    B,
    /// A nonce id was used more than once.
    C,
    /// A sign-bit message did not carry exactly one bit.
    D,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            ViolationCode::A => "a",
            ViolationCode::B => "b",
            ViolationCode::C => "c",
            ViolationCode::D => "d",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub index: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub envelopes: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        let mut c: Vec<_> = self.violations.iter().map(|v| v.code).collect();
        c.sort();
        c.dedup();
        c
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "audit PASS ({} envelopes)", self.envelopes);
        }
        write!(f, "audit FAIL ({} violations)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "\n  ({}) envelope #{}: {}", v.code, v.index, v.detail)?;
        }
        Ok(())
    }
}

/// Structural check of the blinding discipline over a whole transcript.
pub fn audit_transcript(t: &Transcript) -> AuditReport {
    let mut violations = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, m) in t.metas.iter().enumerate() {
        let route = format!("{} {} -> {} (seq {}, rt {})", m.kind, m.from, m.to, m.seq, m.rt);
        if m.to.is_owner() && Payload::receiver_decrypts(m.kind) && !matches!(m.taint, Taint::Blinded(_)) {
            violations.push(Violation { code: ViolationCode::A, index: i, detail: format!("unblinded {route}") });
        }
        if !m.to.is_owner() && Payload::carries_plaintext(m.kind) && m.sign_bit.is_none() {
            if !matches!(m.taint, Taint::Blinded(_)) {
                violations.push(Violation { code: ViolationCode::B, index: i, detail: format!("unblinded {route}") });
            }
        }
        if let Some(bit) = m.sign_bit {
            if bit > 1 {
                violations.push(Violation { code: ViolationCode::D, index: i, detail: format!("sign value {bit} in {route}") });
            }
        }
        if let Taint::Blinded(id) = &m.taint {
            if let Some(first) = seen.insert(id.as_str(), i) {
                violations.push(Violation {
                    code: ViolationCode::C,
                    index: i,
                    detail: format!("nonce {id} reused (first at envelope #{first}) in {route}"),
                });
            }
        }
    }
    AuditReport { envelopes: t.metas.len(), violations }
}
