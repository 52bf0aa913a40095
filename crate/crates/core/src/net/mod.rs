//! Wire format, ordered channels, transcript and blinding audit.
//!
//! Parties exchange [`Envelope`]s whose canonical encoding is JSON with
//! sorted keys; byte accounting uses that exact encoding. The transcript
//! keeps every envelope plus what each party decrypted, which is what the
//! audit inspects.

mod audit;
mod channel;
mod message;
mod transcript;

pub use audit::{audit_transcript, AuditReport, Violation, ViolationCode};
pub use channel::Channels;
pub use message::{DirectoryEntry, Envelope, Payload, PowComponentWire, UploadRecord};
pub use transcript::{Counters, Disclosure, Transcript};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Demander,
    Owner,
}

/// The demander has index 0; owners are numbered 1..=n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartyId {
    pub role: Role,
    pub index: u32,
}

impl PartyId {
    pub const DEMANDER: PartyId = PartyId { role: Role::Demander, index: 0 };

    pub fn owner(index: u32) -> Self {
        assert!(index >= 1, "owners are numbered from 1");
        PartyId { role: Role::Owner, index }
    }

    pub fn is_owner(&self) -> bool {
        self.role == Role::Owner
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Demander => f.write_str("demander"),
            Role::Owner => write!(f, "owner-{}", self.index),
        }
    }
}

impl FromStr for PartyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "demander" {
            return Ok(PartyId::DEMANDER);
        }
        let idx = s
            .strip_prefix("owner-")
            .and_then(|i| i.parse::<u32>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| format!("bad party id {s:?}"))?;
        Ok(PartyId::owner(idx))
    }
}

impl Serialize for PartyId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifier of a blinding value, unique per session when used correctly.
pub type NonceId = String;

/// What a message reveals to a receiver able to decrypt it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Taint {
    /// Only ciphertexts under keys the receiver does not hold.
    Cipher,
    /// Public or protocol-final values.
    Public,
    /// Plaintext-bearing content masked by the named nonce.
    Blinded(NonceId),
}

impl fmt::Display for Taint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Taint::Cipher => f.write_str("cipher"),
            Taint::Public => f.write_str("public"),
            Taint::Blinded(id) => write!(f, "blinded:{id}"),
        }
    }
}

impl FromStr for Taint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cipher" => Ok(Taint::Cipher),
            "public" => Ok(Taint::Public),
            _ => match s.strip_prefix("blinded:") {
                Some(id) if !id.is_empty() => Ok(Taint::Blinded(id.to_string())),
                _ => Err(format!("bad taint {s:?}")),
            },
        }
    }
}

impl Serialize for Taint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Taint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
