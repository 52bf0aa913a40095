use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use super::{PartyId, Taint};
use crate::phe::{hex, CloudRsaCiphertext, CloudRsaPublic, PaillierCiphertext};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectoryEntry {
    pub party: PartyId,
    #[serde(with = "hex::biguint")]
    pub paillier_n: BigUint,
}

/// Encrypted `x̂·y` for one training record, uploaded once at setup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UploadRecord {
    pub record: u64,
    pub xy: Vec<PaillierCiphertext>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowComponentWire {
    pub ct: CloudRsaCiphertext,
    pub scale: u32,
    pub root: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    KeyShare {
        #[serde(with = "hex::biguint")]
        paillier_n: BigUint,
        cloudrsa: CloudRsaPublic,
    },
    KeyDirectory {
        entries: Vec<DirectoryEntry>,
    },
    Upload {
        scale: u32,
        records: Vec<UploadRecord>,
    },
    PowRequest {
        record: u64,
    },
    PowVectors {
        record: u64,
        pos: Vec<CloudRsaCiphertext>,
        neg: Vec<CloudRsaCiphertext>,
    },
    RsaConvert {
        components: Vec<PowComponentWire>,
        out_scale: u32,
    },
    RsaConverted {
        ct: PaillierCiphertext,
    },
    SigmoidRequest {
        record: u64,
        ct: PaillierCiphertext,
        in_scale: u32,
        out_scale: u32,
    },
    SigmoidReply {
        cts: Vec<PaillierCiphertext>,
    },
    KeySwitch {
        target: PartyId,
        cts: Vec<PaillierCiphertext>,
    },
    KeySwitched {
        cts: Vec<PaillierCiphertext>,
    },
    SignRequest {
        ct: PaillierCiphertext,
    },
    SignBit {
        bit: u8,
    },
    SumRequest {
        family: String,
    },
    SumShare {
        #[serde(with = "hex::vec_bigint")]
        noised: Vec<BigInt>,
        pads: Vec<PaillierCiphertext>,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::KeyShare { .. } => "key-share",
            Payload::KeyDirectory { .. } => "key-directory",
            Payload::Upload { .. } => "upload",
            Payload::PowRequest { .. } => "pow-request",
            Payload::PowVectors { .. } => "pow-vectors",
            Payload::RsaConvert { .. } => "rsa-convert",
            Payload::RsaConverted { .. } => "rsa-converted",
            Payload::SigmoidRequest { .. } => "sigmoid-request",
            Payload::SigmoidReply { .. } => "sigmoid-reply",
            Payload::KeySwitch { .. } => "key-switch",
            Payload::KeySwitched { .. } => "key-switched",
            Payload::SignRequest { .. } => "sign-request",
            Payload::SignBit { .. } => "sign-bit",
            Payload::SumRequest { .. } => "sum-request",
            Payload::SumShare { .. } => "sum-share",
        }
    }

    /// Kinds whose ciphertexts are under the receiver's own key and get
    /// decrypted on arrival.
    pub fn receiver_decrypts(kind: &str) -> bool {
        matches!(kind, "rsa-convert" | "sigmoid-request" | "key-switch" | "sign-request")
    }

    /// Kinds carrying plaintext numbers.
    pub fn carries_plaintext(kind: &str) -> bool {
        matches!(kind, "sum-share" | "sign-bit")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub session: String,
    pub seq: u64,
    pub from: PartyId,
    pub to: PartyId,
    /// Round-trip id; 0 for one-way setup messages.
    pub rt: u64,
    pub scale: u32,
    pub taint: Taint,
    #[serde(flatten)]
    pub body: Payload,
}

impl Envelope {
    /// UTF-8 JSON with lexicographically sorted keys at every level.
    pub fn to_canonical(&self) -> String {
        let v = serde_json::to_value(self).expect("envelope serializes");
        serde_json::to_string(&v).expect("value serializes")
    }

    pub fn from_wire(bytes: &[u8]) -> serde_json::Result<Self> {
        serde_json::from_slice(bytes)
    }
}
