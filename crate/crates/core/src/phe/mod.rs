//! Paillier and Cloud-RSA.
//!
//! Paillier is additively homomorphic over Z_N; Cloud-RSA is textbook RSA
//! without padding, multiplicatively homomorphic over Z_N^*. Key material is
//! immutable once built and every randomized operation takes the caller's RNG.

mod cloudrsa;
pub mod hex;
mod paillier;
pub mod prime;

pub use cloudrsa::{cloudrsa_keygen, CloudRsaCiphertext, CloudRsaKeyMaterial, CloudRsaPublic};
pub use paillier::{paillier_keygen, PaillierCiphertext, PaillierPrivateKey, PaillierPublicKey};

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Key sizes accepted by the generators.
pub const SUPPORTED_KEY_BITS: [u64; 4] = [512, 1024, 2048, 4096];

pub fn check_key_bits(bits: u64) -> Result<()> {
    if SUPPORTED_KEY_BITS.contains(&bits) {
        Ok(())
    } else {
        Err(Error::UnsupportedKeySize(bits))
    }
}

/// Short identifier derived from the scheme name and modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeyId(String);

impl KeyId {
    pub fn derive(kind: &str, n: &BigUint) -> Self {
        let mut h = Sha256::new();
        h.update(kind.as_bytes());
        h.update([0u8]);
        h.update(n.to_bytes_be());
        let digest = h.finalize();
        let mut s = String::with_capacity(kind.len() + 17);
        s.push_str(kind);
        s.push(':');
        for b in &digest[..8] {
            s.push_str(&format!("{b:02x}"));
        }
        KeyId(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn ensure_key(expected: &KeyId, found: &KeyId) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::WrongKey { expected: expected.clone(), found: found.clone() })
    }
}

/// On-disk key file. Private exponents are omitted for shareable files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KeyFile {
    Paillier {
        key_id: KeyId,
        #[serde(with = "hex::biguint")]
        n: BigUint,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "hex::opt_biguint")]
        phi: Option<BigUint>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "hex::opt_biguint")]
        phi_inv: Option<BigUint>,
    },
    Cloudrsa {
        key_id: KeyId,
        #[serde(with = "hex::biguint")]
        n: BigUint,
        #[serde(with = "hex::biguint")]
        enc_exp: BigUint,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "hex::opt_biguint")]
        dec_exp: Option<BigUint>,
    },
}

impl KeyFile {
    pub fn key_id(&self) -> &KeyId {
        match self {
            KeyFile::Paillier { key_id, .. } | KeyFile::Cloudrsa { key_id, .. } => key_id,
        }
    }

    /// Rejects files whose key id does not match the modulus.
    pub fn verify(&self) -> Result<()> {
        let (kind, n, id) = match self {
            KeyFile::Paillier { n, key_id, .. } => ("paillier", n, key_id),
            KeyFile::Cloudrsa { n, key_id, .. } => ("cloudrsa", n, key_id),
        };
        ensure_key(&KeyId::derive(kind, n), id)
    }
}
