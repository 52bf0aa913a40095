//! `heda keygen`: canonical key files.

use std::path::Path;
use std::str::FromStr;

use heda_core::phe::{check_key_bits, cloudrsa_keygen, paillier_keygen, KeyFile};
use heda_core::seed;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Paillier,
    CloudRsa,
}

impl FromStr for KeyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paillier" => Ok(KeyKind::Paillier),
            "cloudrsa" => Ok(KeyKind::CloudRsa),
            _ => Err(format!("unknown key kind {s:?} (expected paillier or cloudrsa)")),
        }
    }
}

/// Generates one key and writes it to `out`. Without a seed the key is
/// drawn from OS entropy.
pub fn cmd_keygen(kind: KeyKind, bits: u64, out: &Path, public_only: bool, seed: Option<u64>) -> Result<KeyFile, CliError> {
    check_key_bits(bits)?;
    let mut rng = match seed {
        Some(s) => seed::stream(s, "keygen/cli"),
        None => ChaCha20Rng::from_entropy(),
    };
    let file = match kind {
        KeyKind::Paillier => {
            let (pk, sk) = paillier_keygen(bits, &mut rng)?;
            if public_only {
                pk.to_key_file()
            } else {
                sk.to_key_file()
            }
        }
        KeyKind::CloudRsa => cloudrsa_keygen(bits, &mut rng)?.to_key_file(!public_only),
    };
    std::fs::write(out, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(file)
}
