//! Secure building blocks.
//!
//! Addition, subtraction, plaintext-ciphertext products, dot products and
//! Cloud-RSA ciphertext products are local to the demander. The power
//! function needs one transfer of the owner's exponential vectors; the two
//! conversions, the sign test and summation are request-reply sub-protocols
//! run through a [`Session`](crate::party::Session).

pub mod convert;
pub mod pow;
pub mod sign;
pub mod sum;

pub use convert::{convert_paillier_key, convert_rsa_to_paillier, unblind_decomposed, RsaConversion};
pub use pow::{
    exp_mantissa, fetch_exp_vectors, pow_plan, recover_blinded, secure_pow, unblind_factor, ExpEncodedVector,
    ExponentSign, PowChunk, PowComponent, PowResult, PrecisionProfile,
};
pub use sign::secure_sign;
pub use sum::secure_sum;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::encoding::{check_scale, Scaled, ScaledPaillier, ScaledRsa};
use crate::net::NonceId;
use crate::phe::{CloudRsaPublic, PaillierPublicKey};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonceKind {
    /// One-time pad added to a plaintext.
    Additive,
    /// `e^r` multiplied into an exponential, r a small signed integer.
    ExponentialMultiplicative,
    /// Positive multiplier that preserves the sign.
    PositiveMultiplicative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindingNonce {
    pub id: NonceId,
    pub kind: NonceKind,
    pub r: BigInt,
}

fn same_scale(a: u32, b: u32) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ScaleMismatch { left: a, right: b })
    }
}

pub fn secure_add(pk: &PaillierPublicKey, a: &ScaledPaillier, b: &ScaledPaillier) -> Result<ScaledPaillier> {
    same_scale(a.scale, b.scale)?;
    Ok(Scaled::new(pk.add(&a.ct, &b.ct)?, a.scale))
}

pub fn secure_sub(pk: &PaillierPublicKey, a: &ScaledPaillier, b: &ScaledPaillier) -> Result<ScaledPaillier> {
    same_scale(a.scale, b.scale)?;
    Ok(Scaled::new(pk.sub(&a.ct, &b.ct)?, a.scale))
}

/// `Σ x_i · w_i` where the weights are plaintext mantissas at `w_scale`.
pub fn secure_dot(
    pk: &PaillierPublicKey,
    xs: &[ScaledPaillier],
    w: &[BigInt],
    w_scale: u32,
) -> Result<ScaledPaillier> {
    let first = xs.first().ok_or(Error::EmptyInput("dot product operands"))?;
    if xs.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: w.len() });
    }
    let scale = first.scale + w_scale;
    check_scale(scale, pk.n(), "dot product")?;
    let mut acc = pk.scalar_pow(&first.ct, &w[0])?;
    for (x, k) in xs.iter().zip(w).skip(1) {
        same_scale(first.scale, x.scale)?;
        acc = pk.add(&acc, &pk.scalar_pow(&x.ct, k)?)?;
    }
    Ok(Scaled::new(acc, scale))
}

/// Product of two Cloud-RSA plaintexts; scales add.
pub fn secure_ct_mul(share: &CloudRsaPublic, a: &ScaledRsa, b: &ScaledRsa) -> Result<ScaledRsa> {
    let scale = a.scale + b.scale;
    check_scale(scale, &share.n, "ciphertext product")?;
    Ok(Scaled::new(share.mul(&a.ct, &b.ct)?, scale))
}
