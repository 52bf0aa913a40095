//! Ciphertext conversions: Cloud-RSA power results to Paillier, and
//! Paillier key switching.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::One;

use super::pow::{blind_mantissa, recover_blinded, unblind_factor, PowResult, PrecisionProfile, MAX_BLIND_R};
use crate::encoding::{fx_encode, pow10_signed, rescale_ct, rsa_plaintext, to_residue, Scaled, ScaledPaillier};
use crate::net::{Disclosure, PartyId, Payload, PowComponentWire, Taint};
use crate::party::{disclosure, Owner, Reply, Session};
use crate::phe::{PaillierCiphertext, PaillierPublicKey};
use crate::{Error, Result};

/// Bits of headroom between a key-switched value and the pad range.
const PAD_STAT_BITS: u64 = 67;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsaConversion {
    /// `e^{±θᵀx}` under the owner's Paillier key at `owner_scale + unblind_scale`.
    pub ct: ScaledPaillier,
    /// The blinded value the owner returned, before unblinding (scale `owner_scale`).
    pub blinded: ScaledPaillier,
    /// Integer and fractional parts of the unblinding multiplier.
    pub unblind: (BigInt, BigInt),
    pub blind_mantissa: BigUint,
}

/// Demander multiplies `ê^r` into every component, the owner recombines and
/// re-encrypts under Paillier, and the demander removes the blinding.
/// One interaction.
pub fn convert_rsa_to_paillier(
    session: &mut Session,
    owner: u32,
    pr: &PowResult,
    blind_r: i32,
    profile: &PrecisionProfile,
) -> Result<RsaConversion> {
    if blind_r == 0 || blind_r.abs() > MAX_BLIND_R {
        return Err(Error::protocol(format!("exponential blinding r={blind_r} outside [-8, 8] \\ {{0}}")));
    }
    let keys = session.demander.owner_keys(owner)?.clone();
    let share = &keys.cloudrsa;
    let b = rsa_plaintext(&blind_mantissa(blind_r, profile.blind_scale)?, &share.n);
    let cb = share.encrypt(&b)?;
    let nonce = session.demander.next_nonce();
    let mut wire = Vec::with_capacity(pr.components.len());
    for c in &pr.components {
        wire.push(PowComponentWire {
            ct: share.mul(&c.ct.ct, &cb)?,
            scale: c.ct.scale + profile.blind_scale,
            root: c.root,
        });
    }
    let scale = wire.first().map(|w| w.scale).unwrap_or(0);
    let env = session.call(
        owner,
        Payload::RsaConvert { components: wire, out_scale: profile.owner_scale },
        scale,
        Taint::Blinded(nonce),
    )?;
    let ct = match env.body {
        Payload::RsaConverted { ct } => ct,
        other => return Err(Error::protocol(format!("expected rsa-converted, got {}", other.kind()))),
    };
    keys.paillier.validate(&ct)?;
    let blinded = Scaled::new(ct, profile.owner_scale);
    let roots: Vec<u32> = pr.components.iter().map(|c| c.root).collect();
    let u = fx_encode(unblind_factor(&b, profile.blind_scale, &roots), profile.unblind_scale)?;
    let (ct, unblind) = unblind_decomposed(&keys.paillier, &blinded, &u, profile.unblind_scale)?;
    Ok(RsaConversion { ct, blinded, unblind, blind_mantissa: b })
}

/// Multiplies an encrypted value by the plaintext `u / 10^{s}` using its
/// integer and fractional parts: `[v]^{int}` rescaled by `s`, plus `[v]^{frac}`.
pub fn unblind_decomposed(
    pk: &PaillierPublicKey,
    v: &ScaledPaillier,
    u: &BigInt,
    s: u32,
) -> Result<(ScaledPaillier, (BigInt, BigInt))> {
    let d = pow10_signed(s);
    let (int, frac) = (u / &d, u % &d);
    let hi = Scaled::new(pk.scalar_pow(&v.ct, &int)?, v.scale);
    let hi = rescale_ct(pk, &hi, s)?;
    let lo = Scaled::new(pk.scalar_pow(&v.ct, &frac)?, v.scale + s);
    Ok((super::secure_add(pk, &hi, &lo)?, (int, frac)))
}

pub(crate) fn owner_rsa_convert(
    owner: &mut Owner,
    rt: u64,
    components: &[PowComponentWire],
    out_scale: u32,
    seen: &mut Vec<Disclosure>,
) -> Result<Reply> {
    if components.is_empty() {
        return Err(Error::EmptyInput("power components"));
    }
    let mut parts = Vec::with_capacity(components.len());
    for c in components {
        let v = owner.rsa.decrypt(&c.ct)?;
        parts.push((v, c.scale, c.root));
    }
    let value = recover_blinded(&parts)?;
    let m = fx_encode(value, out_scale)?;
    seen.push(disclosure(owner, rt, "rsa-convert", parts.iter().map(|p| BigInt::from(p.0.clone())).chain([m.clone()]).collect()));
    let residue = to_residue(&m, owner.sk.public().n())?;
    let ct = owner.sk.encrypt(&residue, &mut owner.rng)?;
    Ok(Reply::cipher(Payload::RsaConverted { ct }, out_scale))
}

/// Pad range shared by both ends of a key switch: values must lie in
/// `(-2^{w-70}, 2^{w-3})` where `w` is the smaller modulus size.
fn pad_bounds(w: u64) -> (BigUint, BigUint) {
    let lo = BigUint::one() << (w - PAD_STAT_BITS - 3);
    let width = BigUint::one() << (w - 3);
    (lo, width)
}

/// Re-encrypts ciphertexts held under `via_owner`'s key for `target`
/// (another owner or the demander). The owner only sees `m + r`.
/// One interaction for the whole vector.
pub fn convert_paillier_key(
    session: &mut Session,
    via_owner: u32,
    target: PartyId,
    cts: &[ScaledPaillier],
) -> Result<Vec<ScaledPaillier>> {
    if cts.is_empty() {
        return Err(Error::EmptyInput("key switch operands"));
    }
    let src = session.demander.owner_keys(via_owner)?.paillier.clone();
    let dst = if target == PartyId::DEMANDER {
        session.demander.pk().clone()
    } else {
        session.demander.owner_keys(target.index)?.paillier.clone()
    };
    let (lo, width) = pad_bounds(src.bits().min(dst.bits()));
    let nonce = session.demander.next_nonce();
    let mut pads = Vec::with_capacity(cts.len());
    let mut blinded = Vec::with_capacity(cts.len());
    for c in cts {
        let r = &lo + session.demander.rng.gen_biguint_below(&width);
        blinded.push(src.add_plain(&c.ct, &BigInt::from(r.clone()))?);
        pads.push(r);
    }
    let scale = cts[0].scale;
    let env = session.call(via_owner, Payload::KeySwitch { target, cts: blinded }, scale, Taint::Blinded(nonce))?;
    let out = match env.body {
        Payload::KeySwitched { cts } if cts.len() == pads.len() => cts,
        other => return Err(Error::protocol(format!("expected key-switched, got {}", other.kind()))),
    };
    out.into_iter()
        .zip(pads)
        .zip(cts)
        .map(|((c, r), orig)| {
            dst.validate(&c)?;
            Ok(Scaled::new(dst.add_plain(&c, &-BigInt::from(r))?, orig.scale))
        })
        .collect()
}

pub(crate) fn owner_key_switch(
    owner: &mut Owner,
    rt: u64,
    target: PartyId,
    cts: &[PaillierCiphertext],
    scale: u32,
    seen: &mut Vec<Disclosure>,
) -> Result<Reply> {
    let dst = owner
        .directory
        .get(&target)
        .cloned()
        .ok_or_else(|| Error::protocol(format!("{} has no public key for {target}", owner.id)))?;
    let mut plain = Vec::with_capacity(cts.len());
    for c in cts {
        let v = owner.sk.decrypt(c)?;
        if v >= *dst.n() {
            return Err(Error::protocol("blinded value does not fit the target key"));
        }
        plain.push(v);
    }
    seen.push(disclosure(owner, rt, "key-switch", plain.iter().map(|v| BigInt::from(v.clone())).collect()));
    let mut out = Vec::with_capacity(plain.len());
    for v in &plain {
        out.push(dst.encrypt(v, &mut owner.rng)?);
    }
    Ok(Reply::cipher(Payload::KeySwitched { cts: out }, scale))
}
