//! Sign test on an encrypted signed value.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed};

use crate::encoding::ScaledPaillier;
use crate::net::{Disclosure, Payload, Taint};
use crate::party::{disclosure, Owner, Reply, Session};
use crate::phe::PaillierCiphertext;
use crate::{Error, Result};

pub const RHO_BITS: u64 = 32;

/// Returns true iff the plaintext is strictly positive. The demander scales
/// the value by a secret ρ ∈ [1, 2^32] first, so the owner learns only ρ·v.
/// One interaction.
pub fn secure_sign(session: &mut Session, owner: u32, c: &ScaledPaillier) -> Result<bool> {
    let pk = session.demander.owner_keys(owner)?.paillier.clone();
    let (ct, taint) = if session.faults.skip_sign_blinding {
        (c.ct.clone(), c.taint.clone())
    } else {
        let (id, rho) = match (&session.demander.last_sign_nonce, session.faults.reuse_nonce) {
            (Some(prev), true) => prev.clone(),
            _ => {
                let hi = (BigUint::one() << RHO_BITS) + 1u32;
                let rho = session.demander.rng.gen_biguint_range(&BigUint::one(), &hi);
                (session.demander.next_nonce(), rho)
            }
        };
        session.demander.last_sign_nonce = Some((id.clone(), rho.clone()));
        (pk.scalar_pow(&c.ct, &BigInt::from(rho))?, Taint::Blinded(id))
    };
    let env = session.call(owner, Payload::SignRequest { ct }, c.scale, taint)?;
    match env.body {
        Payload::SignBit { bit: 0 } => Ok(false),
        Payload::SignBit { bit: 1 } => Ok(true),
        Payload::SignBit { bit } => Err(Error::protocol(format!("sign reply {bit} is not a bit"))),
        other => Err(Error::protocol(format!("expected sign-bit, got {}", other.kind()))),
    }
}

pub(crate) fn owner_sign(owner: &mut Owner, rt: u64, ct: &PaillierCiphertext, seen: &mut Vec<Disclosure>) -> Result<Reply> {
    let v = owner.sk.decrypt_signed(ct)?;
    let bit = u8::from(v.is_positive());
    seen.push(disclosure(owner, rt, "sign", vec![v]));
    Ok(Reply { body: Payload::SignBit { bit }, scale: 0, taint: Taint::Public })
}
