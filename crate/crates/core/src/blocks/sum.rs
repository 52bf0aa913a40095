//! Secure summation across owners.
//!
//! Each owner returns its values plus a private pad and an encryption of
//! the pad under its own key. The demander adds the padded values, encrypts
//! the total under owner 1's key and walks the chain: subtract owner i's
//! encrypted pad, then key-switch through owner i to owner i+1 (finally to
//! itself). One gather round plus n key switches.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed};

use super::convert::convert_paillier_key;
use crate::encoding::{encrypt_signed, Scaled};
use crate::net::{PartyId, Payload, Taint};
use crate::party::{Owner, Reply, Session};
use crate::{Error, Result};

/// Values summed must stay below 2^{w-70} in magnitude.
const VALUE_HEADROOM_BITS: u64 = 70;

fn ceil_log2(n: u64) -> u64 {
    64 - (n.max(1) - 1).leading_zeros() as u64
}

/// Sum of every owner's input vector for `family`, revealed to the demander.
pub fn secure_sum(session: &mut Session, family: &str) -> Result<Vec<BigInt>> {
    let n = session.n_owners();
    if n < 2 {
        return Err(Error::Config("secure summation needs at least two owners".into()));
    }
    let reqs = (1..=n).map(|i| (i, Payload::SumRequest { family: family.to_string() }, 0, Taint::Public)).collect();
    let replies = session.call_all(reqs)?;
    let mut total: Option<Vec<BigInt>> = None;
    let mut pads = Vec::with_capacity(n as usize);
    for (i, env) in (1..=n).zip(replies) {
        let (noised, p) = match env.body {
            Payload::SumShare { noised, pads } => (noised, pads),
            other => return Err(Error::protocol(format!("expected sum-share, got {}", other.kind()))),
        };
        if p.len() != noised.len() {
            return Err(Error::DimensionMismatch { expected: noised.len(), found: p.len() });
        }
        session.disclose(PartyId::DEMANDER, "sum-share", noised.clone());
        match &mut total {
            None => total = Some(noised),
            Some(t) => {
                if t.len() != noised.len() {
                    return Err(Error::DimensionMismatch { expected: t.len(), found: noised.len() });
                }
                for (a, b) in t.iter_mut().zip(noised) {
                    *a += b;
                }
            }
        }
        let pk = &session.demander.owner_keys(i)?.paillier;
        for c in &p {
            pk.validate(c)?;
        }
        pads.push(p);
    }
    let total = total.unwrap_or_default();
    if total.is_empty() {
        return Ok(total);
    }
    let pk1 = session.demander.owner_keys(1)?.paillier.clone();
    let mut cur = total
        .iter()
        .map(|v| Ok(Scaled::new(encrypt_signed(&pk1, v, &mut session.demander.rng)?, 0)))
        .collect::<Result<Vec<_>>>()?;
    for i in 1..=n {
        let pk = session.demander.owner_keys(i)?.paillier.clone();
        for (c, p) in cur.iter_mut().zip(&pads[i as usize - 1]) {
            c.ct = pk.sub(&c.ct, p)?;
        }
        let target = if i == n { PartyId::DEMANDER } else { PartyId::owner(i + 1) };
        cur = convert_paillier_key(session, i, target, &cur)?;
    }
    let sk = &session.demander.sk;
    let out = cur.iter().map(|c| sk.decrypt_signed(&c.ct)).collect::<Result<Vec<_>>>()?;
    session.disclose(PartyId::DEMANDER, "sum-result", out.clone());
    Ok(out)
}

pub(crate) fn owner_sum_share(owner: &mut Owner, family: &str) -> Result<Reply> {
    let values = owner
        .sum_inputs
        .get(family)
        .cloned()
        .ok_or_else(|| Error::protocol(format!("{} has no input for {family}", owner.id)))?;
    let w = owner.directory.values().map(|k| k.bits()).min().unwrap_or(owner.sk.public().bits());
    let n_owners = owner.directory.keys().filter(|p| p.is_owner()).count() as u64;
    let limit = BigInt::one() << (w - VALUE_HEADROOM_BITS);
    if values.iter().any(|v| v.abs() >= limit) {
        return Err(Error::protocol(format!("{family} value exceeds the summation range")));
    }
    let pad_bound = BigUint::one() << (w - 4 - ceil_log2(n_owners + 1));
    let mut noised = Vec::with_capacity(values.len());
    let mut pads = Vec::with_capacity(values.len());
    for v in values {
        let r = owner.rng.gen_biguint_below(&pad_bound);
        pads.push(owner.sk.encrypt(&r, &mut owner.rng)?);
        noised.push(v + BigInt::from(r));
    }
    let nonce = owner.next_nonce();
    Ok(Reply { body: Payload::SumShare { noised, pads }, scale: 0, taint: Taint::Blinded(nonce) })
}

#[cfg(test)]
mod tests {
    use super::ceil_log2;

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(11), 4);
        assert_eq!(ceil_log2(16), 4);
    }
}
