use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{check_key_bits, ensure_key, hex, prime, KeyFile, KeyId};
use crate::{Error, Result};

const KIND: &str = "cloudrsa";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudRsaCiphertext {
    pub key_id: KeyId,
    #[serde(with = "hex::biguint")]
    pub value: BigUint,
}

/// Full owner-side material. `dec_exp` never leaves the owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CloudRsaKeyMaterial {
    n: BigUint,
    enc_exp: BigUint,
    dec_exp: BigUint,
    key_id: KeyId,
    primes: Option<(BigUint, BigUint)>,
}

/// The part of the material shared with the session demander: N and e.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloudRsaPublic {
    pub key_id: KeyId,
    #[serde(with = "hex::biguint")]
    pub n: BigUint,
    #[serde(with = "hex::biguint")]
    pub enc_exp: BigUint,
}

pub fn cloudrsa_keygen<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<CloudRsaKeyMaterial> {
    check_key_bits(bits)?;
    let (p, q) = prime::generate_modulus_primes(bits, rng)?;
    let phi = (&p - 1u32) * (&q - 1u32);
    let three = BigUint::from(3u8);
    let e = loop {
        let mut e = rng.gen_biguint_range(&three, &phi);
        e.set_bit(0, true);
        if e < phi && e.gcd(&phi).is_one() {
            break e;
        }
    };
    CloudRsaKeyMaterial::from_primes(&p, &q, e)
}

impl CloudRsaKeyMaterial {
    pub fn from_primes(p: &BigUint, q: &BigUint, enc_exp: BigUint) -> Result<Self> {
        if p == q {
            return Err(Error::Encoding("Cloud-RSA primes must be distinct".into()));
        }
        let phi = (p - 1u32) * (q - 1u32);
        if enc_exp <= BigUint::one() || !enc_exp.gcd(&phi).is_one() {
            return Err(Error::Encoding("encryption exponent not coprime with phi(N)".into()));
        }
        let dec_exp = enc_exp.modinv(&phi).expect("coprime");
        let n = p * q;
        let key_id = KeyId::derive(KIND, &n);
        Ok(CloudRsaKeyMaterial { n, enc_exp, dec_exp, key_id, primes: Some((p.clone(), q.clone())) })
    }

    /// Material from a key file; the factorization is not recoverable.
    pub fn from_key_file(f: &KeyFile) -> Result<Self> {
        f.verify()?;
        match f {
            KeyFile::Cloudrsa { n, enc_exp, dec_exp: Some(d), key_id } => Ok(CloudRsaKeyMaterial {
                n: n.clone(),
                enc_exp: enc_exp.clone(),
                dec_exp: d.clone(),
                key_id: key_id.clone(),
                primes: None,
            }),
            _ => Err(Error::Encoding("not a Cloud-RSA private key file".into())),
        }
    }

    pub fn to_key_file(&self, include_dec_exp: bool) -> KeyFile {
        KeyFile::Cloudrsa {
            key_id: self.key_id.clone(),
            n: self.n.clone(),
            enc_exp: self.enc_exp.clone(),
            dec_exp: include_dec_exp.then(|| self.dec_exp.clone()),
        }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn enc_exp(&self) -> &BigUint {
        &self.enc_exp
    }

    pub fn dec_exp(&self) -> &BigUint {
        &self.dec_exp
    }

    pub fn key_id(&self) -> &KeyId {
        &self.key_id
    }

    pub fn phi(&self) -> Option<BigUint> {
        self.primes.as_ref().map(|(p, q)| (p - 1u32) * (q - 1u32))
    }

    pub fn share(&self) -> CloudRsaPublic {
        CloudRsaPublic { key_id: self.key_id.clone(), n: self.n.clone(), enc_exp: self.enc_exp.clone() }
    }

    /// Owner-side encryption; uses the factorization when available.
    pub fn encrypt(&self, m: &BigUint) -> Result<CloudRsaCiphertext> {
        check_unit(m, &self.n, &self.key_id)?;
        let value = match &self.primes {
            Some((p, q)) => {
                let xp = (m % p).modpow(&(&self.enc_exp % (p - 1u32)), p);
                let xq = (m % q).modpow(&(&self.enc_exp % (q - 1u32)), q);
                let q_inv = q.modinv(p).expect("distinct primes");
                let xq_p = &xq % p;
                let diff = if xp >= xq_p { &xp - &xq_p } else { &xp + p - &xq_p };
                xq + q * ((diff * q_inv) % p)
            }
            None => m.modpow(&self.enc_exp, &self.n),
        };
        Ok(CloudRsaCiphertext { key_id: self.key_id.clone(), value })
    }

    pub fn decrypt(&self, c: &CloudRsaCiphertext) -> Result<BigUint> {
        validate(c, &self.n, &self.key_id)?;
        Ok(c.value.modpow(&self.dec_exp, &self.n))
    }
}

impl CloudRsaPublic {
    pub fn encrypt(&self, m: &BigUint) -> Result<CloudRsaCiphertext> {
        check_unit(m, &self.n, &self.key_id)?;
        Ok(CloudRsaCiphertext { key_id: self.key_id.clone(), value: m.modpow(&self.enc_exp, &self.n) })
    }

    pub fn mul(&self, a: &CloudRsaCiphertext, b: &CloudRsaCiphertext) -> Result<CloudRsaCiphertext> {
        validate(a, &self.n, &self.key_id)?;
        validate(b, &self.n, &self.key_id)?;
        Ok(CloudRsaCiphertext { key_id: self.key_id.clone(), value: (&a.value * &b.value) % &self.n })
    }

    /// c^k; k = 0 gives the encryption of 1, which is 1.
    pub fn pow(&self, c: &CloudRsaCiphertext, k: &BigUint) -> Result<CloudRsaCiphertext> {
        validate(c, &self.n, &self.key_id)?;
        Ok(CloudRsaCiphertext { key_id: self.key_id.clone(), value: c.value.modpow(k, &self.n) })
    }

    pub fn one(&self) -> CloudRsaCiphertext {
        CloudRsaCiphertext { key_id: self.key_id.clone(), value: BigUint::one() }
    }

    pub fn validate(&self, c: &CloudRsaCiphertext) -> Result<()> {
        validate(c, &self.n, &self.key_id)
    }

    pub fn ciphertext(&self, value: BigUint) -> Result<CloudRsaCiphertext> {
        let c = CloudRsaCiphertext { key_id: self.key_id.clone(), value };
        self.validate(&c)?;
        Ok(c)
    }
}

fn check_unit(m: &BigUint, n: &BigUint, key_id: &KeyId) -> Result<()> {
    if m.is_zero() || m >= n || !m.gcd(n).is_one() {
        return Err(Error::Encoding(format!("plaintext is not a unit mod N for key {key_id}")));
    }
    Ok(())
}

fn validate(c: &CloudRsaCiphertext, n: &BigUint, key_id: &KeyId) -> Result<()> {
    ensure_key(key_id, &c.key_id)?;
    if c.value.is_zero() || c.value >= *n || !c.value.gcd(n).is_one() {
        return Err(Error::MalformedCiphertext(format!("Cloud-RSA value outside Z_N^* for key {key_id}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CloudRsaKeyMaterial {
        CloudRsaKeyMaterial::from_primes(&BigUint::from(5u8), &BigUint::from(7u8), BigUint::from(5u8)).unwrap()
    }

    fn b(v: u32) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn tiny_material() {
        let k = tiny();
        assert_eq!(*k.dec_exp(), b(5));
        assert_eq!((k.enc_exp() * k.dec_exp()) % k.phi().unwrap(), b(1));
        let s = k.share();
        assert_eq!(s.encrypt(&b(2)).unwrap().value, b(32));
        assert_eq!(s.encrypt(&b(3)).unwrap().value, b(33));
        assert_eq!(k.encrypt(&b(3)).unwrap().value, b(33));
        assert_eq!(s.encrypt(&b(1)).unwrap().value, b(1));
        let c6 = s.mul(&s.encrypt(&b(2)).unwrap(), &s.encrypt(&b(3)).unwrap()).unwrap();
        assert_eq!(c6.value, b(6));
        assert_eq!(k.decrypt(&c6).unwrap(), b(6));
        assert_eq!(k.decrypt(&s.ciphertext(b(32)).unwrap()).unwrap(), b(2));
    }

    #[test]
    fn non_units_rejected() {
        let s = tiny().share();
        for m in [0u32, 5, 7, 14, 35] {
            assert!(matches!(s.encrypt(&b(m)), Err(Error::Encoding(_))), "{m}");
        }
        assert!(s.ciphertext(b(10)).is_err());
    }

    #[test]
    fn exhaustive_tiny_roundtrip() {
        let k = tiny();
        let s = k.share();
        for m in 1u32..35 {
            if m % 5 == 0 || m % 7 == 0 {
                continue;
            }
            let c = s.encrypt(&b(m)).unwrap();
            assert_eq!(k.decrypt(&c).unwrap(), b(m));
            assert_eq!(k.encrypt(&b(m)).unwrap(), c);
            assert_eq!(s.pow(&c, &b(0)).unwrap().value, b(1));
        }
    }
}
