use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{check_key_bits, ensure_key, hex, prime, KeyFile, KeyId};
use crate::{Error, Result};

const KIND: &str = "paillier";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: BigUint,
    n_sq: BigUint,
    key_id: KeyId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaillierCiphertext {
    pub key_id: KeyId,
    #[serde(with = "hex::biguint")]
    pub value: BigUint,
}

/// Per-prime constants for CRT decryption and owner-side encryption.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Crt {
    p: BigUint,
    q: BigUint,
    p_sq: BigUint,
    q_sq: BigUint,
    hp: BigUint,
    hq: BigUint,
    q_inv_p: BigUint,
    q_sq_inv_p_sq: BigUint,
    n_mod_lp: BigUint,
    n_mod_lq: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaillierPrivateKey {
    public: PaillierPublicKey,
    phi: BigUint,
    phi_inv: BigUint,
    crt: Option<Crt>,
}

pub fn paillier_keygen<R: RngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    check_key_bits(bits)?;
    let (p, q) = prime::generate_modulus_primes(bits, rng)?;
    let sk = PaillierPrivateKey::from_primes(&p, &q)?;
    Ok((sk.public.clone(), sk))
}

impl PaillierPublicKey {
    pub fn new(n: BigUint) -> Self {
        let n_sq = &n * &n;
        let key_id = KeyId::derive(KIND, &n);
        PaillierPublicKey { n, n_sq, key_id }
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_sq(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn key_id(&self) -> &KeyId {
        &self.key_id
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// Uniform r in Z_N^*.
    pub fn sample_nonce<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        loop {
            let r = rng.gen_biguint_below(&self.n);
            if !r.is_zero() && r.gcd(&self.n).is_one() {
                return r;
            }
        }
    }

    pub fn encrypt<R: RngCore + ?Sized>(&self, m: &BigUint, rng: &mut R) -> Result<PaillierCiphertext> {
        let r = self.sample_nonce(rng);
        self.encrypt_with_nonce(m, &r)
    }

    /// c = (1+N)^m * r^N mod N^2, with (1+N)^m computed as 1 + mN.
    pub fn encrypt_with_nonce(&self, m: &BigUint, r: &BigUint) -> Result<PaillierCiphertext> {
        self.check_plaintext(m)?;
        let rn = r.modpow(&self.n, &self.n_sq);
        Ok(self.wrap((self.g_pow(m) * rn) % &self.n_sq))
    }

    /// Encryption with r = 1. Only used as an additive constant, never sent
    /// as a fresh ciphertext.
    pub fn encrypt_trivial(&self, m: &BigUint) -> Result<PaillierCiphertext> {
        self.check_plaintext(m)?;
        Ok(self.wrap(self.g_pow(m)))
    }

    pub fn add(&self, a: &PaillierCiphertext, b: &PaillierCiphertext) -> Result<PaillierCiphertext> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wrap((&a.value * &b.value) % &self.n_sq))
    }

    pub fn sub(&self, a: &PaillierCiphertext, b: &PaillierCiphertext) -> Result<PaillierCiphertext> {
        self.check(a)?;
        let inv = self.inverse(b)?;
        Ok(self.wrap((&a.value * inv) % &self.n_sq))
    }

    pub fn neg(&self, c: &PaillierCiphertext) -> Result<PaillierCiphertext> {
        Ok(self.wrap(self.inverse(c)?))
    }

    /// Plaintext addition of a signed constant: c * (1 + kN).
    pub fn add_plain(&self, c: &PaillierCiphertext, k: &BigInt) -> Result<PaillierCiphertext> {
        self.check(c)?;
        let k = k.mod_floor(&BigInt::from(self.n.clone())).to_biguint().expect("non-negative");
        Ok(self.wrap((&c.value * self.g_pow(&k)) % &self.n_sq))
    }

    /// Scalar multiplication of the plaintext by a signed integer.
    pub fn scalar_pow(&self, c: &PaillierCiphertext, k: &BigInt) -> Result<PaillierCiphertext> {
        self.check(c)?;
        let mag = k.magnitude() % &self.n;
        let base = if k.sign() == Sign::Minus { self.inverse(c)? } else { c.value.clone() };
        Ok(self.wrap(base.modpow(&mag, &self.n_sq)))
    }

    pub fn rerandomize<R: RngCore + ?Sized>(
        &self,
        c: &PaillierCiphertext,
        rng: &mut R,
    ) -> Result<PaillierCiphertext> {
        self.check(c)?;
        let r = self.sample_nonce(rng);
        let rn = r.modpow(&self.n, &self.n_sq);
        Ok(self.wrap((&c.value * rn) % &self.n_sq))
    }

    /// Range and coprimality check for a received ciphertext.
    pub fn validate(&self, c: &PaillierCiphertext) -> Result<()> {
        self.check(c)
    }

    /// Builds a ciphertext from a raw value, validating it.
    pub fn ciphertext(&self, value: BigUint) -> Result<PaillierCiphertext> {
        let c = self.wrap(value);
        self.check(&c)?;
        Ok(c)
    }

    pub fn to_key_file(&self) -> KeyFile {
        KeyFile::Paillier { key_id: self.key_id.clone(), n: self.n.clone(), phi: None, phi_inv: None }
    }

    fn g_pow(&self, m: &BigUint) -> BigUint {
        (BigUint::one() + m * &self.n) % &self.n_sq
    }

    fn wrap(&self, value: BigUint) -> PaillierCiphertext {
        PaillierCiphertext { key_id: self.key_id.clone(), value }
    }

    fn check_plaintext(&self, m: &BigUint) -> Result<()> {
        if *m >= self.n {
            return Err(Error::Encoding(format!("plaintext not below N for key {}", self.key_id)));
        }
        Ok(())
    }

    fn check(&self, c: &PaillierCiphertext) -> Result<()> {
        ensure_key(&self.key_id, &c.key_id)?;
        if c.value.is_zero() || c.value >= self.n_sq {
            return Err(Error::MalformedCiphertext(format!("value out of range for key {}", self.key_id)));
        }
        if !c.value.gcd(&self.n).is_one() {
            return Err(Error::MalformedCiphertext(format!("value not a unit mod N^2 for key {}", self.key_id)));
        }
        Ok(())
    }

    fn inverse(&self, c: &PaillierCiphertext) -> Result<BigUint> {
        self.check(c)?;
        c.value
            .modinv(&self.n_sq)
            .ok_or_else(|| Error::MalformedCiphertext("ciphertext not invertible".into()))
    }
}

fn l_function(x: &BigUint, d: &BigUint) -> BigUint {
    (x - 1u32) / d
}

impl Crt {
    fn new(p: &BigUint, q: &BigUint) -> Result<Self> {
        let n = p * q;
        let g = BigUint::one() + &n;
        let p_sq = p * p;
        let q_sq = q * q;
        let pm1 = p - 1u32;
        let qm1 = q - 1u32;
        let bad = || Error::Encoding("degenerate Paillier primes".into());
        let hp = l_function(&g.modpow(&pm1, &p_sq), p).modinv(p).ok_or_else(bad)?;
        let hq = l_function(&g.modpow(&qm1, &q_sq), q).modinv(q).ok_or_else(bad)?;
        let q_inv_p = q.modinv(p).ok_or_else(bad)?;
        let q_sq_inv_p_sq = q_sq.modinv(&p_sq).ok_or_else(bad)?;
        let n_mod_lp = &n % (p * &pm1);
        let n_mod_lq = &n % (q * &qm1);
        Ok(Crt { p: p.clone(), q: q.clone(), p_sq, q_sq, hp, hq, q_inv_p, q_sq_inv_p_sq, n_mod_lp, n_mod_lq })
    }

    fn decrypt(&self, c: &BigUint) -> BigUint {
        let mp = (l_function(&(c % &self.p_sq).modpow(&(&self.p - 1u32), &self.p_sq), &self.p) * &self.hp) % &self.p;
        let mq = (l_function(&(c % &self.q_sq).modpow(&(&self.q - 1u32), &self.q_sq), &self.q) * &self.hq) % &self.q;
        combine(&mp, &mq, &self.p, &self.q, &self.q_inv_p)
    }

    /// r^N mod N^2 via the two prime-square moduli.
    fn nth_power(&self, r: &BigUint) -> BigUint {
        let xp = (r % &self.p_sq).modpow(&self.n_mod_lp, &self.p_sq);
        let xq = (r % &self.q_sq).modpow(&self.n_mod_lq, &self.q_sq);
        combine(&xp, &xq, &self.p_sq, &self.q_sq, &self.q_sq_inv_p_sq)
    }
}

/// Garner recombination: x = xq + q * ((xp - xq) * q^{-1} mod p).
fn combine(xp: &BigUint, xq: &BigUint, p: &BigUint, q: &BigUint, q_inv_p: &BigUint) -> BigUint {
    let xq_mod_p = xq % p;
    let diff = if *xp >= xq_mod_p { xp - &xq_mod_p } else { xp + p - &xq_mod_p };
    xq + q * ((diff * q_inv_p) % p)
}

impl PaillierPrivateKey {
    pub fn from_primes(p: &BigUint, q: &BigUint) -> Result<Self> {
        if p == q {
            return Err(Error::Encoding("Paillier primes must be distinct".into()));
        }
        let n = p * q;
        let phi = (p - 1u32) * (q - 1u32);
        let mut sk = Self::from_parts(n, phi)?;
        sk.crt = Some(Crt::new(p, q)?);
        Ok(sk)
    }

    /// Key without factorization; decryption uses the direct formula.
    pub fn from_parts(n: BigUint, phi: BigUint) -> Result<Self> {
        let phi_inv = phi
            .modinv(&n)
            .ok_or_else(|| Error::Encoding("phi(N) is not invertible mod N".into()))?;
        Ok(PaillierPrivateKey { public: PaillierPublicKey::new(n), phi, phi_inv, crt: None })
    }

    pub fn from_key_file(f: &KeyFile) -> Result<Self> {
        f.verify()?;
        match f {
            KeyFile::Paillier { n, phi: Some(phi), phi_inv, .. } => {
                let sk = Self::from_parts(n.clone(), phi.clone())?;
                if phi_inv.as_ref().is_some_and(|v| *v != sk.phi_inv) {
                    return Err(Error::Encoding("phi_inv inconsistent with phi".into()));
                }
                Ok(sk)
            }
            _ => Err(Error::Encoding("not a Paillier private key file".into())),
        }
    }

    pub fn to_key_file(&self) -> KeyFile {
        KeyFile::Paillier {
            key_id: self.public.key_id.clone(),
            n: self.public.n.clone(),
            phi: Some(self.phi.clone()),
            phi_inv: Some(self.phi_inv.clone()),
        }
    }

    pub fn public(&self) -> &PaillierPublicKey {
        &self.public
    }

    pub fn key_id(&self) -> &KeyId {
        &self.public.key_id
    }

    pub fn phi(&self) -> &BigUint {
        &self.phi
    }

    pub fn phi_inv(&self) -> &BigUint {
        &self.phi_inv
    }

    pub fn decrypt(&self, c: &PaillierCiphertext) -> Result<BigUint> {
        self.public.check(c)?;
        Ok(match &self.crt {
            Some(crt) => crt.decrypt(&c.value),
            None => self.direct(&c.value),
        })
    }

    /// m = L(c^phi mod N^2) * phi^{-1} mod N, without CRT.
    pub fn decrypt_direct(&self, c: &PaillierCiphertext) -> Result<BigUint> {
        self.public.check(c)?;
        Ok(self.direct(&c.value))
    }

    fn direct(&self, c: &BigUint) -> BigUint {
        let pk = &self.public;
        let u = c.modpow(&self.phi, &pk.n_sq);
        (l_function(&u, &pk.n) * &self.phi_inv) % &pk.n
    }

    /// Owner-side encryption under its own key, using CRT for r^N.
    pub fn encrypt<R: RngCore + ?Sized>(&self, m: &BigUint, rng: &mut R) -> Result<PaillierCiphertext> {
        let r = self.public.sample_nonce(rng);
        self.encrypt_with_nonce(m, &r)
    }

    pub fn encrypt_with_nonce(&self, m: &BigUint, r: &BigUint) -> Result<PaillierCiphertext> {
        let pk = &self.public;
        match &self.crt {
            Some(crt) => {
                pk.check_plaintext(m)?;
                Ok(pk.wrap((pk.g_pow(m) * crt.nth_power(r)) % &pk.n_sq))
            }
            None => pk.encrypt_with_nonce(m, r),
        }
    }

    /// Signed decryption helper: residues above N/2 are negative.
    pub fn decrypt_signed(&self, c: &PaillierCiphertext) -> Result<BigInt> {
        let m = self.decrypt(c)?;
        Ok(crate::encoding::from_residue(&m, &self.public.n))
    }
}
