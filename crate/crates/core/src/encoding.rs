//! Decimal fixed point, signed residues and digit-budget bookkeeping.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::net::Taint;
use crate::phe::{CloudRsaCiphertext, PaillierCiphertext, PaillierPublicKey};
use crate::{Error, Result};

/// Default number of decimal places kept for data and model values.
pub const DEFAULT_SCALE: u32 = 2;
/// Scale of exponential blinding factors.
pub const BLIND_SCALE: u32 = 4;

pub fn pow10(e: u32) -> BigUint {
    BigUint::from(10u8).pow(e)
}

pub fn pow10_signed(e: u32) -> BigInt {
    BigInt::from(pow10(e))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPoint {
    #[serde(with = "crate::phe::hex::bigint")]
    pub mantissa: BigInt,
    pub scale: u32,
}

impl FixedPoint {
    pub fn new(mantissa: impl Into<BigInt>, scale: u32) -> Self {
        FixedPoint { mantissa: mantissa.into(), scale }
    }

    pub fn zero(scale: u32) -> Self {
        FixedPoint { mantissa: BigInt::zero(), scale }
    }

    pub fn encode(v: f64, scale: u32) -> Result<Self> {
        Ok(FixedPoint { mantissa: fx_encode(v, scale)?, scale })
    }

    pub fn to_f64(&self) -> f64 {
        fx_decode(&self.mantissa, self.scale)
    }

    /// Same value at a larger scale.
    pub fn upscale(&self, scale: u32) -> Self {
        assert!(scale >= self.scale, "upscale cannot reduce scale");
        FixedPoint { mantissa: &self.mantissa * pow10_signed(scale - self.scale), scale }
    }

    pub fn truncate_to(&self, scale: u32) -> Self {
        FixedPoint { mantissa: truncate_scale(&self.mantissa, self.scale, scale), scale }
    }

    pub fn round_to(&self, scale: u32) -> Self {
        FixedPoint { mantissa: round_scale(&self.mantissa, self.scale, scale), scale }
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.mantissa.to_i64()
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mag = self.mantissa.magnitude().to_string();
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        let s = self.scale as usize;
        if s == 0 {
            return write!(f, "{sign}{mag}");
        }
        let padded = format!("{mag:0>width$}", width = s + 1);
        let (int, frac) = padded.split_at(padded.len() - s);
        write!(f, "{sign}{int}.{frac}")
    }
}

/// `trunc(v * 10^scale)` toward zero, computed on the shortest decimal
/// representation of `v` so that e.g. 0.29 encodes to 29 rather than 28.
pub fn fx_encode(v: f64, scale: u32) -> Result<BigInt> {
    if !v.is_finite() {
        return Err(Error::Encoding(format!("cannot encode non-finite value {v}")));
    }
    let text = format!("{}", v.abs());
    let (int, frac) = text.split_once('.').unwrap_or((text.as_str(), ""));
    let mut digits = String::with_capacity(int.len() + scale as usize);
    digits.push_str(int);
    let s = scale as usize;
    if frac.len() >= s {
        digits.push_str(&frac[..s]);
    } else {
        digits.push_str(frac);
        digits.extend(std::iter::repeat('0').take(s - frac.len()));
    }
    let mag: BigUint = digits.parse().map_err(|e| Error::Encoding(format!("{e}")))?;
    Ok(if v < 0.0 { -BigInt::from(mag) } else { BigInt::from(mag) })
}

/// `mantissa / 10^scale`, correctly rounded to the nearest f64.
pub fn fx_decode(mantissa: &BigInt, scale: u32) -> f64 {
    if mantissa.is_zero() {
        return 0.0;
    }
    format!("{mantissa}e-{scale}").parse().expect("valid float literal")
}

/// Rescales a mantissa from `from` to `to` decimal places, truncating toward zero.
pub fn truncate_scale(m: &BigInt, from: u32, to: u32) -> BigInt {
    if to >= from {
        return m * pow10_signed(to - from);
    }
    // BigInt division truncates toward zero
    m / pow10_signed(from - to)
}

/// Rescales a mantissa, rounding half away from zero.
pub fn round_scale(m: &BigInt, from: u32, to: u32) -> BigInt {
    if to >= from {
        return m * pow10_signed(to - from);
    }
    let d = pow10_signed(from - to);
    let (q, r) = m.magnitude().div_rem(d.magnitude());
    let q = if BigInt::from(r) * 2 >= d { q + 1u32 } else { q };
    BigInt::from_biguint(m.sign(), q)
}

/// Maps a signed integer into Z_N; negatives become N - |m|.
pub fn to_residue(m: &BigInt, n: &BigUint) -> Result<BigUint> {
    let half = n >> 1;
    if *m.magnitude() > half || (m.is_negative() && *m.magnitude() == half && n.is_even()) {
        return Err(Error::Budget(BudgetViolation {
            context: "signed residue".into(),
            required_digits: digits_of(m.magnitude()),
            key_digits: key_digits(n),
        }));
    }
    Ok(match m.sign() {
        Sign::Minus => n - m.magnitude(),
        _ => m.magnitude().clone(),
    })
}

/// Inverse of [`to_residue`]: residues above N/2 are negative.
pub fn from_residue(r: &BigUint, n: &BigUint) -> BigInt {
    let half = n >> 1;
    if *r > half {
        -BigInt::from(n - r)
    } else {
        BigInt::from(r.clone())
    }
}

/// `⌊log10 x⌋ + 1` for x > 0, exact.
pub fn digits_of(x: &BigUint) -> u32 {
    if x.is_zero() {
        return 1;
    }
    x.to_str_radix(10).len() as u32
}

/// `⌊log10 N⌋`, exact.
pub fn key_digits(n: &BigUint) -> u32 {
    digits_of(n) - 1
}

/// Smallest `⌊log10 N⌋` for a modulus produced by our key generator at
/// `bits` bits (both primes have their top two bits set, so N ≥ 0.5625·2^bits).
pub fn min_key_digits(bits: u64) -> Option<u32> {
    match bits {
        512 => Some(153),
        1024 => Some(308),
        2048 => Some(616),
        4096 => Some(1232),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffDecomposition {
    pub sign: i8,
    pub int_part: u64,
    pub frac_part: u32,
}

impl CoeffDecomposition {
    pub fn recompose(&self) -> FixedPoint {
        let m: BigInt = BigInt::from(self.int_part) * 100 + BigInt::from(self.frac_part);
        FixedPoint::new(if self.sign < 0 { -m } else { m }, 2)
    }
}

/// Splits a coefficient truncated to two decimals into sign, integer and
/// hundredths.
pub fn decompose_coeff(theta: f64) -> Result<CoeffDecomposition> {
    decompose_mantissa(&fx_encode(theta, 2)?)
}

/// As [`decompose_coeff`] for a mantissa already at scale 2.
pub fn decompose_mantissa(m: &BigInt) -> Result<CoeffDecomposition> {
    let (i, f) = m.magnitude().div_rem(&BigUint::from(100u8));
    let int_part = i
        .to_u64()
        .ok_or_else(|| Error::Encoding("coefficient integer part does not fit u64".into()))?;
    Ok(CoeffDecomposition {
        sign: if m.is_negative() { -1 } else { 1 },
        int_part,
        frac_part: f.to_u32().expect("below 100"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error(
    "digit budget exceeded for {context}: needs {required_digits} decimal digits but \
     the key allows {key_digits} (margin {}); the requirement is (sum|theta| + d - 1) * 2 < floor(log10 N)",
    *key_digits as i64 - *required_digits as i64
)]
pub struct BudgetViolation {
    pub context: String,
    pub required_digits: u32,
    pub key_digits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitBudget {
    pub key_digits: u32,
    pub required_digits: u32,
}

impl DigitBudget {
    pub fn margin(&self) -> i64 {
        self.key_digits as i64 - self.required_digits as i64
    }
}

/// Pre-flight guard for the exponent digits of the power function:
/// passes iff `(theta_l1_bound + d - 1) * 2 < key_digits`.
pub fn budget_check_lr(d: usize, theta_l1_bound: f64, key_bits: u64) -> Result<DigitBudget, BudgetViolation> {
    let key_digits = min_key_digits(key_bits).ok_or_else(|| BudgetViolation {
        context: format!("unsupported key size {key_bits}"),
        required_digits: 0,
        key_digits: 0,
    })?;
    let need = (theta_l1_bound.max(0.0) + d.saturating_sub(1) as f64) * 2.0;
    let required_digits = need.ceil() as u32;
    if need < key_digits as f64 {
        Ok(DigitBudget { key_digits, required_digits })
    } else {
        Err(BudgetViolation { context: format!("power function with d={d}, sum|theta| <= {theta_l1_bound}"), required_digits, key_digits })
    }
}

/// A ciphertext together with its decimal scale and taint tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaled<C> {
    pub ct: C,
    pub scale: u32,
    pub taint: Taint,
}

pub type ScaledPaillier = Scaled<PaillierCiphertext>;
pub type ScaledRsa = Scaled<CloudRsaCiphertext>;

impl<C> Scaled<C> {
    pub fn new(ct: C, scale: u32) -> Self {
        Scaled { ct, scale, taint: Taint::Cipher }
    }

    pub fn with_taint(mut self, taint: Taint) -> Self {
        self.taint = taint;
        self
    }
}

/// Fails when a mantissa of `scale` decimals cannot live under `n`.
pub fn check_scale(scale: u32, n: &BigUint, context: &str) -> Result<()> {
    let kd = key_digits(n);
    if scale + 1 >= kd {
        return Err(BudgetViolation { context: context.into(), required_digits: scale + 1, key_digits: kd }.into());
    }
    Ok(())
}

/// Multiplies the plaintext mantissa by 10^t, raising the scale by t.
pub fn rescale_ct(pk: &PaillierPublicKey, sc: &ScaledPaillier, t: u32) -> Result<ScaledPaillier> {
    if t == 0 {
        return Ok(sc.clone());
    }
    let scale = sc.scale + t;
    check_scale(scale, pk.n(), "rescale")?;
    let ct = pk.scalar_pow(&sc.ct, &pow10_signed(t))?;
    Ok(Scaled { ct, scale, taint: sc.taint.clone() })
}

pub fn encrypt_signed<R: rand::RngCore + ?Sized>(
    pk: &PaillierPublicKey,
    m: &BigInt,
    rng: &mut R,
) -> Result<PaillierCiphertext> {
    pk.encrypt(&to_residue(m, pk.n())?, rng)
}

/// Smallest value ≥ m that is a unit mod N. The increment is a no-op with
/// overwhelming probability at real key sizes.
pub fn rsa_plaintext(m: &BigUint, n: &BigUint) -> BigUint {
    let mut v = if m.is_zero() { BigUint::one() } else { m.clone() };
    while !v.gcd(n).is_one() {
        log::warn!("plaintext shares a factor with the Cloud-RSA modulus; incremented");
        v += 1u32;
    }
    v
}
