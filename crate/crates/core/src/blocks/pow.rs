//! Secure power function over Cloud-RSA.
//!
//! `e^{±θᵀx}` is assembled from per-feature encryptions of `ê^{x_j}` and
//! `ê^{-x_j}` (scale 2) raised to the integer and hundredth parts of each
//! coefficient. The integer parts multiply directly; the hundredth parts
//! form a product whose 100th root is taken after decryption. Products that
//! would not fit below N are split into several chunks.

use std::f64::consts::{LN_10, LN_2};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::encoding::{decompose_mantissa, fx_decode, fx_encode, rsa_plaintext, Scaled, ScaledRsa};
use crate::net::{Payload, Taint};
use crate::party::{Owner, Reply, Session};
use crate::phe::CloudRsaPublic;
use crate::{Error, Result};

/// Root applied to the hundredth-part components.
pub const FRAC_ROOT: u32 = 100;
/// Largest |r| for exponential blinding.
pub const MAX_BLIND_R: i32 = 8;

/// Upper bounds of log10 of a scale-2 base: ê^{x} ≤ 271 and ê^{-x} ≤ 100 for x ∈ [0, 1].
const POS_BASE_DIGITS: f64 = 2.434_27;
const NEG_BASE_DIGITS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionProfile {
    /// Scale of the owner's reply in the Cloud-RSA to Paillier conversion.
    pub owner_scale: u32,
    /// Scale of the unblinding multiplier.
    pub unblind_scale: u32,
    /// Scale of the owner's sigmoid shares.
    pub sigmoid_scale: u32,
    /// Scale of `ê^r` blinding factors.
    pub blind_scale: u32,
}

impl PrecisionProfile {
    /// Two decimals everywhere, as in the worked example.
    pub const TWO_DECIMALS: PrecisionProfile =
        PrecisionProfile { owner_scale: 2, unblind_scale: 2, sigmoid_scale: 2, blind_scale: 4 };

    /// Protocol default; six decimals keep `e^{±8}` blinding harmless.
    pub const STANDARD: PrecisionProfile =
        PrecisionProfile { owner_scale: 6, unblind_scale: 6, sigmoid_scale: 6, blind_scale: 4 };
}

impl Default for PrecisionProfile {
    fn default() -> Self {
        PrecisionProfile::STANDARD
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentSign {
    /// `e^{+θᵀx}`
    Positive,
    /// `e^{-θᵀx}`
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpEncodedVector {
    pub pos: Vec<ScaledRsa>,
    pub neg: Vec<ScaledRsa>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factor {
    pub feature: usize,
    pub negative_base: bool,
    pub exp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowChunk {
    pub root: u32,
    pub factors: Vec<Factor>,
}

impl PowChunk {
    pub fn scale(&self) -> u32 {
        2 * self.factors.iter().map(|f| f.exp as u32).sum::<u32>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowComponent {
    pub ct: ScaledRsa,
    pub root: u32,
}

/// Components whose decrypted values `v_k / 10^{s_k}` combine as
/// `∏ (v_k / 10^{s_k})^{1/root_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowResult {
    pub components: Vec<PowComponent>,
}

impl PowResult {
    pub fn int_components(&self) -> impl Iterator<Item = &PowComponent> {
        self.components.iter().filter(|c| c.root == 1)
    }

    pub fn frac_components(&self) -> impl Iterator<Item = &PowComponent> {
        self.components.iter().filter(|c| c.root == FRAC_ROOT)
    }
}

/// `ê^{±x}` at scale 2 for a scale-2 feature mantissa.
pub fn exp_mantissa(x: &BigInt, negative: bool) -> Result<BigUint> {
    let v = fx_decode(x, 2);
    let e = if negative { (-v).exp() } else { v.exp() };
    let m = fx_encode(e, 2)?;
    m.to_biguint().filter(|m| !m.is_zero()).ok_or_else(|| Error::Encoding(format!("exponential of {v} underflows")))
}

/// `ê^r` at `scale`.
pub fn blind_mantissa(r: i32, scale: u32) -> Result<BigUint> {
    let m = fx_encode((r as f64).exp(), scale)?;
    m.to_biguint().filter(|m| !m.is_zero()).ok_or_else(|| Error::Encoding(format!("blinding e^{r} underflows")))
}

fn ln_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 63 {
        return (v.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 63;
    let top = (v >> shift).to_u64().expect("63 bits") as f64;
    top.ln() + shift as f64 * LN_2
}

/// Owner-side recombination of decrypted components given as
/// `(value, scale, root)`.
pub fn recover_blinded(parts: &[(BigUint, u32, u32)]) -> Result<f64> {
    let mut l = 0.0;
    for (v, s, root) in parts {
        if v.is_zero() || *root == 0 {
            return Err(Error::protocol("power component is not a positive value"));
        }
        l += (ln_big(v) - *s as f64 * LN_10) / *root as f64;
    }
    Ok(l.exp())
}

/// `(10^{bs} / b)^{Σ 1/root}`: cancels the blinding factor `b` that was
/// multiplied into every component.
pub fn unblind_factor(b: &BigUint, blind_scale: u32, roots: &[u32]) -> f64 {
    let e: f64 = roots.iter().map(|&r| 1.0 / r as f64).sum();
    (e * (blind_scale as f64 * LN_10 - ln_big(b))).exp()
}

/// Splits the exponent units of θ into chunks whose products (times a
/// blinding factor) stay below a key with `budget_digits` decimal digits.
/// Both the integer and the fractional group get at least one chunk.
pub fn pow_plan(theta: &[BigInt], sign: ExponentSign, budget_digits: u32, blind_scale: u32) -> Result<Vec<PowChunk>> {
    let blind_digits = 4 + blind_scale;
    let room = budget_digits as f64 - blind_digits as f64 - 3.0;
    if room < POS_BASE_DIGITS {
        return Err(crate::encoding::BudgetViolation {
            context: "power function chunk".into(),
            required_digits: blind_digits + 6,
            key_digits: budget_digits,
        }
        .into());
    }
    let parts = theta.iter().map(decompose_mantissa).collect::<Result<Vec<_>>>()?;
    let mut plan = Vec::new();
    for root in [1u32, FRAC_ROOT] {
        let mut group = Vec::new();
        let mut cur = PowChunk { root, factors: Vec::new() };
        let mut used = 0.0f64;
        for (j, p) in parts.iter().enumerate() {
            let mut k = if root == 1 { p.int_part } else { p.frac_part as u64 };
            if k == 0 {
                continue;
            }
            let negative_base = match sign {
                ExponentSign::Negative => p.sign > 0,
                ExponentSign::Positive => p.sign < 0,
            };
            let w = if negative_base { NEG_BASE_DIGITS } else { POS_BASE_DIGITS };
            while k > 0 {
                let fit = ((room - used) / w).floor().max(0.0) as u64;
                if fit == 0 {
                    group.push(std::mem::replace(&mut cur, PowChunk { root, factors: Vec::new() }));
                    used = 0.0;
                    continue;
                }
                let take = fit.min(k);
                cur.factors.push(Factor { feature: j, negative_base, exp: take });
                used += take as f64 * w;
                k -= take;
            }
        }
        if !cur.factors.is_empty() || group.is_empty() {
            group.push(cur);
        }
        plan.extend(group);
    }
    Ok(plan)
}

/// Evaluates a plan on encrypted exponentials; local to the demander.
pub fn secure_pow(share: &CloudRsaPublic, exp: &ExpEncodedVector, plan: &[PowChunk]) -> Result<PowResult> {
    let mut components = Vec::with_capacity(plan.len());
    for chunk in plan {
        let mut acc = share.one();
        for f in &chunk.factors {
            let bases = if f.negative_base { &exp.neg } else { &exp.pos };
            let base = bases.get(f.feature).ok_or_else(|| {
                Error::protocol(format!("missing {} exponential for feature {}", if f.negative_base { "negative" } else { "positive" }, f.feature))
            })?;
            acc = share.mul(&acc, &share.pow(&base.ct, &BigUint::from(f.exp))?)?;
        }
        components.push(PowComponent { ct: Scaled::new(acc, chunk.scale()), root: chunk.root });
    }
    Ok(PowResult { components })
}

/// Power transfer: one round trip fetching a record's exponential vectors.
pub fn fetch_exp_vectors(session: &mut Session, record: u64) -> Result<ExpEncodedVector> {
    let owner = session.demander.record_owner(record)?;
    let env = session.call(owner, Payload::PowRequest { record }, 0, Taint::Public)?;
    let share = session.demander.owner_keys(owner)?.cloudrsa.clone();
    match env.body {
        Payload::PowVectors { record: r, pos, neg } if r == record => {
            let wrap = |v: Vec<_>| -> Result<Vec<ScaledRsa>> {
                v.into_iter()
                    .map(|c| {
                        share.validate(&c)?;
                        Ok(Scaled::new(c, 2))
                    })
                    .collect()
            };
            let (pos, neg) = (wrap(pos)?, wrap(neg)?);
            if pos.len() != neg.len() {
                return Err(Error::DimensionMismatch { expected: pos.len(), found: neg.len() });
            }
            Ok(ExpEncodedVector { pos, neg })
        }
        other => Err(Error::protocol(format!("expected pow-vectors for record {record}, got {}", other.kind()))),
    }
}

pub(crate) fn owner_pow_vectors(owner: &mut Owner, record: u64) -> Result<Reply> {
    if !owner.exp_cache.contains_key(&record) {
        let rec = owner.record(record)?;
        let n = owner.rsa.n().clone();
        let mut pos = Vec::with_capacity(rec.x_hat.len());
        let mut neg = Vec::with_capacity(rec.x_hat.len());
        for x in &rec.x_hat {
            if x.is_negative() || *x > BigInt::from(100) {
                return Err(Error::protocol(format!("feature mantissa {x} outside [0, 1]")));
            }
            pos.push(owner.rsa.encrypt(&rsa_plaintext(&exp_mantissa(x, false)?, &n))?.value);
            neg.push(owner.rsa.encrypt(&rsa_plaintext(&exp_mantissa(x, true)?, &n))?.value);
        }
        owner.exp_cache.insert(record, (pos, neg));
    }
    let (pos, neg) = &owner.exp_cache[&record];
    let kid = owner.rsa.key_id().clone();
    let wrap = |v: &Vec<BigUint>| {
        v.iter().map(|value| crate::phe::CloudRsaCiphertext { key_id: kid.clone(), value: value.clone() }).collect()
    };
    Ok(Reply::cipher(Payload::PowVectors { record, pos: wrap(pos), neg: wrap(neg) }, 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn exponential_mantissas() {
        assert_eq!(exp_mantissa(&BigInt::from(10), false).unwrap(), BigUint::from(110u32));
        assert_eq!(exp_mantissa(&BigInt::from(20), false).unwrap(), BigUint::from(122u32));
        assert_eq!(exp_mantissa(&BigInt::from(100), false).unwrap(), BigUint::from(271u32));
        assert_eq!(exp_mantissa(&BigInt::from(100), true).unwrap(), BigUint::from(36u32));
        assert_eq!(exp_mantissa(&BigInt::from(0), true).unwrap(), BigUint::from(100u32));
        assert_eq!(blind_mantissa(-2, 4).unwrap(), BigUint::from(1353u32));
    }

    #[test]
    fn plan_for_worked_example_is_two_chunks() {
        let plan = pow_plan(&m(&[131, 242]), ExponentSign::Positive, 308, 4).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan[0].root, 1);
        assert_eq!(plan[0].scale(), 6);
        assert_eq!(plan[1].root, 100);
        assert_eq!(plan[1].scale(), 146);
    }

    #[test]
    fn zero_theta_gives_empty_chunks() {
        let plan = pow_plan(&m(&[0, 0, 0]), ExponentSign::Negative, 153, 4).unwrap();
        assert_eq!(plan.len(), 2);
        assert!(plan.iter().all(|c| c.factors.is_empty() && c.scale() == 0));
    }

    #[test]
    fn negative_exponent_selects_bases_by_sign() {
        let plan = pow_plan(&m(&[150, -75]), ExponentSign::Negative, 308, 4).unwrap();
        let f: Vec<_> = plan.iter().flat_map(|c| c.factors.iter().map(move |f| (c.root, f.feature, f.negative_base, f.exp))).collect();
        assert_eq!(f, vec![(1, 0, true, 1), (100, 0, true, 50), (100, 1, false, 75)]);
    }

    #[test]
    fn large_fractions_are_split_but_preserve_exponents() {
        let theta = m(&[99, 199, -399, 1099, 99, 99, 99, 99, 99, 99]);
        for budget in [153u32, 308, 616] {
            let plan = pow_plan(&theta, ExponentSign::Negative, budget, 4).unwrap();
            for (j, t) in theta.iter().enumerate() {
                let d = decompose_mantissa(t).unwrap();
                let int: u64 = plan.iter().filter(|c| c.root == 1).flat_map(|c| &c.factors).filter(|f| f.feature == j).map(|f| f.exp).sum();
                let frac: u64 = plan.iter().filter(|c| c.root == 100).flat_map(|c| &c.factors).filter(|f| f.feature == j).map(|f| f.exp).sum();
                assert_eq!((int, frac), (d.int_part, d.frac_part as u64));
            }
            for c in &plan {
                let digits: f64 = c.factors.iter().map(|f| f.exp as f64 * if f.negative_base { 2.0 } else { 2.43427 }).sum();
                assert!(digits + 8.0 + 3.0 <= budget as f64, "budget {budget}: {digits}");
            }
        }
    }

    #[test]
    fn recovery_and_unblinding() {
        // 110^1 * 122^2 at scale 6 times e^0 (no blinding): e^{0.1+0.4}
        let v = BigUint::from(1637240u32);
        let r = recover_blinded(&[(v, 6, 1)]).unwrap();
        assert!((r - 1.63724).abs() < 1e-12);
        let u = unblind_factor(&BigUint::from(1353u32), 4, &[1, 100]);
        assert!((u - 7.5403).abs() < 1e-4, "{u}");
        assert_eq!(fx_encode(u, 2).unwrap(), BigInt::from(754));
        assert!(recover_blinded(&[(BigUint::zero(), 2, 1)]).is_err());
    }
}
