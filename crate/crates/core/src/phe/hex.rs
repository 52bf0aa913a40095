//! Canonical hex for big integers: lowercase, big-endian, no leading zeros.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Num;

pub fn encode(v: &BigUint) -> String {
    v.to_str_radix(16)
}

pub fn decode(s: &str) -> Result<BigUint, String> {
    if s.is_empty() {
        return Err("empty hex string".into());
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(format!("non-canonical hex (leading zero): {s}"));
    }
    if !s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
        return Err(format!("non-canonical hex: {s}"));
    }
    BigUint::from_str_radix(s, 16).map_err(|e| e.to_string())
}

/// Signed form: a leading '-' for negatives.
pub fn encode_signed(v: &BigInt) -> String {
    match v.sign() {
        Sign::Minus => format!("-{}", encode(v.magnitude())),
        _ => encode(v.magnitude()),
    }
}

pub fn decode_signed(s: &str) -> Result<BigInt, String> {
    match s.strip_prefix('-') {
        Some(rest) => {
            let m = decode(rest)?;
            if m == BigUint::default() {
                return Err("negative zero".into());
            }
            Ok(BigInt::from_biguint(Sign::Minus, m))
        }
        None => Ok(BigInt::from(decode(s)?)),
    }
}

pub mod biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        super::decode(&s).map_err(D::Error::custom)
    }
}

pub mod opt_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.serialize_str(&super::encode(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => super::decode(&s).map(Some).map_err(D::Error::custom),
            None => Ok(None),
        }
    }
}

pub mod bigint {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_signed(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        super::decode_signed(&s).map_err(D::Error::custom)
    }
}

pub mod vec_bigint {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&super::encode_signed(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| super::decode_signed(s).map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(encode(&BigUint::from(0u8)), "0");
        assert_eq!(encode(&BigUint::from(0xabcu32)), "abc");
        assert_eq!(decode("abc").unwrap(), BigUint::from(0xabcu32));
        assert!(decode("0abc").is_err());
        assert!(decode("ABC").is_err());
        assert!(decode("").is_err());
        assert_eq!(decode_signed("-1f").unwrap(), BigInt::from(-31));
        assert!(decode_signed("-0").is_err());
        assert_eq!(encode_signed(&BigInt::from(-31)), "-1f");
    }
}
