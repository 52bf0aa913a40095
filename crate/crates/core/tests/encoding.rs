use heda_core::encoding::{
    budget_check_lr, decompose_mantissa, from_residue, fx_decode, fx_encode, round_scale, to_residue, truncate_scale,
};
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

fn modulus() -> BigUint {
    // 2^127 - 1 times 2^89 - 1: odd, composite is fine for residue arithmetic
    ((BigUint::from(1u8) << 127) - 1u8) * ((BigUint::from(1u8) << 89) - 1u8)
}

proptest! {
    #[test]
    fn residue_roundtrip(m in any::<i128>()) {
        let n = modulus();
        let m = BigInt::from(m);
        prop_assert_eq!(from_residue(&to_residue(&m, &n).unwrap(), &n), m);
    }

    #[test]
    fn encode_truncates_toward_zero(v in -1.0e6f64..1.0e6, scale in 0u32..8) {
        let m = fx_encode(v, scale).unwrap();
        let back = fx_decode(&m, scale);
        prop_assert!(back.abs() <= v.abs() + 1e-9);
        prop_assert!((v - back).abs() < 10f64.powi(-(scale as i32)) * (1.0 + 1e-9));
    }

    #[test]
    fn decode_encode_is_identity_on_mantissas(m in -10_000_000i64..10_000_000, scale in 0u32..6) {
        let m = BigInt::from(m);
        prop_assert_eq!(fx_encode(fx_decode(&m, scale), scale).unwrap(), m);
    }

    #[test]
    fn rescaling(m in any::<i64>(), k in 0u32..6) {
        let m = BigInt::from(m);
        let up = truncate_scale(&m, 2, 2 + k);
        prop_assert_eq!(truncate_scale(&up, 2 + k, 2), m.clone());
        prop_assert_eq!(round_scale(&up, 2 + k, 2), m);
    }

    #[test]
    fn decomposition_recomposes(m in -1_000_000i64..1_000_000) {
        let d = decompose_mantissa(&BigInt::from(m)).unwrap();
        prop_assert!(d.frac_part < 100);
        prop_assert_eq!(d.recompose().mantissa, BigInt::from(m));
    }
}

#[test]
fn encode_examples() {
    assert_eq!(fx_encode(0.1234, 2).unwrap(), BigInt::from(12));
    assert_eq!(fx_encode(-0.1299, 2).unwrap(), BigInt::from(-12));
    assert_eq!(fx_encode(1.1051709180756477, 2).unwrap(), BigInt::from(110));
    assert_eq!(round_scale(&BigInt::from(-155), 2, 1), BigInt::from(-16));
    assert_eq!(truncate_scale(&BigInt::from(-159), 2, 1), BigInt::from(-15));
    assert!(fx_encode(f64::NAN, 2).is_err());
}

#[test]
fn digit_budget() {
    let ok = budget_check_lr(9, 50.0, 1024).unwrap();
    assert_eq!((ok.required_digits, ok.margin()), (116, 192));
    let err = budget_check_lr(14, 300.0, 1024).unwrap_err();
    assert_eq!(err.required_digits, 626);
    assert!(err.to_string().contains("margin -318"), "{err}");
    assert!(budget_check_lr(14, 300.0, 4096).is_ok());
}

#[test]
fn residue_range_is_enforced() {
    let n = BigUint::from(35u8);
    assert_eq!(to_residue(&BigInt::from(-3), &n).unwrap(), BigUint::from(32u8));
    assert!(to_residue(&BigInt::from(18), &n).is_err());
    assert_eq!(from_residue(&BigUint::from(18u8), &n), BigInt::from(-17));
}
