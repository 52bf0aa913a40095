use heda_core::oracle::{paillier_decrypt_bruteforce, paillier_encrypt_direct, rsa_decrypt_bruteforce};
use heda_core::phe::{cloudrsa_keygen, paillier_keygen, CloudRsaKeyMaterial, KeyFile, PaillierPrivateKey};
use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::sync::OnceLock;

fn keys() -> &'static (PaillierPrivateKey, CloudRsaKeyMaterial) {
    static K: OnceLock<(PaillierPrivateKey, CloudRsaKeyMaterial)> = OnceLock::new();
    K.get_or_init(|| {
        let mut r = ChaCha20Rng::seed_from_u64(42);
        let (_, sk) = paillier_keygen(512, &mut r).unwrap();
        let rsa = cloudrsa_keygen(512, &mut r).unwrap();
        (sk, rsa)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paillier_is_additive(a in any::<u128>(), b in any::<u128>(), seed in any::<u64>()) {
        let (sk, _) = keys();
        let pk = sk.public();
        let mut r = ChaCha20Rng::seed_from_u64(seed);
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        let c = pk.add(&pk.encrypt(&a, &mut r).unwrap(), &pk.encrypt(&b, &mut r).unwrap()).unwrap();
        prop_assert_eq!(sk.decrypt(&c).unwrap(), (&a + &b) % pk.n());
        prop_assert_eq!(sk.decrypt_direct(&c).unwrap(), (&a + &b) % pk.n());
    }

    #[test]
    fn cloudrsa_is_multiplicative(a in 1u128.., b in 1u128..) {
        let (_, rsa) = keys();
        let share = rsa.share();
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        let c = share.mul(&share.encrypt(&a).unwrap(), &share.encrypt(&b).unwrap()).unwrap();
        prop_assert_eq!(rsa.decrypt(&c).unwrap(), (&a * &b) % &share.n);
    }

    #[test]
    fn owner_crt_encryption_equals_public_encryption(m in any::<u64>(), seed in any::<u64>()) {
        let (sk, rsa) = keys();
        let pk = sk.public();
        let r = ChaCha20Rng::seed_from_u64(seed).gen_biguint_below(pk.n());
        prop_assume!(r.gcd(pk.n()).is_one());
        let m = BigUint::from(m);
        prop_assert_eq!(sk.encrypt_with_nonce(&m, &r).unwrap(), pk.encrypt_with_nonce(&m, &r).unwrap());
        prop_assert_eq!(rsa.encrypt(&m).unwrap(), rsa.share().encrypt(&m).unwrap());
    }
}

#[test]
fn paillier_matches_direct_formula_on_tiny_keys() {
    // p, q below 20: every plaintext, a few nonces
    for (p, q) in [(5u32, 7u32), (3, 11), (11, 13), (17, 19)] {
        let sk = PaillierPrivateKey::from_primes(&BigUint::from(p), &BigUint::from(q)).unwrap();
        let n = sk.public().n().clone();
        for m in 0..(p * q) {
            for r in [2u32, 3, 4] {
                let r = BigUint::from(r);
                if !r.gcd(&n).is_one() {
                    continue;
                }
                let m = BigUint::from(m);
                let c = sk.public().encrypt_with_nonce(&m, &r).unwrap();
                assert_eq!(c.value, paillier_encrypt_direct(&n, &m, &r));
                assert_eq!(sk.decrypt(&c).unwrap(), m);
                assert_eq!(paillier_decrypt_bruteforce(&n, &c.value), Some(m));
            }
        }
    }
}

#[test]
fn cloudrsa_matches_bruteforce_on_tiny_keys() {
    let rsa = CloudRsaKeyMaterial::from_primes(&BigUint::from(5u32), &BigUint::from(7u32), BigUint::from(5u32)).unwrap();
    for m in 1..35u32 {
        let m = BigUint::from(m);
        if !m.gcd(&BigUint::from(35u32)).is_one() {
            continue;
        }
        let c = rsa.encrypt(&m).unwrap();
        assert_eq!(rsa.decrypt(&c).unwrap(), m);
        assert_eq!(rsa_decrypt_bruteforce(rsa.n(), rsa.enc_exp(), &c.value), Some(m));
    }
}

#[test]
fn keygen_sizes_and_2048_roundtrip() {
    let mut r = ChaCha20Rng::seed_from_u64(7);
    let (pk, sk) = paillier_keygen(2048, &mut r).unwrap();
    assert_eq!(pk.n().bits(), 2048);
    for _ in 0..100 {
        let m = r.gen_biguint_below(pk.n());
        assert_eq!(sk.decrypt(&pk.encrypt(&m, &mut r).unwrap()).unwrap(), m);
    }
    let rsa = cloudrsa_keygen(512, &mut r).unwrap();
    assert_eq!(rsa.n().bits(), 512);
    assert!(paillier_keygen(768, &mut r).is_err());
}

#[test]
fn key_files_roundtrip_and_detect_tampering() {
    let (sk, rsa) = keys();
    let json = serde_json::to_string(&sk.to_key_file()).unwrap();
    let back = PaillierPrivateKey::from_key_file(&serde_json::from_str::<KeyFile>(&json).unwrap()).unwrap();
    assert_eq!(back.public().n(), sk.public().n());
    let public = serde_json::to_string(&rsa.to_key_file(false)).unwrap();
    assert!(!public.contains("dec_exp"));
    let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
    v["key_id"] = serde_json::Value::String("paillier:0000000000000000".into());
    let f: KeyFile = serde_json::from_value(v).unwrap();
    assert!(f.verify().is_err());
}

#[test]
fn wrong_key_is_rejected() {
    let (sk, _) = keys();
    let mut r = ChaCha20Rng::seed_from_u64(1);
    let (other, _) = paillier_keygen(512, &mut r).unwrap();
    let c = other.encrypt(&BigUint::from(5u32), &mut r).unwrap();
    assert!(sk.decrypt(&c).is_err());
    assert!(sk.public().add(&c, &c).is_err());
}
