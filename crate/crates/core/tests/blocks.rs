mod common;

use common::session;
use heda_core::blocks::pow::blind_mantissa;
use heda_core::blocks::{
    convert_paillier_key, convert_rsa_to_paillier, exp_mantissa, pow_plan, secure_add, secure_ct_mul, secure_dot,
    secure_pow, secure_sign, secure_sub, ExpEncodedVector, ExponentSign, PrecisionProfile,
};
use heda_core::encoding::{encrypt_signed, min_key_digits, rsa_plaintext, Scaled};
use heda_core::net::{audit_transcript, PartyId};
use heda_core::oracle::{rsa_to_paillier_oracle, sign_oracle};
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const TRIALS: usize = 200;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn local_paillier_blocks_match_integer_oracle() {
    let s = session(2, 512, 1);
    let (sk, _) = s.owner_secret(1);
    let pk = sk.public().clone();
    let mut r = rng(2);
    for _ in 0..TRIALS {
        let a: i64 = r.gen_range(-1_000_000..1_000_000);
        let b: i64 = r.gen_range(-1_000_000..1_000_000);
        let ca = Scaled::new(encrypt_signed(&pk, &BigInt::from(a), &mut r).unwrap(), 2);
        let cb = Scaled::new(encrypt_signed(&pk, &BigInt::from(b), &mut r).unwrap(), 2);
        let sum = secure_add(&pk, &ca, &cb).unwrap();
        assert_eq!(sk.decrypt_signed(&sum.ct).unwrap(), BigInt::from(a + b));
        let diff = secure_sub(&pk, &ca, &cb).unwrap();
        assert_eq!(sk.decrypt_signed(&diff.ct).unwrap(), BigInt::from(a - b));
        assert_eq!(sum.scale, 2);

        let xs: Vec<i64> = (0..5).map(|_| r.gen_range(0..=100)).collect();
        let w: Vec<i64> = (0..5).map(|_| r.gen_range(-5000..5000)).collect();
        let cx: Vec<_> =
            xs.iter().map(|&x| Scaled::new(encrypt_signed(&pk, &BigInt::from(x), &mut r).unwrap(), 2)).collect();
        let wb: Vec<BigInt> = w.iter().map(|&v| BigInt::from(v)).collect();
        let dot = secure_dot(&pk, &cx, &wb, 2).unwrap();
        let expect: i64 = xs.iter().zip(&w).map(|(x, w)| x * w).sum();
        assert_eq!(sk.decrypt_signed(&dot.ct).unwrap(), BigInt::from(expect));
        assert_eq!(dot.scale, 4);
    }
    let c = Scaled::new(encrypt_signed(&pk, &BigInt::from(1), &mut r).unwrap(), 2);
    let d = Scaled::new(encrypt_signed(&pk, &BigInt::from(1), &mut r).unwrap(), 4);
    assert!(secure_add(&pk, &c, &d).is_err());
    assert!(secure_dot(&pk, &[], &[], 2).is_err());
}

#[test]
fn dot_product_worked_example() {
    let s = session(2, 512, 1);
    let (sk, _) = s.owner_secret(1);
    let pk = sk.public().clone();
    let mut r = rng(3);
    let xs: Vec<_> =
        [10, 20].iter().map(|&x| Scaled::new(encrypt_signed(&pk, &BigInt::from(x), &mut r).unwrap(), 2)).collect();
    let dot = secure_dot(&pk, &xs, &[BigInt::from(100), BigInt::from(100)], 2).unwrap();
    assert_eq!((sk.decrypt_signed(&dot.ct).unwrap(), dot.scale), (BigInt::from(3000), 4));
}

#[test]
fn cloudrsa_product_matches_oracle() {
    let s = session(2, 512, 4);
    let (_, rsa) = s.owner_secret(1);
    let share = rsa.share();
    let mut r = rng(5);
    for _ in 0..TRIALS {
        let a: u64 = r.gen_range(1..1_000_000);
        let b: u64 = r.gen_range(1..1_000_000);
        let ca = Scaled::new(share.encrypt(&BigUint::from(a)).unwrap(), 2);
        let cb = Scaled::new(share.encrypt(&BigUint::from(b)).unwrap(), 3);
        let p = secure_ct_mul(&share, &ca, &cb).unwrap();
        assert_eq!(rsa.decrypt(&p.ct).unwrap(), BigUint::from(a) * b);
        assert_eq!(p.scale, 5);
    }
}

fn random_theta(r: &mut ChaCha20Rng, d: usize, max: i64) -> Vec<BigInt> {
    (0..d).map(|_| BigInt::from(r.gen_range(-max..=max))).collect()
}

#[test]
fn power_function_and_conversion_match_oracle() {
    let mut s = session(2, 512, 6);
    let share = s.owner_rsa(1).clone();
    let budget = min_key_digits(512).unwrap();
    let profile = PrecisionProfile::default();
    let mut r = rng(7);
    for trial in 0..60 {
        let x: Vec<BigInt> = (0..3).map(|_| BigInt::from(r.gen_range(0..=100))).collect();
        let theta = random_theta(&mut r, 3, 300);
        let sign = if trial % 2 == 0 { ExponentSign::Negative } else { ExponentSign::Positive };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut bases = Vec::new();
        for xi in &x {
            let (p, n) = (exp_mantissa(xi, false).unwrap(), exp_mantissa(xi, true).unwrap());
            pos.push(Scaled::new(share.encrypt(&rsa_plaintext(&p, &share.n)).unwrap(), 2));
            neg.push(Scaled::new(share.encrypt(&rsa_plaintext(&n, &share.n)).unwrap(), 2));
            bases.push((p, n));
        }
        let plan = pow_plan(&theta, sign, budget, profile.blind_scale).unwrap();
        let pr = secure_pow(&share, &ExpEncodedVector { pos, neg }, &plan).unwrap();
        let (_, rsa) = s.owner_secret(1);
        let mut comps = Vec::new();
        for (chunk, c) in plan.iter().zip(&pr.components) {
            let mut v = BigUint::from(1u32);
            for f in &chunk.factors {
                let (p, n) = &bases[f.feature];
                v *= (if f.negative_base { n } else { p }).pow(f.exp as u32);
            }
            assert_eq!(rsa.decrypt(&c.ct.ct).unwrap(), v);
            assert_eq!(c.ct.scale, chunk.scale());
            comps.push((v, chunk.scale(), chunk.root));
        }
        let blind_r = r.gen_range(1..=8) * if r.gen_bool(0.5) { 1 } else { -1 };
        let conv = convert_rsa_to_paillier(&mut s, 1, &pr, blind_r, &profile).unwrap();
        let oracle = rsa_to_paillier_oracle(&comps, blind_r, &profile).unwrap();
        let (sk, _) = s.owner_secret(1);
        assert_eq!(sk.decrypt_signed(&conv.ct.ct).unwrap(), oracle.value);
        assert_eq!(conv.ct.scale, profile.owner_scale + profile.unblind_scale);
        assert_eq!(conv.blind_mantissa, blind_mantissa(blind_r, profile.blind_scale).unwrap());
    }
    assert!(audit_transcript(s.transcript()).passed());
}

#[test]
fn key_switch_and_chain_preserve_plaintext() {
    let mut s = session(3, 512, 8);
    let mut r = rng(9);
    let pk1 = s.owner_pk(1).clone();
    let vals: Vec<BigInt> = (0..TRIALS).map(|_| BigInt::from(r.gen_range(-1i64 << 40..1i64 << 40))).collect();
    let cts: Vec<_> = vals.iter().map(|v| Scaled::new(encrypt_signed(&pk1, v, &mut r).unwrap(), 2)).collect();
    let to2 = convert_paillier_key(&mut s, 1, PartyId::owner(2), &cts).unwrap();
    let (sk2, _) = s.owner_secret(2);
    for (c, v) in to2.iter().zip(&vals) {
        assert_eq!(&sk2.decrypt_signed(&c.ct).unwrap(), v);
    }
    let to3 = convert_paillier_key(&mut s, 2, PartyId::owner(3), &to2).unwrap();
    let mine = convert_paillier_key(&mut s, 3, PartyId::DEMANDER, &to3).unwrap();
    let sk = s.demander_secret();
    for (c, v) in mine.iter().zip(&vals) {
        assert_eq!(&sk.decrypt_signed(&c.ct).unwrap(), v);
    }
    assert_eq!(s.transcript().counters().interactions, 3);
    assert!(audit_transcript(s.transcript()).passed());
}

#[test]
fn sign_matches_oracle() {
    let mut s = session(2, 512, 10);
    let pk = s.owner_pk(2).clone();
    let mut r = rng(11);
    for i in 0..TRIALS {
        let v = if i == 0 { BigInt::from(0) } else { BigInt::from(r.gen_range(-1i64 << 50..1i64 << 50)) };
        let c = Scaled::new(encrypt_signed(&pk, &v, &mut r).unwrap(), 4);
        assert_eq!(secure_sign(&mut s, 2, &c).unwrap(), sign_oracle(&v), "{v}");
    }
    assert!(audit_transcript(s.transcript()).passed());
}

#[test]
fn secure_sum_matches_plaintext_sum() {
    for n in [2u32, 5, 10] {
        let mut s = session(n, 512, 20 + n as u64);
        let mut r = rng(n as u64);
        let mut expect = vec![BigInt::from(0); 20];
        for i in 1..=n {
            let v: Vec<BigInt> = (0..20).map(|_| BigInt::from(r.gen_range(-1i64 << 45..1i64 << 45))).collect();
            for (e, x) in expect.iter_mut().zip(&v) {
                *e += x;
            }
            s.owner_mut(i).set_sum_input("f", v);
        }
        let before = s.transcript().counters().interactions;
        assert_eq!(heda_core::blocks::secure_sum(&mut s, "f").unwrap(), expect);
        assert_eq!(s.transcript().counters().interactions - before, n as u64 + 1);
        assert!(audit_transcript(s.transcript()).passed());
    }
}
