//! `heda bench-blocks`: per-block cost on 5-dimensional vectors.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use heda_core::blocks::{
    convert_paillier_key, convert_rsa_to_paillier, fetch_exp_vectors, pow_plan, secure_add, secure_ct_mul,
    secure_dot, secure_pow, secure_sign, secure_sub, secure_sum, ExponentSign, PowResult, PrecisionProfile,
};
use heda_core::encoding::{encrypt_signed, min_key_digits, Scaled};
use heda_core::net::PartyId;
use heda_core::party::{OwnerRecord, PartyKeys, Session, SessionConfig};
use heda_core::protocols::setup_linear;
use heda_core::seed;
use num_bigint::{BigInt, BigUint};
use rand::Rng;

use crate::CliError;

pub const DIM: usize = 5;
pub const BLOCKS: [&str; 10] = ["add", "sub", "pcmul", "dot", "ccmul", "pow", "conv7", "conv8", "sign", "sum"];

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub block: &'static str,
    pub owner_ms: f64,
    pub demander_ms: f64,
    pub total_ms: f64,
    pub interactions: f64,
    pub bytes: f64,
}

#[derive(Default)]
struct Acc {
    owner: Duration,
    total: Duration,
    interactions: u64,
    bytes: u64,
}

/// Measures one call: wall time split into owner handlers and the rest,
/// plus the transcript counters it added.
fn measure<T>(s: &mut Session, acc: &mut Acc, f: impl FnOnce(&mut Session) -> heda_core::Result<T>) -> Result<T, CliError> {
    let (c0, w0, t0) = (s.transcript().counters(), s.wall_clock().owners, Instant::now());
    let out = f(s)?;
    acc.total += t0.elapsed();
    acc.owner += s.wall_clock().owners.saturating_sub(w0);
    let c1 = s.transcript().counters();
    acc.interactions += c1.interactions - c0.interactions;
    acc.bytes += c1.bytes - c0.bytes;
    Ok(out)
}

pub fn cmd_bench_blocks(key_bits: u64, trials: u32, seed_value: u64, out: Option<&Path>) -> Result<Vec<BenchRow>, CliError> {
    if trials == 0 {
        return Err(CliError::Invalid("--trials must be at least 1".into()));
    }
    let budget = min_key_digits(key_bits)
        .ok_or_else(|| CliError::Invalid(format!("unsupported --key-bits {key_bits}")))?;
    let keys = PartyKeys::generate_all(key_bits, seed_value, 2)?;
    let mut s = Session::open_with_keys(SessionConfig::new(2, key_bits, seed_value), keys)?;
    let mut rng = seed::stream(seed_value, "bench");
    let x_hat: Vec<BigInt> = (0..DIM).map(|i| BigInt::from(if i + 1 == DIM { 100 } else { rng.gen_range(0..=100) })).collect();
    setup_linear(&mut s, &[OwnerRecord { id: 0, x_hat: x_hat.clone(), label: 1 }], &[vec![0], vec![]])?;
    let pk = s.owner_pk(1).clone();
    let share = s.owner_rsa(1).clone();
    let profile = PrecisionProfile::default();
    let mut accs: Vec<Acc> = BLOCKS.iter().map(|_| Acc::default()).collect();

    for _ in 0..trials {
        let enc = |rng: &mut rand_chacha::ChaCha20Rng| -> heda_core::Result<Vec<_>> {
            (0..DIM).map(|_| Ok(Scaled::new(encrypt_signed(&pk, &BigInt::from(rng.gen_range(-10_000..10_000)), rng)?, 2))).collect()
        };
        let a = enc(&mut rng)?;
        let b = enc(&mut rng)?;
        let w: Vec<BigInt> = (0..DIM).map(|_| BigInt::from(rng.gen_range(-500..500))).collect();
        let ra: Vec<_> = (0..DIM)
            .map(|_| share.encrypt(&BigUint::from(rng.gen_range(1u32..10_000))).map(|c| Scaled::new(c, 2)))
            .collect::<heda_core::Result<_>>()?;
        let theta: Vec<BigInt> = (0..DIM).map(|_| BigInt::from(rng.gen_range(-150..150))).collect();
        let blind_r = rng.gen_range(1..=8) * if rng.gen_bool(0.5) { 1 } else { -1 };

        measure(&mut s, &mut accs[0], |_| a.iter().zip(&b).map(|(x, y)| secure_add(&pk, x, y)).collect::<heda_core::Result<Vec<_>>>())?;
        measure(&mut s, &mut accs[1], |_| a.iter().zip(&b).map(|(x, y)| secure_sub(&pk, x, y)).collect::<heda_core::Result<Vec<_>>>())?;
        measure(&mut s, &mut accs[2], |_| {
            a.iter().zip(&w).map(|(x, k)| pk.scalar_pow(&x.ct, k).map(|c| Scaled::new(c, x.scale + 2))).collect::<heda_core::Result<Vec<_>>>()
        })?;
        measure(&mut s, &mut accs[3], |_| secure_dot(&pk, &a, &w, 2))?;
        measure(&mut s, &mut accs[4], |_| ra.iter().zip(&ra).map(|(x, y)| secure_ct_mul(&share, x, y)).collect::<heda_core::Result<Vec<_>>>())?;
        let pr: PowResult = measure(&mut s, &mut accs[5], |s| {
            let exp = fetch_exp_vectors(s, 0)?;
            let plan = pow_plan(&theta, ExponentSign::Negative, budget, profile.blind_scale)?;
            secure_pow(&share, &exp, &plan)
        })?;
        let conv = measure(&mut s, &mut accs[6], |s| convert_rsa_to_paillier(s, 1, &pr, blind_r, &profile))?;
        measure(&mut s, &mut accs[7], |s| convert_paillier_key(s, 1, PartyId::DEMANDER, &[conv.ct.clone()]))?;
        measure(&mut s, &mut accs[8], |s| secure_sign(s, 1, &a[0]))?;
        for o in 1..=2 {
            let v: Vec<BigInt> = (0..DIM).map(|_| BigInt::from(rng.gen_range(0..1_000_000))).collect();
            s.owner_mut(o).set_sum_input("bench", v);
        }
        measure(&mut s, &mut accs[9], |s| secure_sum(s, "bench"))?;
    }

    let t = trials as f64;
    let ms = |d: Duration| d.as_secs_f64() * 1e3 / t;
    let rows: Vec<BenchRow> = BLOCKS
        .iter()
        .zip(&accs)
        .map(|(&block, a)| BenchRow {
            block,
            owner_ms: ms(a.owner),
            demander_ms: ms(a.total.saturating_sub(a.owner)),
            total_ms: ms(a.total),
            interactions: a.interactions as f64 / t,
            bytes: a.bytes as f64 / t,
        })
        .collect();
    if let Some(path) = out {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(to_csv(&rows).as_bytes())?;
        f.flush()?;
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("block,owner_ms,demander_ms,total_ms,interactions,bytes\n");
    for r in rows {
        s += &format!("{},{:.3},{:.3},{:.3},{},{}\n", r.block, r.owner_ms, r.demander_ms, r.total_ms, r.interactions, r.bytes);
    }
    s
}
