#![allow(dead_code)]

use heda_core::party::{OwnerRecord, PartyKeys, Session, SessionConfig};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Linearly separable-ish points in [0,1]^2 with a bias feature; label
/// from x0 + x1 > 1.
pub fn synthetic(m: usize, seed: u64, signed: bool) -> Vec<OwnerRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..m)
        .map(|i| {
            let x0: i64 = rng.gen_range(0..=100);
            let x1: i64 = rng.gen_range(0..=100);
            let pos = x0 + x1 > 100;
            let label = match (pos, signed) {
                (true, _) => 1,
                (false, true) => -1,
                (false, false) => 0,
            };
            OwnerRecord { id: i as u64, x_hat: vec![BigInt::from(x0), BigInt::from(x1), BigInt::from(100)], label }
        })
        .collect()
}

pub fn round_robin(m: usize, n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|o| (o..m).step_by(n).collect()).collect()
}

pub fn session(n: u32, bits: u64, seed: u64) -> Session {
    let keys = PartyKeys::generate_all(bits, seed, n).expect("keygen");
    Session::open_with_keys(SessionConfig::new(n, bits, seed), keys).expect("session")
}
