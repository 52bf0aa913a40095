//! Probable-prime generation.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;

use crate::{Error, Result};

pub const MR_ROUNDS: usize = 40;
pub const MAX_CANDIDATES: u32 = 10_000;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Miller-Rabin with `rounds` random bases. Deterministic given the RNG.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u8);
    if *n < two {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let upper = n - &one; // bases drawn from [2, n-2]
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &upper);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
            if x == one {
                return false;
            }
        }
        return false;
    }
    true
}

/// Random prime of exactly `bits` bits with the top two bits set, so that
/// the product of two such primes has exactly `2*bits` bits.
pub fn generate_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint> {
    assert!(bits >= 8, "prime size too small");
    for _ in 0..MAX_CANDIDATES {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if SMALL_PRIMES[1..].iter().any(|&p| (&c % p).to_u32() == Some(0) && c != BigUint::from(p)) {
            continue;
        }
        if is_probable_prime(&c, MR_ROUNDS, rng) {
            return Ok(c);
        }
    }
    Err(Error::PrimeGeneration(MAX_CANDIDATES))
}

/// Two distinct primes of `bits/2` bits each with gcd(pq, (p-1)(q-1)) = 1.
pub(crate) fn generate_modulus_primes<R: RngCore + ?Sized>(
    modulus_bits: u64,
    rng: &mut R,
) -> Result<(BigUint, BigUint)> {
    let half = modulus_bits / 2;
    let p = generate_prime(half, rng)?;
    for _ in 0..MAX_CANDIDATES {
        let q = generate_prime(half, rng)?;
        if q == p {
            continue;
        }
        let n = &p * &q;
        let phi = (&p - 1u32) * (&q - 1u32);
        if n.gcd(&phi).is_one() {
            return Ok((p, q));
        }
    }
    Err(Error::PrimeGeneration(MAX_CANDIDATES))
}
