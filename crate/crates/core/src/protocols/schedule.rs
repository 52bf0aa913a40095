use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::blocks::pow::MAX_BLIND_R;
use crate::seed;

/// Public randomness of a training run: which record each iteration uses
/// and the exponential blinding exponents. Shared verbatim with the
/// quantized oracle so both see the same sequence.
#[derive(Clone, Debug)]
pub struct Schedule {
    rng: ChaCha20Rng,
    n_records: u64,
}

impl Schedule {
    pub fn new(seed: u64, n_records: u64) -> Self {
        assert!(n_records > 0, "schedule over an empty record set");
        Schedule { rng: seed::stream(seed, "schedule"), n_records }
    }

    pub fn next_record(&mut self) -> u64 {
        self.rng.gen_range(0..self.n_records)
    }

    /// Uniform in [-8, 8] without 0.
    pub fn next_blind(&mut self) -> i32 {
        let v = self.rng.gen_range(0..2 * MAX_BLIND_R);
        if v < MAX_BLIND_R {
            v - MAX_BLIND_R
        } else {
            v - MAX_BLIND_R + 1
        }
    }

    pub fn svm_step(&mut self) -> u64 {
        self.next_record()
    }

    /// Record, conversion blinding and sigmoid blinding.
    pub fn lr_step(&mut self) -> (u64, i32, i32) {
        let t = self.next_record();
        let r1 = self.next_blind();
        let r2 = self.next_blind();
        (t, r1, r2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blinding_range_is_symmetric_without_zero() {
        let mut s = Schedule::new(5, 10);
        let mut seen = [0u32; 17];
        for _ in 0..17_000 {
            let r = s.next_blind();
            assert!(r != 0 && r.abs() <= 8);
            seen[(r + 8) as usize] += 1;
        }
        assert_eq!(seen[8], 0);
        assert!(seen.iter().enumerate().filter(|(i, _)| *i != 8).all(|(_, &c)| c > 800));
    }

    #[test]
    fn reproducible() {
        let a: Vec<_> = (0..20).map({ let mut s = Schedule::new(1, 50); move |_| s.lr_step() }).collect();
        let b: Vec<_> = (0..20).map({ let mut s = Schedule::new(1, 50); move |_| s.lr_step() }).collect();
        assert_eq!(a, b);
    }
}
