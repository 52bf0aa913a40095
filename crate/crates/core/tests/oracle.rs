mod common;

use common::synthetic;
use heda_core::encoding::fx_decode;
use heda_core::oracle::{
    logistic_loss, lr_exact_step, lr_quantized_step, plain_lr_sgd, plain_svm_sgd, svm_exact_step, svm_quantized_step,
    OracleMode,
};
use heda_core::party::OwnerRecord;
use heda_core::protocols::{Schedule, TrainConfig};
use heda_core::encoding::round_scale;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn decode(v: &[BigInt], s: u32) -> Vec<f64> {
    v.iter().map(|m| fx_decode(m, s)).collect()
}

/// Largest gap between one exact step and one quantized step taken from the
/// same quantized θ, over a whole quantized run.
fn max_step_gap_lr(recs: &[OwnerRecord], cfg: &TrainConfig) -> f64 {
    let tr = plain_lr_sgd(recs, cfg, OracleMode::QUANTIZED).unwrap().mantissas.unwrap();
    let mut sched = Schedule::new(cfg.seed, recs.len() as u64);
    let mut prev = vec![BigInt::from(0); recs[0].x_hat.len()];
    let mut worst = 0.0f64;
    for next in &tr {
        let (t, r1, r2) = sched.lr_step();
        let r = &recs[t as usize];
        let exact = lr_exact_step(&decode(&prev, 2), &decode(&r.x_hat, 2), r.label as f64, 0.1);
        let step = lr_quantized_step(&prev, r, r1, r2, cfg).unwrap();
        assert_eq!(&step.theta_wide.iter().map(|v| round_scale(v, 12, 2)).collect::<Vec<_>>(), next);
        for (a, b) in exact.iter().zip(decode(next, 2)) {
            worst = worst.max((a - b).abs());
        }
        prev = next.clone();
    }
    worst
}

#[test]
fn lr_exact_and_quantized_steps_stay_close() {
    let mut worst = 0.0f64;
    for seed in 0..4 {
        let recs = synthetic(60, 100 + seed, false);
        let mut cfg = TrainConfig::lr(300, seed, 1024);
        cfg.theta_l1_bound = 100.0;
        worst = worst.max(max_step_gap_lr(&recs, &cfg));
    }
    assert!(worst <= 0.01, "{worst}");
}

#[test]
fn svm_exact_and_quantized_steps_stay_close() {
    let recs = synthetic(60, 7, true);
    let cfg = TrainConfig::svm(300, 7, 1024);
    let tr = plain_svm_sgd(&recs, &cfg, OracleMode::QUANTIZED).unwrap().mantissas.unwrap();
    let la = cfg.lambda_alpha();
    let mut sched = Schedule::new(cfg.seed, recs.len() as u64);
    let mut prev = vec![BigInt::from(0); 3];
    let mut worst = 0.0f64;
    for next in &tr {
        let r = &recs[sched.svm_step() as usize];
        let exact = svm_exact_step(&decode(&prev, 2), &decode(&r.x_hat, 2), r.label as f64, 0.01, 1.0);
        let q = svm_quantized_step(&prev, &r.x_hat, r.label, &la);
        assert_eq!(&q.iter().map(|v| round_scale(v, 6, 2)).collect::<Vec<_>>(), next);
        for (a, b) in exact.iter().zip(decode(next, 2)) {
            worst = worst.max((a - b).abs());
        }
        prev = next.clone();
    }
    assert!(worst <= 0.005 + 1e-12, "{worst}");
}

#[test]
fn exact_lr_loss_decreases_on_separable_data() {
    // Positives live on the first axis and negatives on the second, so every
    // step lowers its own class's loss without touching the other's.
    let mut r = ChaCha20Rng::seed_from_u64(3);
    let recs: Vec<OwnerRecord> = (0..40)
        .map(|i| {
            let v = BigInt::from(r.gen_range(50..=100));
            let (x, label) = if i % 2 == 0 { (vec![v, BigInt::from(0)], 1) } else { (vec![BigInt::from(0), v], 0) };
            OwnerRecord { id: i, x_hat: x, label }
        })
        .collect();
    let cfg = TrainConfig::lr(100, 3, 1024);
    let tr = plain_lr_sgd(&recs, &cfg, OracleMode::EXACT).unwrap();
    let mut last = logistic_loss(&[0.0, 0.0], &recs);
    for theta in &tr.theta {
        let l = logistic_loss(theta, &recs);
        assert!(l < last, "{l} >= {last}");
        last = l;
    }
}

#[test]
fn exact_and_quantized_final_models_agree_roughly() {
    let recs = synthetic(60, 9, true);
    let cfg = TrainConfig::svm(200, 9, 1024);
    let e = plain_svm_sgd(&recs, &cfg, OracleMode::EXACT).unwrap();
    let q = plain_svm_sgd(&recs, &cfg, OracleMode::QUANTIZED).unwrap();
    for (a, b) in e.last().unwrap().iter().zip(q.last().unwrap()) {
        assert!((a - b).abs() < 0.1, "{a} vs {b}");
    }
}

#[test]
fn label_domains_are_checked() {
    let recs = synthetic(10, 1, true);
    assert!(plain_lr_sgd(&recs, &TrainConfig::lr(5, 1, 1024), OracleMode::QUANTIZED).is_err());
    let recs = synthetic(10, 1, false);
    assert!(plain_svm_sgd(&recs, &TrainConfig::svm(5, 1, 1024), OracleMode::QUANTIZED).is_err());
}
