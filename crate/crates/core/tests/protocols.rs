mod common;

use common::{round_robin, session, synthetic};
use heda_core::net::audit_transcript;
use heda_core::oracle::{plain_lr_sgd, plain_svm_sgd, OracleMode};
use heda_core::protocols::{lr_train, setup_linear, svm_train, TrainConfig};

#[test]
fn svm_trace_matches_quantized_oracle() {
    let recs = synthetic(20, 11, true);
    let mut s = session(3, 512, 5);
    setup_linear(&mut s, &recs, &round_robin(20, 3)).unwrap();
    let cfg = TrainConfig::svm(50, 5, 512);
    let out = svm_train(&mut s, &cfg).unwrap();
    let oracle = plain_svm_sgd(&recs, &cfg, OracleMode::QUANTIZED).unwrap();
    assert_eq!(out.trace, oracle.mantissas.unwrap());
    assert!(s.transcript().interactions_per_iteration().iter().all(|&k| k <= 2));
    let report = audit_transcript(s.transcript());
    assert!(report.passed(), "{report}");
}

#[test]
fn lr_trace_matches_quantized_oracle() {
    let recs = synthetic(20, 12, false);
    let mut s = session(3, 512, 6);
    setup_linear(&mut s, &recs, &round_robin(20, 3)).unwrap();
    let mut cfg = TrainConfig::lr(50, 6, 512);
    // 512-bit keys hold 153 digits: (25 + 2) * 2 fits, the default bound does not.
    cfg.theta_l1_bound = 25.0;
    let out = lr_train(&mut s, &cfg).unwrap();
    let oracle = plain_lr_sgd(&recs, &cfg, OracleMode::QUANTIZED).unwrap();
    assert_eq!(out.trace, oracle.mantissas.unwrap());
    assert!(s.transcript().interactions_per_iteration().iter().all(|&k| k == 4));
    let report = audit_transcript(s.transcript());
    assert!(report.passed(), "{report}");
}
