mod common;

use common::{round_robin, session, synthetic};
use heda_core::net::{audit_transcript, Envelope, PartyId, Payload, Taint, ViolationCode};
use heda_core::party::{PartyKeys, Session, SessionConfig};
use heda_core::protocols::{setup_linear, svm_train, TrainConfig};
use heda_core::Error;

fn svm_session(seed: u64, keys: Vec<PartyKeys>) -> Session {
    let recs = synthetic(12, 3, true);
    let mut s = Session::open_with_keys(SessionConfig::new(3, 512, seed), keys).unwrap();
    setup_linear(&mut s, &recs, &round_robin(12, 3)).unwrap();
    s
}

#[test]
fn skipped_sign_blinding_is_flagged() {
    let keys = PartyKeys::generate_all(512, 1, 3).unwrap();
    let mut s = svm_session(1, keys);
    s.faults.skip_sign_blinding = true;
    svm_train(&mut s, &TrainConfig::svm(5, 1, 512)).unwrap();
    let report = audit_transcript(s.transcript());
    assert!(!report.passed());
    assert_eq!(report.codes(), vec![ViolationCode::A], "{report}");
}

#[test]
fn reused_nonce_is_flagged() {
    let keys = PartyKeys::generate_all(512, 2, 3).unwrap();
    let mut s = svm_session(2, keys);
    s.faults.reuse_nonce = true;
    svm_train(&mut s, &TrainConfig::svm(5, 2, 512)).unwrap();
    let report = audit_transcript(s.transcript());
    assert_eq!(report.codes(), vec![ViolationCode::C], "{report}");
}

#[test]
fn offline_owner_aborts_the_session() {
    let keys = PartyKeys::generate_all(512, 3, 3).unwrap();
    let mut s = svm_session(3, keys);
    s.faults.offline_owner = Some(2);
    let err = svm_train(&mut s, &TrainConfig::svm(40, 3, 512)).unwrap_err();
    assert!(matches!(err, Error::OwnerUnavailable(2)), "{err}");
    assert!(s.transcript().aborted().is_some());
    assert!(matches!(svm_train(&mut s, &TrainConfig::svm(1, 3, 512)), Err(Error::Aborted(_))));
}

#[test]
fn identical_seeds_give_identical_transcripts() {
    let keys = PartyKeys::generate_all(512, 4, 3).unwrap();
    let run = |keys: Vec<PartyKeys>| {
        let mut s = svm_session(4, keys);
        svm_train(&mut s, &TrainConfig::svm(20, 4, 512)).unwrap();
        s.into_transcript()
    };
    let (a, b) = (run(keys.clone()), run(keys));
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(a.digest(), b.digest());
    assert_eq!(a.counters(), b.counters());
}

#[test]
fn byte_counter_equals_encoded_lengths() {
    let mut s = session(2, 512, 5);
    let recs = synthetic(100, 5, true);
    setup_linear(&mut s, &recs, &round_robin(100, 2)).unwrap();
    svm_train(&mut s, &TrainConfig::svm(30, 5, 512)).unwrap();
    let t = s.transcript();
    assert!(t.lines().len() >= 100);
    let total: u64 = t.lines().iter().map(|l| l.len() as u64).sum();
    assert_eq!(t.counters().bytes, total);
    assert_eq!(t.counters().messages, t.lines().len() as u64);
}

#[test]
fn envelopes_roundtrip_through_the_wire_format() {
    let mut s = session(2, 512, 6);
    let recs = synthetic(6, 6, true);
    setup_linear(&mut s, &recs, &round_robin(6, 2)).unwrap();
    svm_train(&mut s, &TrainConfig::svm(4, 6, 512)).unwrap();
    for line in s.transcript().lines() {
        let env = Envelope::from_wire(line.as_bytes()).unwrap();
        assert_eq!(&env.to_canonical(), line);
    }
    let first = Envelope::from_wire(s.transcript().lines()[0].as_bytes()).unwrap();
    assert_eq!(first.from, PartyId::owner(1));
    assert!(matches!(first.body, Payload::KeyShare { .. }));
    assert_eq!(first.taint, Taint::Public);
}

#[test]
fn latency_is_charged_per_round_trip() {
    let keys = PartyKeys::generate_all(512, 7, 2).unwrap();
    let mut cfg = SessionConfig::new(2, 512, 7);
    cfg.latency_ms = 30;
    let mut s = Session::open_with_keys(cfg, keys).unwrap();
    let recs = synthetic(6, 7, true);
    setup_linear(&mut s, &recs, &round_robin(6, 2)).unwrap();
    svm_train(&mut s, &TrainConfig::svm(10, 7, 512)).unwrap();
    let c = s.transcript().counters();
    assert_eq!(c.latency_ms, 30 * c.interactions);
}
