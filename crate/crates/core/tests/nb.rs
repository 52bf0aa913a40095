mod common;

use common::session;
use heda_core::net::audit_transcript;
use heda_core::oracle::plain_nb;
use heda_core::protocols::{nb_train, NbFeature, NbRecord, NbSchema, NbStats, NbValue};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn schema() -> NbSchema {
    NbSchema {
        features: vec![NbFeature::Numeric, NbFeature::Discrete { cardinality: 3 }, NbFeature::Numeric],
        n_classes: 2,
    }
}

fn records(m: usize, seed: u64) -> Vec<NbRecord> {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| {
            let class = r.gen_range(0..2);
            let a = r.gen_range(0..=60) + 40 * class as i64;
            let d = if class == 1 { r.gen_range(1..3) } else { r.gen_range(0..2) };
            NbRecord {
                values: vec![NbValue::Numeric(a), NbValue::Discrete(d), NbValue::Numeric(r.gen_range(0..=100))],
                class,
            }
        })
        .collect()
}

#[test]
fn secure_model_equals_pooled_model() {
    let all = records(90, 1);
    let parts: Vec<Vec<NbRecord>> = (0..3).map(|o| all.iter().skip(o).step_by(3).cloned().collect()).collect();
    let mut s = session(3, 512, 1);
    let secure = nb_train(&mut s, &schema(), &parts, false).unwrap();
    let pooled = plain_nb(&all, &schema(), false).unwrap();
    assert_eq!(secure.stats, pooled.stats);
    assert_eq!(secure, pooled);
    // four families, each a gather round plus n key switches
    assert_eq!(s.transcript().interactions_per_iteration(), vec![4; 4]);
    assert!(audit_transcript(s.transcript()).passed());
    for r in &all {
        assert_eq!(secure.predict(&r.values).unwrap(), pooled.predict(&r.values).unwrap());
    }
}

#[test]
fn identical_owners_match_single_party_statistics() {
    let one = records(30, 2);
    let mut s = session(4, 512, 2);
    let secure = nb_train(&mut s, &schema(), &vec![one.clone(); 4], false).unwrap();
    let mut local = NbStats::local(&one, &schema()).unwrap();
    let single = local.clone();
    for _ in 0..3 {
        local.add(&single);
    }
    assert_eq!(secure.stats, local);
    let plain = plain_nb(&one, &schema(), false).unwrap();
    assert_eq!(secure.priors, plain.priors);
    for (a, b) in secure.gaussian.iter().flatten().zip(plain.gaussian.iter().flatten()) {
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}

#[test]
fn dominant_prior_wins_with_uniform_conditionals() {
    let schema = NbSchema { features: vec![NbFeature::Discrete { cardinality: 2 }], n_classes: 2 };
    let mut recs = Vec::new();
    for c in [0usize, 0, 0, 0, 1, 1] {
        for v in 0..2 {
            recs.push(NbRecord { values: vec![NbValue::Discrete(v)], class: c });
        }
    }
    let m = plain_nb(&recs, &schema, false).unwrap();
    assert_eq!(m.predict(&[NbValue::Discrete(0)]).unwrap(), 0);
    assert_eq!(m.predict(&[NbValue::Discrete(1)]).unwrap(), 0);
}

#[test]
fn zero_variance_is_floored() {
    let schema = NbSchema { features: vec![NbFeature::Numeric], n_classes: 1 };
    let recs = vec![NbRecord { values: vec![NbValue::Numeric(50)], class: 0 }; 4];
    let m = plain_nb(&recs, &schema, false).unwrap();
    assert_eq!(m.gaussian[0][0], (0.5, 1e-9));
}

#[test]
fn laplace_smoothing_is_optional() {
    let schema = NbSchema { features: vec![NbFeature::Discrete { cardinality: 3 }], n_classes: 1 };
    let recs = vec![NbRecord { values: vec![NbValue::Discrete(0)], class: 0 }; 2];
    assert_eq!(plain_nb(&recs, &schema, false).unwrap().discrete_cond[0][0], vec![1.0, 0.0, 0.0]);
    assert_eq!(plain_nb(&recs, &schema, true).unwrap().discrete_cond[0][0], vec![0.6, 0.2, 0.2]);
}

#[test]
fn malformed_records_are_rejected() {
    let bad = vec![NbRecord { values: vec![NbValue::Discrete(7)], class: 0 }];
    let schema = NbSchema { features: vec![NbFeature::Discrete { cardinality: 3 }], n_classes: 1 };
    assert!(NbStats::local(&bad, &schema).is_err());
    assert!(plain_nb(&[], &schema, false).is_err());
}
