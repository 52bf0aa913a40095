use std::collections::BTreeSet;
use std::path::PathBuf;

use heda_core::data::{
    bcwd_schema, linear_records, load_csv, nb_records, partition, read_csv, split, DatasetSchema, LabelCoding,
    Normalizer,
};
use proptest::prelude::*;

fn bcwd_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/bcwd/breast-cancer-wisconsin.data")
}

#[test]
fn bcwd_loads_with_missing_rows_dropped() {
    let t = load_csv(&bcwd_path(), &bcwd_schema()).unwrap();
    assert_eq!((t.total, t.dropped, t.len()), (699, 16, 683));
    assert_eq!(t.rows.iter().filter(|r| r.positive).count(), 239);
    let file = DatasetSchema::from_json_file(&bcwd_path().with_file_name("schema.json")).unwrap();
    assert_eq!(file, bcwd_schema());
}

#[test]
fn bcwd_feature_views() {
    let t = load_csv(&bcwd_path(), &bcwd_schema()).unwrap();
    let norm = Normalizer::fit(&t).unwrap();
    assert!(norm.ranges.iter().all(|&r| r == (1.0, 10.0)));
    let recs = linear_records(&t, &norm, LabelCoding::Signed).unwrap();
    assert_eq!(recs[0].x_hat.len(), 10);
    assert!(recs.iter().all(|r| r.label == 1 || r.label == -1));
    let (schema, nb) = nb_records(&t, &norm).unwrap();
    assert_eq!(schema.features.len(), 9);
    assert_eq!(nb.len(), 683);
}

#[test]
fn schema_errors() {
    let mut s = bcwd_schema();
    s.label = "nope".into();
    assert!(s.validate().is_err());
    assert!(read_csv("".as_bytes(), &bcwd_schema()).is_err());
    let err = read_csv("1,2,3,4,5,6,7,8,9,x,2\n".as_bytes(), &bcwd_schema()).unwrap_err().to_string();
    assert!(err.contains("mitoses") && err.contains("line 1"), "{err}");
}

proptest! {
    #[test]
    fn partition_is_a_near_equal_disjoint_cover(m in 1usize..400, n in 1usize..12, seed in any::<u64>()) {
        prop_assume!(n <= m);
        let parts = partition(m, n, seed, None).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let all: BTreeSet<usize> = parts.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), m);
        prop_assert_eq!(all, (0..m).collect::<BTreeSet<_>>());
    }

    #[test]
    fn stratified_partition_is_a_cover(m in 2usize..200, n in 1usize..6, seed in any::<u64>()) {
        prop_assume!(n <= m);
        let labels: Vec<bool> = (0..m).map(|i| i % 3 == 0).collect();
        let parts = partition(m, n, seed, Some(&labels)).unwrap();
        let all: BTreeSet<usize> = parts.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), m);
    }

    #[test]
    fn split_is_a_disjoint_cover(m in 4usize..500, f in 0.05f64..0.95, seed in any::<u64>()) {
        let Ok((a, b)) = split(m, f, seed) else { return Ok(()) };
        let sa: BTreeSet<usize> = a.iter().copied().collect();
        let sb: BTreeSet<usize> = b.iter().copied().collect();
        prop_assert!(sa.is_disjoint(&sb));
        prop_assert_eq!(sa.len() + sb.len(), m);
        prop_assert_eq!(b.len(), (m as f64 * f).round() as usize);
    }

    #[test]
    fn normalized_values_lie_in_unit_interval(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 9), 1..40)) {
        let csv: String = rows
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{i},{},2\n", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        let t = read_csv(csv.as_bytes(), &bcwd_schema()).unwrap();
        let norm = Normalizer::fit(&t).unwrap();
        let x = norm.apply(&t);
        prop_assert!(x.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        // refitting on normalized data changes nothing
        let csv2: String = x
            .iter()
            .enumerate()
            .map(|(i, r)| format!("{i},{},2\n", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        let t2 = read_csv(csv2.as_bytes(), &bcwd_schema()).unwrap();
        let x2 = Normalizer::fit(&t2).unwrap().apply(&t2);
        for (a, b) in x.iter().flatten().zip(x2.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
