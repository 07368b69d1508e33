use blockforge::detect::{classify, decompose, partition_columns, DetectorParams, Thresholds};
use blockforge::graph::CcmImage;
use blockforge::metrics::jsd;
use blockforge::milp::{parse_mps, write_mps, MilpInstance, Sense, VarKind};
use proptest::prelude::*;

mod common;
use common::{dense_classify, dense_cuts, to_coo};

fn sense() -> impl Strategy<Value = Sense> {
    prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)]
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![(-1000i32..1000).prop_map(f64::from), -1e6f64..1e6, Just(0.1), Just(1.0 / 3.0)]
}

fn nonzero() -> impl Strategy<Value = f64> {
    finite().prop_filter("nonzero", |v| *v != 0.0)
}

#[derive(Clone, Debug)]
struct ColSpec {
    kind: VarKind,
    obj: f64,
    lo: f64,
    hi: f64,
}

fn col() -> impl Strategy<Value = ColSpec> {
    let bound = prop_oneof![(-50i32..50).prop_map(f64::from), Just(f64::INFINITY)];
    (0usize..4, finite(), bound.clone(), bound).prop_map(|(k, obj, a, b)| {
        let kind = VarKind::ALL[k];
        let (lo, hi) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => {
                let lo = if a.is_finite() { a } else { f64::NEG_INFINITY };
                let hi = if b.is_finite() { b.max(lo) } else { b };
                (lo, hi)
            }
        };
        ColSpec { kind, obj, lo, hi }
    })
}

fn instance() -> impl Strategy<Value = MilpInstance<f64>> {
    (1usize..8, 1usize..10).prop_flat_map(|(m, n)| {
        (
            proptest::collection::vec(col(), n),
            proptest::collection::vec((sense(), finite()), m),
            proptest::collection::btree_map((0..m, 0..n), nonzero(), 0..m * n + 1),
        )
            .prop_map(|(cols, rows, entries)| {
                let mut inst = MilpInstance::new("prop");
                for (j, c) in cols.iter().enumerate() {
                    inst.add_col(format!("x{j}"), c.obj, c.kind, c.lo, c.hi);
                }
                for (i, (s, b)) in rows.iter().enumerate() {
                    let coefs: Vec<_> = entries.iter().filter(|((r, _), _)| *r == i).map(|(&(_, j), &v)| (j, v)).collect();
                    inst.add_row(format!("c{i}"), *s, *b, &coefs);
                }
                inst
            })
    })
}

fn pattern() -> impl Strategy<Value = (usize, usize, Vec<Vec<bool>>)> {
    (1usize..14, 1usize..14, 0.05f64..0.7).prop_flat_map(|(m, n, p)| {
        let cell = proptest::bool::weighted(p);
        proptest::collection::vec(proptest::collection::vec(cell, n), m).prop_map(move |d| (m, n, d))
    })
}

fn thresholds() -> impl Strategy<Value = Thresholds> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_map(|(phi1, phi2, phi3, phi4, phi5)| Thresholds { phi1, phi2, phi3, phi4, phi5 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn classification_matches_dense_scan((m, n, d) in pattern(), t in thresholds(), db in any::<bool>()) {
        let a = to_coo(m, n, &d);
        let got = classify(&a, &t, db).unwrap();
        prop_assert_eq!(got, dense_classify(m, n, &d, &t, db));
    }

    #[test]
    fn column_cuts_match_dense_scan((m, n, d) in pattern(), zeta in 1usize..5) {
        let pts = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| d[i][j]);
        let img = CcmImage::from_points(m, n, pts);
        let cuts = partition_columns(&img, zeta).unwrap();
        prop_assert_eq!(cuts.iter().map(|r| r.len()).sum::<usize>(), n);
        prop_assert_eq!(cuts, dense_cuts(&d, zeta));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mps_round_trip(inst in instance()) {
        let text = write_mps(&inst).unwrap();
        let back: MilpInstance<f64> = parse_mps(&text).unwrap();
        prop_assert!(back.structurally_eq(&inst), "{}", String::from_utf8_lossy(&text));
        prop_assert_eq!(write_mps(&back).unwrap(), text);
    }

    #[test]
    fn mps_round_trip_single_precision(inst in instance()) {
        let narrow: MilpInstance<f32> = parse_mps(&write_mps(&inst).unwrap()).unwrap();
        let text = write_mps(&narrow).unwrap();
        let back: MilpInstance<f32> = parse_mps(&text).unwrap();
        prop_assert!(back.structurally_eq(&narrow));
    }

    #[test]
    fn decomposition_is_a_valid_partition(inst in instance(), zeta in 1usize..5, db in any::<bool>()) {
        let params = DetectorParams { zeta, detect_db: db, ..Default::default() };
        if let Ok(p) = decompose(&inst, &params) {
            prop_assert!(p.check(&inst).is_ok());
            prop_assert!(p.units.len() >= 2);
            let mut cols: Vec<usize> = p.units.iter().flat_map(|u| u.cols.clone()).chain(p.border_cols.clone()).collect();
            cols.sort_unstable();
            prop_assert_eq!(cols, (0..inst.num_cols()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn jsd_is_symmetric_and_bounded(
        p in proptest::collection::vec(-10.0f64..10.0, 1..40),
        q in proptest::collection::vec(-10.0f64..10.0, 1..40),
        bins in 1usize..120,
    ) {
        let a = jsd(&p, &q, bins).unwrap();
        let b = jsd(&q, &p, bins).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=std::f64::consts::LN_2).contains(&a));
        prop_assert!(jsd(&p, &p, bins).unwrap().abs() <= 1e-12);
    }
}
