use super::examples;
use super::*;

#[test]
fn round_trip_keeps_the_hash() {
    let sc = examples::notch(0.5);
    let back = Scenario::from_json(&sc.to_json()).unwrap();
    assert_eq!(back, sc);
    assert_eq!(back.hash(), sc.hash());
    assert_eq!(sc.hash().len(), 64);
}

#[test]
fn unknown_fields_are_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(&examples::square(0.5).to_json()).unwrap();
    v["plan"]["colour"] = serde_json::json!("blue");
    let err = Scenario::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn positive_curvature_is_rejected() {
    let mut sc = examples::square(0.5);
    sc.complex.kappa = 1.0;
    assert!(matches!(sc.validate(), Err(CatkError::InvalidCurvature(_))));
}

#[test]
fn dangling_ids_are_named() {
    let mut sc = examples::square(0.5);
    sc.plan.geodesics.push(GeodesicPlan {
        from: PointDoc::vertex(1),
        to: PointDoc::vertex(99),
        metric: Metric::Region,
        rounds: None,
    });
    let err = sc.validate().unwrap_err().to_string();
    assert!(err.contains("99"), "{err}");
    let mut sc = examples::square(0.5);
    sc.region = RegionSpec::ParentSkeleton { edges: vec![1, 42] };
    assert!(sc.validate().unwrap_err().to_string().contains("42"));
}

#[test]
fn wrong_version_is_rejected() {
    let mut sc = examples::square(0.5);
    sc.format_version = 2;
    assert!(sc.validate().is_err());
}

#[test]
fn cone_is_a_negative_control() {
    let r = run(&examples::cone(0.5)).unwrap();
    assert_eq!(r.body.status, Status::Violations);
    assert_eq!(r.exit_code(), 0);
    let mut sc = examples::cone(0.5);
    sc.expect = Expect::Pass;
    assert_eq!(run(&sc).unwrap().exit_code(), 2);
}

#[test]
fn coarse_tripod_curve() {
    let r = run(&examples::tripod(4.0, 5.0, 0.5)).unwrap();
    let curve = r.body.curve.as_ref().unwrap();
    assert_eq!(curve.closure_homology.betti1, 2);
    assert!(curve.closure_homology.torsion.is_empty());
    assert_eq!(r.body.classify[0].state, crate::homology::CellState::Out);
    assert!(!curve.mixed_vertices.is_empty());
    assert_eq!(r.body.status, Status::Pass, "{:?}", r.body.failures);
}

mod props {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hash_survives_a_round_trip(h in 0.05..2.0f64, seed in any::<u64>(), which in 0usize..examples::NAMES.len()) {
            let mut sc = examples::by_name(examples::NAMES[which]).unwrap();
            sc.h = h;
            sc.plan.seed = seed;
            let back = Scenario::from_json(&sc.to_json()).unwrap();
            prop_assert_eq!(back.hash(), sc.hash());
            let mut other = sc.clone();
            other.plan.seed = seed.wrapping_add(1);
            prop_assert_ne!(other.hash(), sc.hash());
        }
    }
}
