//! One test per acceptance criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use catk::builders::{self, face_point};
use catk::complex::{Complex, ComplexPoint, FaceId, SubdividedComplex};
use catk::geodesic::PathMetric;
use catk::homology::{curve_interior, CycleCurve};
use catk::model::{Kappa, ModelPoint};
use catk::scenario::{examples, run, Expect, HomologyPlan, Scenario, Status};
use catk::verify::{cat_sweep, SweepOptions, Tolerances, TriangleTestOptions};
use serde_json::Value;

fn catk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_catk")).args(args).output().expect("catk runs")
}

fn emit(dir: &Path, name: &str) -> String {
    let file = dir.join(format!("{name}.json"));
    let out = catk(&["example", name, "--emit", file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    file.to_str().unwrap().to_owned()
}

fn is_spine(p: &Value) -> bool {
    p.get("edge").and_then(Value::as_u64) == Some(1)
}

#[test]
fn c1_tripod_example_reproduces_the_punctured_torus() {
    let dir = tempfile::tempdir().unwrap();
    let file = emit(dir.path(), "tripod");
    let start = Instant::now();
    let out = catk(&["run", &file]);
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let body = &report["body"];
    assert_eq!(body["h"], 0.25);
    let curve = &body["curve"];

    // (a) simple and classified
    assert_eq!(curve["simple"], true);
    assert!(curve["vertices"]["inside"].as_u64().unwrap() > 0);
    assert!(curve["vertices"]["outside"].as_u64().unwrap() > 0);

    // (b) closure of the interior has two independent loops and no torsion
    let h = &curve["closure_homology"];
    assert_eq!(h["betti0"], 1);
    assert_eq!(h["betti1"], 2);
    assert_eq!(h["torsion"], Value::Array(vec![]));

    // (c) the spine origin is a vertex outside the interior
    let origin = &body["classify"][0];
    assert_eq!(origin["point"]["edge"], 1);
    assert_eq!(origin["point"]["t"], 5.0);
    assert_eq!(origin["cell"], "vertex");
    assert_eq!(origin["state"], "out");

    // (d) an interior spine vertex touching an outside face cell
    let mixed = curve["mixed_vertices"].as_array().unwrap();
    assert!(mixed.iter().any(is_spine), "{mixed:?}");

    // (e) accumulation at every curve vertex
    assert_eq!(curve["theorem"]["accumulation_ok"], true);
}

#[test]
fn c2_geodesics_converge_and_match_the_model() {
    let report = run(&examples::tripod_geodesic(0.25)).unwrap();
    let g = &report.body.geodesics[0];
    assert_eq!(g.rounds.len(), 4);
    assert!((g.rounds.last().unwrap().length - 2.0).abs() <= 1e-3);
    assert!(g.rounds.windows(2).all(|w| w[1].length <= w[0].length));
    assert!(g.monotone);

    let s = SubdividedComplex::new(&Complex::build(builders::square(3.0)).unwrap(), 0.3, &[]).unwrap();
    let m = PathMetric::new(&s, None);
    let d = m.distance(&face_point(0, 0.2, 0.4), &face_point(0, 2.7, 1.9), 1e-6).unwrap();
    assert!((d - 2.5f64.hypot(1.5)).abs() <= 1e-6);

    let doc = builders::hyperbolic_polygon(-1.0, 6, 2.0).unwrap();
    let s = SubdividedComplex::new(&Complex::build(doc).unwrap(), 0.3, &[]).unwrap();
    let k = s.parent().kappa();
    let m = PathMetric::new(&s, None);
    let (r1, t1, r2, t2) = (0.9, 0.2, 1.1, 2.6);
    let at = |r, t| ComplexPoint::Face { face: FaceId(0), at: ModelPoint::polar(k, r, t) };
    let d = m.distance(&at(r1, t1), &at(r2, t2), 1e-6).unwrap();
    // hyperbolic law of cosines
    let oracle = (r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * (t2 - t1).cos()).acosh();
    assert!((d - oracle).abs() <= 1e-6, "{d} vs {oracle}");
}

fn assert_sweep_clean(name: &str, r: &catk::verify::MarginReport, tol: &Tolerances) {
    assert!(!r.incomplete, "{name}");
    assert!(r.violations.is_empty(), "{name}: {} violations, min margin {:?}", r.violations.len(), r.min_margin);
    let m = r.min_margin.expect("sweep recorded checks");
    assert!(m >= -tol.tol_cat, "{name}: {m}");
}

#[test]
fn c3_comparison_sweeps_pass() {
    // (a) convex square
    let report = run(&examples::square(0.25)).unwrap();
    let sweep = report.body.cat_sweep.as_ref().expect("square sweeps");
    assert_eq!(report.body.status, Status::Pass);
    assert_sweep_clean("square", sweep, &report.body.tolerances);

    // (c) generated disks
    for seed in 1..=3 {
        let report = run(&examples::tripod_generated(seed, 400, 0.25)).unwrap();
        let sweep = report.body.cat_sweep.as_ref().expect("generated sweeps");
        assert_eq!(sweep.seed, Some(seed));
        assert_sweep_clean(&format!("generated {seed}"), sweep, &report.body.tolerances);
    }

    // (b) the curve together with its interior, swept directly; this region has two
    // independent loops, so its length metric cannot be expected to pass
    let sc = examples::tripod(4.0, 5.0, 0.25);
    let c = sc.validate().unwrap();
    let s = sc.subdivide(&c).unwrap();
    let gamma = CycleCurve::from_trace(&s, &s.seams()[0]).unwrap();
    let e = curve_interior(&s, &gamma).unwrap().closure_region(&s);
    let tol = Tolerances::for_diameter(c.diameter_estimate());
    let opts = SweepOptions {
        triangles: 50,
        seed: 0,
        test: TriangleTestOptions { pairs: 3, angle_scale: None, angle_depth: 4, seed: 0 },
        budget: None,
    };
    let r = cat_sweep(&PathMetric::new(&s, Some(&e)), &e, Kappa::FLAT, &opts, &tol).unwrap();
    assert_sweep_clean("curve closure", &r, &tol);
}

#[test]
fn c4_annulus_is_caught() {
    let sc = examples::annulus(0.25);
    assert_eq!(sc.plan.seed, 7);
    let report = run(&sc).unwrap();
    assert!(!report.body.cat_sweep.as_ref().unwrap().violations.is_empty());
    assert!(!report.body.convexity.as_ref().unwrap().violations.is_empty());
    assert_eq!(report.body.status, Status::Violations);
    assert_eq!(report.exit_code(), 0);

    let dir = tempfile::tempdir().unwrap();
    let file = emit(dir.path(), "annulus");
    assert_eq!(catk(&["run", &file]).status.code(), Some(0));

    // a negative control claimed to pass is a mismatch
    let mut cone = examples::cone(0.25);
    cone.expect = Expect::Pass;
    let path = dir.path().join("cone.json");
    std::fs::write(&path, cone.to_json()).unwrap();
    assert_eq!(catk(&["run", path.to_str().unwrap()]).status.code(), Some(2));

    // and a clean region claimed to fail
    let mut square = examples::square(0.5);
    square.expect = Expect::Violations;
    let path = dir.path().join("square.json");
    std::fs::write(&path, square.to_json()).unwrap();
    assert_eq!(catk(&["run", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn c5_limit_segments_match_the_alexandrov_angle() {
    for sc in [examples::square(0.25), examples::notch(0.25), examples::tripod_triangle(0.25)] {
        let report = run(&sc).unwrap();
        let limits = &report.body.limit_segments;
        assert!(!limits.is_empty(), "{}", sc.name);
        for l in limits {
            assert_eq!(l.tol_angle, 0.02, "{}", sc.name);
            assert!((l.angle_x - l.angle_y.estimate).abs() <= l.tol_angle, "{}: {l:?}", sc.name);
            assert_eq!(l.sides.len(), 2);
            for side in &l.sides {
                assert!(side.contained, "{}", sc.name);
                assert!(side.reaches_opposite_side, "{}", sc.name);
            }
            assert!(l.passed, "{}: {:?}", sc.name, l.notes);
        }
    }
}

#[test]
fn c6_homology_classifications_agree_everywhere() {
    for name in examples::NAMES {
        let mut sc: Scenario = examples::by_name(name).unwrap();
        sc.plan.homology = Some(HomologyPlan { oracle_samples: 40 });
        // only the homology section is under test here
        sc.plan.cat_sweep = None;
        sc.plan.convexity = None;
        sc.plan.triangles.clear();
        sc.plan.limit_segments.clear();
        sc.plan.probes.clear();
        sc.plan.geodesics.clear();
        let report = run(&sc).unwrap();
        let h = report.body.homology.as_ref().unwrap();
        assert!(h.ambient_d1d2_zero && h.region_d1d2_zero, "{name}");
        if sc.curve.is_some() {
            assert_eq!(h.boundary_matches_curve, Some(true), "{name}");
            let o = h.oracle.as_ref().unwrap();
            assert!(o.disagreements.is_empty(), "{name}: {:?}", o.disagreements);
            assert_eq!(o.agreeing, o.tested_vertices + o.tested_tris, "{name}");
            assert!(o.agreeing > 0, "{name}");
        }
    }
}

#[test]
fn c7_link_condition() {
    let tripod = run(&examples::tripod(4.0, 5.0, 0.25)).unwrap();
    let link = tripod.body.link.as_ref().unwrap();
    assert!(link.pass);
    assert!((link.min_girth.unwrap() - 2.0 * PI).abs() <= 1e-12, "{:?}", link.min_girth);

    let cone = run(&examples::cone(0.25)).unwrap();
    let link = cone.body.link.as_ref().unwrap();
    assert!(!link.pass);
    assert!((link.min_girth.unwrap() - PI).abs() <= 1e-12, "{:?}", link.min_girth);
    assert_eq!(cone.body.status, Status::Violations);
}

#[test]
fn c8_reports_are_deterministic() {
    for name in examples::NAMES {
        let sc = examples::by_name(name).unwrap();
        let a = run(&sc).unwrap().body_json();
        let b = run(&sc).unwrap().body_json();
        assert!(a == b, "{name} differs between runs");
    }
}
