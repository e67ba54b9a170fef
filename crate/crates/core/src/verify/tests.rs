use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Duration;

use super::*;
use crate::builders::{self, face_point};
use crate::complex::{Complex, Seam};
use crate::region::CarveOp;

fn sub(doc: crate::complex::ComplexDoc, h: f64, seams: &[Seam]) -> SubdividedComplex {
    SubdividedComplex::new(&Complex::build(doc).unwrap(), h, seams).unwrap()
}

fn test_opts(seed: u64) -> TriangleTestOptions {
    TriangleTestOptions { pairs: 3, angle_scale: None, angle_depth: 3, seed }
}

#[test]
fn right_angle_at_a_square_corner() {
    let s = sub(builders::square(2.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(3.0);
    let p = face_point(0, 0.5, 0.5);
    let a = m.geodesic(&p, &face_point(0, 1.5, 0.5), 1e-6).unwrap().path;
    let b = m.geodesic(&p, &face_point(0, 0.5, 1.5), 1e-6).unwrap().path;
    let est = alexandrov_angle_y(&m, &a, &b, 0.5, 4, &tol).unwrap();
    assert!((est.estimate - FRAC_PI_2).abs() < 1e-9);
    assert!(est.residual < 1e-9);
    assert_eq!(est.angles.len(), 5);
}

#[test]
fn flat_square_has_no_violations() {
    let s = sub(builders::square(2.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let y = Region::whole(&s);
    let tol = Tolerances::for_diameter(2.0 * 2f64.sqrt());
    let r = cat_sweep(&m, &y, Kappa::FLAT, &SweepOptions { triangles: 6, seed: 3, test: test_opts(0), budget: None }, &tol).unwrap();
    assert!(r.passed(), "{:?}", r.violations);
    assert!(r.min_margin.unwrap() >= -tol.tol_cat);
    // flat triangles are their own comparison triangles
    assert!(r.checks.iter().filter(|c| c.kind == "distance").all(|c| c.margin.abs() < 1e-6));
}

#[test]
fn sweep_is_reproducible() {
    let s = sub(builders::tripod(2.0, 2.0), 0.5, &[]);
    let m = PathMetric::new(&s, None);
    let y = Region::whole(&s);
    let tol = Tolerances::for_diameter(8.0);
    let opts = SweepOptions { triangles: 3, seed: 11, test: test_opts(0), budget: None };
    let a = cat_sweep(&m, &y, Kappa::FLAT, &opts, &tol).unwrap();
    let b = cat_sweep(&m, &y, Kappa::FLAT, &opts, &tol).unwrap();
    assert_eq!(a, b);
    assert!(a.passed());
}

fn thin_annulus() -> (SubdividedComplex, Region) {
    let corners = [(0.5, 0.5), (5.5, 0.5), (5.5, 5.5), (0.5, 5.5)];
    let seam = Seam::closed(corners.iter().map(|&(x, y)| face_point(0, x, y)).collect());
    let s = sub(builders::square(6.0), 0.25, &[seam]);
    let y = Region::carve(&s, &[CarveOp::RemoveBox { face: 1, min: [0.5, 0.5], max: [5.5, 5.5] }]);
    (s, y)
}

#[test]
fn thin_annulus_fails_convexity() {
    let (s, y) = thin_annulus();
    let mx = PathMetric::new(&s, None);
    let my = PathMetric::new(&s, Some(&y));
    let tol = Tolerances::for_diameter(12.0);
    let r = convexity_check(&mx, &my, &y, 12, 5, &tol).unwrap();
    assert!(!r.passed());
}

#[test]
fn limit_segments_in_a_square() {
    let s = sub(builders::square(5.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(5.0 * 2f64.sqrt());
    let (p, q, r) = (face_point(0, 1.0, 1.0), face_point(0, 4.0, 1.0), face_point(0, 1.0, 4.0));
    let rep = limit_segments(&m, &p, &q, &r, 1.0, 4, &tol).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!((rep.angle_x - FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn curve_theorem_for_a_box() {
    let corners = [(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0)];
    let seam = Seam::closed(corners.iter().map(|&(x, y)| face_point(0, x, y)).collect());
    let s = sub(builders::square(4.0), 0.25, &[seam]);
    let gamma = crate::homology::CycleCurve::from_trace(&s, &s.seams()[0]).unwrap();
    let cls = crate::homology::curve_interior(&s, &gamma).unwrap();
    let rep = verify_curve_theorem(&s, &gamma, &cls, 8, 1).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.worst_accumulation, 0.0);
}



#[test]
fn empty_sweep_passes_and_is_complete() {
    let s = sub(builders::square(2.0), 0.5, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(3.0);
    let opts = SweepOptions { triangles: 0, seed: 1, test: test_opts(0), budget: None };
    let r = cat_sweep(&m, &Region::whole(&s), Kappa::FLAT, &opts, &tol).unwrap();
    assert!(r.passed() && !r.incomplete);
    assert!(r.checks.is_empty() && r.min_margin.is_none());
}

#[test]
fn exhausted_budget_marks_the_sweep_incomplete() {
    let s = sub(builders::square(2.0), 0.5, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(3.0);
    let opts = SweepOptions { triangles: 4, seed: 1, test: test_opts(0), budget: Some(Duration::ZERO) };
    let r = cat_sweep(&m, &Region::whole(&s), Kappa::FLAT, &opts, &tol).unwrap();
    assert!(r.incomplete);
    assert!(r.notes.iter().any(|n| n.contains("of 4 triangles")));
}

#[test]
fn degenerate_corners_give_zero_and_straight_angles() {
    let s = sub(builders::square(4.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(6.0);
    let angle = |p: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        let p = face_point(0, p.0, p.1);
        let s1 = m.geodesic(&p, &face_point(0, a.0, a.1), 1e-6).unwrap().path;
        let s2 = m.geodesic(&p, &face_point(0, b.0, b.1), 1e-6).unwrap().path;
        alexandrov_angle_y(&m, &s1, &s2, 0.5, 4, &tol).unwrap().estimate
    };
    // q on [p, r]
    assert!(angle((0.5, 0.5), (1.5, 1.5), (3.0, 3.0)) < 1e-6);
    // p on [q, r]
    assert!((angle((2.0, 2.0), (1.0, 1.0), (3.5, 3.5)) - PI).abs() < 1e-6);
}

#[test]
fn ladder_scales_halve_down_to_the_floor() {
    let s = sub(builders::square(2.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(3.0);
    let p = face_point(0, 0.5, 0.5);
    let a = m.geodesic(&p, &face_point(0, 1.5, 0.5), 1e-6).unwrap().path;
    let b = m.geodesic(&p, &face_point(0, 1.0, 1.5), 1e-6).unwrap().path;
    let est = alexandrov_angle_y(&m, &a, &b, 0.5, 20, &tol).unwrap();
    assert!(est.clipped);
    assert!(est.scales.windows(2).all(|w| (w[1] - 0.5 * w[0]).abs() < 1e-15));
    assert!(*est.scales.last().unwrap() >= LADDER_FLOOR * 0.25);
    // flat sector: every rung sees the same angle
    assert!(est.angles.iter().all(|x| (x - est.estimate).abs() < 1e-9));
}

/// Square of side 6 minus the notch [2.5, 3.5] x [3, 6].
fn notched() -> (SubdividedComplex, Region) {
    let wall = [(2.5, 6.0), (2.5, 3.0), (3.5, 3.0), (3.5, 6.0)];
    let seam = Seam::open(wall.iter().map(|&(x, y)| face_point(0, x, y)).collect());
    let s = sub(builders::square(6.0), 0.25, &[seam]);
    let y = Region::carve(&s, &[CarveOp::RemoveBox { face: 1, min: [2.5, 3.0], max: [3.5, 6.0] }]);
    (s, y)
}

#[test]
fn sides_sharing_a_wall_meet_at_angle_zero() {
    let (s, y) = notched();
    let my = PathMetric::new(&s, Some(&y));
    let tol = Tolerances::for_diameter(12.0);
    let (p, q, r) = (face_point(0, 2.5, 6.0), face_point(0, 3.5, 5.0), face_point(0, 5.0, 3.5));
    let t = TriangleSample::new(&my, p, q, r, &tol).unwrap();
    let est = alexandrov_angle_y(&my, &t.pq, &t.pr, 1.0, 4, &tol).unwrap();
    assert!(est.estimate < 1e-6, "{est:?}");
    let [a, b, c] = t.sides();
    let whole = crate::model::comparison_angle(Kappa::FLAT, a, b, c).unwrap();
    assert!(whole > 0.1, "{whole}");
}

#[test]
fn limit_rejects_non_simple_triangles() {
    let (s, y) = notched();
    let my = PathMetric::new(&s, Some(&y));
    let tol = Tolerances::for_diameter(12.0);
    let (p, q, r) = (face_point(0, 2.5, 6.0), face_point(0, 3.5, 5.0), face_point(0, 5.0, 3.5));
    let e = limit_segments(&my, &p, &q, &r, 0.5, 4, &tol).unwrap_err();
    assert!(matches!(e, CatkError::InvalidTriangle(_)), "{e}");
}

#[test]
fn limit_rejects_probes_past_the_conical_radius() {
    let s = sub(builders::square(5.0), 0.25, &[]);
    let m = PathMetric::new(&s, None);
    let tol = Tolerances::for_diameter(5.0 * 2f64.sqrt());
    let (p, q, r) = (face_point(0, 1.0, 1.0), face_point(0, 4.0, 1.0), face_point(0, 1.0, 4.0));
    let e = limit_segments(&m, &p, &q, &r, 1.5, 4, &tol).unwrap_err();
    assert!(e.to_string().contains("conical radius"), "{e}");
}
