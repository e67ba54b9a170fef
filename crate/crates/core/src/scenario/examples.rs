//! Built-in scenarios.

use crate::builders;
use crate::complex::PointDoc;
use crate::region::CarveOp;

use super::{
    AnglePlan, ConvexityPlan, CurvePlan, Expect, GeodesicPlan, HomologyPlan, LimitPlan, Metric, Plan, RegionSpec,
    Scenario, SeamDoc, SweepPlan, TrianglePlan, FORMAT_VERSION,
};

pub const NAMES: &[&str] =
    &["tripod", "tripod-geodesic", "tripod-generated", "tripod-triangle", "square", "notch", "annulus", "cone"];

fn base(name: &str, complex: crate::complex::ComplexDoc, h: f64) -> Scenario {
    Scenario {
        format_version: FORMAT_VERSION,
        name: name.into(),
        description: String::new(),
        complex,
        h,
        seams: Vec::new(),
        curve: None,
        region: RegionSpec::Whole,
        plan: Plan::default(),
        expect: Expect::Pass,
    }
}

fn spine(half_height: f64, y: f64) -> PointDoc {
    PointDoc::edge(1, y + half_height)
}

/// Spine heights visited by the curve and the half-plane of each arc.
const TRIPOD_ARCS: [(f64, f64, u64); 6] =
    [(-1.0, 1.0, 1), (1.0, -2.0, 2), (-2.0, 3.0, 3), (3.0, -3.0, 1), (-3.0, 2.0, 2), (2.0, -1.0, 3)];

/// The closed curve winding through all three half-planes of the tripod.
///
/// Each arc leaves the spine, bulges into its half-plane and returns. Bulge
/// depth is proportional to the arc's span so nested arcs in one half-plane
/// stay disjoint.
pub fn tripod_curve(width: f64, half_height: f64) -> Vec<PointDoc> {
    let span_max = TRIPOD_ARCS.iter().map(|a| (a.1 - a.0).abs()).fold(0.0, f64::max);
    let mut pts = Vec::new();
    for &(a, b, face) in &TRIPOD_ARCS {
        let depth = 0.75 * width * (b - a).abs() / span_max;
        pts.push(spine(half_height, a));
        pts.push(builders::tripod_point(face, depth, 0.5 * (a + b)));
    }
    pts
}

/// Three half-planes (truncated to `width x 2*half_height`) with the winding curve and its closure as region.
pub fn tripod(width: f64, half_height: f64, h: f64) -> Scenario {
    let mut sc = base("tripod", builders::tripod(width, half_height), h);
    sc.description = "winding curve through three half-planes glued along a spine".into();
    sc.curve = Some(tripod_curve(width, half_height));
    sc.region = RegionSpec::CurveClosure;
    sc.plan.homology = Some(HomologyPlan { oracle_samples: 40 });
    sc.plan.curve = Some(CurvePlan { extension_seeds: 16 });
    sc.plan.classify = vec![spine(half_height, 0.0)];
    sc
}

/// Geodesic across the spine between two half-planes, refined for a fixed number of rounds.
pub fn tripod_geodesic(h: f64) -> Scenario {
    let mut sc = base("tripod-geodesic", builders::tripod(4.0, 5.0), h);
    sc.plan.geodesics = vec![GeodesicPlan {
        from: builders::tripod_point(1, 1.0, 0.0),
        to: builders::tripod_point(2, 1.0, 0.0),
        metric: Metric::Ambient,
        rounds: Some(4),
    }];
    sc
}

/// Random disk region in the tripod, swept with comparison triangles.
pub fn tripod_generated(seed: u64, cells: usize, h: f64) -> Scenario {
    let mut sc = base("tripod-generated", builders::tripod(4.0, 5.0), h);
    sc.region = RegionSpec::Generated { seed, cells };
    sc.plan.seed = seed;
    sc.plan.cat_sweep = Some(SweepPlan { triangles: 50, pairs: 3, angle_depth: 4, budget_ms: None });
    sc
}

/// A triangle with one corner in each half-plane; every side crosses the spine.
pub fn tripod_triangle(h: f64) -> Scenario {
    let mut sc = base("tripod-triangle", builders::tripod(4.0, 5.0), h);
    let (p, q, r) =
        (builders::tripod_point(1, 1.0, 0.0), builders::tripod_point(2, 1.5, 1.5), builders::tripod_point(3, 1.5, -1.5));
    sc.plan.triangles = vec![TrianglePlan { p: p.clone(), q: q.clone(), r: r.clone(), pairs: 8, angle_depth: 4 }];
    sc.plan.limit_segments = vec![LimitPlan { p, q, r, eps: 0.75, depth: 5 }];
    sc
}

/// Convex square with a quadrilateral curve inside it.
pub fn square(h: f64) -> Scenario {
    let mut sc = base("square", builders::square(4.0), h);
    let f = |x: f64, y: f64| PointDoc::face(1, vec![x, y]);
    sc.curve = Some(vec![f(1.0, 1.5), f(2.5, 1.25), f(3.0, 2.75), f(1.5, 3.0)]);
    sc.plan.homology = Some(HomologyPlan { oracle_samples: 40 });
    sc.plan.curve = Some(CurvePlan { extension_seeds: 16 });
    sc.plan.classify = vec![f(2.0, 2.0), f(0.25, 0.25)];
    sc.plan.cat_sweep = Some(SweepPlan { triangles: 50, pairs: 3, angle_depth: 4, budget_ms: None });
    sc.plan.limit_segments =
        vec![LimitPlan { p: f(1.0, 1.0), q: f(3.5, 1.25), r: f(1.5, 3.5), eps: 0.75, depth: 5 }];
    sc
}

/// Square with a rectangular notch cut from its top edge.
pub fn notch(h: f64) -> Scenario {
    let mut sc = base("notch", builders::square(6.0), h);
    sc.description = "square minus a notch; region geodesics bend at the notch corners".into();
    let f = |x: f64, y: f64| PointDoc::face(1, vec![x, y]);
    let e = |edge: u64, t: f64| PointDoc::edge(edge, t);
    // square edge 3 runs from (6,6) to (0,6)
    sc.seams = vec![SeamDoc { points: vec![e(3, 2.5), f(3.5, 3.0), f(2.5, 3.0), e(3, 3.5)], closed: false }];
    sc.region = RegionSpec::Carve { ops: vec![CarveOp::RemoveBox { face: 1, min: [2.5, 3.0], max: [3.5, 6.0] }] };
    sc.plan.limit_segments = vec![
        LimitPlan { p: f(1.0, 1.0), q: f(5.0, 5.0), r: f(5.0, 1.0), eps: 0.75, depth: 5 },
        LimitPlan { p: f(1.0, 5.0), q: f(5.0, 2.0), r: f(1.0, 1.0), eps: 0.75, depth: 5 },
    ];
    sc.plan.probes = vec![AnglePlan { at: f(1.0, 5.0), toward: [f(5.0, 2.0), f(1.0, 1.0)], eps: 0.75, depth: 5 }];
    sc.plan.cat_sweep = Some(SweepPlan { triangles: 20, pairs: 3, angle_depth: 4, budget_ms: None });
    sc
}

/// A thin square annulus: not simply connected, so comparisons and convexity fail.
pub fn annulus(h: f64) -> Scenario {
    let mut sc = base("annulus", builders::square(6.0), h);
    sc.description = "negative control: thin annulus around a square hole".into();
    let f = |x: f64, y: f64| PointDoc::face(1, vec![x, y]);
    sc.seams = vec![SeamDoc { points: vec![f(0.5, 0.5), f(5.5, 0.5), f(5.5, 5.5), f(0.5, 5.5)], closed: true }];
    sc.region = RegionSpec::Carve { ops: vec![CarveOp::RemoveBox { face: 1, min: [0.5, 0.5], max: [5.5, 5.5] }] };
    sc.plan.seed = 7;
    sc.plan.cat_sweep = Some(SweepPlan { triangles: 30, pairs: 3, angle_depth: 3, budget_ms: None });
    sc.plan.convexity = Some(ConvexityPlan { pairs: 30 });
    sc.expect = Expect::Violations;
    sc
}

/// Three 60° sectors around a cone point: the vertex link is too short.
pub fn cone(h: f64) -> Scenario {
    let mut sc = base("cone", builders::cone(3, std::f64::consts::FRAC_PI_3, 2.0), h);
    sc.description = "negative control: positive curvature at the apex".into();
    sc.expect = Expect::Violations;
    sc
}

/// Built-in scenario by name with default parameters.
pub fn by_name(name: &str) -> Option<Scenario> {
    Some(match name {
        "tripod" => tripod(4.0, 5.0, 0.25),
        "tripod-geodesic" => tripod_geodesic(0.25),
        "tripod-generated" => tripod_generated(1, 400, 0.25),
        "tripod-triangle" => tripod_triangle(0.25),
        "square" => square(0.25),
        "notch" => notch(0.25),
        "annulus" => annulus(0.25),
        "cone" => cone(0.25),
        _ => return None,
    })
}
