//! Numerical checks of comparison geometry in a region's induced length metric.

mod curve;
mod limit;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use curve::{verify_curve_theorem, CurveTheoremReport, SeedRecord};
pub use limit::{limit_segments, LimitReport, LimitSide};

use crate::complex::{ComplexPoint, PointDoc, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::geodesic::{PathMetric, PiecewisePath};
use crate::model::{comparison_angle, dist, geodesic_point, Kappa, ModelPoint};
use crate::region::Region;

/// Numerical tolerances; all lengths are absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Stop refining a geodesic once a round shortens it by less than this.
    pub target_gap: f64,
    pub tol_geo: f64,
    pub tol_cat: f64,
    /// Lower bound of the angle tolerance.
    pub angle_floor: f64,
    /// Angle tolerance grows like `c_ang * h / eps`.
    pub c_ang: f64,
}

impl Tolerances {
    pub fn for_diameter(d: f64) -> Self {
        let target_gap = 1e-4 * d;
        Tolerances { target_gap, tol_geo: 10.0 * target_gap, tol_cat: 5.0 * target_gap, angle_floor: 0.02, c_ang: 0.05 }
    }

    pub fn tol_angle(&self, h: f64, eps: f64) -> f64 {
        self.angle_floor.max(self.c_ang * h / eps)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.target_gap, self.tol_geo, self.tol_cat, self.angle_floor, self.c_ang];
        if all.iter().all(|x| x.is_finite() && *x > 0.0) {
            Ok(())
        } else {
            Err(CatkError::InvalidScenario("tolerances must be positive".into()))
        }
    }
}

/// One numerical check: passes when `margin >= -tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub kind: String,
    pub witnesses: Vec<PointDoc>,
    pub measured: f64,
    pub comparison: f64,
    pub margin: f64,
    pub tolerance: f64,
    /// Margin recomputed with side lengths reduced by their last refinement decrease.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tightened_margin: Option<f64>,
    pub flipped: bool,
}

impl CheckRecord {
    pub fn violated(&self) -> bool {
        self.margin < -self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MarginReport {
    pub checks: Vec<CheckRecord>,
    pub min_margin: Option<f64>,
    /// Indices into `checks` of the violated entries.
    pub violations: Vec<usize>,
    pub flipped: usize,
    pub seed: Option<u64>,
    /// A time budget stopped the run before every planned check was made.
    pub incomplete: bool,
    pub notes: Vec<String>,
}

impl MarginReport {
    pub fn push(&mut self, c: CheckRecord) {
        if c.violated() {
            self.violations.push(self.checks.len());
        }
        if c.flipped {
            self.flipped += 1;
        }
        self.min_margin = Some(self.min_margin.map_or(c.margin, |m| m.min(c.margin)));
        self.checks.push(c);
    }

    pub fn merge(&mut self, other: MarginReport) {
        for c in other.checks {
            self.push(c);
        }
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Comparison-angle ladder at shrinking scales.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleEstimate {
    pub scales: Vec<f64>,
    pub angles: Vec<f64>,
    pub estimate: f64,
    pub residual: f64,
    /// The ladder stopped early at the resolution floor.
    pub clipped: bool,
}

/// A geodesic triangle in the region, with sides `[p,q]`, `[p,r]`, `[q,r]`.
#[derive(Clone, Debug)]
pub struct TriangleSample {
    pub p: ComplexPoint,
    pub q: ComplexPoint,
    pub r: ComplexPoint,
    pub pq: PiecewisePath,
    pub pr: PiecewisePath,
    pub qr: PiecewisePath,
    /// Last refinement decrease of each side, in the same order.
    pub decrease: [f64; 3],
}

impl TriangleSample {
    pub fn new(m: &PathMetric<'_>, p: ComplexPoint, q: ComplexPoint, r: ComplexPoint, tol: &Tolerances) -> Result<Self> {
        let g = |a: &ComplexPoint, b: &ComplexPoint| m.geodesic(a, b, tol.target_gap);
        let (pq, pr, qr) = (g(&p, &q)?, g(&p, &r)?, g(&q, &r)?);
        let slack = 3.0 * tol.target_gap;
        let [a, b, c] = [pq.path.length, pr.path.length, qr.path.length];
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            return Err(CatkError::InvalidTriangle(format!("side lengths {a}, {b}, {c} break the triangle inequality")));
        }
        let fin = |x: f64| if x.is_finite() { x.max(0.0) } else { 0.0 };
        Ok(TriangleSample {
            p,
            q,
            r,
            decrease: [fin(pq.last_decrease), fin(pr.last_decrease), fin(qr.last_decrease)],
            pq: pq.path,
            pr: pr.path,
            qr: qr.path,
        })
    }

    /// (a, b, c) = (|pq|, |pr|, |qr|).
    pub fn sides(&self) -> [f64; 3] {
        [self.pq.length, self.pr.length, self.qr.length]
    }
}

/// Smallest probe scale used by angle ladders, relative to the mesh size.
pub const LADDER_FLOOR: f64 = 1e-3;

/// Alexandrov angle at the common start of two geodesics, from comparison angles at scales `eps * 2^-k`.
pub fn alexandrov_angle_y(
    m: &PathMetric<'_>,
    s1: &PiecewisePath,
    s2: &PiecewisePath,
    eps: f64,
    depth: usize,
    tol: &Tolerances,
) -> Result<AngleEstimate> {
    let c = m.subdivision().parent();
    let floor = LADDER_FLOOR * m.subdivision().h();
    let mut scales = Vec::new();
    let mut angles = Vec::new();
    let mut clipped = false;
    for k in 0..=depth {
        let t = eps * 0.5f64.powi(k as i32);
        if t < floor {
            clipped = true;
            break;
        }
        let (t1, t2) = (t.min(s1.length), t.min(s2.length));
        if t1 <= 0.0 || t2 <= 0.0 {
            break;
        }
        let x = s1.point_at(c, t1);
        let y = s2.point_at(c, t2);
        let d = m.distance(&x, &y, tol.target_gap)?;
        let a = comparison_angle(Kappa::FLAT, t1, t2, d.clamp((t1 - t2).abs(), t1 + t2))?;
        scales.push(t);
        angles.push(a);
    }
    let n = angles.len();
    if n == 0 {
        return Ok(AngleEstimate { scales, angles, estimate: 0.0, residual: 0.0, clipped: true });
    }
    let estimate = angles[n - 1].clamp(0.0, PI);
    let residual = if n >= 2 { (angles[n - 1] - angles[n - 2]).abs() } else { 0.0 };
    Ok(AngleEstimate { scales, angles, estimate, residual, clipped })
}

/// Comparison triangle in the model plane: p at the origin, q on the positive axis.
struct Comparison {
    p: ModelPoint,
    q: ModelPoint,
    r: ModelPoint,
}

impl Comparison {
    fn new(kappa: Kappa, a: f64, b: f64, c: f64) -> Result<Self> {
        // clamp tiny triangle-inequality defects from upper-bound sides
        let c = c.clamp((a - b).abs(), a + b);
        let angle_p = comparison_angle(kappa, a, b, c)?;
        Ok(Comparison {
            p: ModelPoint::origin(kappa),
            q: ModelPoint::polar(kappa, a, 0.0),
            r: ModelPoint::polar(kappa, b, angle_p),
        })
    }

    /// Point at arclength `t` from the first endpoint of side `k` (0 = pq, 1 = pr, 2 = qr).
    fn on_side(&self, k: usize, t: f64) -> Result<ModelPoint> {
        let (a, b) = match k {
            0 => (&self.p, &self.q),
            1 => (&self.p, &self.r),
            _ => (&self.q, &self.r),
        };
        let l = dist(a, b)?;
        geodesic_point(a, b, if l > 0.0 { (t / l).clamp(0.0, 1.0) } else { 0.0 })
    }
}

/// Options of a single triangle test.
#[derive(Clone, Copy, Debug)]
pub struct TriangleTestOptions {
    /// Matched pairs on the two sides at p; the same number of cross-side pairs per other side pair.
    pub pairs: usize,
    /// Probe scale and depth of the angle ladders; scale defaults to a quarter of the shortest side.
    pub angle_scale: Option<f64>,
    pub angle_depth: usize,
    pub seed: u64,
}

/// Distance and angle comparisons for one triangle.
pub fn cat_triangle_test(
    m: &PathMetric<'_>,
    kappa: Kappa,
    t: &TriangleSample,
    opts: &TriangleTestOptions,
    tol: &Tolerances,
) -> Result<MarginReport> {
    let c = m.subdivision().parent();
    let h = m.subdivision().h();
    let [a, b, cc] = t.sides();
    let [da, db, dc] = t.decrease;
    let cmp = Comparison::new(kappa, a, b, cc)?;
    let tight = Comparison::new(kappa, (a - da).max(0.0), (b - db).max(0.0), (cc - dc).max(0.0))?;
    let sides = [&t.pq, &t.pr, &t.qr];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = MarginReport::default();
    // (side, fraction) pairs
    let mut pairs: Vec<((usize, f64), (usize, f64))> = Vec::new();
    for i in 0..opts.pairs {
        let u = (i as f64 + 0.5) / opts.pairs as f64;
        pairs.push(((0, u), (1, u)));
    }
    for _ in 0..opts.pairs {
        pairs.push(((0, rng.gen::<f64>()), (2, rng.gen::<f64>())));
        pairs.push(((1, rng.gen::<f64>()), (2, rng.gen::<f64>())));
    }
    for ((k1, u1), (k2, u2)) in pairs {
        let (s1, s2) = (u1 * sides[k1].length, u2 * sides[k2].length);
        let x = sides[k1].point_at(c, s1);
        let y = sides[k2].point_at(c, s2);
        let measured = m.distance(&x, &y, tol.target_gap)?;
        let comparison = dist(&cmp.on_side(k1, s1)?, &cmp.on_side(k2, s2)?)?;
        // fractions keep points on the tightened sides comparable
        let tl = |k: usize| match k {
            0 => (a - da).max(0.0),
            1 => (b - db).max(0.0),
            _ => (cc - dc).max(0.0),
        };
        let tcomp = dist(&tight.on_side(k1, u1 * tl(k1))?, &tight.on_side(k2, u2 * tl(k2))?)?;
        let margin = comparison - measured;
        let tmargin = tcomp - measured;
        let flipped = (margin < -tol.tol_cat) != (tmargin < -tol.tol_cat);
        report.push(CheckRecord {
            kind: "distance".into(),
            witnesses: vec![c.describe(&x), c.describe(&y)],
            measured,
            comparison,
            margin,
            tolerance: tol.tol_cat,
            tightened_margin: Some(tmargin),
            flipped,
        });
    }
    // vertex angles
    let rev = |p: &PiecewisePath| p.reversed();
    let corners: [(&ComplexPoint, PiecewisePath, PiecewisePath, f64, f64, f64); 3] = [
        (&t.p, t.pq.clone(), t.pr.clone(), a, b, cc),
        (&t.q, rev(&t.pq), t.qr.clone(), a, cc, b),
        (&t.r, rev(&t.pr), rev(&t.qr), b, cc, a),
    ];
    for (v, s1, s2, x, y, z) in corners {
        if s1.length <= 0.0 || s2.length <= 0.0 {
            continue;
        }
        let eps = opts.angle_scale.unwrap_or(0.25 * x.min(y)).min(x.min(y));
        let est = alexandrov_angle_y(m, &s1, &s2, eps, opts.angle_depth, tol)?;
        let comparison = comparison_angle(kappa, x, y, z.clamp((x - y).abs(), x + y))?;
        let tol_angle = tol.tol_angle(h, eps);
        report.push(CheckRecord {
            kind: "angle".into(),
            witnesses: vec![c.describe(v), c.describe(s1.end()), c.describe(s2.end())],
            measured: est.estimate,
            comparison,
            margin: comparison - est.estimate,
            tolerance: tol_angle,
            tightened_margin: None,
            flipped: false,
        });
    }
    Ok(report)
}

/// A uniformly chosen point of the region (area-weighted on triangles, length-weighted on bare edges).
pub fn sample_point(s: &SubdividedComplex, region: &Region, rng: &mut ChaCha8Rng) -> Result<ComplexPoint> {
    let c = s.parent();
    if !region.tris.is_empty() {
        let tris: Vec<usize> = region.tris.iter().copied().collect();
        let areas: Vec<f64> = tris
            .iter()
            .map(|&t| {
                let ch = &s.tris[t].chart;
                crate::model::triangle_area(&ch[0], &ch[1], &ch[2]).unwrap_or(0.0)
            })
            .collect();
        let total: f64 = areas.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = tris[tris.len() - 1];
        for (k, &ar) in areas.iter().enumerate() {
            if x < ar {
                pick = tris[k];
                break;
            }
            x -= ar;
        }
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
        let ch = s.tri_chart2(pick);
        let p = [
            ch[0][0] + u * (ch[1][0] - ch[0][0]) + v * (ch[2][0] - ch[0][0]),
            ch[0][1] + u * (ch[1][1] - ch[0][1]) + v * (ch[2][1] - ch[0][1]),
        ];
        let f = s.tris[pick].face;
        return c.locate_face(f, &ModelPoint::from_chart(c.kappa(), p)?);
    }
    let edges: Vec<usize> = region.edges.iter().copied().collect();
    if edges.is_empty() {
        let v = *region.vertices.iter().next().ok_or(CatkError::EmptyRegion)?;
        return Ok(s.vertices[v].site);
    }
    let total: f64 = edges.iter().map(|&e| s.edges[e].length).sum();
    let mut x = rng.gen::<f64>() * total;
    for &e in &edges {
        let l = s.edges[e].length;
        if x < l {
            return Ok(s.subedge_site(e, x));
        }
        x -= l;
    }
    let e = edges[edges.len() - 1];
    Ok(s.subedge_site(e, s.edges[e].length * 0.5))
}

/// Per-triple random stream, independent of evaluation order.
pub fn triple_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub triangles: usize,
    pub seed: u64,
    pub test: TriangleTestOptions,
    /// Triangles not started within this time are skipped and the report is marked incomplete.
    pub budget: Option<Duration>,
}

/// Random triangle tests in a region; results are in triple order regardless of scheduling.
pub fn cat_sweep(
    m: &PathMetric<'_>,
    region: &Region,
    kappa: Kappa,
    opts: &SweepOptions,
    tol: &Tolerances,
) -> Result<MarginReport> {
    let s = m.subdivision();
    let start = Instant::now();
    let results: Vec<Result<Option<MarginReport>>> = (0..opts.triangles as u64)
        .into_par_iter()
        .map(|i| {
            if opts.budget.is_some_and(|b| start.elapsed() > b) {
                return Ok(None);
            }
            let mut rng = triple_rng(opts.seed, i);
            let p = sample_point(s, region, &mut rng)?;
            let q = sample_point(s, region, &mut rng)?;
            let r = sample_point(s, region, &mut rng)?;
            let t = TriangleSample::new(m, p, q, r, tol)?;
            let test = TriangleTestOptions { seed: rng.gen(), ..opts.test };
            cat_triangle_test(m, kappa, &t, &test, tol).map(Some)
        })
        .collect();
    let mut report = MarginReport { seed: Some(opts.seed), ..Default::default() };
    let mut done = 0;
    for r in results {
        if let Some(r) = r? {
            report.merge(r);
            done += 1;
        }
    }
    if done < opts.triangles {
        report.incomplete = true;
        report.notes.push(format!("time budget exhausted: {done} of {} triangles tested", opts.triangles));
    }
    Ok(report)
}

/// Y-geodesics between points of a ball of X centred on the X-geodesic must stay in the ball.
///
/// Distance to the centre is convex along X-geodesics, so only the bends of the Y-path are tested.
pub fn convexity_check(
    mx: &PathMetric<'_>,
    my: &PathMetric<'_>,
    region: &Region,
    pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MarginReport> {
    let s = my.subdivision();
    let c = s.parent();
    let results: Vec<Result<CheckRecord>> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = triple_rng(seed, i);
            let x = sample_point(s, region, &mut rng)?;
            let y = sample_point(s, region, &mut rng)?;
            let gx = mx.geodesic(&x, &y, tol.target_gap)?.path;
            let centre = gx.point_at(c, 0.5 * gx.length);
            let radius = 0.5 * gx.length;
            let gy = my.geodesic(&x, &y, tol.target_gap)?.path;
            let mut worst = (0.0f64, x);
            for &b in &gy.bends {
                let d = mx.distance(&centre, &gy.points[b], tol.target_gap)?;
                if d > worst.0 {
                    worst = (d, gy.points[b]);
                }
            }
            Ok(CheckRecord {
                kind: "convexity".into(),
                witnesses: vec![c.describe(&x), c.describe(&y), c.describe(&centre), c.describe(&worst.1)],
                measured: worst.0,
                comparison: radius,
                margin: radius - worst.0,
                tolerance: tol.tol_geo,
                tightened_margin: None,
                flipped: false,
            })
        })
        .collect();
    let mut report = MarginReport { seed: Some(seed), ..Default::default() };
    for r in results {
        report.push(r?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
