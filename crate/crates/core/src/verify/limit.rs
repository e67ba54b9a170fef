//! Limit segments at a corner of a region triangle, measured in the ambient complex.
//!
//! The triangle is re-seamed into a fresh subdivision of the whole complex so
//! that its interior can be classified there. X-geodesics from the corner to
//! points sliding down each side converge to a segment; its angle must match
//! the region's Alexandrov angle, it must stay in the closed triangle, and its
//! geodesic continuation must leave through the opposite side.

use serde::Serialize;

use super::{alexandrov_angle_y, AngleEstimate, Tolerances, LADDER_FLOOR};
use crate::complex::{ComplexPoint, PointDoc, Seam, SubCell, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::geodesic::{angle_between, extend_geodesic, ExtendOptions, ExtensionOutcome, PathMetric, PiecewisePath};
use crate::homology::{curve_interior, CellState, CycleCurve, InteriorClassification};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSide {
    pub scales: Vec<f64>,
    /// Matched distance between consecutive approximants.
    pub steps: Vec<f64>,
    pub converged: bool,
    pub length: f64,
    pub contained: bool,
    pub extension: ExtensionOutcome,
    pub extension_terminal: PointDoc,
    pub reaches_opposite_side: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub corners: [PointDoc; 3],
    pub side_lengths: [f64; 3],
    pub eps: f64,
    pub simple: bool,
    pub angle_y: AngleEstimate,
    pub angle_x: f64,
    pub tol_angle: f64,
    pub angle_ok: bool,
    pub sides: Vec<LimitSide>,
    pub passed: bool,
    pub notes: Vec<String>,
}

/// Sides of a triangle stay at least `h/2` apart away from their shared corners.
fn clear_of_each_other(c: &crate::complex::Complex, sides: [&PiecewisePath; 3], h: f64) -> bool {
    let step = 0.25 * h;
    // sample positions with their distance to each endpoint
    let samples: Vec<Vec<(ComplexPoint, f64, f64)>> = sides
        .iter()
        .map(|p| {
            let n = ((p.length / step).ceil() as usize).max(1);
            (0..=n)
                .map(|k| {
                    let s = p.length * k as f64 / n as f64;
                    (p.point_at(c, s), s, p.length - s)
                })
                .collect()
        })
        .collect();
    // sides 0 = pq, 1 = pr, 2 = qr; shared corners: (0,1) at starts, (0,2) q, (1,2) r at ends
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let near_corner = |i: usize, j: usize, a: &(ComplexPoint, f64, f64), b: &(ComplexPoint, f64, f64)| {
        let r = 2.0 * h;
        match (i, j) {
            (0, 1) => a.1 < r || b.1 < r,
            (0, 2) => a.2 < r || b.1 < r,
            _ => a.2 < r || b.2 < r,
        }
    };
    for (i, j) in pairs {
        for a in &samples[i] {
            for b in &samples[j] {
                if near_corner(i, j, a, b) {
                    continue;
                }
                if let Some(f) = c.common_faces(&a.0, &b.0).first() {
                    if c.face_distance(*f, &a.0, &b.0).is_some_and(|d| d < 0.5 * h) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Closed seam `pq`, then `qr`, then `rp`, with the faces of each segment.
fn triangle_seam(pq: &PiecewisePath, qr: &PiecewisePath, pr: &PiecewisePath) -> Seam {
    let rp = pr.reversed();
    let mut points = pq.points.clone();
    let mut faces: Vec<_> = pq.faces.iter().map(|&f| Some(f)).collect();
    points.extend(qr.points.iter().skip(1).copied());
    faces.extend(qr.faces.iter().map(|&f| Some(f)));
    points.extend(rp.points.iter().skip(1).take(rp.points.len().saturating_sub(2)).copied());
    faces.extend(rp.faces.iter().map(|&f| Some(f)));
    Seam { points, faces, closed: true }
}

/// Vertices of the traced triangle from `q` to `r` inclusive.
fn opposite_side(s: &SubdividedComplex, trace: &[usize], q: &ComplexPoint, r: &ComplexPoint) -> Result<Vec<usize>> {
    let idx = |p: &ComplexPoint| -> Result<usize> {
        match s.cell_of(p)? {
            SubCell::Vertex(v) => trace
                .iter()
                .position(|&w| w == v)
                .ok_or_else(|| CatkError::InvalidTriangle("corner not on the traced triangle".into())),
            _ => Err(CatkError::InvalidTriangle("corner is not a vertex of the re-seamed subdivision".into())),
        }
    };
    let (iq, ir) = (idx(q)?, idx(r)?);
    let n = trace.len();
    let mut out = vec![trace[iq]];
    let mut k = iq;
    while k != ir {
        k = (k + 1) % n;
        out.push(trace[k]);
    }
    Ok(out)
}

fn on_vertices(s: &SubdividedComplex, p: &ComplexPoint, set: &[usize]) -> bool {
    match s.cell_of(p) {
        Ok(SubCell::Vertex(v)) => set.contains(&v),
        Ok(SubCell::Edge(e)) => s.edges[e].ends.iter().all(|v| set.contains(v)),
        _ => false,
    }
}

/// Approximants of the limit segment along side `sigma` from `p`, each cut or extended to `eps`.
fn ladder(
    mx: &PathMetric<'_>,
    cls: &InteriorClassification,
    p: &ComplexPoint,
    sigma: &PiecewisePath,
    eps: f64,
    depth: usize,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<PiecewisePath>)> {
    let s = mx.subdivision();
    let c = s.parent();
    let floor = LADDER_FLOOR * s.h();
    let mut scales = Vec::new();
    let mut approx = Vec::new();
    for k in 0..=depth {
        let t = eps * 0.5f64.powi(k as i32);
        if t < floor || t > sigma.length {
            if t < floor {
                break;
            }
            continue;
        }
        let x = sigma.point_at(c, t);
        let mut g = mx.geodesic(p, &x, tol.target_gap)?.path;
        if g.length <= 0.0 {
            continue;
        }
        if g.length >= eps {
            g = g.truncated(c, eps);
        } else {
            let opts = ExtendOptions {
                step: 0.25 * s.h(),
                max_length: eps - g.length,
                classification: Some(cls),
                stop_on_curve: false,
            };
            let ext = extend_geodesic(s, &g, &opts)?;
            g.concat(c, &ext.path);
        }
        scales.push(t);
        approx.push(g);
    }
    Ok((scales, approx))
}

/// Check the limit-segment identity at corner `p` of the region triangle `pqr`.
pub fn limit_segments(
    my: &PathMetric<'_>,
    p: &ComplexPoint,
    q: &ComplexPoint,
    r: &ComplexPoint,
    eps: f64,
    depth: usize,
    tol: &Tolerances,
) -> Result<LimitReport> {
    let sy = my.subdivision();
    let c = sy.parent();
    let h = sy.h();
    let pq = my.geodesic(p, q, tol.target_gap)?.path;
    let pr = my.geodesic(p, r, tol.target_gap)?.path;
    let qr = my.geodesic(q, r, tol.target_gap)?.path;
    let side_lengths = [pq.length, pr.length, qr.length];
    if side_lengths.iter().any(|&l| l < 4.0 * h) {
        return Err(CatkError::InvalidTriangle(format!("sides {side_lengths:?} are too short for mesh size {h}")));
    }
    if !(eps > 0.0 && eps <= pq.length.min(pr.length)) {
        return Err(CatkError::InvalidTriangle(format!("probe length {eps} must lie in (0, shortest side at p]")));
    }
    let cone = c.conical_radius(p);
    if eps > cone + crate::model::EPS_MODEL {
        return Err(CatkError::InvalidTriangle(format!(
            "probe length {eps} exceeds the conical radius {cone} at p"
        )));
    }
    let tol_angle = tol.tol_angle(h, eps);
    let angle_y = alexandrov_angle_y(my, &pq, &pr, eps, depth, tol)?;
    let corners = [c.describe(p), c.describe(q), c.describe(r)];
    let mut notes = Vec::new();
    let simple = clear_of_each_other(c, [&pq, &pr, &qr], h);
    let fail = |simple, notes| LimitReport {
        corners: corners.clone(),
        side_lengths,
        eps,
        simple,
        angle_y: angle_y.clone(),
        angle_x: f64::NAN,
        tol_angle,
        angle_ok: false,
        sides: Vec::new(),
        passed: false,
        notes,
    };
    if !simple {
        return Err(CatkError::InvalidTriangle("sides come closer than h/2 away from the corners; the triangle is not simple".into()));
    }
    let sx = SubdividedComplex::new(c, h, &[triangle_seam(&pq, &qr, &pr)])
        .map_err(|e| CatkError::InvalidTriangle(format!("triangle is not a simple seam: {e}")))?;
    let trace = &sx.seams()[0];
    let curve = CycleCurve::from_trace(&sx, trace)?;
    let cls = curve_interior(&sx, &curve)?;
    let opposite = opposite_side(&sx, &trace.vertices, q, r)?;
    let mx = PathMetric::new(&sx, None);
    let mut sides = Vec::new();
    let mut limits = Vec::new();
    for sigma in [&pq, &pr] {
        let (scales, approx) = ladder(&mx, &cls, p, sigma, eps, depth, tol)?;
        let steps: Vec<f64> = approx
            .windows(2)
            .map(|w| w[1].matched_distance(c, &w[0], 32).unwrap_or(f64::INFINITY))
            .collect();
        let converged = steps.last().is_some_and(|&d| d <= tol.tol_geo);
        let Some(limit) = approx.last().cloned() else {
            notes.push("no approximant above the resolution floor".into());
            return Ok(fail(true, notes));
        };
        let contained = limit.samples(c, 0.25 * h).iter().all(|x| match sx.cell_of(x) {
            Ok(cell) => cls.state(cell) != CellState::Out,
            Err(_) => false,
        });
        let opts = ExtendOptions {
            step: 0.25 * h,
            max_length: 4.0 * c.diameter_estimate(),
            classification: Some(&cls),
            stop_on_curve: true,
        };
        let ext = extend_geodesic(&sx, &limit, &opts)?;
        let reaches = ext.outcome == ExtensionOutcome::MetCurve && on_vertices(&sx, &ext.terminal, &opposite);
        sides.push(LimitSide {
            scales,
            steps,
            converged,
            length: limit.length,
            contained,
            extension: ext.outcome,
            extension_terminal: c.describe(&ext.terminal),
            reaches_opposite_side: reaches,
        });
        limits.push(limit);
    }
    let angle_x = angle_between(&sx, p, &limits[0].points[1], limits[0].faces[0], &limits[1].points[1], limits[1].faces[0])
        .unwrap_or(f64::NAN);
    let angle_ok = (angle_x - angle_y.estimate).abs() <= tol_angle;
    let passed = angle_ok && sides.iter().all(|s| s.converged && s.contained && s.reaches_opposite_side);
    Ok(LimitReport {
        corners,
        side_lengths,
        eps,
        simple: true,
        angle_y,
        angle_x,
        tol_angle,
        angle_ok,
        sides,
        passed,
        notes,
    })
}
