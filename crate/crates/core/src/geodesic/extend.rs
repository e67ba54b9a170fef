//! Continuation of a geodesic past its endpoint.
//!
//! The path is marched as a straight chart ray through sub-triangles,
//! unfolding across parent edges. At vertices it continues in a direction at
//! link distance π from the incoming one. Where several continuations exist,
//! cells inside the curve interior win, then the lowest triangle id.

use std::f64::consts::PI;

use serde::Serialize;

use super::link::SubLink;
use super::path::PiecewisePath;
use super::Mask;
use crate::complex::{ComplexPoint, FaceId, SubCell, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::homology::{CellState, InteriorClassification};
use crate::model::{dist, geodesic_point, gluing_isometry, Handedness, ModelPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionOutcome {
    /// Reached the curve after running through its interior.
    MetCurve,
    /// Was about to leave the curve and its interior away from the curve.
    LeftRegion,
    /// No continuation exists (boundary of the complex).
    Boundary,
    /// Length budget exhausted.
    Budget,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtendOptions<'a> {
    /// Maximal spacing of breakpoints in the output.
    pub step: f64,
    pub max_length: f64,
    pub classification: Option<&'a InteriorClassification>,
    /// Stop at the curve or when leaving its interior; otherwise the classification only ranks branches.
    pub stop_on_curve: bool,
}

#[derive(Clone, Debug)]
pub struct Extension {
    /// The continuation only, starting at the seed's endpoint.
    pub path: PiecewisePath,
    pub outcome: ExtensionOutcome,
    pub terminal: ComplexPoint,
}

struct Ray {
    tri: usize,
    p: [f64; 2],
    u: [f64; 2],
    cell: SubCell,
}

enum Exit {
    Edge { slot: usize, at: [f64; 2] },
    Vertex { slot: usize },
}

fn norm(v: [f64; 2]) -> [f64; 2] {
    let l = v[0].hypot(v[1]);
    [v[0] / l, v[1] / l]
}

fn exit_of(s: &SubdividedComplex, r: &Ray) -> Option<Exit> {
    let c = s.tri_chart2(r.tri);
    let mut best: Option<(f64, usize, f64)> = None;
    for i in 0..3 {
        let (a, b) = (c[i], c[(i + 1) % 3]);
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        let n = [d[1] / len, -d[0] / len];
        let outward = r.u[0] * n[0] + r.u[1] * n[1];
        if outward <= 1e-12 {
            continue;
        }
        // p + lam u = a + mu d
        let det = r.u[0] * (-d[1]) - r.u[1] * (-d[0]);
        if det.abs() < 1e-300 {
            continue;
        }
        let w = [a[0] - r.p[0], a[1] - r.p[1]];
        let lam = (w[0] * (-d[1]) - w[1] * (-d[0])) / det;
        let mu = (r.u[0] * w[1] - r.u[1] * w[0]) / det;
        if lam < -1e-12 || !(-1e-7..=1.0 + 1e-7).contains(&mu) {
            continue;
        }
        if best.is_none_or(|b| lam < b.0) {
            best = Some((lam, i, mu));
        }
    }
    let (lam, i, mu) = best?;
    let lam = lam.max(0.0);
    let at = [r.p[0] + lam * r.u[0], r.p[1] + lam * r.u[1]];
    let vtol = 1e-9;
    Some(if mu <= vtol {
        Exit::Vertex { slot: i }
    } else if mu >= 1.0 - vtol {
        Exit::Vertex { slot: (i + 1) % 3 }
    } else {
        Exit::Edge { slot: i, at }
    })
}

fn state(cls: Option<&InteriorClassification>, c: SubCell) -> Option<CellState> {
    cls.map(|k| k.state(c))
}

fn rank(cls: Option<&InteriorClassification>, t: usize) -> u8 {
    match state(cls, SubCell::Tri(t)) {
        Some(CellState::In) => 0,
        Some(CellState::Out) => 2,
        _ => 1,
    }
}

/// Extend a geodesic beyond its last point.
pub fn extend_geodesic(s: &SubdividedComplex, seed: &PiecewisePath, opts: &ExtendOptions<'_>) -> Result<Extension> {
    let c = s.parent();
    let kappa = c.kappa();
    if seed.faces.is_empty() || seed.length <= 0.0 {
        return Err(CatkError::InvalidSeed("seed must have positive length".into()));
    }
    let last = seed.faces.len() - 1;
    let f = seed.faces[last];
    let bad = || CatkError::InvalidSeed("seed segment outside its face".into());
    let a = c.chart_point(&seed.points[last], f).ok_or_else(bad)?.chart();
    let b = c.chart_point(seed.end(), f).ok_or_else(bad)?.chart();
    let u = norm([b[0] - a[0], b[1] - a[1]]);
    if !u[0].is_finite() {
        return Err(CatkError::InvalidSeed("degenerate final segment".into()));
    }
    // the triangle the ray enters just past the end, else the one carrying the seed just before it
    let probe = |sgn: f64| ModelPoint::from_chart(kappa, [b[0] + sgn * 1e-7 * s.h() * u[0], b[1] + sgn * 1e-7 * s.h() * u[1]]);
    let ahead = s.locate_in_face(f, &probe(1.0)?);
    let tri = match ahead.or_else(|_| s.locate_in_face(f, &probe(-1.0)?))? {
        SubCell::Tri(t) => t,
        SubCell::Edge(e) => {
            let mut cands: Vec<usize> = s.edges[e].tris.iter().copied().filter(|&t| s.tris[t].face == f).collect();
            cands.sort_by_key(|&t| (rank(opts.classification, t), t));
            *cands.first().ok_or_else(bad)?
        }
        SubCell::Vertex(v) => *s.vertex_tris(v).iter().find(|&&t| s.tris[t].face == f).ok_or_else(bad)?,
    };
    let cls = opts.classification;
    let mut ray = Ray { tri, p: b, u, cell: s.cell_of(seed.end())? };
    let mut out = PiecewisePath::trivial(*seed.end());
    let mut length = 0.0;
    let finish = |mut out: PiecewisePath, outcome| {
        out.recompute_length(c);
        out.bends.clear();
        let terminal = *out.end();
        Ok(Extension { path: out, outcome, terminal })
    };
    for _ in 0..1_000_000 {
        let tri = &s.tris[ray.tri];
        let face = tri.face;
        let Some(exit) = exit_of(s, &ray) else { return finish(out, ExtensionOutcome::Boundary) };
        let (x_chart, x_cell) = match exit {
            Exit::Edge { slot, at } => (at, SubCell::Edge(tri.edges[slot])),
            Exit::Vertex { slot } => (tri.chart[slot].chart(), SubCell::Vertex(tri.verts[slot])),
        };
        let pm = ModelPoint::from_chart(kappa, ray.p)?;
        let xm = ModelPoint::from_chart(kappa, x_chart)?;
        let seg = dist(&pm, &xm)?;
        let along = along_edge(s, ray.tri, ray.p, x_chart);
        // zero-length hops only move between cells at a point
        let seg_state = match along {
            _ if seg <= 1e-12 * s.h() => None,
            Some(e) => state(cls, SubCell::Edge(e)),
            None => state(cls, SubCell::Tri(ray.tri)),
        };
        if opts.stop_on_curve && seg_state == Some(CellState::Out) {
            let outcome = if state(cls, ray.cell) == Some(CellState::On) {
                ExtensionOutcome::MetCurve
            } else {
                ExtensionOutcome::LeftRegion
            };
            return finish(out, outcome);
        }
        if length + seg >= opts.max_length {
            let frac = if seg > 0.0 { (opts.max_length - length) / seg } else { 0.0 };
            let end = geodesic_point(&pm, &xm, frac)?;
            push_segment(s, &mut out, face, &pm, &end, opts.step)?;
            return finish(out, ExtensionOutcome::Budget);
        }
        let x_site = match x_cell {
            SubCell::Vertex(v) => s.vertices[v].site,
            _ => c.locate_face(face, &xm)?,
        };
        push_segment_to(s, &mut out, face, &pm, &xm, x_site, opts.step)?;
        length += seg;
        if opts.stop_on_curve && seg_state == Some(CellState::In) && state(cls, x_cell) == Some(CellState::On) {
            return finish(out, ExtensionOutcome::MetCurve);
        }
        let next = match x_cell {
            SubCell::Edge(e) => cross_edge(s, cls, &ray, e, x_chart)?,
            SubCell::Vertex(v) => turn_at_vertex(s, cls, &ray, v, x_chart)?,
            SubCell::Tri(_) => unreachable!("exits lie on edges"),
        };
        match next {
            Some(r) => ray = r,
            None => return finish(out, ExtensionOutcome::Boundary),
        }
    }
    finish(out, ExtensionOutcome::Budget)
}

/// Sub-edge of `t` containing both chart points, if any.
fn along_edge(s: &SubdividedComplex, t: usize, p: [f64; 2], x: [f64; 2]) -> Option<usize> {
    let c = s.tri_chart2(t);
    let off = |q: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = d[0].hypot(d[1]);
        ((q[0] - a[0]) * d[1] - (q[1] - a[1]) * d[0]).abs() / l / l
    };
    (0..3).find(|&i| {
        let (a, b) = (c[i], c[(i + 1) % 3]);
        off(p, a, b) < 1e-9 && off(x, a, b) < 1e-9
    })
    .map(|i| s.tris[t].edges[i])
}

fn push_segment(
    s: &SubdividedComplex,
    out: &mut PiecewisePath,
    f: FaceId,
    a: &ModelPoint,
    b: &ModelPoint,
    step: f64,
) -> Result<()> {
    let site = s.parent().locate_face(f, b)?;
    push_segment_to(s, out, f, a, b, site, step)
}

fn push_segment_to(
    s: &SubdividedComplex,
    out: &mut PiecewisePath,
    f: FaceId,
    a: &ModelPoint,
    b: &ModelPoint,
    site: ComplexPoint,
    step: f64,
) -> Result<()> {
    let l = dist(a, b)?;
    if l <= 1e-14 {
        return Ok(());
    }
    let n = ((l / step).ceil() as usize).clamp(1, 1_000_000);
    for k in 1..n {
        let m = geodesic_point(a, b, k as f64 / n as f64)?;
        out.points.push(s.parent().locate_face(f, &m)?);
        out.faces.push(f);
    }
    out.points.push(site);
    out.faces.push(f);
    Ok(())
}

fn cross_edge(
    s: &SubdividedComplex,
    cls: Option<&InteriorClassification>,
    ray: &Ray,
    e: usize,
    x: [f64; 2],
) -> Result<Option<Ray>> {
    let kappa = s.parent().kappa();
    let from = &s.tris[ray.tri];
    let mut cands: Vec<usize> = s.edges[e].tris.iter().copied().filter(|&t| t != ray.tri).collect();
    cands.sort_by_key(|&t| (rank(cls, t), t));
    let Some(&t) = cands.first() else { return Ok(None) };
    let to = &s.tris[t];
    if to.face == from.face {
        return Ok(Some(Ray { tri: t, p: x, u: ray.u, cell: SubCell::Edge(e) }));
    }
    let [eu, ew] = s.edges[e].ends;
    let idx = |tr: &crate::complex::SubTri, v: usize| tr.verts.iter().position(|&q| q == v).expect("edge vertex");
    let third = |tr: &crate::complex::SubTri| (0..3).find(|&i| tr.verts[i] != eu && tr.verts[i] != ew).expect("third");
    let (du, dw) = (from.chart[idx(from, eu)], from.chart[idx(from, ew)]);
    let (su, sw) = (to.chart[idx(to, eu)], to.chart[idx(to, ew)]);
    let side = |p: [f64; 2]| {
        let (a, b) = (du.chart(), dw.chart());
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    };
    let ref_side = side(from.chart[third(from)].chart());
    for h in [Handedness::Preserving, Handedness::Reversing] {
        let g = gluing_isometry(&su, &sw, &du, &dw, h)?;
        if side(g.apply(&to.chart[third(to)]).chart()) * ref_side < 0.0 {
            let inv = g.inverse();
            let edge_len = dist(&du, &dw)?;
            let delta = 1e-3 * edge_len.min(1.0);
            let behind = ModelPoint::from_chart(kappa, [x[0] - delta * ray.u[0], x[1] - delta * ray.u[1]])?;
            let p2 = inv.apply(&ModelPoint::from_chart(kappa, x)?).chart();
            let b2 = inv.apply(&behind).chart();
            let u2 = norm([p2[0] - b2[0], p2[1] - b2[1]]);
            return Ok(Some(Ray { tri: t, p: p2, u: u2, cell: SubCell::Edge(e) }));
        }
    }
    Err(CatkError::InvalidGluing("could not unfold across edge".into()))
}

/// Link directions this close to an arc end are taken to run along the sub-edge.
const EDGE_SNAP: f64 = 1e-6;

fn turn_at_vertex(
    s: &SubdividedComplex,
    cls: Option<&InteriorClassification>,
    ray: &Ray,
    v: usize,
    x: [f64; 2],
) -> Result<Option<Ray>> {
    let kappa = s.parent().kappa();
    let link = SubLink::new(s, v, Mask::ALL);
    let Some(arc) = link.arc_of_tri(ray.tri) else { return Ok(None) };
    let scale = s.edges[s.tris[ray.tri].edges[0]].length.min(1.0);
    let behind = ModelPoint::from_chart(kappa, [x[0] - 1e-3 * scale * ray.u[0], x[1] - 1e-3 * scale * ray.u[1]])?;
    let din = link.direction(s, arc, &behind);
    let mut cands = link.at_distance(din, PI, 1e-7);
    cands.sort_by(|a, b| {
        let (ta, tb) = (link.arcs[a.arc].tri, link.arcs[b.arc].tri);
        (rank(cls, ta), ta).cmp(&(rank(cls, tb), tb)).then(a.x.total_cmp(&b.x))
    });
    let Some(d) = cands.first() else { return Ok(None) };
    let t = link.arcs[d.arc].tri;
    let (q, f) = match link.edge_end(s, *d, EDGE_SNAP) {
        // directions along a sub-edge aim at its far end exactly, so the ray stays on the edge
        Some(end) => end,
        None => {
            let (target, f) = link.ray_point(s, *d);
            (target.chart(), f)
        }
    };
    let p = s.vertex_chart(v, f).expect("vertex in face").chart();
    let u = norm([q[0] - p[0], q[1] - p[1]]);
    Ok(Some(Ray { tri: t, p, u, cell: SubCell::Vertex(v) }))
}
