//! Straightening of polylines: the triangles a path crosses are unfolded into
//! one model chart and the funnel algorithm finds the shortest path through
//! them. Bends at vertices where the other side of the link is shorter than π
//! are rerouted around that side and the channel is rebuilt.

use std::f64::consts::PI;

use super::link::{dir_toward, SubLink};
use super::path::PiecewisePath;
use super::Mask;
use crate::complex::{ComplexPoint, FaceId, SubCell, SubdividedComplex};
use crate::model::{dist, gluing_isometry, Handedness, ModelIsometry, ModelPoint};

/// Bends whose link distance falls short of π by more than this are split.
const SPLIT_TOL: f64 = 1e-7;
/// Fraction of the local triangle size used to place detour points.
const DETOUR_FRAC: f64 = 1e-3;

#[derive(Clone, Debug)]
pub(crate) struct Polyline {
    pub points: Vec<ComplexPoint>,
    pub faces: Vec<FaceId>,
}

impl Polyline {
    pub fn of_path(p: &PiecewisePath) -> Self {
        Polyline { points: p.points.clone(), faces: p.faces.clone() }
    }
}

fn shares_edge(s: &SubdividedComplex, a: usize, b: usize) -> Option<usize> {
    s.tris[a].edges.iter().copied().find(|e| s.tris[b].edges.contains(e))
}

fn common_vertex(s: &SubdividedComplex, a: usize, b: usize) -> Option<usize> {
    s.tris[a].verts.iter().copied().find(|v| s.tris[b].verts.contains(v))
}

/// Append `t`; revisiting a triangle erases the loop since shortest paths cross each triangle once.
fn append(seq: &mut Vec<usize>, t: usize) {
    match seq.iter().rposition(|&x| x == t) {
        Some(j) => seq.truncate(j + 1),
        None => seq.push(t),
    }
}

/// Append `t` to a channel, filling the fan around a shared vertex when needed.
fn push_tri(s: &SubdividedComplex, mask: Mask<'_>, seq: &mut Vec<usize>, t: usize) -> Option<()> {
    let Some(&last) = seq.last() else {
        seq.push(t);
        return Some(());
    };
    if last == t {
        return Some(());
    }
    if shares_edge(s, last, t).is_some() {
        append(seq, t);
        return Some(());
    }
    let v = common_vertex(s, last, t)?;
    let link = SubLink::new(s, v, mask);
    let (a, b) = (link.arc_of_tri(last)?, link.arc_of_tri(t)?);
    let from = super::link::Dir { arc: a, x: 0.5 * link.arcs[a].angle };
    let to = super::link::Dir { arc: b, x: 0.5 * link.arcs[b].angle };
    let (d, arcs) = link.route(from, to);
    if !d.is_finite() {
        return None;
    }
    for k in arcs.into_iter().skip(1) {
        append(seq, link.arcs[k].tri);
    }
    Some(())
}

/// Triangles covering the polyline in order, or `None` if it runs outside the two-dimensional part of the mask.
pub(crate) fn channel(s: &SubdividedComplex, mask: Mask<'_>, pl: &Polyline) -> Option<Vec<usize>> {
    let c = s.parent();
    let mut seq: Vec<usize> = Vec::new();
    for i in 0..pl.faces.len() {
        let f = pl.faces[i];
        let a = c.chart_point(&pl.points[i], f)?;
        let b = c.chart_point(&pl.points[i + 1], f)?;
        if dist(&a, &b).ok()? <= 1e-14 {
            continue;
        }
        let pieces = s.trace_segment(f, &a, &b);
        if pieces.is_empty() || pieces[0].t0 > 1e-9 || pieces.last()?.t1 < 1.0 - 1e-9 {
            return None;
        }
        for p in pieces {
            match p.cell {
                SubCell::Tri(t) => {
                    if !mask.tri(t) {
                        return None;
                    }
                    push_tri(s, mask, &mut seq, t)?;
                }
                SubCell::Edge(e) => {
                    if !mask.edge(e) {
                        return None;
                    }
                    if seq.last().is_some_and(|&l| s.tris[l].edges.contains(&e)) {
                        continue;
                    }
                    let mut cands: Vec<usize> = s.edges[e].tris.iter().copied().filter(|&t| mask.tri(t)).collect();
                    if cands.is_empty() {
                        return None;
                    }
                    cands.sort_by_key(|&t| {
                        let rank = match seq.last() {
                            Some(&l) if shares_edge(s, l, t).is_some() => 0,
                            Some(&l) if common_vertex(s, l, t).is_some() => 1,
                            _ => 2,
                        };
                        (rank, s.tris[t].face != f, t)
                    });
                    push_tri(s, mask, &mut seq, cands[0])?;
                }
                SubCell::Vertex(v) => {
                    if !mask.vertex(v) {
                        return None;
                    }
                }
            }
        }
    }
    if seq.is_empty() {
        let cell = s.cell_of(&pl.points[0]).ok()?;
        let t = match cell {
            SubCell::Tri(t) => t,
            SubCell::Edge(e) => *s.edges[e].tris.iter().find(|&&t| mask.tri(t))?,
            SubCell::Vertex(v) => *s.vertex_tris(v).iter().find(|&&t| mask.tri(t))?,
        };
        mask.tri(t).then_some(())?;
        seq.push(t);
    }
    Some(seq)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Isometries placing each channel triangle's face chart into the chart of the first.
fn unfold(s: &SubdividedComplex, chan: &[usize]) -> Option<Vec<ModelIsometry>> {
    let kappa = s.parent().kappa();
    let mut iso = vec![ModelIsometry::identity(kappa)];
    for k in 1..chan.len() {
        let (p, q) = (&s.tris[chan[k - 1]], &s.tris[chan[k]]);
        if p.face == q.face {
            iso.push(iso[k - 1]);
            continue;
        }
        let shared: Vec<usize> = q.verts.iter().copied().filter(|v| p.verts.contains(v)).collect();
        if shared.len() != 2 {
            return None;
        }
        let idx = |t: &crate::complex::SubTri, v: usize| t.verts.iter().position(|&x| x == v).expect("shared vertex");
        let third = |t: &crate::complex::SubTri| (0..3).find(|&i| !shared.contains(&t.verts[i])).expect("third vertex");
        let dst_u = iso[k - 1].apply(&p.chart[idx(p, shared[0])]);
        let dst_w = iso[k - 1].apply(&p.chart[idx(p, shared[1])]);
        let x_prev = iso[k - 1].apply(&p.chart[third(p)]).chart();
        let (src_u, src_w) = (q.chart[idx(q, shared[0])], q.chart[idx(q, shared[1])]);
        let side_prev = orient(dst_u.chart(), dst_w.chart(), x_prev);
        let mut found = None;
        for h in [Handedness::Preserving, Handedness::Reversing] {
            let g = gluing_isometry(&src_u, &src_w, &dst_u, &dst_w, h).ok()?;
            let x_new = g.apply(&q.chart[third(q)]).chart();
            if orient(dst_u.chart(), dst_w.chart(), x_new) * side_prev < 0.0 {
                found = Some(g);
                break;
            }
        }
        iso.push(found?);
    }
    Some(iso)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tag {
    Start,
    End,
    Vertex(usize),
}

#[derive(Clone, Copy, Debug)]
struct FPoint {
    at: [f64; 2],
    tag: Tag,
}

/// Shortest path through an unfolded channel; returns (portal index, point) per apex.
///
/// Portals are indexed from 1; the start has index 0 and the end `portals.len() + 1`.
fn funnel(start: FPoint, end: FPoint, portals: &[(FPoint, FPoint)]) -> Vec<(usize, FPoint)> {
    let n = portals.len();
    let portal = |i: usize| if i <= n { portals[i - 1] } else { (end, end) };
    let same = |a: &FPoint, b: &FPoint| a.tag == b.tag && a.at == b.at;
    let mut out = vec![(0, start)];
    let (mut apex, mut left, mut right) = (start, start, start);
    let (mut left_i, mut right_i) = (0usize, 0usize);
    let mut i = 1;
    while i <= n + 1 {
        let (pl, pr) = portal(i);
        if orient(apex.at, right.at, pr.at) >= 0.0 {
            if same(&apex, &right) || orient(apex.at, left.at, pr.at) < 0.0 {
                right = pr;
                right_i = i;
            } else {
                apex = left;
                out.push((left_i, apex));
                right = apex;
                right_i = left_i;
                i = left_i + 1;
                continue;
            }
        }
        if orient(apex.at, left.at, pl.at) <= 0.0 {
            if same(&apex, &left) || orient(apex.at, right.at, pl.at) > 0.0 {
                left = pl;
                left_i = i;
            } else {
                apex = right;
                out.push((right_i, apex));
                left = apex;
                left_i = right_i;
                i = right_i + 1;
                continue;
            }
        }
        i += 1;
    }
    out.push((n + 1, end));
    out
}

/// Shortest path homotopic to the polyline within its channel.
fn funnel_path(s: &SubdividedComplex, mask: Mask<'_>, pl: &Polyline) -> Option<PiecewisePath> {
    let c = s.parent();
    let kappa = c.kappa();
    let chan = channel(s, mask, pl)?;
    let iso = unfold(s, &chan)?;
    let m = chan.len() - 1;
    let placed = |k: usize, i: usize| iso[k].apply(&s.tris[chan[k]].chart[i]);
    let start_pt = iso[0].apply(&c.chart_point(&pl.points[0], s.tris[chan[0]].face)?);
    let end_pt = iso[m].apply(&c.chart_point(pl.points.last()?, s.tris[chan[m]].face)?);
    let mut portals = Vec::with_capacity(m);
    let mut portal_edges = Vec::with_capacity(m);
    for k in 1..=m {
        let p = &s.tris[chan[k - 1]];
        let e = shares_edge(s, chan[k - 1], chan[k])?;
        let [u, w] = s.edges[e].ends;
        let pu = placed(k - 1, p.verts.iter().position(|&x| x == u)?);
        let pw = placed(k - 1, p.verts.iter().position(|&x| x == w)?);
        let x = placed(k - 1, (0..3).find(|&i| p.verts[i] != u && p.verts[i] != w)?);
        let fu = FPoint { at: pu.chart(), tag: Tag::Vertex(u) };
        let fw = FPoint { at: pw.chart(), tag: Tag::Vertex(w) };
        // (left, right) as seen travelling from x across the edge
        if orient(x.chart(), pu.chart(), pw.chart()) > 0.0 {
            portals.push((fw, fu));
        } else {
            portals.push((fu, fw));
        }
        portal_edges.push((e, pu));
    }
    let apexes = funnel(
        FPoint { at: start_pt.chart(), tag: Tag::Start },
        FPoint { at: end_pt.chart(), tag: Tag::End },
        &portals,
    );
    // crossing point and bend flag per portal
    let mut xs: Vec<(ComplexPoint, bool)> = Vec::with_capacity(m + 2);
    xs.push((pl.points[0], false));
    for j in 0..apexes.len() - 1 {
        let (ia, a) = apexes[j];
        let (ib, b) = apexes[j + 1];
        for k in ia + 1..=ib.min(m) {
            let (l, r) = portals[k - 1];
            let (e, p0) = portal_edges[k - 1];
            if k == ib {
                let Tag::Vertex(v) = b.tag else { unreachable!("interior apex is a vertex") };
                xs.push((s.vertices[v].site, true));
                continue;
            }
            let (ol, or) = (orient(a.at, b.at, l.at), orient(a.at, b.at, r.at));
            let lam = if (ol - or).abs() > 0.0 { (ol / (ol - or)).clamp(0.0, 1.0) } else { 0.0 };
            let q = [l.at[0] + lam * (r.at[0] - l.at[0]), l.at[1] + lam * (r.at[1] - l.at[1])];
            let site = if lam <= 1e-12 {
                vertex_site(s, l.tag)
            } else if lam >= 1.0 - 1e-12 {
                vertex_site(s, r.tag)
            } else {
                let qp = ModelPoint::from_chart(kappa, q).ok()?;
                s.subedge_site(e, dist(&p0, &qp).ok()?)
            };
            xs.push((site, false));
        }
    }
    xs.push((*pl.points.last()?, false));
    assemble(s, &chan, &xs)
}

fn vertex_site(s: &SubdividedComplex, t: Tag) -> ComplexPoint {
    match t {
        Tag::Vertex(v) => s.vertices[v].site,
        _ => unreachable!("portal endpoints are vertices"),
    }
}

/// Collapse per-portal crossings into a path with breakpoints at bends and face changes.
fn assemble(s: &SubdividedComplex, chan: &[usize], xs: &[(ComplexPoint, bool)]) -> Option<PiecewisePath> {
    let c = s.parent();
    let mut points = vec![xs[0].0];
    let mut bend = vec![false];
    let mut faces: Vec<FaceId> = Vec::new();
    for k in 0..chan.len() {
        let f = s.tris[chan[k]].face;
        let (next, is_bend) = xs[k + 1];
        let l = c.face_distance(f, points.last()?, &next)?;
        if l <= 1e-13 {
            *bend.last_mut()? |= is_bend;
            continue;
        }
        let n = points.len();
        if n >= 2 && !bend[n - 1] && faces.last() == Some(&f) {
            points.pop();
            bend.pop();
            faces.pop();
        }
        points.push(next);
        bend.push(is_bend);
        faces.push(f);
    }
    let n = points.len();
    if n == 1 {
        return Some(PiecewisePath::trivial(points[0]));
    }
    let mut p = PiecewisePath { points, faces, length: 0.0, bends: (1..n - 1).filter(|&i| bend[i]).collect() };
    p.recompute_length(c);
    Some(p)
}

/// Replace bends that are not locally shortest with detours on the short side of the link.
fn split_bends(s: &SubdividedComplex, mask: Mask<'_>, p: &PiecewisePath) -> Option<Polyline> {
    let mut points = Vec::new();
    let mut faces = Vec::new();
    let mut changed = false;
    points.push(p.points[0]);
    for i in 1..p.points.len() {
        let is_interior = i + 1 < p.points.len();
        let v = match s.cell_of(&p.points[i]) {
            Ok(SubCell::Vertex(v)) if is_interior && p.bends.contains(&i) => Some(v),
            _ => None,
        };
        let detour = v.and_then(|v| {
            let link = SubLink::new(s, v, mask);
            let din = dir_toward(s, &link, &p.points[i], &p.points[i - 1], p.faces[i - 1])?;
            let dout = dir_toward(s, &link, &p.points[i], &p.points[i + 1], p.faces[i])?;
            let (d, arcs) = link.route(din, dout);
            if d >= PI - SPLIT_TOL {
                return None;
            }
            // the first and last detour points stay on the original rays so the pieces outside the detour are unchanged
            let face_of = |k: usize| s.tris[link.arcs[k].tri].face;
            let mut pts = vec![(link.near_ray_point(s, din, DETOUR_FRAC), face_of(arcs[0]))];
            for (j, w) in arcs.windows(2).enumerate() {
                let (fa, fb) = (face_of(w[0]), face_of(w[1]));
                if fa != fb {
                    let node = link.shared_node(w[0], w[1])?;
                    pts.push((link.near_edge_point(s, node, DETOUR_FRAC), fa));
                }
                if j + 2 < arcs.len() {
                    pts.push((link.near_point(s, w[1], DETOUR_FRAC), fb));
                }
            }
            pts.push((link.near_ray_point(s, dout, DETOUR_FRAC), face_of(dout.arc)));
            Some(pts)
        });
        match detour {
            Some(pts) => {
                changed = true;
                // segment into the detour uses the incoming face, each later piece the face of its target
                faces.push(p.faces[i - 1]);
                for (k, (q, f)) in pts.iter().enumerate() {
                    if k > 0 {
                        faces.push(*f);
                    }
                    points.push(*q);
                }
            }
            None => {
                faces.push(p.faces[i - 1]);
                points.push(p.points[i]);
            }
        }
    }
    changed.then_some(Polyline { points, faces })
}

/// Straighten a 2-dimensional polyline section; `None` if it cannot be channelled.
fn straighten_section(s: &SubdividedComplex, mask: Mask<'_>, pl: &Polyline) -> Option<PiecewisePath> {
    let mut cur = funnel_path(s, mask, pl)?;
    let limit = 20 + 4 * cur.bends.len();
    for _ in 0..limit {
        let Some(next) = split_bends(s, mask, &cur) else { break };
        match funnel_path(s, mask, &next) {
            Some(p) if p.length <= cur.length + 1e-12 => cur = p,
            _ => break,
        }
    }
    Some(cur)
}

/// Shortest path near the given one: funnel straightening on two-dimensional stretches.
pub(crate) fn straighten(s: &SubdividedComplex, mask: Mask<'_>, path: &PiecewisePath) -> PiecewisePath {
    let c = s.parent();
    if path.faces.is_empty() {
        return path.clone();
    }
    let whole = Polyline::of_path(path);
    if let Some(p) = straighten_section(s, mask, &whole) {
        if p.length <= path.length + 1e-12 {
            return p;
        }
        return path.clone();
    }
    // split into stretches the channel builder accepts and keep the rest
    let n = path.faces.len();
    let two_d: Vec<bool> = (0..n)
        .map(|i| {
            channel(
                s,
                mask,
                &Polyline { points: vec![path.points[i], path.points[i + 1]], faces: vec![path.faces[i]] },
            )
            .is_some()
        })
        .collect();
    let mut out = PiecewisePath::trivial(path.points[0]);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && two_d[j] == two_d[i] {
            j += 1;
        }
        let piece = Polyline { points: path.points[i..=j].to_vec(), faces: path.faces[i..j].to_vec() };
        let straight = if two_d[i] { straighten_section(s, mask, &piece) } else { None };
        let seg = match straight {
            Some(p) => p,
            None => {
                let mut p = PiecewisePath { points: piece.points, faces: piece.faces, length: 0.0, bends: vec![] };
                p.bends = (1..p.points.len() - 1).collect();
                p.recompute_length(c);
                p
            }
        };
        out.concat(c, &seg);
        i = j;
    }
    if out.length <= path.length + 1e-12 {
        out
    } else {
        path.clone()
    }
}
