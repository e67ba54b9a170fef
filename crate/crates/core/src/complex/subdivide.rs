//! Triangulated refinements of a complex.
//!
//! Each parent face is triangulated in its own chart with a constrained
//! Delaunay triangulation. Points on parent edges are generated from edge
//! arclength, so every face glued to an edge sees the same points.

use std::collections::{HashMap, HashSet};

use spade::handles::{FixedFaceHandle, FixedVertexHandle, InnerTag};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{Complex, ComplexPoint, EdgeId, FaceId};
use crate::error::{CatkError, Result};
use crate::model::{dist, geodesic_point, ModelPoint};

/// Barycentric tolerance for chart point location.
const BARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SubVertex {
    pub site: ComplexPoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Carrier {
    ParentEdge(EdgeId),
    Face(FaceId),
}

#[derive(Clone, Debug)]
pub struct SubEdge {
    pub ends: [usize; 2],
    pub length: f64,
    pub carrier: Carrier,
    pub tris: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SubTri {
    pub face: FaceId,
    /// Counter-clockwise in the face chart.
    pub verts: [usize; 3],
    /// `edges[i]` joins `verts[i]` and `verts[(i + 1) % 3]`.
    pub edges: [usize; 3],
    /// +1 when `edges[i]` is oriented from `verts[i]` to `verts[i + 1]`.
    pub signs: [i8; 3],
    pub chart: [ModelPoint; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubCell {
    Vertex(usize),
    Edge(usize),
    Tri(usize),
}

/// A polyline to be included in the 1-skeleton.
///
/// `faces[i]` optionally names the face carrying segment `i`; otherwise the
/// lowest-id common face of its endpoints is used.
#[derive(Clone, Debug)]
pub struct Seam {
    pub points: Vec<ComplexPoint>,
    pub faces: Vec<Option<FaceId>>,
    pub closed: bool,
}

impl Seam {
    pub fn closed(points: Vec<ComplexPoint>) -> Self {
        let n = points.len();
        Seam { points, faces: vec![None; n], closed: true }
    }

    pub fn open(points: Vec<ComplexPoint>) -> Self {
        let n = points.len().saturating_sub(1);
        Seam { points, faces: vec![None; n], closed: false }
    }

    fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len().saturating_sub(1)
        }
    }
}

/// A seam as it appears in the subdivision.
#[derive(Clone, Debug, PartialEq)]
pub struct SeamTrace {
    pub vertices: Vec<usize>,
    /// (sub-edge, +1 if traversed from `ends[0]` to `ends[1]`).
    pub edges: Vec<(usize, i8)>,
    pub closed: bool,
}

/// A maximal piece of a chart segment inside one cell; `t0`, `t1` are chart fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePiece {
    pub t0: f64,
    pub t1: f64,
    pub cell: SubCell,
}

#[derive(Clone, Debug)]
struct Grid {
    min: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<usize>>,
}

impl Grid {
    fn coord(&self, p: [f64; 2]) -> (usize, usize) {
        let i = ((p[0] - self.min[0]) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p[1] - self.min[1]) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    fn bin(&self, p: [f64; 2]) -> &[usize] {
        let (i, j) = self.coord(p);
        &self.bins[j * self.nx + i]
    }
}

#[derive(Clone, Debug)]
pub struct SubdividedComplex {
    parent: Complex,
    h: f64,
    pub vertices: Vec<SubVertex>,
    pub edges: Vec<SubEdge>,
    pub tris: Vec<SubTri>,
    vertex_edges: Vec<Vec<usize>>,
    vertex_tris: Vec<Vec<usize>>,
    parent_vertex: Vec<usize>,
    edge_chain: Vec<Vec<(f64, usize)>>,
    edge_subedges: Vec<Vec<usize>>,
    face_tris: Vec<Vec<usize>>,
    grids: Vec<Grid>,
    seams: Vec<SeamTrace>,
}

/// Snap `t` to an existing parameter within `tol`, else insert it.
fn snap_param(params: &mut Vec<f64>, t: f64, tol: f64) -> f64 {
    if let Some(&p) = params.iter().find(|&&p| (p - t).abs() <= tol) {
        return p;
    }
    params.push(t);
    params.sort_by(f64::total_cmp);
    t
}

fn seg_dist2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let s = if l2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + s * d[0] - p[0], a[1] + s * d[1] - p[1]];
    q[0] * q[0] + q[1] * q[1]
}

pub fn barycentric(p: [f64; 2], t: &[[f64; 2]; 3]) -> [f64; 3] {
    let [a, b, c] = *t;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

enum SegmentKind {
    /// Runs along the face boundary through these sub-vertices.
    Boundary(Vec<usize>),
    /// Crosses the face; constrained in the triangulation.
    Interior,
}

struct FaceBuild {
    boundary: Vec<usize>,
    boundary_charts: Vec<ModelPoint>,
    boundary_edges: HashMap<(usize, usize), EdgeId>,
}

impl SubdividedComplex {
    /// Triangulate `parent` with cell diameter at most `h`, including every seam in the 1-skeleton.
    pub fn new(parent: &Complex, h: f64, seams: &[Seam]) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(CatkError::InvalidComplex(format!("mesh parameter must be positive, got {h}")));
        }
        let kappa = parent.kappa();
        let snap = h / 10.0;
        let spacing = h / 2.0;

        // canonical seam points and segment faces
        let mut seam_pts: Vec<Vec<ComplexPoint>> = Vec::new();
        let mut seam_faces: Vec<Vec<FaceId>> = Vec::new();
        for (si, s) in seams.iter().enumerate() {
            if s.points.len() < 2 || s.faces.len() != s.segment_count() {
                return Err(CatkError::InvalidSeam(format!("seam {si} is malformed")));
            }
            let pts: Vec<ComplexPoint> =
                s.points.iter().map(|p| parent.canonical(p)).collect::<Result<_>>()?;
            let n = pts.len();
            let mut faces = Vec::new();
            for k in 0..s.segment_count() {
                let (a, b) = (&pts[k], &pts[(k + 1) % n]);
                let common = parent.common_faces(a, b);
                let f = match s.faces[k] {
                    Some(f) if common.contains(&f) => f,
                    Some(f) => {
                        return Err(CatkError::InvalidSeam(format!(
                            "seam {si} segment {k} does not lie in face {}",
                            parent.face(f).label
                        )))
                    }
                    None => *common.first().ok_or_else(|| {
                        CatkError::InvalidSeam(format!("seam {si} segment {k} leaves the complex"))
                    })?,
                };
                faces.push(f);
            }
            seam_pts.push(pts);
            seam_faces.push(faces);
        }

        // shared parameters along parent edges
        let ne = parent.edges().len();
        let mut fixed: Vec<Vec<f64>> =
            parent.edges().iter().map(|e| vec![0.0, e.length]).collect();
        for pts in seam_pts.iter_mut() {
            for p in pts.iter_mut() {
                if let ComplexPoint::Edge { edge, t } = *p {
                    let t = snap_param(&mut fixed[edge.0], t, snap);
                    *p = parent.locate_edge(edge, t)?;
                }
            }
        }

        let mut vertices: Vec<SubVertex> = (0..parent.vertices().len())
            .map(|v| SubVertex { site: ComplexPoint::Vertex(super::VertexId(v)) })
            .collect();
        let parent_vertex: Vec<usize> = (0..vertices.len()).collect();
        let mut edge_chain: Vec<Vec<(f64, usize)>> = Vec::with_capacity(ne);
        for (e, edge) in parent.edges().iter().enumerate() {
            let fx = &fixed[e];
            let mut chain = vec![(0.0, parent_vertex[edge.ends[0].0])];
            for w in fx.windows(2) {
                let n = ((w[1] - w[0]) / spacing).ceil().max(1.0) as usize;
                for k in 1..=n {
                    let t = if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 };
                    if t >= edge.length {
                        break;
                    }
                    let id = vertices.len();
                    vertices.push(SubVertex { site: ComplexPoint::Edge { edge: EdgeId(e), t } });
                    chain.push((t, id));
                }
            }
            chain.push((edge.length, parent_vertex[edge.ends[1].0]));
            edge_chain.push(chain);
        }

        let mut sub = SubdividedComplex {
            parent: parent.clone(),
            h,
            vertices,
            edges: vec![],
            tris: vec![],
            vertex_edges: vec![],
            vertex_tris: vec![],
            parent_vertex,
            edge_chain,
            edge_subedges: vec![vec![]; ne],
            face_tris: vec![vec![]; parent.faces().len()],
            grids: vec![],
            seams: vec![],
        };

        let mut edge_key: HashMap<(usize, usize, Carrier), usize> = HashMap::new();
        // per seam segment: vertex run and its carriers
        let mut seg_runs: Vec<Vec<Option<(Vec<usize>, Vec<Carrier>)>>> =
            seam_faces.iter().map(|f| vec![None; f.len()]).collect();

        for fi in 0..parent.faces().len() {
            let f = FaceId(fi);
            let fb = sub.face_boundary(f)?;
            let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
                ConstrainedDelaunayTriangulation::new();
            let mut owner: Vec<usize> = Vec::new();
            let mut charts: HashMap<usize, ModelPoint> = HashMap::new();
            let insert = |cdt: &mut ConstrainedDelaunayTriangulation<Point2<f64>>,
                              owner: &mut Vec<usize>,
                              id: usize,
                              p: [f64; 2]|
             -> Result<FixedVertexHandle> {
                let h = cdt
                    .insert(Point2::new(p[0], p[1]))
                    .map_err(|e| CatkError::InvalidComplex(format!("triangulation failed: {e:?}")))?;
                if h.index() >= owner.len() {
                    owner.resize(h.index() + 1, usize::MAX);
                }
                if owner[h.index()] == usize::MAX {
                    owner[h.index()] = id;
                }
                Ok(h)
            };
            let mut handles: HashMap<usize, FixedVertexHandle> = HashMap::new();
            for (k, &v) in fb.boundary.iter().enumerate() {
                let c = fb.boundary_charts[k];
                charts.insert(v, c);
                let hd = insert(&mut cdt, &mut owner, v, c.chart())?;
                handles.insert(v, hd);
            }
            let nb = fb.boundary.len();
            for k in 0..nb {
                let (a, b) = (handles[&fb.boundary[k]], handles[&fb.boundary[(k + 1) % nb]]);
                cdt.try_add_constraint(a, b);
            }
            let mut constraint_segs: Vec<([f64; 2], [f64; 2])> = (0..nb)
                .map(|k| (fb.boundary_charts[k].chart(), fb.boundary_charts[(k + 1) % nb].chart()))
                .collect();

            // seams
            let mut interior_seam: Vec<(usize, ModelPoint)> = Vec::new();
            for (si, pts) in seam_pts.iter().enumerate() {
                let n = pts.len();
                for (k, &sf) in seam_faces[si].iter().enumerate() {
                    if sf != f {
                        continue;
                    }
                    let (pa, pb) = (pts[k], pts[(k + 1) % n]);
                    let ca = parent.chart_point(&pa, f).expect("seam point in face");
                    let cb = parent.chart_point(&pb, f).expect("seam point in face");
                    let mut ends = [0usize; 2];
                    for (slot, (p, c)) in [(pa, ca), (pb, cb)].into_iter().enumerate() {
                        ends[slot] = match p {
                            ComplexPoint::Face { .. } => {
                                let found = interior_seam
                                    .iter()
                                    .find(|(_, q)| dist(q, &c).is_ok_and(|d| d <= snap));
                                match found {
                                    Some(&(id, _)) => id,
                                    None => {
                                        let id = sub.vertices.len();
                                        sub.vertices.push(SubVertex { site: ComplexPoint::Face { face: f, at: c } });
                                        interior_seam.push((id, c));
                                        id
                                    }
                                }
                            }
                            _ => sub.boundary_vertex(&p).expect("boundary seam point"),
                        };
                    }
                    if ends[0] == ends[1] {
                        seg_runs[si][k] = Some((vec![ends[0]], vec![]));
                        continue;
                    }
                    match sub.classify_segment(&fb, ends, &ca, &cb)? {
                        SegmentKind::Boundary(run) => {
                            let carriers = run
                                .windows(2)
                                .map(|w| {
                                    let key = (w[0].min(w[1]), w[0].max(w[1]));
                                    Carrier::ParentEdge(fb.boundary_edges[&key])
                                })
                                .collect();
                            seg_runs[si][k] = Some((run, carriers));
                        }
                        SegmentKind::Interior => {
                            let len = dist(&ca, &cb)?;
                            let m = (len / spacing).ceil().max(1.0) as usize;
                            let mut ids = vec![ends[0]];
                            let mut cs = vec![ca];
                            for j in 1..m {
                                let c = geodesic_point(&ca, &cb, j as f64 / m as f64)?;
                                let id = sub.vertices.len();
                                sub.vertices.push(SubVertex { site: ComplexPoint::Face { face: f, at: c } });
                                ids.push(id);
                                cs.push(c);
                            }
                            ids.push(ends[1]);
                            cs.push(cb);
                            let mut run = vec![ends[0]];
                            for j in 0..ids.len() {
                                charts.insert(ids[j], cs[j]);
                                if let std::collections::hash_map::Entry::Vacant(e) = handles.entry(ids[j]) {
                                    let hd = insert(&mut cdt, &mut owner, ids[j], cs[j].chart())?;
                                    e.insert(hd);
                                }
                            }
                            for j in 0..ids.len() - 1 {
                                let (a, b) = (handles[&ids[j]], handles[&ids[j + 1]]);
                                let added = cdt.try_add_constraint(a, b);
                                if added.is_empty() {
                                    return Err(CatkError::InvalidSeam(format!(
                                        "seams cross inside face {}",
                                        parent.face(f).label
                                    )));
                                }
                                let (p0, p1) = (cs[j].chart(), cs[j + 1].chart());
                                let dir = [p1[0] - p0[0], p1[1] - p0[1]];
                                let mut mids: Vec<(f64, usize)> = Vec::new();
                                for e in &added {
                                    let de = cdt.directed_edge(*e);
                                    for vh in [de.from(), de.to()] {
                                        let id = owner[vh.fix().index()];
                                        if id != ids[j] && id != ids[j + 1] && !mids.iter().any(|m| m.1 == id) {
                                            let pos = vh.position();
                                            let s = (pos.x - p0[0]) * dir[0] + (pos.y - p0[1]) * dir[1];
                                            mids.push((s, id));
                                        }
                                    }
                                }
                                mids.sort_by(|a, b| a.0.total_cmp(&b.0));
                                run.extend(mids.into_iter().map(|m| m.1));
                                run.push(ids[j + 1]);
                                constraint_segs.push((p0, p1));
                            }
                            let carriers = vec![Carrier::Face(f); run.len() - 1];
                            seg_runs[si][k] = Some((run, carriers));
                        }
                    }
                }
            }

            // interior lattice
            let scale = sub.chart_scale(f)?;
            let s = 0.6 * h * scale;
            let poly: Vec<[f64; 2]> = parent.face(f).corners.iter().map(|c| c.chart()).collect();
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in &poly {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            let margin2 = (0.5 * s) * (0.5 * s);
            let dy = s * 3f64.sqrt() / 2.0;
            let rows = ((hi[1] - lo[1]) / dy).floor() as usize;
            for j in 1..=rows {
                let y = lo[1] + j as f64 * dy;
                let off = if j % 2 == 1 { s / 2.0 } else { 0.0 };
                let mut x = lo[0] + off;
                while x < hi[0] {
                    let p = [x, y];
                    x += s;
                    let inside = (0..poly.len()).all(|i| {
                        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) > 0.0
                    });
                    if !inside || constraint_segs.iter().any(|(a, b)| seg_dist2(p, *a, *b) < margin2) {
                        continue;
                    }
                    let at = ModelPoint::from_chart(parent.kappa(), p)?;
                    let id = sub.vertices.len();
                    sub.vertices.push(SubVertex { site: ComplexPoint::Face { face: f, at } });
                    charts.insert(id, at);
                    insert(&mut cdt, &mut owner, id, p)?;
                }
            }

            // refine until every edge is at most h
            let on_tol = (1e-9 * s) * (1e-9 * s);
            for _ in 0..64 {
                let outside = exterior_faces(&cdt);
                let mut mids = Vec::new();
                for e in cdt.undirected_edges() {
                    let de = e.as_directed();
                    let interior = [de.face(), de.rev().face()]
                        .iter()
                        .any(|f| f.as_inner().is_some_and(|f| !outside.contains(&f.fix())));
                    if e.is_constraint_edge() || !interior {
                        continue;
                    }
                    let [a, b] = e.vertices();
                    let (ia, ib) = (owner[a.fix().index()], owner[b.fix().index()]);
                    let (ca, cb) = (charts[&ia], charts[&ib]);
                    if dist(&ca, &cb)? > h {
                        let m = geodesic_point(&ca, &cb, 0.5)?;
                        // chords between nearly collinear boundary points
                        let on_seg = constraint_segs.iter().any(|(a, b)| seg_dist2(m.chart(), *a, *b) < on_tol);
                        if !on_seg {
                            mids.push(m);
                        }
                    }
                }
                if mids.is_empty() {
                    break;
                }
                for m in mids {
                    let id = sub.vertices.len();
                    sub.vertices.push(SubVertex { site: ComplexPoint::Face { face: f, at: m } });
                    charts.insert(id, m);
                    insert(&mut cdt, &mut owner, id, m.chart())?;
                }
            }

            // collect triangles
            let boundary_pairs = &fb.boundary_edges;
            let outside = exterior_faces(&cdt);
            for face in cdt.inner_faces() {
                if outside.contains(&face.fix()) {
                    continue;
                }
                let vs = face.vertices();
                let ids = [
                    owner[vs[0].fix().index()],
                    owner[vs[1].fix().index()],
                    owner[vs[2].fix().index()],
                ];
                let chart = [charts[&ids[0]], charts[&ids[1]], charts[&ids[2]]];
                let mut edges = [0usize; 3];
                let mut signs = [1i8; 3];
                for i in 0..3 {
                    let (a, b) = (ids[i], ids[(i + 1) % 3]);
                    let key2 = (a.min(b), a.max(b));
                    let carrier = match boundary_pairs.get(&key2) {
                        Some(&e) => Carrier::ParentEdge(e),
                        None => Carrier::Face(f),
                    };
                    let idx = *edge_key.entry((key2.0, key2.1, carrier)).or_insert_with(|| {
                        let length = match carrier {
                            Carrier::ParentEdge(pe) => {
                                let (ta, tb) = (sub.edge_param_any(a, pe), sub.edge_param_any(b, pe));
                                (ta - tb).abs()
                            }
                            Carrier::Face(_) => dist(&chart[i], &chart[(i + 1) % 3]).unwrap_or(0.0),
                        };
                        sub.edges.push(SubEdge { ends: [key2.0, key2.1], length, carrier, tris: vec![] });
                        sub.edges.len() - 1
                    });
                    edges[i] = idx;
                    signs[i] = if sub.edges[idx].ends[0] == a { 1 } else { -1 };
                }
                let t = sub.tris.len();
                for &e in &edges {
                    sub.edges[e].tris.push(t);
                }
                sub.face_tris[fi].push(t);
                sub.tris.push(SubTri { face: f, verts: ids, edges, signs, chart });
            }
        }

        // parent edge chains as sub-edges
        for e in 0..ne {
            let chain = &sub.edge_chain[e];
            let mut list = Vec::with_capacity(chain.len() - 1);
            for w in chain.windows(2) {
                let key = (w[0].1.min(w[1].1), w[0].1.max(w[1].1), Carrier::ParentEdge(EdgeId(e)));
                let idx = *edge_key.get(&key).ok_or_else(|| {
                    CatkError::InvalidComplex(format!(
                        "edge {} lost a boundary segment in triangulation",
                        parent.edges()[e].label
                    ))
                })?;
                list.push(idx);
            }
            sub.edge_subedges[e] = list;
        }

        let nv = sub.vertices.len();
        sub.vertex_edges = vec![vec![]; nv];
        sub.vertex_tris = vec![vec![]; nv];
        for (i, e) in sub.edges.iter().enumerate() {
            sub.vertex_edges[e.ends[0]].push(i);
            sub.vertex_edges[e.ends[1]].push(i);
        }
        for (i, t) in sub.tris.iter().enumerate() {
            for &v in &t.verts {
                sub.vertex_tris[v].push(i);
            }
        }
        if let Some(v) = (0..nv).find(|&v| sub.vertex_edges[v].is_empty()) {
            return Err(CatkError::InvalidSeam(format!(
                "sub-vertex {v} was merged by the triangulation; seam points too close"
            )));
        }

        sub.grids = (0..parent.faces().len()).map(|f| sub.build_grid(FaceId(f))).collect();

        // seam traces
        for (si, runs) in seg_runs.into_iter().enumerate() {
            let mut verts: Vec<usize> = Vec::new();
            let mut edges: Vec<(usize, i8)> = Vec::new();
            for (run, carriers) in runs.into_iter().map(|r| r.expect("segment processed")) {
                if let Some(&last) = verts.last() {
                    if last != run[0] {
                        return Err(CatkError::InvalidSeam(format!("seam {si} is discontinuous")));
                    }
                } else {
                    verts.push(run[0]);
                }
                for (w, c) in run.windows(2).zip(carriers) {
                    let key = (w[0].min(w[1]), w[0].max(w[1]), c);
                    let idx = *edge_key.get(&key).ok_or_else(|| {
                        CatkError::InvalidSeam(format!("seam {si} segment missing from the triangulation"))
                    })?;
                    edges.push((idx, if sub.edges[idx].ends[0] == w[0] { 1 } else { -1 }));
                    verts.push(w[1]);
                }
            }
            let closed = seams[si].closed;
            if closed {
                if verts.first() != verts.last() {
                    return Err(CatkError::InvalidSeam(format!("seam {si} does not close")));
                }
                verts.pop();
            }
            sub.seams.push(SeamTrace { vertices: verts, edges, closed });
        }
        let _ = kappa;
        Ok(sub)
    }

    fn face_boundary(&self, f: FaceId) -> Result<FaceBuild> {
        let face = self.parent.face(f);
        let mut boundary = Vec::new();
        let mut charts = Vec::new();
        let mut pairs = HashMap::new();
        for (i, side) in face.sides.iter().enumerate() {
            let chain = &self.edge_chain[side.edge.0];
            let ordered: Vec<(f64, usize)> = if side.reversed {
                chain.iter().rev().cloned().collect()
            } else {
                chain.clone()
            };
            for w in ordered.windows(2) {
                pairs.insert((w[0].1.min(w[1].1), w[0].1.max(w[1].1)), side.edge);
            }
            for &(t, v) in &ordered[..ordered.len() - 1] {
                boundary.push(v);
                charts.push(self.parent.edge_point_in_side(f, i, t)?);
            }
        }
        // corners exactly
        for (k, &v) in boundary.iter().enumerate() {
            if let Some(c) = face.corner_of(super::VertexId(v)) {
                if v < self.parent.vertices().len() {
                    charts[k] = face.corners[c];
                }
            }
        }
        Ok(FaceBuild { boundary, boundary_charts: charts, boundary_edges: pairs })
    }

    fn boundary_vertex(&self, p: &ComplexPoint) -> Option<usize> {
        match *p {
            ComplexPoint::Vertex(v) => Some(self.parent_vertex[v.0]),
            ComplexPoint::Edge { edge, t } => self.edge_chain[edge.0]
                .iter()
                .find(|(s, _)| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
                .map(|x| x.1),
            ComplexPoint::Face { .. } => None,
        }
    }

    fn classify_segment(
        &self,
        fb: &FaceBuild,
        ends: [usize; 2],
        ca: &ModelPoint,
        cb: &ModelPoint,
    ) -> Result<SegmentKind> {
        let pa = fb.boundary.iter().position(|&v| v == ends[0]);
        let pb = fb.boundary.iter().position(|&v| v == ends[1]);
        let (Some(ia), Some(ib)) = (pa, pb) else {
            return Ok(SegmentKind::Interior);
        };
        let n = fb.boundary.len();
        let (a, b) = (ca.chart(), cb.chart());
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        let tol = 1e-18 * len2.max(1.0);
        for step in [1usize, n - 1] {
            let mut run = vec![ends[0]];
            let mut k = ia;
            let mut ok = true;
            while k != ib {
                k = (k + step) % n;
                let p = fb.boundary_charts[k].chart();
                if seg_dist2(p, a, b) > tol {
                    ok = false;
                    break;
                }
                run.push(fb.boundary[k]);
            }
            if ok {
                return Ok(SegmentKind::Boundary(run));
            }
        }
        Ok(SegmentKind::Interior)
    }

    /// Chart length per unit model length near the face centroid.
    fn chart_scale(&self, f: FaceId) -> Result<f64> {
        let face = self.parent.face(f);
        if self.parent.kappa().is_flat() {
            return Ok(1.0);
        }
        let n = face.corners.len() as f64;
        let c = face.corners.iter().fold([0.0, 0.0], |acc, p| {
            let q = p.chart();
            [acc[0] + q[0] / n, acc[1] + q[1] / n]
        });
        let d = 1e-6;
        let a = ModelPoint::from_chart(self.parent.kappa(), c)?;
        let b = ModelPoint::from_chart(self.parent.kappa(), [c[0] + d, c[1]])?;
        let e = ModelPoint::from_chart(self.parent.kappa(), [c[0], c[1] + d])?;
        Ok(d / dist(&a, &b)?.max(dist(&a, &e)?))
    }

    fn build_grid(&self, f: FaceId) -> Grid {
        let tris = &self.face_tris[f.0];
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for c in &self.parent.face(f).corners {
            let p = c.chart();
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let per_side = ((tris.len() as f64).sqrt() / 2.0).ceil().clamp(1.0, 256.0);
        let cell = ext / per_side * 1.000001;
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut grid = Grid { min: lo, cell, nx, ny, bins: vec![vec![]; nx * ny] };
        for &t in tris {
            let c = self.tri_chart2(t);
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in &c {
                for d in 0..2 {
                    a[d] = a[d].min(p[d]);
                    b[d] = b[d].max(p[d]);
                }
            }
            let pad = cell * 1e-6;
            let (i0, j0) = grid.coord([a[0] - pad, a[1] - pad]);
            let (i1, j1) = grid.coord([b[0] + pad, b[1] + pad]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    grid.bins[j * nx + i].push(t);
                }
            }
        }
        grid
    }

    pub fn parent(&self) -> &Complex {
        &self.parent
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn seams(&self) -> &[SeamTrace] {
        &self.seams
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    pub fn vertex_tris(&self, v: usize) -> &[usize] {
        &self.vertex_tris[v]
    }

    pub fn face_tris(&self, f: FaceId) -> &[usize] {
        &self.face_tris[f.0]
    }

    pub fn parent_vertex(&self, v: super::VertexId) -> usize {
        self.parent_vertex[v.0]
    }

    /// Sub-vertices along a parent edge with their arclength parameters.
    pub fn edge_chain(&self, e: EdgeId) -> &[(f64, usize)] {
        &self.edge_chain[e.0]
    }

    pub fn edge_subedges(&self, e: EdgeId) -> &[usize] {
        &self.edge_subedges[e.0]
    }

    pub fn tri_chart2(&self, t: usize) -> [[f64; 2]; 3] {
        let c = &self.tris[t].chart;
        [c[0].chart(), c[1].chart(), c[2].chart()]
    }

    /// Chart position of sub-vertex `v` in face `f`, if it lies in the closed face.
    pub fn vertex_chart(&self, v: usize, f: FaceId) -> Option<ModelPoint> {
        self.parent.chart_point(&self.vertices[v].site, f)
    }

    /// Model point of a location along a sub-edge at arclength `s` from `ends[0]`, in face `f`.
    pub fn subedge_point(&self, e: usize, s: f64, f: FaceId) -> Option<ModelPoint> {
        let edge = &self.edges[e];
        let a = self.vertex_chart(edge.ends[0], f)?;
        let b = self.vertex_chart(edge.ends[1], f)?;
        geodesic_point(&a, &b, (s / edge.length).clamp(0.0, 1.0)).ok()
    }

    /// Complex point on sub-edge `e` at arclength `s` from `ends[0]`.
    pub fn subedge_site(&self, e: usize, s: f64) -> ComplexPoint {
        let edge = &self.edges[e];
        let s = s.clamp(0.0, edge.length);
        if s == 0.0 {
            return self.vertices[edge.ends[0]].site;
        }
        if s == edge.length {
            return self.vertices[edge.ends[1]].site;
        }
        match edge.carrier {
            Carrier::ParentEdge(pe) => {
                let ta = self.edge_param_any(edge.ends[0], pe);
                let tb = self.edge_param_any(edge.ends[1], pe);
                let t = ta + (tb - ta) * s / edge.length;
                ComplexPoint::Edge { edge: pe, t }
            }
            Carrier::Face(f) => ComplexPoint::Face {
                face: f,
                at: self.subedge_point(e, s, f).expect("sub-edge in its face"),
            },
        }
    }

    fn edge_param_any(&self, v: usize, pe: EdgeId) -> f64 {
        self.edge_chain[pe.0].iter().find(|x| x.1 == v).map(|x| x.0).unwrap_or(0.0)
    }

    /// Closed cells of a sub-cell: itself and all its faces.
    pub fn closure(&self, c: SubCell) -> Vec<SubCell> {
        match c {
            SubCell::Vertex(_) => vec![c],
            SubCell::Edge(e) => {
                let [a, b] = self.edges[e].ends;
                vec![c, SubCell::Vertex(a), SubCell::Vertex(b)]
            }
            SubCell::Tri(t) => {
                let tr = &self.tris[t];
                let mut v = vec![c];
                v.extend(tr.edges.iter().map(|&e| SubCell::Edge(e)));
                v.extend(tr.verts.iter().map(|&x| SubCell::Vertex(x)));
                v
            }
        }
    }

    /// The smallest sub-cell containing a complex point.
    pub fn cell_of(&self, p: &ComplexPoint) -> Result<SubCell> {
        match *p {
            ComplexPoint::Vertex(v) => Ok(SubCell::Vertex(self.parent_vertex[v.0])),
            ComplexPoint::Edge { edge, t } => {
                let chain = &self.edge_chain[edge.0];
                let k = chain.partition_point(|x| x.0 < t);
                for j in [k.saturating_sub(1), k] {
                    if let Some(&(s, v)) = chain.get(j) {
                        if (s - t).abs() <= 1e-12 * (1.0 + t.abs()) {
                            return Ok(SubCell::Vertex(v));
                        }
                    }
                }
                if k == 0 || k >= chain.len() {
                    return Err(CatkError::Location(format!("parameter {t} outside edge")));
                }
                Ok(SubCell::Edge(self.edge_subedges[edge.0][k - 1]))
            }
            ComplexPoint::Face { face, at } => self.locate_in_face(face, &at),
        }
    }

    fn classify_bary(&self, t: usize, l: [f64; 3]) -> SubCell {
        let zeros: Vec<usize> = (0..3).filter(|&i| l[i] <= BARY_TOL).collect();
        let tri = &self.tris[t];
        match zeros.len() {
            0 => SubCell::Tri(t),
            1 => {
                // edge opposite the vertex with zero weight
                let i = zeros[0];
                SubCell::Edge(tri.edges[(i + 1) % 3])
            }
            _ => {
                let i = (0..3).max_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap();
                SubCell::Vertex(tri.verts[i])
            }
        }
    }

    /// Candidate triangle with the largest minimum barycentric weight; ties go to the lowest id.
    fn best_tri(&self, p: [f64; 2], cands: &[usize]) -> Option<(f64, usize, [f64; 3])> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for &t in cands {
            let l = barycentric(p, &self.tri_chart2(t));
            let m = l[0].min(l[1]).min(l[2]);
            let better = match best {
                None => true,
                Some((bm, bt, _)) => {
                    if m >= -BARY_TOL && bm >= -BARY_TOL {
                        t < bt && m >= -BARY_TOL
                    } else {
                        m > bm
                    }
                }
            };
            if better {
                best = Some((m, t, l));
            }
        }
        best
    }

    /// Locate a chart point of face `f` in the subdivision.
    pub fn locate_in_face(&self, f: FaceId, at: &ModelPoint) -> Result<SubCell> {
        let p = at.chart();
        let grid = &self.grids[f.0];
        let mut best = self.best_tri(p, grid.bin(p));
        if best.is_none_or(|b| b.0 < -BARY_TOL) {
            best = self.best_tri(p, &self.face_tris[f.0]);
        }
        match best {
            Some((m, t, l)) if m >= -BARY_TOL => Ok(self.classify_bary(t, l)),
            _ => Err(CatkError::Location(format!(
                "point ({}, {}) is outside face {}",
                p[0],
                p[1],
                self.parent.face(f).label
            ))),
        }
    }

    /// Split the chart segment `a -> b` of face `f` into maximal pieces lying in single cells.
    pub fn trace_segment(&self, f: FaceId, a: &ModelPoint, b: &ModelPoint) -> Vec<TracePiece> {
        let (pa, pb) = (a.chart(), b.chart());
        let d = [pb[0] - pa[0], pb[1] - pa[1]];
        let grid = &self.grids[f.0];
        let len = d[0].hypot(d[1]);
        let steps = ((len / (grid.cell * 0.25)).ceil() as usize).max(1);
        let mut cands: Vec<usize> = Vec::new();
        for k in 0..=steps {
            let s = k as f64 / steps as f64;
            let p = [pa[0] + s * d[0], pa[1] + s * d[1]];
            let (i, j) = grid.coord(p);
            for jj in j.saturating_sub(1)..=(j + 1).min(grid.ny - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(grid.nx - 1) {
                    cands.extend_from_slice(&grid.bins[jj * grid.nx + ii]);
                }
            }
        }
        cands.sort_unstable();
        cands.dedup();
        let mut breaks = vec![0.0, 1.0];
        for &t in &cands {
            if let Some((u0, u1)) = clip(pa, d, &self.tri_chart2(t)) {
                breaks.push(u0);
                breaks.push(u1);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
        let mut out: Vec<TracePiece> = Vec::new();
        for w in breaks.windows(2) {
            let (u0, u1) = (w[0], w[1]);
            if u1 - u0 <= 1e-12 {
                continue;
            }
            let um = 0.5 * (u0 + u1);
            let p = [pa[0] + um * d[0], pa[1] + um * d[1]];
            let mut best: Option<(f64, usize, [f64; 3])> = None;
            for &t in &cands {
                let l = barycentric(p, &self.tri_chart2(t));
                let m = l[0].min(l[1]).min(l[2]);
                if best.is_none_or(|(bm, _, _)| m > bm) {
                    best = Some((m, t, l));
                }
            }
            let cell = match best {
                Some((m, t, l)) if m >= -BARY_TOL => self.classify_bary(t, l),
                _ => continue,
            };
            match out.last_mut() {
                Some(last) if last.cell == cell && (last.t1 - u0).abs() <= 1e-12 => last.t1 = u1,
                _ => out.push(TracePiece { t0: u0, t1: u1, cell }),
            }
        }
        // absorb slivers left by the clipping tolerance
        let sliver = 1e-9;
        if out.len() > 1 {
            let mut merged: Vec<TracePiece> = Vec::with_capacity(out.len());
            for p in out {
                match merged.last_mut() {
                    Some(last) if p.t1 - p.t0 <= sliver => last.t1 = p.t1,
                    Some(last) if last.t1 - last.t0 <= sliver => {
                        *last = TracePiece { t0: last.t0, ..p };
                    }
                    _ => merged.push(p),
                }
                if merged.len() >= 2 {
                    let n = merged.len();
                    if merged[n - 2].cell == merged[n - 1].cell {
                        merged[n - 2].t1 = merged[n - 1].t1;
                        merged.pop();
                    }
                }
            }
            out = merged;
        }
        out
    }

    pub fn total_area(&self) -> f64 {
        self.tris
            .iter()
            .map(|t| crate::model::triangle_area(&t.chart[0], &t.chart[1], &t.chart[2]).unwrap_or(0.0))
            .sum()
    }

    pub fn max_cell_diameter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Total length of sub-edges carried by parent edges.
    pub fn parent_skeleton_length(&self) -> f64 {
        self.edges
            .iter()
            .filter(|e| matches!(e.carrier, Carrier::ParentEdge(_)))
            .map(|e| e.length)
            .sum()
    }
}

/// Hull slivers cut off by boundary constraints that are collinear only up to rounding.
fn exterior_faces(cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>) -> HashSet<FixedFaceHandle<InnerTag>> {
    let mut out = HashSet::new();
    let mut stack = Vec::new();
    for e in cdt.convex_hull() {
        if e.is_constraint_edge() {
            continue;
        }
        for f in [e.face(), e.rev().face()] {
            if let Some(f) = f.as_inner() {
                if out.insert(f.fix()) {
                    stack.push(f.fix());
                }
            }
        }
    }
    while let Some(f) = stack.pop() {
        for e in cdt.face(f).adjacent_edges() {
            if e.is_constraint_edge() {
                continue;
            }
            if let Some(g) = e.rev().face().as_inner() {
                if out.insert(g.fix()) {
                    stack.push(g.fix());
                }
            }
        }
    }
    out
}

/// Parameter interval of `p + u d`, `u in [0,1]`, inside the closed chart triangle.
fn clip(p: [f64; 2], d: [f64; 2], tri: &[[f64; 2]; 3]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let orient = {
        let [a, b, c] = *tri;
        ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).signum()
    };
    for i in 0..3 {
        let (a, b) = (tri[i], tri[(i + 1) % 3]);
        let e = [b[0] - a[0], b[1] - a[1]];
        let scale = e[0].hypot(e[1]);
        // signed distance-like value of p(u) to the edge line, positive inside
        let f0 = orient * (e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0])) / scale;
        let df = orient * (e[0] * d[1] - e[1] * d[0]) / scale;
        let tol = 1e-11;
        if df.abs() < 1e-300 {
            if f0 < -tol {
                return None;
            }
            continue;
        }
        let u = (-tol - f0) / df;
        if df > 0.0 {
            lo = lo.max(u);
        } else {
            hi = hi.min(u);
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo.max(0.0), hi.min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::square_doc;
    use crate::complex::VertexId;

    #[test]
    fn square_diameter_and_area() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let s = SubdividedComplex::new(&c, 0.6, &[]).unwrap();
        assert!(s.max_cell_diameter() <= 0.6 + 1e-12);
        assert!((s.total_area() - 1.0).abs() < 1e-9);
        assert!((s.parent_skeleton_length() - 4.0).abs() < 1e-12);
        for t in &s.tris {
            for i in 0..3 {
                let e = &s.edges[t.edges[i]];
                assert!(e.ends.contains(&t.verts[i]) && e.ends.contains(&t.verts[(i + 1) % 3]));
            }
        }
    }

    #[test]
    fn coarse_mesh_still_triangulated() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let s = SubdividedComplex::new(&c, 100.0, &[]).unwrap();
        assert_eq!(s.tris.len(), 2);
        assert_eq!(s.vertices.len(), 4);
    }

    #[test]
    fn euler_characteristic_of_disk() {
        let c = Complex::build(square_doc(2.0)).unwrap();
        let s = SubdividedComplex::new(&c, 0.3, &[]).unwrap();
        let chi = s.vertices.len() as i64 - s.edges.len() as i64 + s.tris.len() as i64;
        assert_eq!(chi, 1);
    }

    #[test]
    fn seam_becomes_edge_cycle() {
        let c = Complex::build(square_doc(2.0)).unwrap();
        let f = FaceId(0);
        let pts: Vec<ComplexPoint> = [[0.5, 0.5], [1.5, 0.5], [1.0, 1.6]]
            .iter()
            .map(|p| ComplexPoint::Face { face: f, at: ModelPoint::euclidean(p[0], p[1]) })
            .collect();
        let s = SubdividedComplex::new(&c, 0.25, &[Seam::closed(pts)]).unwrap();
        let tr = &s.seams()[0];
        assert!(tr.closed);
        assert_eq!(tr.vertices.len(), tr.edges.len());
        let n = tr.vertices.len();
        for (k, &(e, sign)) in tr.edges.iter().enumerate() {
            let [a, b] = s.edges[e].ends;
            let (from, to) = if sign > 0 { (a, b) } else { (b, a) };
            assert_eq!((from, to), (tr.vertices[k], tr.vertices[(k + 1) % n]));
        }
        let total: f64 = tr.edges.iter().map(|&(e, _)| s.edges[e].length).sum();
        let expect = 1.0 + 2.0 * (0.25f64 + 1.21).sqrt();
        assert!((total - expect).abs() < 1e-9);
    }

    #[test]
    fn seam_along_boundary_uses_parent_edges() {
        let c = Complex::build(square_doc(2.0)).unwrap();
        let f = FaceId(0);
        let pts = vec![
            ComplexPoint::Vertex(VertexId(0)),
            ComplexPoint::Edge { edge: EdgeId(0), t: 1.3 },
            ComplexPoint::Face { face: f, at: ModelPoint::euclidean(1.0, 1.0) },
        ];
        let s = SubdividedComplex::new(&c, 0.25, &[Seam::closed(pts)]).unwrap();
        let tr = &s.seams()[0];
        let along = tr
            .edges
            .iter()
            .filter(|(e, _)| s.edges[*e].carrier == Carrier::ParentEdge(EdgeId(0)))
            .count();
        assert!(along >= 3);
    }

    #[test]
    fn crossing_seams_rejected() {
        let c = Complex::build(square_doc(2.0)).unwrap();
        let f = FaceId(0);
        let p = |x: f64, y: f64| ComplexPoint::Face { face: f, at: ModelPoint::euclidean(x, y) };
        let a = Seam::open(vec![p(0.2, 1.0), p(1.8, 1.03)]);
        let b = Seam::open(vec![p(1.01, 0.2), p(0.97, 1.8)]);
        assert!(matches!(SubdividedComplex::new(&c, 0.3, &[a, b]), Err(CatkError::InvalidSeam(_))));
    }

    #[test]
    fn locate_and_trace() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let s = SubdividedComplex::new(&c, 0.3, &[]).unwrap();
        let f = FaceId(0);
        let v = s.locate_in_face(f, &ModelPoint::euclidean(0.0, 0.0)).unwrap();
        assert_eq!(v, SubCell::Vertex(0));
        let cell = s.cell_of(&ComplexPoint::Edge { edge: EdgeId(0), t: 0.5 }).unwrap();
        assert!(matches!(cell, SubCell::Vertex(_) | SubCell::Edge(_)));
        let pieces = s.trace_segment(f, &ModelPoint::euclidean(0.05, 0.1), &ModelPoint::euclidean(0.9, 0.8));
        assert_eq!(pieces.first().unwrap().t0, 0.0);
        assert!((pieces.last().unwrap().t1 - 1.0).abs() < 1e-12);
        for w in pieces.windows(2) {
            assert!((w[0].t1 - w[1].t0).abs() < 1e-9);
        }
        let along = s.trace_segment(f, &ModelPoint::euclidean(0.0, 0.0), &ModelPoint::euclidean(1.0, 0.0));
        assert!(along.iter().all(|p| matches!(p.cell, SubCell::Edge(_))));
    }

    #[test]
    fn hyperbolic_face_subdivides() {
        let k = crate::model::Kappa::new(-1.0).unwrap();
        let pts: Vec<ModelPoint> =
            (0..3).map(|i| ModelPoint::polar(k, 1.0, 2.0 * std::f64::consts::PI / 3.0 * i as f64)).collect();
        let l = dist(&pts[0], &pts[1]).unwrap();
        let doc = crate::complex::ComplexDoc {
            kappa: -1.0,
            vertices: vec![1, 2, 3],
            edges: (1..=3u64)
                .map(|e| crate::complex::EdgeDoc { id: e, length: l, endpoints: [e, e % 3 + 1] })
                .collect(),
            faces: vec![crate::complex::FaceDoc {
                id: 1,
                polygon: pts.iter().map(|p| p.coords()).collect(),
                sides: (1..=3).map(|e| crate::complex::SideDoc { edge: e, reversed: false }).collect(),
            }],
        };
        let c = Complex::build(doc).unwrap();
        let s = SubdividedComplex::new(&c, 0.3, &[]).unwrap();
        assert!(s.max_cell_diameter() <= 0.3 + 1e-12);
        assert!((s.total_area() - c.total_area()).abs() < 1e-9 * c.total_area().max(1.0));
    }
}
