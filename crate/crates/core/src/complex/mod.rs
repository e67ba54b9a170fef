//! Polyhedral 2-complexes glued from convex model polygons.

mod link;
mod subdivide;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{CatkError, Result};
use crate::model::{self, dist, geodesic_point, Kappa, ModelPoint, EPS_MODEL};

pub use link::{EdgeGirth, LinkArc, LinkGraph, LinkNode, LinkReport, VertexGirth};
pub use subdivide::{Carrier, Seam, SeamTrace, SubCell, SubEdge, SubTri, SubVertex, SubdividedComplex, TracePiece, barycentric};

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub usize);
        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(VertexId);
id_type!(EdgeId);
id_type!(FaceId);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub kappa: f64,
    pub vertices: Vec<u64>,
    pub edges: Vec<EdgeDoc>,
    pub faces: Vec<FaceDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: u64,
    pub length: f64,
    pub endpoints: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceDoc {
    pub id: u64,
    pub polygon: Vec<Vec<f64>>,
    pub sides: Vec<SideDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideDoc {
    pub edge: u64,
    #[serde(default)]
    pub reversed: bool,
}

/// A point as written in documents, referring to cells by their document ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDoc {
    Vertex(VertexRef),
    Edge(EdgeRef),
    Face(FaceRef),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRef {
    pub vertex: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRef {
    pub edge: u64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceRef {
    pub face: u64,
    pub at: Vec<f64>,
}

impl PointDoc {
    pub fn vertex(vertex: u64) -> Self {
        PointDoc::Vertex(VertexRef { vertex })
    }
    pub fn edge(edge: u64, t: f64) -> Self {
        PointDoc::Edge(EdgeRef { edge, t })
    }
    pub fn face(face: u64, at: Vec<f64>) -> Self {
        PointDoc::Face(FaceRef { face, at })
    }
}

/// A located point: a vertex, an edge point at arclength `t` from the edge's
/// first endpoint, or a point inside a face given in that face's chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComplexPoint {
    Vertex(VertexId),
    Edge { edge: EdgeId, t: f64 },
    Face { face: FaceId, at: ModelPoint },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Side {
    pub edge: EdgeId,
    pub reversed: bool,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub label: u64,
    /// Face corners at this vertex: (face, corner index).
    pub corners: Vec<(FaceId, usize)>,
    pub edges: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub label: u64,
    pub length: f64,
    pub ends: [VertexId; 2],
    /// Face sides glued to this edge: (face, side index).
    pub sides: Vec<(FaceId, usize)>,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub label: u64,
    /// Counter-clockwise corners in the face chart.
    pub corners: Vec<ModelPoint>,
    /// Side `i` runs from corner `i` to corner `i + 1`.
    pub sides: Vec<Side>,
    pub corner_vertices: Vec<VertexId>,
}

impl Face {
    pub fn side_endpoints(&self, i: usize) -> (ModelPoint, ModelPoint) {
        (self.corners[i], self.corners[(i + 1) % self.corners.len()])
    }

    pub fn side_of(&self, e: EdgeId) -> Option<usize> {
        self.sides.iter().position(|s| s.edge == e)
    }

    pub fn corner_of(&self, v: VertexId) -> Option<usize> {
        self.corner_vertices.iter().position(|&c| c == v)
    }
}

#[derive(Clone, Debug)]
pub struct Complex {
    kappa: Kappa,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    vertex_index: HashMap<u64, VertexId>,
    edge_index: HashMap<u64, EdgeId>,
    face_index: HashMap<u64, FaceId>,
    doc: ComplexDoc,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

fn invalid_face(face: u64, reason: impl Into<String>) -> CatkError {
    CatkError::InvalidFace { face, reason: reason.into() }
}

impl Complex {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ComplexDoc = serde_json::from_str(text)?;
        Self::build(doc)
    }

    /// Validate a complex document and build the adjacency structure.
    pub fn build(doc: ComplexDoc) -> Result<Self> {
        let kappa = Kappa::new(doc.kappa)?;
        let mut vertex_index = HashMap::new();
        for (i, &v) in doc.vertices.iter().enumerate() {
            if vertex_index.insert(v, VertexId(i)).is_some() {
                return Err(CatkError::InvalidComplex(format!("duplicate vertex id {v}")));
            }
        }
        let mut vertices: Vec<Vertex> = doc
            .vertices
            .iter()
            .map(|&label| Vertex { label, corners: vec![], edges: vec![] })
            .collect();

        let mut edge_index = HashMap::new();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, e) in doc.edges.iter().enumerate() {
            if edge_index.insert(e.id, EdgeId(i)).is_some() {
                return Err(CatkError::InvalidComplex(format!("duplicate edge id {}", e.id)));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(CatkError::InvalidComplex(format!(
                    "edge {} has non-positive length {}",
                    e.id, e.length
                )));
            }
            let mut ends = [VertexId(0); 2];
            for (k, v) in e.endpoints.iter().enumerate() {
                ends[k] = *vertex_index.get(v).ok_or_else(|| {
                    CatkError::InvalidComplex(format!("edge {} references unknown vertex {v}", e.id))
                })?;
            }
            if ends[0] == ends[1] {
                return Err(CatkError::InvalidComplex(format!("edge {} is a loop", e.id)));
            }
            for v in ends {
                vertices[v.0].edges.push(EdgeId(i));
            }
            edges.push(Edge { label: e.id, length: e.length, ends, sides: vec![] });
        }

        let mut face_index = HashMap::new();
        let mut faces = Vec::with_capacity(doc.faces.len());
        for (fi, f) in doc.faces.iter().enumerate() {
            if face_index.insert(f.id, FaceId(fi)).is_some() {
                return Err(CatkError::InvalidComplex(format!("duplicate face id {}", f.id)));
            }
            let face = Self::build_face(kappa, f, &edge_index, &edges)?;
            for (i, s) in face.sides.iter().enumerate() {
                edges[s.edge.0].sides.push((FaceId(fi), i));
            }
            for (i, &v) in face.corner_vertices.iter().enumerate() {
                vertices[v.0].corners.push((FaceId(fi), i));
            }
            faces.push(face);
        }

        for e in &edges {
            if e.sides.is_empty() {
                return Err(CatkError::InvalidComplex(format!("edge {} borders no face", e.label)));
            }
        }
        for v in &vertices {
            if v.corners.is_empty() {
                return Err(CatkError::InvalidComplex(format!("vertex {} lies on no face", v.label)));
            }
        }
        if faces.is_empty() {
            return Err(CatkError::InvalidComplex("complex has no faces".into()));
        }

        let mut parent: Vec<usize> = (0..faces.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for e in &edges {
            let a = find(&mut parent, e.sides[0].0 .0);
            for &(f, _) in &e.sides[1..] {
                let b = find(&mut parent, f.0);
                parent[b] = a;
            }
        }
        for v in &vertices {
            let a = find(&mut parent, v.corners[0].0 .0);
            for &(f, _) in &v.corners[1..] {
                let b = find(&mut parent, f.0);
                parent[b] = a;
            }
        }
        let root = find(&mut parent, 0);
        if (0..faces.len()).any(|f| find(&mut parent, f) != root) {
            return Err(CatkError::InvalidComplex("complex is not connected".into()));
        }

        Ok(Complex { kappa, vertices, edges, faces, vertex_index, edge_index, face_index, doc })
    }

    fn build_face(
        kappa: Kappa,
        f: &FaceDoc,
        edge_index: &HashMap<u64, EdgeId>,
        edges: &[Edge],
    ) -> Result<Face> {
        let n = f.polygon.len();
        if n < 3 {
            return Err(invalid_face(f.id, "polygon needs at least 3 corners"));
        }
        if f.sides.len() != n {
            return Err(invalid_face(
                f.id,
                format!("{} corners but {} sides", n, f.sides.len()),
            ));
        }
        let mut corners = Vec::with_capacity(n);
        for c in &f.polygon {
            corners.push(
                ModelPoint::from_coords(kappa, c).map_err(|e| invalid_face(f.id, e.to_string()))?,
            );
        }
        let mut sides = Vec::with_capacity(n);
        for s in &f.sides {
            let e = *edge_index.get(&s.edge).ok_or_else(|| {
                invalid_face(f.id, format!("references unknown edge {}", s.edge))
            })?;
            sides.push(Side { edge: e, reversed: s.reversed });
        }

        let chart: Vec<[f64; 2]> = corners.iter().map(|c| c.chart()).collect();
        let area = signed_area(&chart);
        if area.abs() < 1e-14 {
            return Err(invalid_face(f.id, "polygon is degenerate"));
        }
        if area < 0.0 {
            corners.reverse();
            let old = sides.clone();
            for (i, s) in sides.iter_mut().enumerate() {
                let o = old[(2 * n - 2 - i) % n];
                *s = Side { edge: o.edge, reversed: !o.reversed };
            }
        }
        let chart: Vec<[f64; 2]> = corners.iter().map(|c| c.chart()).collect();
        let scale = chart
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1e-300);
        let mut turning = 0.0;
        for i in 0..n {
            let (a, b, c) = (chart[(i + n - 1) % n], chart[i], chart[(i + 1) % n]);
            if a == b || b == c {
                return Err(invalid_face(f.id, format!("corner {i} repeats a point")));
            }
            let cr = cross(a, b, c);
            if cr < -1e-12 * scale * scale {
                return Err(invalid_face(f.id, format!("polygon is not convex at corner {i}")));
            }
            let (u, v) = ([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            turning += (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
        }
        if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(invalid_face(f.id, "polygon is not simple"));
        }

        let mut corner_vertices = Vec::with_capacity(n);
        let mut used = HashSet::new();
        for i in 0..n {
            let s = sides[i];
            if !used.insert(s.edge) {
                return Err(invalid_face(
                    f.id,
                    format!("edge {} is used twice", edges[s.edge.0].label),
                ));
            }
            let e = &edges[s.edge.0];
            let (a, b) = (corners[i], corners[(i + 1) % n]);
            let len = dist(&a, &b)?;
            if (len - e.length).abs() > EPS_MODEL * e.length.max(1.0) {
                return Err(CatkError::InvalidGluing(format!(
                    "face {} side of length {} is glued to edge {} of length {}",
                    f.id, len, e.label, e.length
                )));
            }
            let start = if s.reversed { e.ends[1] } else { e.ends[0] };
            corner_vertices.push(start);
        }
        for i in 0..n {
            let prev = sides[(i + n - 1) % n];
            let e = &edges[prev.edge.0];
            let end = if prev.reversed { e.ends[0] } else { e.ends[1] };
            if end != corner_vertices[i] {
                return Err(CatkError::InvalidGluing(format!(
                    "face {}: edges {} and {} do not meet at corner {}",
                    f.id,
                    e.label,
                    edges[sides[i].edge.0].label,
                    i
                )));
            }
        }
        let distinct: HashSet<_> = corner_vertices.iter().collect();
        if distinct.len() != n {
            return Err(invalid_face(f.id, "visits a vertex twice"));
        }
        Ok(Face { label: f.id, corners, sides, corner_vertices })
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }
    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }
    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f.0]
    }
    pub fn doc(&self) -> &ComplexDoc {
        &self.doc
    }
    pub fn vertex_by_label(&self, l: u64) -> Option<VertexId> {
        self.vertex_index.get(&l).copied()
    }
    pub fn edge_by_label(&self, l: u64) -> Option<EdgeId> {
        self.edge_index.get(&l).copied()
    }
    pub fn face_by_label(&self, l: u64) -> Option<FaceId> {
        self.face_index.get(&l).copied()
    }

    /// Point at arclength `t` along edge `e`, in the chart of the face owning side `side`.
    pub fn edge_point_in_side(&self, f: FaceId, side: usize, t: f64) -> Result<ModelPoint> {
        let face = &self.faces[f.0];
        let s = face.sides[side];
        let len = self.edges[s.edge.0].length;
        let (a, b) = face.side_endpoints(side);
        let (from, to) = if s.reversed { (b, a) } else { (a, b) };
        geodesic_point(&from, &to, (t / len).clamp(0.0, 1.0))
    }

    /// Coordinates of `p` in the chart of face `f`, if `p` lies in the closed face.
    pub fn chart_point(&self, p: &ComplexPoint, f: FaceId) -> Option<ModelPoint> {
        let face = &self.faces[f.0];
        match *p {
            ComplexPoint::Vertex(v) => face.corner_of(v).map(|i| face.corners[i]),
            ComplexPoint::Edge { edge, t } => {
                face.side_of(edge).and_then(|i| self.edge_point_in_side(f, i, t).ok())
            }
            ComplexPoint::Face { face: g, at } => (g == f).then_some(at),
        }
    }

    /// Closed faces containing `p`, in increasing id order.
    pub fn faces_of(&self, p: &ComplexPoint) -> Vec<FaceId> {
        let mut out: Vec<FaceId> = match *p {
            ComplexPoint::Vertex(v) => self.vertices[v.0].corners.iter().map(|c| c.0).collect(),
            ComplexPoint::Edge { edge, .. } => self.edges[edge.0].sides.iter().map(|c| c.0).collect(),
            ComplexPoint::Face { face, .. } => vec![face],
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn common_faces(&self, p: &ComplexPoint, q: &ComplexPoint) -> Vec<FaceId> {
        let b = self.faces_of(q);
        self.faces_of(p).into_iter().filter(|f| b.contains(f)).collect()
    }

    /// Canonical location of a point of face `f` given in its chart.
    pub fn locate_face(&self, f: FaceId, at: &ModelPoint) -> Result<ComplexPoint> {
        let face = self
            .faces
            .get(f.0)
            .ok_or_else(|| CatkError::Location(format!("no face with index {}", f.0)))?;
        if at.kappa() != self.kappa {
            return Err(CatkError::CurvatureMismatch(at.kappa().value(), self.kappa.value()));
        }
        for (i, c) in face.corners.iter().enumerate() {
            if dist(at, c)? <= EPS_MODEL {
                return Ok(ComplexPoint::Vertex(face.corner_vertices[i]));
            }
        }
        let p = at.chart();
        let n = face.corners.len();
        let mut boundary: Option<(usize, f64)> = None;
        for i in 0..n {
            let (a, b) = face.side_endpoints(i);
            let (ca, cb) = (a.chart(), b.chart());
            let d = [cb[0] - ca[0], cb[1] - ca[1]];
            let l2 = d[0] * d[0] + d[1] * d[1];
            let s = (((p[0] - ca[0]) * d[0] + (p[1] - ca[1]) * d[1]) / l2).clamp(0.0, 1.0);
            let foot = ModelPoint::from_chart(self.kappa, [ca[0] + s * d[0], ca[1] + s * d[1]])?;
            let off = dist(at, &foot)?;
            let outside = cross(ca, cb, p) < 0.0;
            if off <= EPS_MODEL {
                if boundary.is_none_or(|(_, o)| off < o) {
                    boundary = Some((i, off));
                }
            } else if outside {
                return Err(CatkError::Location(format!(
                    "point lies outside face {} by {}",
                    face.label, off
                )));
            }
        }
        if let Some((i, _)) = boundary {
            let s = face.sides[i];
            let (a, b) = face.side_endpoints(i);
            let from = if s.reversed { b } else { a };
            return self.locate_edge(s.edge, dist(&from, at)?);
        }
        Ok(ComplexPoint::Face { face: f, at: *at })
    }

    /// Canonical location of the point at arclength `t` on edge `e`.
    pub fn locate_edge(&self, e: EdgeId, t: f64) -> Result<ComplexPoint> {
        let edge = self
            .edges
            .get(e.0)
            .ok_or_else(|| CatkError::Location(format!("no edge with index {}", e.0)))?;
        if !(t >= -EPS_MODEL && t <= edge.length + EPS_MODEL) {
            return Err(CatkError::Location(format!(
                "parameter {t} outside edge {} of length {}",
                edge.label, edge.length
            )));
        }
        if t <= EPS_MODEL {
            Ok(ComplexPoint::Vertex(edge.ends[0]))
        } else if t >= edge.length - EPS_MODEL {
            Ok(ComplexPoint::Vertex(edge.ends[1]))
        } else {
            Ok(ComplexPoint::Edge { edge: e, t })
        }
    }

    /// Canonicalize any point (boundary points move to the lowest-dimensional cell).
    pub fn canonical(&self, p: &ComplexPoint) -> Result<ComplexPoint> {
        match *p {
            ComplexPoint::Vertex(v) if v.0 < self.vertices.len() => Ok(*p),
            ComplexPoint::Vertex(v) => Err(CatkError::Location(format!("no vertex with index {}", v.0))),
            ComplexPoint::Edge { edge, t } => self.locate_edge(edge, t),
            ComplexPoint::Face { face, at } => self.locate_face(face, &at),
        }
    }

    pub fn resolve(&self, p: &PointDoc) -> Result<ComplexPoint> {
        match p {
            PointDoc::Vertex(r) => self
                .vertex_by_label(r.vertex)
                .map(ComplexPoint::Vertex)
                .ok_or_else(|| CatkError::Location(format!("unknown vertex id {}", r.vertex))),
            PointDoc::Edge(r) => {
                let e = self
                    .edge_by_label(r.edge)
                    .ok_or_else(|| CatkError::Location(format!("unknown edge id {}", r.edge)))?;
                self.locate_edge(e, r.t)
            }
            PointDoc::Face(r) => {
                let f = self
                    .face_by_label(r.face)
                    .ok_or_else(|| CatkError::Location(format!("unknown face id {}", r.face)))?;
                let at = ModelPoint::from_coords(self.kappa, &r.at)?;
                self.locate_face(f, &at)
            }
        }
    }

    pub fn describe(&self, p: &ComplexPoint) -> PointDoc {
        match *p {
            ComplexPoint::Vertex(v) => PointDoc::vertex(self.vertices[v.0].label),
            ComplexPoint::Edge { edge, t } => PointDoc::edge(self.edges[edge.0].label, t),
            ComplexPoint::Face { face, at } => PointDoc::face(self.faces[face.0].label, at.coords()),
        }
    }

    /// Distance between two points sharing a closed face, measured in that face.
    pub fn face_distance(&self, f: FaceId, p: &ComplexPoint, q: &ComplexPoint) -> Option<f64> {
        let a = self.chart_point(p, f)?;
        let b = self.chart_point(q, f)?;
        dist(&a, &b).ok()
    }

    /// Radius of the largest ball at `p` meeting no closed cell that does not contain `p`;
    /// within it the complex is a cone over the link of `p`.
    pub fn conical_radius(&self, p: &ComplexPoint) -> f64 {
        let mut best = f64::INFINITY;
        for f in self.faces_of(p) {
            let Some(x) = self.chart_point(p, f) else { continue };
            let face = &self.faces[f.0];
            for i in 0..face.sides.len() {
                let (a, b) = face.side_endpoints(i);
                let (da, db) = (dist(&x, &a).unwrap_or(0.0), dist(&x, &b).unwrap_or(0.0));
                let d = segment_distance(&x, &a, &b);
                if d > EPS_MODEL {
                    best = best.min(d);
                } else {
                    // p lies on this side: only the side's far corners count
                    for e in [da, db] {
                        if e > EPS_MODEL {
                            best = best.min(e);
                        }
                    }
                }
            }
        }
        best
    }

    pub fn face_area(&self, f: FaceId) -> f64 {
        let c = &self.faces[f.0].corners;
        (1..c.len() - 1)
            .map(|i| model::triangle_area(&c[0], &c[i], &c[i + 1]).unwrap_or(0.0))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(FaceId(f))).sum()
    }

    pub fn total_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Upper bound on the diameter: twice the largest 1-skeleton distance from the first vertex.
    pub fn diameter_estimate(&self) -> f64 {
        let n = self.vertices.len();
        let mut d = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        d[0] = 0.0;
        for _ in 0..n {
            let Some(u) = (0..n).filter(|&i| !done[i]).min_by(|&a, &b| d[a].total_cmp(&d[b])) else {
                break;
            };
            done[u] = true;
            for &e in &self.vertices[u].edges {
                let edge = &self.edges[e.0];
                let w = if edge.ends[0].0 == u { edge.ends[1] } else { edge.ends[0] };
                let nd = d[u] + edge.length;
                if nd < d[w.0] {
                    d[w.0] = nd;
                }
            }
        }
        let far = d.iter().cloned().fold(0.0, f64::max);
        let face_diam = self
            .faces
            .iter()
            .map(|f| {
                let mut m = 0.0f64;
                for a in &f.corners {
                    for b in &f.corners {
                        m = m.max(dist(a, b).unwrap_or(0.0));
                    }
                }
                m
            })
            .fold(0.0, f64::max);
        (2.0 * far).max(face_diam)
    }

    /// Edges of face `f` as a map from edge to side index.
    pub fn face_side_map(&self, f: FaceId) -> BTreeMap<EdgeId, usize> {
        self.faces[f.0].sides.iter().enumerate().map(|(i, s)| (s.edge, i)).collect()
    }
}


/// Distance from `x` to the segment `[a, b]`; distance to a point is convex along geodesics.
fn segment_distance(x: &ModelPoint, a: &ModelPoint, b: &ModelPoint) -> f64 {
    let f = |t: f64| geodesic_point(a, b, t).and_then(|y| dist(x, &y)).unwrap_or(f64::INFINITY);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn square_doc(side: f64) -> ComplexDoc {
        ComplexDoc {
            kappa: 0.0,
            vertices: vec![1, 2, 3, 4],
            edges: vec![
                EdgeDoc { id: 1, length: side, endpoints: [1, 2] },
                EdgeDoc { id: 2, length: side, endpoints: [2, 3] },
                EdgeDoc { id: 3, length: side, endpoints: [3, 4] },
                EdgeDoc { id: 4, length: side, endpoints: [4, 1] },
            ],
            faces: vec![FaceDoc {
                id: 1,
                polygon: vec![vec![0.0, 0.0], vec![side, 0.0], vec![side, side], vec![0.0, side]],
                sides: (1..=4).map(|e| SideDoc { edge: e, reversed: false }).collect(),
            }],
        }
    }

    #[test]
    fn unit_square_counts() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        assert_eq!((c.faces().len(), c.edges().len(), c.vertices().len()), (1, 4, 4));
        assert!((c.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let mut d = square_doc(1.0);
        d.faces[0].polygon.reverse();
        d.faces[0].sides = vec![3, 2, 1, 4]
            .into_iter()
            .map(|e| SideDoc { edge: e, reversed: true })
            .collect();
        let c = Complex::build(d).unwrap();
        let f = c.face(FaceId(0));
        for i in 0..4 {
            let (a, b) = f.side_endpoints(i);
            let e = c.edge(f.sides[i].edge);
            let start = if f.sides[i].reversed { e.ends[1] } else { e.ends[0] };
            assert_eq!(start, f.corner_vertices[i]);
            assert!((dist(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch_is_invalid_gluing() {
        let mut d = square_doc(1.0);
        d.edges[2].length = 0.5;
        assert!(matches!(Complex::build(d), Err(CatkError::InvalidGluing(_))));
    }

    #[test]
    fn nonconvex_face_rejected() {
        let d = ComplexDoc {
            kappa: 0.0,
            vertices: vec![1, 2, 3, 4],
            edges: vec![
                EdgeDoc { id: 1, length: 2.0, endpoints: [1, 2] },
                EdgeDoc { id: 2, length: 2.08f64.sqrt(), endpoints: [2, 3] },
                EdgeDoc { id: 3, length: 2.08f64.sqrt(), endpoints: [3, 4] },
                EdgeDoc { id: 4, length: 2.0, endpoints: [4, 1] },
            ],
            faces: vec![FaceDoc {
                id: 9,
                polygon: vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.8, 0.8], vec![0.0, 2.0]],
                sides: (1..=4).map(|e| SideDoc { edge: e, reversed: false }).collect(),
            }],
        };
        assert!(matches!(Complex::build(d), Err(CatkError::InvalidFace { face: 9, .. })));
    }

    #[test]
    fn dangling_edge_reference_names_id() {
        let mut d = square_doc(1.0);
        d.faces[0].sides[2].edge = 77;
        let err = Complex::build(d).unwrap_err().to_string();
        assert!(err.contains("77"), "{err}");
    }

    #[test]
    fn disconnected_rejected() {
        let mut d = square_doc(1.0);
        let mut e = square_doc(1.0);
        for v in e.vertices.iter_mut() {
            *v += 10;
        }
        for x in e.edges.iter_mut() {
            x.id += 10;
            x.endpoints = [x.endpoints[0] + 10, x.endpoints[1] + 10];
        }
        e.faces[0].id = 2;
        for s in e.faces[0].sides.iter_mut() {
            s.edge += 10;
        }
        d.vertices.extend(e.vertices);
        d.edges.extend(e.edges);
        d.faces.extend(e.faces);
        assert!(matches!(Complex::build(d), Err(CatkError::InvalidComplex(_))));
    }

    #[test]
    fn locate_canonicalizes() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let f = FaceId(0);
        let p = c.locate_face(f, &ModelPoint::euclidean(1.0, 1.0)).unwrap();
        assert_eq!(p, ComplexPoint::Vertex(VertexId(2)));
        assert_eq!(c.locate_edge(EdgeId(0), 0.0).unwrap(), ComplexPoint::Vertex(VertexId(0)));
        let inner = ModelPoint::euclidean(0.3, 0.4);
        assert_eq!(c.locate_face(f, &inner).unwrap(), ComplexPoint::Face { face: f, at: inner });
        match c.locate_face(f, &ModelPoint::euclidean(0.25, 1e-12)).unwrap() {
            ComplexPoint::Edge { edge, t } => {
                assert_eq!(edge, EdgeId(0));
                assert!((t - 0.25).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(c.locate_face(f, &ModelPoint::euclidean(1.5, 0.5)).is_err());
        assert!(c.locate_edge(EdgeId(0), 1.5).is_err());
    }

    #[test]
    fn point_doc_roundtrip() {
        let c = Complex::build(square_doc(2.0)).unwrap();
        for doc in [PointDoc::vertex(3), PointDoc::edge(2, 0.5), PointDoc::face(1, vec![0.5, 0.7])] {
            let p = c.resolve(&doc).unwrap();
            assert_eq!(c.describe(&p), doc);
            let text = serde_json::to_string(&doc).unwrap();
            assert_eq!(serde_json::from_str::<PointDoc>(&text).unwrap(), doc);
        }
    }

    #[test]
    fn hyperbolic_square_face() {
        let k = Kappa::new(-1.0).unwrap();
        let r = 0.8;
        let pts: Vec<ModelPoint> = (0..4)
            .map(|i| ModelPoint::polar(k, r, std::f64::consts::FRAC_PI_2 * i as f64))
            .collect();
        let l = dist(&pts[0], &pts[1]).unwrap();
        let d = ComplexDoc {
            kappa: -1.0,
            vertices: vec![1, 2, 3, 4],
            edges: (1..=4u64)
                .map(|e| EdgeDoc { id: e, length: l, endpoints: [e, e % 4 + 1] })
                .collect(),
            faces: vec![FaceDoc {
                id: 1,
                polygon: pts.iter().map(|p| p.coords()).collect(),
                sides: (1..=4).map(|e| SideDoc { edge: e, reversed: false }).collect(),
            }],
        };
        let c = Complex::build(d).unwrap();
        let angle = model::vertex_angle(&pts[0], &pts[1], &pts[3]).unwrap();
        let expect = (2.0 * std::f64::consts::PI - 4.0 * angle) / 1.0;
        assert!((c.total_area() - expect).abs() < 1e-12);
    }

    #[test]
    fn conical_radius_in_a_square() {
        let c = Complex::build(square_doc(4.0)).unwrap();
        let r = |d: PointDoc| c.conical_radius(&c.resolve(&d).unwrap());
        assert!((r(PointDoc::face(1, vec![1.0, 0.5])) - 0.5).abs() < 1e-9);
        assert!((r(PointDoc::edge(1, 1.0)) - 1.0).abs() < 1e-9);
        assert!((r(PointDoc::vertex(1)) - 4.0).abs() < 1e-9);
    }
}
