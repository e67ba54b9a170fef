//! Links of sub-vertices: a metric graph with one node per incident sub-edge
//! and one arc per incident triangle, weighted by the corner angle.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::Mask;
use crate::complex::{ComplexPoint, FaceId, SubCell, SubdividedComplex};
use crate::model::{geodesic_point, vertex_angle, ModelPoint};

#[derive(Clone, Copy, Debug)]
pub(crate) struct SubArc {
    pub tri: usize,
    pub a: usize,
    pub b: usize,
    pub angle: f64,
}

/// A direction at the base vertex: position `x` along arc `arc`, measured from its node `a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dir {
    pub arc: usize,
    pub x: f64,
}

pub(crate) struct SubLink {
    pub v: usize,
    /// Sub-edges at `v`.
    pub nodes: Vec<usize>,
    pub arcs: Vec<SubArc>,
}

impl SubLink {
    pub fn new(s: &SubdividedComplex, v: usize, mask: Mask<'_>) -> Self {
        let mut nodes: Vec<usize> = Vec::new();
        let mut arcs = Vec::new();
        let node_of = |e: usize, nodes: &mut Vec<usize>| match nodes.iter().position(|&x| x == e) {
            Some(i) => i,
            None => {
                nodes.push(e);
                nodes.len() - 1
            }
        };
        for &t in s.vertex_tris(v) {
            if !mask.tri(t) {
                continue;
            }
            let tri = &s.tris[t];
            let i = tri.verts.iter().position(|&x| x == v).expect("vertex of triangle");
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let ea = tri.edges[i];
            let eb = tri.edges[k];
            let angle = vertex_angle(&tri.chart[i], &tri.chart[j], &tri.chart[k]).unwrap_or(0.0);
            let a = node_of(ea, &mut nodes);
            let b = node_of(eb, &mut nodes);
            arcs.push(SubArc { tri: t, a, b, angle });
        }
        SubLink { v, nodes, arcs }
    }

    pub fn arc_of_tri(&self, t: usize) -> Option<usize> {
        self.arcs.iter().position(|a| a.tri == t)
    }

    fn base_chart(&self, s: &SubdividedComplex, arc: usize) -> (ModelPoint, ModelPoint, ModelPoint, FaceId) {
        let tri = &s.tris[self.arcs[arc].tri];
        let i = tri.verts.iter().position(|&x| x == self.v).expect("vertex of triangle");
        (tri.chart[i], tri.chart[(i + 1) % 3], tri.chart[(i + 2) % 3], tri.face)
    }

    /// Direction from the base vertex towards `p` (given in the chart of the arc's face).
    pub fn direction(&self, s: &SubdividedComplex, arc: usize, p: &ModelPoint) -> Dir {
        let (v, a, _, _) = self.base_chart(s, arc);
        let x = vertex_angle(&v, &a, p).unwrap_or(0.0).clamp(0.0, self.arcs[arc].angle);
        Dir { arc, x }
    }

    /// Node distances from a direction; `via[n]` is the arc reaching `n`, `root[n]` marks nodes reached directly.
    fn search(&self, from: Dir) -> (Vec<f64>, Vec<usize>, Vec<bool>) {
        let n = self.nodes.len();
        let mut d = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut root = vec![false; n];
        let mut heap = BinaryHeap::new();
        let arc = self.arcs[from.arc];
        for (node, x) in [(arc.a, from.x), (arc.b, arc.angle - from.x)] {
            if x < d[node] {
                d[node] = x;
                via[node] = from.arc;
                root[node] = true;
                heap.push(HeapItem(x, node));
            }
        }
        while let Some(HeapItem(du, u)) = heap.pop() {
            if du > d[u] {
                continue;
            }
            for (k, a) in self.arcs.iter().enumerate() {
                let w = if a.a == u {
                    a.b
                } else if a.b == u {
                    a.a
                } else {
                    continue;
                };
                let nd = du + a.angle;
                if nd < d[w] {
                    d[w] = nd;
                    via[w] = k;
                    root[w] = false;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        (d, via, root)
    }

    /// Link distance and the arcs of a shortest route between two directions, in order.
    pub fn route(&self, from: Dir, to: Dir) -> (f64, Vec<usize>) {
        let (d, via, root) = self.search(from);
        let arc = self.arcs[to.arc];
        let mut best = (f64::INFINITY, None);
        if from.arc == to.arc {
            best = ((from.x - to.x).abs(), None);
        }
        for (node, x) in [(arc.a, to.x), (arc.b, arc.angle - to.x)] {
            if d[node] + x < best.0 {
                best = (d[node] + x, Some(node));
            }
        }
        let mut arcs = vec![to.arc];
        if let Some(mut node) = best.1 {
            loop {
                let k = via[node];
                arcs.push(k);
                if root[node] {
                    break;
                }
                let a = self.arcs[k];
                node = if a.a == node { a.b } else { a.a };
            }
        }
        arcs.reverse();
        arcs.dedup();
        (best.0, arcs)
    }

    pub fn distance(&self, from: Dir, to: Dir) -> f64 {
        self.route(from, to).0
    }

    /// Directions at link distance `target` from `from`.
    pub fn at_distance(&self, from: Dir, target: f64, tol: f64) -> Vec<Dir> {
        let (d, _, _) = self.search(from);
        let mut out: Vec<Dir> = Vec::new();
        for (k, a) in self.arcs.iter().enumerate() {
            let value = |x: f64| {
                let mut m = (d[a.a] + x).min(d[a.b] + a.angle - x);
                if k == from.arc {
                    m = m.min((x - from.x).abs());
                }
                m
            };
            let mut cands = vec![target - d[a.a], a.angle - (target - d[a.b])];
            if k == from.arc {
                cands.push(from.x + target);
                cands.push(from.x - target);
            }
            for x in cands {
                if x >= -tol && x <= a.angle + tol {
                    let x = x.clamp(0.0, a.angle);
                    if (value(x) - target).abs() <= tol && !out.iter().any(|o| o.arc == k && (o.x - x).abs() <= 1e-9) {
                        out.push(Dir { arc: k, x });
                    }
                }
            }
        }
        out
    }

    /// Chart position of the far end of the sub-edge when `d` lies within `tol` of an end of its arc.
    pub fn edge_end(&self, s: &SubdividedComplex, d: Dir, tol: f64) -> Option<([f64; 2], FaceId)> {
        let (_, a, b, f) = self.base_chart(s, d.arc);
        if d.x <= tol {
            Some((a.chart(), f))
        } else if d.x >= self.arcs[d.arc].angle - tol {
            Some((b.chart(), f))
        } else {
            None
        }
    }

    /// A point of the arc's triangle on the ray in direction `d`, in its face chart.
    pub fn ray_point(&self, s: &SubdividedComplex, d: Dir) -> (ModelPoint, FaceId) {
        let (v, a, b, f) = self.base_chart(s, d.arc);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let p = geodesic_point(&a, &b, mid).unwrap_or(a);
            if vertex_angle(&v, &a, &p).unwrap_or(0.0) < d.x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (geodesic_point(&a, &b, 0.5 * (lo + hi)).unwrap_or(a), f)
    }

    /// A point just off the base vertex inside the arc's triangle, at fraction `frac` of the way to the far side.
    pub fn near_point(&self, s: &SubdividedComplex, arc: usize, frac: f64) -> ComplexPoint {
        let (v, a, b, f) = self.base_chart(s, arc);
        let mid = geodesic_point(&a, &b, 0.5).unwrap_or(a);
        let p = geodesic_point(&v, &mid, frac).unwrap_or(mid);
        s.parent().locate_face(f, &p).unwrap_or(ComplexPoint::Face { face: f, at: p })
    }

    /// A point on the ray in direction `d`, at fraction `frac` of the way to the far side.
    pub fn near_ray_point(&self, s: &SubdividedComplex, d: Dir, frac: f64) -> ComplexPoint {
        let (v, _, _, _) = self.base_chart(s, d.arc);
        let (far, f) = self.ray_point(s, d);
        let p = geodesic_point(&v, &far, frac).unwrap_or(far);
        s.parent().locate_face(f, &p).unwrap_or(ComplexPoint::Face { face: f, at: p })
    }

    /// A point on sub-edge node `n` at fraction `frac` of the edge from the base vertex.
    pub fn near_edge_point(&self, s: &SubdividedComplex, n: usize, frac: f64) -> ComplexPoint {
        let e = self.nodes[n];
        let edge = &s.edges[e];
        let at = if edge.ends[0] == self.v { frac * edge.length } else { (1.0 - frac) * edge.length };
        s.subedge_site(e, at)
    }

    /// Node shared by two arcs, if any.
    pub fn shared_node(&self, x: usize, y: usize) -> Option<usize> {
        let (a, b) = (self.arcs[x], self.arcs[y]);
        [a.a, a.b].into_iter().find(|&n| n == b.a || n == b.b)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Angle at `p` between the directions towards `a` and `b`, capped at π.
///
/// `a` lies in face `fa` and `b` in face `fb`; both faces must contain `p`.
pub fn angle_between(
    s: &SubdividedComplex,
    p: &ComplexPoint,
    a: &ComplexPoint,
    fa: FaceId,
    b: &ComplexPoint,
    fb: FaceId,
) -> Option<f64> {
    let c = s.parent();
    let direct = |f: FaceId| -> Option<f64> {
        vertex_angle(&c.chart_point(p, f)?, &c.chart_point(a, f)?, &c.chart_point(b, f)?).ok()
    };
    match s.cell_of(p).ok()? {
        SubCell::Tri(_) => direct(fa),
        SubCell::Edge(e) => {
            if fa == fb {
                return direct(fa);
            }
            // theta graph: two edge directions joined by one half-circle per face
            let end = s.vertices[s.edges[e].ends[1]].site;
            let alpha = vertex_angle(&c.chart_point(p, fa)?, &c.chart_point(&end, fa)?, &c.chart_point(a, fa)?).ok()?;
            let beta = vertex_angle(&c.chart_point(p, fb)?, &c.chart_point(&end, fb)?, &c.chart_point(b, fb)?).ok()?;
            Some((alpha + beta).min(2.0 * PI - alpha - beta).min(PI))
        }
        SubCell::Vertex(v) => {
            let link = SubLink::new(s, v, Mask::ALL);
            let da = dir_toward(s, &link, p, a, fa)?;
            let db = dir_toward(s, &link, p, b, fb)?;
            Some(link.distance(da, db).min(PI))
        }
    }
}

/// Direction at a sub-vertex towards a point of face `f`.
pub(crate) fn dir_toward(s: &SubdividedComplex, link: &SubLink, p: &ComplexPoint, q: &ComplexPoint, f: FaceId) -> Option<Dir> {
    let c = s.parent();
    let pc = c.chart_point(p, f)?;
    let qc = c.chart_point(q, f)?;
    // a point just along the ray, located among the triangles at the vertex
    let probe = geodesic_point(&pc, &qc, 1e-6_f64.min(0.5)).ok()?;
    let mut best: Option<(f64, usize)> = None;
    for (k, a) in link.arcs.iter().enumerate() {
        let tri = &s.tris[a.tri];
        if tri.face != f {
            continue;
        }
        let ch = s.tri_chart2(a.tri);
        let l = crate::complex::barycentric(probe.chart(), &ch);
        let m = l[0].min(l[1]).min(l[2]);
        if best.is_none_or(|b| m > b.0) {
            best = Some((m, k));
        }
    }
    let (_, k) = best?;
    Some(link.direction(s, k, &qc))
}
