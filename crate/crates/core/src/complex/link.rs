use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::f64::consts::PI;

use serde::Serialize;

use super::{Complex, ComplexPoint, EdgeId, FaceId, VertexId};
use crate::model::vertex_angle;

/// Girth slack for the link condition.
const LINK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkNode {
    /// Direction along `edge` leaving its endpoint `end` (0 or 1).
    EdgeEnd { edge: EdgeId, end: usize },
    /// Direction along the edge containing the base point, towards `ends[1]` when `forward`.
    EdgeDir { edge: EdgeId, forward: bool },
    /// The single node of a face-interior circle.
    Circle { face: FaceId },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkArc {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub face: FaceId,
}

#[derive(Clone, Debug)]
pub struct LinkGraph {
    pub base: ComplexPoint,
    pub nodes: Vec<LinkNode>,
    pub arcs: Vec<LinkArc>,
}

impl LinkGraph {
    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    /// Shortest-path distances from a set of (node, initial distance) sources,
    /// skipping arc `skip` if given.
    pub fn distances(&self, sources: &[(usize, f64)], skip: Option<usize>) -> Vec<f64> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![vec![]; self.nodes.len()];
        for (i, a) in self.arcs.iter().enumerate() {
            if Some(i) == skip || a.a == a.b {
                continue;
            }
            adj[a.a].push((a.b, a.length));
            adj[a.b].push((a.a, a.length));
        }
        let mut d = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &(n, x) in sources {
            if x < d[n] {
                d[n] = x;
                heap.push(Reverse((ordered(x), n)));
            }
        }
        while let Some(Reverse((du, u))) = heap.pop() {
            let du = f64::from_bits(du);
            if du > d[u] {
                continue;
            }
            for &(w, l) in &adj[u] {
                if du + l < d[w] {
                    d[w] = du + l;
                    heap.push(Reverse((ordered(d[w]), w)));
                }
            }
        }
        d
    }

    /// Length of the shortest injective cycle, `None` if the graph is a forest.
    pub fn girth(&self) -> Option<f64> {
        let mut best = f64::INFINITY;
        for (i, a) in self.arcs.iter().enumerate() {
            let cyc = if a.a == a.b {
                a.length
            } else {
                a.length + self.distances(&[(a.a, 0.0)], Some(i))[a.b]
            };
            best = best.min(cyc);
        }
        best.is_finite().then_some(best)
    }
}

/// Nonnegative floats order like their bit patterns.
fn ordered(x: f64) -> u64 {
    x.to_bits()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VertexGirth {
    pub vertex: u64,
    /// `None` when the link has no cycle.
    pub girth: Option<f64>,
}

/// Link of interior points of an edge shared by several faces: one half-circle per face.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EdgeGirth {
    pub edge: u64,
    pub faces: usize,
    pub girth: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LinkReport {
    pub vertices: Vec<VertexGirth>,
    pub edges: Vec<EdgeGirth>,
    pub min_girth: Option<f64>,
    pub pass: bool,
}

impl Complex {
    pub fn link_graph(&self, p: &ComplexPoint) -> LinkGraph {
        match *p {
            ComplexPoint::Face { face, .. } => LinkGraph {
                base: *p,
                nodes: vec![LinkNode::Circle { face }],
                arcs: vec![LinkArc { a: 0, b: 0, length: 2.0 * PI, face }],
            },
            ComplexPoint::Edge { edge, .. } => LinkGraph {
                base: *p,
                nodes: vec![
                    LinkNode::EdgeDir { edge, forward: true },
                    LinkNode::EdgeDir { edge, forward: false },
                ],
                arcs: self.edges[edge.0]
                    .sides
                    .iter()
                    .map(|&(face, _)| LinkArc { a: 0, b: 1, length: PI, face })
                    .collect(),
            },
            ComplexPoint::Vertex(v) => self.vertex_link(v),
        }
    }

    fn vertex_link(&self, v: VertexId) -> LinkGraph {
        let vert = &self.vertices[v.0];
        let nodes: Vec<LinkNode> = vert
            .edges
            .iter()
            .map(|&e| LinkNode::EdgeEnd { edge: e, end: usize::from(self.edges[e.0].ends[1] == v) })
            .collect();
        let node_of = |e: EdgeId| nodes.iter().position(|n| matches!(n, LinkNode::EdgeEnd { edge, .. } if *edge == e));
        let mut arcs = Vec::new();
        for &(f, i) in &vert.corners {
            let face = &self.faces[f.0];
            let n = face.corners.len();
            let prev = (i + n - 1) % n;
            let length = vertex_angle(&face.corners[i], &face.corners[prev], &face.corners[(i + 1) % n])
                .unwrap_or(0.0);
            let a = node_of(face.sides[prev].edge).expect("corner edge incident to vertex");
            let b = node_of(face.sides[i].edge).expect("corner edge incident to vertex");
            arcs.push(LinkArc { a, b, length, face: f });
        }
        LinkGraph { base: ComplexPoint::Vertex(v), nodes, arcs }
    }

    /// Girth of every vertex link and of every edge shared by two or more faces; passes iff each is at least `2π`.
    pub fn check_link_condition(&self) -> LinkReport {
        let vertices: Vec<VertexGirth> = (0..self.vertices.len())
            .map(|v| VertexGirth {
                vertex: self.vertices[v].label,
                girth: self.vertex_link(VertexId(v)).girth(),
            })
            .collect();
        let edges: Vec<EdgeGirth> = (0..self.edges.len())
            .filter(|&e| self.edges[e].sides.len() >= 2)
            .map(|e| EdgeGirth {
                edge: self.edges[e].label,
                faces: self.edges[e].sides.len(),
                girth: self.link_graph(&ComplexPoint::Edge { edge: EdgeId(e), t: 0.5 * self.edges[e].length }).girth(),
            })
            .collect();
        let all = vertices.iter().map(|g| g.girth).chain(edges.iter().map(|g| g.girth));
        let min_girth = all.flatten().fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m: f64| m.min(g))));
        let pass = min_girth.is_none_or(|g| g >= 2.0 * PI - LINK_TOL);
        LinkReport { vertices, edges, min_girth, pass }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::square_doc;
    use crate::complex::{ComplexDoc, EdgeDoc, FaceDoc, SideDoc};
    use crate::model::ModelPoint;
    use std::f64::consts::FRAC_PI_2;

    fn cone_doc() -> ComplexDoc {
        // three unit equilateral triangles around vertex 0
        let s3 = 3f64.sqrt() / 2.0;
        ComplexDoc {
            kappa: 0.0,
            vertices: vec![0, 1, 2, 3],
            edges: vec![
                EdgeDoc { id: 1, length: 1.0, endpoints: [0, 1] },
                EdgeDoc { id: 2, length: 1.0, endpoints: [0, 2] },
                EdgeDoc { id: 3, length: 1.0, endpoints: [0, 3] },
                EdgeDoc { id: 4, length: 1.0, endpoints: [1, 2] },
                EdgeDoc { id: 5, length: 1.0, endpoints: [2, 3] },
                EdgeDoc { id: 6, length: 1.0, endpoints: [3, 1] },
            ],
            faces: [(1u64, 2u64, 4u64, false), (2, 3, 5, false), (3, 1, 6, false)]
                .iter()
                .enumerate()
                .map(|(i, &(a, b, o, r))| FaceDoc {
                    id: i as u64 + 1,
                    polygon: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, s3]],
                    sides: vec![
                        SideDoc { edge: a, reversed: false },
                        SideDoc { edge: o, reversed: r },
                        SideDoc { edge: b, reversed: true },
                    ],
                })
                .collect(),
        }
    }

    #[test]
    fn face_link_is_circle() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let p = ComplexPoint::Face { face: FaceId(0), at: ModelPoint::euclidean(0.5, 0.5) };
        let l = c.link_graph(&p);
        assert_eq!(l.total_length(), 2.0 * PI);
        assert_eq!(l.girth(), Some(2.0 * PI));
    }

    #[test]
    fn square_corner_single_arc() {
        let c = Complex::build(square_doc(1.0)).unwrap();
        let l = c.link_graph(&ComplexPoint::Vertex(VertexId(0)));
        assert_eq!(l.arcs.len(), 1);
        assert!((l.arcs[0].length - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(l.girth(), None);
        assert!(c.check_link_condition().pass);
    }

    #[test]
    fn cone_fails_with_girth_pi() {
        let c = Complex::build(cone_doc()).unwrap();
        let r = c.check_link_condition();
        assert!(!r.pass);
        let g = r.vertices.iter().find(|g| g.vertex == 0).unwrap().girth.unwrap();
        assert!((g - PI).abs() < 1e-12);
    }

    #[test]
    fn edge_link_has_one_arc_per_face() {
        let c = Complex::build(cone_doc()).unwrap();
        let l = c.link_graph(&ComplexPoint::Edge { edge: EdgeId(0), t: 0.5 });
        assert_eq!(l.nodes.len(), 2);
        assert_eq!(l.arcs.len(), 2);
        assert_eq!(l.girth(), Some(2.0 * PI));
    }

    #[test]
    fn tripod_spine_girth_is_exactly_two_pi() {
        let c = Complex::build(crate::builders::tripod(2.0, 2.0)).unwrap();
        let r = c.check_link_condition();
        assert!(r.pass);
        assert_eq!(r.min_girth, Some(2.0 * PI));
        assert!(r.edges.iter().any(|e| e.faces == 3 && e.girth == Some(2.0 * PI)));
    }
}
