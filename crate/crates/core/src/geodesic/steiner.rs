//! Steiner-point graphs over a subdivision and Dijkstra on them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Mask;
use crate::complex::{Carrier, ComplexPoint, FaceId, SubCell, SubdividedComplex};
use crate::model::{dist, ModelPoint};

#[derive(Clone, Copy, Debug)]
enum NodeKind {
    Vertex(usize),
    Edge { edge: usize, s: f64 },
}

/// Nodes are sub-vertices plus evenly spaced points on sub-edges; arcs join
/// nodes on the boundary of a common triangle.
pub struct SteinerGraph {
    pub h_s: f64,
    kinds: Vec<NodeKind>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    arc_face: Vec<u32>,
    vertex_node: Vec<Option<usize>>,
    /// Per sub-edge: nodes ordered from `ends[0]` to `ends[1]`, endpoints included.
    edge_nodes: Vec<Vec<usize>>,
}

/// A node or query point reachable from a graph node, with the face of the joining segment.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Attach {
    pub node: usize,
    pub cost: f64,
    pub face: FaceId,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl SteinerGraph {
    pub fn build(s: &SubdividedComplex, mask: Mask<'_>, h_s: f64) -> Self {
        let mut kinds = Vec::new();
        let mut vertex_node = vec![None; s.vertices.len()];
        for v in 0..s.vertices.len() {
            if mask.vertex(v) {
                vertex_node[v] = Some(kinds.len());
                kinds.push(NodeKind::Vertex(v));
            }
        }
        let mut edge_nodes = vec![Vec::new(); s.edges.len()];
        for (e, edge) in s.edges.iter().enumerate() {
            if !mask.edge(e) {
                continue;
            }
            let k = ((edge.length / h_s).ceil() as usize).max(1);
            let mut list = vec![vertex_node[edge.ends[0]].expect("closed region")];
            for i in 1..k {
                list.push(kinds.len());
                kinds.push(NodeKind::Edge { edge: e, s: edge.length * i as f64 / k as f64 });
            }
            list.push(vertex_node[edge.ends[1]].expect("closed region"));
            edge_nodes[e] = list;
        }
        let mut adj: Vec<Vec<(u32, f64, u32)>> = vec![Vec::new(); kinds.len()];
        let mut covered = vec![false; s.edges.len()];
        for (t, tri) in s.tris.iter().enumerate() {
            if !mask.tri(t) {
                continue;
            }
            let f = tri.face;
            // (node, edge slot, position along that edge, chart point)
            let mut pts: Vec<(usize, Option<(usize, usize)>, ModelPoint)> = Vec::new();
            for i in 0..3 {
                pts.push((vertex_node[tri.verts[i]].expect("closed region"), None, tri.chart[i]));
            }
            for (slot, &e) in tri.edges.iter().enumerate() {
                covered[e] = true;
                let list = &edge_nodes[e];
                for (pos, &n) in list.iter().enumerate().take(list.len() - 1).skip(1) {
                    let NodeKind::Edge { s: at, .. } = kinds[n] else { unreachable!() };
                    let p = s.subedge_point(e, at, f).expect("edge of triangle");
                    pts.push((n, Some((slot, pos)), p));
                }
            }
            for a in 0..pts.len() {
                for b in a + 1..pts.len() {
                    if same_edge_skip(&pts[a], &pts[b], tri, &edge_nodes) {
                        continue;
                    }
                    let w = dist(&pts[a].2, &pts[b].2).unwrap_or(f64::INFINITY);
                    adj[pts[a].0].push((pts[b].0 as u32, w, f.0 as u32));
                    adj[pts[b].0].push((pts[a].0 as u32, w, f.0 as u32));
                }
            }
        }
        for (e, edge) in s.edges.iter().enumerate() {
            if covered[e] || edge_nodes[e].is_empty() {
                continue;
            }
            let f = carrier_face(s, edge.carrier);
            let list = &edge_nodes[e];
            let step = edge.length / (list.len() - 1) as f64;
            for w in list.windows(2) {
                adj[w[0]].push((w[1] as u32, step, f.0 as u32));
                adj[w[1]].push((w[0] as u32, step, f.0 as u32));
            }
        }
        let mut offsets = Vec::with_capacity(kinds.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut arc_face = Vec::new();
        offsets.push(0);
        for mut list in adj {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            list.dedup_by_key(|x| x.0);
            for (t, w, f) in list {
                targets.push(t);
                weights.push(w);
                arc_face.push(f);
            }
            offsets.push(targets.len());
        }
        SteinerGraph { h_s, kinds, offsets, targets, weights, arc_face, vertex_node, edge_nodes }
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub(crate) fn site(&self, s: &SubdividedComplex, n: usize) -> ComplexPoint {
        match self.kinds[n] {
            NodeKind::Vertex(v) => s.vertices[v].site,
            NodeKind::Edge { edge, s: at } => s.subedge_site(edge, at),
        }
    }

    fn chart_in(&self, s: &SubdividedComplex, n: usize, f: FaceId) -> Option<ModelPoint> {
        match self.kinds[n] {
            NodeKind::Vertex(v) => s.vertex_chart(v, f),
            NodeKind::Edge { edge, s: at } => s.subedge_point(edge, at, f),
        }
    }

    /// Graph nodes adjacent to a query point, with segment costs.
    pub(crate) fn attach(&self, s: &SubdividedComplex, mask: Mask<'_>, p: &ComplexPoint) -> Vec<Attach> {
        let Ok(cell) = s.cell_of(p) else { return Vec::new() };
        let mut out = Vec::new();
        let tri_nodes = |t: usize, out: &mut Vec<Attach>| {
            let tri = &s.tris[t];
            let f = tri.face;
            let Some(pc) = s.parent().chart_point(p, f) else { return };
            let mut nodes: Vec<usize> = tri.verts.iter().filter_map(|&v| self.vertex_node[v]).collect();
            for &e in &tri.edges {
                nodes.extend(self.edge_nodes[e].iter().copied());
            }
            nodes.sort_unstable();
            nodes.dedup();
            for n in nodes {
                if let Some(q) = self.chart_in(s, n, f) {
                    out.push(Attach { node: n, cost: dist(&pc, &q).unwrap_or(f64::INFINITY), face: f });
                }
            }
        };
        match cell {
            SubCell::Vertex(v) => {
                if let Some(n) = self.vertex_node[v] {
                    let f = s.parent().faces_of(p)[0];
                    out.push(Attach { node: n, cost: 0.0, face: f });
                }
            }
            SubCell::Edge(e) => {
                if !mask.edge(e) {
                    return out;
                }
                for &t in &s.edges[e].tris {
                    if mask.tri(t) {
                        tri_nodes(t, &mut out);
                    }
                }
                let f = carrier_face(s, s.edges[e].carrier);
                if let Some(pc) = s.parent().chart_point(p, f) {
                    for &n in &self.edge_nodes[e] {
                        if let Some(q) = self.chart_in(s, n, f) {
                            out.push(Attach { node: n, cost: dist(&pc, &q).unwrap_or(f64::INFINITY), face: f });
                        }
                    }
                }
            }
            SubCell::Tri(t) => {
                if mask.tri(t) {
                    tri_nodes(t, &mut out);
                }
            }
        }
        out
    }

    /// Shortest node sequence from any source to any target, costs included.
    ///
    /// Returns (total, source attach, node path, target attach).
    pub(crate) fn shortest(&self, sources: &[Attach], targets: &[Attach]) -> Option<(f64, Attach, Vec<usize>, Attach)> {
        let n = self.kinds.len();
        let mut d = vec![f64::INFINITY; n];
        let mut prev: Vec<u32> = vec![u32::MAX; n];
        let mut from_src: Vec<u32> = vec![u32::MAX; n];
        let mut tcost: Vec<Option<usize>> = vec![None; n];
        for (k, t) in targets.iter().enumerate() {
            match tcost[t.node] {
                Some(j) if targets[j].cost <= t.cost => {}
                _ => tcost[t.node] = Some(k),
            }
        }
        let mut heap = BinaryHeap::new();
        for (k, a) in sources.iter().enumerate() {
            if a.cost < d[a.node] {
                d[a.node] = a.cost;
                from_src[a.node] = k as u32;
                heap.push(Entry(a.cost, a.node));
            }
        }
        let mut best: Option<(f64, usize)> = None;
        while let Some(Entry(du, u)) = heap.pop() {
            if du > d[u] {
                continue;
            }
            if best.is_some_and(|b| du >= b.0) {
                break;
            }
            if let Some(k) = tcost[u] {
                let total = du + targets[k].cost;
                if best.is_none_or(|b| total < b.0) {
                    best = Some((total, u));
                }
            }
            for a in self.offsets[u]..self.offsets[u + 1] {
                let v = self.targets[a] as usize;
                let nd = du + self.weights[a];
                if nd < d[v] {
                    d[v] = nd;
                    prev[v] = u as u32;
                    from_src[v] = u32::MAX;
                    heap.push(Entry(nd, v));
                }
            }
        }
        let (total, end) = best?;
        let mut path = vec![end];
        let mut cur = end;
        while prev[cur] != u32::MAX {
            cur = prev[cur] as usize;
            path.push(cur);
        }
        path.reverse();
        let src = sources[from_src[path[0]] as usize];
        let tgt = targets[tcost[end].expect("target node")];
        Some((total, src, path, tgt))
    }

    /// Face carrying the arc between adjacent nodes `a` and `b`.
    pub(crate) fn arc_face(&self, a: usize, b: usize) -> FaceId {
        let range = self.offsets[a]..self.offsets[a + 1];
        let k = self.targets[range.clone()].binary_search(&(b as u32)).expect("adjacent nodes");
        FaceId(self.arc_face[range.start + k] as usize)
    }
}

pub(crate) fn carrier_face(s: &SubdividedComplex, c: Carrier) -> FaceId {
    match c {
        Carrier::Face(f) => f,
        Carrier::ParentEdge(pe) => s.parent().edge(pe).sides[0].0,
    }
}

/// Pairs of points on one edge of the triangle are joined only when consecutive.
fn same_edge_skip(
    a: &(usize, Option<(usize, usize)>, ModelPoint),
    b: &(usize, Option<(usize, usize)>, ModelPoint),
    tri: &crate::complex::SubTri,
    edge_nodes: &[Vec<usize>],
) -> bool {
    let pos = |x: &(usize, Option<(usize, usize)>, ModelPoint), slot: usize| -> Option<usize> {
        match x.1 {
            Some((s, p)) if s == slot => Some(p),
            Some(_) => None,
            None => {
                let list = &edge_nodes[tri.edges[slot]];
                if list.first() == Some(&x.0) {
                    Some(0)
                } else if list.last() == Some(&x.0) {
                    Some(list.len() - 1)
                } else {
                    None
                }
            }
        }
    };
    (0..3).any(|slot| match (pos(a, slot), pos(b, slot)) {
        (Some(i), Some(j)) => i.abs_diff(j) > 1,
        _ => false,
    })
}
