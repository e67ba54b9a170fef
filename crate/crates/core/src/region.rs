//! Closed subsets of a subdivision, stored as unions of closed cells.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{ComplexPoint, FaceId, SubCell, SubdividedComplex};
use crate::model::ModelPoint;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Region {
    pub tris: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
    pub vertices: BTreeSet<usize>,
}

/// A shape removed from one parent face; triangles whose chart centroid lies inside are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum CarveOp {
    RemoveBox { face: u64, min: [f64; 2], max: [f64; 2] },
    RemoveDisk { face: u64, center: [f64; 2], radius: f64 },
}

impl CarveOp {
    fn removes(&self, s: &SubdividedComplex, t: usize) -> bool {
        let tri = &s.tris[t];
        let c = s.tri_chart2(t);
        let p = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
        let face_label = s.parent().face(tri.face).label;
        match *self {
            CarveOp::RemoveBox { face, min, max } => {
                face == face_label && (min[0]..=max[0]).contains(&p[0]) && (min[1]..=max[1]).contains(&p[1])
            }
            CarveOp::RemoveDisk { face, center, radius } => {
                face == face_label && (p[0] - center[0]).hypot(p[1] - center[1]) < radius
            }
        }
    }
}

impl Region {
    pub fn whole(s: &SubdividedComplex) -> Self {
        Region {
            tris: (0..s.tris.len()).collect(),
            edges: (0..s.edges.len()).collect(),
            vertices: (0..s.vertices.len()).collect(),
        }
    }

    /// Closure of a set of cells.
    pub fn from_cells(s: &SubdividedComplex, cells: impl IntoIterator<Item = SubCell>) -> Self {
        let mut r = Region::default();
        for c in cells {
            for d in s.closure(c) {
                r.insert(d);
            }
        }
        r
    }

    pub fn from_tris(s: &SubdividedComplex, tris: impl IntoIterator<Item = usize>) -> Self {
        Self::from_cells(s, tris.into_iter().map(SubCell::Tri))
    }

    /// Union of the sub-edges along the given parent edges.
    pub fn parent_skeleton(s: &SubdividedComplex, edges: &[crate::complex::EdgeId]) -> Self {
        Self::from_cells(
            s,
            edges.iter().flat_map(|&e| s.edge_subedges(e).iter().map(|&x| SubCell::Edge(x))).collect::<Vec<_>>(),
        )
    }

    pub fn carve(s: &SubdividedComplex, ops: &[CarveOp]) -> Self {
        Self::from_tris(s, (0..s.tris.len()).filter(|&t| !ops.iter().any(|op| op.removes(s, t))))
    }

    fn insert(&mut self, c: SubCell) {
        match c {
            SubCell::Vertex(v) => self.vertices.insert(v),
            SubCell::Edge(e) => self.edges.insert(e),
            SubCell::Tri(t) => self.tris.insert(t),
        };
    }

    pub fn union(&self, other: &Region) -> Region {
        Region {
            tris: self.tris.union(&other.tris).copied().collect(),
            edges: self.edges.union(&other.edges).copied().collect(),
            vertices: self.vertices.union(&other.vertices).copied().collect(),
        }
    }

    pub fn contains(&self, c: SubCell) -> bool {
        match c {
            SubCell::Vertex(v) => self.vertices.contains(&v),
            SubCell::Edge(e) => self.edges.contains(&e),
            SubCell::Tri(t) => self.tris.contains(&t),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_closed(&self, s: &SubdividedComplex) -> bool {
        self.tris.iter().all(|&t| s.closure(SubCell::Tri(t)).into_iter().all(|c| self.contains(c)))
            && self.edges.iter().all(|&e| s.closure(SubCell::Edge(e)).into_iter().all(|c| self.contains(c)))
    }

    pub fn contains_point(&self, s: &SubdividedComplex, p: &ComplexPoint) -> bool {
        s.cell_of(p).is_ok_and(|c| self.contains(c))
    }

    /// Whether the chart segment `a -> b` of parent face `f` stays in the region.
    pub fn contains_segment(&self, s: &SubdividedComplex, f: FaceId, a: &ModelPoint, b: &ModelPoint) -> bool {
        let pieces = s.trace_segment(f, a, b);
        !pieces.is_empty()
            && pieces.first().is_some_and(|p| p.t0 <= 1e-9)
            && pieces.last().is_some_and(|p| p.t1 >= 1.0 - 1e-9)
            && pieces.windows(2).all(|w| (w[0].t1 - w[1].t0).abs() <= 1e-9)
            && pieces.iter().all(|p| self.contains(p.cell))
    }

    pub fn area(&self, s: &SubdividedComplex) -> f64 {
        self.tris
            .iter()
            .map(|&t| {
                let c = &s.tris[t].chart;
                crate::model::triangle_area(&c[0], &c[1], &c[2]).unwrap_or(0.0)
            })
            .sum()
    }

    /// Grow a region with trivial H1 one triangle at a time from a seeded root.
    ///
    /// A triangle sharing at least one edge is accepted iff it leaves the Euler
    /// characteristic unchanged; inside a complex without 2-cycles that keeps H1
    /// trivial.
    pub fn generate(s: &SubdividedComplex, seed: u64, target: usize) -> Region {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = Region::default();
        if s.tris.is_empty() || target == 0 {
            return r;
        }
        let root = rng.gen_range(0..s.tris.len());
        for c in s.closure(SubCell::Tri(root)) {
            r.insert(c);
        }
        let mut frontier: BTreeSet<usize> = BTreeSet::new();
        let push_neighbours = |r: &Region, t: usize, frontier: &mut BTreeSet<usize>| {
            for &e in &s.tris[t].edges {
                for &u in &s.edges[e].tris {
                    if !r.tris.contains(&u) {
                        frontier.insert(u);
                    }
                }
            }
        };
        push_neighbours(&r, root, &mut frontier);
        while r.tris.len() < target {
            let ok: Vec<usize> = frontier.iter().copied().filter(|&t| euler_change(s, &r, t) == 0).collect();
            if ok.is_empty() {
                break;
            }
            let t = ok[rng.gen_range(0..ok.len())];
            frontier.remove(&t);
            for c in s.closure(SubCell::Tri(t)) {
                r.insert(c);
            }
            push_neighbours(&r, t, &mut frontier);
        }
        r
    }
}

/// Change of Euler characteristic when adding the closed triangle `t`.
fn euler_change(s: &SubdividedComplex, r: &Region, t: usize) -> i64 {
    let tri = &s.tris[t];
    let new_e = tri.edges.iter().filter(|e| !r.edges.contains(e)).count() as i64;
    let new_v = tri.verts.iter().filter(|v| !r.vertices.contains(v)).count() as i64;
    1 - new_e + new_v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::square_doc;
    use crate::complex::Complex;
    use crate::homology::ChainComplex;

    fn square(h: f64) -> SubdividedComplex {
        SubdividedComplex::new(&Complex::build(square_doc(2.0)).unwrap(), h, &[]).unwrap()
    }

    #[test]
    fn whole_region_is_closed() {
        let s = square(0.5);
        let r = Region::whole(&s);
        assert!(r.is_closed(&s));
        assert!((r.area(&s) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn single_triangle_generation() {
        let s = square(0.5);
        let r = Region::generate(&s, 3, 1);
        assert_eq!(r.tris.len(), 1);
        assert_eq!(r.edges.len(), 3);
        assert_eq!(r.vertices.len(), 3);
    }

    #[test]
    fn generated_regions_have_trivial_h1() {
        let s = square(0.4);
        for seed in 0..5 {
            let r = Region::generate(&s, seed, 40);
            assert!(r.is_closed(&s));
            let h = ChainComplex::of_region(&s, &r).homology().unwrap();
            assert_eq!((h.betti0, h.betti1), (1, 0), "seed {seed}");
        }
    }

    #[test]
    fn full_target_on_disk_takes_everything() {
        let s = square(0.8);
        let r = Region::generate(&s, 11, s.tris.len());
        assert_eq!(r.tris.len(), s.tris.len());
    }

    #[test]
    fn carve_box_removes_hole() {
        let s = square(0.25);
        let r = Region::carve(&s, &[CarveOp::RemoveBox { face: 1, min: [0.5, 0.5], max: [1.5, 1.5] }]);
        assert!(r.tris.len() < s.tris.len());
        let h = ChainComplex::of_region(&s, &r).homology().unwrap();
        assert_eq!(h.betti1, 1);
    }

    #[test]
    fn segment_containment() {
        let s = square(0.5);
        let r = Region::whole(&s);
        assert!(r.contains_segment(&s, FaceId(0), &ModelPoint::euclidean(0.1, 0.1), &ModelPoint::euclidean(1.9, 1.7)));
        let carved = Region::carve(&s, &[CarveOp::RemoveBox { face: 1, min: [0.0, 0.0], max: [1.0, 2.0] }]);
        assert!(!carved.contains_segment(&s, FaceId(0), &ModelPoint::euclidean(0.1, 0.1), &ModelPoint::euclidean(1.9, 1.7)));
    }
}
