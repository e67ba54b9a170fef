//! Integer homology of subdivisions and regions, and homological curve interiors.
//!
//! The interior of a simple closed edge cycle `γ` is read off the unique
//! integer 2-chain bounded by `γ`: a triangle is inside iff its coefficient is
//! nonzero. Vertices and edges off `γ` are inside iff some incident triangle
//! is. The same verdicts are recomputed independently by deleting the open
//! star of a point and asking whether `γ` still bounds.

mod snf;
mod solve;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{SeamTrace, SubCell, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::region::Region;
pub use snf::{dense_smith, smith, Reduction, SparseMatrix};
pub use solve::SolveOptions;
use solve::Incidence;

/// Boundary matrices of a 2-complex with cells indexed densely.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    /// Sub-vertex, sub-edge and sub-triangle ids in index order.
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub tris: Vec<usize>,
    /// Column per edge: `v1 - v0`.
    pub d1: Vec<[(usize, i64); 2]>,
    /// Column per triangle.
    pub d2: Vec<[(usize, i64); 3]>,
    edge_tris: Vec<Vec<usize>>,
    vertex_tris: Vec<Vec<usize>>,
    vertex_pos: Vec<Option<usize>>,
    edge_pos: Vec<Option<usize>>,
    tri_pos: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct H1Summary {
    pub betti0: usize,
    pub betti1: usize,
    pub betti2: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<u64>,
    pub bigint_fallback: bool,
}

impl ChainComplex {
    pub fn of_subdivision(s: &SubdividedComplex) -> Self {
        Self::build(s, 0..s.vertices.len(), 0..s.edges.len(), 0..s.tris.len())
    }

    pub fn of_region(s: &SubdividedComplex, r: &Region) -> Self {
        Self::build(s, r.vertices.iter().copied(), r.edges.iter().copied(), r.tris.iter().copied())
    }

    fn build(
        s: &SubdividedComplex,
        vertices: impl Iterator<Item = usize>,
        edges: impl Iterator<Item = usize>,
        tris: impl Iterator<Item = usize>,
    ) -> Self {
        let vertices: Vec<usize> = vertices.collect();
        let edges: Vec<usize> = edges.collect();
        let tris: Vec<usize> = tris.collect();
        let mut vertex_pos = vec![None; s.vertices.len()];
        let mut edge_pos = vec![None; s.edges.len()];
        let mut tri_pos = vec![None; s.tris.len()];
        for (i, &v) in vertices.iter().enumerate() {
            vertex_pos[v] = Some(i);
        }
        for (i, &e) in edges.iter().enumerate() {
            edge_pos[e] = Some(i);
        }
        for (i, &t) in tris.iter().enumerate() {
            tri_pos[t] = Some(i);
        }
        let d1 = edges
            .iter()
            .map(|&e| {
                let [a, b] = s.edges[e].ends;
                [(vertex_pos[a].expect("closed complex"), -1), (vertex_pos[b].expect("closed complex"), 1)]
            })
            .collect();
        let mut edge_tris = vec![vec![]; edges.len()];
        let mut vertex_tris = vec![vec![]; vertices.len()];
        let d2 = tris
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let tr = &s.tris[t];
                let mut col = [(0, 0); 3];
                for i in 0..3 {
                    let e = edge_pos[tr.edges[i]].expect("closed complex");
                    col[i] = (e, tr.signs[i] as i64);
                    edge_tris[e].push(k);
                    vertex_tris[vertex_pos[tr.verts[i]].expect("closed complex")].push(k);
                }
                col
            })
            .collect();
        ChainComplex { vertices, edges, tris, d1, d2, edge_tris, vertex_tris, vertex_pos, edge_pos, tri_pos }
    }

    pub fn vertex_index(&self, v: usize) -> Option<usize> {
        self.vertex_pos.get(v).copied().flatten()
    }

    pub fn edge_index(&self, e: usize) -> Option<usize> {
        self.edge_pos.get(e).copied().flatten()
    }

    pub fn tri_index(&self, t: usize) -> Option<usize> {
        self.tri_pos.get(t).copied().flatten()
    }

    /// Triangles (indices) incident to a vertex index.
    pub fn tris_at_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_tris[v]
    }

    pub fn tris_at_edge(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }

    pub fn boundary1(&self, chain: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.vertices.len()];
        for (e, col) in self.d1.iter().enumerate() {
            for &(v, s) in col {
                out[v] += s * chain[e];
            }
        }
        out
    }

    pub fn boundary2(&self, chain: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.edges.len()];
        for (t, col) in self.d2.iter().enumerate() {
            for &(e, s) in col {
                out[e] += s * chain[t];
            }
        }
        out
    }

    /// `d1 d2 = 0`, checked entrywise.
    pub fn d1d2_is_zero(&self) -> bool {
        self.d2.iter().all(|col| {
            let mut acc = std::collections::BTreeMap::<usize, i64>::new();
            for &(e, s) in col {
                for &(v, c) in &self.d1[e] {
                    *acc.entry(v).or_default() += s * c;
                }
            }
            acc.values().all(|&x| x == 0)
        })
    }

    pub fn d2_matrix(&self) -> SparseMatrix {
        SparseMatrix { rows: self.edges.len(), cols: self.d2.iter().map(|c| c.to_vec()).collect() }
    }

    pub fn d1_matrix(&self) -> SparseMatrix {
        SparseMatrix { rows: self.vertices.len(), cols: self.d1.iter().map(|c| c.to_vec()).collect() }
    }

    fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut n = self.vertices.len();
        for col in &self.d1 {
            let (a, b) = (find(&mut parent, col[0].0), find(&mut parent, col[1].0));
            if a != b {
                parent[a] = b;
                n -= 1;
            }
        }
        n
    }

    pub fn homology(&self) -> Result<H1Summary> {
        let betti0 = self.components();
        let rank1 = self.vertices.len() - betti0;
        let red = smith(&self.d2_matrix());
        let torsion = red
            .factors
            .iter()
            .map(|f| u64::try_from(f.clone()).map_err(|_| CatkError::Homology(format!("torsion factor {f} too large"))))
            .collect::<Result<Vec<u64>>>()?;
        Ok(H1Summary {
            betti0,
            betti1: self.edges.len() - rank1 - red.rank,
            betti2: self.tris.len() - red.rank,
            torsion,
            bigint_fallback: red.bigint_fallback,
        })
    }

    /// The unique 2-chain on the triangles not `skip`ped with boundary `rhs`.
    pub fn solve_boundary(&self, rhs: &[i64], skip: impl Fn(usize) -> bool, opts: SolveOptions) -> Option<Vec<i64>> {
        let inc = Incidence { tri_edges: &self.d2, edge_tris: &self.edge_tris };
        solve::solve(&inc, rhs, skip, opts)
    }
}

/// A simple closed edge cycle of a subdivision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleCurve {
    pub vertices: Vec<usize>,
    /// (sub-edge, +1 when traversed from `ends[0]` to `ends[1]`).
    pub edges: Vec<(usize, i8)>,
}

impl CycleCurve {
    pub fn from_trace(s: &SubdividedComplex, t: &SeamTrace) -> Result<Self> {
        if !t.closed {
            return Err(CatkError::InvalidCurve("curve is not closed".into()));
        }
        let c = CycleCurve { vertices: t.vertices.clone(), edges: t.edges.clone() };
        c.validate(s)?;
        Ok(c)
    }

    /// Closed cycle through consecutive vertices joined by sub-edges.
    pub fn from_vertices(s: &SubdividedComplex, vertices: &[usize]) -> Result<Self> {
        let n = vertices.len();
        let mut edges = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            let e = s
                .vertex_edges(a)
                .iter()
                .copied()
                .find(|&e| s.edges[e].ends == [a, b] || s.edges[e].ends == [b, a])
                .ok_or_else(|| CatkError::InvalidCurve(format!("vertices {a} and {b} are not adjacent")))?;
            edges.push((e, if s.edges[e].ends[0] == a { 1 } else { -1 }));
        }
        let c = CycleCurve { vertices: vertices.to_vec(), edges };
        c.validate(s)?;
        Ok(c)
    }

    fn validate(&self, s: &SubdividedComplex) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 || self.edges.len() != n {
            return Err(CatkError::InvalidCurve(format!("cycle needs at least 3 edges, got {}", self.edges.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &v in &self.vertices {
            if !seen.insert(v) {
                return Err(CatkError::InvalidCurve(format!("curve visits vertex {v} twice")));
            }
        }
        for (k, &(e, sign)) in self.edges.iter().enumerate() {
            let [a, b] = s.edges[e].ends;
            let (from, to) = if sign > 0 { (a, b) } else { (b, a) };
            if from != self.vertices[k] || to != self.vertices[(k + 1) % n] {
                return Err(CatkError::InvalidCurve(format!("edge {k} of the curve is not consecutive")));
            }
        }
        Ok(())
    }

    /// The cycle as a 1-chain of `cc`.
    pub fn chain(&self, cc: &ChainComplex) -> Result<Vec<i64>> {
        let mut z = vec![0i64; cc.edges.len()];
        for &(e, sign) in &self.edges {
            let i = cc
                .edge_index(e)
                .ok_or_else(|| CatkError::InvalidCurve(format!("curve edge {e} is not in the complex")))?;
            z[i] += sign as i64;
        }
        Ok(z)
    }

    pub fn length(&self, s: &SubdividedComplex) -> f64 {
        self.edges.iter().map(|&(e, _)| s.edges[e].length).sum()
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
}

/// Unique integer 2-chain of `cc` bounded by `γ`, one coefficient per triangle index.
pub fn bounding_chain(cc: &ChainComplex, gamma: &CycleCurve, opts: SolveOptions) -> Result<Vec<i64>> {
    let z = gamma.chain(cc)?;
    if cc.boundary1(&z).iter().any(|&x| x != 0) {
        return Err(CatkError::InvalidCurve("curve is not a cycle".into()));
    }
    cc.solve_boundary(&z, |_| false, opts)
        .ok_or_else(|| CatkError::InvalidScenario("curve bounds no 2-chain; the complex is not H1-trivial".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    On,
    In,
    Out,
}

/// Interior of a curve, per cell of the subdivision it lives in.
#[derive(Clone, Debug, Serialize)]
pub struct InteriorClassification {
    /// Bounding-chain coefficient per sub-triangle.
    pub chain: Vec<i64>,
    pub tris: Vec<CellState>,
    pub edges: Vec<CellState>,
    pub vertices: Vec<CellState>,
}

impl InteriorClassification {
    pub fn state(&self, c: SubCell) -> CellState {
        match c {
            SubCell::Vertex(v) => self.vertices[v],
            SubCell::Edge(e) => self.edges[e],
            SubCell::Tri(t) => self.tris[t],
        }
    }

    /// Closed set `γ ∪ Int γ` as a region.
    pub fn closure_region(&self, s: &SubdividedComplex) -> Region {
        let mut cells: Vec<SubCell> = Vec::new();
        cells.extend((0..self.tris.len()).filter(|&t| self.tris[t] == CellState::In).map(SubCell::Tri));
        cells.extend((0..self.edges.len()).filter(|&e| self.edges[e] != CellState::Out).map(SubCell::Edge));
        cells.extend((0..self.vertices.len()).filter(|&v| self.vertices[v] != CellState::Out).map(SubCell::Vertex));
        Region::from_cells(s, cells)
    }

    pub fn interior_tris(&self) -> Vec<usize> {
        (0..self.tris.len()).filter(|&t| self.tris[t] == CellState::In).collect()
    }
}

/// Classify every cell of `s` with respect to `γ`.
pub fn curve_interior(s: &SubdividedComplex, gamma: &CycleCurve) -> Result<InteriorClassification> {
    let cc = ChainComplex::of_subdivision(s);
    let chain = bounding_chain(&cc, gamma, SolveOptions::default())?;
    let tris: Vec<CellState> =
        chain.iter().map(|&c| if c != 0 { CellState::In } else { CellState::Out }).collect();
    let mut on_edge = vec![false; s.edges.len()];
    for &(e, _) in &gamma.edges {
        on_edge[e] = true;
    }
    let mut on_vertex = vec![false; s.vertices.len()];
    for &v in &gamma.vertices {
        on_vertex[v] = true;
    }
    let edges = (0..s.edges.len())
        .map(|e| {
            if on_edge[e] {
                CellState::On
            } else if s.edges[e].tris.iter().any(|&t| tris[t] == CellState::In) {
                CellState::In
            } else {
                CellState::Out
            }
        })
        .collect();
    let vertices = (0..s.vertices.len())
        .map(|v| {
            if on_vertex[v] {
                CellState::On
            } else if s.vertex_tris(v).iter().any(|&t| tris[t] == CellState::In) {
                CellState::In
            } else {
                CellState::Out
            }
        })
        .collect();
    Ok(InteriorClassification { chain, tris, edges, vertices })
}

/// Vertex-deletion test: is `[γ] ≠ 0` in the complement of the open star of vertex `v`?
pub fn deletion_in_vertex(cc: &ChainComplex, z: &[i64], v: usize) -> bool {
    let Some(vi) = cc.vertex_index(v) else { return false };
    let star = cc.tris_at_vertex(vi);
    cc.solve_boundary(z, |t| star.contains(&t), SolveOptions::default()).is_none()
}

/// Same test for a barycenter inserted in triangle `t`: its open star is the open triangle.
pub fn deletion_in_tri(cc: &ChainComplex, z: &[i64], t: usize) -> bool {
    let Some(ti) = cc.tri_index(t) else { return false };
    cc.solve_boundary(z, |k| k == ti, SolveOptions::default()).is_none()
}

/// Midpoint of edge `e`: its open star is the open edge and its incident open triangles.
pub fn deletion_in_edge(cc: &ChainComplex, z: &[i64], e: usize) -> bool {
    let Some(ei) = cc.edge_index(e) else { return false };
    let star = cc.tris_at_edge(ei);
    cc.solve_boundary(z, |t| star.contains(&t), SolveOptions::default()).is_none()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OracleAgreement {
    pub tested_vertices: usize,
    pub tested_tris: usize,
    pub agreeing: usize,
    /// Cells where the two criteria differ, e.g. `"vertex 12"`.
    pub disagreements: Vec<String>,
}

impl OracleAgreement {
    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compare the chain classification with the deletion test on the given cells.
pub fn cross_validate(
    s: &SubdividedComplex,
    gamma: &CycleCurve,
    cls: &InteriorClassification,
    vertices: &[usize],
    tris: &[usize],
) -> Result<OracleAgreement> {
    let cc = ChainComplex::of_subdivision(s);
    let z = gamma.chain(&cc)?;
    let vs: Vec<usize> = vertices.iter().copied().filter(|&v| cls.vertices[v] != CellState::On).collect();
    let bad_v: Vec<String> = vs
        .par_iter()
        .filter(|&&v| deletion_in_vertex(&cc, &z, v) != (cls.vertices[v] == CellState::In))
        .map(|v| format!("vertex {v}"))
        .collect();
    let bad_t: Vec<String> = tris
        .par_iter()
        .filter(|&&t| deletion_in_tri(&cc, &z, t) != (cls.tris[t] == CellState::In))
        .map(|t| format!("triangle {t}"))
        .collect();
    let mut disagreements = bad_v;
    disagreements.extend(bad_t);
    let tested = vs.len() + tris.len();
    Ok(OracleAgreement {
        tested_vertices: vs.len(),
        tested_tris: tris.len(),
        agreeing: tested - disagreements.len(),
        disagreements,
    })
}

#[cfg(test)]
mod tests;
