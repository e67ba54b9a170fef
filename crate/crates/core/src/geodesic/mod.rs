//! Geodesics in a subdivided complex and in closed regions of it.
//!
//! A Steiner-point graph gives an initial path, which is then straightened
//! exactly through its unfolded triangle channel. Rounds repeat with halved
//! Steiner spacing until the length stops decreasing.

mod extend;
mod funnel;
pub(crate) mod link;
mod path;
mod steiner;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

pub use extend::{extend_geodesic, ExtendOptions, Extension, ExtensionOutcome};
pub use link::angle_between;
pub use path::PiecewisePath;
pub use steiner::SteinerGraph;

use crate::complex::{ComplexPoint, SubCell, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::region::Region;

/// Restriction of paths to a region, or no restriction.
#[derive(Clone, Copy, Debug)]
pub struct Mask<'a>(Option<&'a Region>);

impl<'a> Mask<'a> {
    pub const ALL: Mask<'static> = Mask(None);

    pub fn region(r: &'a Region) -> Self {
        Mask(Some(r))
    }

    pub fn get(&self) -> Option<&'a Region> {
        self.0
    }

    pub fn tri(&self, t: usize) -> bool {
        self.0.is_none_or(|r| r.tris.contains(&t))
    }

    pub fn edge(&self, e: usize) -> bool {
        self.0.is_none_or(|r| r.edges.contains(&e))
    }

    pub fn vertex(&self, v: usize) -> bool {
        self.0.is_none_or(|r| r.vertices.contains(&v))
    }

    pub fn cell(&self, c: SubCell) -> bool {
        match c {
            SubCell::Vertex(v) => self.vertex(v),
            SubCell::Edge(e) => self.edge(e),
            SubCell::Tri(t) => self.tri(t),
        }
    }
}

/// One refinement round of a geodesic computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub h_s: f64,
    pub graph_length: f64,
    /// Best straightened length so far.
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct GeodesicResult {
    pub path: PiecewisePath,
    pub rounds: Vec<RoundRecord>,
    /// Length decrease in the last round.
    pub last_decrease: f64,
}

/// Geodesic computations in a subdivision, optionally restricted to a region.
///
/// Steiner graphs are cached per refinement level, so one metric can serve many queries.
pub struct PathMetric<'a> {
    s: &'a SubdividedComplex,
    mask: Mask<'a>,
    graphs: Mutex<HashMap<u32, Arc<SteinerGraph>>>,
    pub max_rounds: usize,
    /// Steiner spacing of the first round.
    pub base_spacing: f64,
}

impl<'a> PathMetric<'a> {
    pub fn new(s: &'a SubdividedComplex, region: Option<&'a Region>) -> Self {
        PathMetric {
            s,
            mask: Mask(region),
            graphs: Mutex::new(HashMap::new()),
            max_rounds: 6,
            base_spacing: s.h(),
        }
    }

    pub fn subdivision(&self) -> &'a SubdividedComplex {
        self.s
    }

    pub fn mask(&self) -> Mask<'a> {
        self.mask
    }

    pub fn graph(&self, level: u32) -> Arc<SteinerGraph> {
        if let Some(g) = self.graphs.lock().expect("graph cache").get(&level) {
            return g.clone();
        }
        let h_s = self.base_spacing / f64::from(1u32 << level.min(30));
        let g = Arc::new(SteinerGraph::build(self.s, self.mask, h_s));
        self.graphs.lock().expect("graph cache").entry(level).or_insert(g).clone()
    }

    fn check_point(&self, p: &ComplexPoint) -> Result<()> {
        let cell = self.s.cell_of(p)?;
        if !self.mask.cell(cell) {
            return Err(CatkError::OutsideRegion);
        }
        Ok(())
    }

    /// Shortest path in the Steiner graph of the given level.
    pub fn graph_path(&self, p: &ComplexPoint, q: &ComplexPoint, level: u32) -> Result<PiecewisePath> {
        self.check_point(p)?;
        self.check_point(q)?;
        let c = self.s.parent();
        let direct = self.direct(p, q);
        let g = self.graph(level);
        let src = g.attach(self.s, self.mask, p);
        let tgt = g.attach(self.s, self.mask, q);
        let graph = g.shortest(&src, &tgt);
        let via_graph = graph.map(|(total, a, nodes, b)| {
            let mut points = vec![*p];
            let mut faces = vec![a.face];
            for (k, &n) in nodes.iter().enumerate() {
                points.push(g.site(self.s, n));
                if k + 1 < nodes.len() {
                    faces.push(g.arc_face(n, nodes[k + 1]));
                }
            }
            faces.push(b.face);
            points.push(*q);
            (total, points, faces)
        });
        let best = match (direct, via_graph) {
            (Some(d), Some(v)) if d.0 <= v.0 => d,
            (Some(d), None) => d,
            (_, Some(v)) => v,
            (None, None) => {
                return Err(if self.mask.get().is_some() { CatkError::NotRectifiablyConnected } else { CatkError::NoPath })
            }
        };
        let mut path = PiecewisePath { points: best.1, faces: best.2, length: 0.0, bends: vec![] };
        path.bends = (1..path.points.len() - 1).collect();
        path.recompute_length(c);
        Ok(path)
    }

    /// Segment between points of one allowed closed triangle.
    fn direct(&self, p: &ComplexPoint, q: &ComplexPoint) -> Option<(f64, Vec<ComplexPoint>, Vec<crate::complex::FaceId>)> {
        let cp = self.s.cell_of(p).ok()?;
        let cq = self.s.cell_of(q).ok()?;
        let tris = |c: SubCell| -> Vec<usize> {
            match c {
                SubCell::Tri(t) => vec![t],
                SubCell::Edge(e) => self.s.edges[e].tris.clone(),
                SubCell::Vertex(v) => self.s.vertex_tris(v).to_vec(),
            }
        };
        let tq = tris(cq);
        let t = tris(cp).into_iter().find(|t| tq.contains(t) && self.mask.tri(*t))?;
        let f = self.s.tris[t].face;
        let d = self.s.parent().face_distance(f, p, q)?;
        Some((d, vec![*p, *q], vec![f]))
    }

    /// One round: graph path at `level`, then straightening.
    pub fn round(&self, p: &ComplexPoint, q: &ComplexPoint, level: u32) -> Result<(PiecewisePath, f64)> {
        let gp = self.graph_path(p, q, level)?;
        let st = funnel::straighten(self.s, self.mask, &gp);
        Ok((st, gp.length))
    }

    /// Refine until a round shortens the path by less than `target_gap`.
    pub fn geodesic(&self, p: &ComplexPoint, q: &ComplexPoint, target_gap: f64) -> Result<GeodesicResult> {
        self.run_rounds(p, q, self.max_rounds, Some(target_gap))
    }

    /// Exactly `rounds` rounds, for convergence studies.
    pub fn study(&self, p: &ComplexPoint, q: &ComplexPoint, rounds: usize) -> Result<GeodesicResult> {
        self.run_rounds(p, q, rounds, None)
    }

    fn run_rounds(&self, p: &ComplexPoint, q: &ComplexPoint, max: usize, gap: Option<f64>) -> Result<GeodesicResult> {
        let mut best: Option<PiecewisePath> = None;
        let mut rounds = Vec::new();
        let mut last_decrease = f64::INFINITY;
        for k in 0..max.max(1) {
            let (st, graph_length) = self.round(p, q, k as u32)?;
            let prev = best.as_ref().map(|b| b.length);
            if best.as_ref().is_none_or(|b| st.length < b.length) {
                best = Some(st);
            }
            let cur = best.as_ref().expect("set above").length;
            rounds.push(RoundRecord { h_s: self.graph(k as u32).h_s, graph_length, length: cur });
            if let Some(prev) = prev {
                last_decrease = prev - cur;
                if gap.is_some_and(|g| last_decrease < g) {
                    break;
                }
            }
        }
        let path = best.expect("at least one round");
        if let Some(g) = gap {
            if !(last_decrease < g) {
                return Err(CatkError::ConvergenceFailure {
                    rounds: rounds.len(),
                    best_length: path.length,
                    best: Box::new(path),
                });
            }
        }
        Ok(GeodesicResult { path, rounds, last_decrease })
    }

    pub fn distance(&self, p: &ComplexPoint, q: &ComplexPoint, target_gap: f64) -> Result<f64> {
        Ok(self.geodesic(p, q, target_gap)?.path.length)
    }
}

/// Geodesic in the whole complex.
pub fn geodesic_x(s: &SubdividedComplex, p: &ComplexPoint, q: &ComplexPoint, target_gap: f64) -> Result<GeodesicResult> {
    PathMetric::new(s, None).geodesic(p, q, target_gap)
}

/// Geodesic in the induced length metric of a region.
pub fn geodesic_y(
    s: &SubdividedComplex,
    region: &Region,
    p: &ComplexPoint,
    q: &ComplexPoint,
    target_gap: f64,
) -> Result<GeodesicResult> {
    if region.is_empty() {
        return Err(CatkError::EmptyRegion);
    }
    PathMetric::new(s, Some(region)).geodesic(p, q, target_gap)
}
