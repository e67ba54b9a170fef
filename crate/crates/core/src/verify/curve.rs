//! Numerical checks that a curve's interior accumulates on the curve and
//! that geodesics started inside run into the curve.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::Serialize;

use super::triple_rng;
use crate::complex::{PointDoc, SubdividedComplex};
use crate::error::Result;
use crate::geodesic::{extend_geodesic, ExtendOptions, ExtensionOutcome, PiecewisePath};
use crate::homology::{CycleCurve, InteriorClassification};
use crate::model::ModelPoint;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedRecord {
    pub start: PointDoc,
    /// Chart direction angle of the seed.
    pub direction: f64,
    pub forward: ExtensionOutcome,
    pub backward: ExtensionOutcome,
    pub forward_length: f64,
    pub backward_length: f64,
}

impl SeedRecord {
    pub fn ok(&self) -> bool {
        self.forward == ExtensionOutcome::MetCurve && self.backward == ExtensionOutcome::MetCurve
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTheoremReport {
    /// Largest graph distance from a curve vertex to the closure of the interior.
    pub worst_accumulation: f64,
    pub accumulation_radius: f64,
    pub accumulation_ok: bool,
    pub seeds: Vec<SeedRecord>,
    pub extensions_ok: bool,
    /// The interior has no triangles, so the extension check had nothing to test.
    pub vacuous: bool,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Distance along sub-edges from every vertex to the nearest source.
fn edge_graph_distance(s: &SubdividedComplex, sources: &[usize]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; s.vertices.len()];
    let mut heap = BinaryHeap::new();
    for &v in sources {
        d[v] = 0.0;
        heap.push(Reverse((0u64, v)));
    }
    // non-negative floats order like their bit patterns
    while let Some(Reverse((bits, u))) = heap.pop() {
        let du = f64::from_bits(bits);
        if du > d[u] {
            continue;
        }
        for &e in s.vertex_edges(u) {
            let [a, b] = s.edges[e].ends;
            let w = if a == u { b } else { a };
            let nd = du + s.edges[e].length;
            if nd < d[w] {
                d[w] = nd;
                heap.push(Reverse((nd.to_bits(), w)));
            }
        }
    }
    d
}

/// Accumulation within `3h` at every curve vertex, and `seeds` random interior geodesics extended both ways.
pub fn verify_curve_theorem(
    s: &SubdividedComplex,
    gamma: &CycleCurve,
    cls: &InteriorClassification,
    seeds: usize,
    seed: u64,
) -> Result<CurveTheoremReport> {
    let c = s.parent();
    let h = s.h();
    let inside = cls.interior_tris();
    let mut warnings = Vec::new();
    let mut sources: Vec<usize> = inside.iter().flat_map(|&t| s.tris[t].verts).collect();
    sources.sort_unstable();
    sources.dedup();
    let d = edge_graph_distance(s, &sources);
    let worst = gamma.vertices.iter().map(|&v| d[v]).fold(0.0, f64::max);
    let radius = 3.0 * h;
    let vacuous = inside.is_empty();
    if vacuous {
        warnings.push("interior has no triangles; extension check is vacuous".into());
    }
    let mut records = Vec::new();
    let budget = 4.0 * c.diameter_estimate() + gamma.length(s);
    for i in 0..if vacuous { 0 } else { seeds } {
        let mut rng = triple_rng(seed, i as u64);
        let t = inside[rng.gen_range(0..inside.len())];
        let tri = &s.tris[t];
        let ch = s.tri_chart2(t);
        let centre = [(ch[0][0] + ch[1][0] + ch[2][0]) / 3.0, (ch[0][1] + ch[1][1] + ch[2][1]) / 3.0];
        let (a, b, e) = (&tri.chart[0], &tri.chart[1], &tri.chart[2]);
        let area = crate::model::triangle_area(a, b, e)?;
        let perimeter = crate::model::dist(a, b)? + crate::model::dist(b, e)? + crate::model::dist(e, a)?;
        let delta = area / perimeter;
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let mid = ModelPoint::from_chart(c.kappa(), centre)?;
        // chart step of roughly delta in each direction; the chart is close to isometric at this scale
        let off = |sgn: f64| ModelPoint::from_chart(c.kappa(), [centre[0] + sgn * delta * theta.cos(), centre[1] + sgn * delta * theta.sin()]);
        let (p0, p1) = (off(-1.0)?, off(1.0)?);
        let f = tri.face;
        let seed_path = PiecewisePath::new(c, vec![c.locate_face(f, &p0)?, c.locate_face(f, &p1)?], vec![f])?;
        let opts = ExtendOptions { step: 0.5 * h, max_length: budget, classification: Some(cls), stop_on_curve: true };
        let fwd = extend_geodesic(s, &seed_path, &opts)?;
        let bwd = extend_geodesic(s, &seed_path.reversed(), &opts)?;
        records.push(SeedRecord {
            start: c.describe(&c.locate_face(f, &mid)?),
            direction: theta,
            forward: fwd.outcome,
            backward: bwd.outcome,
            forward_length: fwd.path.length,
            backward_length: bwd.path.length,
        });
    }
    let accumulation_ok = worst <= radius;
    let extensions_ok = records.iter().all(SeedRecord::ok);
    Ok(CurveTheoremReport {
        worst_accumulation: worst,
        accumulation_radius: radius,
        accumulation_ok,
        seeds: records,
        extensions_ok,
        vacuous,
        passed: accumulation_ok && extensions_ok,
        warnings,
    })
}
