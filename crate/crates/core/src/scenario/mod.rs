//! Scenario files: a complex, a region, an optional curve and a plan of checks.

pub mod examples;
mod run;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use run::{run, Report, ReportBody, Status};

use crate::complex::{Complex, ComplexDoc, PointDoc, Seam, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::region::CarveOp;
use crate::verify::Tolerances;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub complex: ComplexDoc,
    /// Target mesh size of the subdivision.
    pub h: f64,
    /// Extra polylines forced into the subdivision, e.g. the rim of a carved hole.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seams: Vec<SeamDoc>,
    /// Closed curve, listed as consecutive corners joined by face segments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<PointDoc>>,
    #[serde(default)]
    pub region: RegionSpec,
    #[serde(default)]
    pub plan: Plan,
    #[serde(default)]
    pub expect: Expect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeamDoc {
    pub points: Vec<PointDoc>,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    #[default]
    Whole,
    Carve { ops: Vec<CarveOp> },
    /// Union of parent edges (labels).
    ParentSkeleton { edges: Vec<u64> },
    /// The curve together with its interior.
    CurveClosure,
    /// Random topological disk grown from one triangle.
    Generated { seed: u64, cells: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    /// Negative control: the run is expected to find violations.
    Violations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub link: bool,
    #[serde(default)]
    pub homology: Option<HomologyPlan>,
    #[serde(default)]
    pub curve: Option<CurvePlan>,
    /// Points whose cell state relative to the curve is reported.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classify: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub geodesics: Vec<GeodesicPlan>,
    #[serde(default)]
    pub cat_sweep: Option<SweepPlan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<TrianglePlan>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub limit_segments: Vec<LimitPlan>,
    #[serde(default)]
    pub convexity: Option<ConvexityPlan>,
    /// Alexandrov angle probes between two region geodesics from a common point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<AnglePlan>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

fn yes() -> bool {
    true
}

impl Default for Plan {
    fn default() -> Self {
        Plan {
            seed: 0,
            link: true,
            homology: None,
            curve: None,
            classify: Vec::new(),
            geodesics: Vec::new(),
            cat_sweep: None,
            triangles: Vec::new(),
            limit_segments: Vec::new(),
            convexity: None,
            probes: Vec::new(),
            tolerances: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyPlan {
    /// Cells per kind compared against the deletion criterion.
    #[serde(default = "default_oracle")]
    pub oracle_samples: usize,
}

fn default_oracle() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvePlan {
    #[serde(default = "default_seeds")]
    pub extension_seeds: usize,
}

fn default_seeds() -> usize {
    16
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// The whole complex.
    Ambient,
    /// The region's induced length metric.
    #[default]
    Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicPlan {
    pub from: PointDoc,
    pub to: PointDoc,
    #[serde(default)]
    pub metric: Metric,
    /// Run exactly this many refinement rounds instead of stopping at the target gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub triangles: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_depth")]
    pub angle_depth: usize,
    /// Wall-clock budget; triangles not started in time are skipped and the sweep is flagged incomplete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_ms: Option<u64>,
}

fn default_pairs() -> usize {
    3
}

fn default_depth() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrianglePlan {
    pub p: PointDoc,
    pub q: PointDoc,
    pub r: PointDoc,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_depth")]
    pub angle_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitPlan {
    pub p: PointDoc,
    pub q: PointDoc,
    pub r: PointDoc,
    pub eps: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityPlan {
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglePlan {
    pub at: PointDoc,
    pub toward: [PointDoc; 2],
    pub eps: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

impl Scenario {
    /// Parse and check a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Static checks: version, mesh size, the complex itself and every point reference.
    pub fn validate(&self) -> Result<Complex> {
        let bad = |m: String| Err(CatkError::InvalidScenario(m));
        if self.format_version != FORMAT_VERSION {
            return bad(format!("unsupported format_version {} (expected {FORMAT_VERSION})", self.format_version));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad(format!("mesh size h must be positive, got {}", self.h));
        }
        let c = Complex::build(self.complex.clone())?;
        let check = |what: &str, p: &PointDoc| -> Result<()> {
            c.resolve(p).map(|_| ()).map_err(|e| CatkError::InvalidScenario(format!("{what}: {e}")))
        };
        for (i, s) in self.seams.iter().enumerate() {
            for p in &s.points {
                check(&format!("seam {i}"), p)?;
            }
        }
        if let Some(curve) = &self.curve {
            if curve.len() < 3 {
                return bad("curve needs at least three points".into());
            }
            for p in curve {
                check("curve", p)?;
            }
        }
        match &self.region {
            RegionSpec::CurveClosure if self.curve.is_none() => return bad("region curve_closure needs a curve".into()),
            RegionSpec::ParentSkeleton { edges } => {
                for e in edges {
                    if c.edge_by_label(*e).is_none() {
                        return bad(format!("region references unknown edge {e}"));
                    }
                }
            }
            RegionSpec::Carve { ops } => {
                for op in ops {
                    let face = match op {
                        CarveOp::RemoveBox { face, .. } | CarveOp::RemoveDisk { face, .. } => *face,
                    };
                    if c.face_by_label(face).is_none() {
                        return bad(format!("carve references unknown face {face}"));
                    }
                }
            }
            _ => {}
        }
        let plan = &self.plan;
        if plan.curve.is_some() && self.curve.is_none() {
            return bad("plan.curve needs a curve".into());
        }
        if !plan.classify.is_empty() && self.curve.is_none() {
            return bad("plan.classify needs a curve".into());
        }
        for p in &plan.classify {
            check("classify", p)?;
        }
        for g in &plan.geodesics {
            check("geodesic", &g.from)?;
            check("geodesic", &g.to)?;
            if g.rounds == Some(0) {
                return bad("geodesic rounds must be at least 1".into());
            }
        }
        for t in &plan.triangles {
            for p in [&t.p, &t.q, &t.r] {
                check("triangle", p)?;
            }
        }
        for l in &plan.limit_segments {
            for p in [&l.p, &l.q, &l.r] {
                check("limit segment", p)?;
            }
            if !(l.eps.is_finite() && l.eps > 0.0) {
                return bad("limit segment eps must be positive".into());
            }
        }
        for a in &plan.probes {
            for p in [&a.at, &a.toward[0], &a.toward[1]] {
                check("probe", p)?;
            }
            if !(a.eps.is_finite() && a.eps > 0.0) {
                return bad("probe eps must be positive".into());
            }
        }
        if let Some(t) = &plan.tolerances {
            t.validate()?;
        }
        Ok(c)
    }

    /// Subdivision with the curve (seam 0) and the extra seams forced in.
    pub fn subdivide(&self, c: &Complex) -> Result<SubdividedComplex> {
        let mut seams = Vec::new();
        if let Some(curve) = &self.curve {
            seams.push(Seam::closed(curve.iter().map(|p| c.resolve(p)).collect::<Result<_>>()?));
        }
        for sd in &self.seams {
            let pts = sd.points.iter().map(|p| c.resolve(p)).collect::<Result<Vec<_>>>()?;
            seams.push(if sd.closed { Seam::closed(pts) } else { Seam::open(pts) });
        }
        SubdividedComplex::new(c, self.h, &seams)
    }

    /// SHA-256 of the canonical compact serialization.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

#[cfg(test)]
mod tests;
