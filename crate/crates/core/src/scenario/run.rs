use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Expect, Metric, RegionSpec, Scenario};
use crate::complex::{Complex, ComplexPoint, LinkReport, PointDoc, SubCell, SubdividedComplex};
use crate::error::{CatkError, Result};
use crate::geodesic::{PathMetric, RoundRecord};
use crate::homology::{
    cross_validate, curve_interior, ChainComplex, CellState, CycleCurve, H1Summary, InteriorClassification,
    OracleAgreement,
};
use crate::region::Region;
use crate::verify::{
    alexandrov_angle_y, cat_sweep, cat_triangle_test, convexity_check, limit_segments, verify_curve_theorem,
    AngleEstimate, CurveTheoremReport, LimitReport, MarginReport, SweepOptions, Tolerances, TriangleSample,
    TriangleTestOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Violations,
}

/// Deterministic results plus run-dependent metadata.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub body: ReportBody,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub version: String,
    pub timing_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub h: f64,
    pub kappa: f64,
    pub tolerances: Tolerances,
    pub subdivision: SubdivisionStats,
    pub region: RegionStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classify: Vec<Classified>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub geodesics: Vec<GeodesicSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cat_sweep: Option<MarginReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<MarginReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub limit_segments: Vec<LimitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity: Option<MarginReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<AngleEstimate>,
    pub warnings: Vec<String>,
    /// One line per failed check.
    pub failures: Vec<String>,
    pub expect: Expect,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubdivisionStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub max_cell_diameter: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub area: f64,
    pub homology: H1Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologySection {
    pub ambient: H1Summary,
    pub ambient_d1d2_zero: bool,
    pub region_d1d2_zero: bool,
    /// The bounding chain of the curve has the curve as boundary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_matches_curve: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleAgreement>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellCounts {
    pub on: usize,
    pub inside: usize,
    pub outside: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveSection {
    pub length: f64,
    /// Sub-edges of the traced curve.
    pub edges: usize,
    /// No sub-vertex is visited twice.
    pub simple: bool,
    pub vertices: CellCounts,
    pub triangles: CellCounts,
    /// Interior vertices that also touch exterior triangles.
    pub mixed_vertices: Vec<PointDoc>,
    pub closure_homology: H1Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<CurveTheoremReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classified {
    pub point: PointDoc,
    /// Kind of sub-cell carrying the point: vertex, edge or triangle.
    pub cell: &'static str,
    pub state: CellState,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicSection {
    pub from: PointDoc,
    pub to: PointDoc,
    pub metric: Metric,
    pub length: f64,
    pub rounds: Vec<RoundRecord>,
    pub monotone: bool,
    pub path: Vec<PointDoc>,
}

struct Clock(BTreeMap<String, f64>);

impl Clock {
    fn time<T>(&mut self, key: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.0.entry(key.to_string()).or_insert(0.0) += t.elapsed().as_secs_f64() * 1e3;
        out
    }
}

fn counts(states: &[CellState]) -> CellCounts {
    let n = |s| states.iter().filter(|&&x| x == s).count();
    CellCounts { on: n(CellState::On), inside: n(CellState::In), outside: n(CellState::Out) }
}

fn build_region(s: &SubdividedComplex, sc: &Scenario, cls: Option<&InteriorClassification>) -> Result<Region> {
    let c = s.parent();
    Ok(match &sc.region {
        RegionSpec::Whole => Region::whole(s),
        RegionSpec::Carve { ops } => Region::carve(s, ops),
        RegionSpec::ParentSkeleton { edges } => {
            let ids: Vec<_> = edges.iter().filter_map(|&e| c.edge_by_label(e)).collect();
            Region::parent_skeleton(s, &ids)
        }
        RegionSpec::CurveClosure => cls.ok_or_else(|| CatkError::InvalidScenario("no curve".into()))?.closure_region(s),
        RegionSpec::Generated { seed, cells } => Region::generate(s, *seed, *cells),
    })
}

fn oracle(
    s: &SubdividedComplex,
    gamma: &CycleCurve,
    cls: &InteriorClassification,
    samples: usize,
    seed: u64,
) -> Result<OracleAgreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<usize> = (0..s.vertices.len()).filter(|&v| cls.vertices[v] != CellState::On).collect();
    let pick = |n: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        let mut idx = sample(rng, n, samples.min(n)).into_vec();
        idx.sort_unstable();
        idx
    };
    let vs: Vec<usize> = pick(vs.len(), &mut rng).into_iter().map(|i| vs[i]).collect();
    let ts = pick(s.tris.len(), &mut rng);
    cross_validate(s, gamma, cls, &vs, &ts)
}

/// Execute a scenario. Errors are input or numerical failures; violations are reported in the body.
pub fn run(sc: &Scenario) -> Result<Report> {
    let total = Instant::now();
    let mut clock = Clock(BTreeMap::new());
    let c: Complex = sc.validate()?;
    let plan = &sc.plan;
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    let resolve = |p: &PointDoc| c.resolve(p);

    let s = clock.time("subdivide", || sc.subdivide(&c))?;
    let tol = plan.tolerances.unwrap_or_else(|| Tolerances::for_diameter(c.diameter_estimate()));

    let link = plan.link.then(|| clock.time("link", || c.check_link_condition()));
    if let Some(l) = &link {
        if !l.pass {
            failures.push(format!("link condition fails: minimal girth {:?} < 2π", l.min_girth));
        }
    }

    let curve = match &sc.curve {
        Some(_) => {
            let gamma = CycleCurve::from_trace(&s, &s.seams()[0])?;
            let cls = clock.time("classify", || curve_interior(&s, &gamma))?;
            Some((gamma, cls))
        }
        None => None,
    };

    let region = build_region(&s, sc, curve.as_ref().map(|x| &x.1))?;
    if region.is_empty() {
        return Err(CatkError::EmptyRegion);
    }
    let region_cc = ChainComplex::of_region(&s, &region);
    let region_h1 = clock.time("homology", || region_cc.homology())?;
    let h1_trivial = region_h1.betti1 == 0 && region_h1.torsion.is_empty();
    // comparison suites need H1(E) = 0; negative controls run them anyway to show what breaks
    let compare = h1_trivial || sc.expect == Expect::Violations;
    if !h1_trivial {
        warnings.push(format!(
            "region has first Betti number {} and torsion {:?}; comparison checks assume a simply connected region",
            region_h1.betti1, region_h1.torsion
        ));
    }
    let has_comparisons = plan.cat_sweep.is_some()
        || !plan.triangles.is_empty()
        || !plan.limit_segments.is_empty()
        || plan.convexity.is_some()
        || !plan.probes.is_empty();
    if !compare && has_comparisons {
        warnings.push("comparison suites skipped: region is not simply connected and the scenario is not a negative control".into());
    }
    if region_h1.betti0 != 1 {
        warnings.push(format!("region has {} components", region_h1.betti0));
    }

    let homology = match &plan.homology {
        Some(hp) => Some(clock.time("homology", || -> Result<HomologySection> {
            let cc = ChainComplex::of_subdivision(&s);
            let ambient = cc.homology()?;
            let (boundary_matches_curve, oracle) = match &curve {
                Some((gamma, cls)) => {
                    let z = gamma.chain(&cc)?;
                    let matches = cc.boundary2(&cls.chain) == z;
                    (Some(matches), Some(oracle(&s, gamma, cls, hp.oracle_samples, plan.seed)?))
                }
                None => (None, None),
            };
            Ok(HomologySection {
                ambient,
                ambient_d1d2_zero: cc.d1d2_is_zero(),
                region_d1d2_zero: region_cc.d1d2_is_zero(),
                boundary_matches_curve,
                oracle,
            })
        })?),
        None => None,
    };
    if let Some(hs) = &homology {
        if hs.ambient.betti1 != 0 || !hs.ambient.torsion.is_empty() {
            failures.push(format!("ambient complex has first Betti number {}", hs.ambient.betti1));
        }
        if !hs.ambient_d1d2_zero || !hs.region_d1d2_zero {
            failures.push("boundary of boundary is not zero".into());
        }
        if hs.boundary_matches_curve == Some(false) {
            failures.push("bounding chain does not have the curve as boundary".into());
        }
        if let Some(o) = &hs.oracle {
            if !o.all_agree() {
                failures.push(format!("interior criteria disagree on {}", o.disagreements.join(", ")));
            }
        }
    }

    let curve_section = match &curve {
        Some((gamma, cls)) => {
            let mixed_vertices = (0..s.vertices.len())
                .filter(|&v| {
                    cls.vertices[v] == CellState::In && s.vertex_tris(v).iter().any(|&t| cls.tris[t] == CellState::Out)
                })
                .map(|v| c.describe(&s.vertices[v].site))
                .collect();
            let closure = cls.closure_region(&s);
            let closure_homology = ChainComplex::of_region(&s, &closure).homology()?;
            let theorem = match &plan.curve {
                Some(cp) => Some(clock.time("curve_theorem", || {
                    verify_curve_theorem(&s, gamma, cls, cp.extension_seeds, plan.seed)
                })?),
                None => None,
            };
            if let Some(t) = &theorem {
                if !t.accumulation_ok {
                    failures.push(format!(
                        "interior does not accumulate at the curve: distance {} > {}",
                        t.worst_accumulation, t.accumulation_radius
                    ));
                }
                for (i, r) in t.seeds.iter().enumerate().filter(|(_, r)| !r.ok()) {
                    failures.push(format!("interior geodesic {i} ended {:?}/{:?}", r.forward, r.backward));
                }
                warnings.extend(t.warnings.iter().cloned());
            }
            let distinct: std::collections::BTreeSet<usize> = gamma.vertices.iter().copied().collect();
            Some(CurveSection {
                length: gamma.length(&s),
                edges: gamma.edges.len(),
                simple: distinct.len() == gamma.vertices.len(),
                vertices: counts(&cls.vertices),
                triangles: counts(&cls.tris),
                mixed_vertices,
                closure_homology,
                theorem,
            })
        }
        None => None,
    };

    let classify = match &curve {
        Some((_, cls)) => plan
            .classify
            .iter()
            .map(|p| {
                let cell = s.cell_of(&resolve(p)?)?;
                let kind = match cell {
                    SubCell::Vertex(_) => "vertex",
                    SubCell::Edge(_) => "edge",
                    SubCell::Tri(_) => "triangle",
                };
                Ok(Classified { point: p.clone(), cell: kind, state: cls.state(cell) })
            })
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };

    let mx = PathMetric::new(&s, None);
    let my = PathMetric::new(&s, Some(&region));
    let kappa = c.kappa();

    let mut geodesics = Vec::new();
    for g in &plan.geodesics {
        let m = if g.metric == Metric::Ambient { &mx } else { &my };
        let (p, q) = (resolve(&g.from)?, resolve(&g.to)?);
        let r = clock.time("geodesics", || match g.rounds {
            Some(n) => m.study(&p, &q, n),
            None => m.geodesic(&p, &q, tol.target_gap),
        })?;
        let monotone = r.rounds.windows(2).all(|w| w[1].length <= w[0].length);
        geodesics.push(GeodesicSection {
            from: g.from.clone(),
            to: g.to.clone(),
            metric: g.metric,
            length: r.path.length,
            rounds: r.rounds,
            monotone,
            path: r.path.describe(&c),
        });
    }

    let cat = match &plan.cat_sweep {
        Some(sp) if compare => {
            let opts = SweepOptions {
                triangles: sp.triangles,
                seed: plan.seed,
                test: TriangleTestOptions { pairs: sp.pairs, angle_scale: None, angle_depth: sp.angle_depth, seed: 0 },
                budget: sp.budget_ms.map(std::time::Duration::from_millis),
            };
            let r = clock.time("cat_sweep", || cat_sweep(&my, &region, kappa, &opts, &tol))?;
            if r.incomplete {
                warnings.extend(r.notes.iter().map(|n| format!("comparison sweep: {n}")));
            }
            if !r.passed() {
                failures.push(format!("comparison sweep: {} violations", r.violations.len()));
            }
            Some(r)
        }
        _ => None,
    };

    let mut triangles = Vec::new();
    for (i, tp) in plan.triangles.iter().enumerate().filter(|_| compare) {
        let r = clock.time("triangles", || -> Result<MarginReport> {
            let t = TriangleSample::new(&my, resolve(&tp.p)?, resolve(&tp.q)?, resolve(&tp.r)?, &tol)?;
            let opts = TriangleTestOptions {
                pairs: tp.pairs,
                angle_scale: None,
                angle_depth: tp.angle_depth,
                seed: plan.seed.wrapping_add(i as u64),
            };
            cat_triangle_test(&my, kappa, &t, &opts, &tol)
        })?;
        if !r.passed() {
            failures.push(format!("triangle {i}: {} violations", r.violations.len()));
        }
        triangles.push(r);
    }

    let mut limits = Vec::new();
    for (i, lp) in plan.limit_segments.iter().enumerate().filter(|_| compare) {
        let r = clock.time("limit_segments", || {
            limit_segments(&my, &resolve(&lp.p)?, &resolve(&lp.q)?, &resolve(&lp.r)?, lp.eps, lp.depth, &tol)
        })?;
        if !r.passed {
            failures.push(format!("limit segments {i} fail"));
        }
        limits.push(r);
    }

    let convexity = match &plan.convexity {
        Some(cp) if compare => {
            let r = clock.time("convexity", || {
                convexity_check(&mx, &my, &region, cp.pairs, plan.seed ^ 0x5eed_c0de, &tol)
            })?;
            if !r.passed() {
                failures.push(format!("convexity: {} violations", r.violations.len()));
            }
            Some(r)
        }
        _ => None,
    };

    let mut probes = Vec::new();
    for ap in plan.probes.iter().filter(|_| compare) {
        let est = clock.time("probes", || -> Result<AngleEstimate> {
            let p: ComplexPoint = resolve(&ap.at)?;
            let a = my.geodesic(&p, &resolve(&ap.toward[0])?, tol.target_gap)?.path;
            let b = my.geodesic(&p, &resolve(&ap.toward[1])?, tol.target_gap)?.path;
            alexandrov_angle_y(&my, &a, &b, ap.eps, ap.depth, &tol)
        })?;
        if est.clipped {
            warnings.push(format!("angle probe clipped at the resolution floor after {} scales", est.scales.len()));
        }
        probes.push(est);
    }

    let found = if failures.is_empty() { Status::Pass } else { Status::Violations };
    clock.0.insert("total".into(), total.elapsed().as_secs_f64() * 1e3);
    let body = ReportBody {
        scenario: sc.name.clone(),
        scenario_hash: sc.hash(),
        seed: plan.seed,
        h: sc.h,
        kappa: kappa.value(),
        tolerances: tol,
        subdivision: SubdivisionStats {
            vertices: s.vertices.len(),
            edges: s.edges.len(),
            triangles: s.tris.len(),
            max_cell_diameter: s.max_cell_diameter(),
        },
        region: RegionStats {
            vertices: region.vertices.len(),
            edges: region.edges.len(),
            triangles: region.tris.len(),
            area: region.area(&s),
            homology: region_h1,
        },
        link,
        homology,
        curve: curve_section,
        classify,
        geodesics,
        cat_sweep: cat,
        triangles,
        limit_segments: limits,
        convexity,
        probes,
        warnings,
        failures,
        expect: sc.expect,
        status: found,
    };
    Ok(Report { body, metadata: Metadata { version: env!("CARGO_PKG_VERSION").into(), timing_ms: clock.0 } })
}

impl Report {
    /// Process exit code: 0 when the outcome matches the expectation, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match (self.body.expect, self.body.status) {
            (Expect::Pass, Status::Pass) | (Expect::Violations, Status::Violations) => 0,
            _ => 2,
        }
    }

    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
