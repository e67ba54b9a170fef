use crate::complex::{Complex, ComplexPoint, FaceId, PointDoc};
use crate::error::{CatkError, Result};
use crate::model::{dist, geodesic_point};

/// A path made of model geodesic segments, each inside one closed parent face.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    pub points: Vec<ComplexPoint>,
    /// `faces[i]` carries the segment from `points[i]` to `points[i + 1]`.
    pub faces: Vec<FaceId>,
    pub length: f64,
    /// Interior breakpoints where the path changes direction.
    pub bends: Vec<usize>,
}

impl PiecewisePath {
    pub fn trivial(p: ComplexPoint) -> Self {
        PiecewisePath { points: vec![p], faces: vec![], length: 0.0, bends: vec![] }
    }

    /// Path through `points`; every interior point counts as a bend.
    pub fn new(c: &Complex, points: Vec<ComplexPoint>, faces: Vec<FaceId>) -> Result<Self> {
        if points.is_empty() || faces.len() + 1 != points.len() {
            return Err(CatkError::InvalidSeed("path needs one face per segment".into()));
        }
        let bends = (1..points.len().saturating_sub(1)).collect();
        let mut p = PiecewisePath { points, faces, length: 0.0, bends };
        for i in 0..p.faces.len() {
            if c.chart_point(&p.points[i], p.faces[i]).is_none() || c.chart_point(&p.points[i + 1], p.faces[i]).is_none() {
                return Err(CatkError::InvalidSeed(format!("segment {i} does not lie in its face")));
            }
        }
        p.recompute_length(c);
        Ok(p)
    }

    pub fn start(&self) -> &ComplexPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &ComplexPoint {
        self.points.last().expect("nonempty path")
    }

    pub fn segment_count(&self) -> usize {
        self.faces.len()
    }

    pub fn segment_length(&self, c: &Complex, i: usize) -> f64 {
        c.face_distance(self.faces[i], &self.points[i], &self.points[i + 1]).unwrap_or(f64::INFINITY)
    }

    pub fn recompute_length(&mut self, c: &Complex) {
        self.length = (0..self.faces.len()).map(|i| self.segment_length(c, i)).sum();
    }

    pub fn reversed(&self) -> Self {
        let n = self.points.len();
        PiecewisePath {
            points: self.points.iter().rev().cloned().collect(),
            faces: self.faces.iter().rev().cloned().collect(),
            length: self.length,
            bends: self.bends.iter().rev().map(|&b| n - 1 - b).collect(),
        }
    }

    /// Point at arclength `s` from the start, clamped to the path.
    pub fn point_at(&self, c: &Complex, s: f64) -> ComplexPoint {
        let mut acc = 0.0;
        for i in 0..self.faces.len() {
            let l = self.segment_length(c, i);
            if s <= acc + l || i + 1 == self.faces.len() {
                let f = self.faces[i];
                let (Some(a), Some(b)) = (c.chart_point(&self.points[i], f), c.chart_point(&self.points[i + 1], f)) else {
                    break;
                };
                let t = if l > 0.0 { ((s - acc) / l).clamp(0.0, 1.0) } else { 0.0 };
                let m = geodesic_point(&a, &b, t).unwrap_or(a);
                return c.locate_face(f, &m).unwrap_or(self.points[i]);
            }
            acc += l;
        }
        *self.end()
    }

    /// Initial subpath of length `s`.
    pub fn truncated(&self, c: &Complex, s: f64) -> Self {
        if s >= self.length {
            return self.clone();
        }
        let mut out = PiecewisePath::trivial(self.points[0]);
        let mut acc = 0.0;
        for i in 0..self.faces.len() {
            let l = self.segment_length(c, i);
            if acc + l >= s {
                let end = self.point_at(c, s);
                out.points.push(end);
                out.faces.push(self.faces[i]);
                break;
            }
            out.points.push(self.points[i + 1]);
            out.faces.push(self.faces[i]);
            if self.bends.contains(&(i + 1)) {
                out.bends.push(i + 1);
            }
            acc += l;
        }
        out.recompute_length(c);
        out
    }

    /// Points spaced at most `spacing` apart along the path, including all breakpoints.
    pub fn samples(&self, c: &Complex, spacing: f64) -> Vec<ComplexPoint> {
        let mut out = vec![self.points[0]];
        for i in 0..self.faces.len() {
            let f = self.faces[i];
            let l = self.segment_length(c, i);
            let n = ((l / spacing).ceil() as usize).clamp(1, 100_000);
            if let (Some(a), Some(b)) = (c.chart_point(&self.points[i], f), c.chart_point(&self.points[i + 1], f)) {
                for k in 1..n {
                    if let Ok(m) = geodesic_point(&a, &b, k as f64 / n as f64) {
                        out.push(c.locate_face(f, &m).unwrap_or(self.points[i]));
                    }
                }
            }
            out.push(self.points[i + 1]);
        }
        out
    }

    pub fn describe(&self, c: &Complex) -> Vec<PointDoc> {
        self.points.iter().map(|p| c.describe(p)).collect()
    }

    /// Concatenate `other`, which must start where `self` ends.
    pub fn concat(&mut self, c: &Complex, other: &PiecewisePath) {
        let base = self.points.len() - 1;
        if !self.faces.is_empty() && !other.faces.is_empty() {
            self.bends.push(base);
        }
        self.points.extend(other.points.iter().skip(1).cloned());
        self.faces.extend(other.faces.iter().cloned());
        self.bends.extend(other.bends.iter().map(|&b| b + base));
        self.recompute_length(c);
    }

    /// Largest distance between points at equal arclength fractions, measured in shared faces.
    pub fn matched_distance(&self, c: &Complex, other: &PiecewisePath, samples: usize) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..=samples {
            let u = k as f64 / samples.max(1) as f64;
            let a = self.point_at(c, u * self.length);
            let b = other.point_at(c, u * other.length);
            let f = *c.common_faces(&a, &b).first()?;
            let d = dist(&c.chart_point(&a, f)?, &c.chart_point(&b, f)?).ok()?;
            worst = worst.max(d);
        }
        Some(worst)
    }
}
