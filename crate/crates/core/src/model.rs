//! The constant-curvature model plane for curvature `kappa <= 0`.
//!
//! Points are stored as homogeneous 3-vectors. For `kappa == 0` the vector is
//! `(1, x, y)`; for `kappa < 0` it lies on the upper sheet of the hyperboloid
//! `<x, x> = 1/kappa` with the Minkowski form `-x0*y0 + x1*y1 + x2*y2`.
//! In both cases `(x1/x0, x2/x0)` is a chart in which geodesics are straight
//! lines (the Klein model when `kappa < 0`).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CatkError, Result};

/// Absolute tolerance for geometric predicates.
pub const EPS_MODEL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub const FLAT: Kappa = Kappa(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value <= 0.0 {
            Ok(Kappa(if value == 0.0 { 0.0 } else { value }))
        } else {
            Err(CatkError::InvalidCurvature(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_flat(self) -> bool {
        self.0 == 0.0
    }

    /// `sqrt(-kappa)`, zero for the flat plane.
    pub fn scale(self) -> f64 {
        (-self.0).sqrt()
    }
}

impl TryFrom<f64> for Kappa {
    type Error = CatkError;
    fn try_from(v: f64) -> Result<Self> {
        Kappa::new(v)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

fn minkowski(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    kappa: Kappa,
    v: Vector3<f64>,
}

impl ModelPoint {
    /// A point of the Euclidean plane.
    pub fn euclidean(x: f64, y: f64) -> Self {
        ModelPoint { kappa: Kappa::FLAT, v: Vector3::new(1.0, x, y) }
    }

    /// A point given by hyperboloid coordinates; must lie on the sheet within `EPS_MODEL`.
    pub fn hyperboloid(kappa: Kappa, coords: [f64; 3]) -> Result<Self> {
        if kappa.is_flat() {
            return Err(CatkError::CurvatureMismatch(kappa.value(), -1.0));
        }
        let v = Vector3::from(coords);
        let target = 1.0 / kappa.value();
        if !(v[0] > 0.0) || (minkowski(&v, &v) - target).abs() > EPS_MODEL * (1.0 + v[0] * v[0]) {
            return Err(CatkError::Location(format!(
                "({}, {}, {}) is not on the hyperboloid for kappa {}",
                coords[0],
                coords[1],
                coords[2],
                kappa.value()
            )));
        }
        Ok(Self::normalized(kappa, v))
    }

    /// A point from its chart coordinates (affine for the flat plane, Klein otherwise).
    pub fn from_chart(kappa: Kappa, u: [f64; 2]) -> Result<Self> {
        if kappa.is_flat() {
            return Ok(Self::euclidean(u[0], u[1]));
        }
        let r2 = u[0] * u[0] + u[1] * u[1];
        if !(r2 < 1.0) {
            return Err(CatkError::Location(format!(
                "chart point ({}, {}) lies outside the Klein disk",
                u[0], u[1]
            )));
        }
        let s = 1.0 / (kappa.scale() * (1.0 - r2).sqrt());
        Ok(ModelPoint { kappa, v: Vector3::new(s, s * u[0], s * u[1]) })
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn polar(kappa: Kappa, r: f64, theta: f64) -> Self {
        if kappa.is_flat() {
            return Self::euclidean(r * theta.cos(), r * theta.sin());
        }
        let k = kappa.scale();
        let (sh, ch) = ((k * r).sinh() / k, (k * r).cosh() / k);
        ModelPoint { kappa, v: Vector3::new(ch, sh * theta.cos(), sh * theta.sin()) }
    }

    pub fn origin(kappa: Kappa) -> Self {
        Self::polar(kappa, 0.0, 0.0)
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn chart(&self) -> [f64; 2] {
        [self.v[1] / self.v[0], self.v[2] / self.v[0]]
    }

    /// Homogeneous vector: `[1, x, y]` when flat, the hyperboloid triple otherwise.
    pub fn homogeneous(&self) -> [f64; 3] {
        [self.v[0], self.v[1], self.v[2]]
    }

    /// Coordinates as written in documents: `[x, y]` or `[x0, x1, x2]`.
    pub fn coords(&self) -> Vec<f64> {
        if self.kappa.is_flat() {
            vec![self.v[1], self.v[2]]
        } else {
            vec![self.v[0], self.v[1], self.v[2]]
        }
    }

    /// Parse document coordinates for the given curvature.
    pub fn from_coords(kappa: Kappa, c: &[f64]) -> Result<Self> {
        match (kappa.is_flat(), c.len()) {
            (true, 2) => Ok(Self::euclidean(c[0], c[1])),
            (false, 3) => Self::hyperboloid(kappa, [c[0], c[1], c[2]]),
            _ => Err(CatkError::Location(format!(
                "expected {} coordinates for kappa {}, got {}",
                if kappa.is_flat() { 2 } else { 3 },
                kappa.value(),
                c.len()
            ))),
        }
    }

    fn normalized(kappa: Kappa, v: Vector3<f64>) -> Self {
        if kappa.is_flat() {
            return ModelPoint { kappa, v: Vector3::new(1.0, v[1] / v[0], v[2] / v[0]) };
        }
        let n = -minkowski(&v, &v);
        let s = 1.0 / (kappa.scale() * n.sqrt());
        let s = if v[0] < 0.0 { -s } else { s };
        ModelPoint { kappa, v: v * s }
    }

    fn vector(&self) -> &Vector3<f64> {
        &self.v
    }
}

fn same_kappa(p: &ModelPoint, q: &ModelPoint) -> Result<Kappa> {
    if p.kappa != q.kappa {
        return Err(CatkError::CurvatureMismatch(p.kappa.value(), q.kappa.value()));
    }
    Ok(p.kappa)
}

pub fn dist(p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
    let kappa = same_kappa(p, q)?;
    let d = p.v - q.v;
    if kappa.is_flat() {
        return Ok((d[1] * d[1] + d[2] * d[2]).sqrt());
    }
    let chord = minkowski(&d, &d).max(0.0).sqrt();
    let k = kappa.scale();
    Ok(2.0 / k * (k * chord / 2.0).asinh())
}

pub fn geodesic_point(p: &ModelPoint, q: &ModelPoint, t: f64) -> Result<ModelPoint> {
    let kappa = same_kappa(p, q)?;
    if t == 0.0 {
        return Ok(*p);
    }
    if t == 1.0 {
        return Ok(*q);
    }
    if kappa.is_flat() {
        let c = p.v + (q.v - p.v) * t;
        return Ok(ModelPoint { kappa, v: Vector3::new(1.0, c[1], c[2]) });
    }
    let big_d = kappa.scale() * dist(p, q)?;
    if big_d < 1e-12 {
        return Ok(ModelPoint::normalized(kappa, p.v + (q.v - p.v) * t));
    }
    let s = big_d.sinh();
    let v = p.v * (((1.0 - t) * big_d).sinh() / s) + q.v * ((t * big_d).sinh() / s);
    Ok(ModelPoint::normalized(kappa, v))
}

fn half_angle(kappa: Kappa, a: f64, b: f64, c: f64) -> f64 {
    let s2 = if kappa.is_flat() {
        (c + a - b) * (c - a + b) / (4.0 * a * b)
    } else {
        let k = kappa.scale();
        (k * (c + a - b) / 2.0).sinh() * (k * (c - a + b) / 2.0).sinh()
            / ((k * a).sinh() * (k * b).sinh())
    };
    2.0 * s2.clamp(0.0, 1.0).sqrt().asin()
}

/// Angle at the vertex opposite side `c` of the model triangle with sides `a`, `b`, `c`.
pub fn comparison_angle(kappa: Kappa, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(CatkError::DegenerateTriangle(format!(
            "comparison angle needs positive adjacent sides, got a={a}, b={b}"
        )));
    }
    if !(c >= -EPS_MODEL)
        || c > a + b + EPS_MODEL
        || a > b + c + EPS_MODEL
        || b > a + c + EPS_MODEL
    {
        return Err(CatkError::InvalidSides { a, b, c });
    }
    Ok(half_angle(kappa, a, b, c.max(0.0)))
}

/// Angle at `p` between the geodesics `[p, q]` and `[p, r]`.
pub fn vertex_angle(p: &ModelPoint, q: &ModelPoint, r: &ModelPoint) -> Result<f64> {
    let kappa = same_kappa(p, q)?;
    same_kappa(p, r)?;
    // directions at p read off a chart centred at p, where the Klein chart is conformal;
    // atan2 keeps angles near 0 and π accurate, unlike the side-length formula
    let (u, v) = if kappa.is_flat() {
        let (o, a, b) = (p.chart(), q.chart(), r.chart());
        ([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]])
    } else {
        let back = ModelIsometry::translation_to(p).inverse();
        (back.apply(q).chart(), back.apply(r).chart())
    };
    if (u[0] == 0.0 && u[1] == 0.0) || (v[0] == 0.0 && v[1] == 0.0) {
        return Err(CatkError::DegenerateTriangle("vertex angle with coincident points".into()));
    }
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    Ok(cross.abs().atan2(dot))
}

/// Area of the model triangle with the given corners.
pub fn triangle_area(p: &ModelPoint, q: &ModelPoint, r: &ModelPoint) -> Result<f64> {
    let kappa = same_kappa(p, q)?;
    same_kappa(p, r)?;
    if kappa.is_flat() {
        let (a, b, c) = (p.chart(), q.chart(), r.chart());
        return Ok(0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs());
    }
    if p == q || q == r || p == r {
        return Ok(0.0);
    }
    let defect = std::f64::consts::PI
        - vertex_angle(p, q, r)?
        - vertex_angle(q, r, p)?
        - vertex_angle(r, p, q)?;
    Ok(defect.max(0.0) / (-kappa.value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    Preserving,
    Reversing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelIsometry {
    kappa: Kappa,
    m: Matrix3<f64>,
}

impl ModelIsometry {
    pub fn identity(kappa: Kappa) -> Self {
        ModelIsometry { kappa, m: Matrix3::identity() }
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(kappa: Kappa, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        ModelIsometry { kappa, m: Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c) }
    }

    /// Reflection in the first chart axis.
    pub fn reflection(kappa: Kappa) -> Self {
        ModelIsometry { kappa, m: Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0) }
    }

    /// The translation (boost) carrying the origin to `p` along the geodesic through both.
    pub fn translation_to(p: &ModelPoint) -> Self {
        let kappa = p.kappa;
        if kappa.is_flat() {
            let [_, x, y] = p.homogeneous();
            return ModelIsometry { kappa, m: Matrix3::new(1.0, 0.0, 0.0, x, 1.0, 0.0, y, 0.0, 1.0) };
        }
        let u = p.v * kappa.scale();
        let d = 1.0 + u[0];
        let m = Matrix3::new(
            u[0],
            u[1],
            u[2],
            u[1],
            1.0 + u[1] * u[1] / d,
            u[1] * u[2] / d,
            u[2],
            u[1] * u[2] / d,
            1.0 + u[2] * u[2] / d,
        );
        ModelIsometry { kappa, m }
    }

    /// Isometry sending the origin to `a` and the positive first axis towards `b`.
    pub fn frame(a: &ModelPoint, b: &ModelPoint) -> Result<Self> {
        same_kappa(a, b)?;
        let t = Self::translation_to(a);
        let local = t.inverse().apply(b);
        let [x, y] = local.chart();
        if x == 0.0 && y == 0.0 {
            return Err(CatkError::InvalidGluing("frame of coincident points".into()));
        }
        Ok(t.compose(&Self::rotation(a.kappa, y.atan2(x))))
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let m = &self.m;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn apply(&self, p: &ModelPoint) -> ModelPoint {
        ModelPoint::normalized(self.kappa, self.m * p.vector())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ModelIsometry) -> ModelIsometry {
        ModelIsometry { kappa: self.kappa, m: self.m * other.m }
    }

    pub fn inverse(&self) -> ModelIsometry {
        let m = if self.kappa.is_flat() {
            self.m.try_inverse().unwrap_or_else(Matrix3::identity)
        } else {
            let j = Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0));
            j * self.m.transpose() * j
        };
        ModelIsometry { kappa: self.kappa, m }
    }

    /// Largest entry of `M^T J M - J`, zero for an exact Lorentz transformation.
    pub fn orthogonality_residual(&self) -> f64 {
        let j = if self.kappa.is_flat() {
            return 0.0;
        } else {
            Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0))
        };
        (self.m.transpose() * j * self.m - j).amax()
    }
}

/// Isometry taking `src_a -> dst_a` and `src_b -> dst_b`.
///
/// `Reversing` composes with the reflection across the segment, which selects
/// the half-plane the image of the source side lands in.
pub fn gluing_isometry(
    src_a: &ModelPoint,
    src_b: &ModelPoint,
    dst_a: &ModelPoint,
    dst_b: &ModelPoint,
    side: Handedness,
) -> Result<ModelIsometry> {
    let kappa = same_kappa(src_a, src_b)?;
    same_kappa(src_a, dst_a)?;
    same_kappa(src_a, dst_b)?;
    let ls = dist(src_a, src_b)?;
    let ld = dist(dst_a, dst_b)?;
    if ls == 0.0 || ld == 0.0 {
        return Err(CatkError::InvalidGluing("segment endpoints coincide".into()));
    }
    if (ls - ld).abs() > EPS_MODEL * ls.max(1.0) {
        return Err(CatkError::InvalidGluing(format!("segment lengths differ: {ls} vs {ld}")));
    }
    let fs = ModelIsometry::frame(src_a, src_b)?;
    let fd = ModelIsometry::frame(dst_a, dst_b)?;
    let mid = match side {
        Handedness::Preserving => ModelIsometry::identity(kappa),
        Handedness::Reversing => ModelIsometry::reflection(kappa),
    };
    Ok(fd.compose(&mid).compose(&fs.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn hyp() -> Kappa {
        Kappa::new(-1.0).unwrap()
    }

    fn hp(r: f64, th: f64) -> ModelPoint {
        ModelPoint::polar(hyp(), r, th)
    }

    #[test]
    fn kappa_rejects_positive() {
        assert!(Kappa::new(0.5).is_err());
        assert!(Kappa::new(f64::NAN).is_err());
        assert!(Kappa::new(-2.0).is_ok());
    }

    #[test]
    fn euclidean_distance() {
        let d = dist(&ModelPoint::euclidean(0.0, 0.0), &ModelPoint::euclidean(3.0, 4.0)).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn hyperbolic_distance_on_parametrized_geodesic() {
        let k = hyp();
        let p = ModelPoint::hyperboloid(k, [1.0, 0.0, 0.0]).unwrap();
        let q = ModelPoint::hyperboloid(k, [1f64.cosh(), 1f64.sinh(), 0.0]).unwrap();
        assert!((dist(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(dist(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_distance_matches_arccosh_form() {
        // (1/k) arccosh(kappa <p,q>) computed independently for moderate distances
        let k = Kappa::new(-0.7).unwrap();
        let p = ModelPoint::polar(k, 0.8, 0.3);
        let q = ModelPoint::polar(k, 1.9, 2.2);
        let (a, b) = (p.homogeneous(), q.homogeneous());
        let ip = -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let oracle = (k.value() * ip).acosh() / k.scale();
        assert!((dist(&p, &q).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn mismatched_curvature() {
        let e = dist(&ModelPoint::euclidean(0.0, 0.0), &hp(1.0, 0.0));
        assert!(matches!(e, Err(CatkError::CurvatureMismatch(..))));
    }

    #[test]
    fn off_sheet_rejected() {
        assert!(ModelPoint::hyperboloid(hyp(), [2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn geodesic_point_cases() {
        let p = ModelPoint::euclidean(0.0, 0.0);
        let q = ModelPoint::euclidean(2.0, 0.0);
        assert_eq!(geodesic_point(&p, &q, 0.5).unwrap().chart(), [1.0, 0.0]);
        assert_eq!(geodesic_point(&p, &q, 0.0).unwrap(), p);
        let k = hyp();
        let p = ModelPoint::hyperboloid(k, [1.0, 0.0, 0.0]).unwrap();
        let q = ModelPoint::hyperboloid(k, [1f64.cosh(), 1f64.sinh(), 0.0]).unwrap();
        let m = geodesic_point(&p, &q, 0.5).unwrap();
        assert!((dist(&p, &m).unwrap() - 0.5).abs() < EPS_MODEL);
        assert!((dist(&m, &q).unwrap() - 0.5).abs() < EPS_MODEL);
    }

    #[test]
    fn vertex_angle_cases() {
        let o = ModelPoint::euclidean(0.0, 0.0);
        let x = ModelPoint::euclidean(1.0, 0.0);
        let y = ModelPoint::euclidean(0.0, 1.0);
        assert!((vertex_angle(&o, &x, &y).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(vertex_angle(&o, &x, &x).unwrap(), 0.0);
        assert!(vertex_angle(&o, &o, &x).is_err());
        let up = ModelPoint::euclidean(0.0, 1.0);
        let down = ModelPoint::euclidean(0.0, -1.0);
        assert_eq!(vertex_angle(&o, &up, &down).unwrap(), PI);
    }

    #[test]
    fn hyperbolic_equilateral_angle_by_tangent_sampling() {
        // oracle: direction angle between short geodesic samples leaving p
        let k = hyp();
        let p = hp(0.0, 0.0);
        let q = hp(1.0, 0.0);
        let th = comparison_angle(k, 1.0, 1.0, 1.0).unwrap();
        let r = hp(1.0, th);
        assert!((dist(&q, &r).unwrap() - 1.0).abs() < 1e-12);
        let eps = 1e-7;
        let a = geodesic_point(&p, &q, eps).unwrap().chart();
        let b = geodesic_point(&p, &r, eps).unwrap().chart();
        let sampled = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        let va = vertex_angle(&p, &q, &r).unwrap();
        assert!((sampled - va).abs() < 1e-6);
        assert!(va < FRAC_PI_3);
        // frozen oracle: arccos((cosh1^2 - cosh1)/sinh1^2)
        assert!((va - 0.9187978721780272).abs() < 1e-12);
    }

    #[test]
    fn comparison_angle_cases() {
        let f = Kappa::FLAT;
        assert!((comparison_angle(f, 1.0, 1.0, 1.0).unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert!((comparison_angle(f, 3.0, 4.0, 5.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(comparison_angle(hyp(), 1.0, 1.0, 1.0).unwrap() < FRAC_PI_3);
        assert!(matches!(comparison_angle(f, 0.0, 1.0, 1.0), Err(CatkError::DegenerateTriangle(_))));
        assert!(matches!(comparison_angle(f, 1.0, 1.0, 3.0), Err(CatkError::InvalidSides { .. })));
        assert_eq!(comparison_angle(f, 1.0, 1.0, 2.0 + 1e-12).unwrap(), PI);
    }

    #[test]
    fn gluing_identity_and_rotation() {
        let a = ModelPoint::euclidean(0.0, 0.0);
        let b = ModelPoint::euclidean(1.0, 0.0);
        let t = gluing_isometry(&a, &b, &a, &b, Handedness::Preserving).unwrap();
        let id = ModelIsometry::identity(Kappa::FLAT).matrix();
        for (r, s) in t.matrix().iter().zip(id.iter()) {
            for (x, y) in r.iter().zip(s.iter()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        let c = ModelPoint::euclidean(0.0, 1.0);
        for side in [Handedness::Preserving, Handedness::Reversing] {
            let t = gluing_isometry(&a, &b, &a, &c, side).unwrap();
            let img = t.apply(&ModelPoint::euclidean(0.5, 0.5)).chart();
            let expect = if side == Handedness::Preserving { [-0.5, 0.5] } else { [0.5, 0.5] };
            assert!((img[0] - expect[0]).abs() < 1e-15 && (img[1] - expect[1]).abs() < 1e-15);
            assert!(dist(&t.apply(&b), &c).unwrap() < 1e-15);
        }
    }

    #[test]
    fn gluing_length_mismatch() {
        let a = ModelPoint::euclidean(0.0, 0.0);
        let b = ModelPoint::euclidean(1.0, 0.0);
        let c = ModelPoint::euclidean(0.0, 2.0);
        assert!(matches!(
            gluing_isometry(&a, &b, &a, &c, Handedness::Preserving),
            Err(CatkError::InvalidGluing(_))
        ));
    }

    #[test]
    fn hyperbolic_gluing_is_lorentz() {
        let (a, b) = (hp(0.4, 0.1), hp(1.1, 1.3));
        let l = dist(&a, &b).unwrap();
        let c = hp(2.0, -2.0);
        let d = ModelIsometry::frame(&c, &hp(0.0, 0.0))
            .unwrap()
            .apply(&ModelPoint::polar(hyp(), l, 0.0));
        let t = gluing_isometry(&a, &b, &c, &d, Handedness::Reversing).unwrap();
        assert!(t.orthogonality_residual() < EPS_MODEL);
        assert!(dist(&t.apply(&a), &c).unwrap() < 1e-9);
        assert!(dist(&t.apply(&b), &d).unwrap() < 1e-9);
    }

    #[test]
    fn hyperbolic_area_of_right_triangle() {
        let k = hyp();
        let o = ModelPoint::origin(k);
        let x = ModelPoint::polar(k, 1.0, 0.0);
        let y = ModelPoint::polar(k, 1.0, FRAC_PI_2);
        let sum = vertex_angle(&o, &x, &y).unwrap() + 2.0 * vertex_angle(&x, &o, &y).unwrap();
        assert!((triangle_area(&o, &x, &y).unwrap() - (PI - sum)).abs() < 1e-12);
    }

    fn arb_point(kappa: f64) -> impl Strategy<Value = ModelPoint> {
        (0.0..3.0f64, -PI..PI).prop_map(move |(r, t)| ModelPoint::polar(Kappa::new(kappa).unwrap(), r, t))
    }

    proptest! {
        #[test]
        fn triangle_inequality_flat(p in arb_point(0.0), q in arb_point(0.0), r in arb_point(0.0)) {
            let (a, b, c) = (dist(&p, &q).unwrap(), dist(&q, &r).unwrap(), dist(&p, &r).unwrap());
            prop_assert!(c <= a + b + 4.0 * EPS_MODEL);
        }

        #[test]
        fn triangle_inequality_random(p in arb_point(-1.0), q in arb_point(-1.0), r in arb_point(-1.0)) {
            let (a, b, c) = (dist(&p, &q).unwrap(), dist(&q, &r).unwrap(), dist(&p, &r).unwrap());
            prop_assert!(c <= a + b + 4.0 * EPS_MODEL);
            prop_assert!((dist(&q, &p).unwrap() - a).abs() < 1e-12);
        }

        #[test]
        fn flat_comparison_matches_coordinates(x1 in -3.0..3.0f64, y1 in -3.0..3.0f64, x2 in -3.0..3.0f64, y2 in -3.0..3.0f64) {
            let p = ModelPoint::euclidean(0.0, 0.0);
            let q = ModelPoint::euclidean(x1, y1);
            let r = ModelPoint::euclidean(x2, y2);
            prop_assume!(x1.hypot(y1) > 1e-2 && x2.hypot(y2) > 1e-2);
            let oracle = (x1 * y2 - y1 * x2).abs().atan2(x1 * x2 + y1 * y2);
            let a = dist(&p, &q).unwrap();
            let b = dist(&p, &r).unwrap();
            let c = dist(&q, &r).unwrap();
            let ca = comparison_angle(Kappa::FLAT, a, b, c).unwrap();
            prop_assert!((ca - oracle).abs() < 1e-9);
            prop_assert!((vertex_angle(&p, &q, &r).unwrap() - ca).abs() < 1e-9);
        }

        #[test]
        fn curvature_thins_triangles(kappa in -3.0..-0.01f64, a in 0.05..3.0f64, b in 0.05..3.0f64, f in 0.0..1.0f64) {
            let c = (a - b).abs() + f * (a + b - (a - b).abs());
            let hyp = comparison_angle(Kappa::new(kappa).unwrap(), a, b, c).unwrap();
            let flat = comparison_angle(Kappa::FLAT, a, b, c).unwrap();
            prop_assert!(hyp <= flat + 1e-12);
        }

        #[test]
        fn geodesic_point_additive(p in arb_point(-1.0), q in arb_point(-1.0), s in 0.0..1.0f64, t in 0.0..1.0f64) {
            let (s, t) = if s <= t { (s, t) } else { (t, s) };
            prop_assume!(t > 1e-6);
            let pt = geodesic_point(&p, &q, t).unwrap();
            let inner = geodesic_point(&p, &pt, s / t).unwrap();
            let direct = geodesic_point(&p, &q, s).unwrap();
            prop_assert!(dist(&inner, &direct).unwrap() < EPS_MODEL);
        }

        #[test]
        fn isometries_preserve_distance(a in arb_point(-1.0), b in arb_point(-1.0), p in arb_point(-1.0), q in arb_point(-1.0), th in -PI..PI) {
            prop_assume!(dist(&a, &b).unwrap() > 1e-3);
            let c = ModelPoint::polar(Kappa::new(-1.0).unwrap(), 0.5, th);
            let l = dist(&a, &b).unwrap();
            let d = ModelIsometry::frame(&c, &ModelPoint::polar(Kappa::new(-1.0).unwrap(), 1.0, th + 1.0)).unwrap()
                .apply(&ModelPoint::polar(Kappa::new(-1.0).unwrap(), l, 0.0));
            let t = gluing_isometry(&a, &b, &c, &d, Handedness::Preserving).unwrap();
            let before = dist(&p, &q).unwrap();
            let after = dist(&t.apply(&p), &t.apply(&q)).unwrap();
            prop_assert!((before - after).abs() < 1e-8 * (1.0 + before));
        }
    }
}
