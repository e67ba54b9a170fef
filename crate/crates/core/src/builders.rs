//! Ready-made complexes used by the examples and tests.

use std::f64::consts::PI;

use crate::complex::{ComplexDoc, ComplexPoint, EdgeDoc, EdgeId, FaceDoc, FaceId, PointDoc, SideDoc};
use crate::error::Result;
use crate::model::{dist, Kappa, ModelPoint};

/// Three flat `width x 2*half_height` rectangles glued along a common spine.
///
/// Spine vertices are 1 (bottom) and 2 (top); the spine is edge 1, running
/// bottom to top. Face `i` (1..=3) has chart polygon
/// `(0,H), (0,-H), (W,-H), (W,H)`, so the spine is its chart line `x = 0`.
pub fn tripod(width: f64, half_height: f64) -> ComplexDoc {
    let (w, h) = (width, half_height);
    let mut vertices = vec![1, 2];
    let mut edges = vec![EdgeDoc { id: 1, length: 2.0 * h, endpoints: [1, 2] }];
    let mut faces = Vec::new();
    for i in 1..=3u64 {
        let (lo, hi) = (10 * i + 1, 10 * i + 2);
        vertices.extend([lo, hi]);
        edges.push(EdgeDoc { id: 10 * i + 1, length: w, endpoints: [1, lo] });
        edges.push(EdgeDoc { id: 10 * i + 2, length: 2.0 * h, endpoints: [lo, hi] });
        edges.push(EdgeDoc { id: 10 * i + 3, length: w, endpoints: [hi, 2] });
        faces.push(FaceDoc {
            id: i,
            polygon: vec![vec![0.0, h], vec![0.0, -h], vec![w, -h], vec![w, h]],
            sides: vec![
                SideDoc { edge: 1, reversed: true },
                SideDoc { edge: 10 * i + 1, reversed: false },
                SideDoc { edge: 10 * i + 2, reversed: false },
                SideDoc { edge: 10 * i + 3, reversed: false },
            ],
        });
    }
    ComplexDoc { kappa: 0.0, vertices, edges, faces }
}

/// Point of a tripod half-plane given by its chart coordinates (`face` is 1-based).
pub fn tripod_point(face: u64, x: f64, y: f64) -> PointDoc {
    PointDoc::face(face, vec![x, y])
}

/// An axis-aligned flat square `[0, side]^2` as a single face.
pub fn square(side: f64) -> ComplexDoc {
    ComplexDoc {
        kappa: 0.0,
        vertices: vec![1, 2, 3, 4],
        edges: (1..=4u64).map(|e| EdgeDoc { id: e, length: side, endpoints: [e, e % 4 + 1] }).collect(),
        faces: vec![FaceDoc {
            id: 1,
            polygon: vec![vec![0.0, 0.0], vec![side, 0.0], vec![side, side], vec![0.0, side]],
            sides: (1..=4).map(|e| SideDoc { edge: e, reversed: false }).collect(),
        }],
    }
}

/// A flat rectangle `[0, w] x [0, h]` as a single face.
pub fn rectangle(w: f64, h: f64) -> ComplexDoc {
    let lengths = [w, h, w, h];
    ComplexDoc {
        kappa: 0.0,
        vertices: vec![1, 2, 3, 4],
        edges: (1..=4u64).map(|e| EdgeDoc { id: e, length: lengths[e as usize - 1], endpoints: [e, e % 4 + 1] }).collect(),
        faces: vec![FaceDoc {
            id: 1,
            polygon: vec![vec![0.0, 0.0], vec![w, 0.0], vec![w, h], vec![0.0, h]],
            sides: (1..=4).map(|e| SideDoc { edge: e, reversed: false }).collect(),
        }],
    }
}

/// `n` flat isosceles sectors of apex angle `angle` and leg `r` glued cyclically around vertex 0.
///
/// With `n * angle < 2π` the apex is a cone point of positive curvature.
pub fn cone(n: usize, angle: f64, r: f64) -> ComplexDoc {
    let n = n as u64;
    let base = 2.0 * r * (angle / 2.0).sin();
    let mut vertices = vec![0];
    vertices.extend(1..=n);
    let mut edges: Vec<EdgeDoc> = (1..=n).map(|i| EdgeDoc { id: i, length: r, endpoints: [0, i] }).collect();
    edges.extend((1..=n).map(|i| EdgeDoc { id: 100 + i, length: base, endpoints: [i, i % n + 1] }));
    let faces = (1..=n)
        .map(|i| FaceDoc {
            id: i,
            polygon: vec![vec![0.0, 0.0], vec![r, 0.0], vec![r * angle.cos(), r * angle.sin()]],
            sides: vec![
                SideDoc { edge: i, reversed: false },
                SideDoc { edge: 100 + i, reversed: false },
                SideDoc { edge: i % n + 1, reversed: true },
            ],
        })
        .collect();
    ComplexDoc { kappa: 0.0, vertices, edges, faces }
}

/// A regular hyperbolic `n`-gon of circumradius `r` centred at the origin, as one face.
pub fn hyperbolic_polygon(kappa: f64, n: usize, r: f64) -> Result<ComplexDoc> {
    let k = Kappa::new(kappa)?;
    let pts: Vec<ModelPoint> = (0..n).map(|i| ModelPoint::polar(k, r, 2.0 * PI * i as f64 / n as f64)).collect();
    let l = dist(&pts[0], &pts[1])?;
    let n = n as u64;
    Ok(ComplexDoc {
        kappa,
        vertices: (1..=n).collect(),
        edges: (1..=n).map(|e| EdgeDoc { id: e, length: l, endpoints: [e, e % n + 1] }).collect(),
        faces: vec![FaceDoc {
            id: 1,
            polygon: pts.iter().map(|p| p.coords()).collect(),
            sides: (1..=n).map(|e| SideDoc { edge: e, reversed: false }).collect(),
        }],
    })
}

/// Face-chart point shorthand for code working with face indices.
pub fn face_point(face: usize, x: f64, y: f64) -> ComplexPoint {
    ComplexPoint::Face { face: FaceId(face), at: ModelPoint::euclidean(x, y) }
}

/// Point on edge index `e` at arclength `t`.
pub fn edge_point(e: usize, t: f64) -> ComplexPoint {
    ComplexPoint::Edge { edge: EdgeId(e), t }
}
