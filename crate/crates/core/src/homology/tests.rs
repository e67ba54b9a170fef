use super::*;
use crate::complex::tests::square_doc;
use crate::complex::{Complex, ComplexPoint, EdgeId, FaceId, Seam};
use crate::model::ModelPoint;
use crate::region::{CarveOp, Region};

fn square(side: f64, h: f64, seams: &[Seam]) -> SubdividedComplex {
    SubdividedComplex::new(&Complex::build(square_doc(side)).unwrap(), h, seams).unwrap()
}

fn boundary_curve(s: &SubdividedComplex) -> CycleCurve {
    let mut verts = Vec::new();
    for e in 0..4 {
        let chain = s.edge_chain(EdgeId(e));
        verts.extend(chain[..chain.len() - 1].iter().map(|x| x.1));
    }
    CycleCurve::from_vertices(s, &verts).unwrap()
}

fn inner_square(side: f64, lo: f64, hi: f64) -> (SubdividedComplex, CycleCurve) {
    let p = |x: f64, y: f64| ComplexPoint::Face { face: FaceId(0), at: ModelPoint::euclidean(x, y) };
    let seam = Seam::closed(vec![p(lo, lo), p(hi, lo), p(hi, hi), p(lo, hi)]);
    let s = square(side, 0.25, &[seam]);
    let g = CycleCurve::from_trace(&s, &s.seams()[0]).unwrap();
    (s, g)
}

#[test]
fn single_triangle_boundary_column() {
    let s = square(1.0, 10.0, &[]);
    let r = Region::from_tris(&s, [0]);
    let cc = ChainComplex::of_region(&s, &r);
    assert_eq!(cc.d2.len(), 1);
    let mut entries: Vec<i64> = cc.d2[0].iter().map(|x| x.1.abs()).collect();
    entries.sort();
    assert_eq!(entries, vec![1, 1, 1]);
    assert!(cc.d1d2_is_zero());
}

#[test]
fn square_boundary_is_a_circle() {
    let s = square(1.0, 0.5, &[]);
    let r = Region::parent_skeleton(&s, &[EdgeId(0), EdgeId(1), EdgeId(2), EdgeId(3)]);
    let cc = ChainComplex::of_region(&s, &r);
    assert!(cc.d2.is_empty());
    let h = cc.homology().unwrap();
    assert_eq!((h.betti0, h.betti1, h.betti2), (1, 1, 0));
    // rank of d1 is V - 1
    assert_eq!(smith(&cc.d1_matrix()).rank, cc.vertices.len() - 1);
}

#[test]
fn disk_and_annulus() {
    let s = square(2.0, 0.3, &[]);
    let cc = ChainComplex::of_subdivision(&s);
    assert!(cc.d1d2_is_zero());
    let h = cc.homology().unwrap();
    assert_eq!((h.betti0, h.betti1, h.betti2), (1, 0, 0));
    assert!(h.torsion.is_empty());
    let ann = Region::carve(&s, &[CarveOp::RemoveBox { face: 1, min: [0.7, 0.7], max: [1.3, 1.3] }]);
    let h = ChainComplex::of_region(&s, &ann).homology().unwrap();
    assert_eq!(h.betti1, 1);
}

#[test]
fn boundary_curve_bounds_everything() {
    let s = square(1.0, 0.3, &[]);
    let g = boundary_curve(&s);
    let cc = ChainComplex::of_subdivision(&s);
    let c = bounding_chain(&cc, &g, SolveOptions::default()).unwrap();
    assert!(c.iter().all(|&x| x == 1));
    assert_eq!(cc.boundary2(&c), g.chain(&cc).unwrap());
}

#[test]
fn triangle_boundary_bounds_that_triangle() {
    let s = square(1.0, 0.3, &[]);
    let t = 7;
    let g = CycleCurve::from_vertices(&s, &s.tris[t].verts).unwrap();
    let cc = ChainComplex::of_subdivision(&s);
    let c = bounding_chain(&cc, &g, SolveOptions::default()).unwrap();
    for (k, &x) in c.iter().enumerate() {
        assert_eq!(x != 0, k == t);
    }
    assert_eq!(c[t].abs(), 1);
}

#[test]
fn permuted_peeling_gives_same_chain() {
    let (s, g) = inner_square(2.0, 0.5, 1.5);
    let cc = ChainComplex::of_subdivision(&s);
    let a = bounding_chain(&cc, &g, SolveOptions::default()).unwrap();
    for seed in 0..4 {
        let b = bounding_chain(&cc, &g, SolveOptions { order_seed: Some(seed) }).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn jordan_interior_and_oracle_agree() {
    let (s, g) = inner_square(2.0, 0.5, 1.5);
    let cls = curve_interior(&s, &g).unwrap();
    let inside_area: f64 = cls
        .interior_tris()
        .iter()
        .map(|&t| {
            let c = &s.tris[t].chart;
            crate::model::triangle_area(&c[0], &c[1], &c[2]).unwrap()
        })
        .sum();
    assert!((inside_area - 1.0).abs() < 1e-9);
    // the corners of the big square are outside, its center inside
    assert_eq!(cls.vertices[0], CellState::Out);
    let center = s.cell_of(&ComplexPoint::Face { face: FaceId(0), at: ModelPoint::euclidean(1.0, 1.0) }).unwrap();
    assert_ne!(cls.state(center), CellState::Out);
    let all_v: Vec<usize> = (0..s.vertices.len()).collect();
    let all_t: Vec<usize> = (0..s.tris.len()).collect();
    let agree = cross_validate(&s, &g, &cls, &all_v, &all_t).unwrap();
    assert!(agree.all_agree(), "{:?}", agree.disagreements);
    let closure = cls.closure_region(&s);
    let h = ChainComplex::of_region(&s, &closure).homology().unwrap();
    assert_eq!((h.betti0, h.betti1), (1, 0));
}

#[test]
fn non_simple_curve_rejected() {
    let s = square(1.0, 0.3, &[]);
    let t = &s.tris[0];
    let v = t.verts;
    assert!(matches!(
        CycleCurve::from_vertices(&s, &[v[0], v[1], v[2], v[0], v[1], v[2]]),
        Err(CatkError::InvalidCurve(_))
    ));
}

mod props {
    use std::sync::OnceLock;

    use proptest::prelude::*;

    use super::*;
    use crate::builders;

    fn tripod() -> &'static SubdividedComplex {
        static S: OnceLock<SubdividedComplex> = OnceLock::new();
        S.get_or_init(|| SubdividedComplex::new(&Complex::build(builders::tripod(3.0, 3.0)).unwrap(), 0.5, &[]).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn generated_regions_are_disks(seed in 0u64..10_000, cells in 1usize..200) {
            let s = tripod();
            let r = Region::generate(s, seed, cells);
            let cc = ChainComplex::of_region(s, &r);
            prop_assert!(cc.d1d2_is_zero());
            let h = cc.homology().unwrap();
            prop_assert_eq!(h.betti0, 1);
            prop_assert_eq!(h.betti1, 0);
        }

        #[test]
        fn boundary_of_a_boundary_vanishes(seed in 0u64..10_000, coeffs in proptest::collection::vec(-3i64..=3, 1..40)) {
            let s = tripod();
            let r = Region::generate(s, seed, 120);
            let cc = ChainComplex::of_region(s, &r);
            let n = cc.d2_matrix().cols.len();
            let chain: Vec<i64> = (0..n).map(|i| coeffs[i % coeffs.len()]).collect();
            prop_assert!(cc.boundary1(&cc.boundary2(&chain)).iter().all(|&x| x == 0));
        }
    }
}
