//! Rank and invariant factors of sparse integer matrices.
//!
//! Unit pivots are eliminated sparsely with checked `i64` arithmetic. Whatever
//! is left (no unit entries, or an overflow) goes to a dense Smith normal form
//! over `BigInt`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Column-major sparse matrix.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: Vec<Vec<(usize, i64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub rank: usize,
    /// Invariant factors greater than one, ascending.
    pub factors: Vec<BigInt>,
    /// True when part of the reduction ran in arbitrary precision.
    pub bigint_fallback: bool,
}

pub fn smith(m: &SparseMatrix) -> Reduction {
    let mut cols: Vec<BTreeMap<usize, i64>> = m
        .cols
        .iter()
        .map(|c| c.iter().filter(|e| e.1 != 0).map(|&(r, v)| (r, v)).collect())
        .collect();
    let mut row_cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.rows];
    for (j, c) in cols.iter().enumerate() {
        for &r in c.keys() {
            row_cols[r].insert(j);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..m.rows).filter(|&r| !row_cols[r].is_empty()).map(|r| Reverse((row_cols[r].len(), r))).collect();
    let mut rank = 0;
    let mut overflow = false;

    'outer: loop {
        while let Some(Reverse((cnt, r))) = heap.pop() {
            if row_cols[r].len() != cnt || cnt == 0 {
                continue;
            }
            let pivot = row_cols[r]
                .iter()
                .copied()
                .filter(|&j| cols[j][&r].abs() == 1)
                .min_by_key(|&j| (cols[j].len(), j));
            let Some(c) = pivot else { continue };
            let a_rc = cols[c][&r];
            let others: Vec<usize> = row_cols[r].iter().copied().filter(|&j| j != c).collect();
            for j in others {
                let factor = cols[j][&r] * a_rc;
                let Some(updated) = axpy(&cols[j], factor, &cols[c]) else {
                    overflow = true;
                    break 'outer;
                };
                for &i in cols[j].keys() {
                    if !updated.contains_key(&i) {
                        row_cols[i].remove(&j);
                        heap.push(Reverse((row_cols[i].len(), i)));
                    }
                }
                for &i in updated.keys() {
                    if row_cols[i].insert(j) {
                        heap.push(Reverse((row_cols[i].len(), i)));
                    }
                }
                cols[j] = updated;
            }
            for &i in cols[c].keys() {
                row_cols[i].remove(&c);
                if i != r {
                    heap.push(Reverse((row_cols[i].len(), i)));
                }
            }
            cols[c].clear();
            rank += 1;
        }
        // a row skipped earlier may have gained a unit entry
        let retry: Vec<usize> = (0..m.rows)
            .filter(|&r| row_cols[r].iter().any(|&j| cols[j][&r].abs() == 1))
            .collect();
        if retry.is_empty() {
            break;
        }
        heap.extend(retry.into_iter().map(|r| Reverse((row_cols[r].len(), r))));
    }

    let live_cols: Vec<usize> = (0..cols.len()).filter(|&j| !cols[j].is_empty()).collect();
    let live_rows: Vec<usize> = (0..m.rows).filter(|&r| !row_cols[r].is_empty()).collect();
    let mut factors = Vec::new();
    let fallback = !live_cols.is_empty();
    if fallback {
        let row_pos: BTreeMap<usize, usize> = live_rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        let mut dense = vec![vec![BigInt::zero(); live_cols.len()]; live_rows.len()];
        for (k, &j) in live_cols.iter().enumerate() {
            for (&r, &v) in &cols[j] {
                dense[row_pos[&r]][k] = BigInt::from(v);
            }
        }
        for d in dense_smith(dense) {
            rank += 1;
            if !d.is_one() {
                factors.push(d);
            }
        }
    }
    factors.sort();
    Reduction { rank, factors, bigint_fallback: fallback || overflow }
}

/// `x - f * y`, dropping zeros; `None` on overflow.
fn axpy(x: &BTreeMap<usize, i64>, f: i64, y: &BTreeMap<usize, i64>) -> Option<BTreeMap<usize, i64>> {
    let mut out = x.clone();
    for (&i, &v) in y {
        let cur = out.get(&i).copied().unwrap_or(0);
        let nv = cur.checked_sub(f.checked_mul(v)?)?;
        if nv == 0 {
            out.remove(&i);
        } else {
            out.insert(i, nv);
        }
    }
    Some(out)
}

/// Nonzero diagonal of the Smith normal form, as absolute values.
pub fn dense_smith(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..n {
                        let v = &q * &a[t][j];
                        a[i][j] -= v;
                    }
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let v = &q * &row[t];
                        row[j] -= v;
                    }
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // bring the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t..m {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..n {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                continue;
            }
            // the pivot must divide the trailing block
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..n {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn dense_smith_of_known_matrix() {
        // diag(2, 6, 12) up to unimodular changes
        let a = vec![big(&[2, 4, 4]), big(&[-6, 6, 12]), big(&[10, -4, -16])];
        let d = dense_smith(a);
        assert_eq!(d, big(&[2, 6, 12]));
    }

    #[test]
    fn sparse_incidence_has_unit_factors() {
        // boundary of two triangles sharing an edge
        let m = SparseMatrix { rows: 5, cols: vec![vec![(0, 1), (1, 1), (2, -1)], vec![(2, 1), (3, 1), (4, -1)]] };
        let r = smith(&m);
        assert_eq!(r.rank, 2);
        assert!(r.factors.is_empty());
        assert!(!r.bigint_fallback);
    }

    #[test]
    fn torsion_survives_fallback() {
        // [[2]] has invariant factor 2
        let m = SparseMatrix { rows: 1, cols: vec![vec![(0, 2)]] };
        let r = smith(&m);
        assert_eq!(r.rank, 1);
        assert_eq!(r.factors, big(&[2]));
        assert!(r.bigint_fallback);
    }

    #[test]
    fn unit_pivot_then_torsion() {
        // [[1, 1], [1, -1]] ~ diag(1, 2)
        let m = SparseMatrix { rows: 2, cols: vec![vec![(0, 1), (1, 1)], vec![(0, 1), (1, -1)]] };
        let r = smith(&m);
        assert_eq!(r.rank, 2);
        assert_eq!(r.factors, big(&[2]));
    }

    #[test]
    fn zero_matrix() {
        let m = SparseMatrix { rows: 3, cols: vec![vec![], vec![(1, 0)]] };
        let r = smith(&m);
        assert_eq!(r.rank, 0);
        assert!(r.factors.is_empty());
    }
}
