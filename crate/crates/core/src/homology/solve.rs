//! Exact solutions of `d2 c = z` for 2-complexes without 2-cycles.
//!
//! Triangles are peeled off through free edges: an edge lying on exactly one
//! remaining triangle fixes that triangle's coefficient. If peeling stalls the
//! remaining system is solved by integer row reduction.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Incidence data the solver needs.
pub struct Incidence<'a> {
    /// Per triangle: (edge index, sign).
    pub tri_edges: &'a [[(usize, i64); 3]],
    /// Per edge: incident triangle indices.
    pub edge_tris: &'a [Vec<usize>],
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    /// Shuffle the free-edge queue with this seed.
    pub order_seed: Option<u64>,
}

/// Unique integer chain on the triangles not `skip`ped with boundary `rhs`, or `None`.
///
/// Uniqueness is assumed (no 2-cycles), which holds for subcomplexes of a complex with trivial H2.
pub fn solve<F: Fn(usize) -> bool>(inc: &Incidence<'_>, rhs: &[i64], skip: F, opts: SolveOptions) -> Option<Vec<i64>> {
    let small: Vec<i64> = rhs.to_vec();
    match peel(inc, small, &skip, opts) {
        Ok(r) => r,
        Err(()) => {
            let big: Vec<BigInt> = rhs.iter().map(|&v| BigInt::from(v)).collect();
            let r = peel(inc, big, &skip, opts).ok()??;
            r.into_iter().map(|v| v.to_i64()).collect()
        }
    }
}

trait Coef: Clone + Zero + PartialEq + CheckedMul + CheckedSub + From<i64> {
    fn to_big(&self) -> BigInt;
}

impl Coef for i64 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Coef for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// `Err` on overflow, `Ok(None)` when no solution exists.
fn peel<T: Coef, F: Fn(usize) -> bool>(
    inc: &Incidence<'_>,
    mut residual: Vec<T>,
    skip: &F,
    opts: SolveOptions,
) -> Result<Option<Vec<T>>, ()> {
    let nt = inc.tri_edges.len();
    let ne = inc.edge_tris.len();
    let mut alive: Vec<bool> = (0..nt).map(|t| !skip(t)).collect();
    let mut count: Vec<usize> = (0..ne).map(|e| inc.edge_tris[e].iter().filter(|&&t| alive[t]).count()).collect();
    let mut coef: Vec<T> = vec![T::zero(); nt];
    let mut start: Vec<usize> = (0..ne).filter(|&e| count[e] == 1).collect();
    if let Some(seed) = opts.order_seed {
        start.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut queue: VecDeque<usize> = start.into();
    let mut remaining = alive.iter().filter(|&&a| a).count();
    while let Some(e) = queue.pop_front() {
        if count[e] != 1 {
            continue;
        }
        let t = *inc.edge_tris[e].iter().find(|&&t| alive[t]).expect("count is one");
        let sign = inc.tri_edges[t].iter().find(|x| x.0 == e).expect("edge of triangle").1;
        let c = if sign > 0 { residual[e].clone() } else { T::zero().checked_sub(&residual[e]).ok_or(())? };
        for &(f, s) in &inc.tri_edges[t] {
            let d = c.checked_mul(&T::from(s)).ok_or(())?;
            residual[f] = residual[f].checked_sub(&d).ok_or(())?;
            count[f] -= 1;
            if count[f] == 1 {
                queue.push_back(f);
            }
        }
        coef[t] = c;
        alive[t] = false;
        remaining -= 1;
    }
    if remaining > 0 {
        let rest: Vec<usize> = (0..nt).filter(|&t| alive[t]).collect();
        let Some(sol) = dense_rest(inc, &rest, &residual) else { return Ok(None) };
        for (k, &t) in rest.iter().enumerate() {
            let v = sol[k].to_i64().ok_or(())?;
            coef[t] = T::from(v);
            for &(f, s) in &inc.tri_edges[t] {
                let d = coef[t].checked_mul(&T::from(s)).ok_or(())?;
                residual[f] = residual[f].checked_sub(&d).ok_or(())?;
            }
        }
    }
    if residual.iter().any(|r| !r.is_zero()) {
        return Ok(None);
    }
    Ok(Some(coef))
}

/// Integer solve of the stalled block by row echelon reduction.
fn dense_rest<T: Coef>(inc: &Incidence<'_>, rest: &[usize], residual: &[T]) -> Option<Vec<BigInt>> {
    let mut rows: Vec<usize> = rest.iter().flat_map(|&t| inc.tri_edges[t].iter().map(|x| x.0)).collect();
    rows.sort_unstable();
    rows.dedup();
    let n = rest.len();
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|&e| {
            let mut row = vec![BigInt::zero(); n + 1];
            for (k, &t) in rest.iter().enumerate() {
                if let Some(x) = inc.tri_edges[t].iter().find(|x| x.0 == e) {
                    row[k] = BigInt::from(x.1);
                }
            }
            row[n] = residual[e].to_big();
            row
        })
        .collect();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        // gcd-reduce column `col` below row r to a single nonzero entry
        loop {
            let nz: Vec<usize> = (r..m).filter(|&i| !a[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    a.swap(r, i);
                    pivots.push(col);
                    r += 1;
                }
                break;
            }
            let p = *nz.iter().min_by(|&&x, &&y| a[x][col].abs().cmp(&a[y][col].abs())).expect("nonempty");
            for &i in &nz {
                if i != p {
                    let q = a[i][col].div_floor(&a[p][col]);
                    for j in col..=n {
                        let v = &q * &a[p][j];
                        a[i][j] -= v;
                    }
                }
            }
        }
    }
    if (r..m).any(|i| !a[i][n].is_zero()) || pivots.len() < n {
        return None;
    }
    let mut x = vec![BigInt::zero(); n];
    for (i, &col) in pivots.iter().enumerate().rev() {
        let mut s = a[i][n].clone();
        for j in col + 1..n {
            s -= &a[i][j] * &x[j];
        }
        let (q, rem) = s.div_rem(&a[i][col]);
        if !rem.is_zero() {
            return None;
        }
        x[col] = q;
    }
    Some(x)
}
