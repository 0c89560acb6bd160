//! Deliberately dumb brute-force references that the solvers are tested
//! against. The oracles share only the field arithmetic and raw
//! evaluation with the code they validate; elimination is reimplemented
//! locally.
//!
//! Exceeding an oracle's work budget is a third outcome, distinct from
//! "no solution": a truncated oracle would silently invalidate every test
//! built on it.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{Elem, FieldSpec};
use crate::matrix::Mat;
use crate::tensor::{Decomposition, Tensor3};
use crate::wildcard::{verify_rank1_matrix, verify_rank1_tensor, WildMat, WildTensor3};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    BudgetExceeded { needed: u128, budget: u64 },
    NonBinaryField,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { needed, budget } => {
                write!(f, "oracle scan needs {needed} candidates, budget is {budget}")
            }
            OracleError::NonBinaryField => write!(f, "oracle only supports GF(2)"),
        }
    }
}

/// Base-q digit counter that walks every vector of the given length.
struct Counter {
    digits: Vec<Elem>,
    base: u32,
    started: bool,
}

impl Counter {
    fn new(len: usize, base: u32) -> Counter {
        Counter { digits: vec![0; len], base, started: false }
    }

    fn next_state(&mut self) -> Option<&[Elem]> {
        if !self.started {
            self.started = true;
            return Some(&self.digits);
        }
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.base {
                return Some(&self.digits);
            }
            *d = 0;
        }
        None
    }
}

fn pow_checked(base: u64, exp: u32) -> u128 {
    (base as u128).saturating_pow(exp)
}

/// Local Gaussian elimination: solves `K x_i = rhs_i` for every column
/// `i` of `rhs` simultaneously, free variables zero. `K` is given as
/// `rows x vars` and `rhs` as `rows x outs`.
fn solve_all_columns(
    field: &FieldSpec,
    k: &mut [Vec<Elem>],
    rhs: &mut [Vec<Elem>],
    vars: usize,
) -> Option<Vec<Vec<Elem>>> {
    let rows = k.len();
    let outs = rhs.first().map_or(0, |r| r.len());
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; vars];
    let mut row = 0;
    for col in 0..vars {
        let Some(src) = (row..rows).find(|&i| k[i][col] != 0) else {
            continue;
        };
        k.swap(src, row);
        rhs.swap(src, row);
        let inv = field.inv(k[row][col]);
        for v in k[row].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for v in rhs[row].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for i in 0..rows {
            if i == row || k[i][col] == 0 {
                continue;
            }
            let s = k[i][col];
            for c in 0..vars {
                let sub = field.mul(s, k[row][c]);
                k[i][c] = field.sub(k[i][c], sub);
            }
            for c in 0..outs {
                let sub = field.mul(s, rhs[row][c]);
                rhs[i][c] = field.sub(rhs[i][c], sub);
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
    }
    // Consistency: zero coefficient rows need zero right-hand sides.
    for i in row..rows {
        if rhs[i].iter().any(|&v| v != 0) {
            return None;
        }
    }
    let mut x = vec![vec![0; outs]; vars];
    for col in 0..vars {
        if let Some(r) = pivot_of_col[col] {
            x[col] = rhs[r].clone();
        }
    }
    Some(x)
}

/// Brute-force rank-R decomposition: scans every `(B, C)` factor pair in
/// lexicographic order and solves for `A` exactly; returns the first
/// success.
pub fn brute_force_decompose<'f>(
    t: &Tensor3<'f>,
    r: usize,
    budget: u64,
) -> Result<Option<Decomposition<'f>>, OracleError> {
    let field = t.field();
    let (p, q, s) = t.dims();
    let needed = pow_checked(field.q() as u64, (r * (q + s)) as u32);
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }

    let mut bc = Counter::new(r * (q + s), field.q());
    while let Some(state) = bc.next_state() {
        let (b_digits, c_digits) = state.split_at(r * q);
        // Kernel column for term rr is vec(B_rr x C_rr).
        let mut kernel: Vec<Vec<Elem>> = vec![vec![0; r]; q * s];
        for rr in 0..r {
            for j in 0..q {
                let bj = b_digits[rr * q + j];
                if bj == 0 {
                    continue;
                }
                for kk in 0..s {
                    kernel[j * s + kk][rr] = field.mul(bj, c_digits[rr * s + kk]);
                }
            }
        }
        let mut rhs: Vec<Vec<Elem>> = vec![vec![0; p]; q * s];
        for i in 0..p {
            for j in 0..q {
                for kk in 0..s {
                    rhs[j * s + kk][i] = t.get(i, j, kk);
                }
            }
        }
        if let Some(x) = solve_all_columns(field, &mut kernel, &mut rhs, r) {
            let mut a = Mat::zeros(field, r, p);
            for rr in 0..r {
                for i in 0..p {
                    a[(rr, i)] = x[rr][i];
                }
            }
            let b = Mat::new(field, r, q, b_digits.to_vec());
            let c = Mat::new(field, r, s, c_digits.to_vec());
            let dec = Decomposition::new(a, b, c);
            debug_assert_eq!(dec.eval(), *t);
            return Ok(Some(dec));
        }
    }
    Ok(None)
}

/// Exhaustive scan over all vector triples for the rank-1 wildcard tensor
/// problem.
pub fn brute_force_rank1_wildcard_tensor(
    w: &WildTensor3<'_>,
    budget: u64,
) -> Result<Option<(Vec<Elem>, Vec<Elem>, Vec<Elem>)>, OracleError> {
    let field = w.field();
    let (p, q, s) = w.dims();
    let needed = pow_checked(field.q() as u64, (p + q + s) as u32);
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut counter = Counter::new(p + q + s, field.q());
    while let Some(state) = counter.next_state() {
        let (a, rest) = state.split_at(p);
        let (b, c) = rest.split_at(q);
        if verify_rank1_tensor(w, a, b, c) {
            return Ok(Some((a.to_vec(), b.to_vec(), c.to_vec())));
        }
    }
    Ok(None)
}

/// Matrix flavor of [`brute_force_rank1_wildcard_tensor`].
pub fn brute_force_rank1_wildcard_matrix(
    w: &WildMat<'_>,
    budget: u64,
) -> Result<Option<(Vec<Elem>, Vec<Elem>)>, OracleError> {
    let field = w.field();
    let (m, n) = (w.rows(), w.cols());
    let needed = pow_checked(field.q() as u64, (m + n) as u32);
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut counter = Counter::new(m + n, field.q());
    while let Some(state) = counter.next_state() {
        let (a, b) = state.split_at(m);
        if verify_rank1_matrix(w, a, b) {
            return Ok(Some((a.to_vec(), b.to_vec())));
        }
    }
    Ok(None)
}

/// One rank-2 candidate: `a x b x c + a2 x b2 x c2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rank2Solution {
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    pub c: Vec<Elem>,
    pub a2: Vec<Elem>,
    pub b2: Vec<Elem>,
    pub c2: Vec<Elem>,
}

/// Streams every vector sextuple over `GF(2)` consistent with all fixed
/// cells, in a fixed order. For each choice of the `a` and `b` sides the
/// fixed cells are linear in `(c, c2)`, so the scan enumerates the exact
/// solution set of a small bit system rather than testing every `c`
/// candidate blindly; the stream is identical to the full scan's.
pub struct Rank2Decompositions {
    cells: Vec<(usize, usize, usize, Elem)>,
    dims: (usize, usize, usize),
    ab_code: u64,
    ab_total: u64,
    sols: Vec<u32>,
    sol_idx: usize,
    cur_ab: (u32, u32, u32, u32),
}

/// All rank-2 decompositions of a wildcard tensor over `GF(2)`, budgeted
/// by the nominal full-scan size `2^(2(p+q+s))`.
pub fn enumerate_rank2_decompositions(
    w: &WildTensor3<'_>,
    budget: u64,
) -> Result<Rank2Decompositions, OracleError> {
    if w.field().q() != 2 {
        return Err(OracleError::NonBinaryField);
    }
    let (p, q, s) = w.dims();
    let needed = pow_checked(2, (2 * (p + q + s)) as u32);
    if needed > budget as u128 {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    Ok(Rank2Decompositions {
        cells: w.fixed_cells().collect(),
        dims: w.dims(),
        ab_code: 0,
        ab_total: 1 << (2 * (p + q)),
        sols: Vec::new(),
        sol_idx: 0,
        cur_ab: (0, 0, 0, 0),
    })
}

fn bits_to_vec(bits: u32, len: usize) -> Vec<Elem> {
    (0..len).map(|i| (bits >> i) & 1).collect()
}

impl Rank2Decompositions {
    /// Solves the `(c, c2)` system for the current `(a, a2, b, b2)` и
    /// fills `sols` with every packed solution, in ascending order of the
    /// free-variable assignment.
    fn fill_solutions(&mut self) {
        let (_, _, s) = self.dims;
        let (a, a2, b, b2) = self.cur_ab;
        let nvars = 2 * s;
        // Row-reduce the bit system on the fly.
        let mut pivot_rows: Vec<(u32, u32)> = Vec::new(); // (mask, rhs) with pivot = lowest set bit tracked separately
        let mut pivot_cols: Vec<usize> = Vec::new();
        for &(i, j, k, v) in &self.cells {
            let mut mask: u32 = 0;
            if (a >> i) & 1 == 1 && (b >> j) & 1 == 1 {
                mask |= 1 << k;
            }
            if (a2 >> i) & 1 == 1 && (b2 >> j) & 1 == 1 {
                mask |= 1 << (s + k);
            }
            let mut rhs = v;
            for (idx, &(pm, pr)) in pivot_rows.iter().enumerate() {
                if (mask >> pivot_cols[idx]) & 1 == 1 {
                    mask ^= pm;
                    rhs ^= pr;
                }
            }
            if mask == 0 {
                if rhs != 0 {
                    self.sols.clear();
                    return;
                }
                continue;
            }
            let col = mask.trailing_zeros() as usize;
            // Back-substitute into existing pivots to keep them reduced.
            for (idx, pm) in pivot_rows.iter_mut().enumerate() {
                if (pm.0 >> col) & 1 == 1 {
                    pm.0 ^= mask;
                    pm.1 ^= rhs;
                    let _ = idx;
                }
            }
            pivot_rows.push((mask, rhs));
            pivot_cols.push(col);
        }
        // Particular solution: free variables zero.
        let mut base: u32 = 0;
        for (idx, &(_, rhs)) in pivot_rows.iter().enumerate() {
            if rhs == 1 {
                base |= 1 << pivot_cols[idx];
            }
        }
        let free_cols: Vec<usize> = (0..nvars)
            .filter(|c| !pivot_cols.contains(c))
            .collect();
        // Nullspace basis vector for each free column.
        let mut basis: Vec<u32> = Vec::with_capacity(free_cols.len());
        for &fc in &free_cols {
            let mut v: u32 = 1 << fc;
            for (idx, &(mask, _)) in pivot_rows.iter().enumerate() {
                if (mask >> fc) & 1 == 1 {
                    v |= 1 << pivot_cols[idx];
                }
            }
            basis.push(v);
        }
        self.sols.clear();
        for combo in 0..(1u64 << free_cols.len()) {
            let mut sol = base;
            for (bi, &bv) in basis.iter().enumerate() {
                if (combo >> bi) & 1 == 1 {
                    sol ^= bv;
                }
            }
            self.sols.push(sol);
        }
    }
}

impl Iterator for Rank2Decompositions {
    type Item = Rank2Solution;

    fn next(&mut self) -> Option<Rank2Solution> {
        let (p, q, s) = self.dims;
        loop {
            if self.sol_idx < self.sols.len() {
                let sol = self.sols[self.sol_idx];
                self.sol_idx += 1;
                let (a, a2, b, b2) = self.cur_ab;
                return Some(Rank2Solution {
                    a: bits_to_vec(a, p),
                    b: bits_to_vec(b, q),
                    c: bits_to_vec(sol, s),
                    a2: bits_to_vec(a2, p),
                    b2: bits_to_vec(b2, q),
                    c2: bits_to_vec(sol >> s, s),
                });
            }
            if self.ab_code >= self.ab_total {
                return None;
            }
            let code = self.ab_code;
            self.ab_code += 1;
            let a = (code & ((1 << p) - 1)) as u32;
            let a2 = ((code >> p) & ((1 << p) - 1)) as u32;
            let b = ((code >> (2 * p)) & ((1 << q) - 1)) as u32;
            let b2 = ((code >> (2 * p + q)) & ((1 << q) - 1)) as u32;
            self.cur_ab = (a, a2, b, b2);
            self.sol_idx = 0;
            self.fill_solutions();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::diagonal_gadget;
    use crate::wildcard::Cell;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeSet;
    use std::vec::Vec as StdVec;

    #[test]
    fn brute_decompose_diagonal_gadget() {
        let f = FieldSpec::new(2, 1).unwrap();
        let t = diagonal_gadget(&f);
        let dec = brute_force_decompose(&t, 2, 1 << 20).unwrap().unwrap();
        assert_eq!(dec.eval(), t);
        assert_eq!(brute_force_decompose(&t, 1, 1 << 20).unwrap(), None);
        let zero = Tensor3::zeros(&f, (2, 2, 2));
        assert!(brute_force_decompose(&zero, 0, 1 << 20).unwrap().is_some());
    }

    #[test]
    fn brute_decompose_budget() {
        let f = FieldSpec::new(3, 1).unwrap();
        let t = Tensor3::zeros(&f, (4, 4, 4));
        assert!(matches!(
            brute_force_decompose(&t, 4, 1000),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn brute_rank1_examples() {
        let f = FieldSpec::new(2, 1).unwrap();
        let wild = WildTensor3::all_wild(&f, (2, 2, 2));
        let (a, b, c) = brute_force_rank1_wildcard_tensor(&wild, 1 << 10)
            .unwrap()
            .unwrap();
        assert!(a.iter().chain(&b).chain(&c).all(|&e| e == 0));

        let mut unsat = WildTensor3::all_wild(&f, (2, 2, 2));
        unsat.set(0, 0, 0, Cell::Fixed(1));
        unsat.set(1, 1, 1, Cell::Fixed(1));
        unsat.set(0, 1, 1, Cell::Fixed(0));
        assert_eq!(
            brute_force_rank1_wildcard_tensor(&unsat, 1 << 10).unwrap(),
            None
        );

        let mut m = WildMat::all_wild(&f, 2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, Cell::Fixed(1));
            }
        }
        let (a, b) = brute_force_rank1_wildcard_matrix(&m, 1 << 10).unwrap().unwrap();
        assert!(verify_rank1_matrix(&m, &a, &b));
    }

    #[test]
    fn rank2_enumeration_of_diagonal_gadget() {
        let f = FieldSpec::new(2, 1).unwrap();
        let w = WildTensor3::from_tensor(&diagonal_gadget(&f));
        let sols: StdVec<Rank2Solution> =
            enumerate_rank2_decompositions(&w, 1 << 30).unwrap().collect();
        assert_eq!(sols.len(), 2);
        let set: BTreeSet<Rank2Solution> = sols.into_iter().collect();
        let e0 = vec![1, 0];
        let e1 = vec![0, 1];
        let want: BTreeSet<Rank2Solution> = [
            Rank2Solution {
                a: e0.clone(),
                b: e0.clone(),
                c: e0.clone(),
                a2: e1.clone(),
                b2: e1.clone(),
                c2: e1.clone(),
            },
            Rank2Solution {
                a: e1.clone(),
                b: e1.clone(),
                c: e1.clone(),
                a2: e0.clone(),
                b2: e0.clone(),
                c2: e0.clone(),
            },
        ]
        .into_iter()
        .collect();
        assert_eq!(set, want);
    }

    #[test]
    fn rank2_enumeration_includes_all_zero() {
        let f = FieldSpec::new(2, 1).unwrap();
        let zero = Tensor3::zeros(&f, (2, 2, 2));
        let w = WildTensor3::from_tensor(&zero);
        let all_zero = Rank2Solution {
            a: vec![0, 0],
            b: vec![0, 0],
            c: vec![0, 0],
            a2: vec![0, 0],
            b2: vec![0, 0],
            c2: vec![0, 0],
        };
        let mut iter = enumerate_rank2_decompositions(&w, 1 << 30).unwrap();
        assert!(iter.any(|s| s == all_zero));
    }

    #[test]
    fn rank2_enumeration_matches_naive_scan() {
        // Compare the linear-solve enumeration against a literal scan of
        // all 2^12 sextuples on random 2x2x2 wildcard tensors.
        let f = FieldSpec::new(2, 1).unwrap();
        let mut rng = StdRng::seed_from_u64(80);
        for _ in 0..40 {
            let cells: StdVec<Cell> = (0..8)
                .map(|_| match rng.gen_range(0..3) {
                    0 => Cell::Wild,
                    1 => Cell::Fixed(0),
                    _ => Cell::Fixed(1),
                })
                .collect();
            let w = WildTensor3::new(&f, (2, 2, 2), cells);
            let fast: BTreeSet<Rank2Solution> =
                enumerate_rank2_decompositions(&w, 1 << 30).unwrap().collect();
            let mut naive = BTreeSet::new();
            for code in 0..1u32 << 12 {
                let v = |off: u32| bits_to_vec((code >> off) & 3, 2);
                let (a, a2, b, b2, c, c2) =
                    (v(0), v(2), v(4), v(6), v(8), v(10));
                let ok = w.fixed_cells().all(|(i, j, k, val)| {
                    (a[i] & b[j] & c[k]) ^ (a2[i] & b2[j] & c2[k]) == val
                });
                if ok {
                    naive.insert(Rank2Solution { a, b, c, a2, b2, c2 });
                }
            }
            assert_eq!(fast, naive);
        }
    }

    #[test]
    fn rank2_enumeration_guards() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        let w = WildTensor3::all_wild(&f3, (2, 2, 2));
        assert!(matches!(
            enumerate_rank2_decompositions(&w, 1 << 30),
            Err(OracleError::NonBinaryField)
        ));

        let f2 = FieldSpec::new(2, 1).unwrap();
        let w = WildTensor3::all_wild(&f2, (4, 4, 4));
        assert!(matches!(
            enumerate_rank2_decompositions(&w, 1 << 10),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }
}
