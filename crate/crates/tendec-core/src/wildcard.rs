//! Rank-1 decomposition when some cells are wildcards: 3D tensors over any
//! small finite field (with a fast path for `GF(2)`), and matrices over
//! any finite field.
//!
//! Nonzero fixed cells force their coordinate variables to be nonzero, so
//! after a support check the tensor problem reduces to a linear system
//! over the exponents of a primitive element, i.e. over the integers
//! modulo `q-1`. The matrix problem instead propagates values along rows
//! and columns of the nonzero support by breadth-first search.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Elem, FieldSpec};

/// One tensor or matrix cell: pinned to a field value or free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Fixed(Elem),
    Wild,
}

impl Cell {
    pub fn fixed(self) -> Option<Elem> {
        match self {
            Cell::Fixed(v) => Some(v),
            Cell::Wild => None,
        }
    }
}

/// A `p x q x s` tensor of cells, row-major with the last index fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildTensor3<'f> {
    dims: (usize, usize, usize),
    cells: Vec<Cell>,
    field: &'f FieldSpec,
}

impl<'f> WildTensor3<'f> {
    pub fn all_wild(field: &'f FieldSpec, dims: (usize, usize, usize)) -> WildTensor3<'f> {
        WildTensor3 { dims, cells: vec![Cell::Wild; dims.0 * dims.1 * dims.2], field }
    }

    pub fn new(
        field: &'f FieldSpec,
        dims: (usize, usize, usize),
        cells: Vec<Cell>,
    ) -> WildTensor3<'f> {
        assert_eq!(cells.len(), dims.0 * dims.1 * dims.2);
        debug_assert!(cells.iter().all(|c| match c {
            Cell::Fixed(v) => *v < field.q(),
            Cell::Wild => true,
        }));
        WildTensor3 { dims, cells, field }
    }

    pub fn from_tensor(t: &crate::tensor::Tensor3<'f>) -> WildTensor3<'f> {
        WildTensor3 {
            dims: t.dims(),
            cells: t.data().iter().map(|&v| Cell::Fixed(v)).collect(),
            field: t.field(),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Cell {
        self.cells[(i * self.dims.1 + j) * self.dims.2 + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, c: Cell) {
        self.cells[(i * self.dims.1 + j) * self.dims.2 + k] = c;
    }

    /// Fixed cells as `(i, j, k, value)`.
    pub fn fixed_cells(&self) -> impl Iterator<Item = (usize, usize, usize, Elem)> + '_ {
        let (_, q, s) = self.dims;
        self.cells.iter().enumerate().filter_map(move |(idx, c)| {
            c.fixed().map(|v| {
                let k = idx % s;
                let j = (idx / s) % q;
                let i = idx / (q * s);
                (i, j, k, v)
            })
        })
    }
}

/// An `m x n` matrix of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildMat<'f> {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    field: &'f FieldSpec,
}

impl<'f> WildMat<'f> {
    pub fn all_wild(field: &'f FieldSpec, rows: usize, cols: usize) -> WildMat<'f> {
        WildMat { rows, cols, cells: vec![Cell::Wild; rows * cols], field }
    }

    pub fn new(field: &'f FieldSpec, rows: usize, cols: usize, cells: Vec<Cell>) -> WildMat<'f> {
        assert_eq!(cells.len(), rows * cols);
        debug_assert!(cells.iter().all(|c| match c {
            Cell::Fixed(v) => *v < field.q(),
            Cell::Wild => true,
        }));
        WildMat { rows, cols, cells, field }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: Cell) {
        self.cells[i * self.cols + j] = c;
    }

    pub fn fixed_cells(&self) -> impl Iterator<Item = (usize, usize, Elem)> + '_ {
        let cols = self.cols;
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(idx, c)| c.fixed().map(|v| (idx / cols, idx % cols, v)))
    }
}

/// True iff every fixed cell equals the corresponding product of vector
/// entries.
pub fn verify_rank1_tensor(w: &WildTensor3<'_>, a: &[Elem], b: &[Elem], c: &[Elem]) -> bool {
    let f = w.field();
    w.fixed_cells()
        .all(|(i, j, k, v)| f.mul(f.mul(a[i], b[j]), c[k]) == v)
}

/// Matrix flavor of [`verify_rank1_tensor`].
pub fn verify_rank1_matrix(w: &WildMat<'_>, a: &[Elem], b: &[Elem]) -> bool {
    let f = w.field();
    w.fixed_cells().all(|(i, j, v)| f.mul(a[i], b[j]) == v)
}

/// Rank-1 wildcard decomposition over `GF(2)`: each vector entry is the OR
/// of the fixed values in its slice, which is the minimal assignment
/// forced by the 1 cells; the instance is solvable iff that assignment
/// verifies.
pub fn rank1_wildcard_gf2(w: &WildTensor3<'_>) -> Option<(Vec<Elem>, Vec<Elem>, Vec<Elem>)> {
    assert_eq!(w.field().q(), 2, "fast path is specific to GF(2)");
    let (p, q, s) = w.dims();
    let mut a = vec![0; p];
    let mut b = vec![0; q];
    let mut c = vec![0; s];
    for (i, j, k, v) in w.fixed_cells() {
        a[i] |= v;
        b[j] |= v;
        c[k] |= v;
    }
    if verify_rank1_tensor(w, &a, &b, &c) {
        Some((a, b, c))
    } else {
        None
    }
}

/// A linear system over the integers modulo `modulus`.
#[derive(Debug, Clone)]
pub struct ModSystem {
    pub modulus: u64,
    pub vars: usize,
    /// `(coefficients, rhs)` rows, entries reduced modulo `modulus`.
    pub rows: Vec<(Vec<u64>, u64)>,
}

impl ModSystem {
    pub fn new(modulus: u64, vars: usize) -> ModSystem {
        assert!(modulus >= 1);
        ModSystem { modulus, vars, rows: Vec::new() }
    }

    pub fn push_row(&mut self, coeffs: Vec<u64>, rhs: u64) {
        assert_eq!(coeffs.len(), self.vars);
        let n = self.modulus;
        self.rows
            .push((coeffs.into_iter().map(|c| c % n).collect(), rhs % n));
    }
}

/// Extended gcd: returns `(g, s, t)` with `s*a + t*b = g`, `g >= 0`.
fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, s, t) = xgcd(b, a % b);
    (g, t, s - (a / b) * t)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mod_inv(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let (g, s, _) = xgcd(a as i64, n as i64);
    debug_assert_eq!(g, 1);
    s.rem_euclid(n as i64) as u64
}

/// Solves the system by gcd-based elimination to echelon form over
/// `Z/modulus`, returning any solution or `None` if inconsistent.
///
/// Row combinations use the unimodular 2x2 transform from the extended
/// gcd. Whenever a pivot row with pivot `d` is extracted, the consequence
/// `(N/gcd(d,N)) * row` joins the remaining rows: it carries exactly the
/// divisibility constraint that makes back-substitution with free
/// variables at zero complete.
pub fn solve_mod_system(sys: &ModSystem) -> Option<Vec<u64>> {
    let n = sys.modulus;
    if n == 1 {
        return Some(vec![0; sys.vars]);
    }
    let ni = n as i64;
    let mut active: Vec<(Vec<u64>, u64)> = sys
        .rows
        .iter()
        .map(|(c, r)| (c.iter().map(|&x| x % n).collect(), r % n))
        .collect();
    let mut pivots: Vec<(usize, (Vec<u64>, u64))> = Vec::new();

    for col in 0..sys.vars {
        let Some(first) = active.iter().position(|r| r.0[col] != 0) else {
            continue;
        };
        let mut base = active.swap_remove(first);
        let mut idx = 0;
        while idx < active.len() {
            if active[idx].0[col] == 0 {
                idx += 1;
                continue;
            }
            let other = active.swap_remove(idx);
            let a = base.0[col] as i64;
            let b = other.0[col] as i64;
            let (g, s, t) = xgcd(a, b);
            let combine = |r1: &(Vec<u64>, u64), c1: i64, r2: &(Vec<u64>, u64), c2: i64| {
                let coeffs: Vec<u64> = r1
                    .0
                    .iter()
                    .zip(&r2.0)
                    .map(|(&x, &y)| (c1 * x as i64 + c2 * y as i64).rem_euclid(ni) as u64)
                    .collect();
                let rhs = (c1 * r1.1 as i64 + c2 * r2.1 as i64).rem_euclid(ni) as u64;
                (coeffs, rhs)
            };
            // The transform [[s, t], [b/g, -a/g]] has determinant -1.
            let new_base = combine(&base, s, &other, t);
            let eliminated = combine(&base, b / g, &other, -(a / g));
            debug_assert_eq!(eliminated.0[col], 0);
            base = new_base;
            active.push(eliminated);
        }
        let d = base.0[col];
        debug_assert!(d != 0);
        let g = gcd(d, n);
        if g > 1 {
            let ann = n / g;
            let coeffs: Vec<u64> = base.0.iter().map(|&c| c * ann % n).collect();
            let rhs = base.1 * ann % n;
            debug_assert_eq!(coeffs[col], 0);
            active.push((coeffs, rhs));
        }
        pivots.push((col, base));
    }

    // Whatever is left has all-zero coefficients; nonzero right-hand
    // sides are contradictions.
    for (coeffs, rhs) in &active {
        debug_assert!(coeffs.iter().all(|&c| c == 0));
        if *rhs != 0 {
            return None;
        }
    }

    let mut x = vec![0u64; sys.vars];
    for (col, (coeffs, rhs)) in pivots.iter().rev() {
        let mut val = *rhs as i64;
        for j in col + 1..sys.vars {
            val -= (coeffs[j] * x[j] % n) as i64;
        }
        let val = val.rem_euclid(ni) as u64;
        let d = coeffs[*col];
        let g = gcd(d, n);
        if val % g != 0 {
            // Unreachable once the annihilator rows checked out, but cheap
            // to keep as a guard.
            return None;
        }
        let ng = n / g;
        x[*col] = (val / g) % ng * mod_inv(d / g % ng, ng) % ng;
    }

    for (coeffs, rhs) in &sys.rows {
        let lhs: u64 = coeffs
            .iter()
            .zip(&x)
            .fold(0, |acc, (&c, &xi)| (acc + c % n * xi) % n);
        if lhs != *rhs % n {
            return None;
        }
    }
    Some(x)
}

/// Rank-1 wildcard decomposition over an arbitrary field. Nonzero fixed
/// cells pin their coordinates to nonzero values; any fixed zero inside
/// the nonzero support box rules a solution out, and otherwise the
/// multiplicative equations become additive over discrete logs modulo
/// `q-1`.
pub fn rank1_wildcard(w: &WildTensor3<'_>) -> Option<(Vec<Elem>, Vec<Elem>, Vec<Elem>)> {
    let f = w.field();
    let (p, q, s) = w.dims();

    let mut set_i = BTreeSet::new();
    let mut set_j = BTreeSet::new();
    let mut set_k = BTreeSet::new();
    for (i, j, k, v) in w.fixed_cells() {
        if v != 0 {
            set_i.insert(i);
            set_j.insert(j);
            set_k.insert(k);
        }
    }
    for (i, j, k, v) in w.fixed_cells() {
        if v == 0 && set_i.contains(&i) && set_j.contains(&j) && set_k.contains(&k) {
            return None;
        }
    }

    let idx_i: Vec<usize> = set_i.iter().copied().collect();
    let idx_j: Vec<usize> = set_j.iter().copied().collect();
    let idx_k: Vec<usize> = set_k.iter().copied().collect();
    let pos = |sorted: &[usize], v: usize| sorted.binary_search(&v).unwrap();

    let vars = idx_i.len() + idx_j.len() + idx_k.len();
    let modulus = (f.q() as u64 - 1).max(1);
    let mut sys = ModSystem::new(modulus, vars);
    for (i, j, k, v) in w.fixed_cells() {
        if v == 0 {
            continue;
        }
        let mut coeffs = vec![0u64; vars];
        coeffs[pos(&idx_i, i)] += 1;
        coeffs[idx_i.len() + pos(&idx_j, j)] += 1;
        coeffs[idx_i.len() + idx_j.len() + pos(&idx_k, k)] += 1;
        sys.push_row(coeffs, f.dlog(v) as u64);
    }
    let exps = solve_mod_system(&sys)?;

    let mut a = vec![0; p];
    let mut b = vec![0; q];
    let mut c = vec![0; s];
    for (t, &i) in idx_i.iter().enumerate() {
        a[i] = f.exp(exps[t]);
    }
    for (t, &j) in idx_j.iter().enumerate() {
        b[j] = f.exp(exps[idx_i.len() + t]);
    }
    for (t, &k) in idx_k.iter().enumerate() {
        c[k] = f.exp(exps[idx_i.len() + idx_j.len() + t]);
    }
    if verify_rank1_tensor(w, &a, &b, &c) {
        Some((a, b, c))
    } else {
        None
    }
}

/// Rank-1 wildcard decomposition of a matrix. After the support check,
/// values propagate along shared rows and columns of the nonzero support
/// by breadth-first search; each connected component is seeded with
/// `a = 1` at its first cell, which is harmless because solutions scale.
pub fn rank1_wildcard_matrix(w: &WildMat<'_>) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let f = w.field();
    let (m, n) = (w.rows(), w.cols());

    let nonzero: Vec<(usize, usize, Elem)> =
        w.fixed_cells().filter(|&(_, _, v)| v != 0).collect();
    let set_i: BTreeSet<usize> = nonzero.iter().map(|&(i, _, _)| i).collect();
    let set_j: BTreeSet<usize> = nonzero.iter().map(|&(_, j, _)| j).collect();
    for (i, j, v) in w.fixed_cells() {
        if v == 0 && set_i.contains(&i) && set_j.contains(&j) {
            return None;
        }
    }

    // Adjacency through per-row and per-column buckets of the nonzero
    // support instead of materialized edges.
    let mut row_bucket: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut col_bucket: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, &(i, j, _)) in nonzero.iter().enumerate() {
        row_bucket[i].push(idx);
        col_bucket[j].push(idx);
    }

    let mut a: Vec<Option<Elem>> = vec![None; m];
    let mut b: Vec<Option<Elem>> = vec![None; n];
    let mut visited = vec![false; nonzero.len()];
    let mut queue = VecDeque::new();

    for start in 0..nonzero.len() {
        if visited[start] {
            continue;
        }
        let (i0, j0, v0) = nonzero[start];
        debug_assert!(a[i0].is_none() && b[j0].is_none());
        a[i0] = Some(1);
        b[j0] = Some(v0);
        visited[start] = true;
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            let (i, j, _) = nonzero[cur];
            let ai = a[i].expect("assigned before visit");
            let bj = b[j].expect("assigned before visit");
            for &nb in row_bucket[i].iter().chain(&col_bucket[j]) {
                let (ni, nj, nv) = nonzero[nb];
                let (want_a, want_b) = if ni == i {
                    (ai, f.div(nv, ai))
                } else {
                    (f.div(nv, bj), bj)
                };
                match a[ni] {
                    None => a[ni] = Some(want_a),
                    Some(cur_a) if cur_a != want_a => return None,
                    Some(_) => {}
                }
                match b[nj] {
                    None => b[nj] = Some(want_b),
                    Some(cur_b) if cur_b != want_b => return None,
                    Some(_) => {}
                }
                if !visited[nb] {
                    visited[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
    }

    let a: Vec<Elem> = a.into_iter().map(|v| v.unwrap_or(0)).collect();
    let b: Vec<Elem> = b.into_iter().map(|v| v.unwrap_or(0)).collect();
    if verify_rank1_matrix(w, &a, &b) {
        Some((a, b))
    } else {
        None
    }
}
