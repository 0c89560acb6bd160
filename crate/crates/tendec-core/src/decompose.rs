//! Decides and constructs rank-R decompositions (`R <= 4`) of a 3D tensor,
//! or reports that none exists.
//!
//! The search fixes the first factor in the coordinates of a basis of the
//! tensor slices, which turns the rest of the problem into a linear system
//! over rank-at-most-1 matrix unknowns. That system is row reduced, split
//! into independent components, and dispatched to one of three case
//! solvers depending on how the components share variables.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{Elem, FieldSpec};
use crate::matrix::{Mat, Odometer};
use crate::tensor::{rank1_split, Decomposition, Tensor3};

/// A rank-at-most-1 matrix as a `(column, row)` vector pair.
pub type Rank1Pair = (Vec<Elem>, Vec<Elem>);

/// Cap on the number of enumeration steps a [`decompose`] call may spend.
/// Exhausting it is a distinct outcome, never reported as "no solution".
#[derive(Debug, Clone)]
pub struct Budget {
    remaining: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget { remaining: None }
    }

    pub fn limited(steps: u64) -> Budget {
        Budget { remaining: Some(steps) }
    }

    pub fn spend(&mut self, steps: u64) -> Result<(), BudgetExhausted> {
        match &mut self.remaining {
            None => Ok(()),
            Some(rem) => {
                if *rem < steps {
                    Err(BudgetExhausted)
                } else {
                    *rem -= steps;
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExhausted;

impl fmt::Display for BudgetExhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "enumeration budget exhausted")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecomposeOutcome<'f> {
    Found(Decomposition<'f>),
    NoSolution,
    BudgetExhausted,
}

impl<'f> DecomposeOutcome<'f> {
    pub fn found(self) -> Option<Decomposition<'f>> {
        match self {
            DecomposeOutcome::Found(d) => Some(d),
            _ => None,
        }
    }

    pub fn exists(&self) -> bool {
        matches!(self, DecomposeOutcome::Found(_))
    }
}

/// The row-reduced linear system over rank-at-most-1 matrix unknowns:
/// coefficient rows `e`, right-hand-side matrices `d`, and per-row sets of
/// variable indices with nonzero coefficients.
#[derive(Debug, Clone)]
pub struct ReducedSystem<'f> {
    pub e: Mat<'f>,
    pub d: Vec<Mat<'f>>,
    pub supports: Vec<BTreeSet<usize>>,
}

impl<'f> ReducedSystem<'f> {
    pub fn new(e: Mat<'f>, d: Vec<Mat<'f>>) -> ReducedSystem<'f> {
        assert_eq!(e.rows(), d.len());
        let supports: Vec<BTreeSet<usize>> = (0..e.rows())
            .map(|i| (0..e.cols()).filter(|&r| e[(i, r)] != 0).collect())
            .collect();
        assert!(supports.iter().all(|s| !s.is_empty()), "zero coefficient row");
        ReducedSystem { e, d, supports }
    }

    /// Sorted `(variable, coefficient)` pairs of one row.
    fn row_coeffs(&self, i: usize) -> Vec<(usize, Elem)> {
        self.supports[i].iter().map(|&r| (r, self.e[(i, r)])).collect()
    }
}

/// A group of rows whose supports are connected, together with the union
/// of their variable indices. Distinct components have disjoint column
/// sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: BTreeSet<usize>,
}

/// Partitions rows into connected groups under shared variable support.
pub fn separate_components(supports: &[BTreeSet<usize>]) -> Vec<Component> {
    let n = supports.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut rows = vec![start];
        let mut cols = supports[start].clone();
        seen[start] = true;
        loop {
            let mut grew = false;
            for i in 0..n {
                if !seen[i] && !supports[i].is_disjoint(&cols) {
                    seen[i] = true;
                    rows.push(i);
                    cols.extend(supports[i].iter().copied());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        rows.sort_unstable();
        out.push(Component { rows, cols });
    }
    out
}

/// The component shapes the case solvers understand. For `R <= 4` every
/// connected component of a row-reduced coefficient matrix matches one of
/// these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseTag {
    SingleRow,
    CommonColumn(usize),
    TwoCommonColumns { w: Elem, x: Elem, y: Elem, z: Elem },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnexpectedForm {
    pub rows: Vec<usize>,
}

impl fmt::Display for UnexpectedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "component rows {:?} match no known coefficient form", self.rows)
    }
}

/// Classifies one component (rows of the coefficient matrix `e`, with
/// their precomputed supports) by how its rows share variables.
pub fn classify_component(
    e: &Mat<'_>,
    supports: &[BTreeSet<usize>],
    rows: &[usize],
) -> Result<CaseTag, UnexpectedForm> {
    if rows.len() == 1 {
        return Ok(CaseTag::SingleRow);
    }
    let unexpected = || UnexpectedForm { rows: rows.to_vec() };

    let mut common: Option<BTreeSet<usize>> = None;
    let mut uniform = true;
    for (a, &i) in rows.iter().enumerate() {
        for &i2 in &rows[a + 1..] {
            let inter: BTreeSet<usize> =
                supports[i].intersection(&supports[i2]).copied().collect();
            match &common {
                None => common = Some(inter),
                Some(c) => {
                    if *c != inter {
                        uniform = false;
                    }
                }
            }
        }
    }
    let common = common.expect("component has at least two rows");
    if uniform && common.len() == 1 {
        return Ok(CaseTag::CommonColumn(*common.iter().next().unwrap()));
    }
    if rows.len() == 2 && common.len() == 2 {
        let (i0, i1) = (rows[0], rows[1]);
        if supports[i0].len() != 3 || supports[i1].len() != 3 {
            return Err(unexpected());
        }
        // Each row's private variable must carry coefficient 1; it is the
        // row's leading entry in the systems the pipeline builds.
        for &i in &[i0, i1] {
            let private: Vec<usize> = supports[i].difference(&common).copied().collect();
            if private.len() != 1 || e[(i, private[0])] != 1 {
                return Err(unexpected());
            }
        }
        let mut shared = common.iter().copied();
        let ra = shared.next().unwrap();
        let rb = shared.next().unwrap();
        return Ok(CaseTag::TwoCommonColumns {
            w: e[(i0, ra)],
            x: e[(i0, rb)],
            y: e[(i1, ra)],
            z: e[(i1, rb)],
        });
    }
    Err(unexpected())
}

fn scale_pair(field: &FieldSpec, pair: &Rank1Pair, s: Elem) -> Rank1Pair {
    (
        pair.0.iter().map(|&u| field.mul(u, s)).collect(),
        pair.1.clone(),
    )
}

fn pair_matrix<'f>(field: &'f FieldSpec, pair: &Rank1Pair) -> Mat<'f> {
    Mat::outer(field, &pair.0, &pair.1)
}

/// Solves one equation `d = sum_r coeff_r M_r` over rank-at-most-1
/// unknowns. A solution exists iff `rank(d) <= |coeffs|`; the first
/// `rank(d)` variables receive scaled rank-1 summands and the rest are
/// zero.
pub fn solve_single_row<'f>(
    field: &'f FieldSpec,
    coeffs: &[(usize, Elem)],
    d: &Mat<'f>,
) -> Option<Vec<(usize, Rank1Pair)>> {
    let (c, f) = d.rank_factorize_bounded(coeffs.len())?;
    let rank = c.cols();
    let mut out = Vec::with_capacity(coeffs.len());
    for (idx, &(var, coeff)) in coeffs.iter().enumerate() {
        if idx < rank {
            let inv = field.inv(coeff);
            let u: Vec<Elem> = c.col(idx).iter().map(|&e| field.mul(e, inv)).collect();
            out.push((var, (u, f.row(idx).to_vec())));
        } else {
            out.push((var, (vec![0; d.rows()], vec![0; d.cols()])));
        }
    }
    Some(out)
}

/// Solves a system whose rows pairwise share exactly the variable
/// `r_star`. If some row is tight (`rank(d_i) = |S_i|`), its full-rank
/// factorizations pin the shared variable and the other rows reduce to
/// single-row solves on residuals; otherwise the shared variable is forced
/// to zero and the rows are solved independently.
pub fn solve_common_column<'f>(
    sys: &ReducedSystem<'f>,
    r_star: usize,
    budget: &mut Budget,
) -> Result<Option<Vec<(usize, Rank1Pair)>>, BudgetExhausted> {
    let field = sys.e.field();
    let nrows = sys.e.rows();
    let mut ranks = Vec::with_capacity(nrows);
    for i in 0..nrows {
        match sys.d[i].rank_factorize_bounded(sys.supports[i].len()) {
            Some((c, _)) => ranks.push(c.cols()),
            // Rank precondition fails.
            None => return Ok(None),
        }
    }

    let tight = (0..nrows).find(|&i| ranks[i] == sys.supports[i].len());
    let Some(ti) = tight else {
        // No tight row: force the shared variable to zero and solve each
        // row independently over its private variables.
        let mut out = Vec::new();
        let (dr, dc) = (sys.d[0].rows(), sys.d[0].cols());
        out.push((r_star, (vec![0; dr], vec![0; dc])));
        for i in 0..nrows {
            let coeffs: Vec<(usize, Elem)> = sys
                .row_coeffs(i)
                .into_iter()
                .filter(|&(v, _)| v != r_star)
                .collect();
            match solve_single_row(field, &coeffs, &sys.d[i]) {
                Some(parts) => out.extend(parts),
                None => return Ok(None),
            }
        }
        return Ok(Some(out));
    };

    let coeffs = sys.row_coeffs(ti);
    let pos_star = coeffs
        .iter()
        .position(|&(v, _)| v == r_star)
        .expect("shared variable present in every row");
    for (c, f) in sys.d[ti].enumerate_full_rank_factorizations() {
        budget.spend(1)?;
        let mut out: Vec<(usize, Rank1Pair)> = Vec::new();
        for (idx, &(var, coeff)) in coeffs.iter().enumerate() {
            let inv = field.inv(coeff);
            let u: Vec<Elem> = c.col(idx).iter().map(|&e| field.mul(e, inv)).collect();
            out.push((var, (u, f.row(idx).to_vec())));
        }
        let m_star = pair_matrix(field, &out[pos_star].1);
        let mut ok = true;
        for i2 in 0..nrows {
            if i2 == ti {
                continue;
            }
            let mut res = sys.d[i2].clone();
            res.add_scaled_assign(&m_star, field.neg(sys.e[(i2, r_star)]));
            let rem: Vec<(usize, Elem)> = sys
                .row_coeffs(i2)
                .into_iter()
                .filter(|&(v, _)| v != r_star)
                .collect();
            match solve_single_row(field, &rem, &res) {
                Some(parts) => out.extend(parts),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// Solves the two-equation system
/// `d0 = M0 + w M2 + x M3`, `d1 = M1 + y M2 + z M3`
/// over rank-at-most-1 unknowns, with `w, x, y, z` all nonzero.
pub fn solve_two_common_columns<'f>(
    d0: &Mat<'f>,
    d1: &Mat<'f>,
    w: Elem,
    x: Elem,
    y: Elem,
    z: Elem,
    budget: &mut Budget,
) -> Result<Option<[Rank1Pair; 4]>, BudgetExhausted> {
    let field = d0.field();
    assert!(w != 0 && x != 0 && y != 0 && z != 0);
    // Rescale variables and the second equation so the system becomes
    // d0 = N0 + N2 + N3 and d1n = N1 + N2 + zn N3, where
    // N0 = M0, N1 = M1 / y', N2 = w M2, N3 = x M3, y' = y / w.
    let y_prime = field.div(y, w);
    let zn = field.div(field.mul(z, w), field.mul(x, y));
    let d1n = d1.scale(field.inv(y_prime));
    let Some([n0, n1, n2, n3]) = solve_normalized(d0, &d1n, zn, budget)? else {
        return Ok(None);
    };
    Ok(Some([
        n0,
        scale_pair(field, &n1, y_prime),
        scale_pair(field, &n2, field.inv(w)),
        scale_pair(field, &n3, field.inv(x)),
    ]))
}

/// The normalized system `d0 = N0 + N2 + N3`, `d1 = N1 + N2 + z N3` with
/// `z` nonzero.
fn solve_normalized<'f>(
    d0: &Mat<'f>,
    d1: &Mat<'f>,
    z: Elem,
    budget: &mut Budget,
) -> Result<Option<[Rank1Pair; 4]>, BudgetExhausted> {
    let field = d0.field();
    debug_assert!(z != 0);

    if z == 1 {
        // Subtracting the equations leaves rows sharing one common
        // column: d0 - d1 = N0 - N1, d1 = N1 + N2 + N3.
        let d_star = d0.sub(d1);
        if d_star.rank_factorize_bounded(2).is_none() || d1.rank_factorize_bounded(3).is_none() {
            return Ok(None);
        }
        let e = Mat::from_rows(field, &[&[1, field.neg(1), 0, 0], &[0, 1, 1, 1]]);
        let sys = ReducedSystem::new(e, vec![d_star, d1.clone()]);
        let Some(parts) = solve_common_column(&sys, 1, budget)? else {
            return Ok(None);
        };
        let mut out: [Option<Rank1Pair>; 4] = [None, None, None, None];
        for (var, pair) in parts {
            out[var] = Some(pair);
        }
        return Ok(Some(out.map(|p| p.expect("all four variables assigned"))));
    }

    let zero_pair = |m: &Mat| (vec![0; m.rows()], vec![0; m.cols()]);
    let rank_at_most =
        |m: &Mat<'f>, cap: usize| -> Option<usize> { m.rank_factorize_bounded(cap).map(|(c, _)| c.cols()) };
    let Some(r0) = rank_at_most(d0, 3) else { return Ok(None) };
    let Some(r1) = rank_at_most(d1, 3) else { return Ok(None) };

    if r0 == 3 {
        // A tight first equation: its full-rank factorizations fix
        // (N0, N2, N3); the second equation then needs a rank-1 residual.
        for (c, f) in d0.enumerate_full_rank_factorizations() {
            budget.spend(1)?;
            let n0 = (c.col(0), f.row(0).to_vec());
            let n2 = (c.col(1), f.row(1).to_vec());
            let n3 = (c.col(2), f.row(2).to_vec());
            let mut res = d1.clone();
            res.add_scaled_assign(&pair_matrix(field, &n2), field.neg(1));
            res.add_scaled_assign(&pair_matrix(field, &n3), field.neg(z));
            if let Some(n1) = rank1_split(&res) {
                return Ok(Some([n0, n1, n2, n3]));
            }
        }
        return Ok(None);
    }
    if r1 == 3 {
        let z_inv = field.inv(z);
        for (c, f) in d1.enumerate_full_rank_factorizations() {
            budget.spend(1)?;
            let n1 = (c.col(0), f.row(0).to_vec());
            let n2 = (c.col(1), f.row(1).to_vec());
            let n3 = scale_pair(field, &(c.col(2), f.row(2).to_vec()), z_inv);
            let mut res = d0.clone();
            res.add_scaled_assign(&pair_matrix(field, &n2), field.neg(1));
            res.add_scaled_assign(&pair_matrix(field, &n3), field.neg(1));
            if let Some(n0) = rank1_split(&res) {
                return Ok(Some([n0, n1, n2, n3]));
            }
        }
        return Ok(None);
    }

    // Both ranks at most 2 now; either rank <= 1 admits a closed form.
    let two_terms = |m: &Mat<'f>| -> (Rank1Pair, Rank1Pair) {
        let (c, f) = m.rank_factorize_bounded(2).expect("rank at most 2 here");
        let term = |idx: usize| {
            if idx < c.cols() {
                (c.col(idx), f.row(idx).to_vec())
            } else {
                zero_pair(m)
            }
        };
        (term(0), term(1))
    };
    if r0 <= 1 {
        // N0 = d0 forces N2 + N3 = O, and the second equation leaves
        // (z - 1) N3 equal to the leftover rank-1 term of d1.
        let n0 = rank1_split(d0).expect("rank at most 1");
        let (t0, t1) = two_terms(d1);
        let n1 = t0;
        let n3 = scale_pair(field, &t1, field.inv(field.sub(z, 1)));
        let n2 = scale_pair(field, &n3, field.neg(1));
        return Ok(Some([n0, n1, n2, n3]));
    }
    if r1 <= 1 {
        let n1 = rank1_split(d1).expect("rank at most 1");
        let (t0, t1) = two_terms(d0);
        let n0 = t0;
        let n3 = scale_pair(field, &t1, field.neg(field.inv(field.sub(z, 1))));
        let n2 = scale_pair(field, &n3, field.neg(z));
        return Ok(Some([n0, n1, n2, n3]));
    }

    solve_rank2_rank2(d0, d1, z, budget)
}

/// The remaining case of the normalized system: both right-hand sides have
/// rank exactly 2. Writing `N_i = u_i v_i`, the equations become
/// `d0 = [u0|u2|u3] [v0;v2;v3]` and `d1 = [u1|u2|u3] [v1;v2;z v3]`, and in
/// any solution each factor triple has rank 2 on at least one side, so the
/// four side combinations are enumerated through bounded candidate
/// factors.
fn solve_rank2_rank2<'f>(
    d0: &Mat<'f>,
    d1: &Mat<'f>,
    z: Elem,
    budget: &mut Budget,
) -> Result<Option<[Rank1Pair; 4]>, BudgetExhausted> {
    let field = d0.field();
    let n = d0.rows();
    let s = d0.cols();

    let collect_left = |d: &Mat<'f>, budget: &mut Budget| -> Result<Vec<Mat<'f>>, BudgetExhausted> {
        let mut out = Vec::new();
        for m in d.candidate_left_factors(3) {
            budget.spend(1)?;
            out.push(m);
        }
        Ok(out)
    };
    let collect_right = |d: &Mat<'f>, budget: &mut Budget| -> Result<Vec<Mat<'f>>, BudgetExhausted> {
        let mut out = Vec::new();
        for m in d.candidate_right_factors(3) {
            budget.spend(1)?;
            out.push(m);
        }
        Ok(out)
    };

    // rank(U0) = rank(U1) = 2: shared columns u2, u3 must agree, then the
    // stacked system solves for the rows v.
    let lu0 = collect_left(d0, budget)?;
    let lu1 = collect_left(d1, budget)?;
    for u0m in &lu0 {
        for u1m in &lu1 {
            budget.spend(1)?;
            if (0..n).any(|i| u0m[(i, 1)] != u1m[(i, 1)] || u0m[(i, 2)] != u1m[(i, 2)]) {
                continue;
            }
            let mut w = Mat::zeros(field, 2 * n, 4);
            let mut rhs = Mat::zeros(field, 2 * n, s);
            for i in 0..n {
                w[(i, 0)] = u0m[(i, 0)];
                w[(i, 2)] = u0m[(i, 1)];
                w[(i, 3)] = u0m[(i, 2)];
                w[(n + i, 1)] = u1m[(i, 0)];
                w[(n + i, 2)] = u0m[(i, 1)];
                w[(n + i, 3)] = field.mul(z, u0m[(i, 2)]);
                for j in 0..s {
                    rhs[(i, j)] = d0[(i, j)];
                    rhs[(n + i, j)] = d1[(i, j)];
                }
            }
            if let Some(v) = w.solve_linear(&rhs) {
                return Ok(Some([
                    (u0m.col(0), v.row(0).to_vec()),
                    (u1m.col(0), v.row(1).to_vec()),
                    (u0m.col(1), v.row(2).to_vec()),
                    (u0m.col(2), v.row(3).to_vec()),
                ]));
            }
        }
    }

    // rank(V0) = rank(V1) = 2: candidate rows are (v0, v2, v3) for d0 and
    // (v1, v2, z v3) for d1; agreement on the shared rows, then solve for
    // the columns u. This side relies on z being nonzero.
    let lv0 = collect_right(d0, budget)?;
    let lv1 = collect_right(d1, budget)?;
    for v0m in &lv0 {
        for v1m in &lv1 {
            budget.spend(1)?;
            if (0..s)
                .any(|j| v1m[(1, j)] != v0m[(1, j)] || v1m[(2, j)] != field.mul(z, v0m[(2, j)]))
            {
                continue;
            }
            let mut vstk = Mat::zeros(field, 4, 2 * s);
            let mut rhs = Mat::zeros(field, n, 2 * s);
            for j in 0..s {
                vstk[(0, j)] = v0m[(0, j)];
                vstk[(1, s + j)] = v1m[(0, j)];
                vstk[(2, j)] = v0m[(1, j)];
                vstk[(2, s + j)] = v0m[(1, j)];
                vstk[(3, j)] = v0m[(2, j)];
                vstk[(3, s + j)] = field.mul(z, v0m[(2, j)]);
                for i in 0..n {
                    rhs[(i, j)] = d0[(i, j)];
                    rhs[(i, s + j)] = d1[(i, j)];
                }
            }
            if let Some(u) = vstk.solve_linear_left(&rhs) {
                return Ok(Some([
                    (u.col(0), v0m.row(0).to_vec()),
                    (u.col(1), v1m.row(0).to_vec()),
                    (u.col(2), v0m.row(1).to_vec()),
                    (u.col(3), v0m.row(2).to_vec()),
                ]));
            }
        }
    }

    let z_inv = field.inv(z);

    // rank(U0) = 2 and rank(V1) = 2: everything but v0 and u1 is fixed.
    for u0m in &lu0 {
        for v1m in &lv1 {
            budget.spend(1)?;
            let u2 = u0m.col(1);
            let u3 = u0m.col(2);
            let v2 = v1m.row(1).to_vec();
            let v3: Vec<Elem> = v1m.row(2).iter().map(|&e| field.mul(e, z_inv)).collect();
            let mut res0 = d0.clone();
            res0.add_scaled_assign(&Mat::outer(field, &u2, &v2), field.neg(1));
            res0.add_scaled_assign(&Mat::outer(field, &u3, &v3), field.neg(1));
            let u0 = Mat::new(field, n, 1, u0m.col(0));
            let Some(v0) = u0.solve_linear(&res0) else { continue };
            let mut res1 = d1.clone();
            res1.add_scaled_assign(&Mat::outer(field, &u2, &v2), field.neg(1));
            res1.add_scaled_assign(&Mat::outer(field, &u3, &v3), field.neg(z));
            let v1 = Mat::new(field, 1, s, v1m.row(0).to_vec());
            let Some(u1) = v1.solve_linear_left(&res1) else { continue };
            return Ok(Some([
                (u0.col(0), v0.row(0).to_vec()),
                (u1.col(0), v1.row(0).to_vec()),
                (u2, v2),
                (u3, v3),
            ]));
        }
    }

    // rank(U1) = 2 and rank(V0) = 2.
    for u1m in &lu1 {
        for v0m in &lv0 {
            budget.spend(1)?;
            let u2 = u1m.col(1);
            let u3 = u1m.col(2);
            let v2 = v0m.row(1).to_vec();
            let v3 = v0m.row(2).to_vec();
            let mut res0 = d0.clone();
            res0.add_scaled_assign(&Mat::outer(field, &u2, &v2), field.neg(1));
            res0.add_scaled_assign(&Mat::outer(field, &u3, &v3), field.neg(1));
            let v0 = Mat::new(field, 1, s, v0m.row(0).to_vec());
            let Some(u0) = v0.solve_linear_left(&res0) else { continue };
            let mut res1 = d1.clone();
            res1.add_scaled_assign(&Mat::outer(field, &u2, &v2), field.neg(1));
            res1.add_scaled_assign(&Mat::outer(field, &u3, &v3), field.neg(z));
            let u1 = Mat::new(field, n, 1, u1m.col(0));
            let Some(v1) = u1.solve_linear(&res1) else { continue };
            return Ok(Some([
                (u0.col(0), v0.row(0).to_vec()),
                (u1.col(0), v1.row(0).to_vec()),
                (u2, v2),
                (u3, v3),
            ]));
        }
    }

    Ok(None)
}

/// Memo for rank-1 splits of coefficient combinations of the slice basis,
/// keyed by the coefficient vector. Only engaged when the key space is
/// small.
struct ComboMemo {
    qpow: Vec<u64>,
    table: Vec<Option<Option<Rank1Pair>>>,
}

const MEMO_LIMIT: u64 = 4096;

impl ComboMemo {
    fn new(q: u32, j: usize) -> ComboMemo {
        let mut qpow = Vec::with_capacity(j);
        let mut acc: u64 = 1;
        let mut fits = true;
        for _ in 0..j {
            qpow.push(acc);
            acc = acc.saturating_mul(q as u64);
            if acc > MEMO_LIMIT {
                fits = false;
            }
        }
        ComboMemo {
            qpow,
            table: if fits { vec![None; acc as usize] } else { Vec::new() },
        }
    }

    fn key(&self, coeffs: &[Elem]) -> usize {
        coeffs
            .iter()
            .zip(&self.qpow)
            .map(|(&c, &p)| c as u64 * p)
            .sum::<u64>() as usize
    }

    /// Computes (once) whether this combination splits, without cloning
    /// the split itself.
    fn splits<'f>(&mut self, coeffs: &[Elem], basis: &[Mat<'f>]) -> bool {
        if self.table.is_empty() {
            return rank1_split(&combo(coeffs, basis)).is_some();
        }
        let key = self.key(coeffs);
        let slot = &mut self.table[key];
        if slot.is_none() {
            *slot = Some(rank1_split(&combo(coeffs, basis)));
        }
        slot.as_ref().unwrap().is_some()
    }

    fn rank1_combo<'f>(&mut self, coeffs: &[Elem], basis: &[Mat<'f>]) -> Option<Rank1Pair> {
        if self.table.is_empty() {
            return rank1_split(&combo(coeffs, basis));
        }
        let key = self.key(coeffs);
        let slot = &mut self.table[key];
        if slot.is_none() {
            *slot = Some(rank1_split(&combo(coeffs, basis)));
        }
        slot.as_ref().unwrap().clone()
    }
}

/// `sum_k coeffs[k] * basis[k]`.
fn combo<'f>(coeffs: &[Elem], basis: &[Mat<'f>]) -> Mat<'f> {
    let mut m = Mat::zeros(basis[0].field(), basis[0].rows(), basis[0].cols());
    for (b, &c) in basis.iter().zip(coeffs) {
        m.add_scaled_assign(b, c);
    }
    m
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Deterministic walk over all `q^len` digit vectors. When the space fits
/// in a `u64` counter, candidates follow a fixed multiplicative shuffle of
/// the plain counter: the solutions of structured instances cluster badly
/// in lexicographic order (they share scaled rows, so the leading digits
/// concentrate on a handful of values), and the shuffle restores the
/// expected space-size/solution-count hit position.
enum CandidateOrder {
    Shuffled {
        total: u64,
        mult: u64,
        next: u64,
        q: u32,
        digits: Vec<Elem>,
    },
    Lex(Odometer),
}

impl CandidateOrder {
    fn new(len: usize, q: u32) -> CandidateOrder {
        let mut total: u64 = 1;
        for _ in 0..len {
            match total.checked_mul(q as u64) {
                Some(t) => total = t,
                None => return CandidateOrder::Lex(Odometer::new(len, q)),
            }
        }
        // A multiplier near the golden ratio of the period, made coprime.
        let mut mult = ((total as f64 * 0.618_033_988_749_894_9) as u64).max(1);
        while gcd_u64(mult, total) != 1 {
            mult += 1;
        }
        CandidateOrder::Shuffled { total, mult, next: 0, q, digits: vec![0; len] }
    }

    fn next_state(&mut self) -> Option<&[Elem]> {
        match self {
            CandidateOrder::Lex(odo) => odo.next_state(),
            CandidateOrder::Shuffled { total, mult, next, q, digits } => {
                if *next == *total {
                    return None;
                }
                let mut x = ((*next as u128 * *mult as u128) % *total as u128) as u64;
                *next += 1;
                for d in digits.iter_mut().rev() {
                    *d = (x % *q as u64) as Elem;
                    x /= *q as u64;
                }
                Some(digits)
            }
        }
    }
}

/// Searches for a rank-`r` decomposition of `t` (`r <= 4`). Returns the
/// first solution in the deterministic enumeration order, proves that none
/// exists, or reports budget exhaustion.
pub fn decompose<'f>(t: &Tensor3<'f>, r: usize, budget: &mut Budget) -> DecomposeOutcome<'f> {
    assert!(r <= 4, "only ranks up to 4 are supported");
    let field = t.field();
    let dims = t.dims();
    let (_, q, s) = dims;

    // A rank-r decomposition confines all slices to an r-dimensional
    // space, so more than r independent slices is an immediate no.
    let tilde = t.flatten_slices();
    let Some((cmat, fmat)) = tilde.rank_factorize_bounded(r) else {
        return DecomposeOutcome::NoSolution;
    };
    let j = cmat.cols();
    if j == 0 {
        return DecomposeOutcome::Found(Decomposition::zero(field, r, dims));
    }
    let basis: Vec<Mat<'f>> = (0..j)
        .map(|i| Mat::new(field, q, s, fmat.row(i).to_vec()))
        .collect();

    let mut memo = ComboMemo::new(field.q(), j);
    let mut order = CandidateOrder::new(r * j, field.q());
    while let Some(digits) = order.next_state() {
        if budget.spend(1).is_err() {
            return DecomposeOutcome::BudgetExhausted;
        }
        match try_candidate(field, r, j, digits, &basis, &mut memo, budget) {
            Err(BudgetExhausted) => return DecomposeOutcome::BudgetExhausted,
            Ok(None) => continue,
            Ok(Some(assign)) => {
                let dec = assemble(field, dims, r, j, digits, &cmat, assign);
                debug_assert_eq!(dec.eval(), *t);
                return DecomposeOutcome::Found(dec);
            }
        }
    }
    DecomposeOutcome::NoSolution
}

/// Tries one first-factor candidate (given as `r*j` row-major digits); on
/// success returns the rank-1 assignment for all `r` variables.
fn try_candidate<'f>(
    field: &'f FieldSpec,
    r: usize,
    j: usize,
    aprime: &[Elem],
    basis: &[Mat<'f>],
    memo: &mut ComboMemo,
    budget: &mut Budget,
) -> Result<Option<Vec<Option<Rank1Pair>>>, BudgetExhausted> {
    // Row reduce the transposed candidate: f_trans * A'^T = e.
    let mut at = Mat::zeros(field, j, r);
    for rr in 0..r {
        for jj in 0..j {
            at[(jj, rr)] = aprime[rr * j + jj];
        }
    }
    let (e, f_trans) = at.rref_with_transform();
    // A zero row of e pairs with an invertible-transform combination of
    // the independent basis slices, which cannot vanish; such candidates
    // have no solution.
    if e.row(j - 1).iter().all(|&x| x == 0) {
        return Ok(None);
    }

    // Fast path for the dominant shape: every row constrains a single
    // variable, so each is an independent rank-1 condition on a basis
    // combination. Reject without allocating; clone the splits only once
    // all rows pass.
    let all_singleton = (0..j).all(|i| e.row(i).iter().filter(|&&v| v != 0).count() == 1);
    if all_singleton {
        for i in 0..j {
            if !memo.splits(f_trans.row(i), basis) {
                return Ok(None);
            }
        }
        let mut assign: Vec<Option<Rank1Pair>> = vec![None; r];
        for i in 0..j {
            let var = e.row(i).iter().position(|&v| v != 0).unwrap();
            let pair = memo
                .rank1_combo(f_trans.row(i), basis)
                .expect("existence checked above");
            let coeff = e[(i, var)];
            assign[var] = Some(if coeff == 1 {
                pair
            } else {
                scale_pair(field, &pair, field.inv(coeff))
            });
        }
        return Ok(Some(assign));
    }

    let supports: Vec<BTreeSet<usize>> = (0..j)
        .map(|i| (0..r).filter(|&v| e[(i, v)] != 0).collect())
        .collect();
    let comps = separate_components(&supports);

    let mut assign: Vec<Option<Rank1Pair>> = vec![None; r];
    let mut d_cache: Vec<Option<Mat<'f>>> = vec![None; j];

    for comp in &comps {
        let tag = classify_component(&e, &supports, &comp.rows)
            .expect("component forms are exhaustive for rank <= 4");
        match tag {
            CaseTag::SingleRow => {
                let row = comp.rows[0];
                if supports[row].len() == 1 {
                    let var = *supports[row].iter().next().unwrap();
                    match memo.rank1_combo(f_trans.row(row), basis) {
                        None => return Ok(None),
                        Some(pair) => {
                            let coeff = e[(row, var)];
                            assign[var] = Some(scale_pair(field, &pair, field.inv(coeff)));
                        }
                    }
                } else {
                    let d = d_for(row, &f_trans, basis, &mut d_cache);
                    let coeffs: Vec<(usize, Elem)> =
                        supports[row].iter().map(|&v| (v, e[(row, v)])).collect();
                    match solve_single_row(field, &coeffs, &d) {
                        None => return Ok(None),
                        Some(parts) => {
                            for (var, pair) in parts {
                                assign[var] = Some(pair);
                            }
                        }
                    }
                }
            }
            CaseTag::CommonColumn(r_star) => {
                let e_rows: Vec<&[Elem]> = comp.rows.iter().map(|&i| e.row(i)).collect();
                let e_sub = Mat::from_rows(field, &e_rows);
                let d_sub: Vec<Mat<'f>> = comp
                    .rows
                    .iter()
                    .map(|&i| d_for(i, &f_trans, basis, &mut d_cache))
                    .collect();
                let sub = ReducedSystem::new(e_sub, d_sub);
                match solve_common_column(&sub, r_star, budget)? {
                    None => return Ok(None),
                    Some(parts) => {
                        for (var, pair) in parts {
                            assign[var] = Some(pair);
                        }
                    }
                }
            }
            CaseTag::TwoCommonColumns { w, x, y, z } => {
                let (i0, i1) = (comp.rows[0], comp.rows[1]);
                let shared: Vec<usize> =
                    supports[i0].intersection(&supports[i1]).copied().collect();
                let m0_var = *supports[i0].iter().find(|v| !shared.contains(v)).unwrap();
                let m1_var = *supports[i1].iter().find(|v| !shared.contains(v)).unwrap();
                let d0 = d_for(i0, &f_trans, basis, &mut d_cache);
                let d1 = d_for(i1, &f_trans, basis, &mut d_cache);
                match solve_two_common_columns(&d0, &d1, w, x, y, z, budget)? {
                    None => return Ok(None),
                    Some([m0, m1, m2, m3]) => {
                        assign[m0_var] = Some(m0);
                        assign[m1_var] = Some(m1);
                        assign[shared[0]] = Some(m2);
                        assign[shared[1]] = Some(m3);
                    }
                }
            }
        }
    }
    Ok(Some(assign))
}

fn d_for<'f>(
    i: usize,
    f_trans: &Mat<'f>,
    basis: &[Mat<'f>],
    cache: &mut Vec<Option<Mat<'f>>>,
) -> Mat<'f> {
    cache[i]
        .get_or_insert_with(|| combo(f_trans.row(i), basis))
        .clone()
}

fn assemble<'f>(
    field: &'f FieldSpec,
    dims: (usize, usize, usize),
    r: usize,
    j: usize,
    aprime: &[Elem],
    cmat: &Mat<'f>,
    assign: Vec<Option<Rank1Pair>>,
) -> Decomposition<'f> {
    let (p, q, s) = dims;
    let mut b = Mat::zeros(field, r, q);
    let mut c = Mat::zeros(field, r, s);
    for (var, pair) in assign.iter().enumerate() {
        if let Some((u, v)) = pair {
            for (jj, &e) in u.iter().enumerate() {
                b[(var, jj)] = e;
            }
            for (kk, &e) in v.iter().enumerate() {
                c[(var, kk)] = e;
            }
        }
    }
    // Transport the candidate first factor from slice-basis coordinates
    // back to tensor coordinates.
    let mut a = Mat::zeros(field, r, p);
    for rr in 0..r {
        for i in 0..p {
            let mut acc = 0;
            for jj in 0..j {
                acc = field.add(acc, field.mul(cmat[(i, jj)], aprime[rr * j + jj]));
            }
            a[(rr, i)] = acc;
        }
    }
    Decomposition::new(a, b, c)
}
