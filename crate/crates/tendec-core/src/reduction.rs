//! The NAE-3SAT to rank-2-wildcard reduction over `GF(2)`: gadget tensor
//! construction, assignment embedding and extraction, and a brute-force
//! satisfiability reference.
//!
//! Each variable contributes a 2x2x2 diagonal block whose only rank-2
//! decompositions encode a boolean and its negation; a clause pins one
//! extra cell to 0, which holds exactly when the three literals are not
//! all equal.

use alloc::vec::Vec;

use crate::field::FieldSpec;
use crate::matrix::Mat;
use crate::tensor::Decomposition;
use crate::wildcard::{Cell, WildTensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Literal {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Literal {
        Literal { var, negated: true }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nae3SatInstance {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl Nae3SatInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Nae3SatInstance {
        assert!(clauses
            .iter()
            .all(|c| c.iter().all(|l| l.var < num_vars)));
        Nae3SatInstance { num_vars, clauses }
    }
}

/// True iff each clause's three literal values are not all equal.
pub fn verify_nae(inst: &Nae3SatInstance, assignment: &[bool]) -> bool {
    assert_eq!(assignment.len(), inst.num_vars);
    inst.clauses.iter().all(|clause| {
        let vals: Vec<bool> = clause.iter().map(|l| l.eval(assignment)).collect();
        !(vals.iter().all(|&v| v) || vals.iter().all(|&v| !v))
    })
}

/// First satisfying assignment in lexicographic order (variable 0 most
/// significant), or `None`.
pub fn nae_brute_force(inst: &Nae3SatInstance) -> Option<Vec<bool>> {
    let n = inst.num_vars;
    assert!(n <= 30, "brute force is meant for small instances");
    for mask in 0u64..1 << n {
        let assignment: Vec<bool> = (0..n).map(|i| (mask >> (n - 1 - i)) & 1 == 1).collect();
        if verify_nae(inst, &assignment) {
            return Some(assignment);
        }
    }
    None
}

/// Result of the reduction: the gadget tensor (with the indices of any
/// dropped always-true clauses), or a proof that a degenerate clause makes
/// the instance unsatisfiable outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction<'f> {
    Gadget {
        tensor: WildTensor3<'f>,
        dropped: Vec<usize>,
    },
    ConstantlyUnsat {
        clause: usize,
    },
}

/// Builds the `2n x 2n x 2n` wildcard tensor over `GF(2)` whose rank-2
/// decompositions correspond to satisfying assignments.
///
/// Clauses whose three literals sit on a single variable never reach the
/// tensor: all-equal polarities are never-satisfiable and mixed polarities
/// are always satisfied, and their cell would land inside that variable's
/// gadget block.
pub fn reduce_to_rank2_wildcard<'f>(
    inst: &Nae3SatInstance,
    gf2: &'f FieldSpec,
) -> Reduction<'f> {
    assert_eq!(gf2.q(), 2, "the gadget is specific to GF(2)");
    let n = inst.num_vars;
    let mut dropped = Vec::new();
    let mut tensor = WildTensor3::all_wild(gf2, (2 * n, 2 * n, 2 * n));

    for i in 0..n {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let v = u32::from(a == 0 && b == 0 && c == 0 || a == 1 && b == 1 && c == 1);
                    tensor.set(2 * i + a, 2 * i + b, 2 * i + c, Cell::Fixed(v));
                }
            }
        }
    }

    for (idx, clause) in inst.clauses.iter().enumerate() {
        let [l0, l1, l2] = clause;
        if l0.var == l1.var && l1.var == l2.var {
            if l0.negated == l1.negated && l1.negated == l2.negated {
                return Reduction::ConstantlyUnsat { clause: idx };
            }
            dropped.push(idx);
            continue;
        }
        let cell = (
            2 * l0.var + usize::from(l0.negated),
            2 * l1.var + usize::from(l1.negated),
            2 * l2.var + usize::from(l2.negated),
        );
        // All clause constraints demand the same value, so repeated cells
        // are idempotent writes.
        debug_assert_ne!(tensor.get(cell.0, cell.1, cell.2), Cell::Fixed(1));
        tensor.set(cell.0, cell.1, cell.2, Cell::Fixed(0));
    }

    Reduction::Gadget { tensor, dropped }
}

/// Lifts an assignment into the rank-2 decomposition `u x u x u +
/// ~u x ~u x ~u` with `u[2i] = v_i`, `u[2i+1] = !v_i`.
pub fn assignment_to_decomposition<'f>(
    assignment: &[bool],
    gf2: &'f FieldSpec,
) -> Decomposition<'f> {
    assert_eq!(gf2.q(), 2);
    let n = assignment.len();
    let mut rows = Mat::zeros(gf2, 2, 2 * n);
    for (i, &v) in assignment.iter().enumerate() {
        rows[(0, 2 * i)] = u32::from(v);
        rows[(0, 2 * i + 1)] = u32::from(!v);
        rows[(1, 2 * i)] = u32::from(!v);
        rows[(1, 2 * i + 1)] = u32::from(v);
    }
    Decomposition::new(rows.clone(), rows.clone(), rows)
}

/// Reads an assignment back out of a rank-2 decomposition, provided it
/// matches the parameterized gadget form: all three factors equal, the
/// second term the negation of the first, and each variable block a
/// `(v, !v)` pair.
pub fn extract_assignment(d: &Decomposition<'_>, n: usize) -> Option<Vec<bool>> {
    if d.rank() != 2 || d.a.field().q() != 2 {
        return None;
    }
    if d.a.cols() != 2 * n || d.b != d.a || d.c != d.a {
        return None;
    }
    for j in 0..2 * n {
        if d.a[(1, j)] == d.a[(0, j)] {
            return None;
        }
    }
    for i in 0..n {
        if d.a[(0, 2 * i + 1)] == d.a[(0, 2 * i)] {
            return None;
        }
    }
    Some((0..n).map(|i| d.a[(0, 2 * i)] == 1).collect())
}
