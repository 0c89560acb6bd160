//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measurements (run with `--nocapture` to see them).

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tendec_core::decompose::{decompose, Budget, DecomposeOutcome};
use tendec_core::field::{Elem, FieldSpec};
use tendec_core::matrix::{enumerate_gl, Mat};
use tendec_core::oracle::{
    brute_force_decompose, brute_force_rank1_wildcard_matrix,
    brute_force_rank1_wildcard_tensor, enumerate_rank2_decompositions, Rank2Solution,
};
use tendec_core::reduction::{
    assignment_to_decomposition, extract_assignment, nae_brute_force,
    reduce_to_rank2_wildcard, verify_nae, Literal, Nae3SatInstance, Reduction,
};
use tendec_core::tensor::{diagonal_gadget, Decomposition, Tensor3};
use tendec_core::wildcard::{rank1_wildcard, rank1_wildcard_gf2, Cell, WildMat, WildTensor3};

fn random_mat<'f>(field: &'f FieldSpec, rows: usize, cols: usize, rng: &mut StdRng) -> Mat<'f> {
    let data = (0..rows * cols).map(|_| rng.gen_range(0..field.q())).collect();
    Mat::new(field, rows, cols, data)
}

fn planted_tensor<'f>(
    field: &'f FieldSpec,
    rank: usize,
    n: usize,
    rng: &mut StdRng,
) -> Tensor3<'f> {
    Decomposition::new(
        random_mat(field, rank, n, rng),
        random_mat(field, rank, n, rng),
        random_mat(field, rank, n, rng),
    )
    .eval()
}

/// Criterion 1: the diagonal 2x2x2 tensor has exactly the two known
/// rank-2 decompositions over GF(2), found in under a second.
#[test]
fn criterion_1_diagonal_gadget_uniqueness() {
    let start = Instant::now();
    let f = FieldSpec::new(2, 1).unwrap();
    let w = WildTensor3::from_tensor(&diagonal_gadget(&f));
    let mut sols: Vec<Rank2Solution> = enumerate_rank2_decompositions(&w, 1 << 30)
        .unwrap()
        .collect();
    sols.sort();
    let e0 = vec![1, 0];
    let e1 = vec![0, 1];
    let mut want = vec![
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
    ];
    want.sort();
    assert_eq!(sols, want);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1: PASS - exactly 2 rank-2 decompositions, {elapsed:?}");
}

/// Criterion 2: over all 256 tensors of shape 2x2x2 over GF(2) and every
/// rank 1..=4, solver existence equals brute-force existence and every
/// returned decomposition re-evaluates to its tensor.
#[test]
fn criterion_2_exhaustive_2x2x2_gf2() {
    let start = Instant::now();
    let f = FieldSpec::new(2, 1).unwrap();
    let mut checked = 0u32;
    for code in 0..256u32 {
        let data: Vec<Elem> = (0..8).map(|b| (code >> b) & 1).collect();
        let t = Tensor3::new(&f, (2, 2, 2), data);
        for r in 1..=4usize {
            let got = decompose(&t, r, &mut Budget::unlimited());
            let brute = brute_force_decompose(&t, r, 1 << 20).unwrap();
            assert_eq!(
                got.exists(),
                brute.is_some(),
                "existence mismatch at code {code}, rank {r}"
            );
            if let DecomposeOutcome::Found(dec) = got {
                assert_eq!(dec.eval(), t);
                assert_eq!(dec.rank(), r);
            }
            if let Some(dec) = brute {
                assert_eq!(dec.eval(), t);
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(checked, 1024);
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 2: PASS - 1024 exhaustive cases agree, {elapsed:?}");
}

/// Criterion 3: 50 planted instances per configuration all decompose and
/// re-evaluate exactly: ranks 1..=4 over GF(2) and GF(3), ranks 1..=3
/// over GF(4) and GF(5), sizes 5, 10, 20.
#[test]
fn criterion_3_planted_suite() {
    let start = Instant::now();
    let mut total = 0u32;
    for (p, k, max_rank) in [(2, 1, 4usize), (3, 1, 4), (2, 2, 3), (5, 1, 3)] {
        let field = FieldSpec::new(p, k).unwrap();
        for rank in 1..=max_rank {
            for n in [5usize, 10, 20] {
                let mut rng =
                    StdRng::seed_from_u64(0x9e37 + (p * 100 + k * 10) as u64 + (rank * 7 + n) as u64);
                for _ in 0..50 {
                    let t = planted_tensor(&field, rank, n, &mut rng);
                    let dec = decompose(&t, rank, &mut Budget::unlimited())
                        .found()
                        .unwrap_or_else(|| {
                            panic!("planted GF({}) rank {rank} n {n} not solved", field.q())
                        });
                    assert_eq!(dec.eval(), t);
                    assert_eq!(dec.rank(), rank);
                    total += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(total, 50 * (4 + 4 + 3 + 3) * 3);
    println!("criterion 3: PASS - {total} planted instances solved, {elapsed:?}");
}

/// Criterion 4: a planted rank-4 tensor over GF(2) at n = 64 decomposes
/// in under a minute, and the n = 64 vs n = 32 runtime ratio stays below
/// 12.
#[test]
fn criterion_4_scaling_smoke() {
    let time_for = |n: usize| -> Duration {
        let field = FieldSpec::new(2, 1).unwrap();
        let mut rng = StdRng::seed_from_u64(0xc4 + n as u64);
        let instances: Vec<Tensor3> =
            (0..3).map(|_| planted_tensor(&field, 4, n, &mut rng)).collect();
        let start = Instant::now();
        for t in &instances {
            let dec = decompose(t, 4, &mut Budget::unlimited()).found().unwrap();
            assert_eq!(dec.eval(), *t);
        }
        start.elapsed()
    };
    let t32 = time_for(32);
    let t64 = time_for(64);
    assert!(t64 < Duration::from_secs(60) * 3, "n=64 took {t64:?} for 3 instances");
    let ratio = t64.as_secs_f64() / t32.as_secs_f64().max(1e-9);
    assert!(ratio < 12.0, "ratio {ratio:.2} (n=64 {t64:?}, n=32 {t32:?})");
    println!(
        "criterion 4: PASS - n=64 {t64:?}, n=32 {t32:?}, ratio {ratio:.2} < 12 (3 instances each)"
    );
}

/// Criterion 5: the matrix lemmas. rref is invariant under invertible
/// left-multiplication (1000 cases, q <= 5); the full-rank factorization
/// count is exactly prod(q^r - q^i) for r <= 3, q <= 4; the rank-of-
/// product bounds hold on 1000 random pairs.
#[test]
fn criterion_5_matrix_lemmas() {
    let start = Instant::now();
    let fields: Vec<FieldSpec> = [(2u32, 1u32), (3, 1), (2, 2), (5, 1)]
        .iter()
        .map(|&(p, k)| FieldSpec::new(p, k).unwrap())
        .collect();

    // rref uniqueness under a random change of row basis.
    let mut rng = StdRng::seed_from_u64(0xacc5);
    for case in 0..1000 {
        let field = &fields[case % fields.len()];
        let rows = rng.gen_range(1..6);
        let cols = rng.gen_range(1..6);
        let m = random_mat(field, rows, cols, &mut rng);
        let p_mat = loop {
            let cand = random_mat(field, rows, rows, &mut rng);
            if cand.rank() == rows {
                break cand;
            }
        };
        let a = m.rref();
        let b = p_mat.matmul(&m).rref();
        let rank = m.rank();
        assert_eq!(a.slice_rows(0, rank), b.slice_rows(0, rank), "case {case}");
    }

    // Enumeration counts, exact.
    let gl_order = |q: u64, r: u32| -> u64 {
        let qr = q.pow(r);
        (0..r).map(|i| qr - q.pow(i)).product()
    };
    let mut enumerated = 0u64;
    for field in fields.iter().filter(|f| f.q() <= 4) {
        for r in 1..=3usize {
            let m = loop {
                let c = random_mat(field, 4, r, &mut rng);
                let fac = random_mat(field, r, 5, &mut rng);
                let m = c.matmul(&fac);
                if m.rank() == r {
                    break m;
                }
            };
            let mut count = 0u64;
            for (c, fac) in m.enumerate_full_rank_factorizations() {
                debug_assert_eq!(c.matmul(&fac), m);
                count += 1;
            }
            assert_eq!(count, gl_order(field.q() as u64, r as u32));
            assert_eq!(enumerate_gl(field, r).count() as u64, count);
            enumerated += count;
        }
    }

    // Rank-of-product bounds.
    for case in 0..1000 {
        let field = &fields[case % fields.len()];
        let m = rng.gen_range(1..6);
        let r = rng.gen_range(1..5);
        let n = rng.gen_range(1..6);
        let u = random_mat(field, m, r, &mut rng);
        let v = random_mat(field, r, n, &mut rng);
        let rp = u.matmul(&v).rank();
        let (ru, rv) = (u.rank(), v.rank());
        assert!(ru <= rp || rv < r);
        assert!(ru < r || rv <= rp);
        assert!(ru >= rp && rv >= rp);
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 5: PASS - 1000 rref cases, {enumerated} factorizations counted, 1000 rank bounds, {elapsed:?}"
    );
}

/// Criterion 6: rank-1 wildcard existence matches brute force on every
/// cell state: all 3^8 GF(2) and 4^8 GF(3) states of a 2x2x2 tensor, and
/// all 3^9 GF(2) states of a 3x3 matrix.
#[test]
fn criterion_6_rank1_wildcard_exhaustive() {
    let start = Instant::now();

    let f2 = FieldSpec::new(2, 1).unwrap();
    let mut tested = 0u64;
    for code in 0..3u64.pow(8) {
        let mut c = code;
        let cells: Vec<Cell> = (0..8)
            .map(|_| {
                let d = c % 3;
                c /= 3;
                match d {
                    0 => Cell::Wild,
                    v => Cell::Fixed(v as Elem - 1),
                }
            })
            .collect();
        let w = WildTensor3::new(&f2, (2, 2, 2), cells);
        let got = rank1_wildcard(&w);
        let brute = brute_force_rank1_wildcard_tensor(&w, 1 << 10).unwrap();
        assert_eq!(got.is_some(), brute.is_some(), "GF(2) code {code}");
        tested += 1;
    }

    let f3 = FieldSpec::new(3, 1).unwrap();
    for code in 0..4u64.pow(8) {
        let mut c = code;
        let cells: Vec<Cell> = (0..8)
            .map(|_| {
                let d = c % 4;
                c /= 4;
                match d {
                    0 => Cell::Wild,
                    v => Cell::Fixed(v as Elem - 1),
                }
            })
            .collect();
        let w = WildTensor3::new(&f3, (2, 2, 2), cells);
        let got = rank1_wildcard(&w);
        let brute = brute_force_rank1_wildcard_tensor(&w, 1 << 12).unwrap();
        assert_eq!(got.is_some(), brute.is_some(), "GF(3) code {code}");
        tested += 1;
    }

    for code in 0..3u64.pow(9) {
        let mut c = code;
        let cells: Vec<Cell> = (0..9)
            .map(|_| {
                let d = c % 3;
                c /= 3;
                match d {
                    0 => Cell::Wild,
                    v => Cell::Fixed(v as Elem - 1),
                }
            })
            .collect();
        let w = WildMat::new(&f2, 3, 3, cells);
        let got = tendec_core::wildcard::rank1_wildcard_matrix(&w);
        let brute = brute_force_rank1_wildcard_matrix(&w, 1 << 10).unwrap();
        assert_eq!(got.is_some(), brute.is_some(), "matrix code {code}");
        tested += 1;
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!("criterion 6: PASS - {tested} wildcard states agree, {elapsed:?}");
}

fn all_canonical_clauses(n: usize) -> Vec<[Literal; 3]> {
    let lits: Vec<Literal> = (0..n)
        .flat_map(|v| [Literal::pos(v), Literal::neg(v)])
        .collect();
    let mut out = Vec::new();
    for a in 0..lits.len() {
        for b in a..lits.len() {
            for c in b..lits.len() {
                out.push([lits[a], lits[b], lits[c]]);
            }
        }
    }
    out
}

fn subsets_up_to(k: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for set in &frontier {
            let lo = set.last().map_or(0, |&x| x + 1);
            for add in lo..len {
                let mut grown = set.clone();
                grown.push(add);
                next.push(grown.clone());
                out.push(grown);
            }
        }
        frontier = next;
    }
    out
}

/// Criterion 7: the hardness gadget. For every instance with n <= 2 and
/// up to 4 canonical clauses, rank-2 wildcard solvability of the gadget
/// equals NAE satisfiability; on random instances with n <= 4, m <= 8 the
/// assignment embedding is consistent with the gadget exactly for
/// satisfying assignments, and extraction round-trips.
#[test]
fn criterion_7_reduction_correctness() {
    let start = Instant::now();
    let f = FieldSpec::new(2, 1).unwrap();

    let mut instances = 0u64;
    let mut gadget_cache: BTreeMap<Vec<(usize, usize, usize, Elem)>, bool> = BTreeMap::new();
    for n in 1..=2usize {
        let clauses = all_canonical_clauses(n);
        for subset in subsets_up_to(4, clauses.len()) {
            let inst = Nae3SatInstance::new(n, subset.iter().map(|&i| clauses[i]).collect());
            let sat = nae_brute_force(&inst).is_some();
            match reduce_to_rank2_wildcard(&inst, &f) {
                Reduction::ConstantlyUnsat { .. } => {
                    assert!(!sat, "constantly-unsat preprocessing disagrees");
                }
                Reduction::Gadget { tensor, .. } => {
                    let key: Vec<_> = tensor.fixed_cells().collect();
                    let solvable = *gadget_cache.entry(key).or_insert_with(|| {
                        enumerate_rank2_decompositions(&tensor, 1 << 30)
                            .unwrap()
                            .next()
                            .is_some()
                    });
                    assert_eq!(solvable, sat, "gadget disagrees on {inst:?}");
                }
            }
            instances += 1;
        }
    }

    // Random larger instances: embedding and extraction.
    let mut rng = StdRng::seed_from_u64(0xacc7);
    for _ in 0..150 {
        let n = rng.gen_range(1..=4usize);
        let m = rng.gen_range(0..=8usize);
        let clauses: Vec<[Literal; 3]> = (0..m)
            .map(|_| {
                [
                    Literal { var: rng.gen_range(0..n), negated: rng.gen() },
                    Literal { var: rng.gen_range(0..n), negated: rng.gen() },
                    Literal { var: rng.gen_range(0..n), negated: rng.gen() },
                ]
            })
            .collect();
        let inst = Nae3SatInstance::new(n, clauses);
        match reduce_to_rank2_wildcard(&inst, &f) {
            Reduction::ConstantlyUnsat { .. } => {
                assert!(nae_brute_force(&inst).is_none());
            }
            Reduction::Gadget { tensor, .. } => {
                for mask in 0u64..1 << n {
                    let assignment: Vec<bool> =
                        (0..n).map(|i| (mask >> (n - 1 - i)) & 1 == 1).collect();
                    let dec = assignment_to_decomposition(&assignment, &f);
                    let eval = dec.eval();
                    let consistent =
                        tensor.fixed_cells().all(|(i, j, k, v)| eval.get(i, j, k) == v);
                    assert_eq!(consistent, verify_nae(&inst, &assignment));
                    assert_eq!(extract_assignment(&dec, n).unwrap(), assignment);
                }
            }
        }
    }

    let elapsed = start.elapsed();
    println!(
        "criterion 7: PASS - {instances} exhaustive instances, {} distinct gadgets, 150 random instances, {elapsed:?}",
        gadget_cache.len()
    );
}

/// Criterion 8: the GF(2) fast path returns the same answers (identical
/// vectors) as the general discrete-log path on 10000 random 8x8x8
/// wildcard tensors.
#[test]
fn criterion_8_gf2_fast_path() {
    let start = Instant::now();
    let f = FieldSpec::new(2, 1).unwrap();
    let mut rng = StdRng::seed_from_u64(0xacc8);
    let mut solved = 0u32;
    for _ in 0..10_000 {
        let density = rng.gen_range(1..20);
        let cells: Vec<Cell> = (0..512)
            .map(|_| {
                if rng.gen_range(0..20) < density {
                    Cell::Fixed(rng.gen_range(0..2))
                } else {
                    Cell::Wild
                }
            })
            .collect();
        let w = WildTensor3::new(&f, (8, 8, 8), cells);
        let fast = rank1_wildcard_gf2(&w);
        let general = rank1_wildcard(&w);
        assert_eq!(fast, general);
        if fast.is_some() {
            solved += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!("criterion 8: PASS - 10000 tensors agree ({solved} solvable), {elapsed:?}");
}
