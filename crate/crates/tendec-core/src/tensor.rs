//! Dense 3D tensors, rank-R decompositions, evaluation, and slice
//! flattening.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::field::{Elem, FieldSpec};
use crate::matrix::Mat;

/// Dense `p x q x s` tensor, row-major with the last index fastest.
#[derive(Clone, PartialEq, Eq)]
pub struct Tensor3<'f> {
    dims: (usize, usize, usize),
    data: Vec<Elem>,
    field: &'f FieldSpec,
}

impl<'f> fmt::Debug for Tensor3<'f> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q, s) = self.dims;
        writeln!(f, "Tensor3 {p}x{q}x{s} over GF({}) [", self.field.q())?;
        for i in 0..p {
            for j in 0..q {
                write!(f, "  ")?;
                for k in 0..s {
                    write!(f, "{} ", self.get(i, j, k))?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'f> Tensor3<'f> {
    pub fn zeros(field: &'f FieldSpec, dims: (usize, usize, usize)) -> Tensor3<'f> {
        Tensor3 { dims, data: vec![0; dims.0 * dims.1 * dims.2], field }
    }

    pub fn new(field: &'f FieldSpec, dims: (usize, usize, usize), data: Vec<Elem>) -> Tensor3<'f> {
        assert_eq!(data.len(), dims.0 * dims.1 * dims.2);
        debug_assert!(data.iter().all(|&e| e < field.q()));
        Tensor3 { dims, data, field }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Elem {
        self.data[(i * self.dims.1 + j) * self.dims.2 + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Elem) {
        debug_assert!(v < self.field.q());
        self.data[(i * self.dims.1 + j) * self.dims.2 + k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    /// The `p x (q*s)` matrix whose row `i` is slice `i` flattened
    /// row-major.
    pub fn flatten_slices(&self) -> Mat<'f> {
        let (p, q, s) = self.dims;
        Mat::new(self.field, p, q * s, self.data.clone())
    }

    /// Inverse of [`Tensor3::flatten_slices`].
    pub fn from_flat_slices(mat: &Mat<'f>, dims: (usize, usize, usize)) -> Tensor3<'f> {
        assert_eq!(mat.rows(), dims.0);
        assert_eq!(mat.cols(), dims.1 * dims.2);
        Tensor3::new(mat.field(), dims, mat.data().to_vec())
    }

    /// Slice `i` as a `q x s` matrix.
    pub fn slice(&self, i: usize) -> Mat<'f> {
        let (_, q, s) = self.dims;
        Mat::new(self.field, q, s, self.data[i * q * s..(i + 1) * q * s].to_vec())
    }
}

/// A rank-R decomposition: factor matrices `A: R x p`, `B: R x q`,
/// `C: R x s`, one rank-1 term per row triple. `R = 0` is legal and
/// evaluates to the zero tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition<'f> {
    pub a: Mat<'f>,
    pub b: Mat<'f>,
    pub c: Mat<'f>,
}

impl<'f> Decomposition<'f> {
    pub fn new(a: Mat<'f>, b: Mat<'f>, c: Mat<'f>) -> Decomposition<'f> {
        assert_eq!(a.rows(), b.rows());
        assert_eq!(a.rows(), c.rows());
        Decomposition { a, b, c }
    }

    pub fn zero(field: &'f FieldSpec, rank: usize, dims: (usize, usize, usize)) -> Decomposition<'f> {
        Decomposition {
            a: Mat::zeros(field, rank, dims.0),
            b: Mat::zeros(field, rank, dims.1),
            c: Mat::zeros(field, rank, dims.2),
        }
    }

    pub fn rank(&self) -> usize {
        self.a.rows()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a.cols(), self.b.cols(), self.c.cols())
    }

    /// `T[i,j,k] = sum_r A[r,i] B[r,j] C[r,k]`.
    pub fn eval(&self) -> Tensor3<'f> {
        let f = self.a.field();
        let (p, q, s) = self.dims();
        let mut t = Tensor3::zeros(f, (p, q, s));
        for r in 0..self.rank() {
            for i in 0..p {
                let ai = self.a[(r, i)];
                if ai == 0 {
                    continue;
                }
                for j in 0..q {
                    let ab = f.mul(ai, self.b[(r, j)]);
                    if ab == 0 {
                        continue;
                    }
                    for k in 0..s {
                        let ck = self.c[(r, k)];
                        if ck != 0 {
                            let cur = t.get(i, j, k);
                            t.set(i, j, k, f.add(cur, f.mul(ab, ck)));
                        }
                    }
                }
            }
        }
        t
    }
}

/// Splits a matrix of rank at most 1 into a column and a row with
/// `u * v = M`; the zero matrix yields zero vectors. Returns `None` when
/// the rank exceeds 1.
pub fn rank1_split<'f>(m: &Mat<'f>) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let f = m.field();
    let mut pivot = None;
    'scan: for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m[(i, j)] != 0 {
                pivot = Some((i, j));
                break 'scan;
            }
        }
    }
    let Some((pi, pj)) = pivot else {
        return Some((vec![0; m.rows()], vec![0; m.cols()]));
    };
    let inv = f.inv(m[(pi, pj)]);
    let v: Vec<Elem> = m.row(pi).to_vec();
    let u: Vec<Elem> = (0..m.rows()).map(|i| f.mul(m[(i, pj)], inv)).collect();
    // Exactness check doubles as the rank test.
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if f.mul(u[i], v[j]) != m[(i, j)] {
                return None;
            }
        }
    }
    Some((u, v))
}

/// The 2x2x2 tensor with 1s on the main diagonal, the variable gadget of
/// the hardness reduction.
pub fn diagonal_gadget<'f>(field: &'f FieldSpec) -> Tensor3<'f> {
    let mut t = Tensor3::zeros(field, (2, 2, 2));
    t.set(0, 0, 0, 1);
    t.set(1, 1, 1, 1);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_decomposition<'f>(
        field: &'f FieldSpec,
        rank: usize,
        dims: (usize, usize, usize),
        rng: &mut StdRng,
    ) -> Decomposition<'f> {
        let fill = |rows: usize, cols: usize, rng: &mut StdRng| {
            Mat::new(
                field,
                rows,
                cols,
                (0..rows * cols).map(|_| rng.gen_range(0..field.q())).collect(),
            )
        };
        Decomposition::new(
            fill(rank, dims.0, rng),
            fill(rank, dims.1, rng),
            fill(rank, dims.2, rng),
        )
    }

    #[test]
    fn eval_zero_and_single_term() {
        let f = FieldSpec::new(3, 1).unwrap();
        let zero = Decomposition::zero(&f, 3, (2, 2, 2));
        assert!(zero.eval().is_zero());

        let a = Mat::new(&f, 1, 2, vec![1, 2]);
        let b = Mat::new(&f, 1, 2, vec![2, 1]);
        let c = Mat::new(&f, 1, 2, vec![1, 1]);
        let d = Decomposition::new(a, b, c);
        let t = d.eval();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let want = f.mul(f.mul(d.a[(0, i)], d.b[(0, j)]), d.c[(0, k)]);
                    assert_eq!(t.get(i, j, k), want);
                }
            }
        }
    }

    #[test]
    fn eval_diagonal_gadget() {
        let f = FieldSpec::new(2, 1).unwrap();
        let a = Mat::from_rows(&f, &[&[1, 0], &[0, 1]]);
        let d = Decomposition::new(a.clone(), a.clone(), a.clone());
        assert_eq!(d.eval(), diagonal_gadget(&f));
    }

    #[test]
    fn eval_term_order_invariant() {
        let f = FieldSpec::new(3, 1).unwrap();
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..20 {
            let d = random_decomposition(&f, 3, (2, 3, 2), &mut rng);
            // Swap terms 0 and 2.
            fn perm<'f>(m: &Mat<'f>) -> Mat<'f> {
                Mat::from_rows(m.field(), &[m.row(2), m.row(1), m.row(0)])
            }
            let d2 = Decomposition::new(perm(&d.a), perm(&d.b), perm(&d.c));
            assert_eq!(d.eval(), d2.eval());
        }
    }

    #[test]
    fn flatten_examples() {
        let f = FieldSpec::new(2, 1).unwrap();
        assert!(Tensor3::zeros(&f, (2, 3, 2)).flatten_slices().is_zero());
        let flat = diagonal_gadget(&f).flatten_slices();
        assert_eq!(flat, Mat::from_rows(&f, &[&[1, 0, 0, 0], &[0, 0, 0, 1]]));

        let t = Tensor3::new(&f, (1, 1, 1), vec![1]);
        assert_eq!(t.flatten_slices(), Mat::new(&f, 1, 1, vec![1]));
    }

    #[test]
    fn flatten_round_trip() {
        let f = FieldSpec::new(3, 1).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let dims = (
                rng.gen_range(1..4),
                rng.gen_range(1..4),
                rng.gen_range(1..4),
            );
            let data = (0..dims.0 * dims.1 * dims.2)
                .map(|_| rng.gen_range(0..3))
                .collect();
            let t = Tensor3::new(&f, dims, data);
            assert_eq!(Tensor3::from_flat_slices(&t.flatten_slices(), dims), t);
        }
    }

    #[test]
    fn rank1_split_cases() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        let z = Mat::zeros(&f2, 2, 3);
        let (u, v) = rank1_split(&z).unwrap();
        assert_eq!(u, vec![0, 0]);
        assert_eq!(v, vec![0, 0, 0]);

        let ones = Mat::new(&f2, 2, 2, vec![1; 4]);
        let (u, v) = rank1_split(&ones).unwrap();
        assert_eq!(Mat::outer(&f2, &u, &v), ones);

        // det = 2*2 - 1*1 = 3 = 0 mod 3, so this is rank 1 over GF(3).
        let f3 = FieldSpec::new(3, 1).unwrap();
        let m = Mat::from_rows(&f3, &[&[2, 1], &[1, 2]]);
        assert_eq!(m.rank(), 1);
        let (u, v) = rank1_split(&m).unwrap();
        assert_eq!(Mat::outer(&f3, &u, &v), m);

        // Identity has rank 2.
        assert!(rank1_split(&Mat::identity(&f3, 2)).is_none());
    }
}
