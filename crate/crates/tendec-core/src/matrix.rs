//! Dense exact matrices over a [`FieldSpec`]: reduced row echelon form with
//! transform, bounded rank factorization, full-rank factorization
//! enumeration, `GL` enumeration, and linear solves.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::field::{Elem, FieldSpec};

/// Dense row-major matrix over a finite field.
#[derive(Clone)]
pub struct Mat<'f> {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
    field: &'f FieldSpec,
}

impl<'f> PartialEq for Mat<'f> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.field == other.field
            && self.data == other.data
    }
}
impl<'f> Eq for Mat<'f> {}

impl<'f> fmt::Debug for Mat<'f> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over GF({}) [", self.rows, self.cols, self.field.q())?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'f> Index<(usize, usize)> for Mat<'f> {
    type Output = Elem;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<'f> IndexMut<(usize, usize)> for Mat<'f> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'f> Mat<'f> {
    pub fn new(field: &'f FieldSpec, rows: usize, cols: usize, data: Vec<Elem>) -> Mat<'f> {
        assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|&e| e < field.q()));
        Mat { rows, cols, data, field }
    }

    pub fn zeros(field: &'f FieldSpec, rows: usize, cols: usize) -> Mat<'f> {
        Mat { rows, cols, data: vec![0; rows * cols], field }
    }

    pub fn identity(field: &'f FieldSpec, n: usize) -> Mat<'f> {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(field: &'f FieldSpec, rows: &[&[Elem]]) -> Mat<'f> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Mat::new(field, rows.len(), cols, data)
    }

    /// Rank-1 outer product `u * v` with `u` a column and `v` a row.
    pub fn outer(field: &'f FieldSpec, u: &[Elem], v: &[Elem]) -> Mat<'f> {
        let mut m = Mat::zeros(field, u.len(), v.len());
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                m[(i, j)] = field.mul(ui, vj);
            }
        }
        m
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

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn transpose(&self) -> Mat<'f> {
        let mut t = Mat::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat<'f>) -> Mat<'f> {
        assert_eq!(self.cols, other.rows);
        let f = self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    if b != 0 {
                        out[(i, j)] = f.add(out[(i, j)], f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<'f>) -> Mat<'f> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Mat::new(f, self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &Mat<'f>) -> Mat<'f> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Mat::new(f, self.rows, self.cols, data)
    }

    pub fn scale(&self, s: Elem) -> Mat<'f> {
        let f = self.field;
        let data = self.data.iter().map(|&a| f.mul(a, s)).collect();
        Mat::new(f, self.rows, self.cols, data)
    }

    /// `self += s * other`, in place.
    pub(crate) fn add_scaled_assign(&mut self, other: &Mat<'f>, s: Elem) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        if s == 0 {
            return;
        }
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.add(*a, f.mul(s, b));
        }
    }

    pub fn slice_cols(&self, lo: usize, hi: usize) -> Mat<'f> {
        assert!(lo <= hi && hi <= self.cols);
        let mut out = Mat::zeros(self.field, self.rows, hi - lo);
        for i in 0..self.rows {
            for j in lo..hi {
                out[(i, j - lo)] = self[(i, j)];
            }
        }
        out
    }

    pub fn slice_rows(&self, lo: usize, hi: usize) -> Mat<'f> {
        assert!(lo <= hi && hi <= self.rows);
        Mat::new(
            self.field,
            hi - lo,
            self.cols,
            self.data[lo * self.cols..hi * self.cols].to_vec(),
        )
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Reduced row echelon form together with the invertible transform:
    /// returns `(R, T)` with `T * self = R` and `R` in rref.
    pub fn rref_with_transform(&self) -> (Mat<'f>, Mat<'f>) {
        let f = self.field;
        let mut r = self.clone();
        let mut t = Mat::identity(f, self.rows);
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&i| r[(i, col)] != 0) else {
                continue;
            };
            r.swap_rows(src, pivot_row);
            t.swap_rows(src, pivot_row);
            let inv = f.inv(r[(pivot_row, col)]);
            if inv != 1 {
                for j in 0..r.cols {
                    r[(pivot_row, j)] = f.mul(r[(pivot_row, j)], inv);
                }
                for j in 0..t.cols {
                    t[(pivot_row, j)] = f.mul(t[(pivot_row, j)], inv);
                }
            }
            for i in 0..self.rows {
                if i == pivot_row {
                    continue;
                }
                let s = r[(i, col)];
                if s == 0 {
                    continue;
                }
                for j in 0..r.cols {
                    let sub = f.mul(s, r[(pivot_row, j)]);
                    r[(i, j)] = f.sub(r[(i, j)], sub);
                }
                for j in 0..t.cols {
                    let sub = f.mul(s, t[(pivot_row, j)]);
                    t[(i, j)] = f.sub(t[(i, j)], sub);
                }
            }
            pivot_row += 1;
        }
        (r, t)
    }

    pub fn rref(&self) -> Mat<'f> {
        self.rref_with_transform().0
    }

    /// Number of pivots, i.e. nonzero rows of the rref.
    pub fn rank(&self) -> usize {
        let f = self.field;
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(src) = (rank..m.rows).find(|&i| m[(i, col)] != 0) else {
                continue;
            };
            m.swap_rows(src, rank);
            let inv = f.inv(m[(rank, col)]);
            for i in rank + 1..m.rows {
                let s = f.mul(m[(i, col)], inv);
                if s == 0 {
                    continue;
                }
                for j in col..m.cols {
                    let sub = f.mul(s, m[(rank, j)]);
                    m[(i, j)] = f.sub(m[(i, j)], sub);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Gaussian elimination with early termination: if `rank(self) <= rmax`,
    /// returns `(C, F)` with `C * F = self` and inner dimension exactly
    /// `rank(self)`; otherwise returns `None`. Work is proportional to
    /// `min(rmax, rank)` eliminations.
    pub fn rank_factorize_bounded(&self, rmax: usize) -> Option<(Mat<'f>, Mat<'f>)> {
        let fld = self.field;
        let mut c = Mat::identity(fld, self.rows);
        let mut f = self.clone();
        let mut r = 0;
        for j in 0..self.cols {
            let Some(i) = (r..self.rows).find(|&i| f[(i, j)] != 0) else {
                continue;
            };
            f.swap_rows(i, r);
            c.swap_cols(i, r);
            let sigma = f[(r, j)];
            if sigma != 1 {
                let sigma_inv = fld.inv(sigma);
                for jj in 0..f.cols {
                    f[(r, jj)] = fld.mul(f[(r, jj)], sigma_inv);
                }
                for ii in 0..c.rows {
                    c[(ii, r)] = fld.mul(c[(ii, r)], sigma);
                }
            }
            for k in r + 1..self.rows {
                let s = f[(k, j)];
                if s == 0 {
                    continue;
                }
                for jj in 0..f.cols {
                    let sub = fld.mul(s, f[(r, jj)]);
                    f[(k, jj)] = fld.sub(f[(k, jj)], sub);
                }
                for ii in 0..c.rows {
                    let add = fld.mul(s, c[(ii, k)]);
                    c[(ii, r)] = fld.add(c[(ii, r)], add);
                }
            }
            r += 1;
            if r > rmax {
                return None;
            }
        }
        Some((c.slice_cols(0, r), f.slice_rows(0, r)))
    }

    /// The canonical full-rank factorization `(C0, F0)` with
    /// `F0 = rref(self)` truncated to its nonzero rows. Panics on the zero
    /// matrix; callers handle rank 0 separately.
    pub fn full_rank_factorize(&self) -> (Mat<'f>, Mat<'f>) {
        let (r, t) = self.rref_with_transform();
        let rank = (0..r.rows)
            .take_while(|&i| r.row(i).iter().any(|&e| e != 0))
            .count();
        assert!(rank > 0, "full_rank_factorize on a zero matrix");
        // T is invertible, so its rref transform is its inverse.
        let t_inv = t.rref_with_transform().1;
        (t_inv.slice_cols(0, rank), r.slice_rows(0, rank))
    }

    pub fn inverse(&self) -> Option<Mat<'f>> {
        assert_eq!(self.rows, self.cols);
        let (r, t) = self.rref_with_transform();
        if r == Mat::identity(self.field, self.rows) {
            Some(t)
        } else {
            None
        }
    }

    /// Solves `self * X = B`, returning the unique solution with all free
    /// variables set to zero, or `None` if inconsistent.
    pub fn solve_linear(&self, b: &Mat<'f>) -> Option<Mat<'f>> {
        assert_eq!(self.rows, b.rows);
        let f = self.field;
        let (ra, t) = self.rref_with_transform();
        let tb = t.matmul(b);
        let mut x = Mat::zeros(f, self.cols, b.cols);
        for i in 0..ra.rows {
            match ra.row(i).iter().position(|&e| e != 0) {
                Some(p) => {
                    for j in 0..b.cols {
                        x[(p, j)] = tb[(i, j)];
                    }
                }
                None => {
                    if tb.row(i).iter().any(|&e| e != 0) {
                        return None;
                    }
                }
            }
        }
        // Pivot columns are unit in rref, but non-pivot columns of pivot
        // rows must be cancelled by the zeroed free variables; the solution
        // is exact only if the residual vanishes.
        debug_assert_eq!(self.matmul(&x), *b);
        Some(x)
    }

    /// Solves `X * self = B` by operating on transposes.
    pub fn solve_linear_left(&self, b: &Mat<'f>) -> Option<Mat<'f>> {
        Some(self.transpose().solve_linear(&b.transpose())?.transpose())
    }

    /// Streams all full-rank factorizations `(C0 X, X^-1 F0)` over
    /// `X` in `GL_r`. Panics on the zero matrix.
    pub fn enumerate_full_rank_factorizations(&self) -> FullRankFactorizations<'f> {
        let (c0, f0) = self.full_rank_factorize();
        let rank = c0.cols();
        FullRankFactorizations {
            gl: enumerate_gl(self.field, rank),
            c0,
            f0,
        }
    }

    /// Candidate left factors of a bounded-rank factorization: all
    /// `U = U* G` with `G` ranging over `F^{r' x r}` and `rank(U) = r'`,
    /// where `self = U* V*` is the canonical full-rank factorization.
    /// Every `U` with `U V = self` for some `V` and `rank(U) = r'` appears.
    pub fn candidate_left_factors(&self, r: usize) -> CandidateFactors<'f> {
        let (u_star, _) = self.full_rank_factorize();
        let r_prime = u_star.cols();
        assert!(r >= r_prime);
        CandidateFactors {
            basis: u_star,
            odo: Odometer::new(r_prime * r, self.field.q()),
            rows: r_prime,
            cols: r,
            left: true,
            field: self.field,
        }
    }

    /// Transposed variant of [`Mat::candidate_left_factors`]: all
    /// `V = G V*` with `rank(V) = r'`.
    pub fn candidate_right_factors(&self, r: usize) -> CandidateFactors<'f> {
        let (_, v_star) = self.full_rank_factorize();
        let r_prime = v_star.rows();
        assert!(r >= r_prime);
        CandidateFactors {
            basis: v_star,
            odo: Odometer::new(r * r_prime, self.field.q()),
            rows: r,
            cols: r_prime,
            left: false,
            field: self.field,
        }
    }
}

/// Base-`q` odometer over a fixed number of digits, counting up from all
/// zeros; digit 0 is the most significant so successive states are in
/// lexicographic order of the digit sequence.
pub(crate) struct Odometer {
    digits: Vec<Elem>,
    base: u32,
    started: bool,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(len: usize, base: u32) -> Odometer {
        Odometer { digits: vec![0; len], base, started: false, done: false }
    }

    /// Advances to the next state; returns `None` after the last state.
    pub(crate) fn next_state(&mut self) -> Option<&[Elem]> {
        if self.done {
            return None;
        }
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
        self.done = true;
        None
    }
}

/// Iterator over all invertible `r x r` matrices, in lexicographic order of
/// the flattened entry sequence.
pub struct GlIter<'f> {
    field: &'f FieldSpec,
    r: usize,
    odo: Odometer,
    yielded_empty: bool,
}

/// All invertible `r x r` matrices over the field, by filtering every
/// matrix through a rank check.
pub fn enumerate_gl(field: &FieldSpec, r: usize) -> GlIter<'_> {
    GlIter {
        field,
        r,
        odo: Odometer::new(r * r, field.q()),
        yielded_empty: false,
    }
}

impl<'f> Iterator for GlIter<'f> {
    type Item = Mat<'f>;

    fn next(&mut self) -> Option<Mat<'f>> {
        if self.r == 0 {
            // GL_0 has exactly one element, the empty matrix.
            if self.yielded_empty {
                return None;
            }
            self.yielded_empty = true;
            return Some(Mat::zeros(self.field, 0, 0));
        }
        while let Some(state) = self.odo.next_state() {
            let m = Mat::new(self.field, self.r, self.r, state.to_vec());
            if m.rank() == self.r {
                return Some(m);
            }
        }
        None
    }
}

/// See [`Mat::enumerate_full_rank_factorizations`].
pub struct FullRankFactorizations<'f> {
    gl: GlIter<'f>,
    c0: Mat<'f>,
    f0: Mat<'f>,
}

impl<'f> Iterator for FullRankFactorizations<'f> {
    type Item = (Mat<'f>, Mat<'f>);

    fn next(&mut self) -> Option<(Mat<'f>, Mat<'f>)> {
        let x = self.gl.next()?;
        let x_inv = x.inverse().expect("GL elements are invertible");
        Some((self.c0.matmul(&x), x_inv.matmul(&self.f0)))
    }
}

/// See [`Mat::candidate_left_factors`].
pub struct CandidateFactors<'f> {
    basis: Mat<'f>,
    odo: Odometer,
    rows: usize,
    cols: usize,
    left: bool,
    field: &'f FieldSpec,
}

impl<'f> Iterator for CandidateFactors<'f> {
    type Item = Mat<'f>;

    fn next(&mut self) -> Option<Mat<'f>> {
        let target = if self.left { self.rows } else { self.cols };
        while let Some(state) = self.odo.next_state() {
            let g = Mat::new(self.field, self.rows, self.cols, state.to_vec());
            // basis has full rank, so rank(basis * G) = rank(G); checking G
            // is cheaper than checking the product.
            if g.rank() != target {
                continue;
            }
            return Some(if self.left {
                self.basis.matmul(&g)
            } else {
                g.matmul(&self.basis)
            });
        }
        None
    }
}
