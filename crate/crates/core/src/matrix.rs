//! Dense matrices over an exact [`Field`].

use std::fmt;

use crate::error::Result;
use crate::field::{Field, PrimeField, Rationals};

#[derive(Clone, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.field.format(self.get(r, c)))?;
            }
        }
        write!(f, "]")
    }
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        Self { field: field.clone(), rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    pub fn from_fn(field: &F, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { field: field.clone(), rows, cols, data }
    }

    pub fn from_i64(field: &F, rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(field, rows, cols, |r, c| field.from_i64(entries[r * cols + c]))
    }

    /// Column vector from entries.
    pub fn column(field: &F, entries: Vec<F::Elem>) -> Self {
        let rows = entries.len();
        Self { field: field.clone(), rows, cols: 1, data: entries }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if f.is_zero(a) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    if !f.is_zero(b) {
                        *d = f.add(d, &f.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix sum shape mismatch");
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.add(a, b)).collect();
        Self { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "matrix difference shape mismatch");
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f.sub(a, b)).collect();
        Self { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        let data = self.data.iter().map(|a| f.neg(a)).collect();
        Self { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        let f = &self.field;
        let data = self.data.iter().map(|a| f.mul(a, s)).collect();
        Self { field: f.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(&self.field, self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        Self::from_fn(&self.field, rows.len(), cols.len(), |r, c| self.get(r0 + r, c0 + c).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(&self.field, idx.len(), self.cols, |r, c| self.get(idx[r], c).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(&self.field, self.rows, idx.len(), |r, c| self.get(r, idx[c]).clone())
    }

    pub fn col(&self, c: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    /// Horizontal concatenation; all blocks must share the row count `rows`.
    pub fn hstack(field: &F, rows: usize, blocks: &[&Self]) -> Self {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(field, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for r in 0..rows {
                for c in 0..b.cols {
                    out.set(r, off + c, b.get(r, c).clone());
                }
            }
            off += b.cols;
        }
        out
    }

    /// Vertical concatenation; all blocks must share the column count `cols`.
    pub fn vstack(field: &F, cols: usize, blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            data.extend(b.data.iter().cloned());
        }
        Self { field: field.clone(), rows, cols, data }
    }

    /// Block diagonal matrix.
    pub fn block_diag(field: &F, blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.paste(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Overwrites the block starting at `(r0, c0)` with `b`.
    pub fn paste(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c).clone());
            }
        }
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..cols {
            if pr == rows {
                break;
            }
            let Some(sel) = (pr..rows).find(|&r| !f.is_zero(self.get(r, c))) else {
                continue;
            };
            if sel != pr {
                for k in 0..cols {
                    self.data.swap(sel * cols + k, pr * cols + k);
                }
            }
            let inv = f.inv(self.get(pr, c)).unwrap();
            for k in c..cols {
                let v = f.mul(self.get(pr, k), &inv);
                self.set(pr, k, v);
            }
            for r in 0..rows {
                if r == pr {
                    continue;
                }
                let factor = self.get(r, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for k in c..cols {
                    let pv = self.get(pr, k);
                    if f.is_zero(pv) {
                        continue;
                    }
                    let v = f.sub(self.get(r, k), &f.mul(&factor, pv));
                    self.set(r, k, v);
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    /// Determinant by elimination.
    pub fn det(&self) -> F::Elem {
        assert!(self.is_square());
        let f = self.field.clone();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(sel) = (c..n).find(|&r| !f.is_zero(m.get(r, c))) else {
                return f.zero();
            };
            if sel != c {
                for k in 0..n {
                    m.data.swap(sel * n + k, c * n + k);
                }
                det = f.neg(&det);
            }
            let piv = m.get(c, c).clone();
            det = f.mul(&det, &piv);
            let inv = f.inv(&piv).unwrap();
            for r in c + 1..n {
                let factor = f.mul(m.get(r, c), &inv);
                if f.is_zero(&factor) {
                    continue;
                }
                for k in c..n {
                    let v = f.sub(m.get(r, k), &f.mul(&factor, m.get(c, k)));
                    m.set(r, k, v);
                }
            }
        }
        det
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as the columns of the returned matrix.
    pub fn nullspace(&self) -> Self {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut out = Self::zeros(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, f.one());
            for (row, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, f.neg(r.get(row, fc)));
            }
        }
        out
    }

    /// A maximal linearly independent subset of the columns, in order.
    pub fn column_basis(&self) -> Self {
        let (_, pivots) = self.rref();
        self.select_cols(&pivots)
    }

    /// Some solution `X` of `self · X = rhs`, or `None` when inconsistent.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.rows, rhs.rows);
        let f = &self.field;
        let aug = Self::hstack(f, self.rows, &[self, rhs]);
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Self::zeros(f, self.cols, rhs.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for k in 0..rhs.cols {
                x.set(pc, k, r.get(row, self.cols + k).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let f = &self.field;
        let aug = Self::hstack(f, n, &[self, &Self::identity(f, n)]);
        let (r, pivots) = aug.rref();
        if n > 0 && (pivots.len() < n || pivots[n - 1] >= n) {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    /// True when every column of `other` lies in the column span of `self`.
    pub fn spans(&self, other: &Self) -> bool {
        if other.cols == 0 {
            return true;
        }
        let rank = self.rank();
        Self::hstack(&self.field, self.rows, &[self, other]).rank() == rank
    }

    /// Complement coordinates for the column span of `self` (columns assumed
    /// independent): returns `(proj, section)` with `proj · self = 0`,
    /// `proj · section = I` and `[self | section]` invertible.
    pub fn complement(&self) -> (Self, Self) {
        let f = &self.field;
        let n = self.rows;
        let k = self.cols;
        // Extend by standard basis vectors not already spanned.
        let aug = Self::hstack(f, n, &[self, &Self::identity(f, n)]);
        let (_, pivots) = aug.rref();
        let extra: Vec<usize> = pivots.iter().filter(|&&p| p >= k).map(|&p| p - k).collect();
        assert_eq!(k + extra.len(), n, "columns are not independent");
        let section = Self::identity(f, n).select_cols(&extra);
        let full = Self::hstack(f, n, &[self, &section]);
        let inv = full.inverse().expect("complement basis is invertible");
        let proj = inv.submatrix(k..n, 0..n);
        (proj, section)
    }

    /// Intersection of the column spans of `self` and `other`.
    pub fn intersect(&self, other: &Self) -> Self {
        let f = &self.field;
        let stacked = Self::hstack(f, self.rows, &[self, &other.neg()]);
        let ker = stacked.nullspace();
        let coeffs = ker.submatrix(0..self.cols, 0..ker.cols);
        self.mul(&coeffs).column_basis()
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Self) -> Self {
        let f = &self.field;
        Self::from_fn(f, self.rows * other.rows, self.cols * other.cols, |r, c| {
            f.mul(self.get(r / other.rows, c / other.cols), other.get(r % other.rows, c % other.cols))
        })
    }

    /// Row-major entries as a flat vector.
    pub fn to_vec(&self) -> Vec<F::Elem> {
        self.data.clone()
    }

    pub fn from_vec(field: &F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { field: field.clone(), rows, cols, data }
    }

    /// Canonical basis of the column span: the transposed RREF of the
    /// transposed basis. Equal subspaces give equal results.
    pub fn canonical_span(&self) -> Self {
        let (r, pivots) = self.transpose().rref();
        r.submatrix(0..pivots.len(), 0..self.rows).transpose()
    }
}

impl Matrix<Rationals> {
    /// Entry-wise reduction modulo a prime.
    pub fn reduce(&self, target: &PrimeField) -> Result<Matrix<PrimeField>> {
        let data = self.data.iter().map(|q| target.reduce(q)).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_vec(target, self.rows, self.cols, data))
    }
}

/// Nilpotent Jordan block of size `n` acting by `e_t -> e_{t+1}`.
pub fn shift_block<F: Field>(field: &F, n: usize) -> Matrix<F> {
    let mut m = Matrix::zeros(field, n, n);
    for t in 0..n.saturating_sub(1) {
        m.set(t + 1, t, field.one());
    }
    m
}

/// Block diagonal of `r` shift blocks of size `c`: the canonical form of
/// the free `K[eps]/(eps^c)`-module of rank `r`.
pub fn free_nilpotent<F: Field>(field: &F, c: usize, r: usize) -> Matrix<F> {
    let block = shift_block(field, c);
    let blocks: Vec<&Matrix<F>> = std::iter::repeat_n(&block, r).collect();
    Matrix::block_diag(field, &blocks)
}

/// Jordan decomposition of a nilpotent operator: returns a basis matrix `P`
/// whose columns are chains `g, Ng, N^2 g, ...` and the chain lengths in
/// decreasing order.
pub fn nilpotent_jordan<F: Field>(n_op: &Matrix<F>) -> (Matrix<F>, Vec<usize>) {
    let f = n_op.field().clone();
    let dim = n_op.rows();
    if dim == 0 {
        return (Matrix::zeros(&f, 0, 0), vec![]);
    }
    // kernels[t] = basis of ker N^t
    let mut kernels = vec![Matrix::zeros(&f, dim, 0)];
    let mut power = Matrix::identity(&f, dim);
    loop {
        power = power.mul(n_op);
        let k = power.nullspace();
        let done = k.cols() == dim;
        kernels.push(k);
        if done {
            break;
        }
        assert!(kernels.len() <= dim + 1, "operator is not nilpotent");
    }
    let top = kernels.len() - 1;
    let mut chains: Vec<(Matrix<F>, usize)> = Vec::new();
    let mut gens_above: Vec<Vec<F::Elem>> = Vec::new();
    for t in (1..=top).rev() {
        // S = ker N^{t-1} + N(previously chosen vectors living in ker N^{t+1})
        let mut s_cols: Vec<Matrix<F>> = vec![kernels[t - 1].clone()];
        for g in &gens_above {
            s_cols.push(n_op.mul(&Matrix::column(&f, g.clone())));
        }
        let refs: Vec<&Matrix<F>> = s_cols.iter().collect();
        let s = Matrix::hstack(&f, dim, &refs).column_basis();
        let aug = Matrix::hstack(&f, dim, &[&s, &kernels[t]]);
        let (_, pivots) = aug.rref();
        let mut new_above = Vec::new();
        for &p in pivots.iter().filter(|&&p| p >= s.cols()) {
            let g = kernels[t].col(p - s.cols());
            chains.push((Matrix::column(&f, g.clone()), t));
            new_above.push(g);
        }
        // the images under N of everything chosen so far sit at level t-1
        gens_above = gens_above.iter().map(|g| n_op.mul(&Matrix::column(&f, g.clone())).col(0)).collect();
        gens_above.extend(new_above);
    }
    let mut cols = Vec::new();
    let mut sizes = Vec::new();
    for (g, len) in chains {
        let mut v = g;
        for _ in 0..len {
            cols.push(v.clone());
            v = n_op.mul(&v);
        }
        sizes.push(len);
    }
    let refs: Vec<&Matrix<F>> = cols.iter().collect();
    let p = Matrix::hstack(&f, dim, &refs);
    (p, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    #[test]
    fn nullspace_is_annihilated() {
        let f = f7();
        let a = Matrix::from_i64(&f, 2, 4, &[1, 2, 3, 4, 2, 4, 6, 3]);
        let k = a.nullspace();
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
    }

    #[test]
    fn inverse_round_trip() {
        let q = Rationals;
        let a = Matrix::from_i64(&q, 3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(&q, 3));
        let sing = Matrix::from_i64(&q, 2, 2, &[1, 2, 2, 4]);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn complement_projects() {
        let f = f7();
        let w = Matrix::from_i64(&f, 3, 1, &[1, 1, 0]);
        let (proj, sec) = w.complement();
        assert!(proj.mul(&w).is_zero());
        assert_eq!(proj.mul(&sec), Matrix::identity(&f, 2));
    }

    #[test]
    fn jordan_of_mixed_operator() {
        let f = f7();
        // J_3 (+) J_1 conjugated by a random invertible matrix
        let j = Matrix::block_diag(&f, &[&shift_block(&f, 3), &shift_block(&f, 1)]);
        let s = Matrix::from_i64(&f, 4, 4, &[1, 2, 0, 1, 0, 1, 3, 0, 2, 0, 1, 1, 0, 0, 0, 1]);
        let n = s.inverse().unwrap().mul(&j).mul(&s);
        let (p, sizes) = nilpotent_jordan(&n);
        assert_eq!(sizes, vec![3, 1]);
        let conj = p.inverse().unwrap().mul(&n).mul(&p);
        assert_eq!(conj, j);
    }

    #[test]
    fn canonical_span_ignores_basis_choice() {
        let f = f7();
        let a = Matrix::from_i64(&f, 3, 2, &[1, 0, 0, 1, 2, 3]);
        let b = a.mul(&Matrix::from_i64(&f, 2, 2, &[2, 1, 1, 1]));
        assert_eq!(a.canonical_span(), b.canonical_span());
    }
}
