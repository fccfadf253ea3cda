//! Homogeneous linear systems whose unknowns are matrices.
//!
//! Each equation is `sum_k L_k · V_{b_k} · R_k = 0` for unknown blocks `V_b`
//! of fixed shapes. Solutions are returned as tuples of blocks.

use crate::field::Field;
use crate::matrix::Matrix;

pub struct BlockSystem<F: Field> {
    field: F,
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    total: usize,
    rows: Vec<Matrix<F>>,
}

impl<F: Field> BlockSystem<F> {
    pub fn new(field: &F, shapes: Vec<(usize, usize)>) -> Self {
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut total = 0;
        for &(r, c) in &shapes {
            offsets.push(total);
            total += r * c;
        }
        Self { field: field.clone(), shapes, offsets, total, rows: Vec::new() }
    }

    pub fn num_unknowns(&self) -> usize {
        self.total
    }

    /// Adds the matrix equation `sum (L · V_b · R) = 0`.
    pub fn add(&mut self, terms: &[(usize, &Matrix<F>, &Matrix<F>)]) {
        let Some(&(_, l0, r0)) = terms.first() else { return };
        let (out_r, out_c) = (l0.rows(), r0.cols());
        if out_r * out_c == 0 {
            return;
        }
        let f = &self.field;
        let mut eq = Matrix::zeros(f, out_r * out_c, self.total);
        for &(b, l, r) in terms {
            let (vr, vc) = self.shapes[b];
            assert_eq!((l.rows(), l.cols(), r.rows(), r.cols()), (out_r, vr, vc, out_c), "block equation shape");
            let off = self.offsets[b];
            // coefficient of V[x][y] in (L V R)[a][d] is L[a][x] R[y][d]
            for a in 0..out_r {
                for x in 0..vr {
                    let lax = l.get(a, x);
                    if f.is_zero(lax) {
                        continue;
                    }
                    for y in 0..vc {
                        for d in 0..out_c {
                            let ryd = r.get(y, d);
                            if f.is_zero(ryd) {
                                continue;
                            }
                            let row = a * out_c + d;
                            let col = off + x * vc + y;
                            let v = f.add(eq.get(row, col), &f.mul(lax, ryd));
                            eq.set(row, col, v);
                        }
                    }
                }
            }
        }
        self.rows.push(eq);
    }

    /// Adds `L · V_b - V_c · R = 0`, the usual intertwining condition.
    pub fn add_commutation(&mut self, b: usize, l: &Matrix<F>, c: usize, r: &Matrix<F>) {
        let f = &self.field;
        let id_b = Matrix::identity(f, self.shapes[b].1);
        let neg = Matrix::identity(f, self.shapes[c].0).neg();
        self.add(&[(b, l, &id_b), (c, &neg, r)]);
    }

    pub fn matrix(&self) -> Matrix<F> {
        let refs: Vec<&Matrix<F>> = self.rows.iter().collect();
        Matrix::vstack(&self.field, self.total, &refs)
    }

    /// A basis of the solution space, each element split into blocks.
    pub fn solve(&self) -> Vec<Vec<Matrix<F>>> {
        let kernel = if self.rows.is_empty() { Matrix::identity(&self.field, self.total) } else { self.matrix().nullspace() };
        (0..kernel.cols()).map(|k| self.split(&kernel.col(k))).collect()
    }

    pub fn split(&self, v: &[F::Elem]) -> Vec<Matrix<F>> {
        self.shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(r, c), &off)| Matrix::from_vec(&self.field, r, c, v[off..off + r * c].to_vec()))
            .collect()
    }

    pub fn flatten(&self, blocks: &[Matrix<F>]) -> Vec<F::Elem> {
        let mut v = Vec::with_capacity(self.total);
        for b in blocks {
            v.extend(b.data().iter().cloned());
        }
        v
    }
}

/// Solution space of `L · X = X · R` for a single unknown block.
pub fn commutant<F: Field>(l: &Matrix<F>, r: &Matrix<F>) -> Vec<Matrix<F>> {
    let f = l.field();
    let mut sys = BlockSystem::new(f, vec![(l.cols(), r.rows())]);
    sys.add_commutation(0, l, 0, r);
    sys.solve().into_iter().map(|mut v| v.pop().unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::matrix::shift_block;

    #[test]
    fn centralizer_of_jordan_block_is_polynomials() {
        let f = PrimeField::new(5).unwrap();
        let j = shift_block(&f, 3);
        let sols = commutant(&j, &j);
        assert_eq!(sols.len(), 3);
        for s in sols {
            assert_eq!(j.mul(&s), s.mul(&j));
        }
    }

    #[test]
    fn two_block_system() {
        let f = PrimeField::new(7).unwrap();
        // X: 1x2, Y: 1x2 with X = Y and X·[1 1]^T = 0
        let mut sys = BlockSystem::new(&f, vec![(1, 2), (1, 2)]);
        let id1 = Matrix::identity(&f, 1);
        let id2 = Matrix::identity(&f, 2);
        sys.add_commutation(0, &id1, 1, &id2);
        let ones = Matrix::from_i64(&f, 2, 1, &[1, 1]);
        sys.add(&[(0, &id1, &ones)]);
        let sols = sys.solve();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0][0], sols[0][1]);
    }
}
