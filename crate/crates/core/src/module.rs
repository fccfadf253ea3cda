//! Finite-dimensional modules over `H(C,D,Ω)` and `Π(C,D)` given by vertex
//! spaces, nilpotent loop matrices and arrow matrices.

use std::sync::Arc;

use crate::cartan::{CartanDatum, Orientation};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rationals};
use crate::linsys::BlockSystem;
use crate::matrix::{nilpotent_jordan, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum AlgebraKind {
    /// Generalized path algebra: arrows of Ω only.
    H,
    /// Generalized preprojective algebra: arrows of Ω and their reverses.
    Pi,
}

/// One arrow `tail -> head` subject to `eps_head^head_exp A = A eps_tail^tail_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArrowSpec {
    pub head: usize,
    pub tail: usize,
    pub copy: usize,
    pub head_exp: usize,
    pub tail_exp: usize,
    /// True for the arrows added in the double quiver (pointing against Ω).
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Algebra {
    datum: CartanDatum,
    omega: Orientation,
    kind: AlgebraKind,
    arrows: Vec<ArrowSpec>,
}

impl Algebra {
    pub fn new(datum: CartanDatum, omega: Orientation, kind: AlgebraKind) -> Arc<Self> {
        let mut arrows = Vec::new();
        for (i, j) in omega.pairs() {
            let l = datum.lcm(i, j);
            for copy in 0..datum.g(i, j) as usize {
                arrows.push(ArrowSpec {
                    head: i,
                    tail: j,
                    copy,
                    head_exp: (l / datum.d()[j]) as usize,
                    tail_exp: (l / datum.d()[i]) as usize,
                    reversed: false,
                });
                if kind == AlgebraKind::Pi {
                    arrows.push(ArrowSpec {
                        head: j,
                        tail: i,
                        copy,
                        head_exp: (l / datum.d()[i]) as usize,
                        tail_exp: (l / datum.d()[j]) as usize,
                        reversed: true,
                    });
                }
            }
        }
        arrows.sort_by_key(|a| (a.head, a.tail, a.copy));
        Arc::new(Self { datum, omega, kind, arrows })
    }

    pub fn h(datum: &CartanDatum, omega: &Orientation) -> Arc<Self> {
        Self::new(datum.clone(), omega.clone(), AlgebraKind::H)
    }

    pub fn pi(datum: &CartanDatum, omega: &Orientation) -> Arc<Self> {
        Self::new(datum.clone(), omega.clone(), AlgebraKind::Pi)
    }

    pub fn datum(&self) -> &CartanDatum {
        &self.datum
    }

    pub fn omega(&self) -> &Orientation {
        &self.omega
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.datum.n()
    }

    pub fn arrows(&self) -> &[ArrowSpec] {
        &self.arrows
    }

    pub fn arrow_index(&self, head: usize, tail: usize, copy: usize) -> Option<usize> {
        self.arrows.iter().position(|a| a.head == head && a.tail == tail && a.copy == copy)
    }

    /// The reverse arrow with the same copy index, if present.
    pub fn partner(&self, idx: usize) -> Option<usize> {
        let a = &self.arrows[idx];
        self.arrow_index(a.tail, a.head, a.copy)
    }

    /// Same datum and kind, different orientation.
    pub fn with_orientation(&self, omega: Orientation) -> Arc<Self> {
        Self::new(self.datum.clone(), omega, self.kind)
    }

    pub fn with_kind(&self, kind: AlgebraKind) -> Arc<Self> {
        Self::new(self.datum.clone(), self.omega.clone(), kind)
    }

    pub fn ci(&self, i: usize) -> usize {
        self.datum.ci(i)
    }

    pub fn euler_form(&self, a: &[i64], b: &[i64]) -> i64 {
        self.datum.euler_form(&self.omega, a, b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Module<F: Field> {
    alg: Arc<Algebra>,
    field: F,
    dims: Vec<usize>,
    eps: Vec<Matrix<F>>,
    arrows: Vec<Matrix<F>>,
}

/// A vertex-indexed tuple of linear maps, e.g. a homomorphism.
pub type VertexMaps<F> = Vec<Matrix<F>>;

impl<F: Field> Module<F> {
    pub fn new(alg: Arc<Algebra>, field: &F, dims: Vec<usize>, eps: Vec<Matrix<F>>, arrows: Vec<Matrix<F>>) -> Result<Self> {
        let n = alg.n();
        if dims.len() != n || eps.len() != n || arrows.len() != alg.arrows().len() {
            return Err(Error::ShapeMismatch("wrong number of vertices or arrows".into()));
        }
        for (i, e) in eps.iter().enumerate() {
            if e.shape() != (dims[i], dims[i]) {
                return Err(Error::ShapeMismatch(format!("eps_{} has shape {:?}, expected {}x{}", i + 1, e.shape(), dims[i], dims[i])));
            }
        }
        for (a, m) in alg.arrows().iter().zip(&arrows) {
            if m.shape() != (dims[a.head], dims[a.tail]) {
                return Err(Error::ShapeMismatch(format!(
                    "arrow {}->{} has shape {:?}, expected {}x{}",
                    a.tail + 1,
                    a.head + 1,
                    m.shape(),
                    dims[a.head],
                    dims[a.tail]
                )));
            }
        }
        Ok(Self { alg, field: field.clone(), dims, eps, arrows })
    }

    pub fn zero(alg: Arc<Algebra>, field: &F) -> Self {
        let n = alg.n();
        let eps = (0..n).map(|_| Matrix::zeros(field, 0, 0)).collect();
        let arrows = alg.arrows().iter().map(|_| Matrix::zeros(field, 0, 0)).collect();
        Self { alg, field: field.clone(), dims: vec![0; n], eps, arrows }
    }

    /// `E_i`: the free rank-one `H_i`-module at vertex `i`, all arrows zero.
    pub fn generalized_simple(alg: Arc<Algebra>, field: &F, i: usize) -> Result<Self> {
        alg.datum().check_vertex(i)?;
        let n = alg.n();
        let mut dims = vec![0; n];
        dims[i] = alg.ci(i);
        Ok(Self::with_canonical_eps(alg, field, dims))
    }

    /// Zero arrows and `eps_i` in rectangular Jordan form; `dims[i]` must be
    /// divisible by `c_i`.
    pub fn with_canonical_eps(alg: Arc<Algebra>, field: &F, dims: Vec<usize>) -> Self {
        let eps = dims.iter().enumerate().map(|(i, &d)| crate::matrix::free_nilpotent(field, alg.ci(i), d / alg.ci(i))).collect();
        let arrows = alg.arrows().iter().map(|a| Matrix::zeros(field, dims[a.head], dims[a.tail])).collect();
        Self { alg, field: field.clone(), dims, eps, arrows }
    }

    pub fn alg(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn eps(&self, i: usize) -> &Matrix<F> {
        &self.eps[i]
    }

    pub fn arrow(&self, idx: usize) -> &Matrix<F> {
        &self.arrows[idx]
    }

    pub fn arrow_matrices(&self) -> &[Matrix<F>] {
        &self.arrows
    }

    pub fn set_arrow(&mut self, idx: usize, m: Matrix<F>) {
        assert_eq!(m.shape(), self.arrows[idx].shape());
        self.arrows[idx] = m;
    }

    pub fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.alg == other.alg && self.field == other.field {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    /// Violated defining relations, described in words. Empty when the
    /// module is valid.
    pub fn check_relations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.alg.n() {
            let c = self.alg.ci(i);
            if !self.eps[i].pow(c).is_zero() {
                out.push(format!("eps_{}^{} != 0", i + 1, c));
            }
        }
        for (a, m) in self.alg.arrows().iter().zip(&self.arrows) {
            let lhs = self.eps[a.head].pow(a.head_exp).mul(m);
            let rhs = m.mul(&self.eps[a.tail].pow(a.tail_exp));
            if lhs != rhs {
                out.push(format!(
                    "eps_{}^{} A != A eps_{}^{} for arrow {}->{} (copy {})",
                    a.head + 1,
                    a.head_exp,
                    a.tail + 1,
                    a.tail_exp,
                    a.tail + 1,
                    a.head + 1,
                    a.copy + 1
                ));
            }
        }
        if self.alg.kind() == AlgebraKind::Pi {
            for k in 0..self.alg.n() {
                if !self.mesh_at(k).is_zero() {
                    out.push(format!("mesh relation fails at vertex {}", k + 1));
                }
            }
        }
        out
    }

    /// `sum_j sgn(k,j) sum_s eps_k^s A_{kj} A_{jk} eps_k^{a-1-s}` at vertex `k`.
    pub fn mesh_at(&self, k: usize) -> Matrix<F> {
        let f = &self.field;
        let mut acc = Matrix::zeros(f, self.dims[k], self.dims[k]);
        for (idx, a) in self.alg.arrows().iter().enumerate() {
            if a.head != k {
                continue;
            }
            let Some(back) = self.alg.partner(idx) else { continue };
            let comp = self.arrows[idx].mul(&self.arrows[back]);
            let term = mesh_sum(&self.eps[k], &comp, a.head_exp);
            acc = if a.reversed { acc.sub(&term) } else { acc.add(&term) };
        }
        acc
    }

    /// Rank vector when every `e_i M` is free over `H_i`.
    pub fn is_locally_free(&self) -> Option<Vec<i64>> {
        let mut r = Vec::with_capacity(self.alg.n());
        for i in 0..self.alg.n() {
            let c = self.alg.ci(i);
            let d = self.dims[i];
            if !d.is_multiple_of(c) {
                return None;
            }
            let mut power = Matrix::identity(&self.field, d);
            for t in 1..=c {
                power = power.mul(&self.eps[i]);
                if power.rank() != (c - t) * d / c {
                    return None;
                }
            }
            r.push((d / c) as i64);
        }
        Some(r)
    }

    pub fn rank_vector(&self) -> Result<Vec<i64>> {
        self.is_locally_free().ok_or(Error::NotLocallyFree)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let f = &self.field;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let eps = self.eps.iter().zip(&other.eps).map(|(a, b)| Matrix::block_diag(f, &[a, b])).collect();
        let arrows = self.arrows.iter().zip(&other.arrows).map(|(a, b)| Matrix::block_diag(f, &[a, b])).collect();
        Ok(Self { alg: self.alg.clone(), field: f.clone(), dims, eps, arrows })
    }

    pub fn direct_power(&self, k: usize) -> Self {
        let mut acc = Self::zero(self.alg.clone(), &self.field);
        for _ in 0..k {
            acc = acc.direct_sum(self).unwrap();
        }
        acc
    }

    /// Negates all non-loop arrows.
    pub fn twist(&self) -> Self {
        let mut out = self.clone();
        out.arrows = self.arrows.iter().map(|m| m.neg()).collect();
        out
    }

    /// Replaces the basis at `v` by the columns of the invertible matrix `p`.
    pub fn change_basis(&mut self, v: usize, p: &Matrix<F>) {
        let pinv = p.inverse().expect("change of basis must be invertible");
        self.eps[v] = pinv.mul(&self.eps[v]).mul(p);
        for (idx, a) in self.alg.arrows().iter().enumerate() {
            if a.head == v {
                self.arrows[idx] = pinv.mul(&self.arrows[idx]);
            }
            if a.tail == v {
                self.arrows[idx] = self.arrows[idx].mul(p);
            }
        }
    }

    /// Puts `eps_v` into Jordan form with chains `g, eps g, ...` listed
    /// consecutively; returns the chain lengths.
    pub fn jordan_normalize(&mut self, v: usize) -> Vec<usize> {
        if self.dims[v] == 0 {
            return vec![];
        }
        let (p, sizes) = nilpotent_jordan(&self.eps[v]);
        self.change_basis(v, &p);
        sizes
    }

    pub fn jordan_normalize_all(&mut self) {
        for v in 0..self.alg.n() {
            self.jordan_normalize(v);
        }
    }

    /// Submodule spanned at each vertex by the columns of `basis[v]`.
    pub fn submodule(&self, basis: &[Matrix<F>]) -> Result<Self> {
        let not_stable = || Error::InternalMismatch("subspace is not a submodule".into());
        let dims: Vec<usize> = basis.iter().map(|b| b.cols()).collect();
        let mut eps = Vec::with_capacity(dims.len());
        for (v, b) in basis.iter().enumerate() {
            eps.push(b.solve(&self.eps[v].mul(b)).ok_or_else(not_stable)?);
        }
        let mut arrows = Vec::with_capacity(self.arrows.len());
        for (a, m) in self.alg.arrows().iter().zip(&self.arrows) {
            arrows.push(basis[a.head].solve(&m.mul(&basis[a.tail])).ok_or_else(not_stable)?);
        }
        Ok(Self { alg: self.alg.clone(), field: self.field.clone(), dims, eps, arrows })
    }

    /// Quotient by the submodule spanned by the columns of `basis[v]`.
    pub fn quotient(&self, basis: &[Matrix<F>]) -> Self {
        let parts: Vec<(Matrix<F>, Matrix<F>)> = basis.iter().map(|b| b.complement()).collect();
        let dims = parts.iter().map(|(p, _)| p.rows()).collect();
        let eps = parts.iter().enumerate().map(|(v, (p, s))| p.mul(&self.eps[v]).mul(s)).collect();
        let arrows = self.alg.arrows().iter().zip(&self.arrows).map(|(a, m)| parts[a.head].0.mul(m).mul(&parts[a.tail].1)).collect();
        Self { alg: self.alg.clone(), field: self.field.clone(), dims, eps, arrows }
    }

    /// Basis of `Hom(self, other)` as vertex tuples `f_v: M_v -> N_v`.
    pub fn hom_basis(&self, other: &Self) -> Result<Vec<VertexMaps<F>>> {
        self.same_algebra(other)?;
        Ok(self.hom_system(other, true).solve())
    }

    pub fn hom_dim(&self, other: &Self) -> Result<usize> {
        self.same_algebra(other)?;
        let sys = self.hom_system(other, true);
        if sys.num_unknowns() == 0 {
            return Ok(0);
        }
        Ok(sys.num_unknowns() - sys.matrix().rank())
    }

    /// Intertwiner equations; arrows are included when `with_arrows`.
    pub(crate) fn hom_system(&self, other: &Self, with_arrows: bool) -> BlockSystem<F> {
        let f = &self.field;
        let n = self.alg.n();
        let shapes = (0..n).map(|v| (other.dims[v], self.dims[v])).collect();
        let mut sys = BlockSystem::new(f, shapes);
        for v in 0..n {
            sys.add_commutation(v, &other.eps[v], v, &self.eps[v]);
        }
        if with_arrows {
            for (idx, a) in self.alg.arrows().iter().enumerate() {
                let id_t = Matrix::identity(f, self.dims[a.tail]);
                let neg_h = Matrix::identity(f, other.dims[a.head]).neg();
                sys.add(&[(a.tail, &other.arrows[idx], &id_t), (a.head, &neg_h, &self.arrows[idx])]);
            }
        }
        sys
    }

    /// Checks that `maps` intertwines every loop and arrow.
    pub fn is_homomorphism(&self, other: &Self, maps: &[Matrix<F>]) -> bool {
        let n = self.alg.n();
        (0..n).all(|v| maps[v].mul(&self.eps[v]) == other.eps[v].mul(&maps[v]))
            && self
                .alg
                .arrows()
                .iter()
                .enumerate()
                .all(|(idx, a)| maps[a.head].mul(&self.arrows[idx]) == other.arrows[idx].mul(&maps[a.tail]))
    }

    /// The same data viewed over another orientation or algebra kind, with
    /// arrows matched by `(head, tail, copy)`; missing arrows are zero.
    pub fn transport(&self, alg: Arc<Algebra>) -> Self {
        let arrows = alg
            .arrows()
            .iter()
            .map(|a| match self.alg.arrow_index(a.head, a.tail, a.copy) {
                Some(idx) => self.arrows[idx].clone(),
                None => Matrix::zeros(&self.field, self.dims[a.head], self.dims[a.tail]),
            })
            .collect();
        Self { alg, field: self.field.clone(), dims: self.dims.clone(), eps: self.eps.clone(), arrows }
    }

    /// Builds a module from arrow matrices keyed by `(head, tail, copy)`.
    pub fn from_parts(
        alg: Arc<Algebra>,
        field: &F,
        dims: Vec<usize>,
        eps: Vec<Matrix<F>>,
        keyed: &[((usize, usize, usize), Matrix<F>)],
    ) -> Result<Self> {
        let mut arrows = Vec::with_capacity(alg.arrows().len());
        for a in alg.arrows() {
            let m = keyed
                .iter()
                .find(|(k, _)| *k == (a.head, a.tail, a.copy))
                .map(|(_, m)| m.clone())
                .unwrap_or_else(|| Matrix::zeros(field, dims[a.head], dims[a.tail]));
            arrows.push(m);
        }
        Self::new(alg, field, dims, eps, arrows)
    }
}

impl Module<Rationals> {
    /// Reduction of an integral model modulo `p`.
    pub fn reduce(&self, target: &PrimeField) -> Result<Module<PrimeField>> {
        let eps = self.eps.iter().map(|m| m.reduce(target)).collect::<Result<_>>()?;
        let arrows = self.arrows.iter().map(|m| m.reduce(target)).collect::<Result<_>>()?;
        Ok(Module { alg: self.alg.clone(), field: *target, dims: self.dims.clone(), eps, arrows })
    }
}

/// `sum_{s<a} E^s X E^{a-1-s}`.
pub fn mesh_sum<F: Field>(e: &Matrix<F>, x: &Matrix<F>, a: usize) -> Matrix<F> {
    let f = e.field();
    let mut acc = Matrix::zeros(f, x.rows(), x.cols());
    let mut left = Matrix::identity(f, e.rows());
    for s in 0..a {
        let right = e.pow(a - 1 - s);
        acc = acc.add(&left.mul(x).mul(&right));
        left = left.mul(e);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::named_datum;
    use crate::field::PrimeField;

    fn b2_alg() -> Arc<Algebra> {
        let d = named_datum("B2").unwrap();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        Algebra::h(&d, &o)
    }

    #[test]
    fn simple_modules() {
        let alg = b2_alg();
        let f = PrimeField::new(5).unwrap();
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        assert_eq!(e1.dims(), &[2, 0]);
        assert!(e1.check_relations().is_empty());
        assert_eq!(e1.is_locally_free(), Some(vec![1, 0]));
        let e2 = Module::generalized_simple(alg.clone(), &f, 1).unwrap();
        assert_eq!(e2.dims(), &[0, 1]);
        let sum = e1.direct_sum(&e2).unwrap();
        assert_eq!(sum.dims(), &[2, 1]);
        assert_eq!(e1.direct_sum(&e1).unwrap().is_locally_free(), Some(vec![2, 0]));
    }

    #[test]
    fn relation_violation_is_named() {
        let alg = b2_alg();
        let f = PrimeField::new(5).unwrap();
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        let bad = Module::new(alg, &f, vec![2, 0], vec![Matrix::identity(&f, 2), Matrix::zeros(&f, 0, 0)], e1.arrows.clone()).unwrap();
        assert_eq!(bad.check_relations(), vec!["eps_1^2 != 0".to_string()]);
    }

    #[test]
    fn non_free_vertex() {
        let alg = b2_alg();
        let f = PrimeField::new(5).unwrap();
        let m =
            Module::new(alg.clone(), &f, vec![1, 0], vec![Matrix::zeros(&f, 1, 1), Matrix::zeros(&f, 0, 0)], vec![Matrix::zeros(&f, 1, 0)])
                .unwrap();
        assert!(m.check_relations().is_empty());
        assert_eq!(m.is_locally_free(), None);
    }

    #[test]
    fn hom_dims_of_simples() {
        let alg = b2_alg();
        let f = PrimeField::new(7).unwrap();
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        let e2 = Module::generalized_simple(alg, &f, 1).unwrap();
        assert_eq!(e1.hom_dim(&e1).unwrap(), 2);
        assert_eq!(e1.hom_dim(&e2).unwrap(), 0);
        for h in e1.hom_basis(&e1).unwrap() {
            assert!(e1.is_homomorphism(&e1, &h));
        }
    }
}
