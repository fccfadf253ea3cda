//! Modules over `H(C,D,Ω)`: random locally free modules, projectives and
//! injectives from a path normal form, `Ext^1`, isomorphism and
//! indecomposability tests.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linsys::commutant;
use crate::matrix::{free_nilpotent, Matrix};
use crate::module::{Algebra, AlgebraKind, Module, VertexMaps};

/// Solution basis of `eps_head^a X = X eps_tail^b` for each arrow, with
/// `eps` in canonical form for the rank vector `r`. Over the rationals the
/// basis vectors are scaled to integers.
pub fn arrow_solution_spaces<F: Field>(alg: &Algebra, field: &F, r: &[i64]) -> Vec<Vec<Matrix<F>>> {
    let eps: Vec<Matrix<F>> = (0..alg.n()).map(|i| free_nilpotent(field, alg.ci(i), r[i] as usize)).collect();
    alg.arrows()
        .iter()
        .map(|a| {
            commutant(&eps[a.head].pow(a.head_exp), &eps[a.tail].pow(a.tail_exp))
                .into_iter()
                .map(|m| {
                    let mut data = m.to_vec();
                    field.clear_denominators(&mut data);
                    Matrix::from_vec(field, m.rows(), m.cols(), data)
                })
                .collect()
        })
        .collect()
}

/// Dimension of the affine space of arrow data for locally free modules
/// of rank `r` with fixed canonical `eps`.
pub fn arrow_solution_dim<F: Field>(alg: &Algebra, field: &F, r: &[i64]) -> usize {
    arrow_solution_spaces(alg, field, r).iter().map(Vec::len).sum()
}

/// Random locally free module of rank `r`: canonical `eps`, arrows a
/// random combination of the solution basis.
pub fn random_locally_free<F: Field, R: Rng + ?Sized>(alg: Arc<Algebra>, field: &F, r: &[i64], rng: &mut R) -> Module<F> {
    let dims: Vec<usize> = (0..alg.n()).map(|i| alg.ci(i) * r[i] as usize).collect();
    let spaces = arrow_solution_spaces(&alg, field, r);
    let mut m = Module::with_canonical_eps(alg.clone(), field, dims);
    for (idx, basis) in spaces.iter().enumerate() {
        let a = &alg.arrows()[idx];
        let mut acc = Matrix::zeros(field, m.dims()[a.head], m.dims()[a.tail]);
        for b in basis {
            acc = acc.add(&b.scale(&field.random(rng)));
        }
        m.set_arrow(idx, acc);
    }
    m
}

/// `Ext^1_H(M, N)` from the standard projective resolution, cross-checked
/// against `dim Hom - <rk M, rk N>` when `N` is locally free.
pub fn ext1_dim<F: Field>(m: &Module<F>, n: &Module<F>) -> Result<usize> {
    m.same_algebra(n)?;
    if m.alg().kind() != AlgebraKind::H {
        return Err(Error::SpecMismatch);
    }
    let rk_m = m.rank_vector()?;
    let (ext, hom) = ext_from_resolution(m, n);
    let hom_direct = m.hom_dim(n)?;
    if hom != hom_direct {
        return Err(Error::InternalMismatch(format!("Hom from resolution {hom} != intertwiner count {hom_direct}")));
    }
    if let Some(rk_n) = n.is_locally_free() {
        let predicted = hom as i64 - m.alg().euler_form(&rk_m, &rk_n);
        if predicted != ext as i64 {
            return Err(Error::InternalMismatch(format!("Ext^1 from resolution {ext} != Hom - <rk M, rk N> = {predicted}")));
        }
    }
    Ok(ext)
}

/// Returns `(dim Ext^1, dim Hom)` from the cokernel of
/// `Hom_S(M, N) -> ⊕_arrows Hom_{H_h}(_hH_t ⊗ M_t, N_h)`, without the
/// cross-checks of [`ext1_dim`].
pub fn ext_from_resolution<F: Field>(m: &Module<F>, n: &Module<F>) -> (usize, usize) {
    let alg = m.alg();
    let f = m.field();
    let nv = alg.n();
    let hom_s: Vec<Vec<Matrix<F>>> = (0..nv).map(|v| commutant(n.eps(v), m.eps(v))).collect();
    let hom_s_dim: usize = hom_s.iter().map(Vec::len).sum();
    let target_dim: usize =
        alg.arrows().iter().map(|a| commutant(&n.eps(a.head).pow(a.head_exp), &m.eps(a.tail).pow(a.tail_exp)).len()).sum();
    let mut images: Vec<Vec<F::Elem>> = Vec::with_capacity(hom_s_dim);
    for v in 0..nv {
        for phi in &hom_s[v] {
            let mut flat = Vec::new();
            for (idx, a) in alg.arrows().iter().enumerate() {
                let zero_t = Matrix::zeros(f, n.dims()[a.tail], m.dims()[a.tail]);
                let zero_h = Matrix::zeros(f, n.dims()[a.head], m.dims()[a.head]);
                let ft = if a.tail == v { phi } else { &zero_t };
                let fh = if a.head == v { phi } else { &zero_h };
                let d = n.arrow(idx).mul(ft).sub(&fh.mul(m.arrow(idx)));
                flat.extend(d.to_vec());
            }
            images.push(flat);
        }
    }
    let rank = rank_of_vectors(f, &images);
    (target_dim - rank, hom_s_dim - rank)
}

pub(crate) fn rank_of_vectors<F: Field>(f: &F, vecs: &[Vec<F::Elem>]) -> usize {
    if vecs.is_empty() || vecs[0].is_empty() {
        return 0;
    }
    let cols = vecs[0].len();
    let data = vecs.iter().flat_map(|v| v.iter().cloned()).collect();
    Matrix::from_vec(f, vecs.len(), cols, data).rank()
}

fn is_invertible_tuple<F: Field>(maps: &[Matrix<F>]) -> bool {
    maps.iter().all(|m| m.rows() == 0 || !m.field().is_zero(&m.det()))
}

fn combine<F: Field>(f: &F, basis: &[VertexMaps<F>], coeffs: &[F::Elem]) -> VertexMaps<F> {
    let mut acc: VertexMaps<F> = basis[0].iter().map(|m| Matrix::zeros(f, m.rows(), m.cols())).collect();
    for (b, c) in basis.iter().zip(coeffs) {
        if f.is_zero(c) {
            continue;
        }
        for (a, m) in acc.iter_mut().zip(b) {
            *a = a.add(&m.scale(c));
        }
    }
    acc
}

/// Iterates all coefficient vectors over a finite field of order `q`.
pub(crate) fn for_each_vector(q: u64, len: usize, mut f: impl FnMut(&[u64]) -> bool) {
    let mut v = vec![0u64; len];
    loop {
        if !f(&v) {
            return;
        }
        let mut k = 0;
        loop {
            if k == len {
                return;
            }
            v[k] += 1;
            if v[k] < q {
                break;
            }
            v[k] = 0;
            k += 1;
        }
    }
}

const EXHAUSTIVE_LIMIT: u64 = 200_000;

fn exhaustive_size(order: Option<u64>, m: usize) -> Option<u64> {
    let q = order?;
    let mut total = 1u64;
    for _ in 0..m {
        total = total.checked_mul(q)?;
        if total > EXHAUSTIVE_LIMIT {
            return None;
        }
    }
    Some(total)
}

/// Searches `Hom(M, N)` for an element invertible at every vertex.
pub fn find_isomorphism<F: Field, R: Rng + ?Sized>(m: &Module<F>, n: &Module<F>, rng: &mut R) -> Result<Option<VertexMaps<F>>> {
    m.same_algebra(n)?;
    if m.dims() != n.dims() {
        return Ok(None);
    }
    if m.is_zero() {
        return Ok(Some(vec![]));
    }
    let basis = m.hom_basis(n)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let f = m.field();
    for _ in 0..40 {
        let coeffs: Vec<F::Elem> = (0..basis.len()).map(|_| f.random(rng)).collect();
        let cand = combine(f, &basis, &coeffs);
        if is_invertible_tuple(&cand) {
            return Ok(Some(cand));
        }
    }
    if exhaustive_size(f.order(), basis.len()).is_some() {
        let mut found = None;
        for_each_vector(f.order().unwrap(), basis.len(), |v| {
            let coeffs: Vec<F::Elem> = v.iter().map(|&x| f.from_i64(x as i64)).collect();
            let cand = combine(f, &basis, &coeffs);
            if is_invertible_tuple(&cand) {
                found = Some(cand);
                return false;
            }
            true
        });
        return Ok(found);
    }
    for _ in 0..400 {
        let coeffs: Vec<F::Elem> = (0..basis.len()).map(|_| f.random(rng)).collect();
        let cand = combine(f, &basis, &coeffs);
        if is_invertible_tuple(&cand) {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// Isomorphism test: dimension and Hom-dimension filters, then a search
/// for an invertible homomorphism.
pub fn is_isomorphic<F: Field, R: Rng + ?Sized>(m: &Module<F>, n: &Module<F>, rng: &mut R) -> Result<bool> {
    m.same_algebra(n)?;
    if m.dims() != n.dims() {
        return Ok(false);
    }
    let end = m.hom_dim(m)?;
    if m.hom_dim(n)? != end || n.hom_dim(m)? != end || n.hom_dim(n)? != end {
        return Ok(false);
    }
    Ok(find_isomorphism(m, n, rng)?.is_some())
}

fn is_nilpotent_tuple<F: Field>(maps: &[Matrix<F>]) -> bool {
    maps.iter().all(|m| m.rows() == 0 || m.pow(m.rows()).is_zero())
}

/// Indecomposability via locality of `End(M)`: every endomorphism must be
/// nilpotent or invertible. Exhaustive over small finite fields, sampled
/// otherwise; a failing sample is a certificate of decomposability.
pub fn is_indecomposable<F: Field, R: Rng + ?Sized>(m: &Module<F>, rng: &mut R) -> Result<bool> {
    if m.is_zero() {
        return Ok(false);
    }
    let basis = m.hom_basis(m)?;
    if basis.len() == 1 {
        return Ok(true);
    }
    let f = m.field();
    let ok = |maps: &VertexMaps<F>| is_nilpotent_tuple(maps) || is_invertible_tuple(maps);
    if basis.iter().any(|b| !ok(b)) {
        return Ok(false);
    }
    if let Some(total) = exhaustive_size(f.order(), basis.len()) {
        if total <= 20_000 {
            let mut good = true;
            for_each_vector(f.order().unwrap(), basis.len(), |v| {
                let coeffs: Vec<F::Elem> = v.iter().map(|&x| f.from_i64(x as i64)).collect();
                if !ok(&combine(f, &basis, &coeffs)) {
                    good = false;
                }
                good
            });
            return Ok(good);
        }
    }
    for _ in 0..500 {
        let coeffs: Vec<F::Elem> = (0..basis.len()).map(|_| f.random(rng)).collect();
        if !ok(&combine(f, &basis, &coeffs)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A path `eps^{p_m} a_m ... a_1 eps^{p_0}` in normal form: every power
/// left of an arrow is below that arrow's head exponent and `p_0 < c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Path {
    start: usize,
    powers: Vec<usize>,
    arrows: Vec<usize>,
}

impl Path {
    fn end(&self, alg: &Algebra) -> usize {
        self.arrows.last().map_or(self.start, |&a| alg.arrows()[a].head)
    }
}

/// Rewrites `eps_h^a α -> α eps_t^b` from the left and drops paths with
/// `eps^{c}` at the start.
fn normalize(alg: &Algebra, start: usize, mut powers: Vec<usize>, arrows: Vec<usize>) -> Option<Path> {
    for k in (1..powers.len()).rev() {
        let a = &alg.arrows()[arrows[k - 1]];
        let q = powers[k] / a.head_exp;
        powers[k] %= a.head_exp;
        powers[k - 1] += q * a.tail_exp;
    }
    if powers[0] >= alg.ci(start) {
        return None;
    }
    Some(Path { start, powers, arrows })
}

/// Checks that `eps_h^{c_h} α` rewrites to zero for every arrow, the only
/// overlap between the rewriting rule and nilpotency.
pub fn check_rewriting_confluence(alg: &Algebra) -> Result<()> {
    for a in alg.arrows() {
        let ch = alg.ci(a.head);
        if !ch.is_multiple_of(a.head_exp) || (ch / a.head_exp) * a.tail_exp < alg.ci(a.tail) {
            return Err(Error::InternalMismatch(format!("critical pair for arrow {}->{} does not resolve", a.tail + 1, a.head + 1)));
        }
    }
    Ok(())
}

/// All normal-form paths starting at `i`.
fn paths_from(alg: &Algebra, i: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut stack: Vec<Path> = (0..alg.ci(i)).map(|p| Path { start: i, powers: vec![p], arrows: vec![] }).collect();
    while let Some(p) = stack.pop() {
        let end = p.end(alg);
        for (idx, a) in alg.arrows().iter().enumerate() {
            if a.tail != end {
                continue;
            }
            for top in 0..a.head_exp {
                let mut powers = p.powers.clone();
                powers.push(top);
                let mut arrows = p.arrows.clone();
                arrows.push(idx);
                if let Some(q) = normalize(alg, i, powers, arrows) {
                    if q.powers.len() == p.powers.len() + 1 && q.powers[q.powers.len() - 1] == top {
                        stack.push(q);
                    }
                }
            }
        }
        out.push(p);
    }
    out
}

struct PathBasis {
    by_vertex: Vec<Vec<Path>>,
    index: HashMap<Path, (usize, usize)>,
}

impl PathBasis {
    fn new(alg: &Algebra, paths: Vec<Path>, key: impl Fn(&Path) -> usize) -> Self {
        let mut by_vertex: Vec<Vec<Path>> = vec![Vec::new(); alg.n()];
        for p in paths {
            by_vertex[key(&p)].push(p);
        }
        for v in &mut by_vertex {
            v.sort_by(|a, b| (a.arrows.len(), &a.arrows, &a.powers).cmp(&(b.arrows.len(), &b.arrows, &b.powers)));
        }
        let mut index = HashMap::new();
        for (v, list) in by_vertex.iter().enumerate() {
            for (k, p) in list.iter().enumerate() {
                index.insert(p.clone(), (v, k));
            }
        }
        Self { by_vertex, index }
    }

    fn dims(&self) -> Vec<usize> {
        self.by_vertex.iter().map(Vec::len).collect()
    }
}

/// The indecomposable projective `H e_i`.
pub fn projective_module<F: Field>(alg: Arc<Algebra>, field: &F, i: usize) -> Result<Module<F>> {
    alg.datum().check_vertex(i)?;
    if alg.kind() != AlgebraKind::H {
        return Err(Error::SpecMismatch);
    }
    check_rewriting_confluence(&alg)?;
    let basis = PathBasis::new(&alg, paths_from(&alg, i), |p| p.end(&alg));
    let dims = basis.dims();
    let mut eps: Vec<Matrix<F>> = dims.iter().map(|&d| Matrix::zeros(field, d, d)).collect();
    for (v, list) in basis.by_vertex.iter().enumerate() {
        for (k, p) in list.iter().enumerate() {
            let mut powers = p.powers.clone();
            *powers.last_mut().unwrap() += 1;
            if let Some(q) = normalize(&alg, i, powers, p.arrows.clone()) {
                let (_, r) = basis.index[&q];
                eps[v].set(r, k, field.one());
            }
        }
    }
    let mut arrows = Vec::with_capacity(alg.arrows().len());
    for (idx, a) in alg.arrows().iter().enumerate() {
        let mut m = Matrix::zeros(field, dims[a.head], dims[a.tail]);
        for (k, p) in basis.by_vertex[a.tail].iter().enumerate() {
            let mut powers = p.powers.clone();
            powers.push(0);
            let mut arr = p.arrows.clone();
            arr.push(idx);
            if let Some(q) = normalize(&alg, i, powers, arr) {
                let (_, r) = basis.index[&q];
                m.set(r, k, field.one());
            }
        }
        arrows.push(m);
    }
    let mut module = Module::new(alg, field, dims, eps, arrows)?;
    module.jordan_normalize_all();
    Ok(module)
}

/// The indecomposable injective `D(e_i H)`.
pub fn injective_module<F: Field>(alg: Arc<Algebra>, field: &F, i: usize) -> Result<Module<F>> {
    alg.datum().check_vertex(i)?;
    if alg.kind() != AlgebraKind::H {
        return Err(Error::SpecMismatch);
    }
    check_rewriting_confluence(&alg)?;
    let all: Vec<Path> = (0..alg.n()).flat_map(|v| paths_from(&alg, v)).filter(|p| p.end(&alg) == i).collect();
    let basis = PathBasis::new(&alg, all, |p| p.start);
    let dims = basis.dims();
    // right multiplication, then transpose
    let mut eps = Vec::with_capacity(alg.n());
    for (v, list) in basis.by_vertex.iter().enumerate() {
        let mut r = Matrix::zeros(field, dims[v], dims[v]);
        for (k, p) in list.iter().enumerate() {
            let mut powers = p.powers.clone();
            powers[0] += 1;
            if let Some(q) = normalize(&alg, v, powers, p.arrows.clone()) {
                let (_, row) = basis.index[&q];
                r.set(row, k, field.one());
            }
        }
        eps.push(r.transpose());
    }
    let mut arrows = Vec::with_capacity(alg.arrows().len());
    for (idx, a) in alg.arrows().iter().enumerate() {
        // x ∈ e_i H e_head  ↦  x·α ∈ e_i H e_tail
        let mut r = Matrix::zeros(field, dims[a.tail], dims[a.head]);
        for (k, p) in basis.by_vertex[a.head].iter().enumerate() {
            let mut powers = vec![0];
            powers.extend(p.powers.iter().copied());
            let mut arr = vec![idx];
            arr.extend(p.arrows.iter().copied());
            if let Some(q) = normalize(&alg, a.tail, powers, arr) {
                let (_, row) = basis.index[&q];
                r.set(row, k, field.one());
            }
        }
        arrows.push(r.transpose());
    }
    let mut module = Module::new(alg, field, dims, eps, arrows)?;
    module.jordan_normalize_all();
    Ok(module)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{named_datum, Orientation};
    use crate::field::{PrimeField, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b2_alg() -> Arc<Algebra> {
        let d = named_datum("B2").unwrap();
        Algebra::h(&d, &Orientation::new(&d, [(0, 1)]).unwrap())
    }

    #[test]
    fn arrow_space_dimension_b2() {
        let alg = b2_alg();
        let f = PrimeField::new(7).unwrap();
        assert_eq!(arrow_solution_dim(&alg, &f, &[1, 1]), 2);
    }

    #[test]
    fn random_modules_are_valid_and_reproducible() {
        let alg = b2_alg();
        let f = PrimeField::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_locally_free(alg.clone(), &f, &[2, 1], &mut rng);
        assert!(m.check_relations().is_empty());
        assert_eq!(m.is_locally_free(), Some(vec![2, 1]));
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(random_locally_free(alg.clone(), &f, &[2, 1], &mut rng2), m);
        let z = random_locally_free(alg, &f, &[0, 0], &mut rng);
        assert!(z.is_zero());
    }

    #[test]
    fn projectives_b2() {
        let alg = b2_alg();
        let q = Rationals;
        let p1 = projective_module(alg.clone(), &q, 0).unwrap();
        assert_eq!(p1.is_locally_free(), Some(vec![1, 0]));
        let p2 = projective_module(alg.clone(), &q, 1).unwrap();
        assert_eq!(p2.dims(), &[2, 1]);
        assert_eq!(p2.is_locally_free(), Some(vec![1, 1]));
        assert!(p2.check_relations().is_empty());
        let i1 = injective_module(alg.clone(), &q, 0).unwrap();
        assert!(i1.check_relations().is_empty());
        assert_eq!(i1.is_locally_free(), Some(vec![1, 2]));
        let i2 = injective_module(alg, &q, 1).unwrap();
        assert_eq!(i2.is_locally_free(), Some(vec![0, 1]));
    }

    #[test]
    fn ext_of_simples() {
        let alg = b2_alg();
        let f = PrimeField::new(5).unwrap();
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        let e2 = Module::generalized_simple(alg.clone(), &f, 1).unwrap();
        assert_eq!(ext1_dim(&e1, &e1).unwrap(), 0);
        assert_eq!(ext1_dim(&e2, &e2).unwrap(), 0);
        // <α_2, α_1> = -2: two independent extensions of E_2 by E_1
        assert_eq!(ext1_dim(&e2, &e1).unwrap(), 2);
        assert_eq!(ext1_dim(&e1, &e2).unwrap(), 0);
    }

    #[test]
    fn iso_and_indecomposable() {
        let alg = b2_alg();
        let f = PrimeField::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        let two = e1.direct_sum(&e1).unwrap();
        assert!(is_isomorphic(&e1, &e1, &mut rng).unwrap());
        assert!(!is_isomorphic(&e1, &two, &mut rng).unwrap());
        assert!(is_indecomposable(&e1, &mut rng).unwrap());
        assert!(!is_indecomposable(&two, &mut rng).unwrap());
        let p2 = projective_module(alg, &f, 1).unwrap();
        assert!(is_indecomposable(&p2, &mut rng).unwrap());
    }
}
