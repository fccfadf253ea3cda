//! Modules over the generalized preprojective algebra `Π(C,D)`: the
//! embedding of `H`-modules, `fac_k`/`sub_k` partition types, E-filtered
//! and crystal predicates, random E-filtered modules and `Hom`/`Ext^1`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::hmod::{for_each_vector, rank_of_vectors};
use crate::linsys::commutant;
use crate::matrix::{nilpotent_jordan, Matrix};
use crate::module::{Algebra, AlgebraKind, Module};

/// Jordan type of `eps_k` on an `H_k`-module, parts in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionType {
    pub parts: Vec<usize>,
}

impl PartitionType {
    fn of(eps: &Matrix<impl Field>) -> Self {
        if eps.rows() == 0 {
            return Self { parts: vec![] };
        }
        let (_, mut parts) = nilpotent_jordan(eps);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    /// Rank when the module is free over `K[ε]/(ε^c)`.
    pub fn free_rank(&self, c: usize) -> Option<usize> {
        self.parts.iter().all(|&p| p == c).then_some(self.parts.len())
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().sum()
    }
}

fn require_pi<F: Field>(m: &Module<F>) -> Result<()> {
    if m.alg().kind() == AlgebraKind::Pi {
        Ok(())
    } else {
        Err(Error::SpecMismatch)
    }
}

/// Views an `H`-module as a `Π`-module with zero reversed arrows.
pub fn from_h_module<F: Field>(m: &Module<F>) -> Result<Module<F>> {
    if m.alg().kind() != AlgebraKind::H {
        return Err(Error::SpecMismatch);
    }
    Ok(m.transport(m.alg().with_kind(AlgebraKind::Pi)))
}

/// Forgets the reversed arrows.
pub fn restrict_to_h<F: Field>(m: &Module<F>) -> Module<F> {
    m.transport(m.alg().with_kind(AlgebraKind::H))
}

/// Basis of `Im(M_{k,in})`, the `H_k`-span of all arrows ending at `k`.
pub fn image_in<F: Field>(m: &Module<F>, k: usize) -> Matrix<F> {
    let f = m.field();
    let mut gens = Vec::new();
    for (idx, a) in m.alg().arrows().iter().enumerate() {
        if a.head == k {
            let mut cur = m.arrow(idx).clone();
            for _ in 0..m.alg().ci(k) {
                gens.push(cur.clone());
                cur = m.eps(k).mul(&cur);
            }
        }
    }
    let refs: Vec<&Matrix<F>> = gens.iter().collect();
    Matrix::hstack(f, m.dims()[k], &refs).column_basis()
}

/// Basis of `Ker(M_{k,out})`: vectors killed by every `A ε_k^s` with `A`
/// leaving `k`.
pub fn kernel_out<F: Field>(m: &Module<F>, k: usize) -> Matrix<F> {
    let f = m.field();
    let mut rows = Vec::new();
    for (idx, a) in m.alg().arrows().iter().enumerate() {
        if a.tail == k {
            let mut cur = m.arrow(idx).clone();
            for _ in 0..m.alg().ci(k) {
                rows.push(cur.clone());
                cur = cur.mul(m.eps(k));
            }
        }
    }
    if rows.is_empty() {
        return Matrix::identity(f, m.dims()[k]);
    }
    let refs: Vec<&Matrix<F>> = rows.iter().collect();
    Matrix::vstack(f, m.dims()[k], &refs).nullspace()
}

/// `(fac_k(M), sub_k(M))` as partition types.
pub fn fac_sub<F: Field>(m: &Module<F>, k: usize) -> Result<(PartitionType, PartitionType)> {
    m.alg().datum().check_vertex(k)?;
    let eps = m.eps(k);
    let img = image_in(m, k);
    let (proj, section) = img.complement();
    let fac = PartitionType::of(&proj.mul(eps).mul(&section));
    let ker = kernel_out(m, k);
    let on_ker = ker.solve(&eps.mul(&ker)).ok_or_else(|| Error::InternalMismatch("Ker(M_out) is not eps-stable".into()))?;
    let sub = PartitionType::of(&on_ker);
    Ok((fac, sub))
}

fn vertex_bases<F: Field>(m: &Module<F>, k: usize, at_k: Matrix<F>, rest_full: bool) -> Vec<Matrix<F>> {
    let f = m.field();
    (0..m.alg().n())
        .map(|v| {
            if v == k {
                at_k.clone()
            } else if rest_full {
                Matrix::identity(f, m.dims()[v])
            } else {
                Matrix::zeros(f, m.dims()[v], 0)
            }
        })
        .collect()
}

/// `K_k(M)`, the kernel of `M -> fac_k(M)`.
pub fn k_part<F: Field>(m: &Module<F>, k: usize) -> Result<Module<F>> {
    m.submodule(&vertex_bases(m, k, image_in(m, k), true))
}

/// `C_k(M) = M / sub_k(M)`.
pub fn c_part<F: Field>(m: &Module<F>, k: usize) -> Module<F> {
    m.quotient(&vertex_bases(m, k, kernel_out(m, k), false))
}

/// `φ_i(M)`: the rank of `sub_i(M)` when it is free.
pub fn phi<F: Field>(m: &Module<F>, i: usize) -> Result<usize> {
    let (_, sub) = fac_sub(m, i)?;
    sub.free_rank(m.alg().ci(i)).ok_or_else(|| Error::Undefined(format!("sub_{}(M) is not free", i + 1)))
}

/// `φ_i^*(M)`: the rank of `fac_i(M)` when it is free.
pub fn phi_star<F: Field>(m: &Module<F>, i: usize) -> Result<usize> {
    let (fac, _) = fac_sub(m, i)?;
    fac.free_rank(m.alg().ci(i)).ok_or_else(|| Error::Undefined(format!("fac_{}(M) is not free", i + 1)))
}

fn module_key<F: Field>(m: &Module<F>) -> String {
    format!("{:?}|{:?}|{:?}", m.dims(), (0..m.alg().n()).map(|i| m.eps(i)).collect::<Vec<_>>(), m.arrow_matrices())
}

/// Recursive crystal-module test.
pub fn is_crystal_module<F: Field>(m: &Module<F>) -> Result<bool> {
    require_pi(m)?;
    let mut memo = HashMap::new();
    crystal_rec(m, &mut memo)
}

fn crystal_rec<F: Field>(m: &Module<F>, memo: &mut HashMap<String, bool>) -> Result<bool> {
    if m.is_zero() {
        return Ok(true);
    }
    let key = module_key(m);
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let mut ok = true;
    'outer: for j in 0..m.alg().n() {
        let c = m.alg().ci(j);
        let (fac, sub) = fac_sub(m, j)?;
        let (Some(fr), Some(sr)) = (fac.free_rank(c), sub.free_rank(c)) else {
            ok = false;
            break;
        };
        if fr > 0 && !crystal_rec(&k_part(m, j)?, memo)? {
            ok = false;
            break 'outer;
        }
        if sr > 0 && !crystal_rec(&c_part(m, j), memo)? {
            ok = false;
            break 'outer;
        }
    }
    memo.insert(key, ok);
    Ok(ok)
}

/// Outcome of the E-filtration search. `witness` lists the subquotients
/// from the bottom; `complete` is false when some candidate set was only
/// sampled, in which case a missing witness is inconclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EFiltration {
    pub witness: Option<Vec<usize>>,
    pub complete: bool,
}

pub const E_FILTER_BUDGET: usize = 100_000;
const SAMPLE_SWEEP: usize = 64;

/// Searches for a flag with all subquotients generalized simples.
pub fn is_e_filtered<F: Field, R: Rng + ?Sized>(m: &Module<F>, rng: &mut R) -> Result<EFiltration> {
    let mut search = FilterSearch { nodes: 0, budget: E_FILTER_BUDGET, failed: HashSet::new(), complete: true };
    let witness = search.run(m, rng)?;
    Ok(EFiltration { complete: witness.is_some() || search.complete, witness })
}

struct FilterSearch {
    nodes: usize,
    budget: usize,
    failed: HashSet<String>,
    complete: bool,
}

impl FilterSearch {
    fn run<F: Field, R: Rng + ?Sized>(&mut self, m: &Module<F>, rng: &mut R) -> Result<Option<Vec<usize>>> {
        if m.is_zero() {
            return Ok(Some(vec![]));
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudgetExceeded { budget: self.budget });
        }
        if m.is_locally_free().is_none() {
            return Ok(None);
        }
        let key = module_key(m);
        if self.failed.contains(&key) {
            return Ok(None);
        }
        for i in 0..m.alg().n() {
            let (subs, exhaustive) = bottom_simples(m, i, rng);
            self.complete &= exhaustive;
            for sub in subs {
                let q = m.quotient(&vertex_bases(m, i, sub, false));
                if let Some(mut w) = self.run(&q, rng)? {
                    w.insert(0, i);
                    return Ok(Some(w));
                }
            }
        }
        self.failed.insert(key);
        Ok(None)
    }
}

/// Distinct submodules `H_i g ≅ E_i` with `g ∈ sub_i(M)`, as bases at `i`.
/// Exhaustive over small prime fields, sampled otherwise.
pub fn bottom_simples<F: Field, R: Rng + ?Sized>(m: &Module<F>, i: usize, rng: &mut R) -> (Vec<Matrix<F>>, bool) {
    let f = m.field();
    let c = m.alg().ci(i);
    let v = kernel_out(m, i);
    let k = v.cols();
    if k < c {
        return (vec![], true);
    }
    let eps = m.eps(i);
    let top = eps.pow(c - 1).mul(&v);
    if top.is_zero() {
        return (vec![], true);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut consider = |coeffs: Vec<F::Elem>| {
        let g = v.mul(&Matrix::column(f, coeffs));
        if eps.pow(c - 1).mul(&g).is_zero() {
            return;
        }
        let mut cols = vec![g];
        for _ in 1..c {
            let next = eps.mul(cols.last().unwrap());
            cols.push(next);
        }
        let refs: Vec<&Matrix<F>> = cols.iter().collect();
        let span = Matrix::hstack(f, m.dims()[i], &refs);
        if seen.insert(span.canonical_span().to_vec()) {
            out.push(span);
        }
    };
    match f.order() {
        Some(q) if k <= 3 => {
            for_each_vector(q, k, |x| {
                consider(x.iter().map(|&e| f.from_i64(e as i64)).collect());
                true
            });
            (out, true)
        }
        _ => {
            for _ in 0..SAMPLE_SWEEP {
                consider((0..k).map(|_| f.random(rng)).collect());
            }
            (out, false)
        }
    }
}

/// Cocycle space for extensions `0 -> N -> X -> M -> 0` with split loop
/// actions: arrow blocks `Z_a: M_t -> N_h` with `eps_h^a Z = Z eps_t^b`.
fn arrow_cochains<F: Field>(m: &Module<F>, n: &Module<F>) -> Vec<Vec<Matrix<F>>> {
    m.alg().arrows().iter().map(|a| commutant(&n.eps(a.head).pow(a.head_exp), &m.eps(a.tail).pow(a.tail_exp))).collect()
}

/// Linearized mesh relation applied to arrow blocks `z`.
fn mesh_linear<F: Field>(m: &Module<F>, n: &Module<F>, z: &[Matrix<F>]) -> Vec<Matrix<F>> {
    let alg = m.alg();
    let f = m.field();
    (0..alg.n())
        .map(|k| {
            let mut acc = Matrix::zeros(f, n.dims()[k], m.dims()[k]);
            for (idx, a) in alg.arrows().iter().enumerate() {
                if a.head != k {
                    continue;
                }
                let Some(back) = alg.partner(idx) else { continue };
                let comp = n.arrow(idx).mul(&z[back]).add(&z[idx].mul(m.arrow(back)));
                let mut term = Matrix::zeros(f, n.dims()[k], m.dims()[k]);
                for s in 0..a.head_exp {
                    term = term.add(&n.eps(k).pow(s).mul(&comp).mul(&m.eps(k).pow(a.head_exp - 1 - s)));
                }
                acc = if a.reversed { acc.sub(&term) } else { acc.add(&term) };
            }
            acc
        })
        .collect()
}

fn flatten<F: Field>(ms: &[Matrix<F>]) -> Vec<F::Elem> {
    ms.iter().flat_map(|m| m.data().iter().cloned()).collect()
}

/// Basis of the cocycles: arrow blocks satisfying the linearized mesh
/// relations. Over the rationals the basis vectors are integral.
pub fn extension_cocycles<F: Field>(m: &Module<F>, n: &Module<F>) -> Result<Vec<Vec<Matrix<F>>>> {
    m.same_algebra(n)?;
    let f = m.field();
    let spaces = arrow_cochains(m, n);
    let basis: Vec<Vec<Matrix<F>>> = spaces
        .iter()
        .enumerate()
        .flat_map(|(idx, sp)| {
            sp.iter().map(move |x| {
                let mut z: Vec<Matrix<F>> = m.alg().arrows().iter().map(|a| Matrix::zeros(f, n.dims()[a.head], m.dims()[a.tail])).collect();
                z[idx] = x.clone();
                z
            })
        })
        .collect();
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let images: Vec<Vec<F::Elem>> = basis.iter().map(|z| flatten(&mesh_linear(m, n, z))).collect();
    let cols = images[0].len();
    let mat = Matrix::from_vec(f, basis.len(), cols, images.into_iter().flatten().collect()).transpose();
    let ker = if cols == 0 { Matrix::identity(f, basis.len()) } else { mat.nullspace() };
    let mut out = Vec::with_capacity(ker.cols());
    for c in 0..ker.cols() {
        let mut coeffs = ker.col(c);
        f.clear_denominators(&mut coeffs);
        let mut z: Vec<Matrix<F>> = basis[0].iter().map(|b| Matrix::zeros(f, b.rows(), b.cols())).collect();
        for (b, coef) in basis.iter().zip(&coeffs) {
            if f.is_zero(coef) {
                continue;
            }
            for (acc, x) in z.iter_mut().zip(b) {
                *acc = acc.add(&x.scale(coef));
            }
        }
        out.push(z);
    }
    Ok(out)
}

/// The extension of `m` by `n` (with `n` as submodule) along the cocycle `z`.
pub fn extension<F: Field>(m: &Module<F>, n: &Module<F>, z: &[Matrix<F>]) -> Result<Module<F>> {
    m.same_algebra(n)?;
    let f = m.field();
    let alg = m.alg().clone();
    let dims: Vec<usize> = n.dims().iter().zip(m.dims()).map(|(a, b)| a + b).collect();
    let eps = (0..alg.n()).map(|v| Matrix::block_diag(f, &[n.eps(v), m.eps(v)])).collect();
    let arrows = alg
        .arrows()
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let mut x = Matrix::block_diag(f, &[n.arrow(idx), m.arrow(idx)]);
            x.paste(0, n.dims()[a.tail], &z[idx]);
            x
        })
        .collect();
    let out = Module::new(alg, f, dims, eps, arrows)?;
    let bad = out.check_relations();
    if !bad.is_empty() {
        return Err(Error::InternalMismatch(format!("extension violates relations: {}", bad.join("; "))));
    }
    Ok(out)
}

/// Iterated extension with subquotients `E_{seq[0]}` (bottom) up to
/// `E_{seq[last]}` (top), each step along a random cocycle.
pub fn random_e_filtered<F: Field, R: Rng + ?Sized>(alg: &Arc<Algebra>, field: &F, seq: &[usize], rng: &mut R) -> Result<Module<F>> {
    if alg.kind() != AlgebraKind::Pi {
        return Err(Error::SpecMismatch);
    }
    let mut cur = Module::zero(alg.clone(), field);
    for &i in seq.iter().rev() {
        let e = Module::generalized_simple(alg.clone(), field, i)?;
        let cocycles = extension_cocycles(&cur, &e)?;
        let mut z: Vec<Matrix<F>> = alg.arrows().iter().map(|a| Matrix::zeros(field, e.dims()[a.head], cur.dims()[a.tail])).collect();
        for c in &cocycles {
            let s = field.random(rng);
            for (acc, x) in z.iter_mut().zip(c) {
                *acc = acc.add(&x.scale(&s));
            }
        }
        cur = extension(&cur, &e, &z)?;
    }
    Ok(cur)
}

pub fn hom_pi<F: Field>(m: &Module<F>, n: &Module<F>) -> Result<usize> {
    require_pi(m)?;
    m.hom_dim(n)
}

/// `Ext^1_Π(M, N)` as cocycles modulo coboundaries of the presentation
/// complex `⊕ Hom_{H_i} -> ⊕_{arrows} Hom -> ⊕ Hom_{H_k}`.
pub fn ext1_pi<F: Field>(m: &Module<F>, n: &Module<F>) -> Result<usize> {
    require_pi(m)?;
    m.same_algebra(n)?;
    m.rank_vector()?;
    let f = m.field();
    let alg = m.alg();
    let cocycles = extension_cocycles(m, n)?.len();
    let mut boundaries = Vec::new();
    for v in 0..alg.n() {
        for phi in commutant(n.eps(v), m.eps(v)) {
            let d: Vec<Matrix<F>> = alg
                .arrows()
                .iter()
                .enumerate()
                .map(|(idx, a)| {
                    let mut x = Matrix::zeros(f, n.dims()[a.head], m.dims()[a.tail]);
                    if a.tail == v {
                        x = x.add(&n.arrow(idx).mul(&phi));
                    }
                    if a.head == v {
                        x = x.sub(&phi.mul(m.arrow(idx)));
                    }
                    x
                })
                .collect();
            boundaries.push(flatten(&d));
        }
    }
    let rank = rank_of_vectors(f, &boundaries);
    Ok(cocycles - rank)
}

/// `dim Hom(M,N) + dim Hom(N,M) - (rk M, rk N)`, the predicted `Ext^1`.
pub fn predicted_ext1_pi<F: Field>(m: &Module<F>, n: &Module<F>) -> Result<i64> {
    let rm = m.rank_vector()?;
    let rn = n.rank_vector()?;
    let sym = m.alg().datum().sym_form(&rm, &rn);
    Ok(hom_pi(m, n)? as i64 + hom_pi(n, m)? as i64 - sym)
}

/// Locally free `Π`-module of rank `(1,1)` in type `B2` (`c_1 = 2`) with
/// no generalized simple submodule, hence not E-filtered.
pub fn non_e_filtered_fixture<F: Field>(alg: &Arc<Algebra>, field: &F) -> Result<Module<F>> {
    let datum = alg.datum();
    if alg.kind() != AlgebraKind::Pi || datum.n() != 2 || datum.d() != [2, 1] || datum.cij(0, 1) != -1 {
        return Err(Error::SpecMismatch);
    }
    let mut m = Module::with_canonical_eps(alg.clone(), field, vec![2, 1]);
    let into_1 = Matrix::from_i64(field, 2, 1, &[0, 1]);
    let out_of_1 = Matrix::from_i64(field, 1, 2, &[1, 0]);
    let i01 = alg.arrow_index(0, 1, 0).unwrap();
    let i10 = alg.arrow_index(1, 0, 0).unwrap();
    m.set_arrow(i01, into_1);
    m.set_arrow(i10, out_of_1);
    let bad = m.check_relations();
    if !bad.is_empty() {
        return Err(Error::InternalMismatch(bad.join("; ")));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{named_datum, Orientation};
    use crate::field::{PrimeField, Rationals};
    use crate::functors::all_root_modules;
    use crate::hmod::random_locally_free;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b2() -> (Arc<Algebra>, Arc<Algebra>) {
        let d = named_datum("B2").unwrap();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        (Algebra::h(&d, &o), Algebra::pi(&d, &o))
    }

    #[test]
    fn simples_and_embedding() {
        let (h, pi) = b2();
        let f = PrimeField::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..2 {
            let e = Module::generalized_simple(pi.clone(), &f, i).unwrap();
            let c = pi.ci(i);
            assert_eq!(fac_sub(&e, i).unwrap(), (PartitionType { parts: vec![c] }, PartitionType { parts: vec![c] }));
            assert!(is_crystal_module(&e).unwrap());
            assert_eq!((phi(&e, i).unwrap(), phi_star(&e, i).unwrap()), (1, 1));
            assert_eq!((phi(&e, 1 - i).unwrap(), phi_star(&e, 1 - i).unwrap()), (0, 0));
            assert_eq!(is_e_filtered(&e, &mut rng).unwrap().witness, Some(vec![i]));
        }
        for _ in 0..20 {
            let m = random_locally_free(h.clone(), &f, &[1, 2], &mut rng);
            let p = from_h_module(&m).unwrap();
            assert!(p.check_relations().is_empty());
            assert_eq!(restrict_to_h(&p), m);
            assert!(is_e_filtered(&p, &mut rng).unwrap().witness.is_some());
        }
    }

    #[test]
    fn fac_of_root_module() {
        let (h, _) = b2();
        let f = PrimeField::new(7).unwrap();
        let table = all_root_modules(&h, &f).unwrap();
        let m = from_h_module(&table.modules[1]).unwrap();
        let (fac, sub) = fac_sub(&m, 0).unwrap();
        assert!(fac.parts.is_empty());
        assert_eq!(fac.dim() + image_in(&m, 0).cols(), m.dims()[0]);
        assert_eq!(sub.dim(), kernel_out(&m, 0).cols());
    }

    #[test]
    fn fixture_is_not_e_filtered() {
        let (_, pi) = b2();
        let f = PrimeField::new(5).unwrap();
        let m = non_e_filtered_fixture(&pi, &f).unwrap();
        assert_eq!(m.is_locally_free(), Some(vec![1, 1]));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = is_e_filtered(&m, &mut rng).unwrap();
        assert_eq!(r, EFiltration { witness: None, complete: true });
        assert!(!is_crystal_module(&m).unwrap());
    }

    #[test]
    fn ext_of_simples() {
        let (_, pi) = b2();
        let f = PrimeField::new(7).unwrap();
        let e1 = Module::generalized_simple(pi.clone(), &f, 0).unwrap();
        let e2 = Module::generalized_simple(pi.clone(), &f, 1).unwrap();
        assert_eq!(ext1_pi(&e1, &e1).unwrap(), 0);
        assert_eq!(ext1_pi(&e1, &e2).unwrap(), 2);
        assert_eq!(ext1_pi(&e2, &e1).unwrap(), 2);
        assert_eq!(predicted_ext1_pi(&e1, &e2).unwrap(), 2);
    }

    #[test]
    fn random_extensions_are_filtered_and_symmetric() {
        let (_, pi) = b2();
        let q = Rationals;
        let f = PrimeField::new(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq = [0, 1, 0];
        let m = random_e_filtered(&pi, &q, &seq, &mut rng).unwrap();
        assert_eq!(m.is_locally_free(), Some(vec![2, 1]));
        let mp = m.reduce(&f).unwrap();
        assert!(mp.check_relations().is_empty());
        assert!(is_e_filtered(&mp, &mut rng).unwrap().witness.is_some());
        let n = random_e_filtered(&pi, &f, &[1, 0], &mut rng).unwrap();
        assert_eq!(ext1_pi(&mp, &n).unwrap(), ext1_pi(&n, &mp).unwrap());
        assert_eq!(ext1_pi(&mp, &n).unwrap() as i64, predicted_ext1_pi(&mp, &n).unwrap());
        let split = random_e_filtered(&pi, &f, &[0], &mut rng).unwrap();
        assert_eq!(split, Module::generalized_simple(pi, &f, 0).unwrap());
    }
}
