//! Reflection functors `F_k^±`, the twist, Coxeter functors, the
//! Auslander-Reiten translate on locally free modules, and the modules
//! `M(β)` attached to the positive roots.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cartan::RootVector;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::hmod::ext1_dim;
use crate::matrix::{nilpotent_jordan, Matrix};
use crate::module::{Algebra, AlgebraKind, Module};

/// `H_k`-module `K^a ⊗ M_j` for each arrow between `k` and a neighbour:
/// the loop acts by shifting `s -> s+1` and sends the top block back to
/// the bottom through `eps_j^b`.
struct Induced<F: Field> {
    blocks: Vec<(usize, usize, usize)>, // (arrow index, a, d_j)
    offsets: Vec<usize>,
    dim: usize,
    eps: Matrix<F>,
}

fn induced<F: Field>(m: &Module<F>, arrows: &[(usize, usize, usize, usize)]) -> Induced<F> {
    // arrows: (arrow index, neighbour j, a = exponent at k, b = exponent at j)
    let f = m.field();
    let mut blocks = Vec::new();
    let mut offsets = Vec::new();
    let mut dim = 0;
    for &(idx, j, a, _) in arrows {
        offsets.push(dim);
        let dj = m.dims()[j];
        blocks.push((idx, a, dj));
        dim += a * dj;
    }
    let mut eps = Matrix::zeros(f, dim, dim);
    for (n, &(_, j, a, b)) in arrows.iter().enumerate() {
        let dj = m.dims()[j];
        let off = offsets[n];
        for s in 0..a.saturating_sub(1) {
            eps.paste(off + (s + 1) * dj, off + s * dj, &Matrix::identity(f, dj));
        }
        eps.paste(off, off + (a - 1) * dj, &m.eps(j).pow(b));
    }
    Induced { blocks, offsets, dim, eps }
}

fn require_h<F: Field>(m: &Module<F>) -> Result<()> {
    if m.alg().kind() == AlgebraKind::H {
        Ok(())
    } else {
        Err(Error::SpecMismatch)
    }
}

/// `F_k^+` for a sink `k`: the new space at `k` is the kernel of
/// `M_{k,in}: ⊕ _kH_j ⊗ M_j -> M_k`.
pub fn reflect_plus<F: Field>(m: &Module<F>, k: usize) -> Result<Module<F>> {
    require_h(m)?;
    let alg = m.alg();
    alg.datum().check_vertex(k)?;
    if !alg.omega().is_sink(k) {
        return Err(Error::NotSink(k));
    }
    let f = m.field();
    let incoming: Vec<(usize, usize, usize, usize)> =
        alg.arrows().iter().enumerate().filter(|(_, a)| a.head == k).map(|(idx, a)| (idx, a.tail, a.head_exp, a.tail_exp)).collect();
    let v = induced(m, &incoming);
    let mut m_in = Matrix::zeros(f, m.dims()[k], v.dim);
    for (n, &(idx, a, dj)) in v.blocks.iter().enumerate() {
        let mut left = m.arrow(idx).clone();
        for s in 0..a {
            m_in.paste(0, v.offsets[n] + s * dj, &left);
            left = m.eps(k).mul(&left);
        }
    }
    let kernel = m_in.nullspace();
    let eps_u = kernel.solve(&v.eps.mul(&kernel)).ok_or_else(|| Error::InternalMismatch("kernel is not eps-stable".into()))?;
    let (p, _) = nilpotent_jordan(&eps_u);
    let (basis, eps_k) = if kernel.cols() == 0 { (kernel, eps_u) } else { (kernel.mul(&p), p.inverse().unwrap().mul(&eps_u).mul(&p)) };

    let new_alg = alg.with_orientation(alg.omega().reflect(k)?);
    let mut dims = m.dims().to_vec();
    dims[k] = basis.cols();
    let mut eps: Vec<Matrix<F>> = (0..alg.n()).map(|i| m.eps(i).clone()).collect();
    eps[k] = eps_k;
    let mut keyed = Vec::new();
    for (idx, a) in alg.arrows().iter().enumerate() {
        if a.head != k && a.tail != k {
            keyed.push(((a.head, a.tail, a.copy), m.arrow(idx).clone()));
        }
    }
    for (n, &(idx, a, dj)) in v.blocks.iter().enumerate() {
        let spec = &alg.arrows()[idx];
        let top = v.offsets[n] + (a - 1) * dj;
        let x = basis.submatrix(top..top + dj, 0..basis.cols());
        keyed.push(((spec.tail, k, spec.copy), x));
    }
    Module::from_parts(new_alg, f, dims, eps, &keyed)
}

/// `F_k^-` for a source `k`: the new space at `k` is the cokernel of
/// `M_{k,out}: M_k -> ⊕ K^a ⊗ M_j`.
pub fn reflect_minus<F: Field>(m: &Module<F>, k: usize) -> Result<Module<F>> {
    require_h(m)?;
    let alg = m.alg();
    alg.datum().check_vertex(k)?;
    if !alg.omega().is_source(k) {
        return Err(Error::NotSource(k));
    }
    let f = m.field();
    let outgoing: Vec<(usize, usize, usize, usize)> =
        alg.arrows().iter().enumerate().filter(|(_, a)| a.tail == k).map(|(idx, a)| (idx, a.head, a.tail_exp, a.head_exp)).collect();
    let v = induced(m, &outgoing);
    let mut m_out = Matrix::zeros(f, v.dim, m.dims()[k]);
    for (n, &(idx, a, dj)) in v.blocks.iter().enumerate() {
        for s in 0..a {
            let row = m.arrow(idx).mul(&m.eps(k).pow(a - 1 - s));
            m_out.paste(v.offsets[n] + s * dj, 0, &row);
        }
    }
    let image = m_out.column_basis();
    let (proj, section) = image.complement();
    let eps_q = proj.mul(&v.eps).mul(&section);
    let (proj, eps_k) = if eps_q.rows() == 0 {
        (proj, eps_q)
    } else {
        let (p, _) = nilpotent_jordan(&eps_q);
        let pinv = p.inverse().unwrap();
        (pinv.mul(&proj), pinv.mul(&eps_q).mul(&p))
    };

    let new_alg = alg.with_orientation(alg.omega().reflect(k)?);
    let mut dims = m.dims().to_vec();
    dims[k] = proj.rows();
    let mut eps: Vec<Matrix<F>> = (0..alg.n()).map(|i| m.eps(i).clone()).collect();
    eps[k] = eps_k;
    let mut keyed = Vec::new();
    for (idx, a) in alg.arrows().iter().enumerate() {
        if a.head != k && a.tail != k {
            keyed.push(((a.head, a.tail, a.copy), m.arrow(idx).clone()));
        }
    }
    for (n, &(idx, _, dj)) in v.blocks.iter().enumerate() {
        let spec = &alg.arrows()[idx];
        let start = v.offsets[n];
        let y = proj.submatrix(0..proj.rows(), start..start + dj);
        keyed.push(((k, spec.head, spec.copy), y));
    }
    Module::from_parts(new_alg, f, dims, eps, &keyed)
}

/// `C^+ = F_{i_n}^+ ∘ ... ∘ F_{i_1}^+` along the admissible Coxeter word.
pub fn coxeter_plus<F: Field>(m: &Module<F>) -> Result<Module<F>> {
    let word = m.alg().datum().coxeter_word(m.alg().omega());
    let mut cur = m.clone();
    for &k in &word {
        cur = reflect_plus(&cur, k)?;
    }
    Ok(cur.transport(m.alg().clone()))
}

/// `C^- = F_{i_1}^- ∘ ... ∘ F_{i_n}^-`.
pub fn coxeter_minus<F: Field>(m: &Module<F>) -> Result<Module<F>> {
    let word = m.alg().datum().coxeter_word(m.alg().omega());
    let mut cur = m.clone();
    for &k in word.iter().rev() {
        cur = reflect_minus(&cur, k)?;
    }
    Ok(cur.transport(m.alg().clone()))
}

/// `τ = T ∘ C^+`.
pub fn tau<F: Field>(m: &Module<F>) -> Result<Module<F>> {
    Ok(coxeter_plus(m)?.twist())
}

/// `τ^- = C^- ∘ T`.
pub fn tau_minus<F: Field>(m: &Module<F>) -> Result<Module<F>> {
    coxeter_minus(&m.twist())
}

/// Modules `M(β_k)` for the β-sequence of an admissible reduced word of
/// the longest Weyl group element.
#[derive(Clone, Debug)]
pub struct RootModuleTable<F: Field> {
    pub word: Vec<usize>,
    pub roots: Vec<RootVector>,
    pub modules: Vec<Module<F>>,
}

/// `M(β_k) = F_{i_1}^- ... F_{i_{k-1}}^- (E_{i_k})`.
pub fn root_module<F: Field>(alg: &Arc<Algebra>, field: &F, word: &[usize], k: usize) -> Result<Module<F>> {
    let mut orientations = vec![alg.omega().clone()];
    for &i in &word[..k] {
        let next = orientations.last().unwrap().reflect(i)?;
        orientations.push(next);
    }
    let start_alg = alg.with_orientation(orientations[k].clone());
    let mut cur = Module::generalized_simple(start_alg, field, word[k])?;
    for t in (0..k).rev() {
        cur = reflect_minus(&cur, word[t])?;
    }
    Ok(cur.transport(alg.clone()))
}

pub fn all_root_modules<F: Field>(alg: &Arc<Algebra>, field: &F) -> Result<RootModuleTable<F>> {
    let datum = alg.datum();
    if !datum.is_dynkin() {
        return Err(Error::NotDynkin);
    }
    let word = datum.w0_word(alg.omega())?;
    let (roots, _) = datum.beta_gamma(&word)?;
    let modules = (0..word.len()).into_par_iter().map(|k| root_module(alg, field, &word, k)).collect::<Result<Vec<_>>>()?;
    for (k, (m, beta)) in modules.iter().zip(&roots).enumerate() {
        if m.is_locally_free().as_ref() != Some(beta) {
            return Err(Error::InternalMismatch(format!("M(β_{}) does not have rank {:?}", k + 1, beta)));
        }
    }
    Ok(RootModuleTable { word, roots, modules })
}

/// Measured `(dim Hom, dim Ext^1)` between all pairs of root modules.
pub fn homext_table<F: Field>(table: &RootModuleTable<F>) -> Result<Vec<Vec<(usize, usize)>>> {
    let r = table.modules.len();
    (0..r)
        .into_par_iter()
        .map(|i| {
            (0..r)
                .map(|j| {
                    let (mi, mj) = (&table.modules[i], &table.modules[j]);
                    Ok((mi.hom_dim(mj)?, ext1_dim(mi, mj)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// `(⟨β_i,β_j⟩, 0)` for `i <= j` and `(0, -⟨β_i,β_j⟩)` for `i > j`.
pub fn predicted_homext(alg: &Algebra, roots: &[RootVector]) -> Vec<Vec<(i64, i64)>> {
    let r = roots.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let e = alg.euler_form(&roots[i], &roots[j]);
                    if i <= j {
                        (e, 0)
                    } else {
                        (0, -e)
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{named_datum, Orientation};
    use crate::field::{PrimeField, Rationals};
    use crate::hmod::{is_isomorphic, projective_module};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn b2_alg() -> Arc<Algebra> {
        let d = named_datum("B2").unwrap();
        Algebra::h(&d, &Orientation::new(&d, [(0, 1)]).unwrap())
    }

    #[test]
    fn reflections_of_simples() {
        let alg = b2_alg();
        let q = Rationals;
        let e1 = Module::generalized_simple(alg.clone(), &q, 0).unwrap();
        assert!(reflect_plus(&e1, 0).unwrap().is_zero());
        assert!(matches!(reflect_plus(&e1, 1), Err(Error::NotSink(1))));
        let flipped = alg.with_orientation(alg.omega().reflect(0).unwrap());
        let e2 = Module::generalized_simple(flipped.clone(), &q, 1).unwrap();
        let up = reflect_minus(&e2, 0).unwrap();
        assert_eq!(up.is_locally_free(), Some(vec![1, 1]));
        assert!(up.check_relations().is_empty());
        let back = reflect_plus(&up, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(is_isomorphic(&back, &e2, &mut rng).unwrap());
        let e1f = Module::generalized_simple(flipped, &q, 0).unwrap();
        assert!(reflect_minus(&e1f, 0).unwrap().is_zero());
    }

    #[test]
    fn b2_root_modules() {
        let alg = b2_alg();
        let f = PrimeField::new(7).unwrap();
        let table = all_root_modules(&alg, &f).unwrap();
        assert_eq!(table.roots, vec![vec![1, 0], vec![1, 1], vec![1, 2], vec![0, 1]]);
        for m in &table.modules {
            assert!(m.check_relations().is_empty());
            assert_eq!(ext1_dim(m, m).unwrap(), 0);
        }
        let e1 = Module::generalized_simple(alg.clone(), &f, 0).unwrap();
        assert_eq!(e1.hom_dim(&table.modules[1]).unwrap(), 2);
        let measured = homext_table(&table).unwrap();
        let predicted = predicted_homext(&alg, &table.roots);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!((measured[i][j].0 as i64, measured[i][j].1 as i64), predicted[i][j]);
            }
        }
    }

    #[test]
    fn tau_kills_projectives_and_moves_ranks() {
        let alg = b2_alg();
        let f = PrimeField::new(7).unwrap();
        for i in 0..2 {
            let p = projective_module(alg.clone(), &f, i).unwrap();
            assert!(tau(&p).unwrap().is_zero());
        }
        let table = all_root_modules(&alg, &f).unwrap();
        let m3 = &table.modules[2];
        assert_eq!(tau(m3).unwrap().is_locally_free(), Some(vec![1, 0]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(is_isomorphic(&tau_minus(&tau(m3).unwrap()).unwrap(), m3, &mut rng).unwrap());
        let m = &table.modules[1];
        assert_eq!(m.twist().twist(), *m);
    }
}
