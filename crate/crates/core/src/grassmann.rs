//! Point counts over prime fields for locally free quiver Grassmannians and
//! flag varieties, interpolation to counting polynomials, Euler
//! characteristics, F-polynomials, convolution evaluations and the dual
//! PBW pairing.

use std::cell::Cell;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::RootVector;
use crate::error::{Error, Result};
use crate::field::{primes_from, PrimeField, Rationals};
use crate::functors::{all_root_modules, RootModuleTable};
use crate::hmod::{for_each_vector, is_isomorphic};
use crate::matrix::{nilpotent_jordan, Matrix};
use crate::module::{Algebra, Module};
use crate::pimod::kernel_out;

pub const DEFAULT_PRIMES: [u64; 5] = [5, 7, 11, 13, 17];
pub const ENUMERATION_BUDGET: u64 = 10_000_000;
const MAX_PRIMES: usize = 12;

type Fp = PrimeField;
type FpModule = Module<PrimeField>;

fn too_large(what: &str) -> Error {
    Error::TooLarge(format!("{what} exceeds {ENUMERATION_BUDGET} echelon forms"))
}

fn pow_u128(q: u64, e: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(q as u128).ok_or_else(|| Error::TooLarge("count overflows u128".into()))?;
    }
    Ok(acc)
}

/// Gaussian binomial `[a choose e]_q`.
pub fn gaussian_binomial(a: usize, e: usize, q: u64) -> Result<u128> {
    if e > a {
        return Ok(0);
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..e {
        num = num.checked_mul(pow_u128(q, a - i)? - 1).ok_or_else(|| Error::TooLarge("count overflows u128".into()))?;
        den *= pow_u128(q, i + 1)? - 1;
    }
    Ok(num / den)
}

/// Number of free rank-`e` submodules of a `K[ε]/(ε^c)`-module of
/// dimension `dim` with `a` free summands, over `F_q`.
pub fn free_submodule_count(dim: usize, a: usize, c: usize, e: usize, q: u64) -> Result<u128> {
    if e > a {
        return Ok(0);
    }
    let exp = e * (dim - a) - (c - 1) * e * e;
    pow_u128(q, exp)?.checked_mul(gaussian_binomial(a, e, q)?).ok_or_else(|| Error::TooLarge("count overflows u128".into()))
}

/// Free part of a nilpotent operator: generators of the length-`c` chains
/// and a basis of the remaining chains, in Jordan coordinates `j`.
struct FreeSplit {
    j: Matrix<Fp>,
    free_starts: Vec<usize>,
    rest: Vec<usize>,
}

fn free_split(eps: &Matrix<Fp>, c: usize) -> FreeSplit {
    let (j, sizes) = nilpotent_jordan(eps);
    let mut free_starts = Vec::new();
    let mut rest = Vec::new();
    let mut off = 0;
    for s in sizes {
        if s == c {
            free_starts.push(off);
        } else {
            rest.extend(off..off + s);
        }
        off += s;
    }
    FreeSplit { j, free_starts, rest }
}

fn combinations(a: usize, e: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, a: usize, e: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == e {
            out.push(cur.clone());
            return;
        }
        for x in start..a {
            cur.push(x);
            go(x + 1, a, e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, a, e, &mut Vec::new(), &mut out);
    out
}

/// Calls `cb` once for each free rank-`e` submodule of `(K^dim, eps)`,
/// passing a basis `[u_1, ε u_1, ..., ε^{c-1} u_e]`. Each submodule
/// appears exactly once through its normal form: pivot generators are the
/// identity, entries left of a pivot lie in `εH`, and the non-free part
/// is arbitrary. Stops early when `cb` returns `false`.
fn for_each_free_submodule(
    eps: &Matrix<Fp>,
    c: usize,
    e: usize,
    budget: &Cell<u64>,
    cb: &mut dyn FnMut(&Matrix<Fp>) -> Result<bool>,
) -> Result<bool> {
    let f = *eps.field();
    let dim = eps.rows();
    if e == 0 {
        return cb(&Matrix::zeros(&f, dim, 0));
    }
    let split = free_split(eps, c);
    let a = split.free_starts.len();
    if e > a {
        return Ok(true);
    }
    let q = f.p();
    let rest_dim = split.rest.len();
    let expected = free_submodule_count(dim, a, c, e, q)?;
    if expected > budget.get() as u128 {
        return Err(too_large("free submodule enumeration"));
    }
    budget.set(budget.get() - expected as u64);
    let eps_pows: Vec<Matrix<Fp>> = (0..c).map(|t| eps.pow(t)).collect();
    for pivots in combinations(a, e) {
        // free coordinates: for each row k and non-pivot column j the
        // polynomial coefficients, then the rest part
        let mut slots: Vec<(usize, usize, usize)> = Vec::new(); // (row, free col, power)
        for (k, &pk) in pivots.iter().enumerate() {
            for jcol in 0..a {
                if pivots.contains(&jcol) {
                    continue;
                }
                let start = if jcol < pk { 1 } else { 0 };
                for t in start..c {
                    slots.push((k, jcol, t));
                }
            }
        }
        let n_free = slots.len() + e * rest_dim;
        let mut go_on = true;
        let mut err = None;
        for_each_vector(q, n_free, |x| {
            let mut gens = vec![vec![0u64; dim]; e];
            let jm = &split.j;
            let add_col = |g: &mut Vec<u64>, col: usize, s: u64| {
                if s == 0 {
                    return;
                }
                for r in 0..dim {
                    g[r] = (g[r] + s * jm.get(r, col)) % q;
                }
            };
            for (k, &pk) in pivots.iter().enumerate() {
                add_col(&mut gens[k], split.free_starts[pk], 1);
            }
            for (s, &(k, jcol, t)) in slots.iter().enumerate() {
                add_col(&mut gens[k], split.free_starts[jcol] + t, x[s]);
            }
            let mut pos = slots.len();
            for g in gens.iter_mut() {
                for &col in &split.rest {
                    add_col(g, col, x[pos]);
                    pos += 1;
                }
            }
            let mut cols = Vec::with_capacity(e * c);
            for g in gens {
                let gm = Matrix::from_vec(&f, dim, 1, g);
                for p in &eps_pows {
                    cols.push(p.mul(&gm));
                }
            }
            let refs: Vec<&Matrix<Fp>> = cols.iter().collect();
            let basis = Matrix::hstack(&f, dim, &refs);
            match cb(&basis) {
                Ok(true) => true,
                Ok(false) => {
                    go_on = false;
                    false
                }
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if !go_on {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerates or counts locally free submodules of rank `e`, fixing one
/// vertex at a time in sink-first order.
struct SubmoduleWalk<'a> {
    m: &'a FpModule,
    e: &'a [i64],
    order: Vec<usize>,
    budget: Cell<u64>,
}

impl<'a> SubmoduleWalk<'a> {
    fn new(m: &'a FpModule, e: &'a [i64]) -> Self {
        let alg = m.alg();
        Self { m, e, order: alg.omega().sink_first_order(alg.n()), budget: Cell::new(ENUMERATION_BUDGET) }
    }

    /// `(P, W)` at `v`: the largest eps-stable subspace mapped into the
    /// chosen subspaces by arrows leaving `v`, and the span of arrows into
    /// `v` applied to chosen subspaces. Both in `M_v` coordinates.
    fn constraints(&self, v: usize, chosen: &[Option<Matrix<Fp>>]) -> (Matrix<Fp>, Matrix<Fp>) {
        let m = self.m;
        let f = *m.field();
        let dv = m.dims()[v];
        let cv = m.alg().ci(v);
        let mut rows = Vec::new();
        let mut wcols = Vec::new();
        for (idx, a) in m.alg().arrows().iter().enumerate() {
            if a.tail == v {
                if let Some(uh) = &chosen[a.head] {
                    let (proj, _) = uh.complement();
                    let mut cur = proj.mul(m.arrow(idx));
                    for _ in 0..cv {
                        rows.push(cur.clone());
                        cur = cur.mul(m.eps(v));
                    }
                }
            }
            if a.head == v {
                if let Some(ut) = &chosen[a.tail] {
                    let mut cur = m.arrow(idx).mul(ut);
                    for _ in 0..cv {
                        wcols.push(cur.clone());
                        cur = m.eps(v).mul(&cur);
                    }
                }
            }
        }
        let p = if rows.is_empty() {
            Matrix::identity(&f, dv)
        } else {
            let refs: Vec<&Matrix<Fp>> = rows.iter().collect();
            Matrix::vstack(&f, dv, &refs).nullspace()
        };
        let refs: Vec<&Matrix<Fp>> = wcols.iter().collect();
        let w = Matrix::hstack(&f, dv, &refs).column_basis();
        (p, w)
    }

    fn count(&self) -> Result<u128> {
        let mut chosen = vec![None; self.m.alg().n()];
        self.count_rec(0, &mut chosen)
    }

    fn count_rec(&self, idx: usize, chosen: &mut Vec<Option<Matrix<Fp>>>) -> Result<u128> {
        let Some(&v) = self.order.get(idx) else { return Ok(1) };
        let m = self.m;
        let c = m.alg().ci(v);
        let ev = self.e[v] as usize;
        let (p, w) = self.constraints(v, chosen);
        if !p.spans(&w) {
            return Ok(0);
        }
        let eps_p = p.solve(&m.eps(v).mul(&p)).expect("P is eps-stable");
        let last = idx + 1 == self.order.len();
        if last && w.cols() == 0 {
            let a = if eps_p.rows() == 0 { 0 } else { free_split(&eps_p, c).free_starts.len() };
            return free_submodule_count(p.cols(), a, c, ev, m.field().p());
        }
        let w_in_p = p.solve(&w).expect("W lies in P");
        let mut total: u128 = 0;
        for_each_free_submodule(&eps_p, c, ev, &self.budget, &mut |u| {
            if !u.spans(&w_in_p) {
                return Ok(true);
            }
            chosen[v] = Some(p.mul(u));
            total += self.count_rec(idx + 1, chosen)?;
            chosen[v] = None;
            Ok(true)
        })?;
        Ok(total)
    }

    /// Calls `cb` with the vertex bases of every submodule; stops when
    /// `cb` returns `false`.
    fn each(&self, cb: &mut dyn FnMut(&[Matrix<Fp>]) -> Result<bool>) -> Result<bool> {
        let mut chosen = vec![None; self.m.alg().n()];
        self.each_rec(0, &mut chosen, cb)
    }

    fn each_rec(
        &self,
        idx: usize,
        chosen: &mut Vec<Option<Matrix<Fp>>>,
        cb: &mut dyn FnMut(&[Matrix<Fp>]) -> Result<bool>,
    ) -> Result<bool> {
        let Some(&v) = self.order.get(idx) else {
            let bases: Vec<Matrix<Fp>> = chosen.iter().map(|b| b.clone().unwrap()).collect();
            return cb(&bases);
        };
        let m = self.m;
        let c = m.alg().ci(v);
        let (p, w) = self.constraints(v, chosen);
        if !p.spans(&w) {
            return Ok(true);
        }
        let eps_p = p.solve(&m.eps(v).mul(&p)).expect("P is eps-stable");
        let w_in_p = p.solve(&w).expect("W lies in P");
        for_each_free_submodule(&eps_p, c, self.e[v] as usize, &self.budget, &mut |u| {
            if !u.spans(&w_in_p) {
                return Ok(true);
            }
            chosen[v] = Some(p.mul(u));
            let r = self.each_rec(idx + 1, chosen, cb)?;
            chosen[v] = None;
            Ok(r)
        })
    }
}

fn fits_inside(m: &FpModule, e: &[i64]) -> bool {
    e.iter().enumerate().all(|(i, &x)| x >= 0 && m.alg().ci(i) * x as usize <= m.dims()[i])
}

/// Number of locally free submodules of rank `e`, stable under all arrows
/// of the module's algebra.
pub fn count_locally_free_submodules(m: &FpModule, e: &[i64]) -> Result<u128> {
    if !fits_inside(m, e) {
        return Ok(0);
    }
    SubmoduleWalk::new(m, e).count()
}

/// Calls `cb` on each locally free submodule of rank `e` (as vertex bases).
pub fn for_each_locally_free_submodule(m: &FpModule, e: &[i64], cb: &mut dyn FnMut(&[Matrix<Fp>]) -> Result<bool>) -> Result<bool> {
    if !fits_inside(m, e) {
        return Ok(true);
    }
    SubmoduleWalk::new(m, e).each(cb)
}

fn is_generalized_simple(m: &FpModule, i: usize) -> bool {
    let c = m.alg().ci(i);
    m.dims().iter().enumerate().all(|(v, &d)| d == if v == i { c } else { 0 }) && (c == 0 || !m.eps(i).pow(c - 1).is_zero())
}

fn word_content(n: usize, word: &[usize]) -> Vec<i64> {
    let mut r = vec![0; n];
    for &i in word {
        r[i] += 1;
    }
    r
}

fn has_rank(m: &FpModule, r: &[i64]) -> bool {
    m.dims().iter().enumerate().all(|(i, &d)| d == m.alg().ci(i) * r[i].max(0) as usize) && r.iter().all(|&x| x >= 0)
}

/// Number of flags `0 = M_0 ⊂ ... ⊂ M_l = M` with `M_k/M_{k-1} ≅ E_{word[k-1]}`.
pub fn count_flags(m: &FpModule, word: &[usize]) -> Result<u128> {
    if !has_rank(m, &word_content(m.alg().n(), word)) {
        return Ok(0);
    }
    let budget = Cell::new(ENUMERATION_BUDGET);
    count_flags_rec(m, word, &budget)
}

fn count_flags_rec(m: &FpModule, word: &[usize], budget: &Cell<u64>) -> Result<u128> {
    match word {
        [] => Ok(m.is_zero() as u128),
        [i] => Ok(is_generalized_simple(m, *i) as u128),
        [i, rest @ ..] => {
            let i = *i;
            let f = *m.field();
            let s = kernel_out(m, i);
            let eps_s = s.solve(&m.eps(i).mul(&s)).expect("sub_i is eps-stable");
            let mut total = 0u128;
            for_each_free_submodule(&eps_s, m.alg().ci(i), 1, budget, &mut |u| {
                let bases: Vec<Matrix<Fp>> =
                    (0..m.alg().n()).map(|v| if v == i { s.mul(u) } else { Matrix::zeros(&f, m.dims()[v], 0) }).collect();
                total += count_flags_rec(&m.quotient(&bases), rest, budget)?;
                Ok(true)
            })?;
            Ok(total)
        }
    }
}

fn iso(a: &FpModule, b: &FpModule) -> Result<bool> {
    if a.dims() != b.dims() {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    is_isomorphic(a, b, &mut rng)
}

/// Flags whose subquotients from the bottom are isomorphic to `factors`.
/// With `first_only` the walk stops at the first flag found.
fn iso_flags(m: &FpModule, factors: &[&FpModule], first_only: bool) -> Result<u128> {
    match factors {
        [] => Ok(m.is_zero() as u128),
        [x] => Ok(iso(m, x)? as u128),
        [x, rest @ ..] => {
            let Some(e) = x.is_locally_free() else { return Ok(0) };
            let mut total = 0u128;
            for_each_locally_free_submodule(m, &e, &mut |bases| {
                let sub = m.submodule(bases)?;
                if iso(&sub, x)? {
                    total += iso_flags(&m.quotient(bases), rest, first_only)?;
                    if first_only && total > 0 {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?;
            Ok(total)
        }
    }
}

pub fn count_iso_flags(m: &FpModule, factors: &[&FpModule]) -> Result<u128> {
    iso_flags(m, factors, false)
}

pub fn iso_flag_exists(m: &FpModule, factors: &[&FpModule]) -> Result<bool> {
    Ok(iso_flags(m, factors, true)? > 0)
}

fn rank_flags(m: &FpModule, ranks: &[Vec<i64>]) -> Result<bool> {
    match ranks {
        [] => Ok(m.is_zero()),
        [r] => Ok(m.is_locally_free().as_deref() == Some(r.as_slice())),
        [r, rest @ ..] => {
            let mut found = false;
            for_each_locally_free_submodule(m, r, &mut |bases| {
                found = rank_flags(&m.quotient(bases), rest)?;
                Ok(!found)
            })?;
            Ok(found)
        }
    }
}

/// Whether `M` has a flag whose subquotients, from the bottom, are locally
/// free of the given ranks.
pub fn rank_flag_exists(m: &FpModule, ranks: &[Vec<i64>]) -> Result<bool> {
    rank_flags(m, ranks)
}

/// Integer polynomial in `q` matching point counts at the sampled primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingPolynomial {
    pub coefficients: Vec<BigInt>,
    pub samples: Vec<(u64, BigInt)>,
}

impl CountingPolynomial {
    pub fn eval(&self, q: &BigInt) -> BigInt {
        self.coefficients.iter().rev().fold(BigInt::zero(), |acc, c| acc * q + c)
    }

    /// Value at `q = 1`, used as the Euler characteristic.
    pub fn chi(&self) -> BigInt {
        self.coefficients.iter().sum()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// Coefficients of the polynomial of degree `< pts.len()` through `pts`.
fn lagrange(pts: &[(u64, BigInt)]) -> Vec<BigRational> {
    let n = pts.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for (i, (xi, yi)) in pts.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        let mut denom = BigRational::one();
        for (j, (xj, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let xj = BigRational::from_integer(BigInt::from(*xj));
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * &xj;
            }
            basis = next;
            denom *= BigRational::from_integer(BigInt::from(*xi)) - xj;
        }
        let scale = BigRational::from_integer(yi.clone()) / denom;
        for (k, b) in basis.iter().enumerate() {
            coeffs[k] += b * &scale;
        }
    }
    coeffs
}

/// Fits the lowest-degree integer polynomial that matches every sample
/// with at least one sample held out, adding primes as needed.
pub fn interpolate(count: &(dyn Fn(u64) -> Result<BigInt> + Sync), primes: &[u64], degree_bound: usize) -> Result<CountingPolynomial> {
    let mut samples: Vec<(u64, BigInt)> = primes.par_iter().map(|&p| Ok((p, count(p)?))).collect::<Result<_>>()?;
    let mut next_primes = primes_from(primes.iter().max().copied().unwrap_or(2) + 1);
    for d in 0..=degree_bound {
        while samples.len() < d + 2 {
            if samples.len() >= MAX_PRIMES {
                return Err(Error::InterpolationInconsistent(format!("no polynomial of degree <= {} fits {samples:?}", d - 1)));
            }
            let p = next_primes.next().unwrap();
            samples.push((p, count(p)?));
        }
        let fit = lagrange(&samples[..=d]);
        if !fit.iter().all(|c| c.is_integer()) {
            continue;
        }
        let mut coefficients: Vec<BigInt> = fit.iter().map(|c| c.to_integer()).collect();
        while coefficients.len() > 1 && coefficients.last().unwrap().is_zero() {
            coefficients.pop();
        }
        let poly = CountingPolynomial { coefficients, samples: samples.clone() };
        if samples.iter().all(|(p, y)| poly.eval(&BigInt::from(*p)) == *y) {
            return Ok(poly);
        }
    }
    Err(Error::InterpolationInconsistent(format!("no polynomial of degree <= {degree_bound} fits {samples:?}")))
}

/// A module known over every prime field, typically the reductions of an
/// integral model. Reductions are cached.
pub struct IntegralModel {
    build: Box<dyn Fn(&Fp) -> Result<FpModule> + Send + Sync>,
    cache: Mutex<HashMap<u64, Arc<FpModule>>>,
}

impl IntegralModel {
    pub fn from_fn(build: impl Fn(&Fp) -> Result<FpModule> + Send + Sync + 'static) -> Self {
        Self { build: Box::new(build), cache: Mutex::new(HashMap::new()) }
    }

    pub fn from_rational(m: Module<Rationals>) -> Self {
        Self::from_fn(move |f| m.reduce(f))
    }

    pub fn at(&self, p: u64) -> Result<Arc<FpModule>> {
        if let Some(m) = self.cache.lock().unwrap().get(&p) {
            return Ok(m.clone());
        }
        let m = Arc::new((self.build)(&PrimeField::new(p)?)?);
        self.cache.lock().unwrap().insert(p, m.clone());
        Ok(m)
    }
}

fn grassmannian_bound(dims: &[usize], sub: &[usize]) -> usize {
    dims.iter().zip(sub).map(|(&d, &s)| s * d.saturating_sub(s)).sum()
}

/// χ of the locally free quiver Grassmannian of rank `e`.
pub fn euler_char_grlf(model: &IntegralModel, e: &[i64], primes: &[u64]) -> Result<(BigInt, CountingPolynomial)> {
    let m0 = model.at(primes[0])?;
    let sub: Vec<usize> = e.iter().enumerate().map(|(i, &x)| m0.alg().ci(i) * x.max(0) as usize).collect();
    let bound = grassmannian_bound(m0.dims(), &sub);
    let poly = interpolate(&|p| Ok(BigInt::from(count_locally_free_submodules(&*model.at(p)?, e)?)), primes, bound)?;
    Ok((poly.chi(), poly))
}

/// χ of the variety of E-flags of type `word` (bottom letter first).
pub fn flag_euler(model: &IntegralModel, word: &[usize], primes: &[u64]) -> Result<BigInt> {
    let m0 = model.at(primes[0])?;
    if !has_rank(&m0, &word_content(m0.alg().n(), word)) {
        return Ok(BigInt::zero());
    }
    let total: usize = m0.total_dim();
    let bound = total * total / 2;
    Ok(interpolate(&|p| Ok(BigInt::from(count_flags(&*model.at(p)?, word)?)), primes, bound)?.chi())
}

/// `Σ coeff · θ_{w_1} * ... * θ_{w_l}` evaluated at the module.
pub fn theta_eval(model: &IntegralModel, combination: &[(i64, Vec<usize>)], primes: &[u64]) -> Result<BigInt> {
    let mut acc = BigInt::zero();
    for (coeff, word) in combination {
        if *coeff != 0 {
            acc += BigInt::from(*coeff) * flag_euler(model, word, primes)?;
        }
    }
    Ok(acc)
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, t| acc * (n - t) as i64 / (t + 1) as i64)
}

/// `(ad θ_i)^n (θ_j) = Σ_k (-1)^k C(n,k) θ_i^{n-k} θ_j θ_i^k` as words.
pub fn ad_power_words(i: usize, j: usize, n: usize) -> Vec<(i64, Vec<usize>)> {
    (0..=n)
        .map(|k| {
            let mut w = vec![i; n - k];
            w.push(j);
            w.extend(std::iter::repeat_n(i, k));
            let sign = if k % 2 == 0 { 1 } else { -1 };
            (sign * binomial(n, k), w)
        })
        .collect()
}

/// The Serre element `(ad θ_i)^{1-c_ij}(θ_j)`.
pub fn serre_words(alg: &Algebra, i: usize, j: usize) -> Vec<(i64, Vec<usize>)> {
    ad_power_words(i, j, (1 - alg.datum().cij(i, j)) as usize)
}

/// Per-e counting data and Euler characteristics of Grlf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FPolynomial {
    pub rank: Vec<i64>,
    pub terms: BTreeMap<Vec<i64>, i64>,
}

#[derive(Serialize, Deserialize)]
struct FPolyTerm {
    e: Vec<i64>,
    coeff: i64,
}

#[derive(Serialize, Deserialize)]
struct FPolyJson {
    rank: Vec<i64>,
    terms: Vec<FPolyTerm>,
}

impl FPolynomial {
    /// `{"rank": [...], "terms": [{"e": [...], "coeff": n}]}` with zero
    /// terms dropped.
    pub fn to_json(&self) -> serde_json::Value {
        let doc = FPolyJson {
            rank: self.rank.clone(),
            terms: self.terms.iter().filter(|(_, &c)| c != 0).map(|(e, &c)| FPolyTerm { e: e.clone(), coeff: c }).collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: FPolyJson = serde_json::from_value(v.clone())?;
        Ok(Self { rank: doc.rank, terms: doc.terms.into_iter().map(|t| (t.e, t.coeff)).collect() })
    }

    /// Terms with nonzero coefficient.
    pub fn support(&self) -> BTreeMap<Vec<i64>, i64> {
        self.terms.iter().filter(|(_, &c)| c != 0).map(|(e, &c)| (e.clone(), c)).collect()
    }
}

fn boxes(r: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &x in r {
        out = out.into_iter().flat_map(|v| (0..=x).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out
}

/// `F_M = Σ_e χ(Grlf_e(M)) Y^e`.
pub fn f_polynomial(model: &IntegralModel, primes: &[u64]) -> Result<FPolynomial> {
    Ok(f_polynomial_with_counts(model, primes)?.0)
}

/// [`f_polynomial`] together with the counting polynomial of each `Grlf_e`.
pub fn f_polynomial_with_counts(model: &IntegralModel, primes: &[u64]) -> Result<(FPolynomial, BTreeMap<Vec<i64>, CountingPolynomial>)> {
    let rank = model.at(primes[0])?.rank_vector()?;
    let per_e = boxes(&rank)
        .into_par_iter()
        .map(|e| {
            let (chi, poly) = euler_char_grlf(model, &e, primes)?;
            let c = chi.to_i64().ok_or_else(|| Error::TooLarge("Euler characteristic".into()))?;
            Ok((e, c, poly))
        })
        .collect::<Result<Vec<_>>>()?;
    let terms = per_e.iter().map(|(e, c, _)| (e.clone(), *c)).collect();
    let counts = per_e.into_iter().map(|(e, _, poly)| (e, poly)).collect();
    Ok((FPolynomial { rank, terms }, counts))
}

pub fn g_vector(alg: &Algebra, rank: &[i64]) -> Result<Vec<i64>> {
    Ok(alg.datum().forms(alg.omega())?.g_vector(rank))
}

/// Root module tables over each prime for one algebra.
pub struct RootTables {
    alg: Arc<Algebra>,
    cache: Mutex<HashMap<u64, Arc<RootModuleTable<Fp>>>>,
}

impl RootTables {
    pub fn new(alg: Arc<Algebra>) -> Self {
        Self { alg, cache: Mutex::new(HashMap::new()) }
    }

    pub fn at(&self, p: u64) -> Result<Arc<RootModuleTable<Fp>>> {
        if let Some(t) = self.cache.lock().unwrap().get(&p) {
            return Ok(t.clone());
        }
        let t = Arc::new(all_root_modules(&self.alg, &PrimeField::new(p)?)?);
        self.cache.lock().unwrap().insert(p, t.clone());
        Ok(t)
    }

    pub fn roots(&self, p: u64) -> Result<Vec<RootVector>> {
        Ok(self.at(p)?.roots.clone())
    }

    /// `M(m) = ⊕ M(β_k)^{m_k}` over `F_p`.
    pub fn pbw_module(&self, p: u64, m: &[usize]) -> Result<FpModule> {
        let t = self.at(p)?;
        let mut acc = Module::zero(self.alg.clone(), &PrimeField::new(p)?);
        for (k, &mult) in m.iter().enumerate() {
            acc = acc.direct_sum(&t.modules[k].direct_power(mult))?;
        }
        Ok(acc)
    }

    /// Model of a single root module `M(β_k)`.
    pub fn model(self: &Arc<Self>, k: usize) -> IntegralModel {
        let me = self.clone();
        IntegralModel::from_fn(move |f| Ok(me.at(f.p())?.modules[k].clone()))
    }

    pub fn pbw_model(self: &Arc<Self>, m: Vec<usize>) -> IntegralModel {
        let me = self.clone();
        IntegralModel::from_fn(move |f| me.pbw_module(f.p(), &m))
    }
}

fn weight(roots: &[RootVector], m: &[usize]) -> Vec<i64> {
    let n = roots.first().map_or(0, Vec::len);
    let mut w = vec![0; n];
    for (beta, &k) in roots.iter().zip(m) {
        for (x, b) in w.iter_mut().zip(beta) {
            *x += b * k as i64;
        }
    }
    w
}

/// Factor sequence of `θ_n = θ_{β_r}^{n_r} * ... * θ_{β_1}^{n_1}` from the
/// bottom: `n_r` copies of `β_r` first.
fn pbw_factor_indices(n: &[usize]) -> Vec<usize> {
    (0..n.len()).rev().flat_map(|k| std::iter::repeat_n(k, n[k])).collect()
}

/// `δ_{M(m)}(θ_n)`: χ of flags of `M(m)` with subquotients
/// `M(β_r)^{n_r}, ..., M(β_1)^{n_1}` from the bottom, divided by `Π n_k!`.
pub fn pbw_pairing(tables: &Arc<RootTables>, m: &[usize], n: &[usize], primes: &[u64]) -> Result<BigRational> {
    let roots = tables.roots(primes[0])?;
    if weight(&roots, m) != weight(&roots, n) {
        return Ok(BigRational::zero());
    }
    let order = pbw_factor_indices(n);
    let model = tables.pbw_model(m.to_vec());
    let m0 = model.at(primes[0])?;
    let bound = m0.total_dim() * m0.total_dim() / 2;
    let count = |p: u64| -> Result<BigInt> {
        let t = tables.at(p)?;
        let factors: Vec<&FpModule> = order.iter().map(|&k| &t.modules[k]).collect();
        Ok(BigInt::from(count_iso_flags(&*model.at(p)?, &factors)?))
    };
    let chi = interpolate(&count, primes, bound)?.chi();
    let norm: BigInt = n.iter().map(|&k| (1..=k as u64).product::<u64>()).map(BigInt::from).product();
    Ok(BigRational::new(chi, norm))
}

/// Whether `M` has a flag with subquotients `M(β_{k})^{mult}` in the given
/// order (bottom first), reported per prime.
pub fn filtration_exists(
    tables: &Arc<RootTables>,
    model: &IntegralModel,
    ordered_factors: &[(usize, usize)],
    primes: &[u64],
) -> Result<Vec<(u64, bool)>> {
    primes
        .par_iter()
        .map(|&p| {
            let t = tables.at(p)?;
            let factors: Vec<&FpModule> = ordered_factors.iter().flat_map(|&(k, mult)| std::iter::repeat_n(&t.modules[k], mult)).collect();
            Ok((p, iso_flag_exists(&*model.at(p)?, &factors)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{named_datum, Orientation};
    use crate::module::Algebra;

    fn b2() -> Arc<Algebra> {
        let d = named_datum("B2").unwrap();
        Algebra::h(&d, &Orientation::new(&d, [(0, 1)]).unwrap())
    }

    /// Free rank-`e` submodules of a module by brute force over all
    /// subspaces of dimension `c e`.
    fn brute_force_free(eps: &Matrix<Fp>, c: usize, e: usize) -> u128 {
        let f = *eps.field();
        let dim = eps.rows();
        let q = f.p();
        let mut seen = std::collections::HashSet::new();
        let k = c * e;
        for_each_vector(q, dim * k, |x| {
            let m = Matrix::from_vec(&f, dim, k, x.to_vec());
            if m.rank() == k {
                let stable = m.spans(&eps.mul(&m));
                let free = eps.pow(c - 1).mul(&m).rank() == e;
                if stable && free {
                    seen.insert(m.canonical_span().to_vec());
                }
            }
            true
        });
        seen.len() as u128
    }

    #[test]
    fn closed_form_matches_brute_force_and_enumeration() {
        let f = PrimeField::new(3).unwrap();
        // H^1 ⊕ K[ε]/ε with c = 2: dim 3
        let mut eps = Matrix::zeros(&f, 3, 3);
        eps.set(1, 0, 1);
        for e in 0..=1 {
            let brute = brute_force_free(&eps, 2, e);
            let closed = free_submodule_count(3, 1, 2, e, 3).unwrap();
            let mut listed = 0u128;
            for_each_free_submodule(&eps, 2, e, &Cell::new(1000), &mut |_| {
                listed += 1;
                Ok(true)
            })
            .unwrap();
            assert_eq!((brute, listed), (closed, closed));
        }
        let two = crate::matrix::free_nilpotent(&f, 2, 2);
        assert_eq!(brute_force_free(&two, 2, 1), free_submodule_count(4, 2, 2, 1, 3).unwrap());
    }

    #[test]
    fn grassmannian_of_two_simples() {
        let alg = b2();
        let e1 = Module::generalized_simple(alg.clone(), &Rationals, 0).unwrap();
        let model = IntegralModel::from_rational(e1.direct_power(2));
        for &p in &DEFAULT_PRIMES {
            let count = count_locally_free_submodules(&model.at(p).unwrap(), &[1, 0]).unwrap();
            let oracle = (p.pow(4) - p.pow(2)) / (p.pow(2) - p);
            assert_eq!(count, oracle as u128);
            assert_eq!(count_locally_free_submodules(&model.at(p).unwrap(), &[0, 0]).unwrap(), 1);
        }
        let (chi, poly) = euler_char_grlf(&model, &[1, 0], &DEFAULT_PRIMES).unwrap();
        assert_eq!(chi, BigInt::from(2));
        assert_eq!(poly.coefficients, vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)]);
        assert_eq!(flag_euler(&model, &[0, 0], &DEFAULT_PRIMES).unwrap(), BigInt::from(2));
        assert_eq!(flag_euler(&model, &[0, 1], &DEFAULT_PRIMES).unwrap(), BigInt::zero());
    }

    #[test]
    fn f_polynomials_of_simples_and_g_vectors() {
        let alg = b2();
        let e1 = Module::generalized_simple(alg.clone(), &Rationals, 0).unwrap();
        let fp = f_polynomial(&IntegralModel::from_rational(e1), &DEFAULT_PRIMES).unwrap();
        assert_eq!(fp.support(), BTreeMap::from([(vec![0, 0], 1), (vec![1, 0], 1)]));
        assert_eq!(g_vector(&alg, &[1, 0]).unwrap(), vec![-1, 2]);
    }

    #[test]
    fn interpolation_rejects_non_polynomial_counts() {
        let err = interpolate(&|p| Ok(BigInt::from(p % 4)), &DEFAULT_PRIMES, 2).unwrap_err();
        assert!(matches!(err, Error::InterpolationInconsistent(_)));
        let poly = interpolate(&|p| Ok(BigInt::from(p * p + 1)), &DEFAULT_PRIMES, 4).unwrap();
        assert_eq!(poly.chi(), BigInt::from(2));
    }

    #[test]
    fn pbw_units_and_nofilt() {
        let tables = Arc::new(RootTables::new(b2()));
        for k in 0..4 {
            let mut u = vec![0; 4];
            u[k] = 1;
            assert_eq!(pbw_pairing(&tables, &u, &u, &DEFAULT_PRIMES).unwrap(), BigRational::one());
        }
        let m = [0, 1, 0, 0];
        let n = [1, 0, 0, 1];
        assert_eq!(pbw_pairing(&tables, &m, &n, &DEFAULT_PRIMES).unwrap(), BigRational::zero());
        let two = [2, 0, 0, 0];
        assert_eq!(pbw_pairing(&tables, &two, &two, &DEFAULT_PRIMES).unwrap(), BigRational::one());
        let model = tables.model(1);
        let up = filtration_exists(&tables, &model, &[(0, 1), (3, 1)], &DEFAULT_PRIMES).unwrap();
        let down = filtration_exists(&tables, &model, &[(3, 1), (0, 1)], &DEFAULT_PRIMES).unwrap();
        assert!(up.iter().all(|&(_, b)| b));
        assert!(down.iter().all(|&(_, b)| !b));
    }
}
