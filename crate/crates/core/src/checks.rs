//! Whole-datum consistency checks. Each returns a [`CheckReport`]; the
//! command line tool prints them and the acceptance suite asserts on them.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cartan::{mat_mul, mat_vec, root_label, sort_roots, CartanDatum, Orientation, RootVector};
use crate::cluster::calibrated_match;
use crate::error::{Error, Result};
use crate::field::{PrimeField, Rationals};
use crate::functors::{all_root_modules, homext_table, predicted_homext, tau, RootModuleTable};
use crate::grassmann::{
    f_polynomial_with_counts, filtration_exists, g_vector, pbw_pairing, rank_flag_exists, serre_words, theta_eval, CountingPolynomial,
    FPolynomial, IntegralModel, RootTables,
};
use crate::hmod::{
    arrow_solution_dim, ext1_dim, ext_from_resolution, is_indecomposable, is_isomorphic, projective_module, random_locally_free,
};
use crate::io::{module_to_json, ModuleJson};
use crate::module::{Algebra, AlgebraKind, Module};
use crate::pimod::{ext1_pi, hom_pi, is_crystal_module, is_e_filtered, non_e_filtered_fixture, predicted_ext1_pi, random_e_filtered};

/// Rows for csv/table output.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c.clone() })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let cols = self.headers.len();
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl CheckReport {
    pub fn new(name: &str, passed: bool, summary: String, details: Value) -> Self {
        Self { name: name.to_string(), passed, summary, details, table: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    /// Conjunction of several reports under one name.
    pub fn combine(name: &str, parts: Vec<CheckReport>) -> Self {
        let passed = parts.iter().all(|p| p.passed);
        let summary = parts.iter().map(|p| format!("{}: {}", p.name, p.summary)).collect::<Vec<_>>().join("; ");
        let details = Value::Array(parts.iter().map(|p| serde_json::to_value(p).expect("plain data")).collect());
        Self::new(name, passed, summary, details)
    }
}

fn vec_text(v: &[i64]) -> String {
    root_label(v)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Positive roots by Weyl orbit closure against the β-sequence of a
/// reduced word for `w_0`.
pub fn roots_check(datum: &CartanDatum, omega: &Orientation) -> Result<CheckReport> {
    if !datum.is_dynkin() {
        return Err(Error::NotDynkin);
    }
    let orbit = sort_roots(datum.positive_roots_by_orbit()?);
    let word = datum.w0_word(omega)?;
    let (beta, _) = datum.beta_gamma(&word)?;
    let passed = orbit == sort_roots(beta.clone());
    let mut table = Table::new(&["k", "beta", "height"]);
    for (k, b) in beta.iter().enumerate() {
        table.push(vec![(k + 1).to_string(), vec_text(b), b.iter().sum::<i64>().to_string()]);
    }
    let details = json!({
        "count": orbit.len(),
        "orbit": orbit,
        "beta": beta,
        "word": word.iter().map(|i| i + 1).collect::<Vec<_>>(),
    });
    Ok(CheckReport::new("roots", passed, format!("{} positive roots, orbit and β-sequence agree: {passed}", orbit.len()), details)
        .with_table(table))
}

/// `-R^{-1}(C-R)` against the product of simple reflections for every
/// orientation, at `D` and `2D`. For Dynkin data the Coxeter matrix also
/// has order `h = 2|Δ^+|/n` and a reduced word for `w_0` exists.
pub fn coxeter_check(datum: &CartanDatum) -> Result<CheckReport> {
    if !datum.is_dynkin() {
        return Err(Error::NotDynkin);
    }
    let n = datum.n();
    let h = 2 * datum.positive_roots()?.len() / n;
    let mut cases = 0;
    let mut failures = Vec::new();
    for scale in [1, 2] {
        let d = datum.scaled(scale)?;
        for omega in Orientation::all(&d) {
            cases += 1;
            let forms = d.forms(&omega)?;
            let product = d.coxeter_product(&omega);
            d.w0_word(&omega)?;
            let mut power = crate::cartan::identity(n);
            for _ in 0..h {
                power = mat_mul(&power, &forms.coxeter_mat);
            }
            if forms.coxeter_mat != product || power != crate::cartan::identity(n) {
                failures.push(json!({"D": d.d(), "Omega": omega.to_one_based(), "coxeter_mat": forms.coxeter_mat, "product": product}));
            }
        }
    }
    let passed = failures.is_empty();
    Ok(CheckReport::new(
        "coxeter",
        passed,
        format!("{}/{} orientation-symmetrizer cases agree", cases - failures.len(), cases),
        json!({"cases": cases, "coxeter_number": h, "failures": failures}),
    ))
}

/// Root modules over the rationals: ranks, relations, rigidity,
/// indecomposability and pairwise non-isomorphism.
pub fn root_modules_check(alg: &Arc<Algebra>, seed: u64) -> Result<(CheckReport, RootModuleTable<Rationals>)> {
    let table = all_root_modules(alg, &Rationals)?;
    let positive = sort_roots(alg.datum().positive_roots()?);
    let ranks_ok = sort_roots(table.roots.clone()) == positive;
    let rows = table
        .modules
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let mut rng = rng_for(seed, k as u64);
            let relations = m.check_relations().is_empty();
            let rigid = ext1_dim(m, m)? == 0;
            let indecomposable = is_indecomposable(m, &mut rng)?;
            Ok((relations, rigid, indecomposable))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut distinct = true;
    let r = table.modules.len();
    for a in 0..r {
        for b in a + 1..r {
            let mut rng = rng_for(seed, (r + a * r + b) as u64);
            if is_isomorphic(&table.modules[a], &table.modules[b], &mut rng)? {
                distinct = false;
            }
        }
    }
    let mut t = Table::new(&["k", "beta", "dims", "relations", "rigid", "indecomposable"]);
    for (k, (beta, (rel, rig, ind))) in table.roots.iter().zip(&rows).enumerate() {
        let dims: Vec<i64> = table.modules[k].dims().iter().map(|&d| d as i64).collect();
        t.push(vec![(k + 1).to_string(), vec_text(beta), vec_text(&dims), rel.to_string(), rig.to_string(), ind.to_string()]);
    }
    let all_rows = rows.iter().all(|&(a, b, c)| a && b && c);
    let passed = ranks_ok && all_rows && distinct && r == positive.len();
    let details = json!({
        "count": r,
        "ranks_equal_positive_roots": ranks_ok,
        "pairwise_non_isomorphic": distinct,
        "modules": table.roots.iter().zip(&rows).map(|(b, &(rel, rig, ind))| json!({
            "beta": b, "relations": rel, "rigid": rig, "indecomposable": ind
        })).collect::<Vec<_>>(),
    });
    let summary =
        format!("{r} root modules for {} positive roots; all rigid, indecomposable, distinct: {}", positive.len(), all_rows && distinct);
    Ok((CheckReport::new("root-modules", passed, summary, details).with_table(t), table))
}

fn random_rank(rng: &mut ChaCha8Rng, n: usize, max: i64) -> Vec<i64> {
    loop {
        let r: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max)).collect();
        if r.iter().any(|&x| x > 0) {
            return r;
        }
    }
}

/// `dim Hom - dim Ext^1 = <rk M, rk N>` on random locally free pairs.
pub fn euler_check(alg: &Arc<Algebra>, pairs: usize, max_entry: i64, seed: u64) -> Result<CheckReport> {
    let n = alg.n();
    let results = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let (r, s) = (random_rank(&mut rng, n, max_entry), random_rank(&mut rng, n, max_entry));
            let m = random_locally_free(alg.clone(), &Rationals, &r, &mut rng);
            let x = random_locally_free(alg.clone(), &Rationals, &s, &mut rng);
            let (ext, hom) = ext_from_resolution(&m, &x);
            let euler = alg.euler_form(&r, &s);
            Ok((r, s, hom, ext, euler))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<Value> = results
        .iter()
        .filter(|(_, _, h, e, q)| *h as i64 - *e as i64 != *q)
        .map(|(r, s, h, e, q)| json!({"rk_m": r, "rk_n": s, "hom": h, "ext": e, "euler": q}))
        .collect();
    Ok(CheckReport::new(
        "euler-form",
        failures.is_empty(),
        format!("{}/{} pairs satisfy dim Hom - dim Ext^1 = <rk M, rk N>", pairs - failures.len(), pairs),
        json!({"pairs": pairs, "pairs_with_ext": results.iter().filter(|x| x.3 > 0).count(), "failures": failures}),
    ))
}

fn homext_report(table: &RootModuleTable<Rationals>, alg: &Algebra) -> Result<CheckReport> {
    let measured = homext_table(table)?;
    let predicted = predicted_homext(alg, &table.roots);
    let r = table.roots.len();
    let mut mismatches = Vec::new();
    let mut t = Table::new(&["i", "j", "hom", "ext", "predicted_hom", "predicted_ext"]);
    for i in 0..r {
        for j in 0..r {
            let (h, e) = measured[i][j];
            let (ph, pe) = predicted[i][j];
            if (h as i64, e as i64) != (ph, pe) {
                mismatches.push(json!({"i": i + 1, "j": j + 1, "measured": [h, e], "predicted": [ph, pe]}));
            }
            t.push(vec![(i + 1).to_string(), (j + 1).to_string(), h.to_string(), e.to_string(), ph.to_string(), pe.to_string()]);
        }
    }
    let details = json!({"roots": table.roots, "hom": measured.iter().map(|row| row.iter().map(|x| x.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "ext": measured.iter().map(|row| row.iter().map(|x| x.1).collect::<Vec<_>>()).collect::<Vec<_>>(), "mismatches": mismatches});
    Ok(CheckReport::new(
        "homext",
        mismatches.is_empty(),
        format!("{}/{} entries match the <β_i,β_j> prediction", r * r - mismatches.len(), r * r),
        details,
    )
    .with_table(t))
}

/// Measured `(dim Hom, dim Ext^1)` between root modules against
/// `(<β_i,β_j>, 0)` above the diagonal and `(0, -<β_i,β_j>)` below.
pub fn homext_check(alg: &Arc<Algebra>) -> Result<CheckReport> {
    let table = all_root_modules(alg, &Rationals)?;
    homext_report(&table, alg)
}

/// `rk τM(β) = Φ β` for non-projective root modules and `τP_i = 0`.
pub fn tau_check(alg: &Arc<Algebra>, seed: u64) -> Result<CheckReport> {
    let table = all_root_modules(alg, &Rationals)?;
    let cox = alg.datum().forms(alg.omega())?.coxeter_mat;
    let projectives = (0..alg.n()).map(|i| projective_module(alg.clone(), &Rationals, i)).collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut t = Table::new(&["k", "beta", "projective", "rk_tau", "expected"]);
    let mut rng = rng_for(seed, 0);
    let mut projective_roots = 0;
    for (k, (beta, m)) in table.roots.iter().zip(&table.modules).enumerate() {
        let mut projective = false;
        for p in &projectives {
            if p.dims() == m.dims() && is_isomorphic(p, m, &mut rng)? {
                projective = true;
            }
        }
        let t_m = tau(m)?;
        let rk = if t_m.is_zero() { vec![0; alg.n()] } else { t_m.rank_vector()? };
        let expected = if projective { vec![0; alg.n()] } else { mat_vec(&cox, beta) };
        projective_roots += projective as usize;
        if rk != expected || !t_m.check_relations().is_empty() {
            failures.push(json!({"beta": beta, "rk_tau": rk, "expected": expected}));
        }
        t.push(vec![(k + 1).to_string(), vec_text(beta), projective.to_string(), vec_text(&rk), vec_text(&expected)]);
    }
    for (i, p) in projectives.iter().enumerate() {
        if !tau(p)?.is_zero() {
            failures.push(json!({"projective": i + 1, "tau": "nonzero"}));
        }
    }
    let orbits = table
        .modules
        .par_iter()
        .map(|m| {
            let mut ranks = vec![m.rank_vector()?];
            let mut cur = m.clone();
            while ranks.len() <= table.roots.len() {
                cur = tau(&cur)?;
                if cur.is_zero() {
                    break;
                }
                ranks.push(cur.rank_vector()?);
            }
            Ok(ranks)
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = failures.is_empty() && projective_roots == alg.n();
    Ok(CheckReport::new(
        "tau",
        passed,
        format!("{} root modules, {} projective; rank action matches Φ: {}", table.roots.len(), projective_roots, failures.is_empty()),
        json!({"coxeter_mat": cox, "failures": failures, "orbits": orbits}),
    )
    .with_table(t))
}

/// Module-side F-polynomials and g-vectors of the root modules, with the
/// counting polynomial behind each coefficient.
pub struct ModuleSide {
    pub entries: Vec<(RootVector, FPolynomial, Vec<i64>)>,
    pub counts: Vec<std::collections::BTreeMap<Vec<i64>, CountingPolynomial>>,
}

pub fn module_side(alg: &Arc<Algebra>, primes: &[u64]) -> Result<ModuleSide> {
    let tables = Arc::new(RootTables::new(alg.clone()));
    let roots = tables.roots(primes[0])?;
    let rows = (0..roots.len())
        .into_par_iter()
        .map(|k| {
            let (f, counts) = f_polynomial_with_counts(&tables.model(k), primes)?;
            Ok(((roots[k].clone(), f, g_vector(alg, &roots[k])?), counts))
        })
        .collect::<Result<Vec<_>>>()?;
    let (entries, counts) = rows.into_iter().unzip();
    Ok(ModuleSide { entries, counts })
}

/// `(F_{M(β)}, -Rβ)` against the cluster variables of the acyclic seed.
pub fn cluster_check(alg: &Arc<Algebra>, primes: &[u64]) -> Result<CheckReport> {
    let side = module_side(alg, primes)?;
    let report = calibrated_match(alg.datum(), alg.omega(), &side.entries)?;
    let mut t = Table::new(&["root", "g", "matched", "F"]);
    for e in &report.entries {
        t.push(vec![vec_text(&e.root), vec_text(&e.g), e.matched.to_string(), e.f.to_string()]);
    }
    Ok(CheckReport::new("cluster-match", report.all_matched(), report.summary(), serde_json::to_value(&report)?).with_table(t))
}

/// All `m` in `N^r` with `Σ m_k β_k = w`.
pub fn kostant_decompositions(roots: &[RootVector], w: &[i64]) -> Vec<Vec<usize>> {
    fn rec(roots: &[RootVector], k: usize, rest: Vec<i64>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == roots.len() {
            if rest.iter().all(|&x| x == 0) {
                out.push(cur.clone());
            }
            return;
        }
        let mut rest = rest;
        let mut mult = 0;
        loop {
            cur.push(mult);
            rec(roots, k + 1, rest.clone(), cur, out);
            cur.pop();
            rest = rest.iter().zip(&roots[k]).map(|(a, b)| a - b).collect();
            if rest.iter().any(|&x| x < 0) || roots[k].iter().all(|&x| x == 0) {
                break;
            }
            mult += 1;
        }
    }
    let mut out = Vec::new();
    rec(roots, 0, w.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn weights_below(max: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &x in max {
        out = out.into_iter().flat_map(|v| (0..=x).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out
}

/// `δ_{M(m)}(θ_n) = δ_{m,n}` for all PBW indices of weight at most
/// `max_weight`.
pub fn pbw_check(alg: &Arc<Algebra>, max_weight: &[i64], primes: &[u64]) -> Result<CheckReport> {
    let tables = Arc::new(RootTables::new(alg.clone()));
    let roots = tables.roots(primes[0])?;
    let mut pairs = Vec::new();
    for w in weights_below(max_weight) {
        let ms = kostant_decompositions(&roots, &w);
        for m in &ms {
            for n in &ms {
                pairs.push((w.clone(), m.clone(), n.clone()));
            }
        }
    }
    let values = pairs.par_iter().map(|(_, m, n)| pbw_pairing(&tables, m, n, primes)).collect::<Result<Vec<BigRational>>>()?;
    let mut failures = Vec::new();
    let mut t = Table::new(&["weight", "m", "n", "pairing"]);
    for ((w, m, n), v) in pairs.iter().zip(&values) {
        let expected = if m == n { BigRational::one() } else { BigRational::zero() };
        if *v != expected {
            failures.push(json!({"m": m, "n": n, "value": v.to_string()}));
        }
        let as_i64 = |x: &[usize]| x.iter().map(|&k| k as i64).collect::<Vec<_>>();
        t.push(vec![vec_text(w), vec_text(&as_i64(m)), vec_text(&as_i64(n)), v.to_string()]);
    }
    Ok(CheckReport::new(
        "pbw",
        failures.is_empty(),
        format!("{}/{} pairings equal δ_(m,n)", pairs.len() - failures.len(), pairs.len()),
        json!({"roots": roots, "max_weight": max_weight, "pairs": pairs.len(), "failures": failures}),
    )
    .with_table(t))
}

/// `(ad θ_i)^{1-c_ij}(θ_j)` on random locally free modules of rank
/// `(1-c_ij)α_i + α_j` over the rationals.
pub fn serre_check(alg: &Arc<Algebra>, i: usize, j: usize, count: usize, seed: u64, primes: &[u64]) -> Result<CheckReport> {
    let datum = alg.datum();
    datum.check_vertex(i)?;
    datum.check_vertex(j)?;
    if i == j {
        return Err(Error::InvalidVertex(j));
    }
    let mut rank = vec![0; alg.n()];
    rank[i] = 1 - datum.cij(i, j);
    rank[j] = 1;
    let words = serre_words(alg, i, j);
    let values = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let m = random_locally_free(alg.clone(), &Rationals, &rank, &mut rng);
            theta_eval(&IntegralModel::from_rational(m), &words, primes)
        })
        .collect::<Result<Vec<BigInt>>>()?;
    let nonzero: Vec<(usize, String)> = values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k, v.to_string())).collect();
    Ok(CheckReport::new(
        "serre",
        nonzero.is_empty(),
        format!("{}/{} modules of rank {} annihilate the Serre element", count - nonzero.len(), count, vec_text(&rank)),
        json!({"rank": rank, "words": words, "nonzero": nonzero}),
    ))
}

fn random_sequence(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> Vec<usize> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| rng.gen_range(0..n)).collect()
}

/// Ext-symmetry and `dim Ext^1 = dim Hom(M,N) + dim Hom(N,M) - (rk M, rk N)`
/// on random E-filtered pairs.
pub fn pi_homology_check(pi: &Arc<Algebra>, pairs: usize, max_len: usize, seed: u64) -> Result<CheckReport> {
    if pi.kind() != AlgebraKind::Pi {
        return Err(Error::SpecMismatch);
    }
    let n = pi.n();
    let results = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let (s, t) = (random_sequence(&mut rng, n, max_len), random_sequence(&mut rng, n, max_len));
            let m = random_e_filtered(pi, &Rationals, &s, &mut rng)?;
            let x = random_e_filtered(pi, &Rationals, &t, &mut rng)?;
            let relations = m.check_relations().is_empty() && x.check_relations().is_empty();
            let (e_mx, e_xm) = (ext1_pi(&m, &x)?, ext1_pi(&x, &m)?);
            let predicted = predicted_ext1_pi(&m, &x)?;
            Ok(json!({
                "seq_m": s, "seq_n": t, "relations": relations,
                "ext_mn": e_mx, "ext_nm": e_xm, "hom_mn": hom_pi(&m, &x)?, "hom_nm": hom_pi(&x, &m)?, "predicted": predicted,
                "ok": relations && e_mx == e_xm && e_mx as i64 == predicted,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<&Value> = results.iter().filter(|v| v["ok"] != json!(true)).collect();
    Ok(CheckReport::new(
        "pi-homology",
        failures.is_empty(),
        format!("{}/{} pairs satisfy Ext-symmetry and the Hom formula", pairs - failures.len(), pairs),
        json!({"pairs": pairs, "pairs_with_ext": results.iter().filter(|v| v["ext_mn"] != json!(0)).count(), "failures": failures}),
    ))
}

fn distinct_permutations(multiset: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut [usize], cur: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..counts.len() {
            if counts[v] > 0 {
                counts[v] -= 1;
                cur.push(v);
                rec(counts, cur, len, out);
                cur.pop();
                counts[v] += 1;
            }
        }
    }
    let n = multiset.iter().max().map_or(0, |&m| m + 1);
    let mut counts = vec![0; n];
    for &v in multiset {
        counts[v] += 1;
    }
    let mut out = Vec::new();
    rec(&mut counts, &mut Vec::new(), multiset.len(), &mut out);
    out
}

fn serre_rank_letters(pi: &Algebra, i: usize, j: usize) -> Vec<usize> {
    let mut letters = vec![i; (1 - pi.datum().cij(i, j)) as usize];
    letters.push(j);
    letters
}

/// `θ̃_ij = (ad θ_i)^{1-c_ij}(θ_j)` evaluated at a Π-module.
pub fn theta_tilde(m: &Module<Rationals>, i: usize, j: usize, primes: &[u64]) -> Result<BigInt> {
    theta_eval(&IntegralModel::from_rational(m.clone()), &serre_words(m.alg(), i, j), primes)
}

/// Random E-filtered Π-modules of rank `(1-c_ij)α_i + α_j`; the crystal
/// ones among them must satisfy `θ̃_ij = 0`.
pub fn crystal_check(pi: &Arc<Algebra>, i: usize, j: usize, count: usize, seed: u64, primes: &[u64]) -> Result<CheckReport> {
    let seqs = distinct_permutations(&serre_rank_letters(pi, i, j));
    let mut rng = rng_for(seed, 0);
    let mut crystal = Vec::new();
    let mut attempts = 0;
    while crystal.len() < count && attempts < 50 * count {
        attempts += 1;
        let seq = seqs.choose(&mut rng).expect("nonempty").clone();
        let m = random_e_filtered(pi, &Rationals, &seq, &mut rng)?;
        if is_crystal_module(&m)? {
            crystal.push((seq, m));
        }
    }
    let values = crystal.par_iter().map(|(_, m)| theta_tilde(m, i, j, primes)).collect::<Result<Vec<_>>>()?;
    let nonzero: Vec<Value> = crystal
        .iter()
        .zip(&values)
        .filter(|(_, v)| !v.is_zero())
        .map(|((seq, _), v)| json!({"seq": seq, "value": v.to_string()}))
        .collect();
    let passed = crystal.len() >= count && nonzero.is_empty();
    Ok(CheckReport::new(
        "crystal",
        passed,
        format!("{} crystal modules from {attempts} attempts, {} with θ̃ = 0", crystal.len(), crystal.len() - nonzero.len()),
        json!({"crystal": crystal.len(), "attempts": attempts, "nonzero": nonzero}),
    ))
}

/// Witness of a nonvanishing `θ̃_ij` on an E-filtered module.
#[derive(Clone, Debug)]
pub struct NoSerreWitness {
    pub attempt: usize,
    pub seq: Vec<usize>,
    pub value: BigInt,
    pub module: Module<Rationals>,
}

/// Randomized search for an E-filtered Π-module of rank
/// `(1-c_ij)α_i + α_j` with `θ̃_ij ≠ 0`.
pub fn noserre_search(pi: &Arc<Algebra>, i: usize, j: usize, attempts: usize, seed: u64, primes: &[u64]) -> Result<Option<NoSerreWitness>> {
    let seqs = distinct_permutations(&serre_rank_letters(pi, i, j));
    let mut rng = rng_for(seed, 1);
    for attempt in 0..attempts {
        let seq = seqs.choose(&mut rng).expect("nonempty").clone();
        let m = random_e_filtered(pi, &Rationals, &seq, &mut rng)?;
        let value = theta_tilde(&m, i, j, primes)?;
        if !value.is_zero() {
            return Ok(Some(NoSerreWitness { attempt, seq, value, module: m }));
        }
    }
    Ok(None)
}

/// Verifies a frozen witness: relations, an E-filtration and `θ̃_ij ≠ 0`.
pub fn noserre_fixture_check(m: &Module<Rationals>, i: usize, j: usize, seed: u64, primes: &[u64]) -> Result<CheckReport> {
    let relations = m.check_relations();
    let filt = is_e_filtered(m, &mut rng_for(seed, 2))?;
    let value = theta_tilde(m, i, j, primes)?;
    let crystal = is_crystal_module(m)?;
    let passed = relations.is_empty() && filt.witness.is_some() && !value.is_zero() && !crystal;
    Ok(CheckReport::new(
        "noserre-fixture",
        passed,
        format!("fixture θ̃ = {value}, E-filtered: {}, crystal: {crystal}", filt.witness.is_some()),
        json!({"relations": relations, "filtration": filt.witness, "value": value.to_string(), "crystal": crystal, "rank": m.rank_vector()?}),
    ))
}

/// Structural Π-module checks: relations and E-filtrations of generated
/// modules, and the non-E-filtered fixture.
pub fn pi_structure_check(pi: &Arc<Algebra>, count: usize, seed: u64) -> Result<CheckReport> {
    let n = pi.n();
    let mut rng = rng_for(seed, 3);
    let mut failures = Vec::new();
    for _ in 0..count {
        let seq = random_sequence(&mut rng, n, 3);
        let m = random_e_filtered(pi, &Rationals, &seq, &mut rng)?;
        let filt = is_e_filtered(&m, &mut rng)?;
        if !m.check_relations().is_empty() || filt.witness.is_none() || m.is_locally_free().is_none() {
            failures.push(json!({"seq": seq}));
        }
    }
    let mut fixture = Value::Null;
    let datum = pi.datum();
    if n == 2 && datum.d() == [2, 1] && datum.cij(0, 1) == -1 {
        let m = non_e_filtered_fixture(pi, &Rationals)?;
        let filt = is_e_filtered(&m, &mut rng)?;
        if filt.witness.is_some() || !filt.complete {
            failures.push(json!({"fixture": "expected a certified non-E-filtered module"}));
        }
        fixture = json!({"rank": m.rank_vector()?, "e_filtered": filt.witness.is_some(), "complete": filt.complete});
    }
    Ok(CheckReport::new(
        "pi-structure",
        failures.is_empty(),
        format!("{}/{} generated modules satisfy the relations and are E-filtered", count - failures.len(), count),
        json!({"failures": failures, "non_e_filtered_fixture": fixture}),
    ))
}

/// For each `β_k = Σ m_j β_j` with `m_k = 0`: a flag with subquotients
/// `M(β_j)^{m_j}` in increasing `j` from the bottom exists, while no flag
/// in decreasing `j` exists, neither with isomorphic subquotients nor with
/// locally free subquotients of rank `m_j β_j`. Reported per prime.
pub fn nofilt_check(alg: &Arc<Algebra>, primes: &[u64], only: Option<(usize, Vec<usize>)>) -> Result<CheckReport> {
    let tables = Arc::new(RootTables::new(alg.clone()));
    let roots = tables.roots(primes[0])?;
    let mut cases = Vec::new();
    for (k, beta) in roots.iter().enumerate() {
        for m in kostant_decompositions(&roots, beta) {
            if m[k] == 0 && only.as_ref().is_none_or(|(ok, om)| *ok == k && *om == m) {
                cases.push((k, m));
            }
        }
    }
    let mut passed = !cases.is_empty();
    let mut details = Vec::new();
    let mut t = Table::new(&["k", "decomposition", "prime", "increasing", "decreasing_iso", "decreasing_rank"]);
    for (k, m) in &cases {
        let up: Vec<(usize, usize)> = (0..m.len()).filter(|&j| m[j] > 0).map(|j| (j, m[j])).collect();
        let down: Vec<(usize, usize)> = up.iter().rev().copied().collect();
        let model = tables.model(*k);
        let up_res = filtration_exists(&tables, &model, &up, primes)?;
        let down_res = filtration_exists(&tables, &model, &down, primes)?;
        let down_ranks: Vec<Vec<i64>> = down.iter().map(|&(j, mult)| roots[j].iter().map(|x| x * mult as i64).collect()).collect();
        let rank_res = primes.par_iter().map(|&p| Ok((p, rank_flag_exists(&*model.at(p)?, &down_ranks)?))).collect::<Result<Vec<_>>>()?;
        let decomposition = up.iter().map(|&(j, mult)| format!("{mult}β_{}", j + 1)).collect::<Vec<_>>().join("+");
        for ((&(p, u), &(_, d)), &(_, r)) in up_res.iter().zip(&down_res).zip(&rank_res) {
            passed &= u && !d && !r;
            t.push(vec![(k + 1).to_string(), decomposition.clone(), p.to_string(), u.to_string(), d.to_string(), r.to_string()]);
            details.push(json!({"k": k + 1, "multiplicities": m, "prime": p, "increasing": u, "decreasing_iso": d, "decreasing_rank": r}));
        }
    }
    Ok(CheckReport::new(
        "nofilt",
        passed,
        format!("{} decompositions over {} primes: increasing flags exist, decreasing flags do not: {passed}", cases.len(), primes.len()),
        json!({"roots": roots, "cases": details}),
    )
    .with_table(t))
}

/// `dim` of the arrow data at rank `r` against `Σ c_i r_i^2 - (r,r)/2`
/// for all `r` with `Σ c_i r_i <= bound`, every orientation.
pub fn dimension_check(datum: &CartanDatum, bound: i64) -> Result<CheckReport> {
    let n = datum.n();
    let d = datum.d();
    let mut ranks = Vec::new();
    let maxes: Vec<i64> = d.iter().map(|&c| bound / c).collect();
    for r in weights_below(&maxes) {
        let size: i64 = r.iter().zip(d).map(|(x, c)| x * c).sum();
        if size > 0 && size <= bound {
            ranks.push(r);
        }
    }
    let f = PrimeField::new(crate::grassmann::DEFAULT_PRIMES[0])?;
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut t = Table::new(&["Omega", "r", "measured", "formula"]);
    for omega in Orientation::all(datum) {
        let alg = Algebra::h(datum, &omega);
        for r in &ranks {
            let measured = arrow_solution_dim(&alg, &f, r) as i64;
            let quad: i64 = (0..n).map(|i| d[i] * r[i] * r[i]).sum();
            let sym = datum.sym_form(r, r);
            let formula = quad - sym / 2;
            checked += 1;
            if measured != formula || sym % 2 != 0 {
                failures.push(json!({"Omega": omega.to_one_based(), "r": r, "measured": measured, "formula": formula}));
            }
            t.push(vec![format!("{:?}", omega.to_one_based()), vec_text(r), measured.to_string(), formula.to_string()]);
        }
    }
    Ok(CheckReport::new(
        "dimension",
        failures.is_empty(),
        format!("{}/{checked} rank vectors match Σ c_i r_i^2 - (r,r)/2", checked - failures.len()),
        json!({"bound": bound, "ranks": ranks.len(), "failures": failures}),
    )
    .with_table(t))
}

/// Root modules as JSON documents over the rationals.
pub fn root_module_documents(table: &RootModuleTable<Rationals>) -> Vec<(RootVector, ModuleJson)> {
    table.roots.iter().cloned().zip(table.modules.iter().map(module_to_json)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::named_datum;

    #[test]
    fn kostant_decompositions_count() {
        let d = named_datum("B2").unwrap();
        let roots = d.beta_gamma(&d.w0_word(&Orientation::default_for(&d)).unwrap()).unwrap().0;
        for w in weights_below(&[2, 3]) {
            let listed = kostant_decompositions(&roots, &w).len() as u64;
            assert_eq!(listed, d.kostant_count(&w).unwrap(), "weight {w:?}");
        }
    }

    #[test]
    fn permutations_of_multiset() {
        assert_eq!(distinct_permutations(&[0, 0, 1]), vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn table_output() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
        assert_eq!(t.to_text(), "a  b\n1  x,y\n");
    }
}
