//! Symmetrizable Cartan matrices, orientations, Weyl group action on the
//! root lattice and the associated bilinear forms.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{rational_to_i64, Rationals};
use crate::matrix::Matrix;

pub type RootVector = Vec<i64>;
pub type IntMatrix = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CartanDatum {
    n: usize,
    c: IntMatrix,
    d: Vec<i64>,
    g: IntMatrix,
}

impl CartanDatum {
    /// Validates `C` and the symmetrizer `D` and fills in the gcd table.
    pub fn new(c: IntMatrix, d: Vec<i64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::NotCartan("empty matrix".into()));
        }
        if c.iter().any(|row| row.len() != n) {
            return Err(Error::NotCartan("matrix is not square".into()));
        }
        if d.len() != n {
            return Err(Error::ShapeMismatch(format!("symmetrizer has {} entries, expected {n}", d.len())));
        }
        for i in 0..n {
            if c[i][i] != 2 {
                return Err(Error::NotCartan(format!("c_{}{} = {} != 2", i + 1, i + 1, c[i][i])));
            }
            for j in 0..n {
                if i != j && c[i][j] > 0 {
                    return Err(Error::NotCartan(format!("c_{}{} = {} > 0", i + 1, j + 1, c[i][j])));
                }
                if i != j && (c[i][j] == 0) != (c[j][i] == 0) {
                    return Err(Error::NotCartan(format!("c_{}{} and c_{}{} must vanish together", i + 1, j + 1, j + 1, i + 1)));
                }
            }
        }
        if d.iter().any(|&x| x <= 0) {
            return Err(Error::NonPositiveSymmetrizer(d));
        }
        for i in 0..n {
            for j in 0..n {
                if d[i] * c[i][j] != d[j] * c[j][i] {
                    return Err(Error::NotSymmetrizer(format!(
                        "c_{} c_{}{} = {} but c_{} c_{}{} = {}",
                        i + 1,
                        i + 1,
                        j + 1,
                        d[i] * c[i][j],
                        j + 1,
                        j + 1,
                        i + 1,
                        d[j] * c[j][i]
                    )));
                }
            }
        }
        let g: IntMatrix = (0..n).map(|i| (0..n).map(|j| if i == j { 0 } else { c[i][j].gcd(&c[j][i]) }).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && c[i][j] < 0 {
                    let l = d[i].lcm(&d[j]);
                    if c[i][j] != -(l / d[i]) * g[i][j] {
                        return Err(Error::NotCartan(format!("c_{}{} is not -(lcm/c_i)·g_ij", i + 1, j + 1)));
                    }
                }
            }
        }
        Ok(Self { n, c, d, g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> &IntMatrix {
        &self.c
    }

    pub fn cij(&self, i: usize, j: usize) -> i64 {
        self.c[i][j]
    }

    pub fn d(&self) -> &[i64] {
        &self.d
    }

    /// The symmetrizer entry `c_i`, the nilpotency order of `eps_i`.
    pub fn ci(&self, i: usize) -> usize {
        self.d[i] as usize
    }

    pub fn g(&self, i: usize, j: usize) -> i64 {
        self.g[i][j]
    }

    pub fn lcm(&self, i: usize, j: usize) -> i64 {
        self.d[i].lcm(&self.d[j])
    }

    /// The same Cartan matrix with every symmetrizer entry multiplied by `k`.
    pub fn scaled(&self, k: i64) -> Result<Self> {
        Self::new(self.c.clone(), self.d.iter().map(|x| x * k).collect())
    }

    pub fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex(i))
        }
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| j != i && self.c[i][j] < 0)
    }

    pub fn simple_root(&self, i: usize) -> RootVector {
        let mut v = vec![0; self.n];
        v[i] = 1;
        v
    }

    /// `s_i(alpha) = alpha - (C alpha)_i alpha_i`.
    pub fn reflect_root(&self, i: usize, alpha: &[i64]) -> RootVector {
        let pairing: i64 = (0..self.n).map(|j| self.c[i][j] * alpha[j]).sum();
        let mut out = alpha.to_vec();
        out[i] -= pairing;
        out
    }

    /// Matrix of `s_i` acting on column vectors.
    pub fn reflection_matrix(&self, i: usize) -> IntMatrix {
        (0..self.n).map(|r| (0..self.n).map(|col| i64::from(r == col) - if r == i { self.c[i][col] } else { 0 }).collect()).collect()
    }

    /// `(alpha_i, alpha_j) = c_i c_ij`.
    pub fn gram_sym(&self) -> IntMatrix {
        (0..self.n).map(|i| (0..self.n).map(|j| self.d[i] * self.c[i][j]).collect()).collect()
    }

    pub fn sym_form(&self, a: &[i64], b: &[i64]) -> i64 {
        bilinear(&self.gram_sym(), a, b)
    }

    pub fn weyl_orbit(&self, alpha: &[i64], height_bound: i64) -> Orbit {
        let mut seen: BTreeSet<RootVector> = BTreeSet::new();
        let mut queue = VecDeque::new();
        let mut truncated = false;
        seen.insert(alpha.to_vec());
        queue.push_back(alpha.to_vec());
        while let Some(v) = queue.pop_front() {
            for i in 0..self.n {
                let w = self.reflect_root(i, &v);
                if w.iter().sum::<i64>().abs() > height_bound {
                    truncated = true;
                    continue;
                }
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        Orbit { vectors: seen, truncated }
    }

    /// Positive definiteness of `DC` via leading principal minors.
    pub fn is_dynkin(&self) -> bool {
        let q = Rationals;
        let sym = self.gram_sym();
        (1..=self.n).all(|k| {
            let flat: Vec<i64> = (0..k).flat_map(|i| sym[i][..k].to_vec()).collect();
            Matrix::from_i64(&q, k, k, &flat).det().is_positive()
        })
    }

    /// Best-effort Dynkin type label such as `"B3"` for connected data.
    pub fn dynkin_type(&self) -> Option<String> {
        if !self.is_dynkin() || !self.is_connected() {
            return None;
        }
        let n = self.n;
        if n == 1 {
            return Some("A1".into());
        }
        let edges: Vec<(usize, usize, i64)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.c[i][j] != 0)
            .map(|(i, j)| (i, j, self.c[i][j] * self.c[j][i]))
            .collect();
        let degree = |v: usize| edges.iter().filter(|e| e.0 == v || e.1 == v).count();
        if edges.iter().any(|e| e.2 == 3) {
            return Some("G2".into());
        }
        if let Some(&(i, j, _)) = edges.iter().find(|e| e.2 == 2) {
            if n == 2 {
                return Some("B2".into());
            }
            if degree(i) == 2 && degree(j) == 2 {
                return Some("F4".into());
            }
            let (end, other) = if degree(i) == 1 { (i, j) } else { (j, i) };
            let short_end = self.d[end] < self.d[other];
            return Some(format!("{}{n}", if short_end { "B" } else { "C" }));
        }
        let branch: Vec<usize> = (0..n).filter(|&v| degree(v) == 3).collect();
        if branch.is_empty() {
            return Some(format!("A{n}"));
        }
        let b = branch[0];
        let mut arms: Vec<usize> = self
            .neighbours(b)
            .map(|start| {
                let (mut prev, mut cur, mut len) = (b, start, 1);
                while let Some(next) = self.neighbours(cur).find(|&x| x != prev) {
                    prev = cur;
                    cur = next;
                    len += 1;
                }
                len
            })
            .collect();
        arms.sort();
        match arms.as_slice() {
            [1, 1, _] => Some(format!("D{n}")),
            [1, 2, 2] | [1, 2, 3] | [1, 2, 4] => Some(format!("E{n}")),
            _ => None,
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Orbit closure of the simple roots, restricted to positive vectors.
    pub fn positive_roots_by_orbit(&self) -> Result<Vec<RootVector>> {
        if !self.is_dynkin() {
            return Err(Error::NotDynkin);
        }
        let bound = 10 * self.n as i64 * self.max_abs_entry() * self.n as i64 + 10;
        let mut roots = BTreeSet::new();
        for i in 0..self.n {
            let orbit = self.weyl_orbit(&self.simple_root(i), bound);
            if orbit.truncated {
                return Err(Error::InternalMismatch("finite root orbit was truncated".into()));
            }
            roots.extend(orbit.vectors.into_iter().filter(|v| v.iter().all(|&x| x >= 0)));
        }
        Ok(sort_roots(roots.into_iter().collect()))
    }

    /// Positive roots, computed by orbit closure and by the β-sequence of an
    /// admissible reduced word for the longest element; both must agree.
    pub fn positive_roots(&self) -> Result<Vec<RootVector>> {
        let by_orbit = self.positive_roots_by_orbit()?;
        let omega = Orientation::default_for(self);
        let word = self.w0_word(&omega)?;
        let (betas, _) = self.beta_gamma(&word)?;
        let by_word: BTreeSet<RootVector> = betas.into_iter().collect();
        let orbit_set: BTreeSet<RootVector> = by_orbit.iter().cloned().collect();
        if by_word != orbit_set || by_word.len() != word.len() {
            return Err(Error::InternalMismatch(format!(
                "orbit closure gives {} roots, reduced word gives {}",
                orbit_set.len(),
                by_word.len()
            )));
        }
        Ok(by_orbit)
    }

    fn max_abs_entry(&self) -> i64 {
        self.c.iter().flatten().map(|x| x.abs()).max().unwrap_or(2)
    }

    /// Membership in the fundamental region; the zero vector is excluded.
    pub fn fundamental_region_check(&self, alpha: &[i64]) -> bool {
        let support: Vec<usize> = (0..self.n).filter(|&i| alpha[i] != 0).collect();
        if support.is_empty() || alpha.iter().any(|&x| x < 0) {
            return false;
        }
        let mut seen = BTreeSet::from([support[0]]);
        let mut stack = vec![support[0]];
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if alpha[w] != 0 && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        if seen.len() != support.len() {
            return false;
        }
        (0..self.n).all(|i| self.sym_form(alpha, &self.simple_root(i)) <= 0)
    }

    /// Letters are 0-based. Fails with `NotReduced` when a β leaves the
    /// positive cone.
    pub fn beta_gamma(&self, word: &[usize]) -> Result<(Vec<RootVector>, Vec<RootVector>)> {
        for &i in word {
            self.check_vertex(i)?;
        }
        let l = word.len();
        let mut betas = Vec::with_capacity(l);
        for k in 0..l {
            let mut v = self.simple_root(word[k]);
            for &i in word[..k].iter().rev() {
                v = self.reflect_root(i, &v);
            }
            if v.iter().any(|&x| x < 0) {
                return Err(Error::NotReduced(word.to_vec()));
            }
            betas.push(v);
        }
        let mut gammas = Vec::with_capacity(l);
        for k in 0..l {
            let mut v = self.simple_root(word[k]);
            for &i in &word[k + 1..] {
                v = self.reflect_root(i, &v);
            }
            gammas.push(v);
        }
        // s_{i_l} ... s_{i_1} maps β_k to -γ_k
        for k in 0..l {
            let mut v = betas[k].clone();
            for &i in word {
                v = self.reflect_root(i, &v);
            }
            if v.iter().zip(&gammas[k]).any(|(a, b)| *a != -b) {
                return Err(Error::InternalMismatch(format!("w(β_{}) != -γ_{}", k + 1, k + 1)));
            }
        }
        Ok((betas, gammas))
    }

    /// A `+`-admissible ordering of all vertices: repeatedly take a sink.
    pub fn coxeter_word(&self, omega: &Orientation) -> Vec<usize> {
        let mut word = Vec::with_capacity(self.n);
        let mut cur = omega.clone();
        let mut used = vec![false; self.n];
        for _ in 0..self.n {
            let i = (0..self.n).find(|&i| !used[i] && cur.is_sink(i)).expect("acyclic orientation has a sink");
            used[i] = true;
            word.push(i);
            cur = cur.reflect_unchecked(i);
        }
        word
    }

    /// A `+`-admissible reduced word for the longest Weyl group element.
    pub fn w0_word(&self, omega: &Orientation) -> Result<Vec<usize>> {
        let target = self.positive_roots_by_orbit()?.len();
        let cox = self.coxeter_word(omega);
        let mut word = Vec::new();
        let mut w = identity(self.n);
        if self.w0_search(omega, &cox, target, &mut word, &mut w) {
            Ok(word)
        } else {
            Err(Error::InternalMismatch("no admissible reduced word for w0 found".into()))
        }
    }

    fn w0_search(&self, omega: &Orientation, cox: &[usize], target: usize, word: &mut Vec<usize>, w: &mut IntMatrix) -> bool {
        if word.len() == target {
            return true;
        }
        let start = word.len() % self.n;
        for off in 0..self.n {
            let i = cox[(start + off) % self.n];
            if !omega.is_sink(i) {
                continue;
            }
            // β = w α_i is column i of w
            if (0..self.n).any(|r| w[r][i] < 0) {
                continue;
            }
            let saved = w.clone();
            *w = mat_mul(w, &self.reflection_matrix(i));
            word.push(i);
            let next = omega.reflect_unchecked(i);
            if self.w0_search(&next, cox, target, word, w) {
                return true;
            }
            word.pop();
            *w = saved;
        }
        false
    }

    /// `<alpha_i, alpha_j>` matrix: `c_i` on the diagonal, `c_i c_ij` when
    /// `(j,i)` is in Ω, zero otherwise.
    pub fn gram_euler(&self, omega: &Orientation) -> IntMatrix {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        if i == j {
                            self.d[i]
                        } else if omega.contains(j, i) {
                            self.d[i] * self.c[i][j]
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn euler_form(&self, omega: &Orientation, a: &[i64], b: &[i64]) -> i64 {
        bilinear(&self.gram_euler(omega), a, b)
    }

    pub fn forms(&self, omega: &Orientation) -> Result<FormData> {
        let gram_sym = self.gram_sym();
        let gram_euler = self.gram_euler(omega);
        let r: IntMatrix = gram_euler.iter().enumerate().map(|(i, row)| row.iter().map(|x| x / self.d[i]).collect()).collect();
        for i in 0..self.n {
            for j in 0..self.n {
                if gram_euler[i][j] % self.d[i] != 0 {
                    return Err(Error::InternalMismatch("R is not integral".into()));
                }
            }
        }
        let q = Rationals;
        let to_q = |m: &IntMatrix| {
            let flat: Vec<i64> = m.iter().flatten().copied().collect();
            Matrix::from_i64(&q, self.n, self.n, &flat)
        };
        let rq = to_q(&r);
        let rinv = rq.inverse().ok_or_else(|| Error::InternalMismatch("R is singular".into()))?;
        let cox = rinv.mul(&to_q(&self.c).sub(&rq)).neg();
        let coxeter_mat = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| rational_to_i64(cox.get(i, j)).ok_or_else(|| Error::InternalMismatch("Coxeter matrix is not integral".into())))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<IntMatrix>>()?;
        Ok(FormData { gram_sym, gram_euler, r, coxeter_mat })
    }

    /// `s_{i_n} ··· s_{i_1}` along the admissible Coxeter word.
    pub fn coxeter_product(&self, omega: &Orientation) -> IntMatrix {
        let mut acc = identity(self.n);
        for i in self.coxeter_word(omega) {
            acc = mat_mul(&self.reflection_matrix(i), &acc);
        }
        acc
    }

    /// Number of ways to write `r` as an N-combination of positive roots.
    pub fn kostant_count(&self, r: &[i64]) -> Result<u64> {
        let roots = self.positive_roots_by_orbit()?;
        if r.iter().any(|&x| x < 0) {
            return Ok(0);
        }
        let radix: Vec<usize> = r.iter().map(|&x| x as usize + 1).collect();
        let size: usize = radix.iter().product();
        let decode = |mut idx: usize| {
            let mut v = vec![0i64; radix.len()];
            for (k, &b) in radix.iter().enumerate() {
                v[k] = (idx % b) as i64;
                idx /= b;
            }
            v
        };
        let encode = |v: &[i64]| v.iter().zip(&radix).rev().fold(0usize, |acc, (&x, &b)| acc * b + x as usize);
        let mut table = vec![0u64; size];
        table[0] = 1;
        for beta in &roots {
            for idx in 0..size {
                let v = decode(idx);
                let prev: Vec<i64> = v.iter().zip(beta).map(|(a, b)| a - b).collect();
                if prev.iter().all(|&x| x >= 0) {
                    table[idx] += table[encode(&prev)];
                }
            }
        }
        Ok(table[size - 1])
    }
}

pub fn bilinear(m: &IntMatrix, a: &[i64], b: &[i64]) -> i64 {
    let mut s = 0;
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            s += a[i] * x * b[j];
        }
    }
    s
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn mat_vec(a: &IntMatrix, v: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Orders roots by height, then lexicographically.
pub fn sort_roots(mut roots: Vec<RootVector>) -> Vec<RootVector> {
    roots.sort_by_key(|v| (v.iter().sum::<i64>(), v.clone()));
    roots
}

#[derive(Clone, Debug)]
pub struct Orbit {
    pub vectors: BTreeSet<RootVector>,
    pub truncated: bool,
}

/// `(i, j)` in Ω means the arrows between `i` and `j` point `j -> i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation {
    pairs: BTreeSet<(usize, usize)>,
}

impl Orientation {
    pub fn new(datum: &CartanDatum, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        let n = datum.n();
        for &(i, j) in &pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidOrientation(format!("pair ({}, {}) out of range", i + 1, j + 1)));
            }
            if i == j || datum.cij(i, j) == 0 {
                return Err(Error::InvalidOrientation(format!("no edge between {} and {}", i + 1, j + 1)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if datum.cij(i, j) < 0 {
                    let count = usize::from(pairs.contains(&(i, j))) + usize::from(pairs.contains(&(j, i)));
                    if count != 1 {
                        return Err(Error::InvalidOrientation(format!("edge {}-{} must be oriented exactly once", i + 1, j + 1)));
                    }
                }
            }
        }
        let o = Self { pairs };
        if !o.is_acyclic(n) {
            return Err(Error::InvalidOrientation("orientation has an oriented cycle".into()));
        }
        Ok(o)
    }

    /// Orients every edge `i - j` with `i < j` as `(i, j)`, so arrows point
    /// from larger to smaller index.
    pub fn default_for(datum: &CartanDatum) -> Self {
        let n = datum.n();
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| datum.cij(i, j) < 0).collect();
        Self { pairs }
    }

    /// Every acyclic orientation of the datum's graph.
    pub fn all(datum: &CartanDatum) -> Vec<Self> {
        let n = datum.n();
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| datum.cij(i, j) < 0).collect();
        let mut out = Vec::new();
        for mask in 0u64..(1u64 << edges.len()) {
            let pairs = edges.iter().enumerate().map(|(k, &(i, j))| if mask >> k & 1 == 1 { (j, i) } else { (i, j) }).collect();
            let o = Self { pairs };
            if o.is_acyclic(n) {
                out.push(o);
            }
        }
        out
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// No arrow starts at `i`.
    pub fn is_sink(&self, i: usize) -> bool {
        !self.pairs.iter().any(|&(_, j)| j == i)
    }

    /// No arrow ends at `i`.
    pub fn is_source(&self, i: usize) -> bool {
        !self.pairs.iter().any(|&(h, _)| h == i)
    }

    pub fn reflect(&self, i: usize) -> Result<Self> {
        if !self.is_sink(i) && !self.is_source(i) {
            return Err(Error::NotSinkOrSource(i));
        }
        Ok(self.reflect_unchecked(i))
    }

    fn reflect_unchecked(&self, i: usize) -> Self {
        let pairs = self.pairs.iter().map(|&(a, b)| if a == i || b == i { (b, a) } else { (a, b) }).collect();
        Self { pairs }
    }

    fn is_acyclic(&self, n: usize) -> bool {
        let mut indeg = vec![0usize; n];
        for &(h, _) in &self.pairs {
            indeg[h] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &(h, t) in &self.pairs {
                if t == v {
                    indeg[h] -= 1;
                    if indeg[h] == 0 {
                        stack.push(h);
                    }
                }
            }
        }
        seen == n
    }

    /// Vertices ordered so that heads of arrows come before their tails.
    pub fn sink_first_order(&self, n: usize) -> Vec<usize> {
        let mut out_deg = vec![0usize; n];
        for &(_, t) in &self.pairs {
            out_deg[t] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| out_deg[v] == 0).collect();
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &(h, t) in &self.pairs {
                if h == v {
                    out_deg[t] -= 1;
                    if out_deg[t] == 0 {
                        ready.insert(t);
                    }
                }
            }
        }
        order
    }

    /// 1-based pair list for serialization.
    pub fn to_one_based(&self) -> Vec<[usize; 2]> {
        self.pairs.iter().map(|&(i, j)| [i + 1, j + 1]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormData {
    pub gram_sym: IntMatrix,
    pub gram_euler: IntMatrix,
    #[serde(rename = "R")]
    pub r: IntMatrix,
    pub coxeter_mat: IntMatrix,
}

impl FormData {
    /// `g = -R r`.
    pub fn g_vector(&self, rank: &[i64]) -> Vec<i64> {
        mat_vec(&self.r, rank).into_iter().map(|x| -x).collect()
    }
}

/// JSON document `{"C": [[..]], "D": [..], "Omega": [[i, j], ..]}` with
/// 1-based vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumFile {
    #[serde(rename = "C")]
    pub c: IntMatrix,
    #[serde(rename = "D")]
    pub d: Vec<i64>,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<[usize; 2]>>,
}

impl DatumFile {
    pub fn load(&self) -> Result<(CartanDatum, Option<Orientation>)> {
        let datum = CartanDatum::new(self.c.clone(), self.d.clone())?;
        let omega = match &self.omega {
            None => None,
            Some(pairs) => Some(parse_pairs(&datum, pairs)?),
        };
        Ok((datum, omega))
    }

    pub fn from_datum(datum: &CartanDatum, omega: Option<&Orientation>) -> Self {
        Self { c: datum.c.clone(), d: datum.d.clone(), omega: omega.map(|o| o.to_one_based()) }
    }
}

pub fn parse_pairs(datum: &CartanDatum, pairs: &[[usize; 2]]) -> Result<Orientation> {
    let mut out = Vec::with_capacity(pairs.len());
    for &[i, j] in pairs {
        if i == 0 || j == 0 {
            return Err(Error::InvalidOrientation("vertices are 1-based".into()));
        }
        out.push((i - 1, j - 1));
    }
    Orientation::new(datum, out)
}

/// Parses `"1,2;2,3"` or a JSON list `[[1,2],[2,3]]`.
pub fn parse_orientation(datum: &CartanDatum, text: &str) -> Result<Orientation> {
    let text = text.trim();
    if text.starts_with('[') {
        let pairs: Vec<[usize; 2]> = serde_json::from_str(text)?;
        return parse_pairs(datum, &pairs);
    }
    let mut pairs = Vec::new();
    for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let nums: Vec<usize> = part
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad orientation pair {part:?}"))))
            .collect::<Result<_>>()?;
        if nums.len() != 2 {
            return Err(Error::Parse(format!("orientation pair {part:?} needs two vertices")));
        }
        pairs.push([nums[0], nums[1]]);
    }
    parse_pairs(datum, &pairs)
}

/// Frequently used data, by name.
pub fn named_datum(name: &str) -> Option<CartanDatum> {
    let (c, d): (IntMatrix, Vec<i64>) = match name {
        "A1" => (vec![vec![2]], vec![1]),
        "A2" => (vec![vec![2, -1], vec![-1, 2]], vec![1, 1]),
        "A3" => (vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]], vec![1, 1, 1]),
        "B2" => (vec![vec![2, -1], vec![-2, 2]], vec![2, 1]),
        "C2" => (vec![vec![2, -2], vec![-1, 2]], vec![1, 2]),
        "G2" => (vec![vec![2, -1], vec![-3, 2]], vec![3, 1]),
        "B3" => (vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -2, 2]], vec![2, 2, 1]),
        "C3" => (vec![vec![2, -1, 0], vec![-1, 2, -2], vec![0, -1, 2]], vec![1, 1, 2]),
        "A4" => (vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -1], vec![0, 0, -1, 2]], vec![1, 1, 1, 1]),
        "B4" => (vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -1], vec![0, 0, -2, 2]], vec![2, 2, 2, 1]),
        "C4" => (vec![vec![2, -1, 0, 0], vec![-1, 2, -1, 0], vec![0, -1, 2, -2], vec![0, 0, -1, 2]], vec![1, 1, 1, 2]),
        "D4" => (vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]], vec![1, 1, 1, 1]),
        "F4" => (vec![vec![2, -1, 0, 0], vec![-1, 2, -2, 0], vec![0, -1, 2, -1], vec![0, 0, -1, 2]], vec![1, 1, 2, 2]),
        "A1~" => (vec![vec![2, -2], vec![-2, 2]], vec![1, 1]),
        _ => return None,
    };
    CartanDatum::new(c, d).ok()
}

/// Determinant of an integer matrix, exactly.
pub fn int_det(m: &IntMatrix) -> BigInt {
    let n = m.len();
    let q = Rationals;
    let flat: Vec<i64> = m.iter().flatten().copied().collect();
    let d = Matrix::from_i64(&q, n, n, &flat).det();
    debug_assert!(d.is_integer());
    d.to_integer()
}

/// Vertex-indexed tally, used for rank/weight vectors in reports.
pub fn root_label(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> CartanDatum {
        named_datum("B2").unwrap()
    }

    #[test]
    fn validation() {
        let d = b2();
        assert_eq!(d.g(0, 1), 1);
        assert!(matches!(CartanDatum::new(vec![vec![2, -1], vec![-2, 2]], vec![1, 1]), Err(Error::NotSymmetrizer(_))));
        assert!(matches!(CartanDatum::new(vec![vec![2, 1], vec![1, 2]], vec![1, 1]), Err(Error::NotCartan(_))));
        assert!(matches!(CartanDatum::new(vec![vec![2, -1], vec![-2, 2]], vec![-2, -1]), Err(Error::NonPositiveSymmetrizer(_))));
        let g2 = named_datum("G2").unwrap();
        assert_eq!(g2.g(0, 1), 1);
    }

    #[test]
    fn reflections() {
        let d = b2();
        assert_eq!(d.reflect_root(0, &[0, 1]), vec![1, 1]);
        assert_eq!(d.reflect_root(0, &[1, 0]), vec![-1, 0]);
        assert_eq!(d.reflect_root(1, &[1, 1]), vec![1, 1]);
    }

    #[test]
    fn orbits_and_roots() {
        let d = b2();
        let orbit = d.weyl_orbit(&[1, 0], 10);
        // α_1 is long: its orbit holds the four long roots only
        let long: BTreeSet<RootVector> = [[1, 0], [1, 2], [-1, 0], [-1, -2]].iter().map(|v| v.to_vec()).collect();
        assert_eq!(orbit.vectors, long);
        assert!(!orbit.truncated);
        let short = d.weyl_orbit(&[0, 1], 10).vectors;
        let all: BTreeSet<RootVector> = long.union(&short).cloned().collect();
        let expected: BTreeSet<RootVector> =
            [[1, 0], [1, 1], [1, 2], [0, 1], [-1, 0], [-1, -1], [-1, -2], [0, -1]].iter().map(|v| v.to_vec()).collect();
        assert_eq!(all, expected);
        assert_eq!(d.positive_roots().unwrap(), vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![1, 2]]);
        let g2 = named_datum("G2").unwrap();
        assert_eq!(g2.positive_roots().unwrap().len(), 6);
        let a1 = named_datum("A1").unwrap();
        assert_eq!(a1.positive_roots().unwrap(), vec![vec![1]]);
        let affine = named_datum("A1~").unwrap();
        assert!(affine.weyl_orbit(&[1, 0], 20).truncated);
    }

    #[test]
    fn dynkin_detection() {
        assert!(b2().is_dynkin());
        assert!(!named_datum("A1~").unwrap().is_dynkin());
        assert!(named_datum("A1").unwrap().is_dynkin());
        assert_eq!(named_datum("B3").unwrap().dynkin_type().as_deref(), Some("B3"));
        assert_eq!(named_datum("C3").unwrap().dynkin_type().as_deref(), Some("C3"));
        assert_eq!(named_datum("G2").unwrap().dynkin_type().as_deref(), Some("G2"));
    }

    #[test]
    fn fundamental_region() {
        let affine = named_datum("A1~").unwrap();
        assert!(affine.fundamental_region_check(&[1, 1]));
        assert!(!b2().fundamental_region_check(&[1, 1]));
        assert!(!b2().fundamental_region_check(&[0, 0]));
    }

    #[test]
    fn orientation_reflection() {
        let d = b2();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        let flipped = Orientation::new(&d, [(1, 0)]).unwrap();
        assert_eq!(o.reflect(0).unwrap(), flipped);
        assert_eq!(o.reflect(1).unwrap(), flipped);
        let a3 = named_datum("A3").unwrap();
        let path = Orientation::new(&a3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(path.reflect(1), Err(Error::NotSinkOrSource(1))));
        assert!(Orientation::new(&d, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn admissible_words_b2_g2() {
        let d = b2();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        assert_eq!(d.coxeter_word(&o), vec![0, 1]);
        let w0 = d.w0_word(&o).unwrap();
        assert_eq!(w0, vec![0, 1, 0, 1]);
        let (betas, _) = d.beta_gamma(&w0).unwrap();
        assert_eq!(betas, vec![vec![1, 0], vec![1, 1], vec![1, 2], vec![0, 1]]);
        let g2 = named_datum("G2").unwrap();
        let og = Orientation::new(&g2, [(0, 1)]).unwrap();
        assert_eq!(g2.w0_word(&og).unwrap(), vec![0, 1, 0, 1, 0, 1]);
        assert!(matches!(d.beta_gamma(&[0, 0]), Err(Error::NotReduced(_))));
        let (b, g) = d.beta_gamma(&[1]).unwrap();
        assert_eq!((b, g), (vec![vec![0, 1]], vec![vec![0, 1]]));
    }

    #[test]
    fn forms_b2() {
        let d = b2();
        let o = Orientation::new(&d, [(0, 1)]).unwrap();
        let f = d.forms(&o).unwrap();
        assert_eq!(f.gram_euler, vec![vec![2, 0], vec![-2, 1]]);
        assert_eq!(f.r, vec![vec![1, 0], vec![-2, 1]]);
        assert_eq!(f.coxeter_mat, vec![vec![-1, 1], vec![-2, 1]]);
        assert_eq!(f.gram_sym, vec![vec![4, -2], vec![-2, 2]]);
        assert_eq!(d.coxeter_product(&o), f.coxeter_mat);
        assert_eq!(f.g_vector(&[1, 0]), vec![-1, 2]);
        let k = CartanDatum::new(vec![vec![2]], vec![3]).unwrap();
        let fk = k.forms(&Orientation::default_for(&k)).unwrap();
        assert_eq!((fk.gram_euler, fk.r, fk.coxeter_mat), (vec![vec![3]], vec![vec![1]], vec![vec![-1]]));
    }

    #[test]
    fn kostant() {
        let d = b2();
        assert_eq!(d.kostant_count(&[1, 1]).unwrap(), 2);
        assert_eq!(d.kostant_count(&[0, 0]).unwrap(), 1);
        assert_eq!(d.kostant_count(&[1, 2]).unwrap(), 3);
    }

    #[test]
    fn orientation_text() {
        let a3 = named_datum("A3").unwrap();
        let o = parse_orientation(&a3, "1,2; 2,3").unwrap();
        assert_eq!(o, parse_orientation(&a3, "[[1,2],[2,3]]").unwrap());
        assert_eq!(o.sink_first_order(3), vec![0, 1, 2]);
    }
}
