//! Finite-type cluster algebras with principal coefficients: seed
//! mutation, F-polynomials and g-vectors, and the comparison with
//! module-side data.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cartan::{CartanDatum, IntMatrix, Orientation, RootVector};
use crate::error::{Error, Result};
use crate::grassmann::FPolynomial;

pub const SEED_BOUND: usize = 100_000;

/// Polynomial in `Y_1..Y_n` with integer coefficients, keyed by exponent
/// vectors. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Poly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n])
    }

    pub fn monomial(exp: Vec<u32>) -> Self {
        let n = exp.len();
        Self { n, terms: BTreeMap::from([(exp, BigInt::one())]) }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        let entry = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.n), |acc, _| acc.mul(self))
    }

    fn leading(&self) -> Option<(&Vec<u32>, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Exact division; fails when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        let (le, lc) = divisor.leading().ok_or_else(|| Error::InternalMismatch("division by zero polynomial".into()))?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n);
        while let Some((re, rc)) = rem.leading() {
            let not_exact = || Error::InternalMismatch("F-polynomial division is not exact".into());
            if re.iter().zip(le).any(|(a, b)| a < b) || !(rc % lc).is_zero() {
                return Err(not_exact());
            }
            let e: Vec<u32> = re.iter().zip(le).map(|(a, b)| a - b).collect();
            let term = Self { n: self.n, terms: BTreeMap::from([(e, rc / lc)]) };
            rem = rem.sub(&term.mul(divisor));
            quot = quot.add(&term);
        }
        Ok(quot)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&vec![0; self.n]).cloned().unwrap_or_else(BigInt::zero)
    }

    /// As an F-polynomial record; the rank is the componentwise maximal
    /// exponent.
    pub fn to_fpoly(&self) -> Result<FPolynomial> {
        let mut rank = vec![0i64; self.n];
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            for (r, &x) in rank.iter_mut().zip(e) {
                *r = (*r).max(x as i64);
            }
            let c = c.to_i64().ok_or_else(|| Error::TooLarge("F-polynomial coefficient".into()))?;
            terms.insert(e.iter().map(|&x| x as i64).collect(), c);
        }
        Ok(FPolynomial { rank, terms })
    }
}

/// Sign choice for the exchange matrix of the acyclic seed of `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExchangeSign {
    /// `b_ij = c_ij` and `b_ji = -c_ji` for `(i,j) ∈ Ω`.
    Plus,
    /// `b_ij = -c_ij` and `b_ji = c_ji` for `(i,j) ∈ Ω`.
    Minus,
}

impl ExchangeSign {
    pub fn opposite(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSeed {
    pub b: IntMatrix,
    pub c: IntMatrix,
    pub f: Vec<Poly>,
    pub g: Vec<Vec<i64>>,
    /// Exchange matrix of the initial seed, needed by the g-vector
    /// recurrence.
    pub b0: IntMatrix,
    pub sign: ExchangeSign,
}

fn pos(x: i64) -> i64 {
    x.max(0)
}

pub fn initial_seed(datum: &CartanDatum, omega: &Orientation, sign: ExchangeSign) -> Result<ClusterSeed> {
    if !datum.is_dynkin() {
        return Err(Error::NotDynkin);
    }
    let n = datum.n();
    let s = match sign {
        ExchangeSign::Plus => 1,
        ExchangeSign::Minus => -1,
    };
    let mut b = vec![vec![0i64; n]; n];
    for (i, j) in omega.pairs() {
        b[i][j] = s * datum.cij(i, j);
        b[j][i] = -s * datum.cij(j, i);
    }
    let c = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    let g = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    Ok(ClusterSeed { b: b.clone(), c, f: vec![Poly::one(n); n], g, b0: b, sign })
}

impl ClusterSeed {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Mutation in direction `k` of the exchange matrix, the coefficient
    /// matrix, the F-polynomials and the g-vectors.
    pub fn mutate(&self, k: usize) -> Result<Self> {
        let n = self.n();
        if k >= n {
            return Err(Error::InvalidVertex(k));
        }
        let b = &self.b;
        let c = &self.c;
        let mut plus = Poly::monomial((0..n).map(|j| pos(c[j][k]) as u32).collect());
        let mut minus = Poly::monomial((0..n).map(|j| pos(-c[j][k]) as u32).collect());
        for i in 0..n {
            plus = plus.mul(&self.f[i].pow(pos(b[i][k]) as u32));
            minus = minus.mul(&self.f[i].pow(pos(-b[i][k]) as u32));
        }
        let fk = plus.add(&minus).div_exact(&self.f[k])?;
        let mut gk: Vec<i64> = self.g[k].iter().map(|x| -x).collect();
        for i in 0..n {
            let w = pos(-b[i][k]);
            for (x, y) in gk.iter_mut().zip(&self.g[i]) {
                *x += w * y;
            }
        }
        for j in 0..n {
            let w = pos(-c[j][k]);
            for (t, x) in gk.iter_mut().enumerate() {
                *x -= w * self.b0[t][j];
            }
        }
        let new_b = (0..n)
            .map(|i| {
                (0..n).map(|j| if i == k || j == k { -b[i][j] } else { b[i][j] + b[i][k].signum() * pos(b[i][k] * b[k][j]) }).collect()
            })
            .collect();
        let new_c = (0..n)
            .map(|i| (0..n).map(|j| if j == k { -c[i][j] } else { c[i][j] + c[i][k].signum() * pos(c[i][k] * b[k][j]) }).collect())
            .collect();
        let mut f = self.f.clone();
        f[k] = fk;
        let mut g = self.g.clone();
        g[k] = gk;
        Ok(Self { b: new_b, c: new_c, f, g, b0: self.b0.clone(), sign: self.sign })
    }

    fn cluster_key(&self) -> BTreeSet<Vec<i64>> {
        self.g.iter().cloned().collect()
    }
}

/// A cluster variable as `(F, g)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterVariable {
    pub f: Poly,
    pub g: Vec<i64>,
}

/// All cluster variables reachable by mutation, found by breadth-first
/// search over clusters.
pub fn enumerate_variables(seed: &ClusterSeed) -> Result<BTreeSet<ClusterVariable>> {
    let mut seen = BTreeSet::new();
    let mut vars = BTreeSet::new();
    let mut queue = VecDeque::from([seed.clone()]);
    seen.insert(seed.cluster_key());
    while let Some(s) = queue.pop_front() {
        for (f, g) in s.f.iter().zip(&s.g) {
            if f.constant_term() != BigInt::one() {
                return Err(Error::InternalMismatch(format!("F-polynomial for g = {g:?} has constant term {}", f.constant_term())));
            }
            vars.insert(ClusterVariable { f: f.clone(), g: g.clone() });
        }
        for k in 0..s.n() {
            let t = s.mutate(k)?;
            if seen.insert(t.cluster_key()) {
                if seen.len() > SEED_BOUND {
                    return Err(Error::NonFiniteType { bound: SEED_BOUND });
                }
                queue.push_back(t);
            }
        }
    }
    Ok(vars)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub root: RootVector,
    pub f: serde_json::Value,
    pub g: Vec<i64>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub sign: ExchangeSign,
    pub matched: usize,
    pub total: usize,
    pub cluster_variables: usize,
    pub entries: Vec<MatchEntry>,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.matched == self.total
    }

    pub fn summary(&self) -> String {
        format!("{}/{} matched", self.matched, self.total)
    }
}

/// Looks up each module-side `(root, F, g)` among the cluster variables.
pub fn match_report(
    module_side: &[(RootVector, FPolynomial, Vec<i64>)],
    cluster_side: &BTreeSet<ClusterVariable>,
    sign: ExchangeSign,
) -> Result<MatchReport> {
    let index: BTreeSet<(BTreeMap<Vec<i64>, i64>, Vec<i64>)> =
        cluster_side.iter().map(|v| Ok((v.f.to_fpoly()?.support(), v.g.clone()))).collect::<Result<_>>()?;
    let entries: Vec<MatchEntry> = module_side
        .iter()
        .map(|(root, f, g)| MatchEntry {
            root: root.clone(),
            f: f.to_json(),
            g: g.clone(),
            matched: index.contains(&(f.support(), g.clone())),
        })
        .collect();
    Ok(MatchReport {
        sign,
        matched: entries.iter().filter(|e| e.matched).count(),
        total: entries.len(),
        cluster_variables: cluster_side.len(),
        entries,
    })
}

/// Runs the match with the `Plus` exchange sign and, when that does not
/// match every root, once more with the opposite sign; returns the better
/// report.
pub fn calibrated_match(
    datum: &CartanDatum,
    omega: &Orientation,
    module_side: &[(RootVector, FPolynomial, Vec<i64>)],
) -> Result<MatchReport> {
    let first = {
        let vars = enumerate_variables(&initial_seed(datum, omega, ExchangeSign::Plus)?)?;
        match_report(module_side, &vars, ExchangeSign::Plus)?
    };
    if first.all_matched() {
        return Ok(first);
    }
    let vars = enumerate_variables(&initial_seed(datum, omega, ExchangeSign::Minus)?)?;
    let second = match_report(module_side, &vars, ExchangeSign::Minus)?;
    Ok(if second.matched >= first.matched { second } else { first })
}

/// `|det|` of the g-vectors of one seed.
pub fn g_determinant(seed: &ClusterSeed) -> BigInt {
    crate::cartan::int_det(&seed.g).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::named_datum;

    fn seed(name: &str, sign: ExchangeSign) -> ClusterSeed {
        let d = named_datum(name).unwrap();
        let o = Orientation::default_for(&d);
        initial_seed(&d, &o, sign).unwrap()
    }

    #[test]
    fn rank_one() {
        let s = seed("A1", ExchangeSign::Plus);
        assert_eq!(s.b, vec![vec![0]]);
        let t = s.mutate(0).unwrap();
        assert_eq!(t.f[0].to_fpoly().unwrap().support(), BTreeMap::from([(vec![0], 1), (vec![1], 1)]));
        assert_eq!(t.g[0], vec![-1]);
        assert_eq!(t.mutate(0).unwrap(), s);
        assert_eq!(enumerate_variables(&s).unwrap().len(), 2);
    }

    #[test]
    fn exchange_matrices() {
        let b2 = seed("B2", ExchangeSign::Plus);
        assert_eq!((b2.b[0][1].abs(), b2.b[1][0].abs()), (1, 2));
        assert!(b2.b[0][1] * b2.b[1][0] < 0);
        let g2 = seed("G2", ExchangeSign::Minus);
        assert_eq!((g2.b[0][1] * g2.b[1][0]).abs(), 3);
    }

    #[test]
    fn closure_sizes_and_involution() {
        for (name, count) in [("A1", 2), ("A2", 5), ("B2", 6), ("G2", 8), ("A3", 9), ("B3", 12)] {
            for sign in [ExchangeSign::Plus, ExchangeSign::Minus] {
                let s = seed(name, sign);
                assert_eq!(enumerate_variables(&s).unwrap().len(), count, "{name}");
                for k in 0..s.n() {
                    let t = s.mutate(k).unwrap();
                    assert_eq!(t.mutate(k).unwrap(), s);
                    assert_eq!(g_determinant(&t), BigInt::one());
                }
            }
        }
    }
}
