use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cartan_reps::cartan::{mat_mul, named_datum, CartanDatum, Orientation};
use cartan_reps::cluster::{g_determinant, initial_seed, ExchangeSign};
use cartan_reps::field::{PrimeField, Rationals};
use cartan_reps::functors::{all_root_modules, reflect_minus, reflect_plus};
use cartan_reps::grassmann::{flag_euler, IntegralModel, DEFAULT_PRIMES};
use cartan_reps::hmod::{ext1_dim, is_isomorphic, random_locally_free};
use cartan_reps::module::{Algebra, Module};
use cartan_reps::pimod::{is_e_filtered, random_e_filtered};

const NAMES: [&str; 7] = ["A2", "B2", "C2", "G2", "A3", "B3", "C3"];

fn datum(k: usize) -> CartanDatum {
    named_datum(NAMES[k % NAMES.len()]).unwrap()
}

fn h_alg(d: &CartanDatum, pick: usize) -> Arc<Algebra> {
    let all = Orientation::all(d);
    Algebra::h(d, &all[pick % all.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reflections_are_isometric_involutions(k in 0usize..7, v in prop::collection::vec(-4i64..5, 3), w in prop::collection::vec(-4i64..5, 3), i in 0usize..3) {
        let d = datum(k);
        let n = d.n();
        let (v, w, i) = (&v[..n], &w[..n], i % n);
        let sv = d.reflect_root(i, v);
        prop_assert_eq!(d.reflect_root(i, &sv), v.to_vec());
        prop_assert_eq!(d.sym_form(&sv, &d.reflect_root(i, w)), d.sym_form(v, w));
        let m = d.reflection_matrix(i);
        prop_assert_eq!(mat_mul(&m, &m), cartan_reps::cartan::identity(n));
    }

    #[test]
    fn euler_form_symmetrizes(k in 0usize..7, pick in 0usize..8, v in prop::collection::vec(-3i64..4, 3), w in prop::collection::vec(-3i64..4, 3)) {
        let d = datum(k);
        let n = d.n();
        let o = &Orientation::all(&d)[pick % Orientation::all(&d).len()];
        let (v, w) = (&v[..n], &w[..n]);
        prop_assert_eq!(d.euler_form(o, v, w) + d.euler_form(o, w, v), d.sym_form(v, w));
    }

    #[test]
    fn coxeter_identity_at_scaled_symmetrizers(k in 0usize..7, pick in 0usize..8, scale in 1i64..4) {
        let d = datum(k).scaled(scale).unwrap();
        let o = &Orientation::all(&d)[pick % Orientation::all(&d).len()];
        prop_assert_eq!(d.forms(o).unwrap().coxeter_mat, d.coxeter_product(o));
    }

    #[test]
    fn random_modules_satisfy_relations(k in 0usize..7, pick in 0usize..8, r in prop::collection::vec(0i64..3, 3), seed in any::<u64>()) {
        let d = datum(k);
        let alg = h_alg(&d, pick);
        let r = &r[..d.n()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PrimeField::new(7).unwrap();
        let m = random_locally_free(alg.clone(), &f, r, &mut rng);
        prop_assert!(m.check_relations().is_empty());
        prop_assert_eq!(m.is_locally_free(), Some(r.to_vec()));
        let twisted = m.twist();
        prop_assert!(twisted.check_relations().is_empty());
        prop_assert_eq!(twisted.twist(), m.clone());
        let sum = m.direct_sum(&twisted).unwrap();
        let doubled: Vec<i64> = r.iter().map(|x| 2 * x).collect();
        prop_assert_eq!(sum.rank_vector().unwrap(), doubled);
        prop_assert_eq!(ext1_dim(&m, &m).unwrap() as i64, m.hom_dim(&m).unwrap() as i64 - alg.euler_form(r, r));
    }

    #[test]
    fn reflections_at_sinks_and_sources(k in 0usize..7, pick in 0usize..8, r in prop::collection::vec(0i64..3, 3), seed in any::<u64>()) {
        let d = datum(k);
        let alg = h_alg(&d, pick);
        let r = &r[..d.n()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_locally_free(alg.clone(), &Rationals, r, &mut rng);
        let rigid = ext1_dim(&m, &m).unwrap() == 0;
        for v in 0..d.n() {
            let e = Module::generalized_simple(alg.clone(), &Rationals, v).unwrap();
            if alg.omega().is_sink(v) {
                let up = reflect_plus(&m, v).unwrap();
                prop_assert!(up.check_relations().is_empty());
                let back = reflect_minus(&up, v).unwrap();
                prop_assert!(back.check_relations().is_empty());
                prop_assert_eq!(back.alg().omega(), alg.omega());
                if rigid && m.hom_dim(&e).unwrap() == 0 {
                    prop_assert_eq!(up.is_locally_free(), Some(d.reflect_root(v, r)));
                }
            }
            if alg.omega().is_source(v) {
                let down = reflect_minus(&m, v).unwrap();
                prop_assert!(down.check_relations().is_empty());
                if rigid && e.hom_dim(&m).unwrap() == 0 {
                    prop_assert_eq!(down.is_locally_free(), Some(d.reflect_root(v, r)));
                }
            }
        }
    }

    #[test]
    fn mutation_is_involutive_and_keeps_invariants(k in 0usize..7, pick in 0usize..8, walk in prop::collection::vec(0usize..3, 0..12), minus in any::<bool>()) {
        let d = datum(k);
        let n = d.n();
        let o = &Orientation::all(&d)[pick % Orientation::all(&d).len()];
        let sign = if minus { ExchangeSign::Minus } else { ExchangeSign::Plus };
        let mut s = initial_seed(&d, o, sign).unwrap();
        for step in walk {
            let j = step % n;
            let t = s.mutate(j).unwrap();
            prop_assert_eq!(t.mutate(j).unwrap(), s.clone());
            for i in 0..n {
                for l in 0..n {
                    prop_assert_eq!(d.d()[i] * t.b[i][l], -d.d()[l] * t.b[l][i]);
                }
            }
            prop_assert!(t.f.iter().all(|p| p.constant_term() == 1.into()));
            prop_assert_eq!(g_determinant(&t), 1.into());
            s = t;
        }
    }

    #[test]
    fn generated_pi_modules_are_e_filtered(seq in prop::collection::vec(0usize..2, 1..4), seed in any::<u64>()) {
        let d = named_datum("B2").unwrap();
        let pi = Algebra::pi(&d, &Orientation::default_for(&d));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PrimeField::new(5).unwrap();
        let m = random_e_filtered(&pi, &f, &seq, &mut rng).unwrap();
        prop_assert!(m.check_relations().is_empty());
        let filt = is_e_filtered(&m, &mut rng).unwrap();
        prop_assert!(filt.witness.is_some());
    }
}

fn words_with_content(content: &[i64]) -> Vec<Vec<usize>> {
    let total: i64 = content.iter().sum();
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &c) in content.iter().enumerate() {
        if c > 0 {
            let mut rest = content.to_vec();
            rest[i] -= 1;
            for mut w in words_with_content(&rest) {
                w.insert(0, i);
                out.push(w);
            }
        }
    }
    out
}

#[test]
fn flag_euler_characteristics_do_not_depend_on_the_symmetrizer() {
    let d = named_datum("B2").unwrap();
    let o = Orientation::default_for(&d);
    let doubled = d.scaled(2).unwrap();
    let small = all_root_modules(&Algebra::h(&d, &o), &Rationals).unwrap();
    let large = all_root_modules(&Algebra::h(&doubled, &o), &Rationals).unwrap();
    assert_eq!(small.roots, large.roots);
    for (k, beta) in small.roots.iter().enumerate() {
        let a = IntegralModel::from_rational(small.modules[k].clone());
        let b = IntegralModel::from_rational(large.modules[k].clone());
        for w in words_with_content(beta) {
            let x = flag_euler(&a, &w, &DEFAULT_PRIMES[..3]).unwrap();
            let y = flag_euler(&b, &w, &DEFAULT_PRIMES[..3]).unwrap();
            assert_eq!(x, y, "β = {beta:?}, word {w:?}");
        }
    }
}

#[test]
fn root_modules_agree_across_fields() {
    let d = named_datum("G2").unwrap();
    let alg = Algebra::h(&d, &Orientation::default_for(&d));
    let q = all_root_modules(&alg, &Rationals).unwrap();
    let f = PrimeField::new(11).unwrap();
    let p = all_root_modules(&alg, &f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (mq, mp) in q.modules.iter().zip(&p.modules) {
        assert!(is_isomorphic(&mq.reduce(&f).unwrap(), mp, &mut rng).unwrap());
    }
}
