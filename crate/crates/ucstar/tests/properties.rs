//! Property tests for the exact term algebra, the gauge expectation, the
//! rewriting engine and the *-homomorphism laws of evaluation.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use ucstar::coeff::Coefficient;
use ucstar::matrep::{check_orthogonal_ranges, Representation, Verdict};
use ucstar::rewrite::{degree, el_rules_rowfinite, expectation, normalize};
use ucstar::sparse::SparseOperator;
use ucstar::syntax::TermParser;
use ucstar::term::{Generator, Letter, Term, Word};
use ucstar::models::ZeroOneMatrix;

fn generators() -> Vec<Generator> {
    vec![
        Generator::partial_isometry("s"),
        Generator::partial_isometry("t"),
        Generator::projection("p"),
        Generator::projection("q"),
        Generator::unit(),
    ]
}

fn arb_letter() -> impl Strategy<Value = Letter> {
    (0usize..5, any::<bool>()).prop_map(|(i, starred)| Letter {
        gen: generators()[i].clone(),
        starred,
    })
}

fn arb_word(min_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(arb_letter(), min_len..=6).prop_map(Word::from_letters)
}

fn arb_coeff() -> impl Strategy<Value = Coefficient> {
    (-4i64..=4, -4i64..=4, 1i64..=3)
        .prop_map(|(re, im, den)| Coefficient::from_parts(re, den, im, den))
}

fn arb_term() -> impl Strategy<Value = Term> {
    prop::collection::vec((arb_coeff(), arb_word(0)), 0..=8).prop_map(|pairs| {
        let mut t = Term::zero();
        for (c, w) in pairs {
            t.accumulate(w, &c);
        }
        t
    })
}

fn arb_printable_term() -> impl Strategy<Value = Term> {
    // nonempty words only: the empty word prints as the unit symbol and
    // reparses as the unit letter
    prop::collection::vec((arb_coeff(), arb_word(1)), 0..=8).prop_map(|pairs| {
        let mut t = Term::zero();
        for (c, w) in pairs {
            t.accumulate(w, &c);
        }
        t
    })
}

proptest! {
    #[test]
    fn adjoint_is_an_involution(x in arb_term()) {
        prop_assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn adjoint_reverses_products(x in arb_term(), y in arb_term()) {
        prop_assert_eq!(x.mul(&y).adjoint(), y.adjoint().mul(&x.adjoint()));
    }

    #[test]
    fn multiplication_is_associative(x in arb_term(), y in arb_term(), z in arb_term()) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
    }

    #[test]
    fn addition_is_commutative(x in arb_term(), y in arb_term()) {
        prop_assert_eq!(x.add(&y), y.add(&x));
    }

    #[test]
    fn canonicalization_is_idempotent(x in arb_term()) {
        // rebuilding a term from its own support changes nothing, and no
        // stored coefficient is zero
        let mut rebuilt = Term::zero();
        for (w, c) in x.iter() {
            prop_assert!(!c.is_zero());
            rebuilt.accumulate(w.clone(), c);
        }
        prop_assert_eq!(rebuilt, x);
    }

    #[test]
    fn parse_print_round_trip(x in arb_printable_term()) {
        let parser = TermParser::new(generators());
        let reparsed = parser.parse(&x.to_string()).unwrap();
        prop_assert_eq!(reparsed, x);
    }

    #[test]
    fn expectation_is_linear_idempotent_and_star_compatible(
        x in arb_term(),
        y in arb_term()
    ) {
        prop_assert_eq!(expectation(&x.add(&y)), expectation(&x).add(&expectation(&y)));
        prop_assert_eq!(expectation(&expectation(&x)), expectation(&x));
        prop_assert_eq!(expectation(&x.adjoint()), expectation(&x).adjoint());
        // the expectation keeps exactly the degree-zero words
        for (w, _) in expectation(&x).iter() {
            prop_assert_eq!(degree(w), 0);
        }
    }

    #[test]
    fn normalization_preserves_degree_support(words in prop::collection::vec(
        prop::collection::vec((0usize..2, any::<bool>()), 1..=4), 1..=4)
    ) {
        // random words over T1, T2 under the Exel-Laca rules of a fixed matrix
        let a = ZeroOneMatrix::new(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let rules = el_rules_rowfinite(&a).unwrap();
        prop_assert!(rules.is_degree_homogeneous());
        let gens = [a.generator(1), a.generator(2)];
        let mut term = Term::zero();
        for w in &words {
            let letters: Vec<Letter> = w
                .iter()
                .map(|&(i, starred)| Letter { gen: gens[i].clone(), starred })
                .collect();
            term.accumulate(Word::from_letters(letters), &Coefficient::one());
        }
        let input_degrees: std::collections::BTreeSet<i64> =
            term.iter().map(|(w, _)| degree(w)).collect();
        let nf = normalize(&term, &rules).unwrap();
        for (w, _) in nf.iter() {
            prop_assert!(input_degrees.contains(&degree(w)), "new degree appeared");
        }
        // determinism
        prop_assert_eq!(normalize(&term, &rules).unwrap(), nf);
    }
}

fn random_rep(seed: u64) -> Representation {
    let dim = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = BTreeMap::new();
    for name in ["s", "t"] {
        let mut triplets = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                if rng.gen_bool(0.3) {
                    triplets.push((
                        r,
                        c,
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ));
                }
            }
        }
        assign.insert(name.to_string(), SparseOperator::from_accumulated(dim, triplets).unwrap());
    }
    let diag: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
    assign.insert("p".to_string(), SparseOperator::diagonal(&diag));
    let diag: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
    assign.insert("q".to_string(), SparseOperator::diagonal(&diag));
    assign.insert("1".to_string(), SparseOperator::identity(dim));
    Representation::new(
        (0..dim).map(|i| i.to_string()).collect(),
        assign,
        vec![true; dim],
        "random",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_star_homomorphic(
        x in arb_term(),
        y in arb_term(),
        seed in 0u64..8
    ) {
        let rep = random_rep(seed);
        let ev_xy = rep.evaluate(&x.mul(&y)).unwrap();
        let ev_x_ev_y = rep.evaluate(&x).unwrap().matmul(&rep.evaluate(&y).unwrap()).unwrap();
        let scale = ev_xy.max_abs().max(ev_x_ev_y.max_abs()).max(1.0);
        prop_assert!(ev_xy.sub(&ev_x_ev_y).unwrap().max_abs() <= 1e-10 * scale);

        let ev_adj = rep.evaluate(&x.adjoint()).unwrap();
        let adj_ev = rep.evaluate(&x).unwrap().adjoint();
        let scale = ev_adj.max_abs().max(1.0);
        prop_assert!(ev_adj.sub(&adj_ev).unwrap().max_abs() <= 1e-10 * scale);
    }
}

/// Random diagonal 0/1 partitions of the identity pass the orthogonality
/// check exactly; perturbed families violating the partition fail.
#[test]
fn partition_orthogonality_pass_and_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let dim = rng.gen_range(2..=24);
        let parts = rng.gen_range(2..=4.min(dim));
        let mut diags = vec![vec![0.0; dim]; parts];
        for i in 0..dim {
            diags[rng.gen_range(0..parts)][i] = 1.0;
        }
        let gens: Vec<Generator> =
            (0..parts).map(|k| Generator::projection(format!("P{k}"))).collect();
        let mut assign = BTreeMap::new();
        for (k, d) in diags.iter().enumerate() {
            assign.insert(format!("P{k}"), SparseOperator::diagonal(d));
        }
        let rep = Representation::new(
            (0..dim).map(|i| i.to_string()).collect(),
            assign.clone(),
            vec![true; dim],
            "partition",
        )
        .unwrap();
        let report = check_orthogonal_ranges(&rep, &gens, 1e-12).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.residual, 0.0);

        // perturb: give the same basis index to two different projections
        let idx = rng.gen_range(0..dim);
        let mut broken = diags.clone();
        broken[0][idx] = 1.0;
        broken[1][idx] = 1.0;
        let mut assign = BTreeMap::new();
        for (k, d) in broken.iter().enumerate() {
            assign.insert(format!("P{k}"), SparseOperator::diagonal(d));
        }
        let rep = Representation::new(
            (0..dim).map(|i| i.to_string()).collect(),
            assign,
            vec![true; dim],
            "broken-partition",
        )
        .unwrap();
        let report = check_orthogonal_ranges(&rep, &gens, 1e-12).unwrap();
        assert_eq!(report.verdict, Verdict::Fail, "perturbed family must fail");
    }
}
