use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use rotopt::fixtures;
use rotopt::measure::integrate;
use rotopt::potential::{birkhoff_sum, locality, parse_potential, rotation_vector_of_cycle, LocallyConstantFn};
use rotopt::symbolic::{parse_shift, Cycle, EdgeGraph, FollowerAutomaton, ShiftPresentation, Word};
use rotopt::synthesis::{
    birkhoff_sum_compressed, build_plan, concat_check, power_up, realize_plan, recover_weights, recover_weights_from_rvs, Block,
    CompressedWord, Segment, DEFAULT_T_CEILING,
};
use rotopt::{q, Error, RatVec, Rational};

/// Golden-mean cycles starting with 0: products of the blocks "0" and "0 1".
fn golden_cycle() -> impl Strategy<Value = Word> {
    prop::collection::vec(any::<bool>(), 1..6)
        .prop_map(|bs| Word(bs.into_iter().flat_map(|b| if b { vec![0, 1] } else { vec![0] }).collect()))
}

fn table_fn(p: &ShiftPresentation, order: usize, vals: &[i64]) -> LocallyConstantFn {
    let mut i = 0;
    LocallyConstantFn::from_fn(p, order, |_| {
        let v = vals[i % vals.len()];
        i += 1;
        Rational::from_int(v)
    })
}

fn rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=6).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_round_trip(d in 1usize..=2, rvs in prop::collection::vec(prop::collection::vec(rat(), 2), 3), ws in prop::collection::vec(1i64..=9, 3)) {
        let rvs: Vec<RatVec> = rvs.into_iter().take(d + 1).map(|v| RatVec(v[..d].to_vec())).collect();
        let total: i64 = ws[..=d].iter().sum();
        let lambda: Vec<Rational> = ws[..=d].iter().map(|&w| q(w, total)).collect();
        let mut h = RatVec::zeros(d);
        for (r, l) in rvs.iter().zip(&lambda) {
            h.add_scaled(l, r);
        }
        match recover_weights_from_rvs(&rvs, &h) {
            Ok(got) => prop_assert_eq!(got, lambda),
            Err(Error::RankDeficient { .. }) => {
                let diffs: Vec<RatVec> = rvs[..d].iter().map(|r| rvs[d].sub(r)).collect();
                prop_assert!(rotopt::linalg::rank_of(&diffs) < d);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn concatenations_are_allowed_periodic_words(cs in prop::collection::vec(golden_cycle(), 1..4), es in prop::collection::vec(1usize..4, 4)) {
        let p = parse_shift(fixtures::GOLDEN_MEAN).unwrap();
        let fa = FollowerAutomaton::new(&p);
        let u = p.word("0").unwrap();
        let blocks: Vec<(Cycle, usize)> = cs.iter().zip(&es).map(|(c, &e)| (Cycle::new(c.clone()), e)).collect();
        let x = concat_check(&p, &fa, &u, &blocks).unwrap();
        prop_assert_eq!(x.len(), blocks.iter().map(|(c, e)| c.period() * e).sum::<usize>());
        prop_assert!(p.is_allowed(&x.repeat(2)));
    }

    #[test]
    fn compressed_sums_match_explicit(
        words in prop::collection::vec(prop::collection::vec(0u16..2, 1..5), 1..4),
        exps in prop::collection::vec(1u32..4, 4),
        reps in 1u32..4,
        order in prop_oneof![Just(0usize), Just(2), Just(9)],
        vals in prop::collection::vec(-3i64..=3, 7),
    ) {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        // Every block power must cover a window.
        let blocks: Vec<Block> = words
            .iter()
            .zip(&exps)
            .map(|(w, &e)| Block { word: Word(w.clone()), exp: BigUint::from(e as usize + order.div_ceil(w.len())) })
            .collect();
        let head = Segment { blocks: blocks[..1].to_vec(), reps: BigUint::from(1u32) };
        let tail = Segment { blocks, reps: BigUint::from(reps) };
        let x = CompressedWord::new(vec![head, tail]).unwrap();
        let explicit = x.materialize(1 << 12).unwrap();
        prop_assert_eq!(BigUint::from(explicit.len()), x.len());
        let g = table_fn(&p, order, &vals);
        prop_assert_eq!(birkhoff_sum_compressed(&g, &x).unwrap(), birkhoff_sum(&g, &explicit, explicit.len()));
    }

    #[test]
    fn synthesis_hits_h_exactly(
        a in golden_cycle(),
        b in golden_cycle(),
        wa in 1i64..=5,
        wb in 1i64..=5,
        phi_vals in prop::collection::vec(-2i64..=2, 3),
        f_vals in prop::collection::vec(-3i64..=3, 5),
        eps in prop_oneof![Just(q(1, 3)), Just(q(1, 10)), Just(q(1, 40))],
    ) {
        let p = parse_shift(fixtures::GOLDEN_MEAN).unwrap();
        let fa = FollowerAutomaton::new(&p);
        let u = p.word("0").unwrap();
        let phi = table_fn(&p, 1, &phi_vals);
        let f = table_fn(&p, 2, &f_vals);
        let (ca, cb) = (Cycle::new(a.clone()), Cycle::new(b.clone()));
        let (ra, rb) = (rotation_vector_of_cycle(&phi, &ca), rotation_vector_of_cycle(&phi, &cb));
        prop_assume!(ra != rb);
        let h = ra.scale(&q(wa, wa + wb)).add(&rb.scale(&q(wb, wa + wb)));
        let lambda = recover_weights(&[ca, cb], &phi, &h).unwrap();
        prop_assert_eq!(&lambda, &vec![q(wa, wa + wb), q(wb, wa + wb)]);
        let ell = locality([&phi, &f]);
        let graph = Arc::new(EdgeGraph::new(&p, 2).unwrap());
        let words: Vec<Word> = [a, b].iter().map(|w| power_up(w, ell.max(graph.order()), u.len())).collect();
        let plan = build_plan(&p, &fa, &u, &words, &lambda, &phi, std::slice::from_ref(&f), &eps, DEFAULT_T_CEILING).unwrap();
        let real = realize_plan(&plan, &p, &fa, &graph).unwrap();
        prop_assert_eq!(&real.rv, &h);
        prop_assert_eq!(integrate(&real.occupation, &phi).unwrap(), h.clone());
        let len = Rational::from(BigInt::from(real.x.len()));
        prop_assert_eq!(birkhoff_sum_compressed(&phi, &real.x).unwrap().scale(&len.recip()), h.clone());
        prop_assert_eq!(birkhoff_sum_compressed(&f, &real.x).unwrap().0[0].clone(), plan.birkhoff_formula(0));
        prop_assert!(real.deviations.iter().all(|d| d < &(&eps / &Rational::from(2i64))));
        if let Some(x) = real.x.materialize(1 << 14) {
            prop_assert!(p.is_allowed(&x.repeat(2)));
            prop_assert_eq!(rotation_vector_of_cycle(&phi, &Cycle::new(x)), h);
        }
    }
}

#[test]
fn rank_deficient_pair_is_rejected() {
    let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
    let x0 = parse_potential(fixtures::X0, &p).unwrap();
    let cycles = [Cycle::new(p.word("0 1").unwrap()), Cycle::new(p.word("1 0").unwrap())];
    assert!(matches!(recover_weights(&cycles, &x0, &RatVec(vec![q(1, 2)])), Err(Error::RankDeficient { dim: 1 })));
}

#[test]
fn target_outside_the_simplex_is_rejected() {
    let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
    let x0 = parse_potential(fixtures::X0, &p).unwrap();
    let cycles = [Cycle::new(p.word("0 1").unwrap()), Cycle::new(p.word("0 1 1").unwrap())];
    assert!(matches!(recover_weights(&cycles, &x0, &RatVec(vec![q(3, 4)])), Err(Error::TargetOutsideSimplex { .. })));
}
