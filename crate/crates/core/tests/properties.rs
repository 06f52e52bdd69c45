//! Property tests for the choice model and the assortment optimizer.

use lumb::assortment::{optimize_bruteforce, optimize_exact, optimize_lp, OptProblem};
use lumb::harness::generate_instance;
use lumb::mnl::{choice_probabilities, expected_reward, mnl_reward};
use lumb::Assortment;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
    (1usize..=9)
        .prop_flat_map(|n| (prop::collection::vec(0.0f64..2.0, n), prop::collection::vec(0.01f64..=1.0, n), 1usize..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), n in 1usize..30, mask in any::<u32>()) {
        let inst = generate_instance(n, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let s = Assortment::new((0..n).filter(|i| mask >> (i % 32) & 1 == 1).collect()).unwrap();
        let p = choice_probabilities(&inst, &s).unwrap();
        prop_assert!((p.total() - 1.0).abs() <= 1e-12);
        prop_assert!(p.items.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let via: f64 = s.items().iter().zip(&p.items).map(|(&i, q)| q * inst.rewards()[i]).sum();
        prop_assert!((expected_reward(&inst, &s, inst.utilities()).unwrap() - via).abs() <= 1e-12);
    }

    #[test]
    fn exact_matches_enumeration((v, r, k) in problem()) {
        let p = OptProblem::new(&v, &r, k).unwrap();
        let exact = optimize_exact(&p).unwrap();
        let brute = optimize_bruteforce(&p).unwrap();
        prop_assert!((exact.value - brute.value).abs() <= 1e-9);
        prop_assert_eq!(exact.assortment, brute.assortment);
        prop_assert!(exact.value >= 0.0);
    }

    #[test]
    fn lp_matches_enumeration((v, r, k) in problem()) {
        let p = OptProblem::new(&v, &r, k).unwrap();
        let lp = optimize_lp(&p).unwrap();
        let brute = optimize_bruteforce(&p).unwrap();
        prop_assert!((lp.value - brute.value).abs() <= 1e-9);
        prop_assert!(lp.assortment.len() <= k);
    }

    #[test]
    fn optimum_is_monotone_in_utilities((v, r, k) in problem(), bump in prop::collection::vec(0.0f64..1.0, 9)) {
        let v2: Vec<f64> = v.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let p = OptProblem::new(&v, &r, k).unwrap();
        let p2 = OptProblem::new(&v2, &r, k).unwrap();
        let s = optimize_exact(&p).unwrap().assortment;
        let s2 = optimize_exact(&p2).unwrap().assortment;
        let a = mnl_reward(s.items(), p.utilities(), &r);
        let b = mnl_reward(s.items(), p2.utilities(), &r);
        let c = mnl_reward(s2.items(), p2.utilities(), &r);
        prop_assert!(b - a >= -1e-9 && c - b >= -1e-9);
    }

    #[test]
    fn scaling_rewards_keeps_the_argmax((v, r, k) in problem(), c in 0.1f64..10.0) {
        let scaled: Vec<f64> = r.iter().map(|x| x * c).collect();
        let a = optimize_exact(&OptProblem::new(&v, &r, k).unwrap()).unwrap();
        let b = optimize_exact(&OptProblem::new(&v, &scaled, k).unwrap()).unwrap();
        prop_assert!((b.value - c * a.value).abs() <= 1e-9 * c.max(1.0));
        prop_assert_eq!(a.assortment, b.assortment);
    }
}
