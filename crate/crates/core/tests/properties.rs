use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use sktsp::adaptive::{AdaptiveConfig, AdaptiveRunner, Termination};
use sktsp::evaluation::{check_capped_sum, check_harmonic_bound, monte_carlo, PolicyRef};
use sktsp::exact_opt::{optimal_adaptive, optimal_nonadaptive, OptConfig};
use sktsp::gap::{gen_random, verify_minimax, RandomGeometry};
use sktsp::model::{parse_instance, serialize_instance, TourMode};
use sktsp::nonadaptive::{build_nonadaptive, execute_nonadaptive, expected_length_exact, NonAdaptiveConfig};
use sktsp::orienteering::{solve_exact, solve_heuristic, OracleKind, OrienteeringProblem};
use sktsp::sampler::{enumerate_realizations, FixedRewards};
use sktsp::scalar::{int, rat, Rational};

fn geometry() -> impl Strategy<Value = RandomGeometry> {
    prop_oneof![Just(RandomGeometry::Star), Just(RandomGeometry::Points)]
}

fn mode() -> impl Strategy<Value = TourMode> {
    prop_oneof![Just(TourMode::Open), Just(TourMode::Closed)]
}

fn unit_pmf() -> impl Strategy<Value = Vec<(Rational, Rational)>> {
    (1i64..=10, prop::collection::vec((0i64..=10, 1i64..=9), 1..=3)).prop_map(|(den, atoms)| {
        let mut seen = Vec::new();
        let atoms: Vec<(i64, i64)> = atoms
            .into_iter()
            .map(|(v, w)| (v.min(den), w))
            .filter(|(v, _)| {
                let fresh = !seen.contains(v);
                seen.push(*v);
                fresh
            })
            .collect();
        let total: i64 = atoms.iter().map(|a| a.1).sum();
        atoms.into_iter().map(|(v, w)| (rat(v, den), rat(w, total))).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capped_sum_never_violated(batch in prop::collection::vec(unit_pmf(), 1..=5)) {
        let c = check_capped_sum(&batch).unwrap();
        prop_assert!(c.holds);
        prop_assert!(c.ey <= c.ex.clone().min(int(1)));
    }

    #[test]
    fn minimax_sides_agree(c in prop::collection::vec(prop::collection::vec(0u32..20, 4), 8)) {
        let exact: Vec<Vec<Rational>> = c.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        let e = verify_minimax(&exact).unwrap();
        prop_assert!(e.holds);
        prop_assert_eq!(&e.lhs, &e.rhs);
        let float: Vec<Vec<f64>> = c.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let f = verify_minimax(&float).unwrap();
        prop_assert!(f.holds);
        prop_assert!((f.lhs - sktsp::scalar::to_f64(&e.lhs)).abs() < 1e-9);
    }

    #[test]
    fn instance_text_roundtrip(n in 2usize..8, k in 1u64..20, seed: u64, g in geometry(), m in mode()) {
        let inst = gen_random(n, k, seed, g).unwrap().with_tour_mode(m).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn oracle_walks_are_feasible(n in 2usize..8, seed: u64, g in geometry(), m in mode(),
                                 budget in 0i64..40, profits in prop::collection::vec(0i64..10, 8)) {
        let inst = gen_random(n, 5, seed, g).unwrap().with_tour_mode(m).unwrap();
        let profits: Vec<Rational> = (0..n).map(|v| if v == 0 { Rational::zero() } else { int(profits[v]) }).collect();
        let budget = rat(budget, 4);
        let p = OrienteeringProblem::new(&inst, budget.clone(), profits.clone()).unwrap();
        let exact = solve_exact(&p, 16).unwrap();
        let heur = solve_heuristic(&p).unwrap();
        for r in [&exact, &heur] {
            prop_assert_eq!(r.walk[0], 0);
            prop_assert!(inst.walk_cost(&r.walk) <= budget);
            let mut seen = r.walk.clone();
            seen.sort();
            seen.dedup();
            let sum: Rational = seen.iter().map(|&v| profits[v].clone()).sum();
            prop_assert_eq!(&sum, &r.profit);
        }
        prop_assert!(heur.profit <= exact.profit);
    }

    #[test]
    fn exact_expectations_bracket_the_optimum(n in 3usize..6, k in 1u64..8, seed: u64, g in geometry(), m in mode()) {
        let inst = gen_random(n, k, seed, g).unwrap().with_tour_mode(m).unwrap();
        let cfg = OptConfig::default();
        let opt = optimal_adaptive(&inst, &cfg).unwrap().value;
        let (list, list_value) = optimal_nonadaptive(&inst, &cfg).unwrap();
        prop_assert!(opt <= list_value);
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let tour = build_nonadaptive(&inst, &oracle, &NonAdaptiveConfig::default()).unwrap();
        let list_tour = sktsp::nonadaptive::NonAdaptiveTour::from_list(0, &list);
        let mut adaptive_mean = Rational::zero();
        let mut tour_mean = Rational::zero();
        let mut list_mean = Rational::zero();
        for (values, p) in enumerate_realizations(&inst, 10_000).unwrap() {
            let trace = runner.run(&mut FixedRewards(values.clone())).unwrap();
            if trace.termination == Termination::TargetMet {
                prop_assert!(&trace.total_reward >= inst.k());
            }
            for v in check_harmonic_bound(&trace, inst.k()).unwrap() {
                prop_assert!(v.holds);
            }
            adaptive_mean += &p * &trace.total_length;
            tour_mean += &p * execute_nonadaptive(&inst, &tour, &mut FixedRewards(values.clone())).total_length;
            list_mean += &p * execute_nonadaptive(&inst, &list_tour, &mut FixedRewards(values)).total_length;
        }
        prop_assert!(opt <= adaptive_mean);
        prop_assert_eq!(expected_length_exact(&inst, &tour.walk), tour_mean);
        prop_assert_eq!(&expected_length_exact(&inst, &list_tour.walk), &list_mean);
        prop_assert_eq!(list_mean, list_value);
    }

    #[test]
    fn continuation_estimates_are_monotone(n in 3usize..7, k in 1u64..10, seed: u64, g in geometry()) {
        let inst = gen_random(n, k, seed, g).unwrap();
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), 200, seed).unwrap();
        prop_assert!(rep.phases.rows.windows(2).all(|w| w[1].u_hat <= w[0].u_hat));
        prop_assert!(rep.phases.rows.iter().all(|r| r.delta_hat >= 0.0));
        prop_assert_eq!(rep.harmonic_violations, 0);
        let again = monte_carlo(&inst, PolicyRef::Adaptive(&runner), 200, seed).unwrap();
        prop_assert_eq!(rep.summary, again.summary);
    }
}

#[test]
fn zero_target_costs_nothing() {
    let inst = gen_random(4, 0, 3, RandomGeometry::Star).unwrap();
    let oracle = OracleKind::exact();
    let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
    let trace = runner.run(&mut FixedRewards(vec![BigInt::zero(); 4])).unwrap();
    assert_eq!(trace.total_length, Rational::zero());
    assert_eq!(optimal_adaptive(&inst, &OptConfig::default()).unwrap().value, Rational::zero());
}
