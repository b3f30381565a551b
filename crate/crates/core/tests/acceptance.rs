//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line with
//! its measurements, then asserts the verdict.
//!
//! Run with `cargo test -p sktsp-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sktsp::adaptive::{AdaptiveConfig, AdaptiveRunner};
use sktsp::evaluation::{check_capped_sum, check_lemma_main, monte_carlo, PolicyRef, Verdict};
use sktsp::exact_opt::{completion_profile, optimal_adaptive, optimal_nonadaptive, OptConfig};
use sktsp::gap::{
    enumerate_gamma, gen_example1, gen_example2, gen_example3, gen_gap_instance, gen_random,
    ratio_against, solve_bidding_lp, RandomGeometry,
};
use sktsp::model::{Geometry, Instance, Metric, RewardDistribution, TourMode};
use sktsp::nonadaptive::{build_nonadaptive, execute_nonadaptive, expected_length_exact, NonAdaptiveConfig};
use sktsp::orienteering::{solve_brute_force, solve_exact, solve_knapsack, OracleKind, OrienteeringProblem};
use sktsp::sampler::FixedRewards;
use sktsp::scalar::{int, rat, to_f64, Rational};

fn report(n: u32, title: &str, pass: bool, elapsed: Duration, limit: Duration, details: &[String]) {
    let timely = elapsed <= limit;
    let verdict = if pass && timely { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} [{title}] {:.2?} (limit {:?})", elapsed, limit);
    for d in details {
        println!("    {d}");
    }
    assert!(pass, "criterion {n} failed");
    assert!(timely, "criterion {n} exceeded its time limit: {elapsed:.2?} > {limit:?}");
}

/// Minimum total cost of a set of deterministic items whose rewards reach `k`.
fn min_cover_cost(inst: &Instance) -> u64 {
    let Geometry::Knapsack { costs } = inst.geometry() else {
        panic!("knapsack instance expected")
    };
    let k = inst.k().to_usize().unwrap();
    let mut best = vec![u64::MAX; k + 1];
    best[0] = 0;
    for v in 1..inst.n() {
        let r = inst.reward(v).min_value().to_usize().unwrap();
        for c in (0..=k).rev() {
            if best[c] == u64::MAX {
                continue;
            }
            let to = (c + r).min(k);
            best[to] = best[to].min(best[c] + costs[v]);
        }
    }
    best[k]
}

fn zero_rewards(inst: &Instance) -> FixedRewards {
    FixedRewards(inst.rewards().iter().map(|d| d.min_value().clone()).collect())
}

#[test]
fn criterion_1_example1_tightness() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for l in 6u32..=9 {
        let t = Instant::now();
        let inst = gen_example1(l).unwrap();
        let oracle = OracleKind::Knapsack;
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let trace = runner.run(&mut zero_rewards(&inst)).unwrap();
        let cost = trace.total_length.clone();
        let lower = int(u64::from(l) << (l - 3));
        let opt = min_cover_cost(&inst);
        let ok = cost >= lower && opt == 1 << l && t.elapsed() < Duration::from_secs(1);
        pass &= ok;
        details.push(format!(
            "l={l}: alpha={} cost={} bound l*2^(l-3)={} opt={} ratio={:.2} time={:.2?}",
            runner.alpha(),
            cost,
            lower,
            opt,
            to_f64(&cost) / opt as f64,
            t.elapsed()
        ));
    }
    report(1, "Example 1 tightness", pass, start.elapsed(), Duration::from_secs(4), &details);
}

#[test]
fn criterion_2_example3_tightness() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let mut normalized = Vec::new();
    for l in 5u32..=7 {
        let inst = gen_example3(l).unwrap();
        let oracle = OracleKind::Knapsack;
        let tour = build_nonadaptive(&inst, &oracle, &NonAdaptiveConfig::default()).unwrap();
        let trace = execute_nonadaptive(&inst, &tour, &mut zero_rewards(&inst));
        let cost = trace.total_length.clone();
        let lower = int(u64::from(l * l) << (l - 3));
        let opt = min_cover_cost(&inst);
        let ratio = to_f64(&cost) / opt as f64;
        normalized.push(ratio / f64::from(l * l));
        let ok = cost >= lower && opt == 1 << l;
        pass &= ok;
        details.push(format!(
            "l={l}: alpha={} cost={} bound l^2*2^(l-3)={} opt={} ratio={ratio:.2} ratio/l^2={:.4} {}",
            tour.alpha,
            cost,
            lower,
            opt,
            ratio / f64::from(l * l),
            if ok { "ok" } else { "below bound" }
        ));
    }
    // the lower bound itself is ratio/l^2 >= 1/8
    let floor = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    pass &= floor >= 0.125;
    details.push(format!("min ratio/l^2 = {floor:.4} (needs >= 0.125)"));
    for l in 5u32..=7 {
        // the construction only forces the bound when the cheap classes cannot cover k
        let early = l.pow(3) + (1 << (l - 2));
        details.push(format!(
            "l={l}: l^3 + 2^(l-2) = {early} {} 2^l = {}",
            if early < 1 << l { "<" } else { ">=" },
            1u32 << l
        ));
    }
    report(2, "Example 3 tightness", pass, start.elapsed(), Duration::from_secs(10), &details);
}

/// Every leaf of a star is at least distance 1 away and `w` (vertex 1) alone
/// meets the target, so the optimum is the round trip to `w`.
fn example2_opt(inst: &Instance) -> Rational {
    let min_round_trip = (1..inst.n()).map(|v| inst.step_cost(0, v) + inst.return_cost(v)).min().unwrap();
    assert_eq!(inst.reward(1).min_value(), inst.k());
    assert_eq!(min_round_trip, inst.step_cost(0, 1) + inst.return_cost(1));
    min_round_trip
}

#[test]
fn criterion_3_example2_degradation() {
    let start = Instant::now();
    let trials = 10_000;
    let mut details = Vec::new();
    let mut pass = true;
    let small = gen_example2(1, 2).unwrap();
    let exact = optimal_adaptive(&small, &OptConfig::default()).unwrap().value;
    pass &= exact == int(2);
    details.push(format!("exact optimum at t=2: {exact}"));
    let mut prev: Option<(f64, f64)> = None;
    for t in 2u32..=4 {
        let inst = gen_example2(1, t).unwrap();
        let opt = to_f64(&example2_opt(&inst));
        let oracle = OracleKind::exact();
        let cfg = AdaptiveConfig { alpha_override: Some(1), ..AdaptiveConfig::default() };
        let weak = AdaptiveRunner::new(&inst, &oracle, &cfg).unwrap();
        let rep = monte_carlo(&inst, PolicyRef::Adaptive(&weak), trials, 7).unwrap();
        let (ratio, se) = (rep.summary.mean / opt, rep.summary.std_error / opt);
        let increasing = prev.is_none_or(|(r, s)| ratio - r > 4.0 * (se * se + s * s).sqrt());
        let default_runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let full = monte_carlo(&inst, PolicyRef::Adaptive(&default_runner), trials, 7).unwrap();
        let cap = 8.0 * default_runner.alpha() as f64 * opt;
        let within = full.summary.mean - 4.0 * full.summary.std_error <= cap;
        pass &= increasing && within;
        details.push(format!(
            "t={t}: k={} alpha=1 mean/OPT={ratio:.3}±{se:.3} {}; default alpha={} mean={:.3} <= 8*alpha*OPT={cap} {}",
            inst.k(),
            if increasing { "increasing" } else { "NOT increasing" },
            default_runner.alpha(),
            full.summary.mean,
            if within { "ok" } else { "exceeded" }
        ));
        prev = Some((ratio, se));
    }
    report(3, "Example 2 degradation", pass, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_4_bidding_lp() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    let mut values = Vec::new();
    for n in 1..=12 {
        let r = solve_bidding_lp(n).unwrap();
        let dual_ok = r.gap <= 1e-9 * r.value.abs().max(1.0);
        pass &= dual_ok && r.value <= std::f64::consts::E + 1e-6;
        details.push(format!(
            "n={n:2}: value={:.12} primal={:.12} dual={:.12} gap={:.1e} {}",
            r.value,
            r.primal_value,
            r.dual_value,
            r.gap,
            if r.exact { "exact" } else { "float" }
        ));
        values.push(r);
    }
    pass &= values[0].exact_value == Some(int(1));
    pass &= (values[1].value - 4.0 / 3.0).abs() <= 1e-9;
    let monotone = values.windows(2).all(|w| w[1].value >= w[0].value - 1e-9);
    pass &= monotone && values[11].value > values[3].value;
    details.push(format!("nondecreasing: {monotone}; value(12) > value(4): {}", values[11].value > values[3].value));
    report(4, "online bidding LP", pass, start.elapsed(), Duration::from_secs(30), &details);
}

#[test]
fn criterion_5_gap_cross_validation() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for n in 2..=4 {
        let lp = solve_bidding_lp(n).unwrap();
        let inst = gen_gap_instance(n, Some(&lp.p)).unwrap();
        let cfg = OptConfig::default();
        let ad = optimal_adaptive(&inst, &cfg).unwrap().value;
        let (_, na) = optimal_nonadaptive(&inst, &cfg).unwrap();
        let mean: Rational = lp.p.iter().enumerate().map(|(i, p)| p * int(i as i64 + 1)).sum();
        let ratio = &na / &ad;
        let lp_value = lp.exact_value.clone().unwrap();
        // independent enumeration of the same ratio over all of Γ
        let enumerated = ratio_against(&lp.p, &enumerate_gamma(n, false).unwrap()).unwrap();
        let ok = ad == mean && (to_f64(&ratio) - lp.value).abs() <= 1e-9 && ratio == lp_value && enumerated == lp_value;
        pass &= ok;
        details.push(format!("n={n}: adaptive={ad} sum i*p_i={mean} nonadaptive={na} ratio={ratio} lp={lp_value}"));
    }
    report(5, "gap-instance cross-validation", pass, start.elapsed(), Duration::from_secs(60), &details);
}

fn random_unit_pmf(rng: &mut ChaCha8Rng) -> Vec<(Rational, Rational)> {
    let atoms = rng.random_range(1..=3usize);
    let denom = rng.random_range(1..=12i64);
    let mut values: Vec<i64> = Vec::new();
    while values.len() < atoms {
        let v = rng.random_range(0..=denom);
        if !values.contains(&v) {
            values.push(v);
        }
        if values.len() as i64 == denom + 1 {
            break;
        }
    }
    let weights: Vec<i64> = values.iter().map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    values.into_iter().zip(weights).map(|(v, w)| (rat(v, denom), rat(w, total))).collect()
}

#[test]
fn criterion_6_capped_sum() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..500 {
        let vars = rng.random_range(1..=6usize);
        let batch: Vec<_> = (0..vars).map(|_| random_unit_pmf(&mut rng)).collect();
        let c = check_capped_sum(&batch).unwrap();
        // independent oracle: E[Y] by brute-force enumeration of joint outcomes
        let mut ey = Rational::zero();
        let mut stack = vec![(0usize, Rational::zero(), Rational::one())];
        while let Some((i, s, p)) = stack.pop() {
            if i == batch.len() {
                ey += p * s.min(Rational::one());
                continue;
            }
            for (x, q) in &batch[i] {
                stack.push((i + 1, &s + x, &p * q));
            }
        }
        assert_eq!(ey, c.ey);
        let m = to_f64(&c.ex).min(1.0);
        if m > 0.0 {
            tightest = tightest.min(to_f64(&c.ey) / m);
        }
        violations += u32::from(!c.holds);
    }
    let details = vec![format!("500 batches, violations={violations}, min E[Y]/min(E[X],1)={tightest:.4} vs 1-1/e=0.6321")];
    report(6, "capped-sum inequality", violations == 0, start.elapsed(), Duration::from_secs(30), &details);
}

#[test]
fn criterion_7_harmonic_bound() {
    let start = Instant::now();
    let (mut traces, mut phases, mut violations) = (0, 0, 0);
    for seed in 0..20u64 {
        let geometry = if seed % 2 == 0 { RandomGeometry::Star } else { RandomGeometry::Points };
        let n = 4 + (seed % 4) as usize;
        let k = 3 + seed % 10;
        let inst = gen_random(n, k, 100 + seed, geometry).unwrap();
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), 500, seed).unwrap();
        traces += rep.summary.trials;
        phases += rep.harmonic_phases_checked;
        violations += rep.harmonic_violations;
    }
    let details = vec![format!("20 instances, {traces} traces, {phases} phases checked, {violations} violations")];
    let pass = traces >= 10_000 && violations == 0;
    report(7, "per-trace harmonic bound", pass, start.elapsed(), Duration::from_secs(120), &details);
}

#[test]
fn criterion_8_lemma_main() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    let cfg = OptConfig::default();
    for seed in 0..10u64 {
        let geometry = if seed % 2 == 0 { RandomGeometry::Points } else { RandomGeometry::Star };
        let n = 5 + (seed % 4) as usize;
        let k = 4 + (seed * 7) % 13;
        let inst = gen_random(n, k, 800 + seed, geometry).unwrap();
        let policy = optimal_adaptive(&inst, &cfg).unwrap();
        let profile = completion_profile(&policy, &inst, None, &cfg).unwrap();
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default()).unwrap();
        let mut rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), 100_000, seed).unwrap();
        rep.phases.attach_profile(&profile);
        let verdicts = check_lemma_main(&rep.phases, Some(&profile), 3.0);
        let ok = verdicts.iter().all(|v| v.verdict == Verdict::Holds);
        pass &= ok;
        let worst = verdicts
            .iter()
            .map(|v| v.u_hat - v.prev_u_hat / 4.0 - v.u_star.unwrap_or(0.0))
            .fold(f64::NEG_INFINITY, f64::max);
        details.push(format!(
            "n={n} k={k} alpha={} OPT={:.3} phases={} u_hat={:?} worst(u_i - u_(i-1)/4 - u*_i)={worst:.4} {}",
            runner.alpha(),
            to_f64(&policy.value),
            verdicts.len(),
            rep.phases.rows.iter().map(|r| (r.u_hat * 1e4).round() / 1e4).collect::<Vec<_>>(),
            if ok { "ok" } else { "VIOLATED" }
        ));
    }
    report(8, "Lemma u_i <= u_(i-1)/4 + u*_i", pass, start.elapsed(), Duration::from_secs(600), &details);
}

fn random_metric_problem_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(2..=6usize);
    let geometry = if rng.random_bool(0.5) { RandomGeometry::Star } else { RandomGeometry::Points };
    let base = gen_random(n, 4, rng.random(), geometry).unwrap();
    let mode = if rng.random_bool(0.5) { TourMode::Open } else { TourMode::Closed };
    base.with_tour_mode(mode).unwrap()
}

#[test]
fn criterion_9_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..200 {
        let inst = random_metric_problem_instance(&mut rng);
        let profits: Vec<Rational> = (0..inst.n())
            .map(|v| if v == 0 { Rational::zero() } else { int(rng.random_range(0..=10)) })
            .collect();
        let budget = rat(rng.random_range(0..=40), 4);
        let p = OrienteeringProblem::new(&inst, budget, profits).unwrap();
        let a = solve_exact(&p, 16).unwrap();
        let b = solve_brute_force(&p).unwrap();
        mismatches += u32::from(a.profit != b.profit);
    }
    let mut knap_mismatches = 0;
    for _ in 0..200 {
        let items = rng.random_range(1..=12usize);
        let mut costs = vec![0u64];
        costs.extend((0..items).map(|_| rng.random_range(0..=10u64)));
        let rewards = vec![RewardDistribution::point_mass(0); items + 1];
        let inst = Instance::new(Geometry::Knapsack { costs: costs.clone() }, 0, rewards, BigInt::zero(), TourMode::Open).unwrap();
        let profits: Vec<i64> = (0..=items).map(|v| if v == 0 { 0 } else { rng.random_range(0..=20) }).collect();
        let budget = rng.random_range(0..=30u64);
        let p = OrienteeringProblem::new(&inst, int(budget), profits.iter().map(|&x| int(x)).collect()).unwrap();
        let got = solve_knapsack(&p).unwrap();
        // subset enumeration
        let mut best = 0i64;
        for mask in 0u32..(1 << items) {
            let (mut c, mut w) = (0u64, 0i64);
            for i in 0..items {
                if mask >> i & 1 == 1 {
                    c += costs[i + 1];
                    w += profits[i + 1];
                }
            }
            if c <= budget {
                best = best.max(w);
            }
        }
        knap_mismatches += u32::from(got.profit != int(best));
    }
    let details = vec![
        format!("exact vs brute force: 200 problems, {mismatches} mismatches"),
        format!("knapsack vs subset enumeration: 200 problems, {knap_mismatches} mismatches"),
    ];
    report(9, "oracle equivalence", mismatches == 0 && knap_mismatches == 0, start.elapsed(), Duration::from_secs(60), &details);
}

fn deterministic_star() -> Instance {
    let legs = [int(0), int(1), int(2), rat(5, 2)];
    let m = Metric::star(&legs, &[0, 1, 2, 3]).unwrap();
    let rewards = vec![
        RewardDistribution::point_mass(0),
        RewardDistribution::point_mass(1),
        RewardDistribution::point_mass(2),
        RewardDistribution::point_mass(3),
    ];
    Instance::new(Geometry::Metric(m), 0, rewards, 5.into(), TourMode::Closed).unwrap()
}

#[test]
fn criterion_10_nonadaptive_evaluator() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    let mut worst_z: f64 = 0.0;
    for seed in 0..20u64 {
        let geometry = if seed % 2 == 0 { RandomGeometry::Points } else { RandomGeometry::Star };
        let n = 4 + (seed % 4) as usize;
        let mut inst = gen_random(n, 3 + seed % 8, 1000 + seed, geometry).unwrap();
        if seed % 3 == 0 {
            inst = inst.with_tour_mode(TourMode::Closed).unwrap();
        }
        let oracle = OracleKind::exact();
        let tour = build_nonadaptive(&inst, &oracle, &NonAdaptiveConfig::default()).unwrap();
        let exact = to_f64(&expected_length_exact(&inst, &tour.walk));
        let rep = monte_carlo(&inst, PolicyRef::NonAdaptive(&tour), 100_000, seed).unwrap();
        let se = rep.summary.std_error;
        let ok = (rep.summary.mean - exact).abs() <= 4.0 * se + 1e-12;
        if se > 0.0 {
            worst_z = worst_z.max((rep.summary.mean - exact).abs() / se);
        }
        pass &= ok;
    }
    details.push(format!("20 random instances, 10^5 trials each, max |mean - exact|/SE = {worst_z:.2}"));
    let det: Vec<(String, Instance, OracleKind)> = vec![
        ("star".into(), deterministic_star(), OracleKind::exact()),
        ("example1(3)".into(), gen_example1(3).unwrap(), OracleKind::Knapsack),
        ("example3(3)".into(), gen_example3(3).unwrap(), OracleKind::Knapsack),
    ];
    for (name, inst, oracle) in det {
        let tour = build_nonadaptive(&inst, &oracle, &NonAdaptiveConfig::default()).unwrap();
        let exact = expected_length_exact(&inst, &tour.walk);
        let run = execute_nonadaptive(&inst, &tour, &mut zero_rewards(&inst));
        let ok = run.total_length == exact;
        pass &= ok;
        details.push(format!("deterministic {name}: exact={exact} run={} {}", run.total_length, if ok { "equal" } else { "DIFFER" }));
    }
    report(10, "non-adaptive evaluator consistency", pass, start.elapsed(), Duration::from_secs(120), &details);
}
