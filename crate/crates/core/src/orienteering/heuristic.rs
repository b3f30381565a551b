use num_traits::Zero;

use super::{solve_exact, OracleResult, OrienteeringProblem, Rho};
use crate::error::Result;
use crate::scalar::{to_f64, Rational};

/// Largest vertex count for which the exact comparison ratio is attached.
const RATIO_CHECK_MAX: usize = 12;

/// Greedy best-ratio insertion with 2-opt clean-up, compared against the best
/// single-vertex walk. No approximation guarantee.
pub fn solve_heuristic(p: &OrienteeringProblem<'_>) -> Result<OracleResult> {
    let walk = greedy(p);
    let single = best_single(p);
    let a = p.result(walk, Rho::Empirical { ratio_vs_exact: None });
    let mut res = match single {
        Some(s) if s.profit > a.profit => s,
        _ => a,
    };
    if !p.instance.is_knapsack() && p.instance.n() <= RATIO_CHECK_MAX {
        let exact = solve_exact(p, RATIO_CHECK_MAX)?;
        let ratio = if exact.profit.is_zero() {
            1.0
        } else {
            to_f64(&(&res.profit / &exact.profit))
        };
        res.rho = Rho::Empirical {
            ratio_vs_exact: Some(ratio),
        };
    }
    Ok(res)
}

fn cost(p: &OrienteeringProblem<'_>, walk: &[usize]) -> u128 {
    let sc = p.instance.scaled();
    p.instance.walk_length_scaled(walk) + walk.last().map_or(0, |&v| sc.ret(v) as u128)
}

fn greedy(p: &OrienteeringProblem<'_>) -> Vec<usize> {
    let budget = p.budget_scaled();
    let mut walk = vec![p.root()];
    let mut left = p.candidates();
    loop {
        let base = cost(p, &walk);
        // (vertex slot in `left`, insert position, added length)
        let mut best: Option<(usize, usize, u128)> = None;
        for (li, &v) in left.iter().enumerate() {
            for pos in 1..=walk.len() {
                walk.insert(pos, v);
                let c = cost(p, &walk);
                walk.remove(pos);
                if c > budget {
                    continue;
                }
                let add = c.saturating_sub(base);
                let better = match best {
                    None => true,
                    Some((bi, _, badd)) => {
                        // profit/add larger wins; zero added length beats everything
                        let lhs = &p.profits[v] * Rational::from_integer(badd.into());
                        let rhs = &p.profits[left[bi]] * Rational::from_integer(add.into());
                        lhs > rhs || (lhs == rhs && add < badd)
                    }
                };
                if better {
                    best = Some((li, pos, add));
                }
            }
        }
        let Some((li, pos, _)) = best else { break };
        walk.insert(pos, left.remove(li));
        two_opt(p, &mut walk);
    }
    walk
}

/// Segment reversal among the non-root positions while it shortens the walk.
fn two_opt(p: &OrienteeringProblem<'_>, walk: &mut [usize]) {
    if p.instance.is_knapsack() {
        return;
    }
    let mut cur = cost(p, walk);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 1..walk.len() {
            for j in i + 1..walk.len() {
                walk[i..=j].reverse();
                let c = cost(p, walk);
                if c < cur {
                    cur = c;
                    improved = true;
                } else {
                    walk[i..=j].reverse();
                }
            }
        }
    }
}

fn best_single(p: &OrienteeringProblem<'_>) -> Option<OracleResult> {
    let budget = p.budget_scaled();
    p.candidates()
        .into_iter()
        .filter(|&v| cost(p, &[p.root(), v]) <= budget)
        .map(|v| p.result(vec![p.root(), v], Rho::Empirical { ratio_vs_exact: None }))
        .reduce(|a, b| if b.profit > a.profit { b } else { a })
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;

    use super::*;
    use crate::model::{Geometry, Instance, Metric, RewardDistribution, TourMode};
    use crate::orienteering::DEFAULT_EXACT_CAP;
    use crate::scalar::int;

    fn grid() -> Instance {
        let pts: Vec<(i64, i64)> = vec![(0, 0), (1, 0), (2, 0), (0, 3), (3, 3), (1, 1)];
        let d = pts
            .iter()
            .map(|a| pts.iter().map(|b| int((a.0 - b.0).abs() + (a.1 - b.1).abs())).collect())
            .collect();
        let mut rewards = vec![RewardDistribution::point_mass(0)];
        rewards.extend((1..6).map(|_| RewardDistribution::point_mass(1)));
        Instance::new(Geometry::Metric(Metric::new(d).unwrap()), 0, rewards, BigInt::from(5), TourMode::Open).unwrap()
    }

    #[test]
    fn dominated_by_exact_and_feasible() {
        let inst = grid();
        let profits = vec![int(0), int(1), int(3), int(2), int(5), int(1)];
        for b in 0..14 {
            let p = OrienteeringProblem::new(&inst, int(b), profits.clone()).unwrap();
            let h = solve_heuristic(&p).unwrap();
            let e = solve_exact(&p, DEFAULT_EXACT_CAP).unwrap();
            assert!(h.profit <= e.profit);
            assert!(h.length <= int(b));
            assert!(matches!(h.rho, Rho::Empirical { ratio_vs_exact: Some(_) }));
        }
    }

    #[test]
    fn large_budget_collects_everything() {
        let inst = grid();
        let profits = vec![int(0), int(1), int(3), int(2), int(5), int(1)];
        let p = OrienteeringProblem::new(&inst, int(100), profits).unwrap();
        assert_eq!(solve_heuristic(&p).unwrap().profit, int(12));
    }
}
