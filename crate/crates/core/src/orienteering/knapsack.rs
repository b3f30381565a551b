use super::{integer_profits, OracleResult, OrienteeringProblem, ProfitValue, Rho};
use crate::error::{Error, Result};
use crate::model::Geometry;
use crate::scalar::Rational;

/// Exact budgeted selection for knapsack-cover instances: maximize total
/// profit subject to total cost within the budget.
///
/// Ties prefer smaller total cost, then the lexicographically smallest item set.
pub fn solve_knapsack(p: &OrienteeringProblem<'_>) -> Result<OracleResult> {
    let costs = match p.instance.geometry() {
        Geometry::Knapsack { costs } => costs,
        Geometry::Metric(_) => {
            return Err(Error::KindMismatch(
                "solve_knapsack needs a knapsack-cover instance".into(),
            ))
        }
    };
    if !p.budget.is_integer() {
        return Err(Error::InvalidArgument(format!(
            "knapsack budget must be an integer, got {}",
            p.budget
        )));
    }
    let budget = p.budget_scaled();
    let items: Vec<usize> = p
        .candidates()
        .into_iter()
        .filter(|&v| costs[v] as u128 <= budget)
        .collect();
    let item_costs: Vec<u64> = items.iter().map(|&v| costs[v]).collect();
    let total: u128 = item_costs.iter().map(|&c| c as u128).sum();
    let chosen: Vec<bool> = if total <= budget {
        vec![true; items.len()]
    } else {
        let w: Vec<Rational> = items.iter().map(|&v| p.profits[v].clone()).collect();
        let cap = budget as usize;
        match integer_profits(&w) {
            Some(wi) => select(&item_costs, &wi, cap),
            None => select(&item_costs, &w, cap),
        }
    };
    let mut walk = vec![p.root()];
    walk.extend(items.iter().zip(&chosen).filter(|(_, &c)| c).map(|(&v, _)| v));
    Ok(p.result(walk, Rho::Exact))
}

/// Suffix DP `best[i][b]`: best (profit, cost) using items `i..` within
/// budget `b`; then a forward pass that includes an item whenever an optimal
/// completion through it exists, which yields the lexicographically
/// smallest optimal set.
fn select<P: ProfitValue>(costs: &[u64], w: &[P], budget: usize) -> Vec<bool> {
    let m = costs.len();
    let width = budget + 1;
    let mut best: Vec<(P, u64)> = vec![(P::zero(), 0); (m + 1) * width];
    let better = |a: &(P, u64), b: &(P, u64)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    for i in (0..m).rev() {
        let c = costs[i] as usize;
        for b in 0..width {
            let skip = best[(i + 1) * width + b].clone();
            let mut val = skip;
            if c <= b {
                let rest = &best[(i + 1) * width + b - c];
                let take = (rest.0.clone() + w[i].clone(), rest.1 + costs[i]);
                if better(&take, &val) {
                    val = take;
                }
            }
            best[i * width + b] = val;
        }
    }
    let mut target = best[budget].clone();
    let mut b = budget;
    let mut out = vec![false; m];
    for i in 0..m {
        let c = costs[i] as usize;
        if c <= b {
            let rest = &best[(i + 1) * width + b - c];
            if rest.0.clone() + w[i].clone() == target.0 && rest.1 + costs[i] == target.1 {
                out[i] = true;
                target = rest.clone();
                b -= c;
            }
        }
        if target.0.is_zero() && target.1 == 0 {
            break;
        }
    }
    out
}
