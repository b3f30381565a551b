use std::cmp::Ordering;

use super::{integer_profits, mask_lex_cmp, prefer, OracleResult, OrienteeringProblem, ProfitValue, Rho};
use crate::error::{Error, Result};
use crate::scalar::Rational;

pub const DEFAULT_EXACT_CAP: usize = 16;

/// Hard ceiling regardless of configuration: the DP table is `2^m · m` words.
const HARD_CAP: usize = 24;

pub(crate) fn cap_error(actual: usize, cap: usize) -> Error {
    Error::SizeGate {
        what: "vertex count",
        actual,
        limit: cap,
        hint: "use solve_heuristic for larger instances",
    }
}

/// Exact orienteering over a metric by dynamic programming over
/// (visited subset, end vertex), minimizing walk length.
pub fn solve_exact(p: &OrienteeringProblem<'_>, cap: usize) -> Result<OracleResult> {
    let inst = p.instance;
    if inst.is_knapsack() {
        return Err(Error::KindMismatch(
            "solve_exact needs a metric instance; use solve_knapsack".into(),
        ));
    }
    let cap = cap.min(HARD_CAP);
    if inst.n() > cap {
        return Err(cap_error(inst.n(), cap));
    }
    let cand = p.candidates();
    let table = shortest_walks(p, &cand);
    let w: Vec<Rational> = cand.iter().map(|&v| p.profits[v].clone()).collect();
    let (mask, end) = match integer_profits(&w) {
        Some(wi) => best_subset(p, &cand, &wi, &table),
        None => best_subset(p, &cand, &w, &table),
    };
    let walk = match end {
        None => vec![p.root()],
        Some(end) => reconstruct(p, &cand, mask, end, &table),
    };
    Ok(p.result(walk, Rho::Exact))
}

struct Table {
    m: usize,
    len: Vec<u64>,
}

const INF: u64 = u64::MAX;

impl Table {
    #[inline]
    fn at(&self, mask: usize, e: usize) -> u64 {
        self.len[mask * self.m + e]
    }
}

/// Shortest walk from the root through exactly `mask`, ending at each vertex;
/// states longer than the budget are dropped.
fn shortest_walks(p: &OrienteeringProblem<'_>, cand: &[usize]) -> Table {
    let sc = p.instance.scaled();
    let m = cand.len();
    let budget = p.budget_scaled().min(INF as u128 - 1) as u64;
    let mut len = vec![INF; (1usize << m) * m.max(1)];
    let r = p.root();
    for (e, &v) in cand.iter().enumerate() {
        let d = sc.step(r, v);
        if d <= budget {
            len[(1 << e) * m + e] = d;
        }
    }
    for mask in 1usize..(1 << m) {
        for e in 0..m {
            let cur = len[mask * m + e];
            if cur == INF {
                continue;
            }
            let from = cand[e];
            for f in 0..m {
                if mask >> f & 1 == 1 {
                    continue;
                }
                let nl = cur + sc.step(from, cand[f]);
                if nl > budget {
                    continue;
                }
                let slot = &mut len[(mask | 1 << f) * m + f];
                if nl < *slot {
                    *slot = nl;
                }
            }
        }
    }
    Table { m, len }
}

/// Returns the chosen subset and (for non-empty subsets) its best end index.
fn best_subset<P: ProfitValue>(
    p: &OrienteeringProblem<'_>,
    cand: &[usize],
    w: &[P],
    table: &Table,
) -> (usize, Option<usize>) {
    let m = cand.len();
    if m == 0 {
        return (0, None);
    }
    let sc = p.instance.scaled();
    let budget = p.budget_scaled();
    let mut profit: Vec<P> = vec![P::zero(); 1 << m];
    let mut best: (P, u128, usize, Option<usize>) = (P::zero(), 0, 0, None);
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        profit[mask] = profit[mask & (mask - 1)].clone() + w[low].clone();
        let mut best_len = u128::MAX;
        let mut best_end = None;
        for e in 0..m {
            let l = table.at(mask, e);
            if l == INF {
                continue;
            }
            let total = l as u128 + sc.ret(cand[e]) as u128;
            if total <= budget && total < best_len {
                best_len = total;
                best_end = Some(e);
            }
        }
        let Some(end) = best_end else { continue };
        let ord = prefer((&profit[mask], best_len), (&best.0, best.1), || {
            mask_lex_cmp(mask as u64, best.2 as u64)
        });
        if ord == Ordering::Less {
            best = (profit[mask].clone(), best_len, mask, Some(end));
        }
    }
    (best.2, best.3)
}

fn reconstruct(p: &OrienteeringProblem<'_>, cand: &[usize], mask: usize, mut end: usize, table: &Table) -> Vec<usize> {
    let sc = p.instance.scaled();
    let m = cand.len();
    let mut rev = vec![cand[end]];
    let mut cur = mask;
    while cur.count_ones() > 1 {
        let rest = cur & !(1 << end);
        let target = table.at(cur, end);
        let prev = (0..m)
            .filter(|&q| rest >> q & 1 == 1)
            .find(|&q| {
                let l = table.at(rest, q);
                l != INF && l + sc.step(cand[q], cand[end]) == target
            })
            .expect("predecessor exists");
        rev.push(cand[prev]);
        cur = rest;
        end = prev;
    }
    let mut walk = vec![p.root()];
    walk.extend(rev.into_iter().rev());
    walk
}
