use std::cmp::Ordering;

use super::{mask_lex_cmp, prefer, OracleResult, OrienteeringProblem, Rho};
use crate::error::{Error, Result};
use crate::scalar::Rational;

pub const BRUTE_FORCE_MAX_VERTICES: usize = 8;

/// Exhaustive search over ordered subsets of the positive-profit vertices.
/// Works for both instance kinds.
pub fn solve_brute_force(p: &OrienteeringProblem<'_>) -> Result<OracleResult> {
    let n = p.instance.n();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::SizeGate {
            what: "vertex count",
            actual: n,
            limit: BRUTE_FORCE_MAX_VERTICES,
            hint: "brute force is a test oracle",
        });
    }
    let cand = p.candidates();
    let mut search = Search {
        p,
        cand: &cand,
        budget: p.budget_scaled(),
        best_len: vec![None; 1 << cand.len()],
        order: Vec::new(),
    };
    search.dfs(0, p.root(), 0);

    let mut best: Option<(Rational, u128, usize)> = None;
    for (mask, entry) in search.best_len.iter().enumerate() {
        let Some((len, _)) = entry else { continue };
        let profit: Rational = (0..cand.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| p.profits[cand[i]].clone())
            .sum();
        let better = match &best {
            None => true,
            Some((bp, bl, bm)) => {
                prefer((&profit, *len), (bp, *bl), || mask_lex_cmp(mask as u64, *bm as u64))
                    == Ordering::Less
            }
        };
        if better {
            best = Some((profit, *len, mask));
        }
    }
    let mask = best.map_or(0, |b| b.2);
    let walk = match &search.best_len[mask] {
        Some((_, order)) => order.clone(),
        None => vec![p.root()],
    };
    Ok(p.result(walk, Rho::Exact))
}

struct Search<'a, 'p> {
    p: &'a OrienteeringProblem<'p>,
    cand: &'a [usize],
    budget: u128,
    /// Per subset: cheapest budget-accounted length and a walk achieving it.
    best_len: Vec<Option<(u128, Vec<usize>)>>,
    order: Vec<usize>,
}

impl Search<'_, '_> {
    fn dfs(&mut self, mask: usize, at: usize, len: u128) {
        let sc = self.p.instance.scaled();
        let total = len + sc.ret(at) as u128;
        if total <= self.budget {
            let slot = &mut self.best_len[mask];
            if slot.as_ref().is_none_or(|(l, _)| total < *l) {
                let mut walk = vec![self.p.root()];
                walk.extend(self.order.iter().map(|&i| self.cand[i]));
                *slot = Some((total, walk));
            }
        }
        for i in 0..self.cand.len() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let nl = len + sc.step(at, self.cand[i]) as u128;
            if nl > self.budget {
                continue;
            }
            self.order.push(i);
            self.dfs(mask | 1 << i, self.cand[i], nl);
            self.order.pop();
        }
    }
}
