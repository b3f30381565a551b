//! Exact optimal policies for tiny instances.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{capped_convolve, prob_below, CappedPmf, Instance};
use crate::scalar::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptConfig {
    pub max_vertices: usize,
    pub max_states: usize,
    /// Vertex bound for the optimal list search.
    pub max_list_vertices: usize,
    /// Bound on the number of leaves when enumerating a policy's outcomes.
    pub max_outcomes: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            max_vertices: 10,
            max_states: 2_000_000,
            max_list_vertices: 12,
            max_outcomes: 1_000_000,
        }
    }
}

type StateKey = (usize, u64, BigInt);

/// Value table of the optimal adaptive policy over
/// (current vertex, visited set, reward collected capped at k).
#[derive(Debug, Clone)]
pub struct OptAdaptivePolicy {
    pub value: Rational,
    table: HashMap<StateKey, (Rational, Option<usize>)>,
}

impl OptAdaptivePolicy {
    pub fn states(&self) -> usize {
        self.table.len()
    }

    /// Expected remaining cost and the next vertex at a reachable state.
    pub fn lookup(&self, at: usize, visited: u64, collected: &BigInt) -> Option<&(Rational, Option<usize>)> {
        self.table.get(&(at, visited, collected.clone()))
    }
}

struct Dp<'a> {
    inst: &'a Instance,
    gainable: Vec<usize>,
    table: HashMap<StateKey, (Rational, Option<usize>)>,
    limit: usize,
}

impl Dp<'_> {
    fn value(&mut self, at: usize, mask: u64, c: BigInt) -> Result<Rational> {
        let key = (at, mask, c);
        if let Some((v, _)) = self.table.get(&key) {
            return Ok(v.clone());
        }
        let (at, mask, c) = key;
        let k = self.inst.k();
        let open: Vec<usize> = self.gainable.iter().copied().filter(|&u| mask >> u & 1 == 0).collect();
        let entry = if &c >= k || open.is_empty() {
            (self.inst.return_cost(at), None)
        } else {
            let mut best: Option<(Rational, usize)> = None;
            for u in open {
                let mut v = self.inst.step_cost(at, u);
                for (x, p) in self.inst.reward(u).support() {
                    let nc = (&c + x).min(k.clone());
                    v += p * self.value(u, mask | 1 << u, nc)?;
                }
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, u));
                }
            }
            let (v, u) = best.expect("open vertex");
            (v, Some(u))
        };
        if self.table.len() >= self.limit {
            return Err(Error::SizeGate {
                what: "adaptive DP states",
                actual: self.table.len() + 1,
                limit: self.limit,
                hint: "reduce n or the number of distinct capped reward sums",
            });
        }
        let v = entry.0.clone();
        self.table.insert((at, mask, c), entry);
        Ok(v)
    }
}

fn gate(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        return Err(Error::SizeGate {
            what,
            actual,
            limit,
            hint: "exact optima are for tiny instances",
        });
    }
    Ok(())
}

/// Minimum expected cost over all adaptive policies, by backward induction.
/// Next-vertex ties go to the lowest index. A state is terminal once the
/// target is met or no unvisited vertex can contribute reward.
pub fn optimal_adaptive(inst: &Instance, cfg: &OptConfig) -> Result<OptAdaptivePolicy> {
    gate("vertex count", inst.n(), cfg.max_vertices.min(63))?;
    let mut dp = Dp {
        inst,
        gainable: inst.gainable(),
        table: HashMap::new(),
        limit: cfg.max_states,
    };
    let depot = inst.depot();
    let value = dp.value(depot, 1 << depot, BigInt::zero())?;
    Ok(OptAdaptivePolicy { value, table: dp.table })
}

/// Distribution of the optimal policy's total travel, optionally with some
/// vertices' rewards fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionProfile {
    pub unit: Rational,
    /// `beyond[i]` = Pr[total travel exceeds `unit·2^i`], until it reaches 0.
    pub beyond: Vec<Rational>,
    /// Pr[completion with total travel ≤ `unit·2^i`].
    pub within: Vec<Rational>,
    /// Total travel → probability, for runs that met the target.
    pub completed: BTreeMap<Rational, Rational>,
    /// Probability that the run ended without meeting the target.
    pub incomplete: Rational,
}

impl CompletionProfile {
    /// `beyond[i]`, which is 0 past the stored range.
    pub fn u_star(&self, i: usize) -> Rational {
        self.beyond.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn p_star(&self, i: usize) -> Rational {
        self.within
            .get(i)
            .or(self.within.last())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

/// Enumerates the policy's outcomes. `condition[v] = Some(x)` forces vertex
/// `v`'s reward to `x`; `x` must lie in its support.
pub fn completion_profile(
    policy: &OptAdaptivePolicy,
    inst: &Instance,
    condition: Option<&[Option<BigInt>]>,
    cfg: &OptConfig,
) -> Result<CompletionProfile> {
    if let Some(c) = condition {
        if c.len() != inst.n() {
            return Err(Error::InvalidArgument("condition length must equal n".into()));
        }
        for (v, x) in c.iter().enumerate() {
            if let Some(x) = x {
                if inst.reward(v).prob(x).is_zero() {
                    return Err(Error::InvalidArgument(format!("value {x} not in the support of vertex {v}")));
                }
            }
        }
    }
    let depot = inst.depot();
    // leaves: (travel, completed, probability)
    let mut leaves: Vec<(Rational, bool, Rational)> = Vec::new();
    let mut stack = vec![(depot, 1u64 << depot, BigInt::zero(), Rational::zero(), Rational::one())];
    while let Some((at, mask, c, dist, p)) = stack.pop() {
        let (_, next) = policy
            .lookup(at, mask, &c)
            .ok_or_else(|| Error::InvalidArgument("policy does not match instance".into()))?;
        match next {
            None => {
                let total = dist + inst.return_cost(at);
                leaves.push((total, &c >= inst.k(), p));
                if leaves.len() > cfg.max_outcomes {
                    return Err(Error::SizeGate {
                        what: "policy outcomes",
                        actual: leaves.len(),
                        limit: cfg.max_outcomes,
                        hint: "enumeration is for tiny instances",
                    });
                }
            }
            Some(u) => {
                let u = *u;
                let d = &dist + inst.step_cost(at, u);
                let forced = condition.and_then(|c| c[u].clone());
                let branches: Vec<(BigInt, Rational)> = match forced {
                    Some(x) => vec![(x, Rational::one())],
                    None => inst.reward(u).support().to_vec(),
                };
                for (x, q) in branches {
                    let nc = (&c + x).min(inst.k().clone());
                    stack.push((u, mask | 1 << u, nc, d.clone(), &p * q));
                }
            }
        }
    }
    let unit = inst.cost_unit();
    let mut completed = BTreeMap::new();
    let mut incomplete = Rational::zero();
    let mut max_len = Rational::zero();
    for (len, ok, p) in &leaves {
        if len > &max_len {
            max_len = len.clone();
        }
        if *ok {
            *completed.entry(len.clone()).or_insert_with(Rational::zero) += p;
        } else {
            incomplete += p;
        }
    }
    let mut beyond = Vec::new();
    let mut within = Vec::new();
    let mut threshold = unit.clone();
    loop {
        let b: Rational = leaves.iter().filter(|(l, _, _)| l > &threshold).map(|(_, _, p)| p.clone()).sum();
        let w: Rational = completed.range(..=threshold.clone()).map(|(_, p)| p.clone()).sum();
        let stop = b.is_zero();
        beyond.push(b);
        within.push(w);
        if stop {
            break;
        }
        threshold *= int(2);
    }
    Ok(CompletionProfile {
        unit,
        beyond,
        within,
        completed,
        incomplete,
    })
}

/// Best fixed list: minimizes the exact expected length over orderings of
/// vertex subsets that either meet the target in every realization or contain
/// every gainable vertex. Returns the list (starting at the depot) and its cost.
pub fn optimal_nonadaptive(inst: &Instance, cfg: &OptConfig) -> Result<(Vec<usize>, Rational)> {
    gate("vertex count", inst.n(), cfg.max_list_vertices.min(20))?;
    let depot = inst.depot();
    let k = inst.k();
    let g = inst.gainable();
    let m = g.len();
    if m == 0 || k.is_zero() {
        return Ok((vec![depot], Rational::zero()));
    }
    let full = (1usize << m) - 1;
    // Pr[capped reward of the set < k]
    let mut pmfs: Vec<CappedPmf> = Vec::with_capacity(1 << m);
    let mut alive: Vec<Rational> = Vec::with_capacity(1 << m);
    let mut base = CappedPmf::new();
    base.insert(BigInt::zero(), Rational::one());
    pmfs.push(base);
    alive.push(Rational::one());
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let pmf = capped_convolve(&pmfs[mask & (mask - 1)], inst.reward(g[low]).support(), k);
        alive.push(prob_below(&pmf, k));
        pmfs.push(pmf);
    }
    drop(pmfs);
    let ret = |i: usize| inst.return_cost(g[i]);
    let mut cost: Vec<Option<Rational>> = vec![None; (1 << m) * m];
    for i in 0..m {
        let c = inst.step_cost(depot, g[i]) + (Rational::one() - &alive[1 << i]) * ret(i);
        cost[(1 << i) * m + i] = Some(c);
    }
    for mask in 1..=full {
        if alive[mask].is_zero() {
            continue;
        }
        for last in 0..m {
            let Some(c) = cost[mask * m + last].clone() else { continue };
            for u in 0..m {
                if mask >> u & 1 == 1 {
                    continue;
                }
                let nm = mask | 1 << u;
                let nc = &c + &alive[mask] * inst.step_cost(g[last], g[u]) + (&alive[mask] - &alive[nm]) * ret(u);
                let slot = &mut cost[nm * m + u];
                if slot.as_ref().is_none_or(|s| &nc < s) {
                    *slot = Some(nc);
                }
            }
        }
    }
    let mut best: Option<(Rational, usize, usize)> = None;
    for mask in 1..=full {
        if !(alive[mask].is_zero() || mask == full) {
            continue;
        }
        for last in 0..m {
            let Some(c) = &cost[mask * m + last] else { continue };
            let total = c + &alive[mask] * ret(last);
            if best.as_ref().is_none_or(|(b, _, _)| &total < b) {
                best = Some((total, mask, last));
            }
        }
    }
    let (value, mut mask, mut last) = best.expect("the full set is always reachable");
    let mut rev = vec![g[last]];
    while mask.count_ones() > 1 {
        let prev_mask = mask & !(1 << last);
        let target = cost[mask * m + last].clone().expect("reachable");
        let prev = (0..m)
            .filter(|&q| prev_mask >> q & 1 == 1)
            .find(|&q| {
                cost[prev_mask * m + q].as_ref().is_some_and(|c| {
                    !alive[prev_mask].is_zero()
                        && c + &alive[prev_mask] * inst.step_cost(g[q], g[last])
                            + (&alive[prev_mask] - &alive[mask]) * ret(last)
                            == target
                })
            })
            .expect("predecessor exists");
        rev.push(g[prev]);
        mask = prev_mask;
        last = prev;
    }
    let mut list = vec![depot];
    list.extend(rev.into_iter().rev());
    Ok((list, value))
}
