//! The adaptive covering policy: phases with budgets `2^i` (in units of the
//! smallest positive step cost), `alpha` orienteering calls per phase, profits
//! equal to rewards truncated at the residual target.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{capped_prefix_distribution, expectation, Instance, PolicyState};
use crate::orienteering::{Oracle, OrienteeringProblem};
use crate::sampler::RewardSampler;
use crate::scalar::{e_over_e_minus_one_bracket, int, Rational};

/// Largest `k` for which the harmonic number is summed exactly.
pub const EXACT_HARMONIC_MAX: u64 = 1_000_000;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `H_k` exactly for `k ≤ EXACT_HARMONIC_MAX`. Beyond that, the value of
/// `ln k + γ + 1/(2k) − 1/(12k²)` rounded to a rational; the truncation error is
/// below `1/(120k⁴)` and the float rounding error below `1e-15·H_k`.
pub fn harmonic(k: &BigInt) -> Result<Rational> {
    if k < &BigInt::one() {
        return Err(Error::InvalidArgument(format!("harmonic number needs k ≥ 1, got {k}")));
    }
    match k.to_u64().filter(|&k| k <= EXACT_HARMONIC_MAX) {
        Some(k) => Ok(harmonic_exact(k)),
        None => Ok(Rational::from_float(harmonic_asymptotic(k)).expect("finite")),
    }
}

fn harmonic_exact(k: u64) -> Rational {
    // Binary splitting: sum over [a, b) as an unreduced fraction.
    fn split(a: u64, b: u64) -> (BigInt, BigInt) {
        if b - a == 1 {
            return (BigInt::one(), BigInt::from(a));
        }
        let m = a + (b - a) / 2;
        let (p1, q1) = split(a, m);
        let (p2, q2) = split(m, b);
        (&p1 * &q2 + &p2 * &q1, q1 * q2)
    }
    let (p, q) = split(1, k + 1);
    Rational::new(p, q)
}

pub(crate) fn ln_bigint(k: &BigInt) -> f64 {
    let bits = k.bits();
    if bits <= 1000 {
        return k.to_f64().expect("finite").ln();
    }
    let shift = bits - 60;
    let top: BigInt = k >> shift;
    top.to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

fn harmonic_asymptotic(k: &BigInt) -> f64 {
    let kf = k.to_f64().unwrap_or(f64::INFINITY);
    let mut h = ln_bigint(k) + EULER_GAMMA;
    if kf.is_finite() {
        h += 1.0 / (2.0 * kf) - 1.0 / (12.0 * kf * kf);
    }
    h
}

/// A value never above `H_k`; exact when `k ≤ EXACT_HARMONIC_MAX`.
pub fn harmonic_lower_bound(k: &BigInt) -> Result<Rational> {
    if k.to_u64().is_some_and(|k| k <= EXACT_HARMONIC_MAX) {
        return harmonic(k);
    }
    harmonic(k)?;
    let lo = ln_bigint(k) + EULER_GAMMA;
    Ok(Rational::from_float(lo * (1.0 - 1e-12)).expect("finite"))
}

/// `⌈4ρ·e/(e−1)·H_k⌉`.
pub fn alpha(k: &BigInt, rho: &Rational) -> Result<u64> {
    alpha_scaled(4, k, rho)
}

/// `⌈c·ρ·e/(e−1)·H_k⌉`, certified against nested brackets of `e/(e−1)`.
pub fn alpha_scaled(c: u32, k: &BigInt, rho: &Rational) -> Result<u64> {
    if rho < &Rational::one() {
        return Err(Error::InvalidArgument(format!("rho must be at least 1, got {rho}")));
    }
    if k < &BigInt::one() {
        return Err(Error::InvalidArgument(format!("alpha needs k ≥ 1, got {k}")));
    }
    let small = k.to_u64().filter(|&k| k <= 4096);
    if small.is_none() {
        let e = std::f64::consts::E;
        let v = c as f64 * rho.to_f64().unwrap_or(f64::INFINITY) * e / (e - 1.0) * harmonic_asymptotic(k);
        let (lo, hi) = (v * (1.0 - 1e-9), v * (1.0 + 1e-9));
        if lo.ceil() == hi.ceil() && hi.is_finite() {
            return Ok(hi.ceil() as u64);
        }
        if k.to_u64().is_none_or(|k| k > EXACT_HARMONIC_MAX) {
            return Ok(v.ceil() as u64);
        }
    }
    let coeff = int(c) * rho * harmonic(k)?;
    let mut terms = 16;
    loop {
        let (lo, hi) = e_over_e_minus_one_bracket(terms);
        let a = (&coeff * lo).ceil();
        let b = (&coeff * hi).ceil();
        if a == b {
            return a
                .to_integer()
                .to_u64()
                .ok_or_else(|| Error::Overflow("alpha does not fit in u64".into()));
        }
        terms *= 2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    /// Approximation factor of the oracle, used in the iteration count.
    pub rho: Rational,
    pub alpha_override: Option<u64>,
    /// Stop mid-walk as soon as the target is reached.
    pub early_stop: bool,
    /// Abort after this phase; `None` derives a bound from the instance.
    pub max_phase: Option<u32>,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            rho: Rational::one(),
            alpha_override: None,
            early_stop: true,
            max_phase: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetMet,
    /// Every vertex with a possible positive reward has been visited.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub phase: u32,
    pub iteration: u64,
    /// Cap index for non-adaptive segments.
    pub cap_index: Option<u32>,
    pub budget: Rational,
    pub walk: Vec<usize>,
    /// Rewards drawn at the vertices newly visited, in walk order.
    pub observed: Vec<(usize, BigInt)>,
    pub residual_before: BigInt,
    pub residual_after: BigInt,
    /// Reward collected in this iteration.
    pub increment: BigInt,
    /// Length charged in this iteration, including any connecting leg.
    pub length: Rational,
    /// Expected covered fraction of the residual for the planned walk.
    pub expected_gain: Rational,
    /// Further iterations of the same phase that would repeat this one
    /// without visiting anything new.
    pub idle_repeats: u64,
}

impl IterationRecord {
    /// `min(J_t, residual)/residual`; zero when the residual is already zero.
    pub fn realized_gain(&self) -> Rational {
        if !self.residual_before.is_positive() {
            return Rational::zero();
        }
        let j = (&self.increment).min(&self.residual_before).clone();
        Rational::new(j, self.residual_before.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub total_length: Rational,
    pub total_reward: BigInt,
    pub completed: bool,
    pub termination: Termination,
    /// Phase in which the run ended (0 if it never moved).
    pub final_phase: u32,
    pub alpha: u64,
}

impl RunTrace {
    /// Whether the run continued past phase `i`.
    pub fn continues_beyond(&self, i: u32) -> bool {
        self.final_phase > i
    }
}

/// Expected fraction of the residual target covered by the new vertices of
/// `walk`; zero when the target is already met.
pub fn gain_of_state(inst: &Instance, state: &PolicyState, walk: &[usize]) -> Rational {
    let residual = state.residual(inst.k());
    if !residual.is_positive() {
        return Rational::zero();
    }
    let mut seen = vec![false; inst.n()];
    let fresh: Vec<_> = walk
        .iter()
        .filter(|&&v| {
            let new = !state.is_visited(v) && !seen[v];
            seen[v] = true;
            new
        })
        .map(|&v| inst.reward(v))
        .collect();
    if fresh.is_empty() {
        return Rational::zero();
    }
    let pmfs = capped_prefix_distribution(fresh, &residual);
    expectation(pmfs.last().expect("non-empty")) / Rational::from_integer(residual)
}

/// Phase index whose budget first covers a walk through every gainable vertex.
pub(crate) fn cover_phase(inst: &Instance) -> u32 {
    let unit = inst.cost_unit();
    let need = inst.cover_cost_bound();
    let mut i = 0u32;
    let mut b = unit;
    while b < need {
        b *= int(2);
        i += 1;
    }
    i
}

#[derive(Debug)]
struct Plan {
    walk: Vec<usize>,
    gain: Rational,
    adds_new: bool,
}

type PlanKey = (Vec<u64>, BigInt, u32);

/// Reusable driver: plans are memoized per (visited set, residual, phase) and
/// shared across runs, so it can serve many Monte Carlo trials concurrently.
pub struct AdaptiveRunner<'a> {
    inst: &'a Instance,
    oracle: &'a dyn Oracle,
    alpha: u64,
    early_stop: bool,
    max_phase: u32,
    unit: Rational,
    cache: RwLock<HashMap<PlanKey, Arc<Plan>>>,
}

impl<'a> AdaptiveRunner<'a> {
    pub fn new(inst: &'a Instance, oracle: &'a dyn Oracle, cfg: &AdaptiveConfig) -> Result<Self> {
        oracle.check_instance(inst)?;
        let alpha = match cfg.alpha_override {
            Some(0) => return Err(Error::InvalidArgument("alpha override must be positive".into())),
            Some(a) => a,
            None if inst.k().is_zero() => 1,
            None => alpha(inst.k(), &cfg.rho)?,
        };
        Ok(Self {
            inst,
            oracle,
            alpha,
            early_stop: cfg.early_stop,
            max_phase: cfg.max_phase.unwrap_or_else(|| cover_phase(inst) + 8),
            unit: inst.cost_unit(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    fn plan(&self, state: &PolicyState, phase: u32) -> Result<Arc<Plan>> {
        let residual = state.residual(self.inst.k());
        let key = (state.visited_key(), residual.clone(), phase);
        if let Some(p) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let profits = (0..self.inst.n())
            .map(|v| {
                if state.is_visited(v) {
                    Rational::zero()
                } else {
                    self.inst.reward(v).truncated_expectation(&residual)
                }
            })
            .collect();
        let budget = &self.unit * Rational::from_integer(BigInt::one() << phase);
        let problem = OrienteeringProblem::new(self.inst, budget, profits)?;
        let res = self.oracle.solve(&problem)?;
        let adds_new = res.walk.iter().any(|&v| !state.is_visited(v));
        let plan = Arc::new(Plan {
            gain: gain_of_state(self.inst, state, &res.walk),
            walk: res.walk,
            adds_new,
        });
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, plan.clone());
        Ok(plan)
    }

    fn terminal(&self, state: &PolicyState) -> Option<Termination> {
        if state.target_met(self.inst.k()) {
            return Some(Termination::TargetMet);
        }
        let open = (0..self.inst.n())
            .any(|v| !state.is_visited(v) && self.inst.reward(v).can_gain());
        (!open).then_some(Termination::Exhausted)
    }

    /// One run with rewards drawn from `sampler`.
    pub fn run(&self, sampler: &mut dyn RewardSampler) -> Result<RunTrace> {
        let inst = self.inst;
        let sc = inst.scaled();
        let depot = inst.depot();
        let k = inst.k();
        let mut state = PolicyState::new(inst.n(), depot);
        let mut records = Vec::new();
        let mut total: u128 = 0;
        // Where the agent stands; open-mode walks leave it away from the depot.
        let mut at = depot;
        let mut phase = 0u32;
        let termination = loop {
            if let Some(t) = self.terminal(&state) {
                break t;
            }
            let budget = &self.unit * Rational::from_integer(BigInt::one() << phase);
            let mut done = None;
            for t in 1..=self.alpha {
                let plan = self.plan(&state, phase)?;
                let residual_before = state.residual(k);
                let before = state.collected().clone();
                let mut len: u128 = 0;
                let mut observed = Vec::new();
                if plan.walk.len() > 1 {
                    len += sc.step(at, depot) as u128;
                    at = depot;
                    for &v in &plan.walk[1..] {
                        len += sc.step(at, v) as u128;
                        at = v;
                        if !state.is_visited(v) {
                            let x = sampler.draw(v);
                            state.observe(v, x.clone());
                            observed.push((v, x));
                        }
                        if self.early_stop && state.target_met(k) {
                            break;
                        }
                    }
                }
                let t_now = self.terminal(&state);
                if t_now.is_some() && at != depot {
                    len += sc.ret(at) as u128;
                }
                total += len;
                let idle_repeats = if plan.adds_new || t_now.is_some() {
                    0
                } else {
                    self.alpha - t
                };
                records.push(IterationRecord {
                    phase,
                    iteration: t,
                    cap_index: None,
                    budget: budget.clone(),
                    walk: plan.walk.clone(),
                    observed,
                    residual_after: state.residual(k),
                    increment: state.collected() - before,
                    residual_before,
                    length: sc.to_rational(len),
                    expected_gain: plan.gain.clone(),
                    idle_repeats,
                });
                if t_now.is_some() {
                    done = t_now;
                    break;
                }
                if idle_repeats > 0 {
                    break;
                }
            }
            if let Some(t) = done {
                break t;
            }
            phase += 1;
            if phase > self.max_phase {
                return Err(Error::NonTermination {
                    phase,
                    diagnostic: format!(
                        "residual {} with unvisited gainable vertices after phase {}; the oracle keeps returning walks without new vertices",
                        state.residual(k),
                        self.max_phase
                    ),
                });
            }
        };
        Ok(RunTrace {
            records,
            total_length: sc.to_rational(total),
            total_reward: state.collected().clone(),
            completed: true,
            termination,
            final_phase: phase,
            alpha: self.alpha,
        })
    }
}

/// Runs the adaptive policy once.
pub fn run_adaptive(
    inst: &Instance,
    oracle: &dyn Oracle,
    cfg: &AdaptiveConfig,
    sampler: &mut dyn RewardSampler,
) -> Result<RunTrace> {
    AdaptiveRunner::new(inst, oracle, cfg)?.run(sampler)
}

/// Cap ladder exponent `⌊log₂ k⌋` for `k ≥ 1`.
pub(crate) fn floor_log2(k: &BigInt) -> u32 {
    (k.bits().max(1) - 1) as u32
}
