//! The non-adaptive covering policy: a fixed list built from orienteering walks
//! over phases `i`, iterations `t ≤ alpha` and caps `k/2^j`, executed in
//! order until the target is met.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::adaptive::{alpha_scaled, cover_phase, floor_log2, IterationRecord, RunTrace, Termination};
use crate::error::{Error, Result};
use crate::model::{capped_convolve, prob_below, CappedPmf, Instance, PolicyState};
use crate::orienteering::{Oracle, OrienteeringProblem};
use crate::sampler::RewardSampler;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct NonAdaptiveConfig {
    pub rho: Rational,
    pub alpha_override: Option<u64>,
    /// Leave out the depot between consecutive walks (every vertex a walk
    /// visits is new, so the depot is the only possible repeat).
    pub skip_duplicates: bool,
    pub max_phase: Option<u32>,
}

impl Default for NonAdaptiveConfig {
    fn default() -> Self {
        Self {
            rho: Rational::one(),
            alpha_override: None,
            skip_duplicates: true,
            max_phase: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub phase: u32,
    pub iteration: u64,
    pub cap_index: u32,
    /// Positions `start..end` of the list contributed by this walk.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonAdaptiveTour {
    /// Starts at the depot.
    pub walk: Vec<usize>,
    pub segments: Vec<Segment>,
    pub alpha: u64,
}

impl NonAdaptiveTour {
    /// Wraps an arbitrary list (prefixed with the depot if needed) as one segment.
    pub fn from_list(depot: usize, list: &[usize]) -> Self {
        let mut walk = vec![depot];
        walk.extend(list.iter().copied().skip_while(|&v| v == depot));
        let end = walk.len();
        Self {
            walk,
            segments: vec![Segment {
                phase: 0,
                iteration: 1,
                cap_index: 0,
                start: 1,
                end,
            }],
            alpha: 1,
        }
    }
}

fn covered(inst: &Instance, state: &PolicyState) -> bool {
    let floor: BigInt = (0..inst.n())
        .filter(|&v| state.is_visited(v))
        .map(|v| inst.reward(v).min_value().clone())
        .sum();
    &floor >= inst.k()
}

fn exhausted(inst: &Instance, state: &PolicyState) -> bool {
    (0..inst.n()).all(|v| state.is_visited(v) || !inst.reward(v).can_gain())
}

/// Builds the list. Construction stops once the visited set guarantees the
/// target in every realization, once every gainable vertex is in the list, or
/// at the first phase whose budget covers all gainable vertices and which adds
/// nothing new.
pub fn build_nonadaptive(inst: &Instance, oracle: &dyn Oracle, cfg: &NonAdaptiveConfig) -> Result<NonAdaptiveTour> {
    oracle.check_instance(inst)?;
    let depot = inst.depot();
    let k = inst.k();
    let alpha = match cfg.alpha_override {
        Some(0) => return Err(Error::InvalidArgument("alpha override must be positive".into())),
        Some(a) => a,
        None if k.is_zero() => 1,
        None => alpha_scaled(8, k, &cfg.rho)?,
    };
    let mut tour = NonAdaptiveTour {
        walk: vec![depot],
        segments: Vec::new(),
        alpha,
    };
    if k.is_zero() {
        return Ok(tour);
    }
    let levels = floor_log2(k);
    let caps: Vec<Rational> = (0..=levels)
        .map(|j| Rational::new(k.clone(), BigInt::one() << j))
        .collect();
    let unit = inst.cost_unit();
    let cover = cover_phase(inst);
    let max_phase = cfg.max_phase.unwrap_or(cover + 8);
    let mut state = PolicyState::new(inst.n(), depot);
    let mut phase = 0u32;
    loop {
        let budget = &unit * Rational::from_integer(BigInt::one() << phase);
        let mut phase_new = false;
        for t in 1..=alpha {
            let mut round_new = false;
            for (j, cap) in caps.iter().enumerate() {
                let profits = (0..inst.n())
                    .map(|v| {
                        if state.is_visited(v) {
                            Rational::zero()
                        } else {
                            inst.reward(v).truncated_expectation_at(cap)
                        }
                    })
                    .collect();
                let res = oracle.solve(&OrienteeringProblem::new(inst, budget.clone(), profits)?)?;
                let fresh: Vec<usize> = res.walk[1..].iter().copied().filter(|&v| !state.is_visited(v)).collect();
                if fresh.is_empty() {
                    continue;
                }
                round_new = true;
                let start = tour.walk.len();
                if !cfg.skip_duplicates && tour.walk.last() != Some(&depot) {
                    tour.walk.push(depot);
                }
                for &v in &fresh {
                    state.observe(v, BigInt::zero());
                    tour.walk.push(v);
                }
                tour.segments.push(Segment {
                    phase,
                    iteration: t,
                    cap_index: j as u32,
                    start,
                    end: tour.walk.len(),
                });
                if covered(inst, &state) || exhausted(inst, &state) {
                    return Ok(tour);
                }
            }
            phase_new |= round_new;
            if !round_new {
                break;
            }
        }
        if phase >= cover && !phase_new {
            return Ok(tour);
        }
        phase += 1;
        if phase > max_phase {
            return Err(Error::NonTermination {
                phase,
                diagnostic: "list construction added no vertex while gainable vertices remain".into(),
            });
        }
    }
}

/// Exact expected length of executing `walk` until the target is met.
///
/// The edge into position `j` is charged with the probability that the first
/// `j−1` positions have not reached the target. In closed mode the return leg
/// from the completing vertex, or from the last vertex if the list runs out,
/// is added.
pub fn expected_length_exact(inst: &Instance, walk: &[usize]) -> Rational {
    let k = inst.k();
    if walk.len() <= 1 || !k.is_positive() {
        return Rational::zero();
    }
    let mut pmf: CappedPmf = CappedPmf::new();
    pmf.insert(BigInt::zero(), Rational::one());
    let mut alive = Rational::one();
    let mut seen = vec![false; inst.n()];
    seen[walk[0]] = true;
    let mut total = Rational::zero();
    for w in walk.windows(2) {
        let (u, v) = (w[0], w[1]);
        if alive.is_zero() {
            break;
        }
        total += &alive * inst.step_cost(u, v);
        if !seen[v] {
            seen[v] = true;
            pmf = capped_convolve(&pmf, inst.reward(v).support(), k);
            let next = prob_below(&pmf, k);
            let done_here = &alive - &next;
            if !done_here.is_zero() {
                total += done_here * inst.return_cost(v);
            }
            alive = next;
        }
    }
    let last = *walk.last().expect("non-empty");
    total + alive * inst.return_cost(last)
}

/// Executes `tour` once with rewards from `sampler`; one record per segment
/// reached.
pub fn execute_nonadaptive(inst: &Instance, tour: &NonAdaptiveTour, sampler: &mut dyn RewardSampler) -> RunTrace {
    let sc = inst.scaled();
    let k = inst.k();
    let depot = inst.depot();
    let mut state = PolicyState::new(inst.n(), depot);
    let mut at = depot;
    let mut total: u128 = 0;
    let mut records = Vec::new();
    let mut last_phase = 0;
    let mut pos = 1;
    let mut met = state.target_met(k);
    let segments: Vec<Segment> = if tour.segments.is_empty() {
        Vec::new()
    } else {
        let mut s = tour.segments.clone();
        // positions not covered by a segment (none for built tours) still get walked
        s.last_mut().expect("non-empty").end = tour.walk.len();
        s
    };
    for seg in &segments {
        if met {
            break;
        }
        last_phase = seg.phase;
        let residual_before = state.residual(k);
        let before = state.collected().clone();
        let mut len: u128 = 0;
        let mut observed = Vec::new();
        while pos < seg.end {
            let v = tour.walk[pos];
            pos += 1;
            len += sc.step(at, v) as u128;
            at = v;
            if !state.is_visited(v) {
                let x = sampler.draw(v);
                state.observe(v, x.clone());
                observed.push((v, x));
            }
            if state.target_met(k) {
                met = true;
                break;
            }
        }
        total += len;
        records.push(IterationRecord {
            phase: seg.phase,
            iteration: seg.iteration,
            cap_index: Some(seg.cap_index),
            budget: Rational::zero(),
            walk: tour.walk[seg.start..seg.end].to_vec(),
            observed,
            residual_after: state.residual(k),
            increment: state.collected() - before,
            residual_before,
            length: sc.to_rational(len),
            expected_gain: Rational::zero(),
            idle_repeats: 0,
        });
    }
    total += sc.ret(at) as u128;
    let termination = if met {
        Termination::TargetMet
    } else {
        Termination::Exhausted
    };
    RunTrace {
        records,
        total_length: sc.to_rational(total),
        total_reward: state.collected().clone(),
        completed: met || exhausted(inst, &state),
        termination,
        final_phase: last_phase,
        alpha: tour.alpha,
    }
}
