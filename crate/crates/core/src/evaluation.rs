//! Monte Carlo harness and executable checks of the analytic inequalities
//! behind the adaptive policy's guarantee.
//!
//! Trials run in parallel but results are collected in trial order and reduced
//! sequentially, so a report depends only on `(seed, trials)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::adaptive::{harmonic, harmonic_lower_bound, AdaptiveRunner, RunTrace, EXACT_HARMONIC_MAX};
use crate::error::{Error, Result};
use crate::exact_opt::CompletionProfile;
use crate::model::{Instance, TourMode};
use crate::nonadaptive::{execute_nonadaptive, NonAdaptiveTour};
use crate::sampler::{SampleTable, SeededSampler};
use crate::scalar::{certified_cmp, one_minus_inv_e_bracket, to_f64, Rational, Scalar};

/// Policy under evaluation.
#[derive(Clone, Copy)]
pub enum PolicyRef<'a> {
    Adaptive(&'a AdaptiveRunner<'a>),
    NonAdaptive(&'a NonAdaptiveTour),
}

/// Length statistics over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
    /// Normal-approximation 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of trials that met the target.
    pub target_met: f64,
}

/// Per-phase estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub phase: u32,
    /// Fraction of trials continuing beyond this phase.
    pub u_hat: f64,
    pub u_se: f64,
    /// Mean of the summed planned gains (`gain_of_state`) over the phase.
    pub delta_hat: f64,
    pub delta_se: f64,
    /// Mean of the summed realized fractional increments.
    pub realized_hat: f64,
    /// Mean planned gain of iteration `t + 1`, zero for trials not reaching it.
    pub g_hat: Vec<f64>,
    /// Exact optimum's probability of exceeding this phase's budget.
    #[serde(skip)]
    pub u_star: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseStats {
    pub trials: u64,
    pub alpha: u64,
    pub rows: Vec<PhaseRow>,
}

impl PhaseStats {
    pub fn u_hat(&self, i: u32) -> f64 {
        self.rows.get(i as usize).map_or(0.0, |r| r.u_hat)
    }

    pub fn u_se(&self, i: u32) -> f64 {
        self.rows.get(i as usize).map_or(0.0, |r| r.u_se)
    }

    /// Fills `u_star` from an exact completion profile of the optimum.
    pub fn attach_profile(&mut self, profile: &CompletionProfile) {
        for r in &mut self.rows {
            r.u_star = Some(profile.u_star(r.phase as usize));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub summary: Summary,
    pub phases: PhaseStats,
    /// Phases across all adaptive traces whose harmonic bound failed.
    pub harmonic_violations: u64,
    pub harmonic_phases_checked: u64,
}

struct TrialOutcome {
    length: f64,
    target_met: bool,
    final_phase: u32,
    /// Per phase: planned gains by iteration, realized gain sum.
    planned: Vec<Vec<Rational>>,
    realized: Vec<Rational>,
    harmonic_checked: u64,
    harmonic_failed: u64,
}

fn outcome(trace: &RunTrace, k: &BigInt, check_harmonic: bool) -> Result<TrialOutcome> {
    let phases = trace.final_phase as usize + 1;
    let mut planned = vec![Vec::new(); phases];
    let mut realized = vec![Rational::zero(); phases];
    for r in &trace.records {
        let p = r.phase as usize;
        let t = r.iteration.max(1) as usize;
        if planned[p].len() < t {
            planned[p].resize(t, Rational::zero());
        }
        planned[p][t - 1] += &r.expected_gain;
        realized[p] += r.realized_gain();
    }
    let (mut checked, mut failed) = (0, 0);
    if check_harmonic {
        for v in check_harmonic_bound(trace, k)? {
            checked += 1;
            failed += u64::from(!v.holds);
        }
    }
    Ok(TrialOutcome {
        length: to_f64(&trace.total_length),
        target_met: trace.termination == crate::adaptive::Termination::TargetMet,
        final_phase: trace.final_phase,
        planned,
        realized,
        harmonic_checked: checked,
        harmonic_failed: failed,
    })
}

/// Runs `trials` independent executions; trial `j` draws from stream `j` of
/// the generator seeded with `seed`.
pub fn monte_carlo(inst: &Instance, policy: PolicyRef<'_>, trials: u64, seed: u64) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let table = SampleTable::new(inst);
    let k = inst.k();
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut sampler = SeededSampler::new(&table, seed, j);
            match policy {
                PolicyRef::Adaptive(runner) => outcome(&runner.run(&mut sampler)?, k, true),
                PolicyRef::NonAdaptive(tour) => outcome(&execute_nonadaptive(inst, tour, &mut sampler), k, false),
            }
        })
        .collect::<Result<_>>()?;
    let alpha = match policy {
        PolicyRef::Adaptive(r) => r.alpha(),
        PolicyRef::NonAdaptive(t) => t.alpha,
    };
    Ok(reduce(&outcomes, alpha))
}

fn mean_se(values: impl Iterator<Item = f64>, n: f64) -> (f64, f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for v in values {
        s += v;
        s2 += v * v;
    }
    let mean = s / n;
    let var = if n > 1.0 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, var, (var / n).sqrt())
}

fn reduce(outcomes: &[TrialOutcome], alpha: u64) -> McReport {
    let trials = outcomes.len() as u64;
    let n = trials as f64;
    let (mean, variance, std_error) = mean_se(outcomes.iter().map(|o| o.length), n);
    let summary = Summary {
        trials,
        mean,
        variance,
        std_error,
        ci_low: mean - 1.96 * std_error,
        ci_high: mean + 1.96 * std_error,
        min: outcomes.iter().map(|o| o.length).fold(f64::INFINITY, f64::min),
        max: outcomes.iter().map(|o| o.length).fold(f64::NEG_INFINITY, f64::max),
        target_met: outcomes.iter().filter(|o| o.target_met).count() as f64 / n,
    };
    let last = outcomes.iter().map(|o| o.final_phase).max().unwrap_or(0);
    let rows = (0..=last)
        .map(|i| {
            let p = i as usize;
            let u = outcomes.iter().filter(|o| o.final_phase > i).count() as f64 / n;
            let (delta_hat, _, delta_se) = mean_se(
                outcomes
                    .iter()
                    .map(|o| o.planned.get(p).map_or(0.0, |g| g.iter().map(to_f64).sum())),
                n,
            );
            let realized_hat = outcomes
                .iter()
                .map(|o| o.realized.get(p).map_or(0.0, to_f64))
                .sum::<f64>()
                / n;
            let iters = outcomes.iter().map(|o| o.planned.get(p).map_or(0, Vec::len)).max().unwrap_or(0);
            let g_hat = (0..iters)
                .map(|t| {
                    outcomes
                        .iter()
                        .map(|o| o.planned.get(p).and_then(|g| g.get(t)).map_or(0.0, to_f64))
                        .sum::<f64>()
                        / n
                })
                .collect();
            PhaseRow {
                phase: i,
                u_hat: u,
                u_se: (u * (1.0 - u) / n).sqrt(),
                delta_hat,
                delta_se,
                realized_hat,
                g_hat,
                u_star: None,
            }
        })
        .collect();
    McReport {
        summary,
        phases: PhaseStats { trials, alpha, rows },
        harmonic_violations: outcomes.iter().map(|o| o.harmonic_failed).sum(),
        harmonic_phases_checked: outcomes.iter().map(|o| o.harmonic_checked).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    /// The exact comparison value was unavailable.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub phase: u32,
    pub u_hat: f64,
    pub prev_u_hat: f64,
    pub u_star: Option<f64>,
    pub slack: f64,
    pub verdict: Verdict,
}

/// Checks `û_i ≤ û_{i−1}/4 + u*_i + slack` for every phase `i ≥ 1`, with
/// `slack = se_mult` standard errors of `û_i − û_{i−1}/4`.
pub fn check_lemma_main(stats: &PhaseStats, profile: Option<&CompletionProfile>, se_mult: f64) -> Vec<LemmaVerdict> {
    (1..stats.rows.len() as u32)
        .map(|i| {
            let (u, prev) = (stats.u_hat(i), stats.u_hat(i - 1));
            let slack = se_mult * (stats.u_se(i).powi(2) + (stats.u_se(i - 1) / 4.0).powi(2)).sqrt();
            let u_star = profile
                .map(|p| p.u_star(i as usize))
                .or_else(|| stats.rows.get(i as usize).and_then(|r| r.u_star.clone()));
            let verdict = match &u_star {
                None if u <= prev / 4.0 + slack => Verdict::Holds,
                None => Verdict::Partial,
                Some(us) if u <= prev / 4.0 + to_f64(us) + slack => Verdict::Holds,
                Some(_) => Verdict::Violated,
            };
            LemmaVerdict {
                phase: i,
                u_hat: u,
                prev_u_hat: prev,
                u_star: u_star.as_ref().map(to_f64),
                slack,
                verdict,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainBoundVerdict {
    pub phase: u32,
    pub delta_hat: f64,
    /// `(α/ρ)(1 − 1/e)(û_i − u*_i)`.
    pub lower: f64,
    /// `H_k · û_{i−1}`.
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

/// Sandwich `(α/ρ)(1−1/e)(û_i − u*_i) ≤ Δ̂_i ≤ H_k·û_{i−1}`, each side with
/// `se_mult` standard errors of slack. Phases without `u*` only get the
/// upper check.
pub fn check_gain_bounds(
    stats: &PhaseStats,
    profile: Option<&CompletionProfile>,
    k: &BigInt,
    rho: &Rational,
    se_mult: f64,
) -> Result<Vec<GainBoundVerdict>> {
    let hk = if k.is_positive() { to_f64(&harmonic(k)?) } else { 0.0 };
    let c = stats.alpha as f64 / to_f64(rho) * (1.0 - (-1f64).exp());
    Ok(stats
        .rows
        .iter()
        .map(|r| {
            let prev = if r.phase == 0 { 1.0 } else { stats.u_hat(r.phase - 1) };
            let prev_se = if r.phase == 0 { 0.0 } else { stats.u_se(r.phase - 1) };
            let u_star = profile.map(|p| p.u_star(r.phase as usize)).or_else(|| r.u_star.clone());
            let lower = u_star.as_ref().map_or(f64::NEG_INFINITY, |us| c * (r.u_hat - to_f64(us)));
            let upper = hk * prev;
            let lower_slack = se_mult * (r.delta_se.powi(2) + (c * r.u_se).powi(2)).sqrt();
            let upper_slack = se_mult * (r.delta_se.powi(2) + (hk * prev_se).powi(2)).sqrt();
            GainBoundVerdict {
                phase: r.phase,
                delta_hat: r.delta_hat,
                lower,
                upper,
                lower_holds: r.delta_hat + lower_slack >= lower,
                upper_holds: r.delta_hat <= upper + upper_slack + 1e-12,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgBound {
    pub mean: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Mean length against `unit·c·(2α Σ_{i≥1} 2^i û_i + 4α)`, where `c = 2` in
/// open mode to cover the legs that reconnect consecutive walks to the depot.
pub fn check_alg_bound(report: &McReport, unit: &Rational, mode: TourMode, se_mult: f64) -> AlgBound {
    let a = report.phases.alpha as f64;
    let tail: f64 = report
        .phases
        .rows
        .iter()
        .skip(1)
        .map(|r| 2f64.powi(r.phase as i32) * r.u_hat)
        .sum();
    let c = if mode == TourMode::Open { 2.0 } else { 1.0 };
    let bound = to_f64(unit) * c * (2.0 * a * tail + 4.0 * a);
    let slack = se_mult * report.summary.std_error;
    AlgBound {
        mean: report.summary.mean,
        bound,
        slack,
        holds: report.summary.mean <= bound + slack,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicVerdict {
    pub phase: u32,
    /// `Σ_t min(J_t, R_t)/R_t` over the phase's iterations.
    #[serde(skip)]
    pub sum: Rational,
    /// Residual at the start of the phase.
    #[serde(skip)]
    pub start_residual: BigInt,
    pub holds: bool,
}

fn harmonic_cached(l: &BigInt) -> Result<Rational> {
    static CACHE: OnceLock<Mutex<HashMap<BigInt, Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(h) = cache.lock().expect("harmonic cache").get(l) {
        return Ok(h.clone());
    }
    let h = harmonic_lower_bound(l)?;
    cache.lock().expect("harmonic cache").insert(l.clone(), h.clone());
    Ok(h)
}

/// Per phase of an adaptive trace, checks `Σ_t J_t/R_t ≤ H_L ≤ H_k` where
/// `R_t` is the residual before iteration `t` and `L` the residual at the
/// start of the phase. Beyond `EXACT_HARMONIC_MAX` a certified lower bound on
/// `H_L` is used, which can only make the check stricter.
pub fn check_harmonic_bound(trace: &RunTrace, k: &BigInt) -> Result<Vec<HarmonicVerdict>> {
    let mut out: Vec<HarmonicVerdict> = Vec::new();
    for r in &trace.records {
        if out.last().is_none_or(|v| v.phase != r.phase) {
            out.push(HarmonicVerdict {
                phase: r.phase,
                sum: Rational::zero(),
                start_residual: r.residual_before.clone(),
                holds: true,
            });
        }
        out.last_mut().expect("pushed").sum += r.realized_gain();
    }
    for v in &mut out {
        if v.start_residual > *k {
            v.holds = false;
            continue;
        }
        // H_L ≥ 1 for L ≥ 1, so small sums need no harmonic number.
        if v.sum <= Rational::one() {
            v.holds = v.sum.is_zero() || v.start_residual.is_positive();
            continue;
        }
        let exact = v.start_residual.to_u64().is_some_and(|l| l <= EXACT_HARMONIC_MAX);
        let h = harmonic_cached(&v.start_residual)?;
        v.holds = if exact { v.sum <= h } else { v.sum < h };
    }
    Ok(out)
}

/// Result of the capped-sum inequality `E[min(X,1)] ≥ (1 − 1/e)·min(E[X], 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedSumCheck<S> {
    pub ex: S,
    pub ey: S,
    pub holds: bool,
}

/// `ds` lists independent variables as `(value, probability)` pairs with
/// values in `[0, 1]`. Exact scalars get a certified comparison against
/// `1 − 1/e`; floats use a `1e-12` tolerance.
pub fn check_capped_sum<S: Scalar>(ds: &[Vec<(S, S)>]) -> Result<CappedSumCheck<S>> {
    let one = S::one();
    let mut ex = S::zero();
    for (v, d) in ds.iter().enumerate() {
        let mut mass = S::zero();
        for (x, p) in d {
            if x.is_negative_strict() || (x.clone() - one.clone()).is_positive_strict() {
                return Err(Error::InvalidDistribution {
                    vertex: v,
                    reason: format!("value {:?} outside [0, 1]", x),
                });
            }
            if p.is_negative_strict() {
                return Err(Error::InvalidDistribution {
                    vertex: v,
                    reason: format!("negative probability {:?}", p),
                });
            }
            ex = ex + x.clone() * p.clone();
            mass = mass + p.clone();
        }
        if !(mass.clone() - one.clone()).is_negligible() {
            return Err(Error::PmfMass {
                vertex: v,
                sum: format!("{mass:?}"),
            });
        }
    }
    // pmf of min(Σ, 1), kept sorted and merged on equal keys
    let mut pmf: Vec<(S, S)> = vec![(S::zero(), S::one())];
    for d in ds {
        let mut next: Vec<(S, S)> = Vec::with_capacity(pmf.len() * d.len());
        for (s, p) in &pmf {
            for (x, q) in d {
                let mut v = s.clone() + x.clone();
                if v > one {
                    v = one.clone();
                }
                next.push((v, p.clone() * q.clone()));
            }
        }
        next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        pmf.clear();
        for (v, p) in next {
            match pmf.last_mut() {
                Some((lv, lp)) if (lv.clone() - v.clone()).is_negligible() => *lp = lp.clone() + p,
                _ => pmf.push((v, p)),
            }
        }
    }
    let ey = pmf.iter().fold(S::zero(), |acc, (v, p)| acc + v.clone() * p.clone());
    let m = if ex < one { ex.clone() } else { one.clone() };
    let holds = if S::EXACT {
        certified_cmp(&ey.to_rational(), &m.to_rational(), one_minus_inv_e_bracket, 4096)
            .is_some_and(|o| o != Ordering::Less)
    } else {
        ey.approx() >= (1.0 - (-1f64).exp()) * m.approx() - 1e-12
    };
    Ok(CappedSumCheck { ex, ey, holds })
}
