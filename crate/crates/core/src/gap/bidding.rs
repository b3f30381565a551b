//! Online bidding: cost matrices over increasing bid sequences and the pair
//! of linear programs whose common value is the worst-case ratio of the best
//! randomized bidder.

use num_traits::Zero;
use serde::Serialize;

use super::lp::{LinearProgram, LpSolution, Relation};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Cost of a sequence that never reaches the threshold.
pub const INFEASIBLE: u64 = u64::MAX;

/// Largest `n` accepted by [`enumerate_gamma`].
pub const GAMMA_MAX: usize = 16;
/// Largest `n` accepted by [`solve_bidding_lp`].
pub const LP_MAX: usize = 14;
/// Above this `n` the LPs are solved in floating point.
pub const EXACT_LP_MAX: usize = 8;
/// Relative tolerance for the primal/dual comparison.
pub const DUALITY_TOL: f64 = 1e-9;

/// A strictly increasing sequence of bids from `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BidSequence(Vec<u32>);

impl BidSequence {
    pub fn new(bids: Vec<u32>) -> Result<Self> {
        if bids.is_empty() {
            return Err(Error::InvalidArgument("bid sequence is empty".into()));
        }
        if bids[0] == 0 || bids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "bids must be positive and strictly increasing: {bids:?}"
            )));
        }
        Ok(Self(bids))
    }

    pub fn bids(&self) -> &[u32] {
        &self.0
    }

    pub fn last(&self) -> u32 {
        *self.0.last().expect("non-empty")
    }
}

/// Sum of the bids up to and including the first one that is at least `t`.
pub fn bid_cost(seq: &BidSequence, t: u32) -> u64 {
    let mut sum = 0u64;
    for &b in seq.bids() {
        sum += u64::from(b);
        if b >= t {
            return sum;
        }
    }
    INFEASIBLE
}

/// All non-empty increasing sequences over `1..=n` in lexicographic order.
/// With `coverage_only`, only those whose last bid is `n`.
pub fn enumerate_gamma(n: usize, coverage_only: bool) -> Result<Vec<BidSequence>> {
    if n == 0 || n > GAMMA_MAX {
        return Err(Error::SizeGate {
            what: "bidding range n",
            actual: n,
            limit: GAMMA_MAX,
            hint: "enumeration is exponential in n",
        });
    }
    let mut out: Vec<BidSequence> = (1u32..(1 << n))
        .filter(|mask| !coverage_only || mask >> (n - 1) & 1 == 1)
        .map(|mask| BidSequence((0..n as u32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()))
        .collect();
    out.sort();
    Ok(out)
}

/// Cost matrix `C(I, T)` with rows over `gamma` and columns `T = 1..=n`.
pub fn cost_matrix(gamma: &[BidSequence], n: usize) -> Vec<Vec<u64>> {
    gamma
        .iter()
        .map(|seq| (1..=n as u32).map(|t| bid_cost(seq, t)).collect())
        .collect()
}

/// Both sides of the minimax identity for a non-negative matrix whose
/// column `j` carries weight `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxCheck<S> {
    /// `max_p min_I E_p[C(I,T)] / E_p[T]`.
    pub lhs: S,
    /// `min_π max_T E_π[C(I,T)] / T`.
    pub rhs: S,
    pub holds: bool,
}

struct MinimaxSolutions<S> {
    /// Variables `(α, σ_1, …, σ_n)`.
    dual: LpSolution<S>,
    /// Variables `(β, π_1, …, π_m)`.
    primal: LpSolution<S>,
}

fn minimax_lps<S: Scalar>(c: &[Vec<S>]) -> Result<MinimaxSolutions<S>> {
    let m = c.len();
    if m == 0 {
        return Err(Error::InvalidArgument("matrix has no rows".into()));
    }
    let n = c[0].len();
    if n == 0 || c.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix rows must be non-empty and of equal length".into()));
    }
    if c.iter().flatten().any(|v| v.is_negative_strict()) {
        return Err(Error::InvalidArgument("matrix has a negative entry".into()));
    }
    let weight = |j: usize| S::from_usize(j + 1).expect("small integer");

    // max α  s.t.  α − Σ_T C(I,T) σ_T ≤ 0 for every row I,  Σ_T T σ_T = 1.
    let mut obj = vec![S::zero(); n + 1];
    obj[0] = S::one();
    let mut dual = LinearProgram::new(obj);
    for row in c {
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(S::one());
        coeffs.extend(row.iter().map(|v| -v.clone()));
        dual.row(coeffs, Relation::Le, S::zero());
    }
    let mut norm = vec![S::zero()];
    norm.extend((0..n).map(weight));
    dual.row(norm, Relation::Eq, S::one());

    // min β  s.t.  T β − Σ_I C(I,T) π_I ≥ 0 for every column T,  Σ_I π_I = 1.
    let mut obj = vec![S::zero(); m + 1];
    obj[0] = -S::one();
    let mut primal = LinearProgram::new(obj);
    for t in 0..n {
        let mut coeffs = Vec::with_capacity(m + 1);
        coeffs.push(weight(t));
        coeffs.extend(c.iter().map(|row| -row[t].clone()));
        primal.row(coeffs, Relation::Ge, S::zero());
    }
    let mut norm = vec![S::one(); m + 1];
    norm[0] = S::zero();
    primal.row(norm, Relation::Eq, S::one());

    let dual = dual.solve()?;
    let mut primal = primal.solve()?;
    primal.value = -primal.value;
    Ok(MinimaxSolutions { dual, primal })
}

fn within_tolerance<S: Scalar>(lhs: &S, rhs: &S) -> bool {
    let diff = (lhs.clone() - rhs.clone()).abs();
    if S::EXACT {
        return diff.is_zero();
    }
    diff.approx() <= DUALITY_TOL * rhs.approx().abs().max(1.0)
}

/// Solves the two sides of the minimax identity as independent LPs.
pub fn verify_minimax<S: Scalar>(c: &[Vec<S>]) -> Result<MinimaxCheck<S>> {
    let sol = minimax_lps(c)?;
    let holds = within_tolerance(&sol.dual.value, &sol.primal.value);
    Ok(MinimaxCheck {
        lhs: sol.dual.value,
        rhs: sol.primal.value,
        holds,
    })
}

/// Optimal randomized bidding over thresholds `1..=n`.
#[derive(Debug, Clone, Serialize)]
pub struct BiddingLpResult {
    pub n: usize,
    /// True when both LPs were solved in exact arithmetic.
    pub exact: bool,
    /// Exact value, present when `exact`.
    #[serde(skip)]
    pub exact_value: Option<Rational>,
    pub value: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Worst-case threshold distribution; `p[T-1]` is the mass on `T`.
    #[serde(skip)]
    pub p: Vec<Rational>,
    /// Optimal mixed bidder, restricted to sequences with positive mass.
    #[serde(skip)]
    pub pi: Vec<(BidSequence, Rational)>,
    pub pivots: usize,
}

impl BiddingLpResult {
    pub fn p_f64(&self) -> Vec<f64> {
        self.p.iter().map(crate::scalar::to_f64).collect()
    }
}

/// Exact rational image of a non-negative vector, rescaled to sum to one.
fn normalize<S: Scalar>(v: &[S]) -> Vec<Rational> {
    let raw: Vec<Rational> = v
        .iter()
        .map(|x| if x.is_positive_strict() { x.to_rational() } else { Rational::zero() })
        .collect();
    let total: Rational = raw.iter().sum();
    if total.is_zero() {
        return raw;
    }
    raw.into_iter().map(|x| x / &total).collect()
}

fn solve_typed<S: Scalar>(n: usize, gamma: &[BidSequence], costs: &[Vec<u64>]) -> Result<BiddingLpResult> {
    let c: Vec<Vec<S>> = costs
        .iter()
        .map(|row| row.iter().map(|&v| S::from_u64(v).expect("finite cost")).collect())
        .collect();
    let sol = minimax_lps(&c)?;
    let (dv, pv) = (sol.dual.value.clone(), sol.primal.value.clone());
    if !within_tolerance(&dv, &pv) {
        return Err(Error::Lp(format!(
            "duality gap {:.3e} exceeds tolerance at n = {n} (dual {:.12}, primal {:.12}, {} pivots)",
            (dv.approx() - pv.approx()).abs(),
            dv.approx(),
            pv.approx(),
            sol.dual.pivots + sol.primal.pivots
        )));
    }
    let p = normalize(&sol.dual.x[1..]);
    let pi_all = normalize(&sol.primal.x[1..]);
    let pi = gamma
        .iter()
        .cloned()
        .zip(pi_all)
        .filter(|(_, w)| !w.is_zero())
        .collect();
    Ok(BiddingLpResult {
        n,
        exact: S::EXACT,
        exact_value: S::EXACT.then(|| dv.to_rational()),
        value: dv.approx(),
        primal_value: pv.approx(),
        dual_value: dv.approx(),
        gap: (dv.approx() - pv.approx()).abs(),
        p,
        pi,
        pivots: sol.dual.pivots + sol.primal.pivots,
    })
}

/// Solves the bidding LPs over coverage-completing sequences, exactly for
/// `n ≤ EXACT_LP_MAX` and in floating point up to `LP_MAX`.
///
/// Sequences that stop short of `n` are dominated by their extension with
/// `n`, which agrees on every threshold they cover, so dropping them leaves
/// both optima unchanged.
pub fn solve_bidding_lp(n: usize) -> Result<BiddingLpResult> {
    if n == 0 || n > LP_MAX {
        return Err(Error::SizeGate {
            what: "bidding LP n",
            actual: n,
            limit: LP_MAX,
            hint: "the LP has 2^(n-1) sequence constraints",
        });
    }
    let gamma = enumerate_gamma(n, true)?;
    let costs = cost_matrix(&gamma, n);
    if n <= EXACT_LP_MAX {
        solve_typed::<Rational>(n, &gamma, &costs)
    } else {
        solve_typed::<f64>(n, &gamma, &costs)
    }
}

/// Expected cost of `seq` against thresholds drawn from `p`, or `None` if
/// some threshold with positive mass is never reached.
pub fn expected_bid_cost(seq: &BidSequence, p: &[Rational]) -> Option<Rational> {
    let mut total = Rational::zero();
    for (i, pt) in p.iter().enumerate() {
        if pt.is_zero() {
            continue;
        }
        let c = bid_cost(seq, i as u32 + 1);
        if c == INFEASIBLE {
            return None;
        }
        total += pt * Rational::from_integer(c.into());
    }
    Some(total)
}

/// `min_I E_p[C(I,T)] / E_p[T]` by enumeration; used to cross-check the LP.
pub fn ratio_against(p: &[Rational], gamma: &[BidSequence]) -> Option<Rational> {
    let mean: Rational = p
        .iter()
        .enumerate()
        .map(|(i, pt)| pt * Rational::from_integer((i + 1).into()))
        .sum();
    if mean.is_zero() {
        return None;
    }
    gamma
        .iter()
        .filter_map(|s| expected_bid_cost(s, p))
        .min()
        .map(|best| best / mean)
}
