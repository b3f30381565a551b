//! Rooted orienteering: find a walk from the depot within a length budget
//! that maximizes the total profit of the distinct vertices it visits.
//!
//! All solvers share one deterministic tie-break: higher profit first, then
//! shorter budget-accounted length, then the lexicographically smallest
//! sorted vertex set.

mod brute;
mod exact;
mod heuristic;
mod knapsack;

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::{common_denominator, scaled_u128, Rational};

pub use brute::{solve_brute_force, BRUTE_FORCE_MAX_VERTICES};
pub use exact::{solve_exact, DEFAULT_EXACT_CAP};
pub use heuristic::solve_heuristic;
pub use knapsack::solve_knapsack;

#[derive(Debug, Clone)]
pub struct OrienteeringProblem<'a> {
    pub instance: &'a Instance,
    pub budget: Rational,
    /// Profit per vertex; the depot's entry is ignored.
    pub profits: Vec<Rational>,
}

impl<'a> OrienteeringProblem<'a> {
    pub fn new(instance: &'a Instance, budget: Rational, profits: Vec<Rational>) -> Result<Self> {
        if profits.len() != instance.n() {
            return Err(Error::InvalidArgument(format!(
                "{} profits for {} vertices",
                profits.len(),
                instance.n()
            )));
        }
        if budget.is_negative() {
            return Err(Error::InvalidArgument(format!("negative budget {budget}")));
        }
        if let Some(v) = profits.iter().position(|p| p.is_negative()) {
            return Err(Error::InvalidArgument(format!("negative profit at vertex {v}")));
        }
        Ok(Self {
            instance,
            budget,
            profits,
        })
    }

    pub fn root(&self) -> usize {
        self.instance.depot()
    }

    /// Non-depot vertices with positive profit, ascending.
    pub(crate) fn candidates(&self) -> Vec<usize> {
        let r = self.root();
        (0..self.instance.n())
            .filter(|&v| v != r && self.profits[v].is_positive())
            .collect()
    }

    pub(crate) fn budget_scaled(&self) -> u128 {
        self.instance.scaled().floor_budget(&self.budget)
    }

    /// Builds the result for a walk, computing its length and profit.
    pub(crate) fn result(&self, walk: Vec<usize>, rho: Rho) -> OracleResult {
        let length = self.instance.walk_cost(&walk);
        let mut seen = vec![false; self.instance.n()];
        let mut profit = Rational::zero();
        for &v in &walk {
            if v != self.root() && !seen[v] {
                seen[v] = true;
                profit += &self.profits[v];
            }
        }
        OracleResult {
            walk,
            length,
            profit,
            rho,
        }
    }
}

/// Approximation factor attached to a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Rho {
    /// Certified optimum.
    Exact,
    /// No guarantee; the measured profit ratio against the exact solver is
    /// attached when it was computed.
    Empirical { ratio_vs_exact: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Starts at the depot.
    pub walk: Vec<usize>,
    /// Budget-accounted length (includes the return edge in closed mode).
    pub length: Rational,
    pub profit: Rational,
    pub rho: Rho,
}

impl OracleResult {
    pub fn new_vertices(&self, depot: usize) -> impl Iterator<Item = usize> + '_ {
        self.walk.iter().copied().filter(move |&v| v != depot)
    }
}

/// Orienteering solver used by the policies.
pub trait Oracle: Send + Sync {
    fn solve(&self, problem: &OrienteeringProblem<'_>) -> Result<OracleResult>;

    /// Approximation factor fed into the iteration-count formula.
    fn rho(&self) -> Rational {
        Rational::from_integer(1.into())
    }

    fn name(&self) -> &'static str;

    /// Rejects instance kinds the solver cannot handle.
    fn check_instance(&self, _instance: &Instance) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Subset DP over a metric; vertex count at most `cap`.
    Exact { cap: usize },
    /// Budgeted 0/1 selection for knapsack-cover instances.
    Knapsack,
    Heuristic,
    BruteForce,
}

impl OracleKind {
    pub fn exact() -> Self {
        OracleKind::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }

    /// The exact solver matching the instance kind.
    pub fn exact_for(instance: &Instance) -> Self {
        if instance.is_knapsack() {
            OracleKind::Knapsack
        } else {
            Self::exact()
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Oracle for OracleKind {
    fn solve(&self, problem: &OrienteeringProblem<'_>) -> Result<OracleResult> {
        match *self {
            OracleKind::Exact { cap } => solve_exact(problem, cap),
            OracleKind::Knapsack => solve_knapsack(problem),
            OracleKind::Heuristic => solve_heuristic(problem),
            OracleKind::BruteForce => solve_brute_force(problem),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            OracleKind::Exact { .. } => "exact",
            OracleKind::Knapsack => "knapsack",
            OracleKind::Heuristic => "heuristic",
            OracleKind::BruteForce => "brute-force",
        }
    }

    fn check_instance(&self, instance: &Instance) -> Result<()> {
        match self {
            OracleKind::Exact { cap } => {
                if instance.is_knapsack() {
                    return Err(Error::KindMismatch(
                        "exact metric oracle given a knapsack instance; use the knapsack oracle".into(),
                    ));
                }
                if instance.n() > *cap {
                    return Err(exact::cap_error(instance.n(), *cap));
                }
                Ok(())
            }
            OracleKind::Knapsack if !instance.is_knapsack() => Err(Error::KindMismatch(
                "knapsack oracle given a metric instance".into(),
            )),
            OracleKind::BruteForce if instance.n() > BRUTE_FORCE_MAX_VERTICES => Err(Error::SizeGate {
                what: "vertex count",
                actual: instance.n(),
                limit: BRUTE_FORCE_MAX_VERTICES,
                hint: "brute force is a test oracle",
            }),
            _ => Ok(()),
        }
    }
}

/// Profit arithmetic used inside the DPs: exact integers over a common
/// denominator when they fit, exact rationals otherwise.
pub(crate) trait ProfitValue: Clone + Ord + Zero + Add<Output = Self> {}
impl ProfitValue for u128 {}
impl ProfitValue for Rational {}

/// Integer profits over a common denominator, if every partial sum fits.
pub(crate) fn integer_profits(profits: &[Rational]) -> Option<Vec<u128>> {
    let denom: BigInt = common_denominator(profits.iter());
    let scaled: Option<Vec<u128>> = profits.iter().map(|p| scaled_u128(p, &denom)).collect();
    let scaled = scaled?;
    let total = scaled.iter().try_fold(0u128, |a, &b| a.checked_add(b))?;
    (total < u128::MAX / 2).then_some(scaled)
}

/// Lexicographic order of two vertex sets encoded as bitmasks over an
/// ascending candidate list (bit `i` ↔ `i`-th smallest vertex).
pub(crate) fn mask_lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let diff = a ^ b;
    let low = diff & diff.wrapping_neg();
    let above = !((low << 1).wrapping_sub(1));
    if a & low != 0 {
        // a holds the smaller element at the first difference unless b has
        // already run out of elements.
        if b & above != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if a & above != 0 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Shared tie-break: `Less` means `a` is the preferred solution.
pub(crate) fn prefer<P: Ord>(
    a: (&P, u128),
    b: (&P, u128),
    set_cmp: impl FnOnce() -> Ordering,
) -> Ordering {
    b.0.cmp(a.0)
        .then(a.1.cmp(&b.1))
        .then_with(set_cmp)
}
