//! Adaptivity-gap machinery: online bidding LPs, a generic simplex solver and
//! instance generators.

mod bidding;
mod generators;
mod lp;

pub use bidding::{
    bid_cost, cost_matrix, enumerate_gamma, expected_bid_cost, ratio_against, solve_bidding_lp,
    verify_minimax, BidSequence, BiddingLpResult, MinimaxCheck, DUALITY_TOL, EXACT_LP_MAX,
    GAMMA_MAX, INFEASIBLE, LP_MAX,
};
pub use generators::{
    example4_default_m, example4_truncation_probability, gen_example1, gen_example2,
    gen_example3, gen_example4, gen_gap_instance, gen_random, RandomGeometry,
};
pub use lp::{LinearProgram, LpSolution, Relation};
