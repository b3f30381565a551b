//! Instance generators for the tightness examples, the adaptivity-gap
//! instance and seeded random instances.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bidding::solve_bidding_lp;
use crate::error::{Error, Result};
use crate::model::{normalize_metric, Geometry, Instance, Metric, RewardDistribution, TourMode};
use crate::scalar::{int, rat, Rational};

fn pow2(i: u32) -> BigInt {
    BigInt::one() << i
}

fn knapsack(costs: Vec<u64>, rewards: Vec<RewardDistribution>, k: BigInt) -> Result<Instance> {
    Instance::new(Geometry::Knapsack { costs }, 0, rewards, k, TourMode::Open)
}

/// Knapsack instance with one zero-cost random item `r` (vertex 1) and items
/// `u_i` of cost `i` and reward `2^i` (vertex `i + 1`), target `2^(n+1)`.
/// `r` yields `k − 2^T` with probability `p[T-1]`. Without `p`, the
/// worst-case distribution of the bidding LP is used.
pub fn gen_gap_instance(n: usize, p: Option<&[Rational]>) -> Result<Instance> {
    if n == 0 || n > 62 {
        return Err(Error::InvalidArgument(format!("gap instance needs 1 ≤ n ≤ 62, got {n}")));
    }
    let p: Vec<Rational> = match p {
        Some(p) => p.to_vec(),
        None => solve_bidding_lp(n)?.p,
    };
    if p.len() != n {
        return Err(Error::InvalidArgument(format!("p has {} entries, expected {n}", p.len())));
    }
    let k = pow2(n as u32 + 1);
    let support: Vec<(BigInt, Rational)> = p
        .iter()
        .enumerate()
        .filter(|(_, pt)| !pt.is_zero())
        .map(|(i, pt)| (&k - pow2(i as u32 + 1), pt.clone()))
        .collect();
    let r = RewardDistribution::new(support, 1)?;
    let mut costs = vec![0u64, 0];
    let mut rewards = vec![RewardDistribution::point_mass(0), r];
    for i in 1..=n {
        costs.push(i as u64);
        rewards.push(RewardDistribution::point_mass(pow2(i as u32)));
    }
    knapsack(costs, rewards, k)
}

fn tightness_instance(l: u32, fillers: u32) -> Result<Instance> {
    if !(3..=20).contains(&l) {
        return Err(Error::InvalidArgument(format!("ℓ must be in 3..=20, got {l}")));
    }
    let mut costs = vec![0u64];
    let mut rewards = vec![RewardDistribution::point_mass(0)];
    for i in 0..=l {
        costs.push(1 << i);
        rewards.push(RewardDistribution::point_mass(pow2(i)));
        for _ in 0..fillers {
            costs.push(1 << i);
            rewards.push(RewardDistribution::point_mass(1));
        }
    }
    knapsack(costs, rewards, pow2(l))
}

/// Deterministic knapsack cover with `k = 2^ℓ` and `ℓ(ℓ+1)` items: for each
/// `i ≤ ℓ` one item of cost and reward `2^i` plus `ℓ − 1` unit-reward items
/// of cost `2^i`.
pub fn gen_example1(l: u32) -> Result<Instance> {
    tightness_instance(l, l.saturating_sub(1))
}

/// As [`gen_example1`] with `ℓ² − 1` unit-reward items per cost class.
pub fn gen_example3(l: u32) -> Result<Instance> {
    tightness_instance(l, (l * l).saturating_sub(1))
}

/// Star instance in closed mode: depot 0, vertex `w` (index 1) at distance 1
/// with reward `k`, and for `0 ≤ i < t`, `0 ≤ j < h` a leaf `u_ij` at
/// distance `2^i` holding three co-located items (consecutive indices): one
/// of reward `(1−δ)δ^(hi+j)k` and two of reward `δ^(hi+j)k` with probability
/// `δ`, where `δ = 1/(ht)` and `k = (ht)^(2ht)`.
pub fn gen_example2(h: u32, t: u32) -> Result<Instance> {
    let ht = h * t;
    if h == 0 || t == 0 || ht > 8 {
        return Err(Error::InvalidArgument(format!("need h, t ≥ 1 and h·t ≤ 8, got h = {h}, t = {t}")));
    }
    let base = BigInt::from(ht);
    let k: BigInt = Pow::pow(&base, 2 * ht);
    let delta = rat(1, i64::from(ht));
    let mut legs = vec![Rational::zero(), int(1)];
    let mut groups = vec![0usize, 1];
    let mut rewards = vec![RewardDistribution::point_mass(0), RewardDistribution::point_mass(k.clone())];
    for i in 0..t {
        for j in 0..h {
            let e = h * i + j;
            // δ^e · k = (ht)^(2ht − e)
            let big: BigInt = Pow::pow(&base, 2 * ht - e);
            let det = Rational::from_integer(big.clone()) * (Rational::one() - &delta);
            if !det.is_integer() {
                return Err(Error::InvalidArgument(format!("non-integral reward {det} at u({i},{j})")));
            }
            let group = groups.len();
            for item in 0..3 {
                legs.push(int(pow2(i)));
                groups.push(group);
                let v = rewards.len();
                rewards.push(if item == 0 {
                    RewardDistribution::point_mass(det.to_integer())
                } else if ht == 1 {
                    RewardDistribution::point_mass(big.clone())
                } else {
                    RewardDistribution::new(
                        vec![(BigInt::zero(), Rational::one() - &delta), (big.clone(), delta.clone())],
                        v,
                    )?
                });
            }
        }
    }
    let metric = Metric::star(&legs, &groups)?;
    Instance::new(Geometry::Metric(metric), 0, rewards, k, TourMode::Closed)
}

/// Smallest `m` with `(1 − 2/(3ℓ))^m < 10⁻⁶`.
pub fn example4_default_m(l: u32) -> usize {
    let q = 2.0 / (3.0 * f64::from(l));
    ((1e-6f64).ln() / (1.0 - q).ln()).ceil() as usize
}

/// Probability that all `m` cost-one items of the truncated family fail.
pub fn example4_truncation_probability(l: u32, m: usize) -> Rational {
    let fail = Rational::one() - rat(2, 3 * i64::from(l));
    Pow::pow(&fail, m)
}

/// Stochastic knapsack cover with `k = 2^ℓ`: `m` cost-one items of reward
/// `k` with probability `2/(3ℓ)` (the infinite family, truncated), then for
/// each `i ≤ ℓ/h` and `1 ≤ j ≤ ℓ`, `h` items of cost `2^i` and reward
/// `k/2^j` with the same probability.
pub fn gen_example4(l: u32, h: u32, m: Option<usize>) -> Result<Instance> {
    if !(1..=40).contains(&l) || h == 0 {
        return Err(Error::InvalidArgument(format!("need 1 ≤ ℓ ≤ 40 and h ≥ 1, got ℓ = {l}, h = {h}")));
    }
    let m = m.unwrap_or_else(|| example4_default_m(l));
    if m == 0 {
        return Err(Error::InvalidArgument("truncation count m must be positive".into()));
    }
    let k = pow2(l);
    let p = rat(2, 3 * i64::from(l));
    let mut costs = vec![0u64];
    let mut rewards = vec![RewardDistribution::point_mass(0)];
    for _ in 0..m {
        costs.push(1);
        rewards.push(RewardDistribution::bernoulli(k.clone(), p.clone())?);
    }
    for i in 0..=l / h {
        for j in 1..=l {
            for _ in 0..h {
                costs.push(1 << i);
                rewards.push(RewardDistribution::bernoulli(&k >> j, p.clone())?);
            }
        }
    }
    knapsack(costs, rewards, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomGeometry {
    /// Random leg lengths around the depot.
    Star,
    /// Shortest-path closure of random integer edge weights.
    Points,
}

/// Seeded random instance on `n` vertices (depot 0) with target `k`.
/// Distances are rescaled so the smallest positive one is 1; every non-depot
/// vertex gets a pmf with one to three support points in `0..=k`.
pub fn gen_random(n: usize, k: u64, seed: u64, geometry: RandomGeometry) -> Result<Instance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n ≥ 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = match geometry {
        RandomGeometry::Star => {
            let mut legs = vec![Rational::zero()];
            legs.extend((1..n).map(|_| int(rng.random_range(1..=10u32))));
            let groups: Vec<usize> = (0..n).collect();
            Metric::star(&legs, &groups)?
        }
        RandomGeometry::Points => {
            let mut d = vec![vec![0u64; n]; n];
            for u in 0..n {
                for v in u + 1..n {
                    let w = rng.random_range(1..=10u64);
                    d[u][v] = w;
                    d[v][u] = w;
                }
            }
            for m in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        d[u][v] = d[u][v].min(d[u][m] + d[m][v]);
                    }
                }
            }
            Metric::new(d.into_iter().map(|r| r.into_iter().map(int).collect()).collect())?
        }
    };
    let (metric, _) = normalize_metric(&metric)?;
    let mut rewards = vec![RewardDistribution::point_mass(0)];
    for v in 1..n {
        let size = rng.random_range(1..=3usize).min(k as usize + 1);
        let mut values: Vec<u64> = Vec::with_capacity(size);
        while values.len() < size {
            let x = rng.random_range(0..=k);
            if !values.contains(&x) {
                values.push(x);
            }
        }
        let weights: Vec<i64> = (0..size).map(|_| rng.random_range(1..=6i64)).collect();
        let total: i64 = weights.iter().sum();
        let support = values.into_iter().zip(weights).map(|(x, w)| (BigInt::from(x), rat(w, total))).collect();
        rewards.push(RewardDistribution::new(support, v)?);
    }
    Instance::new(Geometry::Metric(metric), 0, rewards, k.into(), TourMode::Open)
}
