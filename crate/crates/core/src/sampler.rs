//! Reward sources for simulated runs.
//!
//! Trial `j` of a Monte Carlo batch with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` moved to stream `j`, so every trial's
//! randomness is fixed regardless of how trials are scheduled.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, RewardDistribution};
use crate::scalar::{common_denominator, to_f64, Rational};

/// Supplies the reward of a vertex the first time a run visits it.
pub trait RewardSampler {
    fn draw(&mut self, v: usize) -> BigInt;
}

/// Per-trial generator.
pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone)]
enum Table {
    /// Cumulative integer weights over a common denominator.
    Exact { denom: u64, cum: Vec<u64> },
    Float { cum: Vec<f64> },
}

/// Precomputed inverse-CDF tables for every vertex of an instance.
#[derive(Debug, Clone)]
pub struct SampleTable {
    values: Vec<Vec<BigInt>>,
    tables: Vec<Table>,
}

impl SampleTable {
    pub fn new(inst: &Instance) -> Self {
        let values = inst
            .rewards()
            .iter()
            .map(|d| d.support().iter().map(|(x, _)| x.clone()).collect())
            .collect();
        let tables = inst.rewards().iter().map(table_for).collect();
        Self { values, tables }
    }

    pub fn sample<R: Rng>(&self, v: usize, rng: &mut R) -> BigInt {
        let vals = &self.values[v];
        if vals.len() == 1 {
            return vals[0].clone();
        }
        let idx = match &self.tables[v] {
            Table::Exact { denom, cum } => {
                let u = rng.random_range(0..*denom);
                cum.partition_point(|&c| c <= u)
            }
            Table::Float { cum } => {
                let u: f64 = rng.random();
                cum.partition_point(|&c| c <= u)
            }
        };
        vals[idx.min(vals.len() - 1)].clone()
    }
}

fn table_for(d: &RewardDistribution) -> Table {
    let denom = common_denominator(d.support().iter().map(|(_, p)| p));
    if let Some(dn) = denom.to_u64() {
        let mut acc = 0u64;
        let cum = d
            .support()
            .iter()
            .map(|(_, p)| {
                let w = (p * Rational::from_integer(denom.clone()))
                    .to_integer()
                    .to_u64()
                    .expect("weight below denominator");
                acc += w;
                acc
            })
            .collect();
        return Table::Exact { denom: dn, cum };
    }
    let mut acc = 0.0;
    let cum = d
        .support()
        .iter()
        .map(|(_, p)| {
            acc += to_f64(p);
            acc
        })
        .collect();
    Table::Float { cum }
}

/// Draws lazily from a precomputed table with a per-trial generator.
pub struct SeededSampler<'a> {
    table: &'a SampleTable,
    rng: ChaCha8Rng,
}

impl<'a> SeededSampler<'a> {
    pub fn new(table: &'a SampleTable, master: u64, trial: u64) -> Self {
        Self {
            table,
            rng: trial_rng(master, trial),
        }
    }
}

impl RewardSampler for SeededSampler<'_> {
    fn draw(&mut self, v: usize) -> BigInt {
        self.table.sample(v, &mut self.rng)
    }
}

/// A fully specified realization, used for replay and exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct FixedRewards(pub Vec<BigInt>);

impl RewardSampler for FixedRewards {
    fn draw(&mut self, v: usize) -> BigInt {
        self.0[v].clone()
    }
}

/// Every joint realization of the instance's rewards with its probability,
/// or `None` if there are more than `limit`.
pub fn enumerate_realizations(
    inst: &Instance,
    limit: usize,
) -> Option<Vec<(Vec<BigInt>, Rational)>> {
    let mut count: usize = 1;
    for d in inst.rewards() {
        count = count.checked_mul(d.support().len())?;
        if count > limit {
            return None;
        }
    }
    let mut out = vec![(Vec::with_capacity(inst.n()), Rational::from_integer(1.into()))];
    for d in inst.rewards() {
        let mut next = Vec::with_capacity(out.len() * d.support().len());
        for (vals, p) in &out {
            for (x, q) in d.support() {
                let mut vv = vals.clone();
                vv.push(x.clone());
                next.push((vv, p * q));
            }
        }
        out = next;
    }
    Some(out)
}
