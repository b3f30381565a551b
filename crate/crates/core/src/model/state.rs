use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Observations so far: visited set, observed rewards and their total.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolicyState {
    visited: Vec<bool>,
    observed: Vec<Option<BigInt>>,
    collected: BigInt,
}

impl PolicyState {
    /// Fresh state with only the depot visited (its reward is zero).
    pub fn new(n: usize, depot: usize) -> Self {
        let mut visited = vec![false; n];
        visited[depot] = true;
        let mut observed = vec![None; n];
        observed[depot] = Some(BigInt::zero());
        Self {
            visited,
            observed,
            collected: BigInt::zero(),
        }
    }

    pub fn is_visited(&self, v: usize) -> bool {
        self.visited[v]
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }

    pub fn observed(&self, v: usize) -> Option<&BigInt> {
        self.observed[v].as_ref()
    }

    pub fn collected(&self) -> &BigInt {
        &self.collected
    }

    /// `k − k(σ)`, clamped at zero.
    pub fn residual(&self, k: &BigInt) -> BigInt {
        let r = k - &self.collected;
        if r.is_negative() {
            BigInt::zero()
        } else {
            r
        }
    }

    pub fn target_met(&self, k: &BigInt) -> bool {
        &self.collected >= k
    }

    /// Records the reward of a newly visited vertex. Revisits are ignored.
    pub fn observe(&mut self, v: usize, reward: BigInt) -> bool {
        if self.visited[v] {
            return false;
        }
        self.visited[v] = true;
        self.collected += &reward;
        self.observed[v] = Some(reward);
        true
    }

    /// Bitset key of the visited set, for memoization.
    pub fn visited_key(&self) -> Vec<u64> {
        let mut key = vec![0u64; self.visited.len().div_ceil(64)];
        for (v, &b) in self.visited.iter().enumerate() {
            if b {
                key[v / 64] |= 1 << (v % 64);
            }
        }
        key
    }
}
