use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Exact pmf of a capped sum, keyed by value.
pub type CappedPmf = BTreeMap<BigInt, Rational>;

/// Finite reward distribution on non-negative integers with exact probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewardDistribution {
    // sorted by value, probabilities strictly positive
    support: Vec<(BigInt, Rational)>,
}

impl RewardDistribution {
    /// Validates and normalizes the ordering. `vertex` is only used in errors.
    pub fn new(mut support: Vec<(BigInt, Rational)>, vertex: usize) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution {
                vertex,
                reason: "empty support".into(),
            });
        }
        support.sort_by(|a, b| a.0.cmp(&b.0));
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidDistribution {
                    vertex,
                    reason: format!("duplicate value {}", w[0].0),
                });
            }
        }
        let mut total = Rational::zero();
        for (x, p) in &support {
            if x.is_negative() {
                return Err(Error::InvalidDistribution {
                    vertex,
                    reason: format!("negative value {x}"),
                });
            }
            if !p.is_positive() {
                return Err(Error::InvalidDistribution {
                    vertex,
                    reason: format!("non-positive probability {p} for value {x}"),
                });
            }
            total += p;
        }
        if !total.is_one() {
            return Err(Error::PmfMass {
                vertex,
                sum: total.to_string(),
            });
        }
        Ok(Self { support })
    }

    pub fn point_mass(value: impl Into<BigInt>) -> Self {
        Self {
            support: vec![(value.into(), Rational::one())],
        }
    }

    /// `value` with probability `p`, zero otherwise.
    pub fn bernoulli(value: impl Into<BigInt>, p: Rational) -> Result<Self> {
        let value = value.into();
        if p.is_one() || value.is_zero() {
            return Ok(Self::point_mass(value));
        }
        Self::new(
            vec![(BigInt::zero(), Rational::one() - &p), (value, p)],
            usize::MAX,
        )
    }

    pub fn support(&self) -> &[(BigInt, Rational)] {
        &self.support
    }

    pub fn max_value(&self) -> &BigInt {
        &self.support[self.support.len() - 1].0
    }

    pub fn min_value(&self) -> &BigInt {
        &self.support[0].0
    }

    pub fn is_point_mass(&self) -> bool {
        self.support.len() == 1
    }

    /// True if the reward is positive with positive probability.
    pub fn can_gain(&self) -> bool {
        self.max_value().is_positive()
    }

    pub fn mean(&self) -> Rational {
        self.support
            .iter()
            .map(|(x, p)| Rational::from_integer(x.clone()) * p)
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `E[min(R, cap)]` for an integer cap.
    pub fn truncated_expectation(&self, cap: &BigInt) -> Rational {
        if !cap.is_positive() {
            return Rational::zero();
        }
        let mut acc = Rational::zero();
        for (x, p) in &self.support {
            let v = if x < cap { x } else { cap };
            if !v.is_zero() {
                acc += Rational::from_integer(v.clone()) * p;
            }
        }
        acc
    }

    /// `E[min(R, cap)]` for a rational cap, as used by the cap ladder `k/2^j`.
    pub fn truncated_expectation_at(&self, cap: &Rational) -> Rational {
        if !cap.is_positive() {
            return Rational::zero();
        }
        let mut acc = Rational::zero();
        for (x, p) in &self.support {
            let xr = Rational::from_integer(x.clone());
            let v = if &xr < cap { xr } else { cap.clone() };
            acc += v * p;
        }
        acc
    }

    /// Probability of a given value (zero if outside the support).
    pub fn prob(&self, value: &BigInt) -> Rational {
        self.support
            .iter()
            .find(|(x, _)| x == value)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Sum of independent rewards; used to merge co-located items.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out: BTreeMap<BigInt, Rational> = BTreeMap::new();
        for (x, p) in &self.support {
            for (y, q) in &other.support {
                *out.entry(x + y).or_insert_with(Rational::zero) += p * q;
            }
        }
        Self {
            support: out.into_iter().collect(),
        }
    }
}

/// One step of capped convolution: distribution of `min(S + X, cap)` given the
/// distribution of `S` (already capped) and the pmf of an independent `X`.
pub fn capped_convolve<K, P>(acc: &BTreeMap<K, P>, next: &[(K, P)], cap: &K) -> BTreeMap<K, P>
where
    K: Ord + Clone + Add<Output = K>,
    P: Clone + Zero + Add<Output = P> + Mul<Output = P>,
{
    let mut out: BTreeMap<K, P> = BTreeMap::new();
    for (s, p) in acc {
        if s >= cap {
            let e = out.entry(cap.clone()).or_insert_with(P::zero);
            *e = e.clone() + p.clone();
            continue;
        }
        for (x, q) in next {
            let mut v = s.clone() + x.clone();
            if &v > cap {
                v = cap.clone();
            }
            let e = out.entry(v).or_insert_with(P::zero);
            *e = e.clone() + p.clone() * q.clone();
        }
    }
    out
}

/// Exact pmfs of `min(R_1 + ... + R_j, cap)` for every prefix length
/// `j = 0..=ds.len()`; entry 0 is the point mass at zero.
pub fn capped_prefix_distribution<'a>(
    ds: impl IntoIterator<Item = &'a RewardDistribution>,
    cap: &BigInt,
) -> Vec<CappedPmf> {
    let cap = if cap.is_negative() {
        BigInt::zero()
    } else {
        cap.clone()
    };
    let mut cur: CappedPmf = BTreeMap::new();
    cur.insert(BigInt::zero(), Rational::one());
    let mut out = vec![cur.clone()];
    for d in ds {
        cur = capped_convolve(&cur, &d.support, &cap);
        out.push(cur.clone());
    }
    out
}

/// `Pr[S < threshold]` for a capped pmf.
pub fn prob_below(pmf: &CappedPmf, threshold: &BigInt) -> Rational {
    pmf.range(..threshold.clone())
        .map(|(_, p)| p.clone())
        .fold(Rational::zero(), |a, b| a + b)
}

pub fn expectation(pmf: &CappedPmf) -> Rational {
    pmf.iter()
        .map(|(x, p)| Rational::from_integer(x.clone()) * p)
        .fold(Rational::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn pmf(pairs: &[(i64, i64, i64)]) -> RewardDistribution {
        RewardDistribution::new(
            pairs
                .iter()
                .map(|&(v, n, d)| (BigInt::from(v), rat(n, d)))
                .collect(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn truncated_expectation_examples() {
        let d = pmf(&[(0, 1, 2), (4, 1, 2)]);
        assert_eq!(d.truncated_expectation(&BigInt::from(2)), int(1));
        assert_eq!(d.truncated_expectation(&BigInt::from(0)), int(0));
        let five = RewardDistribution::point_mass(5);
        assert_eq!(five.truncated_expectation(&BigInt::from(7)), int(5));
    }

    #[test]
    fn rational_cap_matches_integer_cap() {
        let d = pmf(&[(0, 1, 3), (3, 1, 3), (8, 1, 3)]);
        for c in 0..10 {
            assert_eq!(
                d.truncated_expectation(&BigInt::from(c)),
                d.truncated_expectation_at(&int(c))
            );
        }
        // min(3, 5/2) = 5/2, min(8, 5/2) = 5/2
        assert_eq!(d.truncated_expectation_at(&rat(5, 2)), rat(5, 3));
    }

    #[test]
    fn rejects_bad_mass_and_duplicates() {
        let err = RewardDistribution::new(
            vec![(BigInt::from(0), rat(1, 2)), (BigInt::from(1), rat(2, 5))],
            3,
        )
        .unwrap_err();
        assert!(err.to_string().contains("pmf mass ≠ 1"));
        assert!(RewardDistribution::new(
            vec![(BigInt::from(1), rat(1, 2)), (BigInt::from(1), rat(1, 2))],
            0
        )
        .is_err());
        assert!(RewardDistribution::new(vec![(BigInt::from(1), rat(0, 1))], 0).is_err());
    }

    #[test]
    fn capped_prefix_examples() {
        let b = pmf(&[(0, 1, 2), (1, 1, 2)]);
        let pre = capped_prefix_distribution([&b, &b], &BigInt::from(1));
        assert_eq!(pre.len(), 3);
        assert_eq!(pre[2][&BigInt::from(0)], rat(1, 4));
        assert_eq!(pre[2][&BigInt::from(1)], rat(3, 4));

        let empty = capped_prefix_distribution(std::iter::empty(), &BigInt::from(5));
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0][&BigInt::from(0)], int(1));

        let three = RewardDistribution::point_mass(3);
        let five = RewardDistribution::point_mass(5);
        let pre = capped_prefix_distribution([&three, &five], &BigInt::from(6));
        assert_eq!(pre[1].get(&BigInt::from(3)), Some(&int(1)));
        assert_eq!(pre[2].get(&BigInt::from(6)), Some(&int(1)));
        assert_eq!(pre[2].len(), 1);
    }

    #[test]
    fn convolve_merges_independent_items() {
        let a = RewardDistribution::bernoulli(2, rat(1, 2)).unwrap();
        let s = a.convolve(&a);
        assert_eq!(s.prob(&BigInt::from(0)), rat(1, 4));
        assert_eq!(s.prob(&BigInt::from(2)), rat(1, 2));
        assert_eq!(s.prob(&BigInt::from(4)), rat(1, 4));
        assert_eq!(s.mean(), int(2));
    }
}
