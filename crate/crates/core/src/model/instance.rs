use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::distribution::RewardDistribution;
use super::metric::Metric;
use crate::error::{Error, Result};
use crate::scalar::{common_denominator, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TourMode {
    /// Only forward edges of a walk from the depot are charged.
    #[default]
    Open,
    /// A final return edge to the depot is charged as well.
    Closed,
}

impl TourMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TourMode::Open => "open",
            TourMode::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Geometry {
    Metric(Metric),
    /// Weighted-star special case: visiting item `v` costs `costs[v]`.
    Knapsack { costs: Vec<u64> },
}

/// Largest scaled distance accepted, so that sums over long runs stay in range.
const MAX_SCALED: u64 = 1 << 44;

/// Integer view of all step costs over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScaledCosts {
    pub denom: BigInt,
    n: usize,
    step: Vec<u64>,
    ret: Vec<u64>,
}

impl ScaledCosts {
    #[inline]
    pub fn step(&self, u: usize, v: usize) -> u64 {
        self.step[u * self.n + v]
    }

    /// Return-leg cost to the depot (zero in open mode and for knapsack instances).
    #[inline]
    pub fn ret(&self, v: usize) -> u64 {
        self.ret[v]
    }

    pub fn to_rational(&self, scaled: u128) -> Rational {
        Rational::new(BigInt::from(scaled), self.denom.clone())
    }

    /// Largest `x` with `x / denom ≤ budget`.
    pub fn floor_budget(&self, budget: &Rational) -> u128 {
        if budget.is_negative() {
            return 0;
        }
        let s = (budget * Rational::from_integer(self.denom.clone())).floor();
        s.to_integer().to_u128().unwrap_or(u128::MAX)
    }
}

/// A stochastic k-TSP instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    geometry: Geometry,
    depot: usize,
    rewards: Vec<RewardDistribution>,
    k: BigInt,
    tour_mode: TourMode,
    scaled: ScaledCosts,
}

impl Instance {
    pub fn new(
        geometry: Geometry,
        depot: usize,
        rewards: Vec<RewardDistribution>,
        k: BigInt,
        tour_mode: TourMode,
    ) -> Result<Self> {
        let n = rewards.len();
        let gn = match &geometry {
            Geometry::Metric(m) => m.n(),
            Geometry::Knapsack { costs } => costs.len(),
        };
        if gn != n {
            return Err(Error::Schema(format!(
                "geometry has {gn} vertices but {n} reward distributions were given"
            )));
        }
        if depot >= n {
            return Err(Error::Schema(format!("depot {depot} out of range for n = {n}")));
        }
        if k.is_negative() {
            return Err(Error::Schema(format!("negative target k = {k}")));
        }
        if rewards[depot] != RewardDistribution::point_mass(0) {
            return Err(Error::InvalidDistribution {
                vertex: depot,
                reason: "depot reward must be a point mass at 0".into(),
            });
        }
        for (v, d) in rewards.iter().enumerate() {
            if d.max_value() > &k {
                return Err(Error::InvalidDistribution {
                    vertex: v,
                    reason: format!("value {} exceeds k = {k}", d.max_value()),
                });
            }
        }
        if let Geometry::Knapsack { costs } = &geometry {
            if costs[depot] != 0 {
                return Err(Error::Schema("depot cost must be 0".into()));
            }
        }
        let scaled = scale_costs(&geometry, depot, tour_mode)?;
        Ok(Self {
            geometry,
            depot,
            rewards,
            k,
            tour_mode,
            scaled,
        })
    }

    pub fn n(&self) -> usize {
        self.rewards.len()
    }

    pub fn depot(&self) -> usize {
        self.depot
    }

    pub fn k(&self) -> &BigInt {
        &self.k
    }

    pub fn tour_mode(&self) -> TourMode {
        self.tour_mode
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn is_knapsack(&self) -> bool {
        matches!(self.geometry, Geometry::Knapsack { .. })
    }

    pub fn rewards(&self) -> &[RewardDistribution] {
        &self.rewards
    }

    pub fn reward(&self, v: usize) -> &RewardDistribution {
        &self.rewards[v]
    }

    pub fn scaled(&self) -> &ScaledCosts {
        &self.scaled
    }

    pub fn with_tour_mode(&self, mode: TourMode) -> Result<Self> {
        Self::new(
            self.geometry.clone(),
            self.depot,
            self.rewards.clone(),
            self.k.clone(),
            mode,
        )
    }

    /// Cost of moving from `u` to `v`.
    pub fn step_cost(&self, u: usize, v: usize) -> Rational {
        match &self.geometry {
            Geometry::Metric(m) => m.d(u, v).clone(),
            Geometry::Knapsack { costs } => {
                if u == v {
                    Rational::zero()
                } else {
                    Rational::from_integer(costs[v].into())
                }
            }
        }
    }

    /// Cost of the final return leg from `v` under this instance's tour mode.
    pub fn return_cost(&self, v: usize) -> Rational {
        self.scaled.to_rational(self.scaled.ret(v) as u128)
    }

    /// Forward length of `walk` (consecutive steps, no return leg).
    pub fn walk_length(&self, walk: &[usize]) -> Rational {
        self.scaled.to_rational(self.walk_length_scaled(walk))
    }

    pub fn walk_length_scaled(&self, walk: &[usize]) -> u128 {
        walk.windows(2)
            .map(|w| self.scaled.step(w[0], w[1]) as u128)
            .sum()
    }

    /// Budget-accounted cost of a walk from the depot: forward edges plus the
    /// return edge in closed mode.
    pub fn walk_cost(&self, walk: &[usize]) -> Rational {
        let mut s = self.walk_length_scaled(walk);
        if let Some(&last) = walk.last() {
            s += self.scaled.ret(last) as u128;
        }
        self.scaled.to_rational(s)
    }

    /// Unit of the phase budget schedule: the smallest positive step cost
    /// (one after normalization).
    pub fn cost_unit(&self) -> Rational {
        let n = self.n();
        let mut best: Option<u64> = None;
        for u in 0..n {
            for v in 0..n {
                let c = self.scaled.step(u, v);
                if c > 0 && best.is_none_or(|b| c < b) {
                    best = Some(c);
                }
            }
        }
        match best {
            Some(b) => self.scaled.to_rational(b as u128),
            None => Rational::from_integer(1.into()),
        }
    }

    /// Vertices other than the depot whose reward can be positive.
    pub fn gainable(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&v| v != self.depot && self.rewards[v].can_gain())
            .collect()
    }

    /// Cost of some walk visiting every gainable vertex (a crude upper bound
    /// used to size phase schedules): visit them in index order.
    pub fn cover_cost_bound(&self) -> Rational {
        let mut walk = vec![self.depot];
        walk.extend(self.gainable());
        self.walk_cost(&walk)
    }
}

fn scale_costs(geometry: &Geometry, depot: usize, mode: TourMode) -> Result<ScaledCosts> {
    match geometry {
        Geometry::Knapsack { costs } => {
            let n = costs.len();
            let mut step = vec![0u64; n * n];
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        if costs[v] > MAX_SCALED {
                            return Err(Error::Overflow(format!("item cost {} too large", costs[v])));
                        }
                        step[u * n + v] = costs[v];
                    }
                }
            }
            Ok(ScaledCosts {
                denom: BigInt::from(1),
                n,
                step,
                ret: vec![0; n],
            })
        }
        Geometry::Metric(m) => {
            let n = m.n();
            let denom = common_denominator(m.rows().iter().flatten());
            let scale = Rational::from_integer(denom.clone());
            let mut step = vec![0u64; n * n];
            for u in 0..n {
                for v in 0..n {
                    let s = (m.d(u, v) * &scale).to_integer();
                    let s = s
                        .to_u64()
                        .filter(|&s| s <= MAX_SCALED)
                        .ok_or_else(|| Error::Overflow("metric entries too large after scaling".into()))?;
                    step[u * n + v] = s;
                }
            }
            let ret = (0..n)
                .map(|v| match mode {
                    TourMode::Open => 0,
                    TourMode::Closed => step[v * n + depot],
                })
                .collect();
            Ok(ScaledCosts { denom, n, step, ret })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn star2(mode: TourMode) -> Instance {
        let leg = [int(0), int(1), int(1)];
        let m = Metric::star(&leg, &[0, 1, 2]).unwrap();
        let r = RewardDistribution::bernoulli(4, rat(1, 2)).unwrap();
        Instance::new(
            Geometry::Metric(m),
            0,
            vec![RewardDistribution::point_mass(0), r.clone(), r],
            BigInt::from(4),
            mode,
        )
        .unwrap()
    }

    #[test]
    fn walk_costs_by_mode() {
        let open = star2(TourMode::Open);
        assert_eq!(open.walk_length(&[0, 1, 2]), int(3));
        assert_eq!(open.walk_cost(&[0, 1, 2]), int(3));
        let closed = star2(TourMode::Closed);
        assert_eq!(closed.walk_cost(&[0, 1, 2]), int(4));
        assert_eq!(closed.walk_cost(&[0]), int(0));
        assert_eq!(closed.cost_unit(), int(1));
    }

    #[test]
    fn knapsack_costs_ignore_mode() {
        let inst = Instance::new(
            Geometry::Knapsack { costs: vec![0, 2, 3] },
            0,
            vec![
                RewardDistribution::point_mass(0),
                RewardDistribution::point_mass(1),
                RewardDistribution::point_mass(1),
            ],
            BigInt::from(2),
            TourMode::Closed,
        )
        .unwrap();
        assert_eq!(inst.walk_cost(&[0, 1, 2]), int(5));
        assert_eq!(inst.cost_unit(), int(2));
    }

    #[test]
    fn validates_depot_and_support() {
        let m = Metric::star(&[int(0), int(1)], &[0, 1]).unwrap();
        let bad_depot = Instance::new(
            Geometry::Metric(m.clone()),
            0,
            vec![RewardDistribution::point_mass(1), RewardDistribution::point_mass(1)],
            BigInt::from(2),
            TourMode::Open,
        );
        assert!(bad_depot.is_err());
        let too_big = Instance::new(
            Geometry::Metric(m),
            0,
            vec![RewardDistribution::point_mass(0), RewardDistribution::point_mass(9)],
            BigInt::from(2),
            TourMode::Open,
        );
        assert!(too_big.is_err());
    }

    #[test]
    fn fractional_metric_scales_exactly() {
        let m = Metric::new(vec![vec![int(0), rat(1, 3)], vec![rat(1, 3), int(0)]]).unwrap();
        let inst = Instance::new(
            Geometry::Metric(m),
            0,
            vec![RewardDistribution::point_mass(0), RewardDistribution::point_mass(1)],
            BigInt::from(1),
            TourMode::Closed,
        )
        .unwrap();
        assert_eq!(inst.walk_cost(&[0, 1]), rat(2, 3));
        assert_eq!(inst.scaled().floor_budget(&rat(1, 2)), 1);
    }
}
