//! Text form of instances.
//!
//! ```json
//! { "kind": "metric", "n": 3, "k": "4", "depot": 0, "tour_mode": "open",
//!   "distances": [["0","1","1"],["1","0","2"],["1","2","0"]],
//!   "rewards": [ {"values": ["0"], "probs": ["1"]}, ... ] }
//! ```
//! Knapsack instances carry `"costs": [int]` instead of `"distances"`.
//! Every number that is part of the model is a string, parsed exactly.

use serde::{Deserialize, Serialize};

use super::distribution::RewardDistribution;
use super::instance::{Geometry, Instance, TourMode};
use super::metric::Metric;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_bigint, parse_rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub kind: String,
    pub n: usize,
    pub k: String,
    pub depot: usize,
    #[serde(default = "default_mode")]
    pub tour_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<u64>>,
    pub rewards: Vec<RewardFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardFile {
    pub values: Vec<String>,
    pub probs: Vec<String>,
}

fn default_mode() -> String {
    "open".into()
}

pub fn parse_tour_mode(s: &str) -> Result<TourMode> {
    match s {
        "open" => Ok(TourMode::Open),
        "closed" => Ok(TourMode::Closed),
        other => Err(Error::Schema(format!("tour_mode must be \"open\" or \"closed\", got {other:?}"))),
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let (kind, distances, costs) = match inst.geometry() {
            Geometry::Metric(m) => (
                "metric",
                Some(
                    m.rows()
                        .iter()
                        .map(|r| r.iter().map(format_rational).collect())
                        .collect(),
                ),
                None,
            ),
            Geometry::Knapsack { costs } => ("knapsack", None, Some(costs.clone())),
        };
        let rewards = inst
            .rewards()
            .iter()
            .map(|d| RewardFile {
                values: d.support().iter().map(|(x, _)| x.to_string()).collect(),
                probs: d.support().iter().map(|(_, p)| format_rational(p)).collect(),
            })
            .collect();
        Self {
            kind: kind.into(),
            n: inst.n(),
            k: inst.k().to_string(),
            depot: inst.depot(),
            tour_mode: inst.tour_mode().as_str().into(),
            distances,
            costs,
            rewards,
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let k = parse_bigint(&self.k)?;
        let tour_mode = parse_tour_mode(&self.tour_mode)?;
        if self.rewards.len() != self.n {
            return Err(Error::Schema(format!(
                "n = {} but {} reward entries",
                self.n,
                self.rewards.len()
            )));
        }
        let geometry = match self.kind.as_str() {
            "metric" => {
                let rows = self
                    .distances
                    .as_ref()
                    .ok_or_else(|| Error::Schema("metric instance requires \"distances\"".into()))?;
                if self.costs.is_some() {
                    return Err(Error::Schema("metric instance must not carry \"costs\"".into()));
                }
                if rows.len() != self.n {
                    return Err(Error::Schema(format!("distances has {} rows, n = {}", rows.len(), self.n)));
                }
                let dist = rows
                    .iter()
                    .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Geometry::Metric(Metric::new(dist)?)
            }
            "knapsack" => {
                let costs = self
                    .costs
                    .clone()
                    .ok_or_else(|| Error::Schema("knapsack instance requires \"costs\"".into()))?;
                if self.distances.is_some() {
                    return Err(Error::Schema("knapsack instance must not carry \"distances\"".into()));
                }
                if costs.len() != self.n {
                    return Err(Error::Schema(format!("costs has {} entries, n = {}", costs.len(), self.n)));
                }
                Geometry::Knapsack { costs }
            }
            other => return Err(Error::Schema(format!("unknown kind {other:?}"))),
        };
        let rewards = self
            .rewards
            .iter()
            .enumerate()
            .map(|(v, r)| {
                if r.values.len() != r.probs.len() {
                    return Err(Error::Schema(format!(
                        "rewards[{v}]: {} values but {} probs",
                        r.values.len(),
                        r.probs.len()
                    )));
                }
                let support = r
                    .values
                    .iter()
                    .zip(&r.probs)
                    .map(|(x, p)| Ok((parse_bigint(x)?, parse_rational(p)?)))
                    .collect::<Result<Vec<_>>>()?;
                RewardDistribution::new(support, v)
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(geometry, self.depot, rewards, k, tour_mode)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    file.to_instance()
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst))
        .expect("instance file serializes");
    s.push('\n');
    s
}
