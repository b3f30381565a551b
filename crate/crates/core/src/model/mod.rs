//! Instances, reward distributions and exact arithmetic over them.

mod distribution;
mod instance;
mod io;
mod metric;
mod state;

pub use distribution::{
    capped_convolve, capped_prefix_distribution, expectation, prob_below, CappedPmf,
    RewardDistribution,
};
pub use instance::{Geometry, Instance, ScaledCosts, TourMode};
pub use io::{parse_instance, parse_tour_mode, serialize_instance, InstanceFile, RewardFile};
pub use metric::{normalize_metric, Metric};
pub use state::PolicyState;
