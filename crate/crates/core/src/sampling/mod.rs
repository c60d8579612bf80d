//! Bernoulli sample sets, the sampling operators `R_Omega` and `P_Omega`,
//! golfing partitions and the fixed-size draws used by the adaptive schemes.

mod draws;
mod golfing;
mod io;
pub mod rng;
mod set;
mod table;

pub use draws::{sample_full_rows, uniform_without_replacement, weighted_without_replacement, RowSample};
pub use golfing::{
    default_rounds, golfing_partition, partition_from_round_probabilities, per_round_probability,
    union_probability, GolfingPartition,
};
pub use io::{read_sample_csv, write_sample_csv};
pub use set::{apply_p_omega, apply_r_omega, draw_bernoulli, observed_matrix, Observation, SampleSet};
pub(crate) use set::r_omega_raw;
pub use table::ProbabilityTable;
