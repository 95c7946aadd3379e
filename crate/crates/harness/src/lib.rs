//! Benchmark harness: datapoint assembly, prompting, model clients, run
//! records and leaderboard scoring.

pub mod benchmark;
pub mod client;
pub mod config;
pub mod leaderboard;
pub mod prompt;
pub mod record;
pub mod runner;
pub mod store;

pub use benchmark::{build_benchmark, BenchmarkSpec, Datapoint, SpecName};
pub use leaderboard::{score_leaderboard, Grid, Leaderboard, WeightMode};
pub use record::RunRecord;
