//! Strictly local string-to-string functions.
//!
//! A function is encoded as a list of local rewrite rules `c ∘ u → v`: the
//! target symbol `u` becomes `v` when the context `c` matches. Which context
//! is consulted depends on the function class:
//!
//! * ISL: the input symbols preceding the target,
//! * L-OSL: the output symbols already emitted to the left,
//! * R-OSL: the output symbols emitted to the right (the input is read
//!   right to left),
//! * IOSL: an input context and an output context at the same time.
//!
//! The crate covers rule application ([`transducer`]), constrained random
//! generation of minimal rule sets ([`generator`]), characteristic and
//! expanded samples ([`sampler`]), diagnostic tooling such as tails tables
//! and an exhaustive learner ([`analysis`]), and scoring of predicted rule
//! sets ([`evaluator`]).

pub mod alphabet;
pub mod analysis;
mod error;
pub mod evaluator;
pub mod generator;
pub mod rule;
pub mod sampler;
mod search;
pub mod seed;
pub mod strings;
pub mod transducer;

pub use alphabet::Alphabet;
pub use error::{Error, Result};
pub use rule::{Class, Rule, RuleSet};
pub use sampler::{Dataset, SampleKind, SamplePair};
