use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty input set")]
    EmptyInput,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("foreign symbol {symbol:?} in {context:?}")]
    ForeignSymbol { symbol: char, context: String },
    #[error("nondeterministic rule set: {candidates} rules match at position {position}")]
    Nondeterministic { position: usize, candidates: usize },
    #[error("invalid rule set: {0}")]
    InvalidRuleSet(String),
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
    #[error("setting infeasible after {attempts} attempts: {reason}")]
    SettingInfeasible { attempts: usize, reason: String },
    #[error("input space exhausted: need {needed} fresh inputs, only {available} available")]
    InputSpaceExhausted { needed: usize, available: usize },
    #[error("bound too small: {bound} < {minimum}")]
    BoundTooSmall { bound: usize, minimum: usize },
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),
    #[error("unsupported class {0} for this operation")]
    UnsupportedClass(crate::Class),
    #[error("no rule block found")]
    NoRuleBlock,
    #[error("ground-truth rule set is empty")]
    EmptyGroundTruth,
    #[error("not applicable: {0}")]
    NotApplicable(String),
}
