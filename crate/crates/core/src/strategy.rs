//! The five interchangeable evaluation strategies.

use std::fmt;
use std::str::FromStr;

/// Which algorithm runs when an expression is assigned. All five produce
/// identical values and derivatives up to floating-point reassociation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalStrategy {
    /// Dual-number arithmetic without expression trees.
    Eager,
    /// Lazy tree, recursive per-component traversal.
    Standard,
    /// Lazy tree with a deferred cache pass.
    Cached,
    /// Lazy tree, expression-level reverse mode.
    Elr,
    /// Expression-level reverse mode over cached values.
    CachedElr,
}

pub const ALL_STRATEGIES: [EvalStrategy; 5] = [
    EvalStrategy::Eager,
    EvalStrategy::Standard,
    EvalStrategy::Cached,
    EvalStrategy::Elr,
    EvalStrategy::CachedElr,
];

impl EvalStrategy {
    /// Short token used by the CLI and in CSV output.
    pub fn token(self) -> &'static str {
        match self {
            EvalStrategy::Eager => "eager",
            EvalStrategy::Standard => "et",
            EvalStrategy::Cached => "cet",
            EvalStrategy::Elr => "elr",
            EvalStrategy::CachedElr => "celr",
        }
    }

    /// Whether this strategy evaluates through a lazy expression tree.
    pub fn is_lazy(self) -> bool {
        !matches!(self, EvalStrategy::Eager)
    }
}

impl fmt::Display for EvalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for EvalStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(EvalStrategy::Eager),
            "et" => Ok(EvalStrategy::Standard),
            "cet" => Ok(EvalStrategy::Cached),
            "elr" => Ok(EvalStrategy::Elr),
            "celr" => Ok(EvalStrategy::CachedElr),
            other => Err(format!(
                "unknown strategy '{other}' (expected eager, et, cet, elr, or celr)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for s in ALL_STRATEGIES {
            assert_eq!(s.token().parse::<EvalStrategy>(), Ok(s));
        }
        assert!("fast".parse::<EvalStrategy>().is_err());
    }
}
