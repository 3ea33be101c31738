use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("seed index {index} out of range for {n} derivative components")]
    SeedIndex { index: usize, n: usize },

    #[error("derivative size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("domain error in {op}: {reason}")]
    Domain {
        op: &'static str,
        reason: &'static str,
    },

    #[error("inline derivative storage holds at most {cap} components, requested {n}")]
    InlineCapacity { n: usize, cap: usize },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("statically shaped workloads support sizes 1..={max}, got {m}")]
    UnsupportedSize { m: usize, max: usize },
}
