//! The two benchmark test functions, evaluable under every strategy.
//!
//! `y = x_1 * x_2 * ... * x_M` exercises wide, shallow trees; the M-fold
//! nested sine `y = sin(sin(...sin(x)))` exercises deep, narrow ones with a
//! transcendental at every level. Together they bracket the expression
//! shapes real code produces.
//!
//! The lazy strategies need the tree shape in the types, so each size up to
//! [`MAX_STATIC_M`] is stamped out explicitly; the eager and plain-`f64`
//! paths take any size. Plain-`f64` variants are the undifferentiated
//! baselines for scaled timing and deliberately bypass the call counter.

use crate::cache::assign_cached;
use crate::dual::DualVector;
use crate::elr::{assign_cached_elr, assign_elr, ElrExpr};
use crate::error::AdError;
use crate::expr::{assign_standard, ex, Ex};
use crate::strategy::EvalStrategy;

/// Largest expression size with a statically stamped tree.
pub const MAX_STATIC_M: usize = 20;

/// Routes a built expression to one of the four lazy assignment strategies.
pub fn assign_lazy<E: ElrExpr>(
    strategy: EvalStrategy,
    target: &mut DualVector,
    expr: &Ex<E>,
) -> Result<(), AdError> {
    match strategy {
        EvalStrategy::Standard => assign_standard(target, expr),
        EvalStrategy::Cached => assign_cached(target, expr),
        EvalStrategy::Elr => assign_elr(target, expr),
        EvalStrategy::CachedElr => assign_cached_elr(target, expr),
        EvalStrategy::Eager => unreachable!("the eager strategy does not build trees"),
    }
}

/// Independent variables for the product workload: factor `i` is seeded as
/// independent `i mod n`.
pub fn product_inputs(values: &[f64], n: usize) -> Vec<DualVector> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| DualVector::independent(v, i % n, n).expect("i mod n < n"))
        .collect()
}

/// Eager product of any number of factors.
pub fn product_eager(xs: &[DualVector]) -> DualVector {
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        acc = &acc * x;
    }
    acc
}

/// Undifferentiated product baseline.
pub fn product_value(values: &[f64]) -> f64 {
    values.iter().product()
}

/// Eager nested sine of any depth.
pub fn nested_eager(x: &DualVector, m: usize) -> DualVector {
    let mut acc = x.sin();
    for _ in 1..m {
        acc = acc.sin();
    }
    acc
}

/// Undifferentiated nested-sine baseline.
pub fn nested_value(x: f64, m: usize) -> f64 {
    let mut s = x;
    for _ in 0..m {
        s = s.sin();
    }
    s
}

macro_rules! product_match {
    ($m:ident, $xs:ident, $strategy:ident, $target:ident;
     $(($mm:literal => $i0:literal $(, $i:literal)*)),+ $(,)?) => {
        match $m {
            $($mm => assign_lazy($strategy, $target, &(ex(&$xs[$i0]) $(* ex(&$xs[$i]))*)),)+
            _ => Err(AdError::UnsupportedSize { m: $m, max: MAX_STATIC_M }),
        }
    };
}

macro_rules! nested_match {
    ($m:ident, $x:ident, $strategy:ident, $target:ident;
     $(($mm:literal => $($s:ident)+)),+ $(,)?) => {
        match $m {
            $($mm => assign_lazy($strategy, $target, &(ex($x)$(.$s())+)),)+
            _ => Err(AdError::UnsupportedSize { m: $m, max: MAX_STATIC_M }),
        }
    };
}

/// Differentiates `x_1 * ... * x_M` into `target` under any strategy.
/// The lazy strategies support `xs.len() <= MAX_STATIC_M`.
pub fn product_assign(
    strategy: EvalStrategy,
    xs: &[DualVector],
    target: &mut DualVector,
) -> Result<(), AdError> {
    assert!(!xs.is_empty());
    if strategy == EvalStrategy::Eager {
        *target = product_eager(xs);
        return Ok(());
    }
    let m = xs.len();
    product_match!(m, xs, strategy, target;
        (1 => 0),
        (2 => 0, 1),
        (3 => 0, 1, 2),
        (4 => 0, 1, 2, 3),
        (5 => 0, 1, 2, 3, 4),
        (6 => 0, 1, 2, 3, 4, 5),
        (7 => 0, 1, 2, 3, 4, 5, 6),
        (8 => 0, 1, 2, 3, 4, 5, 6, 7),
        (9 => 0, 1, 2, 3, 4, 5, 6, 7, 8),
        (10 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9),
        (11 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10),
        (12 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11),
        (13 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12),
        (14 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13),
        (15 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14),
        (16 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15),
        (17 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16),
        (18 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17),
        (19 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18),
        (20 => 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19),
    )
}

/// Differentiates the M-fold nested sine of `x` into `target` under any
/// strategy. The lazy strategies support `m <= MAX_STATIC_M`.
pub fn nested_assign(
    strategy: EvalStrategy,
    x: &DualVector,
    m: usize,
    target: &mut DualVector,
) -> Result<(), AdError> {
    assert!(m >= 1);
    if strategy == EvalStrategy::Eager {
        *target = nested_eager(x, m);
        return Ok(());
    }
    nested_match!(m, x, strategy, target;
        (1 => sin),
        (2 => sin sin),
        (3 => sin sin sin),
        (4 => sin sin sin sin),
        (5 => sin sin sin sin sin),
        (6 => sin sin sin sin sin sin),
        (7 => sin sin sin sin sin sin sin),
        (8 => sin sin sin sin sin sin sin sin),
        (9 => sin sin sin sin sin sin sin sin sin),
        (10 => sin sin sin sin sin sin sin sin sin sin),
        (11 => sin sin sin sin sin sin sin sin sin sin sin),
        (12 => sin sin sin sin sin sin sin sin sin sin sin sin),
        (13 => sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (14 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (15 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (16 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (17 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (18 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (19 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
        (20 => sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin sin),
    )
}
