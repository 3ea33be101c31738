//! Vector forward-mode automatic differentiation with five interchangeable
//! evaluation strategies.
//!
//! The eager [`DualVector`] scalar propagates all derivative components
//! through every operation immediately. The lazy strategies instead build an
//! expression tree per assignment statement and differentiate it whole:
//!
//! * **standard** ([`expr::assign_standard`]) — recursive value/derivative
//!   traversal, recomputing intermediate values per derivative component;
//! * **cached** ([`cache::assign_cached`]) — a single cache pass stores each
//!   node's operand values and transcendental partials first, so no
//!   intermediate value is computed more than once;
//! * **expression-level reverse mode** ([`elr::assign_elr`]) — a reverse
//!   sweep computes the partials of the expression result with respect to its
//!   leaf arguments, which are then combined with the leaf tangents in one
//!   forward accumulation;
//! * **cached reverse mode** ([`elr::assign_cached_elr`]) — the reverse sweep
//!   reading cached values.
//!
//! All strategies share the operation catalog in [`ops`], produce identical
//! results up to floating-point reassociation, and route transcendental math
//! through [`count::MathCounter`] so redundant computation can be measured.
//!
//! ```
//! use fad::{assign_cached_elr, ex, DualVector};
//!
//! let x = DualVector::independent(1.2, 0, 2).unwrap();
//! let y = DualVector::independent(0.7, 1, 2).unwrap();
//!
//! // Build lazily, differentiate the whole statement on assignment.
//! let mut z = DualVector::constant(0.0);
//! assign_cached_elr(&mut z, &((ex(&x) * ex(&y)).sin() + ex(&x) / 2.0)).unwrap();
//!
//! let want = (1.2f64 * 0.7).cos() * 0.7 + 0.5; // d/dx
//! assert!((z.dx(0) - want).abs() < 1e-12);
//! ```

pub mod cache;
pub mod count;
pub mod dual;
pub mod dyntree;
pub mod elr;
pub mod error;
pub mod expr;
pub mod ops;
pub mod oracle;
pub mod strategy;
pub mod workloads;

pub use cache::{assign_cached, cache_pass, CachedExpr};
pub use count::MathCounter;
pub use dual::{dual_apply, dual_apply_strict, DualVector, StorageMode, INLINE_CAP};
pub use elr::{assign_cached_elr, assign_elr, compute_partials, get_arg, ElrExpr};
pub use error::AdError;
pub use expr::{assign_standard, ex, lit, Ex, Expr};
pub use ops::OpKind;
pub use strategy::{EvalStrategy, ALL_STRATEGIES};
pub use workloads::assign_lazy;
