//! Expression-level reverse mode.
//!
//! An expression usually has several inputs but exactly one output, so its
//! partials with respect to its leaf arguments are cheapest to obtain by one
//! reverse (adjoint) sweep from the root: [`ElrExpr::compute_partials`]
//! propagates the running adjoint down the tree, and each leaf writes it into
//! its slot of the partials buffer. The assignment then combines those
//! partials with the leaves' derivative arrays in a single forward
//! accumulation per component:
//!
//! ```text
//! dx[i] = Σ_k partials[k] * arg_k.dx(i)
//! ```
//!
//! Intermediate values may still be recomputed during the sweep, but the
//! sweep and the value query each run once per assignment, so the amount of
//! recomputation depends only on the expression size, never on the number of
//! derivative components. [`assign_cached_elr`] removes that residue too by
//! running the cache pass first and sweeping over cached values.
//!
//! Buffer layout: a binary node hands the first `num_args` slots of its
//! buffer to its first operand and the rest to its second, so slot `k`
//! always corresponds to the `k`-th active leaf in left-to-right order —
//! the same order [`ElrExpr::arg`] and [`ElrExpr::collect_args`] use.
//! Repeated leaves occupy one slot per occurrence (`a*a` has two arguments);
//! passive operands get no slot at all.

use smallvec::SmallVec;

use crate::cache::CachedExpr;
use crate::dual::DualVector;
use crate::error::AdError;
use crate::expr::{
    AddNode, BinValsNode, BinValsRule, ConstLeaf, Ex, Leaf, NegNode, PowNode, SubNode, UnaryFnNode,
    UnaryRule,
};
use crate::ops::OpKind;

/// Partials of an expression w.r.t. its leaf arguments, one slot per active
/// leaf occurrence in left-to-right order.
pub type PartialsBuf = SmallVec<[f64; 16]>;

/// Leaf handles in the same order as [`PartialsBuf`].
pub type ArgList<'a> = SmallVec<[&'a DualVector; 16]>;

/// [`CachedExpr`] plus the reverse sweep and leaf-argument access.
pub trait ElrExpr: CachedExpr {
    /// The `k`-th active leaf in left-to-right order.
    ///
    /// Panics if `k >= num_args()`.
    fn arg(&self, k: usize) -> &DualVector;

    /// Appends this subtree's active leaves in left-to-right order.
    fn collect_args<'s>(&'s self, out: &mut ArgList<'s>);

    /// Reverse sweep: fills `out[k]` with `seed * ∂self/∂(leaf k)`,
    /// re-deriving operand values as needed. `out` must have length
    /// `num_args()`.
    fn compute_partials(&self, seed: f64, out: &mut [f64]);

    /// Reverse sweep over cached values; requires a completed cache pass.
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]);
}

impl ElrExpr for Leaf<'_> {
    fn arg(&self, k: usize) -> &DualVector {
        assert!(
            k == 0 && !self.0.is_passive(),
            "argument index {k} out of range"
        );
        self.0
    }
    fn collect_args<'s>(&'s self, out: &mut ArgList<'s>) {
        if !self.0.is_passive() {
            out.push(self.0);
        }
    }
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        if !self.0.is_passive() {
            out[0] = seed;
        }
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        self.compute_partials(seed, out)
    }
}

impl ElrExpr for ConstLeaf {
    fn arg(&self, k: usize) -> &DualVector {
        panic!("argument index {k} out of range: constants take no slot")
    }
    fn collect_args<'s>(&'s self, _out: &mut ArgList<'s>) {}
    fn compute_partials(&self, _seed: f64, _out: &mut [f64]) {}
    fn compute_partials_cached(&self, _seed: f64, _out: &mut [f64]) {}
}

// The binary split: first operand owns the first `num_args1` slots, second
// operand the rest.
macro_rules! binary_arg_plumbing {
    () => {
        fn arg(&self, k: usize) -> &DualVector {
            let na1 = self.a.num_args();
            if k < na1 {
                self.a.arg(k)
            } else {
                self.b.arg(k - na1)
            }
        }
        fn collect_args<'s>(&'s self, out: &mut ArgList<'s>) {
            self.a.collect_args(out);
            self.b.collect_args(out);
        }
    };
}

impl<A: ElrExpr, B: ElrExpr> ElrExpr for AddNode<A, B> {
    binary_arg_plumbing!();
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        self.a.compute_partials(seed, &mut out[..na1]);
        self.b.compute_partials(seed, &mut out[na1..]);
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        self.a.compute_partials_cached(seed, &mut out[..na1]);
        self.b.compute_partials_cached(seed, &mut out[na1..]);
    }
}

impl<A: ElrExpr, B: ElrExpr> ElrExpr for SubNode<A, B> {
    binary_arg_plumbing!();
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        self.a.compute_partials(seed, &mut out[..na1]);
        self.b.compute_partials(-seed, &mut out[na1..]);
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        self.a.compute_partials_cached(seed, &mut out[..na1]);
        self.b.compute_partials_cached(-seed, &mut out[na1..]);
    }
}

impl<A: ElrExpr> ElrExpr for NegNode<A> {
    fn arg(&self, k: usize) -> &DualVector {
        self.a.arg(k)
    }
    fn collect_args<'s>(&'s self, out: &mut ArgList<'s>) {
        self.a.collect_args(out);
    }
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        self.a.compute_partials(-seed, out);
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        self.a.compute_partials_cached(-seed, out);
    }
}

impl<R: BinValsRule, A: ElrExpr, B: ElrExpr> ElrExpr for BinValsNode<R, A, B> {
    binary_arg_plumbing!();
    // Adjoint rules per operand: mul passes seed*b.val / seed*a.val, div
    // seed/b.val / -seed*a.val/b.val², max/min the selector. Operand values
    // are re-derived here, once per assignment.
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        let nb = self.b.num_args();
        if na1 == 0 && nb == 0 {
            return;
        }
        let av = self.a.val();
        let bv = self.b.val();
        if na1 > 0 {
            self.a
                .compute_partials(seed * R::KIND.partial_a_fresh(av, bv), &mut out[..na1]);
        }
        if nb > 0 {
            self.b
                .compute_partials(seed * R::KIND.partial_b_fresh(av, bv), &mut out[na1..]);
        }
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        let nb = self.b.num_args();
        let av = self.av.get();
        let bv = self.bv.get();
        if na1 > 0 {
            self.a
                .compute_partials_cached(seed * R::KIND.partial_a_fresh(av, bv), &mut out[..na1]);
        }
        if nb > 0 {
            self.b
                .compute_partials_cached(seed * R::KIND.partial_b_fresh(av, bv), &mut out[na1..]);
        }
    }
}

impl<A: ElrExpr, B: ElrExpr> ElrExpr for PowNode<A, B> {
    binary_arg_plumbing!();
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        let nb = self.b.num_args();
        if na1 == 0 && nb == 0 {
            return;
        }
        let av = self.a.val();
        let bv = self.b.val();
        let f = OpKind::Pow.eval_binary(av, bv);
        if na1 > 0 {
            self.a
                .compute_partials(seed * OpKind::Pow.partial_a(av, bv, f), &mut out[..na1]);
        }
        if nb > 0 {
            self.b
                .compute_partials(seed * OpKind::Pow.partial_b(av, bv, f), &mut out[na1..]);
        }
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        let na1 = self.a.num_args();
        if na1 > 0 {
            self.a
                .compute_partials_cached(seed * self.pac.get(), &mut out[..na1]);
        }
        if self.b.num_args() > 0 {
            self.b
                .compute_partials_cached(seed * self.pbc.get(), &mut out[na1..]);
        }
    }
}

impl<R: UnaryRule, A: ElrExpr> ElrExpr for UnaryFnNode<R, A> {
    fn arg(&self, k: usize) -> &DualVector {
        self.a.arg(k)
    }
    fn collect_args<'s>(&'s self, out: &mut ArgList<'s>) {
        self.a.collect_args(out);
    }
    fn compute_partials(&self, seed: f64, out: &mut [f64]) {
        if self.a.num_args() > 0 {
            let av = self.a.val();
            self.a
                .compute_partials(seed * R::KIND.partial_unary_fresh(av), out);
        }
    }
    fn compute_partials_cached(&self, seed: f64, out: &mut [f64]) {
        if self.a.num_args() > 0 {
            self.a.compute_partials_cached(seed * self.pc.get(), out);
        }
    }
}

/// Reverse sweep from the root with the given seed adjoint (assignments pass
/// 1.0), filling one partial per active leaf.
pub fn compute_partials<E: ElrExpr>(expr: &Ex<E>, seed: f64) -> PartialsBuf {
    let mut out: PartialsBuf = SmallVec::new();
    out.resize(expr.num_args(), 0.0);
    expr.0.compute_partials(seed, &mut out);
    out
}

/// The `k`-th active leaf of the expression, matching the partials layout.
pub fn get_arg<E: ElrExpr>(expr: &Ex<E>, k: usize) -> &DualVector {
    expr.0.arg(k)
}

fn accumulate(
    target: &mut DualVector,
    n: usize,
    v: f64,
    partials: &[f64],
    args: &ArgList<'_>,
) -> Result<(), AdError> {
    target.resize_dx(n)?;
    target.set_val(v);
    for i in 0..n {
        let mut t = 0.0;
        for (p, arg) in partials.iter().zip(args.iter()) {
            t += p * arg.dx(i);
        }
        target.set_dx(i, t);
    }
    Ok(())
}

/// Assignment via expression-level reverse mode: one value query, one
/// reverse sweep, then the partials-times-tangents accumulation for every
/// derivative component.
pub fn assign_elr<E: ElrExpr>(target: &mut DualVector, expr: &Ex<E>) -> Result<(), AdError> {
    let n = expr.validate()?;
    let v = expr.val();
    let mut partials: PartialsBuf = SmallVec::new();
    partials.resize(expr.num_args(), 0.0);
    expr.0.compute_partials(1.0, &mut partials);
    let mut args: ArgList = SmallVec::new();
    expr.0.collect_args(&mut args);
    debug_assert_eq!(args.len(), partials.len());
    accumulate(target, n, v, &partials, &args)
}

/// [`assign_elr`] preceded by one cache pass, so the value query and the
/// reverse sweep read cached values and recompute nothing.
pub fn assign_cached_elr<E: ElrExpr>(target: &mut DualVector, expr: &Ex<E>) -> Result<(), AdError> {
    let n = expr.validate()?;
    expr.cache();
    let v = expr.cached_val();
    let mut partials: PartialsBuf = SmallVec::new();
    partials.resize(expr.num_args(), 0.0);
    expr.0.compute_partials_cached(1.0, &mut partials);
    let mut args: ArgList = SmallVec::new();
    expr.0.collect_args(&mut args);
    debug_assert_eq!(args.len(), partials.len());
    accumulate(target, n, v, &partials, &args)
}

/// [`assign_elr`] into a fresh dual.
pub fn eval_elr<E: ElrExpr>(expr: &Ex<E>) -> Result<DualVector, AdError> {
    let mut out = DualVector::constant(0.0);
    assign_elr(&mut out, expr)?;
    Ok(out)
}

/// [`assign_cached_elr`] into a fresh dual.
pub fn eval_cached_elr<E: ElrExpr>(expr: &Ex<E>) -> Result<DualVector, AdError> {
    let mut out = DualVector::constant(0.0);
    assign_cached_elr(&mut out, expr)?;
    Ok(out)
}
