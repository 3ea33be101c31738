//! The caching evaluation strategy.
//!
//! An expression node may be copied many times while the tree is built, so
//! caching is deferred: the assignment operator runs a single [`cache_pass`]
//! over the finished tree before any value or derivative is read. The pass
//! visits each node exactly once, bottom-up, storing whatever the node's
//! later `val`/`dx` queries need:
//!
//! * multiplication, division, max, min store their operand values;
//! * unary functions store their value and their partial (sin stores both
//!   sin(a) and cos(a));
//! * pow stores its value and both partials (the exponent partial costs a
//!   log);
//! * add, sub, neg store nothing — their partials are ±1.
//!
//! After the pass, `cached_val`/`cached_dx` never recurse into child value
//! chains, so the transcendental work of an assignment is independent of the
//! number of derivative components.

use crate::dual::DualVector;
use crate::error::AdError;
use crate::expr::{
    AddNode, BinValsNode, BinValsRule, ConstLeaf, Ex, Expr, Leaf, NegNode, PowNode, SubNode,
    UnaryFnNode, UnaryRule,
};
use crate::ops::OpKind;

/// [`Expr`] plus the deferred cache pass and the cache-reading queries.
///
/// `cached_val`/`cached_dx` require that [`CachedExpr::cache`] ran on the
/// root since the tree was built; [`assign_cached`] guarantees that order. A
/// tree must not be assigned from two threads at once (the cache write is
/// per-assignment state) — node types are `!Sync`, making that a compile
/// error.
pub trait CachedExpr: Expr {
    fn cache(&self);
    fn cached_val(&self) -> f64;
    fn cached_dx(&self, i: usize) -> f64;
}

impl CachedExpr for Leaf<'_> {
    fn cache(&self) {}
    fn cached_val(&self) -> f64 {
        self.0.val()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        self.0.dx(i)
    }
}

impl CachedExpr for ConstLeaf {
    fn cache(&self) {}
    fn cached_val(&self) -> f64 {
        self.0
    }
    fn cached_dx(&self, _i: usize) -> f64 {
        0.0
    }
}

impl<A: CachedExpr, B: CachedExpr> CachedExpr for AddNode<A, B> {
    fn cache(&self) {
        self.a.cache();
        self.b.cache();
    }
    fn cached_val(&self) -> f64 {
        self.a.cached_val() + self.b.cached_val()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        self.a.cached_dx(i) + self.b.cached_dx(i)
    }
}

impl<A: CachedExpr, B: CachedExpr> CachedExpr for SubNode<A, B> {
    fn cache(&self) {
        self.a.cache();
        self.b.cache();
    }
    fn cached_val(&self) -> f64 {
        self.a.cached_val() - self.b.cached_val()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        self.a.cached_dx(i) - self.b.cached_dx(i)
    }
}

impl<A: CachedExpr> CachedExpr for NegNode<A> {
    fn cache(&self) {
        self.a.cache();
    }
    fn cached_val(&self) -> f64 {
        -self.a.cached_val()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        -self.a.cached_dx(i)
    }
}

impl<R: BinValsRule, A: CachedExpr, B: CachedExpr> CachedExpr for BinValsNode<R, A, B> {
    fn cache(&self) {
        self.a.cache();
        self.b.cache();
        self.av.set(self.a.cached_val());
        self.bv.set(self.b.cached_val());
    }
    fn cached_val(&self) -> f64 {
        R::KIND.eval_binary(self.av.get(), self.bv.get())
    }
    // For multiplication this is `a_val*b.dx(i) + a.dx(i)*b_val` on the
    // cached operand values; div/max/min partials are call-free as well.
    fn cached_dx(&self, i: usize) -> f64 {
        let av = self.av.get();
        let bv = self.bv.get();
        match (self.a.size() > 0, self.b.size() > 0) {
            (true, true) => {
                R::KIND.partial_a_fresh(av, bv) * self.a.cached_dx(i)
                    + R::KIND.partial_b_fresh(av, bv) * self.b.cached_dx(i)
            }
            (true, false) => R::KIND.partial_a_fresh(av, bv) * self.a.cached_dx(i),
            (false, true) => R::KIND.partial_b_fresh(av, bv) * self.b.cached_dx(i),
            (false, false) => 0.0,
        }
    }
}

impl<A: CachedExpr, B: CachedExpr> CachedExpr for PowNode<A, B> {
    fn cache(&self) {
        self.a.cache();
        self.b.cache();
        let av = self.a.cached_val();
        let bv = self.b.cached_val();
        let f = OpKind::Pow.eval_binary(av, bv);
        self.fc.set(f);
        self.pac.set(if self.a.size() > 0 {
            OpKind::Pow.partial_a(av, bv, f)
        } else {
            0.0
        });
        // Only computed for an active exponent: the ln would be both a
        // wasted call and nonfinite for negative bases.
        self.pbc.set(if self.b.size() > 0 {
            OpKind::Pow.partial_b(av, bv, f)
        } else {
            0.0
        });
    }
    fn cached_val(&self) -> f64 {
        self.fc.get()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        match (self.a.size() > 0, self.b.size() > 0) {
            (true, true) => {
                self.pac.get() * self.a.cached_dx(i) + self.pbc.get() * self.b.cached_dx(i)
            }
            (true, false) => self.pac.get() * self.a.cached_dx(i),
            (false, true) => self.pbc.get() * self.b.cached_dx(i),
            (false, false) => 0.0,
        }
    }
}

impl<R: UnaryRule, A: CachedExpr> CachedExpr for UnaryFnNode<R, A> {
    fn cache(&self) {
        self.a.cache();
        let av = self.a.cached_val();
        let f = R::KIND.eval_unary(av);
        self.fc.set(f);
        self.pc.set(R::KIND.partial_unary(av, f));
    }
    fn cached_val(&self) -> f64 {
        self.fc.get()
    }
    fn cached_dx(&self, i: usize) -> f64 {
        self.pc.get() * self.a.cached_dx(i)
    }
}

/// Runs the deferred cache pass: each node stores its operand values (and
/// transcendental partials), visiting every node exactly once.
pub fn cache_pass<E: CachedExpr>(expr: &Ex<E>) {
    expr.cache();
}

/// Like [`crate::expr::assign_standard`], but preceded by exactly one cache
/// pass so no intermediate value is recomputed per derivative component.
pub fn assign_cached<E: CachedExpr>(target: &mut DualVector, expr: &Ex<E>) -> Result<(), AdError> {
    let n = expr.validate()?;
    expr.cache();
    let v = expr.cached_val();
    target.resize_dx(n)?;
    target.set_val(v);
    for i in 0..n {
        target.set_dx(i, expr.cached_dx(i));
    }
    Ok(())
}

/// [`assign_cached`] into a fresh dual.
pub fn eval_cached<E: CachedExpr>(expr: &Ex<E>) -> Result<DualVector, AdError> {
    let mut out = DualVector::constant(0.0);
    assign_cached(&mut out, expr)?;
    Ok(out)
}
