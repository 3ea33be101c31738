//! Lazy expression trees and the standard assignment-time evaluation
//! strategy.
//!
//! Operators on [`Ex`] build no values: each returns a node recording the
//! operation and its operand handles, statically typed by operation so the
//! whole-tree traversal can be flattened by the optimizer. Work happens once,
//! at assignment ([`assign_standard`]), which walks the tree recursively —
//! the value rule once, then the per-node chain rule for every derivative
//! component. Because each component's `dx(i)` re-derives the operand values
//! it needs, intermediate values are recomputed once per component; that cost
//! is what the [`crate::cache`] and [`crate::elr`] strategies remove.
//!
//! Nodes borrow their leaf [`DualVector`]s, so a tree cannot outlive its
//! operands, and a target cannot appear in its own right-hand side: both are
//! compile errors.

use std::cell::Cell;
use std::marker::PhantomData;

use crate::count::CountScope;
use crate::dual::DualVector;
use crate::error::AdError;
use crate::ops::OpKind;

/// A node in a lazy expression tree.
///
/// `size` is the number of derivative components (the maximum over active
/// operands), `num_args` the count of active leaf occurrences in the subtree
/// (repeated leaves count separately, passive operands count zero). Both are
/// fixed when the node is built. `val` and `dx` recompute recursively;
/// `validate` checks that all active operands agree on size, which node
/// construction deliberately does not (nodes are cheap and unchecked —
/// errors surface at assignment).
pub trait Expr {
    fn size(&self) -> usize;
    fn num_args(&self) -> usize;
    fn val(&self) -> f64;
    fn dx(&self, i: usize) -> f64;
    fn validate(&self) -> Result<usize, AdError>;
}

fn combine_sizes(la: usize, lb: usize) -> Result<usize, AdError> {
    if la != 0 && lb != 0 && la != lb {
        Err(AdError::SizeMismatch {
            left: la,
            right: lb,
        })
    } else {
        Ok(la.max(lb))
    }
}

/// An active-or-passive leaf: a borrowed dual variable.
#[derive(Debug, Clone, Copy)]
pub struct Leaf<'a>(pub(crate) &'a DualVector);

impl Expr for Leaf<'_> {
    fn size(&self) -> usize {
        self.0.len()
    }
    fn num_args(&self) -> usize {
        usize::from(!self.0.is_passive())
    }
    fn val(&self) -> f64 {
        self.0.val()
    }
    fn dx(&self, i: usize) -> f64 {
        self.0.dx(i)
    }
    fn validate(&self) -> Result<usize, AdError> {
        Ok(self.0.len())
    }
}

/// A literal constant; always passive.
#[derive(Debug, Clone, Copy)]
pub struct ConstLeaf(pub(crate) f64);

impl Expr for ConstLeaf {
    fn size(&self) -> usize {
        0
    }
    fn num_args(&self) -> usize {
        0
    }
    fn val(&self) -> f64 {
        self.0
    }
    fn dx(&self, _i: usize) -> f64 {
        0.0
    }
    fn validate(&self) -> Result<usize, AdError> {
        Ok(0)
    }
}

/// Marker selecting the catalog rule of a unary node.
pub trait UnaryRule {
    const KIND: OpKind;
}

/// Marker selecting the catalog rule of a value-caching binary node.
pub trait BinValsRule {
    const KIND: OpKind;
}

macro_rules! rule_markers {
    ($trait:ident: $($name:ident => $kind:ident),* $(,)?) => {
        $(
            #[derive(Debug, Clone, Copy)]
            pub struct $name;
            impl $trait for $name {
                const KIND: OpKind = OpKind::$kind;
            }
        )*
    };
}

rule_markers!(UnaryRule: SinOp => Sin, CosOp => Cos, TanOp => Tan, ExpOp => Exp,
    LogOp => Log, SqrtOp => Sqrt, AbsOp => Abs);
rule_markers!(BinValsRule: MulOp => Mul, DivOp => Div, MaxOp => Max, MinOp => Min);

/// Addition node; caches nothing (partials are exactly 1).
#[derive(Debug, Clone)]
pub struct AddNode<A, B> {
    pub(crate) a: A,
    pub(crate) b: B,
    size: usize,
    na: usize,
}

/// Subtraction node; caches nothing (partials are exactly ±1).
#[derive(Debug, Clone)]
pub struct SubNode<A, B> {
    pub(crate) a: A,
    pub(crate) b: B,
    size: usize,
    na: usize,
}

/// Negation node; caches nothing.
#[derive(Debug, Clone)]
pub struct NegNode<A> {
    pub(crate) a: A,
    size: usize,
    na: usize,
}

/// Binary node that caches its operand values during the cache pass
/// (multiplication, division, max, min).
#[derive(Debug, Clone)]
pub struct BinValsNode<R, A, B> {
    pub(crate) a: A,
    pub(crate) b: B,
    size: usize,
    na: usize,
    pub(crate) av: Cell<f64>,
    pub(crate) bv: Cell<f64>,
    rule: PhantomData<R>,
}

/// Power node; caches its value and both partials (the exponent partial
/// costs a log, so caching the value alone would not be enough).
#[derive(Debug, Clone)]
pub struct PowNode<A, B> {
    pub(crate) a: A,
    pub(crate) b: B,
    size: usize,
    na: usize,
    pub(crate) fc: Cell<f64>,
    pub(crate) pac: Cell<f64>,
    pub(crate) pbc: Cell<f64>,
}

/// Unary function node (sin, cos, tan, exp, log, sqrt, abs); caches its
/// value and its partial, e.g. sin caches sin(a) and cos(a).
#[derive(Debug, Clone)]
pub struct UnaryFnNode<R, A> {
    pub(crate) a: A,
    size: usize,
    na: usize,
    pub(crate) fc: Cell<f64>,
    pub(crate) pc: Cell<f64>,
    rule: PhantomData<R>,
}

impl<A: Expr, B: Expr> AddNode<A, B> {
    fn new(a: A, b: B) -> Self {
        let size = a.size().max(b.size());
        let na = a.num_args() + b.num_args();
        AddNode { a, b, size, na }
    }
}

impl<A: Expr, B: Expr> SubNode<A, B> {
    fn new(a: A, b: B) -> Self {
        let size = a.size().max(b.size());
        let na = a.num_args() + b.num_args();
        SubNode { a, b, size, na }
    }
}

impl<A: Expr> NegNode<A> {
    fn new(a: A) -> Self {
        let size = a.size();
        let na = a.num_args();
        NegNode { a, size, na }
    }
}

impl<R: BinValsRule, A: Expr, B: Expr> BinValsNode<R, A, B> {
    fn new(a: A, b: B) -> Self {
        let size = a.size().max(b.size());
        let na = a.num_args() + b.num_args();
        BinValsNode {
            a,
            b,
            size,
            na,
            av: Cell::new(0.0),
            bv: Cell::new(0.0),
            rule: PhantomData,
        }
    }
}

impl<A: Expr, B: Expr> PowNode<A, B> {
    fn new(a: A, b: B) -> Self {
        let size = a.size().max(b.size());
        let na = a.num_args() + b.num_args();
        PowNode {
            a,
            b,
            size,
            na,
            fc: Cell::new(0.0),
            pac: Cell::new(0.0),
            pbc: Cell::new(0.0),
        }
    }
}

impl<R: UnaryRule, A: Expr> UnaryFnNode<R, A> {
    fn new(a: A) -> Self {
        let size = a.size();
        let na = a.num_args();
        UnaryFnNode {
            a,
            size,
            na,
            fc: Cell::new(0.0),
            pc: Cell::new(0.0),
            rule: PhantomData,
        }
    }
}

impl<A: Expr, B: Expr> Expr for AddNode<A, B> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        self.a.val() + self.b.val()
    }
    fn dx(&self, i: usize) -> f64 {
        self.a.dx(i) + self.b.dx(i)
    }
    fn validate(&self) -> Result<usize, AdError> {
        combine_sizes(self.a.validate()?, self.b.validate()?)
    }
}

impl<A: Expr, B: Expr> Expr for SubNode<A, B> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        self.a.val() - self.b.val()
    }
    fn dx(&self, i: usize) -> f64 {
        self.a.dx(i) - self.b.dx(i)
    }
    fn validate(&self) -> Result<usize, AdError> {
        combine_sizes(self.a.validate()?, self.b.validate()?)
    }
}

impl<A: Expr> Expr for NegNode<A> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        -self.a.val()
    }
    fn dx(&self, i: usize) -> f64 {
        -self.a.dx(i)
    }
    fn validate(&self) -> Result<usize, AdError> {
        self.a.validate()
    }
}

impl<R: BinValsRule, A: Expr, B: Expr> Expr for BinValsNode<R, A, B> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        R::KIND.eval_binary(self.a.val(), self.b.val())
    }
    // Operand values are re-derived on every call; for e.g. multiplication
    // this is exactly `a.val()*b.dx(i) + a.dx(i)*b.val()`. A passive side's
    // term is skipped, not multiplied by zero, so a nonfinite partial from a
    // constant operand cannot poison the active side.
    fn dx(&self, i: usize) -> f64 {
        let av = self.a.val();
        let bv = self.b.val();
        match (self.a.size() > 0, self.b.size() > 0) {
            (true, true) => {
                R::KIND.partial_a_fresh(av, bv) * self.a.dx(i)
                    + R::KIND.partial_b_fresh(av, bv) * self.b.dx(i)
            }
            (true, false) => R::KIND.partial_a_fresh(av, bv) * self.a.dx(i),
            (false, true) => R::KIND.partial_b_fresh(av, bv) * self.b.dx(i),
            (false, false) => 0.0,
        }
    }
    fn validate(&self) -> Result<usize, AdError> {
        combine_sizes(self.a.validate()?, self.b.validate()?)
    }
}

impl<A: Expr, B: Expr> Expr for PowNode<A, B> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        OpKind::Pow.eval_binary(self.a.val(), self.b.val())
    }
    fn dx(&self, i: usize) -> f64 {
        let av = self.a.val();
        let bv = self.b.val();
        let f = OpKind::Pow.eval_binary(av, bv);
        match (self.a.size() > 0, self.b.size() > 0) {
            (true, true) => {
                OpKind::Pow.partial_a(av, bv, f) * self.a.dx(i)
                    + OpKind::Pow.partial_b(av, bv, f) * self.b.dx(i)
            }
            (true, false) => OpKind::Pow.partial_a(av, bv, f) * self.a.dx(i),
            (false, true) => OpKind::Pow.partial_b(av, bv, f) * self.b.dx(i),
            (false, false) => 0.0,
        }
    }
    fn validate(&self) -> Result<usize, AdError> {
        combine_sizes(self.a.validate()?, self.b.validate()?)
    }
}

impl<R: UnaryRule, A: Expr> Expr for UnaryFnNode<R, A> {
    fn size(&self) -> usize {
        self.size
    }
    fn num_args(&self) -> usize {
        self.na
    }
    fn val(&self) -> f64 {
        R::KIND.eval_unary(self.a.val())
    }
    fn dx(&self, i: usize) -> f64 {
        R::KIND.partial_unary_fresh(self.a.val()) * self.a.dx(i)
    }
    fn validate(&self) -> Result<usize, AdError> {
        self.a.validate()
    }
}

/// Wrapper that carries expression nodes through operator overloading.
#[derive(Debug, Clone)]
pub struct Ex<E>(pub(crate) E);

impl<E> std::ops::Deref for Ex<E> {
    type Target = E;
    fn deref(&self) -> &E {
        &self.0
    }
}

/// Lifts a dual variable into an expression leaf.
pub fn ex(v: &DualVector) -> Ex<Leaf<'_>> {
    Ex(Leaf(v))
}

/// Lifts a constant into a passive expression leaf. Plain `f64` operands of
/// the overloaded operators are lifted automatically.
pub fn lit(c: f64) -> Ex<ConstLeaf> {
    Ex(ConstLeaf(c))
}

macro_rules! lazy_binop {
    ($trait:ident, $method:ident, $node:ident $(, $rule:ident)?) => {
        impl<A: Expr, B: Expr> std::ops::$trait<Ex<B>> for Ex<A> {
            type Output = Ex<$node<$($rule,)? A, B>>;
            fn $method(self, rhs: Ex<B>) -> Self::Output {
                Ex($node::new(self.0, rhs.0))
            }
        }
        impl<A: Expr> std::ops::$trait<f64> for Ex<A> {
            type Output = Ex<$node<$($rule,)? A, ConstLeaf>>;
            fn $method(self, rhs: f64) -> Self::Output {
                Ex($node::new(self.0, ConstLeaf(rhs)))
            }
        }
        impl<A: Expr> std::ops::$trait<Ex<A>> for f64 {
            type Output = Ex<$node<$($rule,)? ConstLeaf, A>>;
            fn $method(self, rhs: Ex<A>) -> Self::Output {
                Ex($node::new(ConstLeaf(self), rhs.0))
            }
        }
    };
}

lazy_binop!(Add, add, AddNode);
lazy_binop!(Sub, sub, SubNode);
lazy_binop!(Mul, mul, BinValsNode, MulOp);
lazy_binop!(Div, div, BinValsNode, DivOp);

impl<A: Expr> std::ops::Neg for Ex<A> {
    type Output = Ex<NegNode<A>>;
    fn neg(self) -> Self::Output {
        Ex(NegNode::new(self.0))
    }
}

macro_rules! lazy_unary_methods {
    ($($method:ident => $rule:ident),* $(,)?) => {
        impl<E: Expr> Ex<E> {
            $(
                pub fn $method(self) -> Ex<UnaryFnNode<$rule, E>> {
                    Ex(UnaryFnNode::new(self.0))
                }
            )*
        }
    };
}

lazy_unary_methods! {
    sin => SinOp,
    cos => CosOp,
    tan => TanOp,
    exp => ExpOp,
    ln => LogOp,
    sqrt => SqrtOp,
    abs => AbsOp,
}

impl<E: Expr> Ex<E> {
    pub fn pow<F: Expr>(self, rhs: Ex<F>) -> Ex<PowNode<E, F>> {
        Ex(PowNode::new(self.0, rhs.0))
    }

    pub fn powf(self, exponent: f64) -> Ex<PowNode<E, ConstLeaf>> {
        Ex(PowNode::new(self.0, ConstLeaf(exponent)))
    }

    pub fn max<F: Expr>(self, rhs: Ex<F>) -> Ex<BinValsNode<MaxOp, E, F>> {
        Ex(BinValsNode::new(self.0, rhs.0))
    }

    pub fn min<F: Expr>(self, rhs: Ex<F>) -> Ex<BinValsNode<MinOp, E, F>> {
        Ex(BinValsNode::new(self.0, rhs.0))
    }
}

/// Evaluates an expression into `target`: value first, then every derivative
/// component via the recursive per-node chain rules. The derivative array is
/// resized to the expression's component count.
///
/// The expression borrows its operands immutably while `target` is borrowed
/// mutably, so a target aliasing its own right-hand side is rejected at
/// compile time; results are always computed from consistent inputs.
pub fn assign_standard<E: Expr>(target: &mut DualVector, expr: &Ex<E>) -> Result<(), AdError> {
    let n = expr.0.validate()?;
    let v = expr.0.val();
    target.resize_dx(n)?;
    target.set_val(v);
    for i in 0..n {
        target.set_dx(i, expr.0.dx(i));
    }
    Ok(())
}

/// [`assign_standard`] into a fresh dual.
pub fn eval_standard<E: Expr>(expr: &Ex<E>) -> Result<DualVector, AdError> {
    let mut out = DualVector::constant(0.0);
    assign_standard(&mut out, expr)?;
    Ok(out)
}

/// Number of transcendental calls one standard assignment of `expr` incurs,
/// measured over a scoped counter. For value-recomputing nodes the count
/// grows linearly with the number of derivative components.
pub fn count_profile_standard<E: Expr>(expr: &Ex<E>) -> Result<u64, AdError> {
    let scope = CountScope::new();
    let mut scratch = DualVector::constant(0.0);
    assign_standard(&mut scratch, expr)?;
    Ok(scope.calls())
}
