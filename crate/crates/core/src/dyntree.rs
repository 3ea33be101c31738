//! Runtime-shaped expression trees.
//!
//! The statically typed nodes in [`crate::expr`] fix the tree shape at
//! compile time, which is what makes them optimizable — but randomized
//! testing needs trees whose shape is data. `DynNode` is the tagged
//! equivalent: same catalog, same cache policy per operation, same passive
//! rules, same assignment algorithms, so every observable (values,
//! derivatives, transcendental counts) matches the static path exactly.
//!
//! Leaves index into an environment slice of [`DualVector`]s supplied at
//! evaluation time, so one tree can be re-evaluated under different seedings.

use std::cell::Cell;

use crate::dual::{dual_apply, DualVector};
use crate::error::AdError;
use crate::ops::OpKind;
use crate::strategy::EvalStrategy;

#[derive(Debug)]
pub enum DynKind {
    /// Index into the evaluation environment.
    Leaf(usize),
    Const(f64),
    Unary(OpKind, Box<DynNode>),
    Binary(OpKind, Box<DynNode>, Box<DynNode>),
}

/// One node of a runtime-shaped expression tree.
///
/// `c0..c2` are the per-assignment caches (meaning depends on the operation
/// family), `visits` counts cache-pass visits for the single-visit
/// instrumentation, and `size`/`num_args` are filled in by [`DynNode::validate`],
/// which every assignment runs first.
#[derive(Debug)]
pub struct DynNode {
    pub kind: DynKind,
    c0: Cell<f64>,
    c1: Cell<f64>,
    c2: Cell<f64>,
    visits: Cell<u32>,
    size: Cell<usize>,
    na: Cell<usize>,
}

/// What a node stores during the cache pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CacheFamily {
    /// add, sub, neg: nothing — partials are ±1.
    Skeleton,
    /// mul, div, max, min: both operand values.
    OperandVals,
    /// sin, cos, tan, exp, log, sqrt, abs: value and partial.
    ValPartial,
    /// pow: value and both partials.
    ValPartials,
}

fn family(op: OpKind) -> CacheFamily {
    match op {
        OpKind::Add | OpKind::Sub | OpKind::Neg => CacheFamily::Skeleton,
        OpKind::Mul | OpKind::Div | OpKind::Max | OpKind::Min => CacheFamily::OperandVals,
        OpKind::Pow => CacheFamily::ValPartials,
        _ => CacheFamily::ValPartial,
    }
}

impl DynNode {
    fn new(kind: DynKind) -> Self {
        DynNode {
            kind,
            c0: Cell::new(0.0),
            c1: Cell::new(0.0),
            c2: Cell::new(0.0),
            visits: Cell::new(0),
            size: Cell::new(0),
            na: Cell::new(0),
        }
    }

    pub fn leaf(slot: usize) -> Self {
        Self::new(DynKind::Leaf(slot))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(DynKind::Const(value))
    }

    pub fn unary(op: OpKind, a: DynNode) -> Self {
        assert_eq!(op.arity(), 1, "{} is not unary", op.name());
        Self::new(DynKind::Unary(op, Box::new(a)))
    }

    pub fn binary(op: OpKind, a: DynNode, b: DynNode) -> Self {
        assert_eq!(op.arity(), 2, "{} is not binary", op.name());
        Self::new(DynKind::Binary(op, Box::new(a), Box::new(b)))
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            DynKind::Leaf(_) | DynKind::Const(_) => 1,
            DynKind::Unary(_, a) => 1 + a.node_count(),
            DynKind::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match &self.kind {
            DynKind::Leaf(_) => 1,
            DynKind::Const(_) => 0,
            DynKind::Unary(_, a) => a.leaf_count(),
            DynKind::Binary(_, a, b) => a.leaf_count() + b.leaf_count(),
        }
    }

    /// Checks size agreement of active operands and records per-node size
    /// and argument counts. Runs once per assignment, before anything else.
    pub fn validate(&self, env: &[DualVector]) -> Result<usize, AdError> {
        let (size, na) = match &self.kind {
            DynKind::Leaf(slot) => {
                let d = &env[*slot];
                (d.len(), usize::from(!d.is_passive()))
            }
            DynKind::Const(_) => (0, 0),
            DynKind::Unary(_, a) => {
                let sa = a.validate(env)?;
                (sa, a.na.get())
            }
            DynKind::Binary(_, a, b) => {
                let sa = a.validate(env)?;
                let sb = b.validate(env)?;
                if sa != 0 && sb != 0 && sa != sb {
                    return Err(AdError::SizeMismatch {
                        left: sa,
                        right: sb,
                    });
                }
                (sa.max(sb), a.na.get() + b.na.get())
            }
        };
        self.size.set(size);
        self.na.set(na);
        Ok(size)
    }

    pub fn num_args(&self) -> usize {
        self.na.get()
    }

    /// Active leaf occurrences counted by a plain recursive walk, for
    /// cross-checking the bookkeeping above.
    pub fn count_active_leaves(&self, env: &[DualVector]) -> usize {
        match &self.kind {
            DynKind::Leaf(slot) => usize::from(!env[*slot].is_passive()),
            DynKind::Const(_) => 0,
            DynKind::Unary(_, a) => a.count_active_leaves(env),
            DynKind::Binary(_, a, b) => a.count_active_leaves(env) + b.count_active_leaves(env),
        }
    }

    // ---- standard (recomputing) queries ----

    pub fn val(&self, env: &[DualVector]) -> f64 {
        match &self.kind {
            DynKind::Leaf(slot) => env[*slot].val(),
            DynKind::Const(c) => *c,
            DynKind::Unary(op, a) => op.eval_unary(a.val(env)),
            DynKind::Binary(op, a, b) => op.eval_binary(a.val(env), b.val(env)),
        }
    }

    pub fn dx(&self, env: &[DualVector], i: usize) -> f64 {
        match &self.kind {
            DynKind::Leaf(slot) => env[*slot].dx(i),
            DynKind::Const(_) => 0.0,
            DynKind::Unary(op, a) => op.partial_unary_fresh(a.val(env)) * a.dx(env, i),
            DynKind::Binary(op, a, b) => {
                let av = a.val(env);
                let bv = b.val(env);
                if *op == OpKind::Pow {
                    let f = op.eval_binary(av, bv);
                    match (a.size.get() > 0, b.size.get() > 0) {
                        (true, true) => {
                            op.partial_a(av, bv, f) * a.dx(env, i)
                                + op.partial_b(av, bv, f) * b.dx(env, i)
                        }
                        (true, false) => op.partial_a(av, bv, f) * a.dx(env, i),
                        (false, true) => op.partial_b(av, bv, f) * b.dx(env, i),
                        (false, false) => 0.0,
                    }
                } else {
                    match (a.size.get() > 0, b.size.get() > 0) {
                        (true, true) => {
                            op.partial_a_fresh(av, bv) * a.dx(env, i)
                                + op.partial_b_fresh(av, bv) * b.dx(env, i)
                        }
                        (true, false) => op.partial_a_fresh(av, bv) * a.dx(env, i),
                        (false, true) => op.partial_b_fresh(av, bv) * b.dx(env, i),
                        (false, false) => 0.0,
                    }
                }
            }
        }
    }

    // ---- cache pass and cached queries ----

    pub fn cache(&self, env: &[DualVector]) {
        match &self.kind {
            DynKind::Leaf(_) | DynKind::Const(_) => {}
            DynKind::Unary(op, a) => {
                a.cache(env);
                if family(*op) == CacheFamily::ValPartial {
                    let av = a.cached_val(env);
                    let f = op.eval_unary(av);
                    self.c0.set(f);
                    self.c1.set(op.partial_unary(av, f));
                }
            }
            DynKind::Binary(op, a, b) => {
                a.cache(env);
                b.cache(env);
                match family(*op) {
                    CacheFamily::Skeleton => {}
                    CacheFamily::OperandVals => {
                        self.c0.set(a.cached_val(env));
                        self.c1.set(b.cached_val(env));
                    }
                    CacheFamily::ValPartials => {
                        let av = a.cached_val(env);
                        let bv = b.cached_val(env);
                        let f = op.eval_binary(av, bv);
                        self.c0.set(f);
                        self.c1.set(if a.size.get() > 0 {
                            op.partial_a(av, bv, f)
                        } else {
                            0.0
                        });
                        self.c2.set(if b.size.get() > 0 {
                            op.partial_b(av, bv, f)
                        } else {
                            0.0
                        });
                    }
                    CacheFamily::ValPartial => unreachable!(),
                }
            }
        }
        self.visits.set(self.visits.get() + 1);
    }

    pub fn cached_val(&self, env: &[DualVector]) -> f64 {
        match &self.kind {
            DynKind::Leaf(slot) => env[*slot].val(),
            DynKind::Const(c) => *c,
            DynKind::Unary(op, a) => match family(*op) {
                CacheFamily::Skeleton => -a.cached_val(env),
                _ => self.c0.get(),
            },
            DynKind::Binary(op, a, b) => match family(*op) {
                CacheFamily::Skeleton => op.eval_binary(a.cached_val(env), b.cached_val(env)),
                CacheFamily::OperandVals => op.eval_binary(self.c0.get(), self.c1.get()),
                _ => self.c0.get(),
            },
        }
    }

    pub fn cached_dx(&self, env: &[DualVector], i: usize) -> f64 {
        match &self.kind {
            DynKind::Leaf(slot) => env[*slot].dx(i),
            DynKind::Const(_) => 0.0,
            DynKind::Unary(op, a) => match family(*op) {
                CacheFamily::Skeleton => -a.cached_dx(env, i),
                _ => self.c1.get() * a.cached_dx(env, i),
            },
            DynKind::Binary(op, a, b) => match family(*op) {
                CacheFamily::Skeleton => {
                    if *op == OpKind::Add {
                        a.cached_dx(env, i) + b.cached_dx(env, i)
                    } else {
                        a.cached_dx(env, i) - b.cached_dx(env, i)
                    }
                }
                CacheFamily::OperandVals => {
                    let av = self.c0.get();
                    let bv = self.c1.get();
                    match (a.size.get() > 0, b.size.get() > 0) {
                        (true, true) => {
                            op.partial_a_fresh(av, bv) * a.cached_dx(env, i)
                                + op.partial_b_fresh(av, bv) * b.cached_dx(env, i)
                        }
                        (true, false) => op.partial_a_fresh(av, bv) * a.cached_dx(env, i),
                        (false, true) => op.partial_b_fresh(av, bv) * b.cached_dx(env, i),
                        (false, false) => 0.0,
                    }
                }
                CacheFamily::ValPartials => match (a.size.get() > 0, b.size.get() > 0) {
                    (true, true) => {
                        self.c1.get() * a.cached_dx(env, i) + self.c2.get() * b.cached_dx(env, i)
                    }
                    (true, false) => self.c1.get() * a.cached_dx(env, i),
                    (false, true) => self.c2.get() * b.cached_dx(env, i),
                    (false, false) => 0.0,
                },
                CacheFamily::ValPartial => unreachable!(),
            },
        }
    }

    // ---- reverse sweep ----

    pub fn compute_partials(&self, env: &[DualVector], seed: f64, out: &mut [f64]) {
        match &self.kind {
            DynKind::Leaf(slot) => {
                if !env[*slot].is_passive() {
                    out[0] = seed;
                }
            }
            DynKind::Const(_) => {}
            DynKind::Unary(op, a) => {
                if a.na.get() > 0 {
                    let adj = match family(*op) {
                        CacheFamily::Skeleton => -seed,
                        _ => seed * op.partial_unary_fresh(a.val(env)),
                    };
                    a.compute_partials(env, adj, out);
                }
            }
            DynKind::Binary(op, a, b) => {
                let na1 = a.na.get();
                let nb = b.na.get();
                if na1 == 0 && nb == 0 {
                    return;
                }
                match family(*op) {
                    CacheFamily::Skeleton => {
                        let sb = if *op == OpKind::Add { seed } else { -seed };
                        if na1 > 0 {
                            a.compute_partials(env, seed, &mut out[..na1]);
                        }
                        if nb > 0 {
                            b.compute_partials(env, sb, &mut out[na1..]);
                        }
                    }
                    CacheFamily::ValPartials => {
                        let av = a.val(env);
                        let bv = b.val(env);
                        let f = op.eval_binary(av, bv);
                        if na1 > 0 {
                            a.compute_partials(
                                env,
                                seed * op.partial_a(av, bv, f),
                                &mut out[..na1],
                            );
                        }
                        if nb > 0 {
                            b.compute_partials(
                                env,
                                seed * op.partial_b(av, bv, f),
                                &mut out[na1..],
                            );
                        }
                    }
                    _ => {
                        let av = a.val(env);
                        let bv = b.val(env);
                        if na1 > 0 {
                            a.compute_partials(
                                env,
                                seed * op.partial_a_fresh(av, bv),
                                &mut out[..na1],
                            );
                        }
                        if nb > 0 {
                            b.compute_partials(
                                env,
                                seed * op.partial_b_fresh(av, bv),
                                &mut out[na1..],
                            );
                        }
                    }
                }
            }
        }
    }

    pub fn compute_partials_cached(&self, env: &[DualVector], seed: f64, out: &mut [f64]) {
        match &self.kind {
            DynKind::Leaf(slot) => {
                if !env[*slot].is_passive() {
                    out[0] = seed;
                }
            }
            DynKind::Const(_) => {}
            DynKind::Unary(op, a) => {
                if a.na.get() > 0 {
                    let adj = match family(*op) {
                        CacheFamily::Skeleton => -seed,
                        _ => seed * self.c1.get(),
                    };
                    a.compute_partials_cached(env, adj, out);
                }
            }
            DynKind::Binary(op, a, b) => {
                let na1 = a.na.get();
                let nb = b.na.get();
                let (adj_a, adj_b) = match family(*op) {
                    CacheFamily::Skeleton => (seed, if *op == OpKind::Add { seed } else { -seed }),
                    CacheFamily::OperandVals => {
                        let av = self.c0.get();
                        let bv = self.c1.get();
                        (
                            seed * op.partial_a_fresh(av, bv),
                            seed * op.partial_b_fresh(av, bv),
                        )
                    }
                    CacheFamily::ValPartials => (seed * self.c1.get(), seed * self.c2.get()),
                    CacheFamily::ValPartial => unreachable!(),
                };
                if na1 > 0 {
                    a.compute_partials_cached(env, adj_a, &mut out[..na1]);
                }
                if nb > 0 {
                    b.compute_partials_cached(env, adj_b, &mut out[na1..]);
                }
            }
        }
    }

    /// Environment slots of the active leaves, left to right — the order of
    /// the partials buffer.
    pub fn collect_arg_slots(&self, env: &[DualVector], out: &mut Vec<usize>) {
        match &self.kind {
            DynKind::Leaf(slot) => {
                if !env[*slot].is_passive() {
                    out.push(*slot);
                }
            }
            DynKind::Const(_) => {}
            DynKind::Unary(_, a) => a.collect_arg_slots(env, out),
            DynKind::Binary(_, a, b) => {
                a.collect_arg_slots(env, out);
                b.collect_arg_slots(env, out);
            }
        }
    }

    // ---- cache-visit instrumentation ----

    pub fn reset_visits(&self) {
        self.visits.set(0);
        match &self.kind {
            DynKind::Leaf(_) | DynKind::Const(_) => {}
            DynKind::Unary(_, a) => a.reset_visits(),
            DynKind::Binary(_, a, b) => {
                a.reset_visits();
                b.reset_visits();
            }
        }
    }

    pub fn visit_counts(&self, out: &mut Vec<u32>) {
        out.push(self.visits.get());
        match &self.kind {
            DynKind::Leaf(_) | DynKind::Const(_) => {}
            DynKind::Unary(_, a) => a.visit_counts(out),
            DynKind::Binary(_, a, b) => {
                a.visit_counts(out);
                b.visit_counts(out);
            }
        }
    }
}

/// Evaluates the tree bottom-up with eager dual arithmetic — the
/// no-expression-trees strategy.
pub fn eval_eager_dyn(node: &DynNode, env: &[DualVector]) -> Result<DualVector, AdError> {
    match &node.kind {
        DynKind::Leaf(slot) => Ok(env[*slot].clone()),
        DynKind::Const(c) => Ok(DualVector::constant(*c)),
        DynKind::Unary(op, a) => {
            let av = eval_eager_dyn(a, env)?;
            dual_apply(*op, &av, None)
        }
        DynKind::Binary(op, a, b) => {
            let av = eval_eager_dyn(a, env)?;
            let bv = eval_eager_dyn(b, env)?;
            dual_apply(*op, &av, Some(&bv))
        }
    }
}

/// Assigns `node` to `target` under the chosen strategy; semantics match the
/// statically typed assignment functions exactly.
pub fn assign_dyn(
    strategy: EvalStrategy,
    target: &mut DualVector,
    node: &DynNode,
    env: &[DualVector],
) -> Result<(), AdError> {
    if strategy == EvalStrategy::Eager {
        *target = eval_eager_dyn(node, env)?;
        return Ok(());
    }
    let n = node.validate(env)?;
    match strategy {
        EvalStrategy::Standard => {
            let v = node.val(env);
            target.resize_dx(n)?;
            target.set_val(v);
            for i in 0..n {
                target.set_dx(i, node.dx(env, i));
            }
        }
        EvalStrategy::Cached => {
            node.cache(env);
            let v = node.cached_val(env);
            target.resize_dx(n)?;
            target.set_val(v);
            for i in 0..n {
                target.set_dx(i, node.cached_dx(env, i));
            }
        }
        EvalStrategy::Elr | EvalStrategy::CachedElr => {
            let cached = strategy == EvalStrategy::CachedElr;
            if cached {
                node.cache(env);
            }
            let v = if cached {
                node.cached_val(env)
            } else {
                node.val(env)
            };
            let m = node.num_args();
            let mut partials = vec![0.0; m];
            if cached {
                node.compute_partials_cached(env, 1.0, &mut partials);
            } else {
                node.compute_partials(env, 1.0, &mut partials);
            }
            let mut slots = Vec::with_capacity(m);
            node.collect_arg_slots(env, &mut slots);
            debug_assert_eq!(slots.len(), m);
            target.resize_dx(n)?;
            target.set_val(v);
            for i in 0..n {
                let mut t = 0.0;
                for (p, slot) in partials.iter().zip(&slots) {
                    t += p * env[*slot].dx(i);
                }
                target.set_dx(i, t);
            }
        }
        EvalStrategy::Eager => unreachable!(),
    }
    Ok(())
}

/// [`assign_dyn`] into a fresh dual.
pub fn eval_dyn(
    strategy: EvalStrategy,
    node: &DynNode,
    env: &[DualVector],
) -> Result<DualVector, AdError> {
    let mut out = DualVector::constant(0.0);
    assign_dyn(strategy, &mut out, node, env)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::CountScope;
    use crate::strategy::ALL_STRATEGIES;

    fn env3() -> Vec<DualVector> {
        vec![
            DualVector::independent(2.0, 0, 3).unwrap(),
            DualVector::independent(3.0, 1, 3).unwrap(),
            DualVector::independent(4.0, 2, 3).unwrap(),
        ]
    }

    fn product3() -> DynNode {
        DynNode::binary(
            OpKind::Mul,
            DynNode::binary(OpKind::Mul, DynNode::leaf(0), DynNode::leaf(1)),
            DynNode::leaf(2),
        )
    }

    #[test]
    fn all_strategies_differentiate_the_product() {
        let env = env3();
        for s in ALL_STRATEGIES {
            let d = eval_dyn(s, &product3(), &env).unwrap();
            assert_eq!(d.val(), 24.0, "{s}");
            assert_eq!(d.dx_slice(), &[12.0, 8.0, 6.0], "{s}");
        }
    }

    #[test]
    fn strategies_agree_on_a_transcendental_mix() {
        let env = vec![
            DualVector::independent(0.8, 0, 2).unwrap(),
            DualVector::independent(1.7, 1, 2).unwrap(),
        ];
        // min(exp(a/b), sqrt(|a - b|)) + a*sin(b)
        let tree = DynNode::binary(
            OpKind::Add,
            DynNode::binary(
                OpKind::Min,
                DynNode::unary(
                    OpKind::Exp,
                    DynNode::binary(OpKind::Div, DynNode::leaf(0), DynNode::leaf(1)),
                ),
                DynNode::unary(
                    OpKind::Sqrt,
                    DynNode::unary(
                        OpKind::Abs,
                        DynNode::binary(OpKind::Sub, DynNode::leaf(0), DynNode::leaf(1)),
                    ),
                ),
            ),
            DynNode::binary(
                OpKind::Mul,
                DynNode::leaf(0),
                DynNode::unary(OpKind::Sin, DynNode::leaf(1)),
            ),
        );
        let reference = eval_dyn(EvalStrategy::Standard, &tree, &env).unwrap();
        for s in ALL_STRATEGIES {
            let d = eval_dyn(s, &tree, &env).unwrap();
            let vscale = reference.val().abs().max(1.0);
            assert!((d.val() - reference.val()).abs() <= 1e-13 * vscale, "{s}");
            for i in 0..2 {
                let scale = reference.dx(i).abs().max(1.0);
                assert!(
                    (d.dx(i) - reference.dx(i)).abs() <= 1e-13 * scale,
                    "{s} dx{i}"
                );
            }
        }
    }

    #[test]
    fn counts_match_the_static_path() {
        // Nested sine of depth 10: the dynamic interpreter must incur the
        // same transcendental calls as the statically typed nodes.
        use crate::expr::{assign_standard, ex};
        for &(strategy, n) in &[
            (EvalStrategy::Standard, 5usize),
            (EvalStrategy::Standard, 50),
            (EvalStrategy::Cached, 50),
            (EvalStrategy::Elr, 50),
            (EvalStrategy::CachedElr, 50),
        ] {
            let x = DualVector::independent(0.4, 0, n).unwrap();

            let mut tree = DynNode::leaf(0);
            for _ in 0..10 {
                tree = DynNode::unary(OpKind::Sin, tree);
            }
            let env = vec![x.clone()];
            let scope = CountScope::new();
            let _ = eval_dyn(strategy, &tree, &env).unwrap();
            let dyn_calls = scope.calls();

            let static_calls = match strategy {
                EvalStrategy::Standard => {
                    let e = ex(&x)
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin();
                    let scope = CountScope::new();
                    let mut t = DualVector::constant(0.0);
                    assign_standard(&mut t, &e).unwrap();
                    scope.calls()
                }
                EvalStrategy::Cached => {
                    let e = ex(&x)
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin();
                    let scope = CountScope::new();
                    crate::cache::eval_cached(&e).unwrap();
                    scope.calls()
                }
                EvalStrategy::Elr => {
                    let e = ex(&x)
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin();
                    let scope = CountScope::new();
                    crate::elr::eval_elr(&e).unwrap();
                    scope.calls()
                }
                EvalStrategy::CachedElr => {
                    let e = ex(&x)
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin()
                        .sin();
                    let scope = CountScope::new();
                    crate::elr::eval_cached_elr(&e).unwrap();
                    scope.calls()
                }
                EvalStrategy::Eager => unreachable!(),
            };
            assert_eq!(dyn_calls, static_calls, "{strategy} n={n}");
        }
    }

    #[test]
    fn cache_pass_visits_every_node_once() {
        let env = env3();
        let tree = DynNode::binary(
            OpKind::Mul,
            DynNode::unary(OpKind::Sin, DynNode::leaf(0)),
            DynNode::binary(OpKind::Add, DynNode::leaf(1), DynNode::constant(2.0)),
        );
        let mut t = DualVector::constant(0.0);
        tree.reset_visits();
        assign_dyn(EvalStrategy::Cached, &mut t, &tree, &env).unwrap();
        let mut visits = Vec::new();
        tree.visit_counts(&mut visits);
        assert_eq!(visits.len(), tree.node_count());
        assert!(visits.iter().all(|&v| v == 1), "{visits:?}");
    }

    #[test]
    fn num_args_matches_an_independent_walk() {
        let env = vec![
            DualVector::independent(1.0, 0, 2).unwrap(),
            DualVector::constant(5.0), // passive leaf
        ];
        let tree = DynNode::binary(
            OpKind::Mul,
            DynNode::binary(OpKind::Add, DynNode::leaf(0), DynNode::leaf(1)),
            DynNode::leaf(0),
        );
        tree.validate(&env).unwrap();
        assert_eq!(tree.num_args(), 2); // the passive leaf takes no slot
        assert_eq!(tree.num_args(), tree.count_active_leaves(&env));
    }

    #[test]
    fn size_mismatch_is_reported() {
        let env = vec![
            DualVector::independent(1.0, 0, 2).unwrap(),
            DualVector::independent(1.0, 0, 3).unwrap(),
        ];
        let tree = DynNode::binary(OpKind::Add, DynNode::leaf(0), DynNode::leaf(1));
        for s in ALL_STRATEGIES {
            assert!(eval_dyn(s, &tree, &env).is_err(), "{s}");
        }
    }
}
