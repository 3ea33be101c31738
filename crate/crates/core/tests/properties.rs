//! Property tests for the shared invariants: exact linearity of addition,
//! eager gradients against finite differences, and cross-strategy agreement
//! on generated trees.

use proptest::prelude::*;

use fad::dyntree::eval_dyn;
use fad::oracle::{finite_difference, generate_tree, RandomTreeSpec};
use fad::{dual_apply, DualVector, EvalStrategy, OpKind, ALL_STRATEGIES};

fn dual_pair(n: usize) -> impl Strategy<Value = (DualVector, DualVector)> {
    let comp = proptest::collection::vec(-10.0f64..10.0, n);
    (comp.clone(), comp, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(da, db, va, vb)| {
        (
            DualVector::with_derivs(va, &da),
            DualVector::with_derivs(vb, &db),
        )
    })
}

proptest! {
    // Addition of derivative components is one f64 addition per slot, no
    // other rounding.
    #[test]
    fn addition_is_exactly_componentwise((a, b) in dual_pair(6)) {
        let sum = dual_apply(OpKind::Add, &a, Some(&b)).unwrap();
        for i in 0..6 {
            prop_assert_eq!(sum.dx(i), a.dx(i) + b.dx(i));
        }
    }

    // Eager single-op derivatives against central differences at points
    // sampled away from domain boundaries.
    #[test]
    fn eager_partials_match_finite_differences(
        va in 0.3f64..1.4,
        vb in 0.3f64..1.4,
        op_idx in 0usize..fad::ops::ALL_OPS.len(),
    ) {
        let op = fad::ops::ALL_OPS[op_idx];
        // Stay off the max/min tie line and the abs kink.
        prop_assume!((va - vb).abs() > 0.01 && va.abs() > 0.01);
        let a = DualVector::independent(va, 0, 2).unwrap();
        let b = DualVector::independent(vb, 1, 2).unwrap();
        let out = if op.arity() == 1 {
            dual_apply(op, &a, None).unwrap()
        } else {
            dual_apply(op, &a, Some(&b)).unwrap()
        };
        let f = |z: &[f64]| {
            if op.arity() == 1 {
                op.eval_unary(z[0])
            } else {
                op.eval_binary(z[0], z[1])
            }
        };
        for i in 0..op.arity() {
            let fd = finite_difference(f, &[va, vb], i).unwrap();
            let scale = out.dx(i).abs().max(fd.abs()).max(1.0);
            prop_assert!((out.dx(i) - fd).abs() <= 1e-6 * scale,
                "{} d{}: {} vs fd {}", op.name(), i, out.dx(i), fd);
        }
    }

    // Generated trees: every lazy strategy agrees with eager evaluation.
    #[test]
    fn strategies_agree_on_generated_trees(seed in 0u64..300) {
        let spec = RandomTreeSpec::new(seed, 6, 4);
        let tree = generate_tree(&spec);
        let env = tree.env();
        let reference = eval_dyn(EvalStrategy::Eager, &tree.root, &env).unwrap();
        for s in ALL_STRATEGIES {
            let got = eval_dyn(s, &tree.root, &env).unwrap();
            let vscale = reference.val().abs().max(1.0);
            prop_assert!((got.val() - reference.val()).abs() <= 1e-13 * vscale);
            for i in 0..4 {
                let scale = reference.dx(i).abs().max(1.0);
                prop_assert!((got.dx(i) - reference.dx(i)).abs() <= 1e-13 * scale,
                    "{} dx{}: {} vs {}", s, i, got.dx(i), reference.dx(i));
            }
        }
    }
}
