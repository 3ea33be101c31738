//! Library-level acceptance suite. Each test covers one numbered criterion
//! and prints a PASS line with its runtime; the timing-sensitive criteria
//! (scaled-runtime orderings and the reaction-kernel comparison) live in the
//! CLI crate's acceptance suite alongside the harness they exercise.

use std::time::Instant;

use fad::count::CountScope;
use fad::dyntree::{assign_dyn, eval_dyn};
use fad::oracle::{analytic_gradient_nested, cycled_mult_gradient, generate_tree, RandomTreeSpec};
use fad::workloads::{nested_assign, product_assign, product_inputs};
use fad::{DualVector, EvalStrategy, MathCounter, ALL_STRATEGIES};

const M_GRID: [usize; 8] = [1, 2, 3, 4, 5, 10, 15, 20];
const N_GRID: [usize; 2] = [5, 50];

fn assert_rel(actual: f64, expected: f64, rtol: f64, what: &str) {
    // Relative to the larger magnitude, with unit scale as the floor so
    // cancellation residue below the tolerance cannot trip the check.
    let scale = actual.abs().max(expected.abs()).max(1.0);
    assert!(
        (actual - expected).abs() <= rtol * scale,
        "{what}: {actual} vs {expected} (rtol {rtol})"
    );
}

/// Criterion 1: every strategy reproduces the analytic gradients of the
/// product and nested-sine functions over the full benchmark grid to 1e-12.
#[test]
fn criterion_1_correctness_vs_analytic_oracles() {
    let start = Instant::now();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);

    for m in M_GRID {
        for n in N_GRID {
            let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
            let xs = product_inputs(&values, n);
            let (want_y, want_g) = cycled_mult_gradient(&values, n);
            let x0: f64 = rng.gen_range(0.5..1.5);
            let (want_ny, want_nd) = analytic_gradient_nested(x0, m);
            let x = DualVector::independent(x0, 0, n).unwrap();

            for s in ALL_STRATEGIES {
                let mut t = DualVector::constant(0.0);
                product_assign(s, &xs, &mut t).unwrap();
                assert_rel(t.val(), want_y, 1e-12, &format!("mult {s} M={m} N={n} val"));
                for (j, &want) in want_g.iter().enumerate() {
                    assert_rel(
                        t.dx(j),
                        want,
                        1e-12,
                        &format!("mult {s} M={m} N={n} dx[{j}]"),
                    );
                }

                nested_assign(s, &x, m, &mut t).unwrap();
                assert_rel(
                    t.val(),
                    want_ny,
                    1e-12,
                    &format!("nested {s} M={m} N={n} val"),
                );
                assert_rel(
                    t.dx(0),
                    want_nd,
                    1e-12,
                    &format!("nested {s} M={m} N={n} dx[0]"),
                );
                for j in 1..n {
                    assert_eq!(t.dx(j), 0.0, "nested {s} M={m} N={n} dx[{j}]");
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion 1 overran: {elapsed:?}"
    );
    println!("ACCEPTANCE PASS criterion 1: analytic-oracle correctness ({elapsed:?})");
}

/// Criterion 2: on 1,000 seeded random trees all five strategies agree
/// pairwise to 1e-13 and match finite differences to 1e-6.
#[test]
fn criterion_2_cross_strategy_equivalence() {
    let start = Instant::now();
    let n_cycle = [1usize, 5, 50];
    for seed in 0..1000u64 {
        let n = n_cycle[(seed % 3) as usize];
        let spec = RandomTreeSpec::new(seed, 8, n);
        let tree = generate_tree(&spec);
        let env = tree.env();

        let results: Vec<DualVector> = ALL_STRATEGIES
            .iter()
            .map(|&s| eval_dyn(s, &tree.root, &env).unwrap())
            .collect();

        for (si, a) in results.iter().enumerate() {
            for (sj, b) in results.iter().enumerate().skip(si + 1) {
                let pair = format!(
                    "seed {seed} {} vs {}",
                    ALL_STRATEGIES[si], ALL_STRATEGIES[sj]
                );
                assert_rel(a.val(), b.val(), 1e-13, &format!("{pair} val"));
                for i in 0..n {
                    assert_rel(a.dx(i), b.dx(i), 1e-13, &format!("{pair} dx[{i}]"));
                }
            }
        }

        let fd = tree.fd_gradient().unwrap();
        for (i, &fdi) in fd.iter().enumerate().take(n) {
            let got = results[0].dx(i);
            let scale = got.abs().max(fdi.abs()).max(1.0);
            assert!(
                (got - fdi).abs() <= 1e-6 * scale,
                "seed {seed} dx[{i}]: ad {got} vs fd {fdi}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 2 overran: {elapsed:?}"
    );
    println!("ACCEPTANCE PASS criterion 2: cross-strategy equivalence on 1000 trees ({elapsed:?})");
}

fn nested_sine_count(strategy: EvalStrategy, m: usize, n: usize) -> u64 {
    let x = DualVector::independent(0.4, 0, n).unwrap();
    let mut t = DualVector::constant(0.0);
    let scope = CountScope::new();
    nested_assign(strategy, &x, m, &mut t).unwrap();
    scope.calls()
}

/// Criterion 3: with counting enabled on nested sine M=10, the standard
/// strategy's transcendental count grows at least 5x from N=5 to N=50 while
/// the cached and reverse-mode strategies are exactly N-independent, and
/// cached reverse mode spends at most 2 calls per node at M=20.
#[test]
fn criterion_3_recomputation_elimination() {
    let start = Instant::now();

    let std_5 = nested_sine_count(EvalStrategy::Standard, 10, 5);
    let std_50 = nested_sine_count(EvalStrategy::Standard, 10, 50);
    assert!(
        std_50 >= 5 * std_5,
        "standard: count(N=50) = {std_50} < 5 * count(N=5) = {}",
        5 * std_5
    );

    for s in [
        EvalStrategy::Cached,
        EvalStrategy::Elr,
        EvalStrategy::CachedElr,
    ] {
        let c5 = nested_sine_count(s, 10, 5);
        let c50 = nested_sine_count(s, 10, 50);
        assert_eq!(c5, c50, "{s}: N=5 count {c5} != N=50 count {c50}");
    }

    let celr_20 = nested_sine_count(EvalStrategy::CachedElr, 20, 50);
    assert!(
        celr_20 <= 40,
        "cached ELR at M=20 made {celr_20} calls > 40"
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 3 overran: {elapsed:?}"
    );
    println!(
        "ACCEPTANCE PASS criterion 3: recomputation elimination \
         (std {std_5}->{std_50}, celr M=20: {celr_20} calls, {elapsed:?})"
    );
}

/// Criterion 6: building expression trees performs no catalog evaluations,
/// and the cache pass visits each node exactly once per assignment.
#[test]
fn criterion_6_laziness_and_single_visit() {
    let start = Instant::now();

    // Laziness on the benchmark workload shapes (the reaction kernel's
    // build is covered by the CLI acceptance suite).
    {
        use fad::ex;
        let xs: Vec<DualVector> = (0..20)
            .map(|i| DualVector::independent(1.0 + 0.01 * i as f64, i % 5, 5).unwrap())
            .collect();
        let x = DualVector::independent(0.7, 0, 50).unwrap();
        let scope = CountScope::new();
        let _prod = ex(&xs[0])
            * ex(&xs[1])
            * ex(&xs[2])
            * ex(&xs[3])
            * ex(&xs[4])
            * ex(&xs[5])
            * ex(&xs[6])
            * ex(&xs[7])
            * ex(&xs[8])
            * ex(&xs[9])
            * ex(&xs[10])
            * ex(&xs[11])
            * ex(&xs[12])
            * ex(&xs[13])
            * ex(&xs[14])
            * ex(&xs[15])
            * ex(&xs[16])
            * ex(&xs[17])
            * ex(&xs[18])
            * ex(&xs[19]);
        let _nested = ex(&x)
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
            .sin()
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
        assert_eq!(scope.calls(), 0, "tree construction must evaluate nothing");
    }

    // Laziness and single-visit on 100 generated trees.
    for seed in 0..100u64 {
        let spec = RandomTreeSpec::new(seed + 5000, 6, 3);
        let tree = generate_tree(&spec);
        let env = tree.env();

        let scope = CountScope::new();
        // Building happened in generate_tree (no evaluation); re-validate
        // that merely holding the tree costs nothing.
        assert_eq!(scope.calls(), 0);
        drop(scope);

        for s in [EvalStrategy::Cached, EvalStrategy::CachedElr] {
            tree.root.reset_visits();
            let mut t = DualVector::constant(0.0);
            assign_dyn(s, &mut t, &tree.root, &env).unwrap();
            let mut visits = Vec::new();
            tree.root.visit_counts(&mut visits);
            assert_eq!(visits.len(), tree.root.node_count());
            assert!(
                visits.iter().all(|&v| v == 1),
                "seed {seed} {s}: cache visits {visits:?}"
            );
        }
    }

    assert_eq!(MathCounter::transcendental_calls(), 0);
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 6 overran: {elapsed:?}"
    );
    println!("ACCEPTANCE PASS criterion 6: laziness and single-visit cache pass ({elapsed:?})");
}

/// Criterion 7: for every leaf k of 100 random trees, seeding only that leaf
/// with a unit tangent makes the propagated derivative equal the reverse
/// sweep's partial for slot k.
#[test]
fn criterion_7_elr_layout() {
    let start = Instant::now();
    for seed in 0..100u64 {
        let spec = RandomTreeSpec::new(seed + 9000, 6, 3);
        let tree = generate_tree(&spec);

        // Partials from a unit-seed reverse sweep, laid out left to right.
        let env0 = tree.env_unit_tangent(0);
        tree.root.validate(&env0).unwrap();
        let m = tree.root.num_args();
        // Bookkeeping invariant: num_args equals an independent count of
        // active leaf occurrences.
        assert_eq!(m, tree.root.count_active_leaves(&env0));
        let mut partials = vec![0.0; m];
        tree.root.compute_partials(&env0, 1.0, &mut partials);
        let mut slots = Vec::new();
        tree.root.collect_arg_slots(&env0, &mut slots);
        assert_eq!(slots.len(), m);

        for (k, &slot) in slots.iter().enumerate() {
            let env = tree.env_unit_tangent(slot);
            let d = eval_dyn(EvalStrategy::Elr, &tree.root, &env).unwrap();
            // Repeated leaves share a slot seed, so their partials sum.
            let expected: f64 = slots
                .iter()
                .zip(&partials)
                .filter(|&(&s, _)| s == slot)
                .map(|(_, &p)| p)
                .sum();
            assert_eq!(
                d.dx(0),
                expected,
                "seed {seed} leaf slot {slot} (arg {k}): dx {} vs partial sum {expected}",
                d.dx(0)
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 7 overran: {elapsed:?}"
    );
    println!("ACCEPTANCE PASS criterion 7: reverse-sweep layout property ({elapsed:?})");
}
