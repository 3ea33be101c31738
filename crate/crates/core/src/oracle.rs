//! Independent correctness oracles and randomized expression generation.
//!
//! Everything here evaluates with plain `f64` arithmetic, separate from the
//! differentiation code paths it is used to check: analytic gradients for the
//! two benchmark functions, central finite differences, and a seeded random
//! tree generator whose leaf values are rejection-sampled into per-operation
//! safe domains so that equivalence tests never run into domain boundaries
//! or kinks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual::DualVector;
use crate::dyntree::{DynKind, DynNode};
use crate::error::AdError;
use crate::ops::OpKind;

/// Central-difference step: cbrt(machine epsilon) scaled by the operand,
/// balancing truncation against round-off.
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central finite difference of `f` at `x` along coordinate `i`.
pub fn finite_difference<F>(f: F, x: &[f64], i: usize) -> Result<f64, AdError>
where
    F: Fn(&[f64]) -> f64,
{
    let h = fd_step(x[i]);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    let (fp, fm) = (f(&xp), f(&xm));
    if !fp.is_finite() || !fm.is_finite() {
        return Err(AdError::Oracle(format!(
            "nonfinite probe values {fp} / {fm} at coordinate {i}"
        )));
    }
    Ok((fp - fm) / (2.0 * h))
}

/// Value and gradient of `y = Π x_i`: each gradient component is the product
/// of all other factors, computed directly.
pub fn analytic_gradient_mult(x: &[f64]) -> (f64, Vec<f64>) {
    assert!(!x.is_empty());
    let y = x.iter().product();
    let g = (0..x.len())
        .map(|i| {
            x.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .product()
        })
        .collect();
    (y, g)
}

/// [`analytic_gradient_mult`] folded onto `n` independents under the cyclic
/// seeding convention (factor `i` is independent `i mod n`): the gradient
/// w.r.t. independent `j` sums the per-factor gradients with `i ≡ j`.
pub fn cycled_mult_gradient(values: &[f64], n: usize) -> (f64, Vec<f64>) {
    let (y, g) = analytic_gradient_mult(values);
    let mut gn = vec![0.0; n];
    for (i, gi) in g.into_iter().enumerate() {
        gn[i % n] += gi;
    }
    (y, gn)
}

/// Value and derivative of `y = sin(sin(...sin(x)))`, `m` applications:
/// with s_0 = x and s_{k+1} = sin(s_k), the derivative is Π cos(s_k).
pub fn analytic_gradient_nested(x: f64, m: usize) -> (f64, f64) {
    assert!(m >= 1);
    let mut s = x;
    let mut d = 1.0;
    for _ in 0..m {
        d *= s.cos();
        s = s.sin();
    }
    (s, d)
}

/// Shape and sampling parameters for [`generate_tree`]. The same spec always
/// produces the same tree and leaf values.
#[derive(Debug, Clone)]
pub struct RandomTreeSpec {
    pub max_depth: usize,
    /// Sampling weight per operation; zero-weight ops never appear.
    pub op_weights: Vec<(OpKind, f64)>,
    pub n_components: usize,
    /// Interval the independent values are drawn from.
    pub input_domain: (f64, f64),
    pub rng_seed: u64,
}

impl RandomTreeSpec {
    pub fn new(rng_seed: u64, max_depth: usize, n_components: usize) -> Self {
        RandomTreeSpec {
            max_depth,
            op_weights: default_op_weights(),
            n_components,
            input_domain: (0.3, 1.4),
            rng_seed,
        }
    }
}

/// Full-catalog weights, biased toward arithmetic so trees stay
/// well-conditioned.
pub fn default_op_weights() -> Vec<(OpKind, f64)> {
    vec![
        (OpKind::Add, 3.0),
        (OpKind::Sub, 2.0),
        (OpKind::Mul, 3.0),
        (OpKind::Div, 1.0),
        (OpKind::Pow, 0.5),
        (OpKind::Max, 1.0),
        (OpKind::Min, 1.0),
        (OpKind::Neg, 1.0),
        (OpKind::Sin, 2.0),
        (OpKind::Cos, 1.0),
        (OpKind::Tan, 0.5),
        (OpKind::Exp, 1.0),
        (OpKind::Log, 1.0),
        (OpKind::Sqrt, 1.0),
        (OpKind::Abs, 1.0),
    ]
}

/// A generated expression plus the sampled values of its independents.
///
/// Leaf slot `s` is seeded as independent `s mod n_components`; slots that
/// share an independent share its value, so the tree is a well-defined
/// function of the independents and finite differences apply.
#[derive(Debug)]
pub struct GeneratedTree {
    pub root: DynNode,
    /// One value per independent actually used (min of component count and
    /// leaf count, at least 1).
    pub indep_values: Vec<f64>,
    pub n_components: usize,
    pub n_leaves: usize,
}

/// Per-operation operand constraints the sampled values must satisfy, with
/// margins wide enough that finite-difference probes stay in-domain:
///
/// * div: |denominator| ≥ 0.2
/// * log: operand ≥ 0.15        * sqrt: operand ≥ 0.1
/// * pow: base in [0.2, 4], |exponent| ≤ 3
/// * tan: |operand| ≤ 1.3       * exp: operand ≤ 4
/// * abs: |operand| ≥ 0.05 (away from the kink)
/// * max/min: |a − b| ≥ 0.02 (away from ties)
/// * every intermediate: finite, magnitude ≤ 1e4
fn checked_eval(node: &DynNode, leaf_value: &dyn Fn(usize) -> f64) -> Option<f64> {
    let v = match &node.kind {
        DynKind::Leaf(slot) => leaf_value(*slot),
        DynKind::Const(c) => *c,
        DynKind::Unary(op, a) => {
            let av = checked_eval(a, leaf_value)?;
            let ok = match op {
                OpKind::Tan => av.abs() <= 1.3,
                OpKind::Exp => av <= 4.0,
                OpKind::Log => av >= 0.15,
                OpKind::Sqrt => av >= 0.1,
                OpKind::Abs => av.abs() >= 0.05,
                _ => true,
            };
            if !ok {
                return None;
            }
            reference_unary(*op, av)
        }
        DynKind::Binary(op, a, b) => {
            let av = checked_eval(a, leaf_value)?;
            let bv = checked_eval(b, leaf_value)?;
            let ok = match op {
                OpKind::Div => bv.abs() >= 0.2,
                OpKind::Pow => (0.2..=4.0).contains(&av) && bv.abs() <= 3.0,
                OpKind::Max | OpKind::Min => (av - bv).abs() >= 0.02,
                _ => true,
            };
            if !ok {
                return None;
            }
            reference_binary(*op, av, bv)
        }
    };
    (v.is_finite() && v.abs() <= 1e4).then_some(v)
}

// Plain-arithmetic rules, deliberately separate from the catalog the
// differentiation strategies use.
fn reference_unary(op: OpKind, a: f64) -> f64 {
    match op {
        OpKind::Neg => -a,
        OpKind::Sin => a.sin(),
        OpKind::Cos => a.cos(),
        OpKind::Tan => a.tan(),
        OpKind::Exp => a.exp(),
        OpKind::Log => a.ln(),
        OpKind::Sqrt => a.sqrt(),
        OpKind::Abs => a.abs(),
        _ => unreachable!(),
    }
}

fn reference_binary(op: OpKind, a: f64, b: f64) -> f64 {
    match op {
        OpKind::Add => a + b,
        OpKind::Sub => a - b,
        OpKind::Mul => a * b,
        OpKind::Div => a / b,
        OpKind::Pow => a.powf(b),
        OpKind::Max => {
            if a >= b {
                a
            } else {
                b
            }
        }
        OpKind::Min => {
            if a <= b {
                a
            } else {
                b
            }
        }
        _ => unreachable!(),
    }
}

fn gen_shape(
    rng: &mut ChaCha8Rng,
    depth_left: usize,
    root: bool,
    next_slot: &mut usize,
    ops: &[(OpKind, f64)],
    dist: &WeightedIndex<f64>,
) -> DynNode {
    // Leaves at the depth limit, and early with small probability so trees
    // vary in shape, occasionally a passive constant. The root never stops
    // early, so generated expressions always contain an operation.
    if depth_left == 0 || (!root && rng.gen::<f64>() < 0.25) {
        if rng.gen::<f64>() < 0.15 {
            return DynNode::constant(rng.gen_range(0.4..1.6));
        }
        let slot = *next_slot;
        *next_slot += 1;
        return DynNode::leaf(slot);
    }
    let op = ops[dist.sample(rng)].0;
    if op.arity() == 1 {
        DynNode::unary(
            op,
            gen_shape(rng, depth_left - 1, false, next_slot, ops, dist),
        )
    } else {
        let a = gen_shape(rng, depth_left - 1, false, next_slot, ops, dist);
        let b = gen_shape(rng, depth_left - 1, false, next_slot, ops, dist);
        DynNode::binary(op, a, b)
    }
}

/// Deterministically generates a random expression tree together with leaf
/// values inside every operation's safe domain.
///
/// Shapes whose sampled values violate a domain constraint are resampled;
/// shapes that keep failing are discarded and regenerated. All draws come
/// from one seeded stream, so the result is a pure function of the spec. As
/// a last resort the tree degenerates to a single leaf, which is always
/// valid.
pub fn generate_tree(spec: &RandomTreeSpec) -> GeneratedTree {
    assert!(spec.n_components >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let ops: Vec<(OpKind, f64)> = spec
        .op_weights
        .iter()
        .filter(|(_, w)| *w > 0.0)
        .cloned()
        .collect();
    let dist = WeightedIndex::new(ops.iter().map(|(_, w)| *w)).expect("no positive op weights");
    let (lo, hi) = spec.input_domain;

    for _shape_attempt in 0..64 {
        let mut next_slot = 0;
        let root = gen_shape(&mut rng, spec.max_depth, true, &mut next_slot, &ops, &dist);
        let n_leaves = next_slot;
        if n_leaves == 0 {
            continue;
        }
        // Slots sharing an independent share its value; slot s maps to
        // independent s mod n_components, which always lands inside z.
        let n_indep = n_leaves.min(spec.n_components);
        for _value_attempt in 0..200 {
            let z: Vec<f64> = (0..n_indep).map(|_| rng.gen_range(lo..hi)).collect();
            let leaf_value = |slot: usize| z[slot % spec.n_components];
            if checked_eval(&root, &leaf_value).is_some() {
                return GeneratedTree {
                    root,
                    indep_values: z,
                    n_components: spec.n_components,
                    n_leaves,
                };
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed ^ 0x5eed);
    GeneratedTree {
        root: DynNode::leaf(0),
        indep_values: vec![rng.gen_range(lo..hi)],
        n_components: spec.n_components,
        n_leaves: 1,
    }
}

impl GeneratedTree {
    fn indep_of_slot(&self, slot: usize) -> usize {
        slot % self.n_components
    }

    fn leaf_value(&self, slot: usize) -> f64 {
        self.indep_values[self.indep_of_slot(slot)]
    }

    /// Environment with every leaf slot seeded as its independent variable.
    pub fn env(&self) -> Vec<DualVector> {
        (0..self.n_leaves)
            .map(|slot| {
                DualVector::independent(
                    self.leaf_value(slot),
                    self.indep_of_slot(slot),
                    self.n_components,
                )
                .expect("seed index in range by construction")
            })
            .collect()
    }

    /// Environment with a single derivative component carrying a unit
    /// tangent on leaf `k` and zero on every other leaf.
    pub fn env_unit_tangent(&self, k: usize) -> Vec<DualVector> {
        (0..self.n_leaves)
            .map(|slot| {
                let t = if slot == k { 1.0 } else { 0.0 };
                DualVector::with_derivs(self.leaf_value(slot), &[t])
            })
            .collect()
    }

    /// Reference value via plain arithmetic.
    pub fn reference_value(&self) -> f64 {
        let leaf_value = |slot: usize| self.leaf_value(slot);
        checked_eval(&self.root, &leaf_value).expect("generated tree left its safe domain")
    }

    /// Reference gradient w.r.t. the independents via central differences.
    /// Components whose independent feeds no leaf are exactly 0.
    pub fn fd_gradient(&self) -> Result<Vec<f64>, AdError> {
        let n_indep = self.indep_values.len();
        let eval_at = |z: &[f64]| {
            let leaf_value = |slot: usize| z[self.indep_of_slot(slot)];
            checked_eval(&self.root, &leaf_value).unwrap_or(f64::NAN)
        };
        let mut g = vec![0.0; self.n_components];
        for (j, gj) in g.iter_mut().enumerate().take(n_indep) {
            *gj = finite_difference(eval_at, &self.indep_values, j)?;
        }
        Ok(g)
    }
}
