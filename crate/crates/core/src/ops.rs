//! The operation catalog: one value rule and one partial-derivative rule per
//! argument for every supported operation.
//!
//! All five evaluation strategies differentiate through this single catalog,
//! so their results can only differ by the order in which the same terms are
//! combined. Partial rules come in two flavors: `partial_*` takes the already
//! computed operation value `f` (several rules reuse it, e.g. `exp` and
//! `sqrt`), while the `*_fresh` variants recompute whatever they need. The
//! fresh variants are what the standard lazy strategy calls once per
//! derivative component, which is exactly the redundant work the caching and
//! reverse-mode strategies remove.

use crate::count::tmath;

/// Operation tag. `Neg` through `Abs` are unary, the rest binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Max,
    Min,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

pub const ALL_OPS: [OpKind; 15] = [
    OpKind::Add,
    OpKind::Sub,
    OpKind::Mul,
    OpKind::Div,
    OpKind::Pow,
    OpKind::Max,
    OpKind::Min,
    OpKind::Neg,
    OpKind::Sin,
    OpKind::Cos,
    OpKind::Tan,
    OpKind::Exp,
    OpKind::Log,
    OpKind::Sqrt,
    OpKind::Abs,
];

impl OpKind {
    pub fn arity(self) -> usize {
        match self {
            OpKind::Add
            | OpKind::Sub
            | OpKind::Mul
            | OpKind::Div
            | OpKind::Pow
            | OpKind::Max
            | OpKind::Min => 2,
            _ => 1,
        }
    }

    /// Whether the value rule itself calls a counted transcendental.
    pub fn is_transcendental(self) -> bool {
        matches!(
            self,
            OpKind::Pow
                | OpKind::Sin
                | OpKind::Cos
                | OpKind::Tan
                | OpKind::Exp
                | OpKind::Log
                | OpKind::Sqrt
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Div => "div",
            OpKind::Pow => "pow",
            OpKind::Max => "max",
            OpKind::Min => "min",
            OpKind::Neg => "neg",
            OpKind::Sin => "sin",
            OpKind::Cos => "cos",
            OpKind::Tan => "tan",
            OpKind::Exp => "exp",
            OpKind::Log => "log",
            OpKind::Sqrt => "sqrt",
            OpKind::Abs => "abs",
        }
    }

    /// Value rule for unary operations.
    pub fn eval_unary(self, a: f64) -> f64 {
        match self {
            OpKind::Neg => -a,
            OpKind::Sin => tmath::sin(a),
            OpKind::Cos => tmath::cos(a),
            OpKind::Tan => tmath::tan(a),
            OpKind::Exp => tmath::exp(a),
            OpKind::Log => tmath::ln(a),
            OpKind::Sqrt => tmath::sqrt(a),
            OpKind::Abs => a.abs(),
            _ => unreachable!("{} is not unary", self.name()),
        }
    }

    /// Value rule for binary operations.
    pub fn eval_binary(self, a: f64, b: f64) -> f64 {
        match self {
            OpKind::Add => a + b,
            OpKind::Sub => a - b,
            OpKind::Mul => a * b,
            OpKind::Div => a / b,
            OpKind::Pow => tmath::powf(a, b),
            // Ties take the first operand, matching the tie rule of the
            // partials below (f64::max would prefer the non-NaN operand).
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
            _ => unreachable!("{} is not binary", self.name()),
        }
    }

    /// ∂f/∂a for a unary op, given the operand `a` and the value `f`.
    pub fn partial_unary(self, a: f64, f: f64) -> f64 {
        match self {
            OpKind::Neg => -1.0,
            OpKind::Sin => tmath::cos(a),
            OpKind::Cos => -tmath::sin(a),
            OpKind::Tan => 1.0 + f * f,
            OpKind::Exp => f,
            OpKind::Log => 1.0 / a,
            // 1/(2*sqrt(a)); at a = 0 this propagates inf.
            OpKind::Sqrt => 0.5 / f,
            // Derivative of |a| at 0 is defined as 0.
            OpKind::Abs => {
                if a > 0.0 {
                    1.0
                } else if a < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            _ => unreachable!("{} is not unary", self.name()),
        }
    }

    /// ∂f/∂a for a unary op when the value has not been computed.
    pub fn partial_unary_fresh(self, a: f64) -> f64 {
        match self {
            OpKind::Tan => {
                let t = tmath::tan(a);
                1.0 + t * t
            }
            OpKind::Exp => tmath::exp(a),
            OpKind::Sqrt => 0.5 / tmath::sqrt(a),
            _ => self.partial_unary(a, f64::NAN),
        }
    }

    /// ∂f/∂a for a binary op, given both operands and the value `f`.
    pub fn partial_a(self, a: f64, b: f64, f: f64) -> f64 {
        match self {
            OpKind::Add | OpKind::Sub => 1.0,
            OpKind::Mul => b,
            OpKind::Div => 1.0 / b,
            // b*a^(b-1) written as b*f/a to reuse the value. The a = 0 case
            // is handled explicitly: 0 for b > 1 (the smooth case), NaN
            // otherwise so nonfinite propagation applies.
            OpKind::Pow => {
                if a == 0.0 {
                    if b > 1.0 {
                        0.0
                    } else {
                        f64::NAN
                    }
                } else {
                    b * f / a
                }
            }
            OpKind::Max => {
                if a >= b {
                    1.0
                } else {
                    0.0
                }
            }
            OpKind::Min => {
                if a <= b {
                    1.0
                } else {
                    0.0
                }
            }
            _ => unreachable!("{} is not binary", self.name()),
        }
    }

    /// ∂f/∂b for a binary op, given both operands and the value `f`.
    pub fn partial_b(self, a: f64, b: f64, f: f64) -> f64 {
        match self {
            OpKind::Add => 1.0,
            OpKind::Sub => -1.0,
            OpKind::Mul => a,
            OpKind::Div => -f / b,
            OpKind::Pow => f * tmath::ln(a),
            // Tie goes to the first operand, so b gets 0 there.
            OpKind::Max => {
                if a >= b {
                    0.0
                } else {
                    1.0
                }
            }
            OpKind::Min => {
                if a <= b {
                    0.0
                } else {
                    1.0
                }
            }
            _ => unreachable!("{} is not binary", self.name()),
        }
    }

    /// ∂f/∂a for a binary op when the value has not been computed.
    pub fn partial_a_fresh(self, a: f64, b: f64) -> f64 {
        match self {
            OpKind::Pow => self.partial_a(a, b, tmath::powf(a, b)),
            _ => self.partial_a(a, b, f64::NAN),
        }
    }

    /// ∂f/∂b for a binary op when the value has not been computed.
    pub fn partial_b_fresh(self, a: f64, b: f64) -> f64 {
        match self {
            OpKind::Div => -a / (b * b),
            OpKind::Pow => self.partial_b(a, b, tmath::powf(a, b)),
            _ => self.partial_b(a, b, f64::NAN),
        }
    }

    /// Strict-mode domain check; returns the violation description if the
    /// operands are outside the operation's differentiable domain.
    pub(crate) fn domain_violation(self, a: f64, b: f64) -> Option<&'static str> {
        match self {
            OpKind::Div if b == 0.0 => Some("division by zero"),
            OpKind::Log if a <= 0.0 => Some("log of a non-positive value"),
            OpKind::Sqrt if a < 0.0 => Some("sqrt of a negative value"),
            OpKind::Pow if a < 0.0 && b.fract() != 0.0 => {
                Some("negative base with non-integer exponent")
            }
            OpKind::Pow if a == 0.0 && b <= 1.0 => Some("zero base with exponent <= 1"),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent central-difference check of every partial rule. Step per
    // the shared policy: cbrt(machine epsilon) scaled by the operand.
    fn fd_step(x: f64) -> f64 {
        f64::EPSILON.cbrt() * x.abs().max(1.0)
    }

    fn fd_unary(op: OpKind, a: f64) -> f64 {
        let h = fd_step(a);
        (op.eval_unary(a + h) - op.eval_unary(a - h)) / (2.0 * h)
    }

    fn fd_binary_a(op: OpKind, a: f64, b: f64) -> f64 {
        let h = fd_step(a);
        (op.eval_binary(a + h, b) - op.eval_binary(a - h, b)) / (2.0 * h)
    }

    fn fd_binary_b(op: OpKind, a: f64, b: f64) -> f64 {
        let h = fd_step(b);
        (op.eval_binary(a, b + h) - op.eval_binary(a, b - h)) / (2.0 * h)
    }

    fn assert_rel(actual: f64, expected: f64, rtol: f64) {
        let scale = actual.abs().max(expected.abs()).max(1.0);
        assert!(
            (actual - expected).abs() <= rtol * scale,
            "got {actual}, expected {expected} (rtol {rtol})"
        );
    }

    // Smooth sample points inside every op's domain, away from kinks and
    // branch points.
    fn sample_points() -> Vec<(f64, f64)> {
        vec![
            (0.731, 1.412),
            (1.25, 0.57),
            (2.04, 2.96),
            (0.4, 0.9),
            (1.9, 1.1),
        ]
    }

    #[test]
    fn partials_match_finite_differences() {
        for op in ALL_OPS {
            for &(a, b) in &sample_points() {
                if op.arity() == 1 {
                    let f = op.eval_unary(a);
                    assert_rel(fd_unary(op, a), op.partial_unary(a, f), 1e-6);
                    assert_rel(fd_unary(op, a), op.partial_unary_fresh(a), 1e-6);
                } else {
                    let f = op.eval_binary(a, b);
                    assert_rel(fd_binary_a(op, a, b), op.partial_a(a, b, f), 1e-6);
                    assert_rel(fd_binary_b(op, a, b), op.partial_b(a, b, f), 1e-6);
                    assert_rel(fd_binary_a(op, a, b), op.partial_a_fresh(a, b), 1e-6);
                    assert_rel(fd_binary_b(op, a, b), op.partial_b_fresh(a, b), 1e-6);
                }
            }
        }
    }

    #[test]
    fn abs_at_zero_has_zero_derivative() {
        assert_eq!(OpKind::Abs.partial_unary(0.0, 0.0), 0.0);
    }

    #[test]
    fn max_min_ties_take_first_operand() {
        assert_eq!(OpKind::Max.partial_a(2.0, 2.0, 2.0), 1.0);
        assert_eq!(OpKind::Max.partial_b(2.0, 2.0, 2.0), 0.0);
        assert_eq!(OpKind::Min.partial_a(2.0, 2.0, 2.0), 1.0);
        assert_eq!(OpKind::Min.partial_b(2.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn pow_edge_at_zero_base() {
        // d/da a^b at a = 0 is 0 for b > 1, nonfinite otherwise.
        assert_eq!(OpKind::Pow.partial_a(0.0, 2.0, 0.0), 0.0);
        assert!(OpKind::Pow.partial_a(0.0, 0.5, 0.0).is_nan());
        assert!(OpKind::Pow.partial_a(0.0, 1.0, 0.0).is_nan());
    }

    #[test]
    fn nonfinite_propagation_by_default() {
        assert!(OpKind::Log.eval_unary(-1.0).is_nan());
        assert!(OpKind::Sqrt.eval_unary(-4.0).is_nan());
        assert!(OpKind::Div.eval_binary(1.0, 0.0).is_infinite());
    }

    #[test]
    fn transcendental_value_rules_are_counted() {
        use crate::count::CountScope;
        let scope = CountScope::new();
        let mut expected = 0;
        for op in ALL_OPS {
            if op.arity() == 1 {
                let _ = op.eval_unary(0.8);
            } else {
                let _ = op.eval_binary(0.8, 1.3);
            }
            if op.is_transcendental() {
                expected += 1;
            }
        }
        assert_eq!(scope.calls(), expected);
    }

    #[test]
    fn partial_call_costs_match_the_rules() {
        use crate::count::{CountScope, MathCounter};
        // (op, calls made by partial_unary given f, calls by fresh variant)
        let unary_costs = [
            (OpKind::Sin, 1, 1),
            (OpKind::Cos, 1, 1),
            (OpKind::Tan, 0, 1),
            (OpKind::Exp, 0, 1),
            (OpKind::Log, 0, 0),
            (OpKind::Sqrt, 0, 1),
            (OpKind::Abs, 0, 0),
            (OpKind::Neg, 0, 0),
        ];
        for (op, with_f, fresh) in unary_costs {
            let f = op.eval_unary(0.8);
            let scope = CountScope::new();
            let _ = op.partial_unary(0.8, f);
            assert_eq!(scope.calls(), with_f, "{} given f", op.name());
            MathCounter::reset();
            let _ = op.partial_unary_fresh(0.8);
            assert_eq!(scope.calls(), fresh, "{} fresh", op.name());
        }
        let scope = CountScope::new();
        let f = OpKind::Pow.eval_binary(1.3, 2.1);
        assert_eq!(scope.calls(), 1);
        MathCounter::reset();
        let _ = OpKind::Pow.partial_a(1.3, 2.1, f);
        assert_eq!(scope.calls(), 0);
        MathCounter::reset();
        let _ = OpKind::Pow.partial_b(1.3, 2.1, f);
        assert_eq!(scope.calls(), 1); // the ln
    }
}
