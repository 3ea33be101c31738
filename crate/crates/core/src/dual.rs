//! The eager vector forward-mode scalar.
//!
//! A [`DualVector`] carries a value and an array of derivative components,
//! one per independent variable. Each arithmetic operation computes its value
//! and then loops over the components applying the corresponding rule from
//! the catalog in [`crate::ops`] — nothing is deferred. This is both the
//! baseline "no expression templates" strategy and the leaf/result type for
//! all the lazy strategies.
//!
//! A `DualVector` with zero derivative components is *passive*: it
//! contributes its value to an operation but no derivative terms. Plain `f64`
//! constants behave the same way.

use crate::error::AdError;
use crate::ops::OpKind;

/// Components stored inline before a heap-backed dual is required.
pub const INLINE_CAP: usize = 8;

/// How a dual's derivative components are stored.
///
/// `Heap` grows to any component count. `Inline` keeps components in a fixed
/// array inside the value itself — no allocation, but capped at
/// [`INLINE_CAP`] — for workloads whose component count is known to be small.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageMode {
    Heap,
    Inline,
}

#[derive(Debug, Clone, PartialEq)]
enum Deriv {
    Heap(Vec<f64>),
    Inline { len: u8, buf: [f64; INLINE_CAP] },
}

impl Deriv {
    fn new(mode: StorageMode, n: usize) -> Result<Self, AdError> {
        match mode {
            StorageMode::Heap => Ok(Deriv::Heap(vec![0.0; n])),
            StorageMode::Inline => {
                if n > INLINE_CAP {
                    Err(AdError::InlineCapacity { n, cap: INLINE_CAP })
                } else {
                    Ok(Deriv::Inline {
                        len: n as u8,
                        buf: [0.0; INLINE_CAP],
                    })
                }
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Deriv::Heap(v) => v.len(),
            Deriv::Inline { len, .. } => *len as usize,
        }
    }

    fn as_slice(&self) -> &[f64] {
        match self {
            Deriv::Heap(v) => v,
            Deriv::Inline { len, buf } => &buf[..*len as usize],
        }
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        match self {
            Deriv::Heap(v) => v,
            Deriv::Inline { len, buf } => &mut buf[..*len as usize],
        }
    }

    fn resize(&mut self, n: usize) -> Result<(), AdError> {
        match self {
            Deriv::Heap(v) => {
                v.resize(n, 0.0);
                Ok(())
            }
            Deriv::Inline { len, .. } => {
                if n > INLINE_CAP {
                    Err(AdError::InlineCapacity { n, cap: INLINE_CAP })
                } else {
                    *len = n as u8;
                    Ok(())
                }
            }
        }
    }
}

/// A value plus its derivatives with respect to the independent variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    val: f64,
    dx: Deriv,
}

impl DualVector {
    /// A passive value: contributes no derivative terms.
    pub fn constant(value: f64) -> Self {
        DualVector {
            val: value,
            dx: Deriv::Heap(Vec::new()),
        }
    }

    /// The `index`-th of `n` independent variables: `dx[j] = δ_ij`.
    pub fn independent(value: f64, index: usize, n: usize) -> Result<Self, AdError> {
        Self::independent_in(StorageMode::Heap, value, index, n)
    }

    /// [`DualVector::independent`] with an explicit derivative storage mode.
    pub fn independent_in(
        mode: StorageMode,
        value: f64,
        index: usize,
        n: usize,
    ) -> Result<Self, AdError> {
        if index >= n {
            return Err(AdError::SeedIndex { index, n });
        }
        let mut dx = Deriv::new(mode, n)?;
        dx.as_mut_slice()[index] = 1.0;
        Ok(DualVector { val: value, dx })
    }

    /// A dual with explicit derivative components (heap storage).
    pub fn with_derivs(value: f64, dx: &[f64]) -> Self {
        DualVector {
            val: value,
            dx: Deriv::Heap(dx.to_vec()),
        }
    }

    /// An active dual with `n` zero derivative components.
    pub fn zeros(value: f64, n: usize) -> Self {
        DualVector {
            val: value,
            dx: Deriv::Heap(vec![0.0; n]),
        }
    }

    pub fn val(&self) -> f64 {
        self.val
    }

    pub fn set_val(&mut self, v: f64) {
        self.val = v;
    }

    /// Number of derivative components.
    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.len() == 0
    }

    /// Passive duals carry no derivative components.
    pub fn is_passive(&self) -> bool {
        self.dx.len() == 0
    }

    /// The `i`-th derivative component; 0 beyond the stored length, which is
    /// what a passive operand contributes.
    pub fn dx(&self, i: usize) -> f64 {
        self.dx.as_slice().get(i).copied().unwrap_or(0.0)
    }

    pub fn dx_slice(&self) -> &[f64] {
        self.dx.as_slice()
    }

    pub fn set_dx(&mut self, i: usize, v: f64) {
        self.dx.as_mut_slice()[i] = v;
    }

    pub fn storage_mode(&self) -> StorageMode {
        match self.dx {
            Deriv::Heap(_) => StorageMode::Heap,
            Deriv::Inline { .. } => StorageMode::Inline,
        }
    }

    /// Resizes the derivative array in place, keeping the storage mode.
    /// Assignment operators use this so a reused target does not reallocate.
    pub fn resize_dx(&mut self, n: usize) -> Result<(), AdError> {
        self.dx.resize(n)
    }
}

fn result_storage(a: &DualVector, b: Option<&DualVector>) -> StorageMode {
    // Inline only survives if no active operand is heap-backed.
    let mut mode = StorageMode::Inline;
    let mut saw_inline = false;
    for d in std::iter::once(a).chain(b) {
        if d.is_passive() {
            continue;
        }
        match d.storage_mode() {
            StorageMode::Heap => mode = StorageMode::Heap,
            StorageMode::Inline => saw_inline = true,
        }
    }
    if saw_inline && mode == StorageMode::Inline {
        StorageMode::Inline
    } else {
        StorageMode::Heap
    }
}

fn check_sizes(a: &DualVector, b: &DualVector) -> Result<usize, AdError> {
    let (la, lb) = (a.len(), b.len());
    if la != 0 && lb != 0 && la != lb {
        Err(AdError::SizeMismatch {
            left: la,
            right: lb,
        })
    } else {
        Ok(la.max(lb))
    }
}

fn apply_impl(
    op: OpKind,
    a: &DualVector,
    b: Option<&DualVector>,
    strict: bool,
) -> Result<DualVector, AdError> {
    debug_assert_eq!(op.arity(), 1 + b.is_some() as usize);
    match b {
        None => {
            if strict {
                if let Some(reason) = op.domain_violation(a.val, f64::NAN) {
                    return Err(AdError::Domain {
                        op: op.name(),
                        reason,
                    });
                }
            }
            let f = op.eval_unary(a.val);
            let n = a.len();
            let mut out = DualVector {
                val: f,
                dx: Deriv::new(result_storage(a, None), n)?,
            };
            if n > 0 {
                let pa = op.partial_unary(a.val, f);
                for (o, ad) in out.dx.as_mut_slice().iter_mut().zip(a.dx.as_slice()) {
                    *o = pa * ad;
                }
            }
            Ok(out)
        }
        Some(b) => {
            let n = check_sizes(a, b)?;
            if strict {
                if let Some(reason) = op.domain_violation(a.val, b.val) {
                    return Err(AdError::Domain {
                        op: op.name(),
                        reason,
                    });
                }
            }
            let f = op.eval_binary(a.val, b.val);
            let mut out = DualVector {
                val: f,
                dx: Deriv::new(result_storage(a, Some(b)), n)?,
            };
            if n > 0 {
                // A passive operand's term is skipped outright rather than
                // multiplied by zero: its partial may be nonfinite (e.g. the
                // log in pow's exponent rule) and would poison the result.
                let pa = if a.is_passive() {
                    0.0
                } else {
                    op.partial_a(a.val, b.val, f)
                };
                let pb = if b.is_passive() {
                    0.0
                } else {
                    op.partial_b(a.val, b.val, f)
                };
                let odx = out.dx.as_mut_slice();
                match (a.is_passive(), b.is_passive()) {
                    (false, false) => {
                        let pairs = a.dx.as_slice().iter().zip(b.dx.as_slice());
                        for (o, (ad, bd)) in odx.iter_mut().zip(pairs) {
                            *o = pa * ad + pb * bd;
                        }
                    }
                    (false, true) => {
                        for (o, ad) in odx.iter_mut().zip(a.dx.as_slice()) {
                            *o = pa * ad;
                        }
                    }
                    (true, false) => {
                        for (o, bd) in odx.iter_mut().zip(b.dx.as_slice()) {
                            *o = pb * bd;
                        }
                    }
                    (true, true) => {}
                }
            }
            Ok(out)
        }
    }
}

/// Applies one catalog operation eagerly: value rule once, then the chain
/// rule across all derivative components. Domain violations propagate
/// nonfinite values; see [`dual_apply_strict`] for the checked variant.
pub fn dual_apply(
    op: OpKind,
    a: &DualVector,
    b: Option<&DualVector>,
) -> Result<DualVector, AdError> {
    apply_impl(op, a, b, false)
}

/// Like [`dual_apply`] but returns [`AdError::Domain`] when the operands are
/// outside the operation's differentiable domain instead of propagating
/// nonfinite values.
pub fn dual_apply_strict(
    op: OpKind,
    a: &DualVector,
    b: Option<&DualVector>,
) -> Result<DualVector, AdError> {
    apply_impl(op, a, b, true)
}

macro_rules! eager_unary_methods {
    ($($method:ident => $kind:ident),* $(,)?) => {
        impl DualVector {
            $(
                pub fn $method(&self) -> DualVector {
                    dual_apply(OpKind::$kind, self, None).expect("unary op cannot fail")
                }
            )*
        }
    };
}

eager_unary_methods! {
    sin => Sin,
    cos => Cos,
    tan => Tan,
    exp => Exp,
    ln => Log,
    sqrt => Sqrt,
    abs => Abs,
}

impl DualVector {
    pub fn pow(&self, other: &DualVector) -> DualVector {
        dual_apply(OpKind::Pow, self, Some(other)).expect("size mismatch in pow")
    }

    pub fn powf(&self, exponent: f64) -> DualVector {
        self.pow(&DualVector::constant(exponent))
    }

    pub fn max(&self, other: &DualVector) -> DualVector {
        dual_apply(OpKind::Max, self, Some(other)).expect("size mismatch in max")
    }

    pub fn min(&self, other: &DualVector) -> DualVector {
        dual_apply(OpKind::Min, self, Some(other)).expect("size mismatch in min")
    }
}

macro_rules! eager_binop {
    ($trait:ident, $method:ident, $kind:ident) => {
        impl std::ops::$trait<&DualVector> for &DualVector {
            type Output = DualVector;
            fn $method(self, rhs: &DualVector) -> DualVector {
                dual_apply(OpKind::$kind, self, Some(rhs))
                    .expect(concat!("size mismatch in ", stringify!($method)))
            }
        }
        impl std::ops::$trait<f64> for &DualVector {
            type Output = DualVector;
            fn $method(self, rhs: f64) -> DualVector {
                dual_apply(OpKind::$kind, self, Some(&DualVector::constant(rhs)))
                    .expect("constant operand cannot mismatch")
            }
        }
        impl std::ops::$trait<&DualVector> for f64 {
            type Output = DualVector;
            fn $method(self, rhs: &DualVector) -> DualVector {
                dual_apply(OpKind::$kind, &DualVector::constant(self), Some(rhs))
                    .expect("constant operand cannot mismatch")
            }
        }
    };
}

eager_binop!(Add, add, Add);
eager_binop!(Sub, sub, Sub);
eager_binop!(Mul, mul, Mul);
eager_binop!(Div, div, Div);

impl std::ops::Neg for &DualVector {
    type Output = DualVector;
    fn neg(self) -> DualVector {
        dual_apply(OpKind::Neg, self, None).expect("neg cannot fail")
    }
}
