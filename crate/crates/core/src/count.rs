//! Transcendental-call instrumentation.
//!
//! Every evaluation strategy routes its transcendental math (`sin`, `cos`,
//! `tan`, `exp`, `log`, `sqrt`, `pow`) through the shims in [`tmath`], so the
//! amount of redundant value computation a strategy performs can be measured
//! exactly. Counts are kept per thread; a single-threaded run therefore sees
//! exact totals, and parallel test threads never interfere with each other.

use std::cell::Cell;

thread_local! {
    static CALLS: Cell<u64> = const { Cell::new(0) };
    static ENABLED: Cell<bool> = const { Cell::new(false) };
}

/// Per-thread counter of transcendental math calls.
///
/// Counting is off by default; when disabled the shims cost a single
/// thread-local flag check and [`MathCounter::transcendental_calls`] reports 0.
pub struct MathCounter;

impl MathCounter {
    /// Turns counting on for the current thread.
    pub fn enable() {
        ENABLED.with(|e| e.set(true));
    }

    /// Turns counting off for the current thread.
    pub fn disable() {
        ENABLED.with(|e| e.set(false));
    }

    /// Sets the current thread's count back to 0.
    pub fn reset() {
        CALLS.with(|c| c.set(0));
    }

    /// Number of transcendental evaluations since the last reset, or 0 while
    /// counting is disabled.
    pub fn transcendental_calls() -> u64 {
        if ENABLED.with(|e| e.get()) {
            CALLS.with(|c| c.get())
        } else {
            0
        }
    }

    pub fn is_enabled() -> bool {
        ENABLED.with(|e| e.get())
    }
}

/// Enables and resets the counter for the current scope, restoring the
/// previous enabled state on drop.
pub struct CountScope {
    was_enabled: bool,
}

impl CountScope {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        let was_enabled = MathCounter::is_enabled();
        MathCounter::enable();
        MathCounter::reset();
        CountScope { was_enabled }
    }

    /// Calls recorded so far in this scope.
    pub fn calls(&self) -> u64 {
        MathCounter::transcendental_calls()
    }
}

impl Drop for CountScope {
    fn drop(&mut self) {
        if !self.was_enabled {
            MathCounter::disable();
        }
    }
}

#[inline]
fn bump() {
    ENABLED.with(|e| {
        if e.get() {
            CALLS.with(|c| c.set(c.get() + 1));
        }
    });
}

/// Counted wrappers around the `f64` transcendental functions.
pub(crate) mod tmath {
    use super::bump;

    #[inline]
    pub fn sin(x: f64) -> f64 {
        bump();
        x.sin()
    }

    #[inline]
    pub fn cos(x: f64) -> f64 {
        bump();
        x.cos()
    }

    #[inline]
    pub fn tan(x: f64) -> f64 {
        bump();
        x.tan()
    }

    #[inline]
    pub fn exp(x: f64) -> f64 {
        bump();
        x.exp()
    }

    #[inline]
    pub fn ln(x: f64) -> f64 {
        bump();
        x.ln()
    }

    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        bump();
        x.sqrt()
    }

    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        bump();
        x.powf(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_counter_reports_zero() {
        MathCounter::disable();
        let _ = tmath::sin(1.0);
        assert_eq!(MathCounter::transcendental_calls(), 0);
    }

    #[test]
    fn scope_counts_and_restores() {
        {
            let scope = CountScope::new();
            let _ = tmath::sin(0.3);
            let _ = tmath::exp(0.3);
            let _ = 2.0 * 3.0; // plain arithmetic is not counted
            assert_eq!(scope.calls(), 2);
        }
        assert!(!MathCounter::is_enabled());
    }

    #[test]
    fn reset_zeroes_the_count() {
        let _scope = CountScope::new();
        let _ = tmath::sqrt(2.0);
        assert_eq!(MathCounter::transcendental_calls(), 1);
        MathCounter::reset();
        assert_eq!(MathCounter::transcendental_calls(), 0);
    }

    #[test]
    fn count_is_monotone_while_enabled() {
        let _scope = CountScope::new();
        let mut last = 0;
        for _ in 0..5 {
            let _ = tmath::cos(0.1);
            let now = MathCounter::transcendental_calls();
            assert!(now > last);
            last = now;
        }
    }
}
