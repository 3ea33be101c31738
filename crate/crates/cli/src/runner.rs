//! Per-workload benchmark runners.
//!
//! Each runner times the differentiated evaluation and its undifferentiated
//! `f64` baseline under identical batching, reporting the scaled time
//! `t_deriv / (t_base * N)` — the dimensionless cost per derivative
//! component. Tree construction happens inside the timed region: building
//! the expression is part of what an assignment statement costs.
//!
//! Transcendental counts are taken from one separate instrumented
//! evaluation when requested, so counting never perturbs the timings.

use anyhow::Context;
use fad::count::CountScope;
use fad::workloads::{nested_assign, nested_value, product_assign, product_inputs, product_value};
use fad::{DualVector, EvalStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::KernelSpec;
use crate::records::{BenchRecord, Workload};
use crate::timing::{measure_pair, Measurement, TimingConfig};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub reps: usize,
    pub seed: u64,
    pub count_transcendentals: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            reps: 30,
            seed: 12345,
            count_transcendentals: false,
        }
    }
}

impl RunConfig {
    fn timing(&self) -> TimingConfig {
        TimingConfig::with_samples(self.reps)
    }

    fn rng(&self, workload: Workload, strategy: EvalStrategy, m: usize, n: usize) -> ChaCha8Rng {
        // One input draw per run, decorrelated across grid points but not
        // across strategies: every strategy sees identical inputs.
        let tag = match workload {
            Workload::Mult => 1u64,
            Workload::Nested => 2,
            Workload::Kernel => 3,
        };
        let _ = strategy;
        ChaCha8Rng::seed_from_u64(self.seed ^ (tag << 56) ^ ((m as u64) << 28) ^ n as u64)
    }
}

pub struct BenchOutput {
    pub record: BenchRecord,
    pub checksum: f64,
}

fn finish(
    workload: Workload,
    strategy: EvalStrategy,
    m: usize,
    n: usize,
    deriv: Measurement,
    base: Measurement,
    count: u64,
) -> BenchOutput {
    BenchOutput {
        record: BenchRecord::new(
            workload,
            strategy,
            m,
            n,
            deriv.per_eval_s,
            base.per_eval_s,
            count,
        ),
        checksum: deriv.checksum + base.checksum,
    }
}

/// Times `y = x_1 * ... * x_M` with N derivative components; factor `i` is
/// seeded as independent `i mod N`, values drawn once per run from
/// [0.5, 1.5].
pub fn run_mult_bench(
    strategy: EvalStrategy,
    m: usize,
    n: usize,
    cfg: &RunConfig,
) -> anyhow::Result<BenchOutput> {
    let mut rng = cfg.rng(Workload::Mult, strategy, m, n);
    let values: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
    let xs = product_inputs(&values, n);

    let mut target = DualVector::constant(0.0);
    product_assign(strategy, &xs, &mut target)
        .with_context(|| format!("mult workload, strategy {strategy}, M={m}, N={n}"))?;

    let count = if cfg.count_transcendentals {
        let scope = CountScope::new();
        product_assign(strategy, &xs, &mut target)?;
        scope.calls()
    } else {
        0
    };

    let (deriv, base) = measure_pair(
        || {
            product_assign(strategy, &xs, &mut target).expect("validated above");
            target.val() + target.dx(0)
        },
        || product_value(&values),
        &cfg.timing(),
    )?;
    Ok(finish(Workload::Mult, strategy, m, n, deriv, base, count))
}

/// Times the M-fold nested sine; x is the first of N independents, drawn
/// once per run from [0.5, 1.5].
pub fn run_nested_bench(
    strategy: EvalStrategy,
    m: usize,
    n: usize,
    cfg: &RunConfig,
) -> anyhow::Result<BenchOutput> {
    let mut rng = cfg.rng(Workload::Nested, strategy, m, n);
    let x0: f64 = rng.gen_range(0.5..1.5);
    let x = DualVector::independent(x0, 0, n)?;

    let mut target = DualVector::constant(0.0);
    nested_assign(strategy, &x, m, &mut target)
        .with_context(|| format!("nested workload, strategy {strategy}, M={m}, N={n}"))?;

    let count = if cfg.count_transcendentals {
        let scope = CountScope::new();
        nested_assign(strategy, &x, m, &mut target)?;
        scope.calls()
    } else {
        0
    };

    let (deriv, base) = measure_pair(
        || {
            nested_assign(strategy, &x, m, &mut target).expect("validated above");
            target.val() + target.dx(0)
        },
        || nested_value(x0, m),
        &cfg.timing(),
    )?;
    Ok(finish(Workload::Nested, strategy, m, n, deriv, base, count))
}

/// Times the element-residual Jacobian of the reaction/transport kernel:
/// all unknowns seeded as independents, baseline is the plain residual.
pub fn run_kernel_bench(
    strategy: EvalStrategy,
    spec: &KernelSpec,
    cfg: &RunConfig,
) -> anyhow::Result<BenchOutput> {
    spec.validate()?;
    let n = spec.n_unknowns;
    let mut rng = cfg.rng(Workload::Kernel, strategy, n, n);
    let state = spec.sample_state(&mut rng)?;
    let duals = spec.seed_state(&state);

    let mut out: Vec<DualVector> = Vec::new();
    let mut acc = DualVector::constant(0.0);
    let mut tmp = DualVector::constant(0.0);
    let run_once = |out: &mut Vec<DualVector>,
                    acc: &mut DualVector,
                    tmp: &mut DualVector|
     -> anyhow::Result<()> {
        if strategy == EvalStrategy::Eager {
            spec.residual_eager(&duals, out);
            Ok(())
        } else {
            spec.residual_lazy(strategy, &duals, out, acc, tmp)
        }
    };
    run_once(&mut out, &mut acc, &mut tmp)
        .with_context(|| format!("kernel workload, strategy {strategy}, N={n}"))?;

    let count = if cfg.count_transcendentals {
        let scope = CountScope::new();
        run_once(&mut out, &mut acc, &mut tmp)?;
        scope.calls()
    } else {
        0
    };

    let mut base_out = vec![0.0; n];
    let (deriv, base) = measure_pair(
        || {
            run_once(&mut out, &mut acc, &mut tmp).expect("validated above");
            out[0].val() + out[n - 1].dx(0)
        },
        || {
            spec.residual_f64(&state, &mut base_out);
            base_out[0] + base_out[n - 1]
        },
        &cfg.timing(),
    )?;
    Ok(finish(Workload::Kernel, strategy, n, n, deriv, base, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig {
            reps: 3,
            seed: 7,
            count_transcendentals: true,
        }
    }

    #[test]
    fn mult_smoke_measurement_is_positive_and_correct() {
        let out = run_mult_bench(EvalStrategy::Eager, 1, 1, &quick()).unwrap();
        let r = &out.record;
        assert!(r.scaled_time > 0.0);
        assert!(r.t_deriv_s > 0.0 && r.t_base_s > 0.0);
        assert_eq!(r.scaled_time, r.t_deriv_s / (r.t_base_s * r.n as f64));
        assert_eq!(r.transcendental_count, 0); // products are not transcendental
    }

    #[test]
    fn nested_counts_follow_the_strategy() {
        let cfg = quick();
        let std = run_nested_bench(EvalStrategy::Standard, 10, 5, &cfg).unwrap();
        let cet = run_nested_bench(EvalStrategy::Cached, 10, 5, &cfg).unwrap();
        // Standard recomputes per component; cached pays once per node.
        assert_eq!(cet.record.transcendental_count, 20);
        assert!(std.record.transcendental_count > cet.record.transcendental_count);
    }

    #[test]
    fn counts_are_zero_when_not_requested() {
        let cfg = RunConfig {
            count_transcendentals: false,
            ..quick()
        };
        let out = run_nested_bench(EvalStrategy::Standard, 5, 5, &cfg).unwrap();
        assert_eq!(out.record.transcendental_count, 0);
    }

    #[test]
    fn oversized_lazy_workload_fails_cleanly() {
        assert!(run_mult_bench(EvalStrategy::Standard, 21, 5, &quick()).is_err());
    }

    #[test]
    fn kernel_smoke() {
        let spec = KernelSpec::with_unknowns(10).unwrap();
        let out = run_kernel_bench(EvalStrategy::CachedElr, &spec, &quick()).unwrap();
        assert_eq!(out.record.m, 10);
        assert_eq!(out.record.n, 10);
        assert!(out.record.scaled_time > 0.0);
    }
}
