//! Wall-clock measurement with batching, warmup, and median reporting.
//!
//! The measured closure is batched until one batch exceeds the minimum
//! sample duration, a fixed number of warmup batches is discarded, and the
//! per-evaluation time is the median over the remaining samples — medians
//! resist scheduler noise better than means. Each evaluation returns an
//! `f64` that is folded into a checksum the caller is expected to print,
//! which keeps the optimizer from deleting the work.

use std::hint::black_box;
use std::time::{Duration, Instant};

use anyhow::bail;

#[derive(Debug, Clone)]
pub struct TimingConfig {
    /// Minimum wall time one batch must take.
    pub min_sample: Duration,
    /// Batches discarded before sampling starts.
    pub warmup: usize,
    /// Timed samples; the median is reported.
    pub samples: usize,
}

impl TimingConfig {
    pub fn with_samples(samples: usize) -> Self {
        TimingConfig {
            min_sample: Duration::from_millis(1),
            warmup: 10,
            samples: samples.max(1),
        }
    }
}

impl Default for TimingConfig {
    fn default() -> Self {
        // 30 samples keeps full sweeps quick while the median stays stable.
        Self::with_samples(30)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Measurement {
    /// Median wall time of a single evaluation, in seconds.
    pub per_eval_s: f64,
    /// Evaluations per timed sample after calibration.
    pub batch: u64,
    /// Fold of every evaluation's result; print it to keep the work alive.
    pub checksum: f64,
}

fn run_batch<F: FnMut() -> f64>(f: &mut F, batch: u64) -> (Duration, f64) {
    let mut acc = 0.0;
    let start = Instant::now();
    for _ in 0..batch {
        acc = black_box(acc + f());
    }
    (start.elapsed(), acc)
}

fn calibrate<F: FnMut() -> f64>(
    f: &mut F,
    cfg: &TimingConfig,
    checksum: &mut f64,
) -> anyhow::Result<u64> {
    // Grow the batch until one sample is comfortably above clock resolution.
    let mut batch: u64 = 1;
    loop {
        let (elapsed, acc) = run_batch(f, batch);
        *checksum += acc;
        if elapsed >= cfg.min_sample {
            return Ok(batch);
        }
        if batch >= 1 << 40 {
            bail!(
                "timer resolution error: {batch} evaluations still complete in {elapsed:?}, \
                 below the {:?} sample floor",
                cfg.min_sample
            );
        }
        batch = batch.saturating_mul(2);
    }
}

fn median(mut times: Vec<f64>) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    times[times.len() / 2]
}

/// Times `f`, returning the median per-evaluation wall time.
pub fn measure<F: FnMut() -> f64>(mut f: F, cfg: &TimingConfig) -> anyhow::Result<Measurement> {
    let mut checksum = 0.0;
    let batch = calibrate(&mut f, cfg, &mut checksum)?;

    for _ in 0..cfg.warmup {
        let (_, acc) = run_batch(&mut f, batch);
        checksum += acc;
    }

    let mut times: Vec<f64> = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let (elapsed, acc) = run_batch(&mut f, batch);
        checksum += acc;
        times.push(elapsed.as_secs_f64() / batch as f64);
    }
    Ok(Measurement {
        per_eval_s: median(times),
        batch,
        checksum,
    })
}

/// Times two closures with interleaved samples, so a ratio of the two
/// medians is insensitive to clock-speed drift across the measurement
/// window. This is how a derivative evaluation and its undifferentiated
/// baseline are paired.
pub fn measure_pair<F, G>(
    mut f: F,
    mut g: G,
    cfg: &TimingConfig,
) -> anyhow::Result<(Measurement, Measurement)>
where
    F: FnMut() -> f64,
    G: FnMut() -> f64,
{
    let mut checksum_f = 0.0;
    let mut checksum_g = 0.0;
    let batch_f = calibrate(&mut f, cfg, &mut checksum_f)?;
    let batch_g = calibrate(&mut g, cfg, &mut checksum_g)?;

    for _ in 0..cfg.warmup {
        let (_, acc) = run_batch(&mut f, batch_f);
        checksum_f += acc;
        let (_, acc) = run_batch(&mut g, batch_g);
        checksum_g += acc;
    }

    let mut times_f: Vec<f64> = Vec::with_capacity(cfg.samples);
    let mut times_g: Vec<f64> = Vec::with_capacity(cfg.samples);
    for _ in 0..cfg.samples {
        let (elapsed, acc) = run_batch(&mut f, batch_f);
        checksum_f += acc;
        times_f.push(elapsed.as_secs_f64() / batch_f as f64);
        let (elapsed, acc) = run_batch(&mut g, batch_g);
        checksum_g += acc;
        times_g.push(elapsed.as_secs_f64() / batch_g as f64);
    }
    Ok((
        Measurement {
            per_eval_s: median(times_f),
            batch: batch_f,
            checksum: checksum_f,
        },
        Measurement {
            per_eval_s: median(times_g),
            batch: batch_g,
            checksum: checksum_g,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_a_cheap_closure() {
        let mut x = 0.0f64;
        let cfg = TimingConfig {
            min_sample: Duration::from_micros(200),
            warmup: 2,
            samples: 5,
        };
        let m = measure(
            || {
                x += 1.0;
                x
            },
            &cfg,
        )
        .unwrap();
        assert!(m.per_eval_s > 0.0);
        assert!(m.batch >= 1);
        assert!(m.checksum != 0.0);
    }

    #[test]
    fn batch_grows_for_sub_resolution_work() {
        let cfg = TimingConfig {
            min_sample: Duration::from_millis(1),
            warmup: 0,
            samples: 3,
        };
        let m = measure(|| 1.0, &cfg).unwrap();
        assert!(
            m.batch > 1,
            "a no-op closure must be batched, got {}",
            m.batch
        );
    }
}
