use std::path::PathBuf;

use anyhow::bail;
use clap::Parser;

use fad::{EvalStrategy, ALL_STRATEGIES};
use fad_cli::kernel::KernelSpec;
use fad_cli::pin::pin_to_core;
use fad_cli::records::{emit_csv, BenchRecord, Workload};
use fad_cli::runner::{run_kernel_bench, run_mult_bench, run_nested_bench, RunConfig};

const DEFAULT_M: [usize; 8] = [1, 2, 3, 4, 5, 10, 15, 20];
const DEFAULT_N: [usize; 2] = [5, 50];

/// Scaled-runtime benchmarks for vector forward-mode AD evaluation
/// strategies.
///
/// Measures the wall time of differentiating each workload, divides by the
/// undifferentiated evaluation time and the number of derivative components
/// N, and writes one CSV row per (workload, strategy, M, N) combination.
/// The defaults sweep the full benchmark grid: the product and nested-sine
/// workloads, all five strategies, M in {1,2,3,4,5,10,15,20} and N in
/// {5,50}.
#[derive(Debug, Parser)]
#[command(name = "bench", version, max_term_width = 100)]
struct Cli {
    /// Workload: mult, nested, kernel, or all [default: mult and nested]
    #[arg(long)]
    workload: Option<String>,

    /// Strategy: eager, et, cet, elr, celr, or all [default: all]
    #[arg(long, default_value = "all")]
    strategy: String,

    /// Expression sizes, comma separated (mult: factor count; nested: sine
    /// depth; ignored by the kernel workload)
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,

    /// Derivative component counts, comma separated. For the kernel
    /// workload this sets the unknown count (a multiple of 10) and
    /// otherwise defaults to 80.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Timed samples per measurement (the median is reported)
    #[arg(long, default_value_t = 30)]
    reps: usize,

    /// Output CSV path
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,

    /// Record transcendental-call counts (one instrumented evaluation per
    /// row; timings stay uninstrumented)
    #[arg(long)]
    count_transcendentals: bool,

    /// Seed for input sampling
    #[arg(long, default_value_t = 12345)]
    seed: u64,
}

fn parse_workloads(arg: Option<&str>) -> anyhow::Result<Vec<Workload>> {
    match arg {
        None => Ok(vec![Workload::Mult, Workload::Nested]),
        Some("all") => Ok(vec![Workload::Mult, Workload::Nested, Workload::Kernel]),
        Some(other) => match other.parse::<Workload>() {
            Ok(w) => Ok(vec![w]),
            Err(e) => bail!(e),
        },
    }
}

fn parse_strategies(arg: &str) -> anyhow::Result<Vec<EvalStrategy>> {
    if arg == "all" {
        return Ok(ALL_STRATEGIES.to_vec());
    }
    match arg.parse::<EvalStrategy>() {
        Ok(s) => Ok(vec![s]),
        Err(e) => bail!(e),
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if cli.reps == 0 {
        bail!("--reps must be at least 1");
    }

    let workloads = parse_workloads(cli.workload.as_deref())?;
    let strategies = parse_strategies(&cli.strategy)?;
    let ms = cli.m.clone().unwrap_or_else(|| DEFAULT_M.to_vec());
    let ns = cli.n.clone().unwrap_or_else(|| DEFAULT_N.to_vec());
    if ms.is_empty() || ns.is_empty() {
        bail!("--m and --n need at least one value");
    }

    // Benchmarks are single-threaded by contract; pin them to one core.
    if !pin_to_core(0) {
        eprintln!("note: could not pin to a single core; timings may be noisier");
    }

    let cfg = RunConfig {
        reps: cli.reps,
        seed: cli.seed,
        count_transcendentals: cli.count_transcendentals,
    };

    let mut records: Vec<BenchRecord> = Vec::new();
    let mut checksum = 0.0;
    for &workload in &workloads {
        match workload {
            Workload::Mult | Workload::Nested => {
                for &strategy in &strategies {
                    for &m in &ms {
                        for &n in &ns {
                            let out = match workload {
                                Workload::Mult => run_mult_bench(strategy, m, n, &cfg)?,
                                Workload::Nested => run_nested_bench(strategy, m, n, &cfg)?,
                                Workload::Kernel => unreachable!(),
                            };
                            eprintln!(
                                "{} {} M={} N={}: scaled {:.4}",
                                workload, strategy, m, n, out.record.scaled_time
                            );
                            checksum += out.checksum;
                            records.push(out.record);
                        }
                    }
                }
            }
            Workload::Kernel => {
                // The element shape fixes M and N; honor --n as the unknown
                // count when given explicitly.
                let unknown_counts = match &cli.n {
                    Some(ns) => ns.clone(),
                    None => vec![80],
                };
                for &strategy in &strategies {
                    for &n_unknowns in &unknown_counts {
                        let spec = KernelSpec::with_unknowns(n_unknowns)?;
                        let out = run_kernel_bench(strategy, &spec, &cfg)?;
                        eprintln!(
                            "kernel {} N={}: scaled {:.4}",
                            strategy, n_unknowns, out.record.scaled_time
                        );
                        checksum += out.checksum;
                        records.push(out.record);
                    }
                }
            }
        }
    }

    emit_csv(&records, &cli.out)?;
    println!(
        "wrote {} records to {} (checksum {checksum:.6e})",
        records.len(),
        cli.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_args_are_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn default_workloads_are_the_benchmark_grid() {
        let w = parse_workloads(None).unwrap();
        assert_eq!(w, vec![Workload::Mult, Workload::Nested]);
        let all = parse_workloads(Some("all")).unwrap();
        assert_eq!(all.len(), 3);
        assert!(parse_workloads(Some("bogus")).is_err());
    }

    #[test]
    fn strategy_tokens_parse() {
        assert_eq!(parse_strategies("all").unwrap().len(), 5);
        assert_eq!(
            parse_strategies("celr").unwrap(),
            vec![EvalStrategy::CachedElr]
        );
        assert!(parse_strategies("none").is_err());
    }
}
