//! Benchmark records and CSV output.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use fad::EvalStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Workload {
    Mult,
    Nested,
    Kernel,
}

impl Workload {
    pub fn token(self) -> &'static str {
        match self {
            Workload::Mult => "mult",
            Workload::Nested => "nested",
            Workload::Kernel => "kernel",
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Workload {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mult" => Ok(Workload::Mult),
            "nested" => Ok(Workload::Nested),
            "kernel" => Ok(Workload::Kernel),
            other => Err(format!(
                "unknown workload '{other}' (expected mult, nested, or kernel)"
            )),
        }
    }
}

/// One benchmark measurement. `scaled_time` is always derivative time over
/// baseline time times the number of derivative components.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub workload: Workload,
    pub strategy: EvalStrategy,
    pub m: usize,
    pub n: usize,
    pub t_deriv_s: f64,
    pub t_base_s: f64,
    pub scaled_time: f64,
    pub transcendental_count: u64,
}

impl BenchRecord {
    pub fn new(
        workload: Workload,
        strategy: EvalStrategy,
        m: usize,
        n: usize,
        t_deriv_s: f64,
        t_base_s: f64,
        transcendental_count: u64,
    ) -> Self {
        BenchRecord {
            workload,
            strategy,
            m,
            n,
            t_deriv_s,
            t_base_s,
            scaled_time: t_deriv_s / (t_base_s * n as f64),
            transcendental_count,
        }
    }
}

pub const CSV_HEADER: &str =
    "workload,strategy,M,N,t_deriv_s,t_base_s,scaled_time,transcendental_count";

/// Writes records as CSV, one row per record in input order. Floats are
/// printed shortest-roundtrip, so parsing a column reproduces the exact
/// value.
pub fn emit_csv(records: &[BenchRecord], path: &Path) -> anyhow::Result<()> {
    if records.is_empty() {
        bail!("refusing to write an empty benchmark CSV");
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.workload,
            r.strategy,
            r.m,
            r.n,
            r.t_deriv_s,
            r.t_base_s,
            r.scaled_time,
            r.transcendental_count
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize) -> BenchRecord {
        BenchRecord::new(
            Workload::Mult,
            EvalStrategy::Standard,
            i + 1,
            5,
            1.5e-7,
            1.0e-9,
            0,
        )
    }

    #[test]
    fn single_record_yields_header_plus_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        emit_csv(&[record(0)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("mult,et,1,5,"));
    }

    #[test]
    fn eighty_records_yield_eighty_one_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("many.csv");
        let records: Vec<BenchRecord> = (0..80).map(record).collect();
        emit_csv(&records, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 81);
    }

    #[test]
    fn empty_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("none.csv");
        assert!(emit_csv(&[], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn scaled_time_is_the_metric_identity() {
        let r = record(4);
        assert_eq!(r.scaled_time, r.t_deriv_s / (r.t_base_s * r.n as f64));
    }

    #[test]
    fn floats_round_trip_through_the_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        let r = BenchRecord::new(
            Workload::Nested,
            EvalStrategy::CachedElr,
            20,
            50,
            1.234567890123e-7,
            9.87654321e-10,
            40,
        );
        emit_csv(std::slice::from_ref(&r), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[4].parse::<f64>().unwrap(), r.t_deriv_s);
        assert_eq!(row[5].parse::<f64>().unwrap(), r.t_base_s);
        assert_eq!(row[6].parse::<f64>().unwrap(), r.scaled_time);
    }
}
