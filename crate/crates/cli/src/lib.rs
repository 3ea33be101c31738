//! Benchmark harness for the `fad` evaluation strategies: scaled-runtime
//! measurement of the product and nested-sine test functions over a grid of
//! expression sizes and derivative counts, plus a synthetic
//! reaction/transport element kernel, with CSV output.

pub mod kernel;
pub mod pin;
pub mod records;
pub mod runner;
pub mod timing;
