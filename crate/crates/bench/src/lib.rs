//! Criterion microbenchmarks for the `fad` strategies live under `benches/`;
//! run them with `cargo bench -p fad-bench`. The scaled-runtime numbers the
//! project reports come from the `bench` CLI instead — criterion is for
//! drilling into individual assignment costs during development.
