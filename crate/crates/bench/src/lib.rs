//! Shared fixtures for the benchmark targets.

use timerank::datagen::{generate_dataset, GenSpec};
use timerank::{Dataset, LexicalHashEncoder};

/// A mid-sized seeded dataset (~500 passages) for benchmarking.
pub fn bench_dataset() -> Dataset {
    let spec = GenSpec {
        year_range: (1990, 2018),
        ..GenSpec::default()
    };
    generate_dataset(&spec).expect("bench spec is valid")
}

pub fn bench_encoder() -> LexicalHashEncoder {
    LexicalHashEncoder::default()
}
