#![allow(dead_code)]

use proptest::test_runner::{Config, RngSeed};

pub fn seed() -> u64 {
    std::env::var("MACLANE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

pub fn seeded(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed()),
        failure_persistence: None,
        ..Config::default()
    }
}
