use proptest::test_runner::{Config, RngSeed};

/// Deterministic proptest configuration; `MACLANE_SEED` overrides the default seed 0.
pub(crate) fn seeded(cases: u32) -> Config {
    let seed = std::env::var("MACLANE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}
