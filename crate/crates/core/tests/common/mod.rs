#![allow(dead_code)]

pub mod frozen;
pub mod props;

use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

/// A runner with a fixed seed, so every run draws the same cases.
pub fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Run the named property with `cases` cases, panicking on failure.
pub fn check(name: &str, cases: u32) {
    let prop = props::ALL.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no property {name}")).1;
    if let Err(e) = prop(&mut runner(cases, 7)) {
        panic!("{name}: {e}");
    }
}
