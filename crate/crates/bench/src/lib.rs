//! Shared fixtures for the benchmarks.

use multiq_core::corpus::generate;
use multiq_core::{Circuit, RunConfig};

/// Generated corpus circuits whose names appear in `names`, in that order.
pub fn circuits(names: &[&str]) -> Vec<Circuit> {
    let all: Vec<Circuit> = generate().into_iter().map(|(_, c)| c).collect();
    names
        .iter()
        .map(|n| all.iter().find(|c| c.name == *n).unwrap_or_else(|| panic!("no circuit {n}")).clone())
        .collect()
}

/// Every generated corpus circuit.
pub fn all_circuits() -> Vec<Circuit> {
    generate().into_iter().map(|(_, c)| c).collect()
}

/// Default configuration with shorter annealing schedules.
pub fn bench_config(iterations: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.bundler.iterations = iterations;
    c.placer.sa.iterations = iterations;
    c
}
