//! Run several engines over a small generated suite and print the CSV and
//! the per-dock table, as `crossdock bench` does.
//!
//! cargo run --example bench_suite

use std::collections::BTreeMap;

use crossdock::cli::{bench, format_table, BenchRow, Engine, EngineConfig};
use crossdock::instgen::{generate, GenParams};

fn main() {
    let instances: Vec<_> = (0..4)
        .map(|k| {
            // the oracle accepts at most three scenarios per truck
            let mut p = GenParams::new(12, 1 + k % 2, 3 + k).with_seed(u64::from(k));
            p.scenario_count_range = (1, 3);
            generate(&p).unwrap()
        })
        .collect();
    let cfg = EngineConfig {
        variant: None,
        time_limit: Some(std::time::Duration::from_secs(30)),
        pool_threshold: None,
        combinatorial_cuts: false,
    };
    let rows = bench(&instances, &[Engine::Compact, Engine::Bp, Engine::Oracle], &cfg, 2).unwrap();
    println!("{}", BenchRow::HEADER);
    for r in &rows {
        println!("{}", r.csv());
    }
    let docks: BTreeMap<String, u32> = instances.iter().map(|i| (i.name.clone(), i.docks)).collect();
    println!("\n{}", format_table(&rows, &docks));
}
