//! Cross-check both exact engines against exhaustive search on tiny
//! instances.
//!
//! cargo run --example oracle_check

use crossdock::bp::{branch_and_price, BpOptions};
use crossdock::compact::{solve_compact, CompactOptions};
use crossdock::instgen::{generate, GenParams};
use crossdock::oracle::{brute_force, OracleLimits};

fn main() {
    for seed in 0..8 {
        let mut p = GenParams::new(12, 1 + (seed % 3) as u32, 4 + (seed % 3) as u32).with_seed(seed);
        p.scenario_count_range = (1, 3);
        let inst = generate(&p).unwrap();
        let oracle = brute_force(&inst, &OracleLimits::default()).unwrap();
        let compact = solve_compact(&inst, &CompactOptions::default()).unwrap();
        let bp = branch_and_price(&inst, &BpOptions::default()).unwrap();
        let c = compact.cost.unwrap().total;
        println!(
            "{:<24} oracle {:>5} ({} nodes)  compact {:>5}  bp {:>5}",
            inst.name, oracle.cost.total, oracle.explored, c, bp.cost.total
        );
        assert_eq!(oracle.cost.total, c);
        assert_eq!(oracle.cost.total, bp.cost.total);
    }
}
