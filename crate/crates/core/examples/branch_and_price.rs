//! Column generation with branching, compared against the compact model.
//!
//! cargo run --example branch_and_price

use crossdock::bp::{branch_and_price, BpOptions, BpStats};
use crossdock::compact::{solve_compact, CompactOptions};
use crossdock::instgen::{generate, GenParams};
use crossdock::Variant;

fn main() {
    println!("{}", BpStats::CSV_HEADER);
    for seed in 0..4 {
        let variant = if seed % 2 == 0 { Variant::SdPT } else { Variant::SiPT };
        let inst = generate(&GenParams::new(16, 3, 9).with_seed(seed).with_variant(variant)).unwrap();
        let bp = branch_and_price(&inst, &BpOptions::default()).unwrap();
        println!("{}", bp.stats.csv_row(Some(bp.cost.total)));

        let compact = solve_compact(&inst, &CompactOptions::default()).unwrap();
        assert_eq!(compact.cost.map(|c| c.total), Some(bp.cost.total));
        if let Some(root) = bp.stats.root_bound {
            println!("  root bound {root:.2}, certificate: {}", bp.stats.has_certificate());
        }
    }
}
