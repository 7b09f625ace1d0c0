//! Build the time-indexed model, inspect its size and reductions, then
//! solve it.
//!
//! cargo run --example compact_model

use crossdock::compact::{build, solve_compact, BuildOptions, CompactOptions, FixRule};
use crossdock::instgen::{generate, GenParams};

fn main() {
    let inst = generate(&GenParams::new(16, 2, 7).with_seed(3)).unwrap();
    let variant = inst.natural_variant();

    let full = build(&inst, variant, &BuildOptions { fixing: false, ..Default::default() }).unwrap();
    let reduced = build(&inst, variant, &BuildOptions::default()).unwrap();
    println!(
        "{} ({variant}): {} vars / {} rows without fixing, {} / {} with",
        inst.name,
        full.model.num_vars(),
        full.model.num_rows(),
        reduced.model.num_vars(),
        reduced.model.num_rows()
    );
    for rule in FixRule::ALL {
        println!("  {rule:?}: {}", reduced.fixing.count(rule));
    }
    println!("  symmetry rows: {}", reduced.symmetry_rows);

    let out = solve_compact(&inst, &CompactOptions::default()).unwrap();
    let cost = out.cost.expect("an optimal schedule");
    println!(
        "{}: cost {} (waiting {}, missed {}) in {} nodes",
        out.stats.status, cost.total, cost.waiting_cost, cost.miss_cost, out.stats.nodes
    );
    let sched = out.schedule.unwrap();
    for (d, chain) in sched.per_dock.iter().enumerate() {
        let line: Vec<String> = chain
            .iter()
            .map(|a| format!("{}@{}(s{})", a.truck, a.start, a.scenario))
            .collect();
        println!("  dock {d}: {}", line.join(" -> "));
    }
    println!("  unserved: {:?}", sched.unserved);
}
