//! Scenario dominance: a scenario that needs at least as much of every
//! resource and time as another one can be dropped.
//!
//! cargo run --example dominance

use crossdock::compact::{solve_compact, CompactOptions};
use crossdock::instgen::{generate, GenParams};
use crossdock::{prune_dominated_scenarios, ResourceScenario};

fn main() {
    let mut inst = generate(&GenParams::new(14, 2, 6).with_seed(11)).unwrap();
    // give every truck a useless, more expensive alternative
    for t in &mut inst.trucks {
        let s = t.scenarios[0];
        t.scenarios.push(ResourceScenario::new(s.workers + 1, s.equipment, s.vehicles, s.processing + 1));
    }
    let (pruned, report) = prune_dominated_scenarios(&inst);
    for r in &report.removed {
        println!("truck {}: scenario {} removed ({:?} by {})", r.truck, r.scenario, r.kind, r.by);
    }
    let before: usize = inst.trucks.iter().map(|t| t.scenarios.len()).sum();
    let after: usize = pruned.trucks.iter().map(|t| t.scenarios.len()).sum();
    println!("{before} scenarios -> {after}");

    // solve_compact prunes internally and reports original scenario indices
    let out = solve_compact(&inst, &CompactOptions::default()).unwrap();
    println!("optimum {}", out.cost.unwrap().total);
}
