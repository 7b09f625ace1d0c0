//! Resource cover cuts: separate them on a fractional root point, then
//! solve with them enabled as user cuts.
//!
//! cargo run --example combinatorial_cuts

use crossdock::compact::{build, separate_combinatorial, solve_compact, BuildOptions, CompactOptions};
use crossdock::core::Instance;
use crossdock::instgen::{generate, GenParams};
use crossdock_milp::solve_lp;

// Violated cuts at the root LP, as (name, lhs, rhs).
fn root_cuts(inst: &Instance) -> (f64, Vec<(String, f64, f64)>) {
    let b = build(inst, inst.natural_variant(), &BuildOptions::default()).unwrap();
    let lp = solve_lp(&b.model);
    let mut found = Vec::new();
    for t in 0..=inst.horizon {
        for cut in separate_combinatorial(inst, &b.index, &lp.primal, t) {
            let lhs: f64 = cut.coeffs.iter().map(|(v, c)| c * lp.primal[v.0]).sum();
            found.push((cut.name, lhs, cut.rhs));
        }
    }
    (lp.objective, found)
}

fn main() {
    // look for a seed whose root relaxation overloads some period
    let mut pick = None;
    for seed in 0..200 {
        let inst = generate(&GenParams::new(14, 2, 7).with_seed(seed)).unwrap();
        let (bound, cuts) = root_cuts(&inst);
        if !cuts.is_empty() {
            pick = Some((seed, inst, bound, cuts));
            break;
        }
    }
    let Some((seed, inst, bound, cuts)) = pick else {
        println!("no violated cover cut at the root for seeds 0..200");
        return;
    };
    println!("seed {seed}: LP relaxation {bound:.2}");
    for (name, lhs, rhs) in &cuts {
        println!("  {name}: {lhs:.2} > {rhs}");
    }

    for on in [false, true] {
        let out = solve_compact(&inst, &CompactOptions { combinatorial_cuts: on, ..Default::default() }).unwrap();
        println!("cuts {on}: optimum {} in {} nodes", out.cost.unwrap().total, out.stats.nodes);
    }
}
