//! The engine on its own: an LP with duals, then a small MIP with a lazy
//! cut that forbids picking items 0 and 1 together.
//!
//! cargo run -p crossdock-milp --example knapsack_with_cuts

use crossdock_milp::{solve_lp, solve_mip, CutCallback, ModelIR, Row, SearchOptions, Sense};

struct NotBoth;

impl CutCallback for NotBoth {
    fn lazy(&self, values: &[f64]) -> Vec<Row> {
        if values[0] + values[1] > 1.5 {
            vec![Row::new(
                "not_both",
                vec![(crossdock_milp::VarId(0), 1.0), (crossdock_milp::VarId(1), 1.0)],
                Sense::Le,
                1.0,
            )]
        } else {
            Vec::new()
        }
    }
}

fn main() {
    // maximize 10a + 9b + 7c + 4d  s.t. 5a + 4b + 4c + 2d <= 9, written as a minimization
    let mut m = ModelIR::new("knapsack");
    let values = [10.0, 9.0, 7.0, 4.0];
    let weights = [5.0, 4.0, 4.0, 2.0];
    let x: Vec<_> = values
        .iter()
        .enumerate()
        .map(|(k, v)| m.add_var(format!("x{k}"), 0.0, 1.0, true, -v))
        .collect();
    let cap = m.add_constraint("cap", x.iter().zip(weights).map(|(&v, w)| (v, w)).collect(), Sense::Le, 9.0);

    let lp = solve_lp(&m);
    println!("LP: {:.3}, capacity dual {:.3}, x = {:?}", lp.objective, lp.duals[cap], lp.primal);

    let plain = solve_mip(&m, &SearchOptions::default()).unwrap();
    println!("MIP: {:?} {:?} x = {:?}", plain.status, plain.objective, plain.values);

    let cut = solve_mip(&m, &SearchOptions { callback: Some(&NotBoth), ..Default::default() }).unwrap();
    println!(
        "MIP with lazy cut: {:?} x = {:?} ({} rows added)",
        cut.objective,
        cut.values,
        cut.added_rows.len()
    );
}
