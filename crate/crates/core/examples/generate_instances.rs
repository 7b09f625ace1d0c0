//! Draw a few instances and print their shape.
//!
//! cargo run --example generate_instances

use crossdock::instgen::{generate, generate_suite, named_suite, GenParams};
use crossdock::{save_instance, Variant};

fn main() {
    let single = generate(&GenParams::new(16, 3, 10).with_seed(42).with_variant(Variant::SiPT))
        .expect("valid parameters");
    println!("{}: {} trucks, capacity {:?}", single.name, single.trucks.len(), single.capacity);
    for t in single.trucks.iter().take(3) {
        println!(
            "  truck {} window [{}, {}] setup {} f={} g={} scenarios={}",
            t.id, t.arrival, t.deadline, t.setup, t.wait_cost, t.miss_penalty, t.scenarios.len()
        );
    }

    // same seed, same bytes
    let again = generate(&GenParams::new(16, 3, 10).with_seed(42).with_variant(Variant::SiPT)).unwrap();
    assert_eq!(save_instance(&single), save_instance(&again));

    let (docks, rule) = named_suite("paper-small").unwrap();
    let suite = generate_suite(&GenParams::new(16, 1, 1).with_seed(7), &docks, &rule).unwrap();
    println!("paper-small suite: {} instances", suite.len());
    for inst in &suite {
        println!("  {}", inst.name);
    }
}
