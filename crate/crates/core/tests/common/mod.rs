#![allow(dead_code)]

use crossdock::instgen::{generate, GenParams};
use crossdock::{Instance, Variant};

/// Random instances small enough for the brute-force oracle: up to three
/// docks, six trucks, horizon 14 and three scenarios per truck. Even
/// positions are SdPT, odd ones SiPT.
pub fn oracle_suite(count: usize, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let k64 = k as u64;
            let horizon = 10 + (k64 % 5) as u32;
            let docks = 1 + (k64 / 2 % 3) as u32;
            let trucks = 2 + (k64 * 7 % 5) as u32;
            let variant = if k % 2 == 0 { Variant::SdPT } else { Variant::SiPT };
            let mut p = GenParams::new(horizon, docks, trucks)
                .with_seed(seed.wrapping_add(k64))
                .with_variant(variant);
            p.scenario_count_range = (1, 3);
            let mut inst = generate(&p).unwrap();
            inst.name = format!("{}-{k}", inst.name);
            inst
        })
        .collect()
}

/// Medium desk-scale instances: T = 16, 4 to 6 docks, 12 to 20 trucks.
pub fn medium_suite(count: usize, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|k| {
            let k64 = k as u64;
            let docks = 4 + (k64 % 3) as u32;
            let trucks = 12 + (k64 * 3 % 9) as u32;
            let variant = if k % 2 == 0 { Variant::SdPT } else { Variant::SiPT };
            let mut inst = generate(
                &GenParams::new(16, docks, trucks)
                    .with_seed(seed.wrapping_add(k64))
                    .with_variant(variant),
            )
            .unwrap();
            inst.name = format!("{}-{k}", inst.name);
            inst
        })
        .collect()
}
