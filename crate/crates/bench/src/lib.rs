//! Fixtures shared by the benchmarks.

use scx_core::generators::{gen_lower_bound, gen_random_discrete, LowerBoundFamily};
use scx_core::{DiscreteInstance, LinearAgent, LinearClassifier, LinearInstance};

pub fn random_discrete(n: usize, m: usize, seed: u64) -> DiscreteInstance {
    gen_random_discrete(n, m, 0.3, 0.6, (0.05, 1.0), seed).expect("valid parameters")
}

pub fn lower_bound(m: usize) -> LowerBoundFamily {
    gen_lower_bound(m, 0.01, 1).expect("valid parameters")
}

/// Agents on a jittered grid below `x0 + 2 x1 >= 20`, dimension 0 improving.
pub fn plane(n: usize) -> LinearInstance {
    let agents = (0..n)
        .map(|i| {
            let x0 = (i * 37 % 101) as f64 / 10.0;
            let x1 = (i * 53 % 97) as f64 / 10.0;
            LinearAgent::new(format!("x{}", i + 1), vec![x0, x1])
        })
        .collect();
    LinearInstance::new(
        vec![1.0, 1.5],
        &[0],
        LinearClassifier::new(vec![1.0, 2.0], 20.0).expect("valid classifier"),
        agents,
        None,
    )
    .expect("valid instance")
}
