//! Benchmark fixtures.

use polyrpc::propgen::{GenConfig, Generated, Generator};
use polyrpc::{Location, Term, Type};

/// `n` nested static location abstractions over a curried lambda that uses
/// each bound location once. Full monomorphization yields `2^n` leaves.
pub fn nested_loc_lams(n: usize) -> Term {
    let mut body = Term::var("x1");
    for i in (1..=n).rev() {
        body = Term::lam(
            Location::var(format!("l{i}")),
            format!("x{i}"),
            Type::base("base"),
            body,
        );
    }
    for i in (1..=n).rev() {
        body = Term::loc_lam(format!("l{i}"), body);
    }
    body
}

/// A seeded batch of well-typed terms.
pub fn corpus(seed: u64, depth: usize, count: usize) -> Vec<Generated> {
    let mut g = Generator::new(GenConfig {
        max_depth: depth,
        seed,
        ..GenConfig::default()
    });
    (0..count)
        .map(|_| g.well_typed().expect("generator"))
        .collect()
}
