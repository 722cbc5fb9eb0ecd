//! Fixtures shared by the benchmarks.

use ehrenfest::{HittingQuery, ModelParams, SetDescriptor, State};

/// Disjoint-singleton query: start in urn 1, target all balls in urn 2.
pub fn disjoint_singleton(urns: u32, balls: u32) -> HittingQuery {
    let p = ModelParams::new(urns, balls).expect("valid parameters");
    HittingQuery::new(p, p.constant_state(1), &SetDescriptor::Singleton(p.constant_state(2))).expect("symmetric target")
}

/// Start with the balls spread round-robin over the urns.
pub fn spread_start(p: &ModelParams) -> State {
    State::new((0..p.balls()).map(|i| 1 + i % p.urns()).collect())
}
