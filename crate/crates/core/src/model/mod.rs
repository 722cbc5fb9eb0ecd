//! State space, overlap statistic, transition kernel and target sets.
//!
//! Urns are numbered `1..=N` everywhere, including serialized states.

mod descriptor;
mod permutation;
mod semigroup;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numeric::Rational;

pub use descriptor::{
    is_symmetric_family, materialize, overlap_profile, symmetry_witness, ProfileMismatch, SetDescriptor,
    DEFAULT_COUNT_URN,
};
pub use permutation::ProductPermutation;
pub use semigroup::{product_semigroup, single_ball_semigroup};

/// Number of urns `N >= 2` and balls `M >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    urns: u32,
    balls: u32,
}

impl ModelParams {
    pub fn new(urns: u32, balls: u32) -> Result<Self, Error> {
        if urns < 2 {
            return Err(Error::Params(format!("need at least 2 urns, got {urns}")));
        }
        if balls < 1 {
            return Err(Error::Params("need at least 1 ball".into()));
        }
        Ok(ModelParams { urns, balls })
    }

    pub fn urns(&self) -> u32 {
        self.urns
    }

    pub fn balls(&self) -> u32 {
        self.balls
    }

    /// `N^M`, saturating at `u128::MAX`.
    pub fn state_count(&self) -> u128 {
        (self.urns as u128).checked_pow(self.balls).unwrap_or(u128::MAX)
    }

    /// `M(N-1)`, the number of states reachable in one step.
    pub fn degree(&self) -> u64 {
        self.balls as u64 * (self.urns as u64 - 1)
    }

    pub fn check_state(&self, x: &State) -> Result<(), Error> {
        if x.0.len() != self.balls as usize {
            return Err(Error::State(format!("{x} has {} coordinates, expected {}", x.0.len(), self.balls)));
        }
        if let Some(&bad) = x.0.iter().find(|&&u| u < 1 || u > self.urns) {
            return Err(Error::State(format!("urn {bad} in {x} outside 1..={}", self.urns)));
        }
        Ok(())
    }

    /// `(u, u, ..., u)`.
    pub fn constant_state(&self, urn: u32) -> State {
        State(vec![urn; self.balls as usize])
    }
}

/// Positions of the `M` balls, urns numbered from 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(Vec<u32>);

impl State {
    /// Builds a state without range checks; see [`ModelParams::check_state`].
    pub fn new(positions: Vec<u32>) -> Self {
        State(positions)
    }

    pub fn positions(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, u) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for State {
    type Err = Error;

    /// `"1,2,3"` or `"(1,2,3)"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let positions = inner
            .split(',')
            .map(|t| {
                t.trim().parse::<u32>().map_err(|_| Error::Parse(format!("invalid urn index {t:?} in state {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(State(positions))
    }
}

pub(crate) fn overlap_raw(x: &[u32], y: &[u32]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a == b).count()
}

/// `s(x, y)`: the number of balls sitting in the same urn in both states.
pub fn overlap(x: &State, y: &State) -> Result<usize, Error> {
    if x.len() != y.len() {
        return Err(Error::State(format!("cannot compare {x} and {y}: lengths differ")));
    }
    Ok(overlap_raw(&x.0, &y.0))
}

/// One-step probability: `1/(M(N-1))` when exactly one ball moved, else 0.
pub fn transition_prob(params: &ModelParams, x: &State, y: &State) -> Result<Rational, Error> {
    params.check_state(x)?;
    params.check_state(y)?;
    let m = params.balls() as usize;
    if overlap_raw(&x.0, &y.0) + 1 == m {
        Ok(Rational::new(1, params.degree() as i64))
    } else {
        Ok(Rational::zero())
    }
}

/// All `N^M` states in lexicographic order (ball 1 most significant).
/// Intended for small spaces.
pub fn all_states(params: &ModelParams) -> Vec<State> {
    let n = params.urns();
    let m = params.balls() as usize;
    let total = params.state_count() as usize;
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![1u32; m];
    loop {
        out.push(State(cur.clone()));
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> State {
        s.parse().unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 3).is_err());
        assert!(ModelParams::new(2, 0).is_err());
        let p = ModelParams::new(3, 2).unwrap();
        assert_eq!(p.state_count(), 9);
        assert_eq!(p.degree(), 4);
        assert_eq!(ModelParams::new(4, 200).unwrap().state_count(), u128::MAX);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(&st("1,2,3"), &st("1,3,3")).unwrap(), 2);
        assert_eq!(overlap(&st("2,1,4"), &st("2,1,4")).unwrap(), 3);
        assert_eq!(overlap(&st("1,1"), &st("2,2")).unwrap(), 0);
        assert!(overlap(&st("1,1"), &st("1,1,1")).is_err());
    }

    #[test]
    fn transition_examples() {
        let p32 = ModelParams::new(3, 2).unwrap();
        assert_eq!(transition_prob(&p32, &st("1,1"), &st("1,2")).unwrap(), Rational::new(1, 4));
        assert_eq!(transition_prob(&p32, &st("1,1"), &st("1,1")).unwrap(), Rational::zero());
        assert_eq!(transition_prob(&p32, &st("1,1"), &st("2,2")).unwrap(), Rational::zero());
        let p23 = ModelParams::new(2, 3).unwrap();
        assert_eq!(transition_prob(&p23, &st("1,1,1"), &st("1,2,1")).unwrap(), Rational::new(1, 3));
        assert!(transition_prob(&p23, &st("1,1,3"), &st("1,2,1")).is_err());
    }

    #[test]
    fn rows_sum_to_one_exactly() {
        for n in 2..=5u32 {
            for m in 1..=4u32 {
                let p = ModelParams::new(n, m).unwrap();
                if p.state_count() > 10_000 {
                    continue;
                }
                let states = all_states(&p);
                assert_eq!(states.len() as u128, p.state_count());
                for x in states.iter().step_by(7) {
                    let total: Rational = states.iter().map(|y| transition_prob(&p, x, y).unwrap()).sum();
                    assert_eq!(total, Rational::one(), "N={n} M={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn state_parsing() {
        assert_eq!(st("(1, 2,3)").positions(), &[1, 2, 3]);
        assert!("1,x".parse::<State>().is_err());
        let p = ModelParams::new(3, 2).unwrap();
        assert!(p.check_state(&st("1,4")).is_err());
        assert!(p.check_state(&st("0,1")).is_err());
        assert!(p.check_state(&st("1")).is_err());
        assert!(p.check_state(&st("3,1")).is_ok());
    }
}
