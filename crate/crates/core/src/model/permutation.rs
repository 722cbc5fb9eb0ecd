use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::model::{ModelParams, State};

/// Independent relabelling of the urns for each ball: ball `b` in urn `i`
/// moves to urn `maps[b][i - 1]`. Preserves overlaps, hence the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductPermutation {
    maps: Vec<Vec<u32>>,
}

impl ProductPermutation {
    pub fn new(params: &ModelParams, maps: Vec<Vec<u32>>) -> Result<Self, Error> {
        let n = params.urns() as usize;
        if maps.len() != params.balls() as usize {
            return Err(Error::Params(format!("expected {} permutations, got {}", params.balls(), maps.len())));
        }
        for map in &maps {
            let mut seen = vec![false; n + 1];
            let ok = map.len() == n
                && map.iter().all(|&u| {
                    let fresh = u >= 1 && (u as usize) <= n && !seen[u as usize];
                    if fresh {
                        seen[u as usize] = true;
                    }
                    fresh
                });
            if !ok {
                return Err(Error::Params(format!("{map:?} is not a permutation of 1..={n}")));
            }
        }
        Ok(ProductPermutation { maps })
    }

    pub fn identity(params: &ModelParams) -> Self {
        let id: Vec<u32> = (1..=params.urns()).collect();
        ProductPermutation { maps: vec![id; params.balls() as usize] }
    }

    pub fn random<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Self {
        let maps = (0..params.balls())
            .map(|_| {
                let mut map: Vec<u32> = (1..=params.urns()).collect();
                map.shuffle(rng);
                map
            })
            .collect();
        ProductPermutation { maps }
    }

    pub fn apply(&self, x: &State) -> State {
        State::new(x.positions().iter().zip(&self.maps).map(|(&u, map)| map[u as usize - 1]).collect())
    }

    /// Elementwise image, re-sorted.
    pub fn apply_set(&self, set: &[State]) -> Vec<State> {
        let mut out: Vec<State> = set.iter().map(|x| self.apply(x)).collect();
        out.sort();
        out
    }
}
