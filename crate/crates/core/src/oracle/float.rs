//! Floating-point counterpart of the exact oracle for state spaces too large
//! for exact elimination. `I - P_B` is symmetric positive definite, so the
//! systems are solved by conjugate gradients with neighbours generated on
//! the fly.

use crate::error::Error;
use crate::model::{ModelParams, State};
use crate::oracle::chain::StateIndexer;

/// Largest state space accepted by [`FloatSystem`].
pub const FLOAT_CAP: u128 = 200_000;

const CG_TOL: f64 = 1e-14;

pub struct FloatSystem {
    params: ModelParams,
    indexer: StateIndexer,
    in_target: Vec<bool>,
    size: usize,
}

impl FloatSystem {
    pub fn new(params: ModelParams, target: &[State], cap: u128) -> Result<Self, Error> {
        let size = params.state_count();
        if size > cap {
            return Err(Error::CapExceeded { size, cap });
        }
        if target.is_empty() {
            return Err(Error::Descriptor("target set is empty".into()));
        }
        let indexer = StateIndexer::new(&params);
        let size = size as usize;
        let mut in_target = vec![false; size];
        for z in target {
            params.check_state(z)?;
            in_target[indexer.index(z)] = true;
        }
        Ok(FloatSystem { params, indexer, in_target, size })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn index_of(&self, x: &State) -> Result<usize, Error> {
        self.params.check_state(x)?;
        Ok(self.indexer.index(x))
    }

    /// `y = (I - z P_B) v` on transient states; zero on the target.
    fn apply(&self, z: f64, v: &[f64], out: &mut [f64]) {
        let scale = z / self.params.degree() as f64;
        for i in 0..self.size {
            if self.in_target[i] {
                out[i] = 0.0;
                continue;
            }
            let mut s = 0.0;
            self.indexer.for_each_neighbor(i, |j| {
                if !self.in_target[j] {
                    s += v[j];
                }
            });
            out[i] = v[i] - scale * s;
        }
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn cg(&self, z: f64, b: &[f64]) -> Result<Vec<f64>, Error> {
        let n = self.size;
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let b_norm = Self::dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut rr = Self::dot(&r, &r);
        for _ in 0..(10 * n + 100) {
            if rr.sqrt() <= CG_TOL * b_norm {
                return Ok(x);
            }
            self.apply(z, &p, &mut ap);
            let alpha = rr / Self::dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_next = Self::dot(&r, &r);
            let beta = rr_next / rr;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rr = rr_next;
        }
        Err(Error::Solve("conjugate gradients did not converge".into()))
    }

    fn neighbor_sum(&self, w: &[f64]) -> Vec<f64> {
        (0..self.size)
            .map(|i| {
                if self.in_target[i] {
                    return 0.0;
                }
                let mut s = 0.0;
                self.indexer.for_each_neighbor(i, |j| s += w[j]);
                s / self.params.degree() as f64
            })
            .collect()
    }

    fn mask(&self, v: f64) -> Vec<f64> {
        self.in_target.iter().map(|&t| if t { 0.0 } else { v }).collect()
    }

    pub fn mean_vector(&self) -> Result<Vec<f64>, Error> {
        self.cg(1.0, &self.mask(1.0))
    }

    /// `E^x[T_A^2]` for every state.
    pub fn second_moment_vector(&self) -> Result<Vec<f64>, Error> {
        let h = self.mean_vector()?;
        let ph = self.neighbor_sum(&h);
        let rhs: Vec<f64> = (0..self.size).map(|i| if self.in_target[i] { 0.0 } else { 1.0 + 2.0 * ph[i] }).collect();
        self.cg(1.0, &rhs)
    }

    /// `E^x[z^{T_A}]` for every state, `0 < z < 1`.
    pub fn transform_vector(&self, z: f64) -> Result<Vec<f64>, Error> {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::Domain(format!("generating-function argument must lie in (0,1), got {z}")));
        }
        let deg = self.params.degree() as f64;
        let rhs: Vec<f64> = (0..self.size)
            .map(|i| {
                if self.in_target[i] {
                    return 0.0;
                }
                let mut hits = 0usize;
                self.indexer.for_each_neighbor(i, |j| hits += self.in_target[j] as usize);
                z * hits as f64 / deg
            })
            .collect();
        let mut h = self.cg(z, &rhs)?;
        for (v, &t) in h.iter_mut().zip(&self.in_target) {
            if t {
                *v = 1.0;
            }
        }
        Ok(h)
    }
}
