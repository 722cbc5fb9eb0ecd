//! Monte Carlo hitting times for the discrete chain and its continuous-time
//! version.
//!
//! Replica `r` draws from its own ChaCha8 stream `(seed, r)`, and results are
//! reduced in replica order, so summaries do not depend on the thread count.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::error::Error;
use crate::model::{materialize, ModelParams, SetDescriptor, State};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Hitting time in steps.
    Discrete,
    /// Hitting time of the chain with Exp(M) holding times.
    Ctmc,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Discrete => "discrete",
            SimMode::Ctmc => "ctmc",
        })
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "discrete" => Ok(SimMode::Discrete),
            "ctmc" => Ok(SimMode::Ctmc),
            other => Err(Error::SimConfig(format!("unknown mode {other:?}; expected discrete|ctmc"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub replicas: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub max_steps: u64,
    /// Arguments of `E[e^{-λT}]`; discrete mode only.
    pub lambda_grid: Vec<f64>,
    /// Arguments of `E[e^{-uT}]`; ctmc mode only.
    pub u_grid: Vec<f64>,
    /// Thread count; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(replicas: u64, seed: u64, mode: SimMode) -> Self {
        SimConfig {
            replicas,
            seed,
            mode,
            max_steps: DEFAULT_MAX_STEPS,
            lambda_grid: Vec::new(),
            u_grid: Vec::new(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.replicas == 0 {
            return Err(Error::SimConfig("replicas must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::SimConfig("max_steps must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::SimConfig("workers must be at least 1".into()));
        }
        let bad = |g: &[f64]| g.iter().any(|a| !(a.is_finite() && *a >= 0.0));
        if bad(&self.lambda_grid) || bad(&self.u_grid) {
            return Err(Error::SimConfig("transform arguments must be finite and non-negative".into()));
        }
        match self.mode {
            SimMode::Discrete if !self.u_grid.is_empty() => {
                Err(Error::SimConfig("u-domain transforms need ctmc mode".into()))
            }
            SimMode::Ctmc if !self.lambda_grid.is_empty() => {
                Err(Error::SimConfig("λ-domain transforms need discrete mode".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Membership test for the running state.
#[derive(Clone, Debug)]
pub enum SimTarget {
    States(FxHashSet<Vec<u32>>),
    /// Exactly `overlap` balls in `urn`, tracked by a running counter.
    Count {
        overlap: u32,
        urn: u32,
    },
}

impl SimTarget {
    pub fn from_states(states: &[State]) -> Result<Self, Error> {
        if states.is_empty() {
            return Err(Error::Descriptor("target set is empty".into()));
        }
        Ok(SimTarget::States(states.iter().map(|s| s.positions().to_vec()).collect()))
    }

    pub fn from_descriptor(d: &SetDescriptor, params: &ModelParams) -> Result<Self, Error> {
        match d {
            SetDescriptor::Count { overlap, urn } => {
                if *overlap > params.balls() || *urn == 0 || *urn > params.urns() {
                    return Err(Error::Descriptor(format!(
                        "{d} does not fit N={} M={}",
                        params.urns(),
                        params.balls()
                    )));
                }
                Ok(SimTarget::Count { overlap: *overlap, urn: *urn })
            }
            _ => Self::from_states(&materialize(d, params)?),
        }
    }
}

/// One trajectory of the embedded chain.
#[derive(Clone, Debug)]
pub struct Walker {
    urns: u32,
    positions: Vec<u32>,
    rng: ChaCha8Rng,
    holding: Exp<f64>,
}

/// A single transition: `ball` (0-based) moved `from` one urn `to` another.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub ball: usize,
    pub from: u32,
    pub to: u32,
}

impl Walker {
    pub fn new(params: &ModelParams, start: &State, seed: u64, stream: u64) -> Result<Self, Error> {
        params.check_state(start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let holding = Exp::new(params.balls() as f64).expect("positive rate");
        Ok(Walker { urns: params.urns(), positions: start.positions().to_vec(), rng, holding })
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    /// Moves a uniform ball to a uniform different urn.
    pub fn step(&mut self) -> Move {
        let ball = self.rng.random_range(0..self.positions.len());
        let from = self.positions[ball];
        let mut to = self.rng.random_range(1..self.urns);
        if to >= from {
            to += 1;
        }
        self.positions[ball] = to;
        Move { ball, from, to }
    }

    /// An Exp(M) holding time.
    pub fn hold(&mut self) -> f64 {
        self.rng.sample(self.holding)
    }
}

/// Hitting-time samples in replica order; `None` marks a truncated replica.
pub fn sample_times(
    params: &ModelParams,
    start: &State,
    target: &SimTarget,
    cfg: &SimConfig,
) -> Result<Vec<Option<f64>>, Error> {
    cfg.validate()?;
    params.check_state(start)?;
    let run = || -> Result<Vec<Option<f64>>, Error> {
        (0..cfg.replicas).into_par_iter().map(|r| run_replica(params, start, target, cfg, r)).collect()
    };
    match cfg.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::SimConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn run_replica(
    params: &ModelParams,
    start: &State,
    target: &SimTarget,
    cfg: &SimConfig,
    replica: u64,
) -> Result<Option<f64>, Error> {
    let mut walker = Walker::new(params, start, cfg.seed, replica)?;
    let ctmc = cfg.mode == SimMode::Ctmc;
    let mut count = match target {
        SimTarget::Count { urn, .. } => start.positions().iter().filter(|&&u| u == *urn).count() as u32,
        SimTarget::States(_) => 0,
    };
    let hit = |w: &Walker, count: u32| match target {
        SimTarget::States(set) => set.contains(w.positions()),
        SimTarget::Count { overlap, .. } => count == *overlap,
    };
    if hit(&walker, count) {
        return Ok(Some(0.0));
    }
    let mut elapsed = 0.0;
    for step in 1..=cfg.max_steps {
        if ctmc {
            elapsed += walker.hold();
        }
        let mv = walker.step();
        if let SimTarget::Count { urn, .. } = target {
            if mv.from == *urn {
                count -= 1;
            } else if mv.to == *urn {
                count += 1;
            }
        }
        if hit(&walker, count) {
            return Ok(Some(if ctmc { elapsed } else { step as f64 }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformEstimate {
    pub argument: f64,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimSummary {
    pub seed: u64,
    pub replicas: u64,
    pub mode: SimMode,
    pub max_steps: u64,
    pub completed: u64,
    pub truncated: u64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub transforms: Vec<TransformEstimate>,
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, f64) {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let var = if n > 1 { values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (mean, var, (var / n as f64).sqrt())
}

/// `E[e^{-aT}]` with its standard error for each argument `a`.
pub fn empirical_transform(samples: &[f64], arguments: &[f64]) -> Result<Vec<TransformEstimate>, Error> {
    if samples.is_empty() {
        return Err(Error::SimConfig("no samples to estimate from".into()));
    }
    Ok(arguments
        .iter()
        .map(|&a| {
            let (estimate, _, stderr) = mean_and_stderr(samples.iter().map(move |&t| (-a * t).exp()));
            TransformEstimate { argument: a, estimate, stderr }
        })
        .collect())
}

pub fn sample_hitting(
    params: &ModelParams,
    start: &State,
    target: &SimTarget,
    cfg: &SimConfig,
) -> Result<SimSummary, Error> {
    let raw = sample_times(params, start, target, cfg)?;
    let samples: Vec<f64> = raw.iter().flatten().copied().collect();
    let truncated = (raw.len() - samples.len()) as u64;
    if truncated > 0 {
        log::warn!("{truncated} of {} replicas hit the {}-step cap and were excluded", cfg.replicas, cfg.max_steps);
    }
    if samples.is_empty() {
        return Err(Error::SimConfig(format!("all {} replicas were truncated", cfg.replicas)));
    }
    let (mean, variance, stderr) = mean_and_stderr(samples.iter().copied());
    let grid = match cfg.mode {
        SimMode::Discrete => &cfg.lambda_grid,
        SimMode::Ctmc => &cfg.u_grid,
    };
    Ok(SimSummary {
        seed: cfg.seed,
        replicas: cfg.replicas,
        mode: cfg.mode,
        max_steps: cfg.max_steps,
        completed: samples.len() as u64,
        truncated,
        mean,
        variance,
        stderr,
        transforms: empirical_transform(&samples, grid)?,
    })
}
