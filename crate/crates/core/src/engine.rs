//! Hitting-time transforms and moments for targets in the symmetric family.
//!
//! Every quantity is a ratio of sums `Σ_{z∈A} φ(s(x,z))` over the target,
//! so a query only keeps the overlap profiles of the start and of a reference
//! member `y`, the smallest state of the target.

use serde::Serialize;

use crate::error::Error;
use crate::model::{materialize, overlap_profile, symmetry_witness, ModelParams, SetDescriptor, State};
use crate::numeric::{expm1, Rational, SeriesJet};
use crate::special::SpecialFunctionContext;

/// Built-in descriptor kinds are symmetric by construction; above this size
/// the quadratic membership test is skipped for them.
pub const SYMMETRY_CHECK_LIMIT: usize = 2048;

/// Significant digits for rendered λ-domain values unless overridden.
pub const DEFAULT_DIGITS: u32 = 20;

/// A start state and a validated symmetric target.
#[derive(Clone, Debug)]
pub struct HittingQuery {
    params: ModelParams,
    start: State,
    target: Vec<State>,
    start_profile: Vec<u64>,
    reference_profile: Vec<u64>,
    start_in_target: bool,
}

impl HittingQuery {
    pub fn new(params: ModelParams, start: State, descriptor: &SetDescriptor) -> Result<Self, Error> {
        let target = materialize(descriptor, &params)?;
        let check = !descriptor.is_structurally_symmetric() || target.len() <= SYMMETRY_CHECK_LIMIT;
        Self::build(params, start, target, check)
    }

    /// Query against an explicit list of states; duplicates are rejected.
    pub fn from_states(params: ModelParams, start: State, target: Vec<State>) -> Result<Self, Error> {
        let target = materialize(&SetDescriptor::Explicit(target), &params)?;
        Self::build(params, start, target, true)
    }

    fn build(params: ModelParams, start: State, target: Vec<State>, check: bool) -> Result<Self, Error> {
        params.check_state(&start)?;
        if check {
            if let Some(w) = symmetry_witness(&target) {
                return Err(Error::NotSymmetric(Box::new(w)));
            }
        }
        let start_profile = overlap_profile(&start, &target);
        let reference_profile = overlap_profile(&target[0], &target);
        let start_in_target = target.binary_search(&start).is_ok();
        Ok(HittingQuery { params, start, target, start_profile, reference_profile, start_in_target })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn start(&self) -> &State {
        &self.start
    }

    /// The materialized target, sorted.
    pub fn target(&self) -> &[State] {
        &self.target
    }

    pub fn reference(&self) -> &State {
        &self.target[0]
    }

    pub fn start_profile(&self) -> &[u64] {
        &self.start_profile
    }

    pub fn reference_profile(&self) -> &[u64] {
        &self.reference_profile
    }

    pub fn start_in_target(&self) -> bool {
        self.start_in_target
    }

    fn size(&self) -> Rational {
        Rational::from(self.target.len())
    }
}

/// One evaluation of the transform at a λ-domain argument.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaValue {
    pub lambda: f64,
    /// The rational stand-in for `M(e^λ - 1)` that was used.
    pub u: Rational,
    /// Exact transform value at `u`.
    pub value_at_u: Rational,
    /// `value_at_u` to the requested significant digits.
    pub rendered: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformDomain {
    U,
    Lambda,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformSample {
    pub domain: TransformDomain,
    pub argument: String,
    /// Exact value; absent for λ-domain samples.
    pub exact: Option<Rational>,
    /// Exact string for u-domain samples, rounded decimal for λ.
    pub display: String,
    pub approx: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CtmcStats {
    pub mean: Rational,
    pub variance: Rational,
}

impl CtmcStats {
    /// Continuous-time mean and variance from the discrete ones: the jump
    /// count is the discrete hitting time and holding times are Exp(M).
    pub fn from_discrete(mean: &Rational, variance: &Rational, balls: u32) -> Self {
        let m = Rational::from(balls);
        CtmcStats { variance: (variance + mean) / (&m * &m), mean: mean / &m }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HittingSummary {
    pub mean: Rational,
    pub variance: Rational,
    pub raw_moments: Vec<Rational>,
    pub transform_samples: Vec<TransformSample>,
    /// Filled by callers that know a closed form or run the oracle.
    pub exit_distribution: Option<Vec<(State, Rational)>>,
}

/// Evaluator for one `(N, M)`; immutable after construction and shareable
/// across threads.
#[derive(Clone, Debug)]
pub struct HittingEngine {
    params: ModelParams,
    kernels: Vec<SpecialFunctionContext>,
    g_at_zero: Vec<Rational>,
    g_slope: Vec<Rational>,
}

impl HittingEngine {
    pub fn new(params: ModelParams) -> Self {
        let kernels = SpecialFunctionContext::all(params);
        let g_at_zero = kernels.iter().map(|c| c.g0()).collect();
        let g_slope = kernels.iter().map(|c| c.g_derivative(1).expect("first derivative")).collect();
        HittingEngine { params, kernels, g_at_zero, g_slope }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `g_k(0)` for `k = 0..=M`.
    pub fn g_values(&self) -> &[Rational] {
        &self.g_at_zero
    }

    fn check(&self, q: &HittingQuery) -> Result<(), Error> {
        if q.params != self.params {
            return Err(Error::Params(format!(
                "query built for N={} M={}, engine for N={} M={}",
                q.params.urns(),
                q.params.balls(),
                self.params.urns(),
                self.params.balls()
            )));
        }
        Ok(())
    }

    fn weighted(profile: &[u64], values: &[Rational]) -> Rational {
        profile.iter().zip(values).filter(|(&c, _)| c > 0).map(|(&c, v)| Rational::from(c) * v).sum()
    }

    fn f_values(&self, u: &Rational) -> Result<Vec<Rational>, Error> {
        self.kernels.iter().map(|c| c.f(u)).collect()
    }

    /// `E^x[e^{-u T^Y}]` for the continuous-time chain, `u > 0`.
    pub fn laplace_u(&self, q: &HittingQuery, u: &Rational) -> Result<Rational, Error> {
        self.check(q)?;
        if !u.is_positive() {
            return Err(Error::Domain(format!("transform argument must be positive, got {u}")));
        }
        if q.start_in_target {
            return Ok(Rational::one());
        }
        let f = self.f_values(u)?;
        let num = Self::weighted(&q.start_profile, &f);
        let den = Self::weighted(&q.reference_profile, &f);
        num.checked_div(&den).ok_or_else(|| Error::Domain("transform denominator vanished".into()))
    }

    /// `E^x[e^{-λ T}]` through `u = M(e^λ - 1)`, with `u` approximated to
    /// relative error `10^{-(digits+5)}` and the result rendered to `digits`
    /// significant digits.
    pub fn laplace_lambda(&self, q: &HittingQuery, lambda: f64, digits: u32) -> Result<LambdaValue, Error> {
        self.check(q)?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Domain(format!("λ must be a finite non-negative number, got {lambda}")));
        }
        if digits == 0 {
            return Err(Error::Domain("digits must be at least 1".into()));
        }
        if lambda == 0.0 {
            let one = Rational::one();
            return Ok(LambdaValue {
                lambda,
                u: Rational::zero(),
                rendered: one.to_sci_string(digits),
                value_at_u: one,
            });
        }
        let lam = Rational::from_f64(lambda).expect("finite");
        let tol = Rational::from(10i64).pow(-(digits as i32 + 5));
        let u = Rational::from(self.params.balls()) * expm1(&lam, &tol);
        let value_at_u = self.laplace_u(q, &u)?;
        Ok(LambdaValue { lambda, u, rendered: value_at_u.to_sci_string(digits), value_at_u })
    }

    /// `G_u(x, {z}) = (N-1)/N^M · f_{s(x,z)}(u)`.
    pub fn green_potential(&self, x: &State, z: &State, u: &Rational) -> Result<Rational, Error> {
        let k = crate::model::overlap(x, z)?;
        self.params.check_state(x)?;
        self.params.check_state(z)?;
        let scale =
            Rational::from(self.params.urns() - 1) / Rational::from(self.params.urns()).pow(self.params.balls() as i32);
        Ok(scale * self.kernels[k].f(u)?)
    }

    pub fn mean(&self, q: &HittingQuery) -> Result<Rational, Error> {
        self.check(q)?;
        if q.start_in_target {
            return Ok(Rational::zero());
        }
        let diff =
            Self::weighted(&q.reference_profile, &self.g_at_zero) - Self::weighted(&q.start_profile, &self.g_at_zero);
        Ok(Rational::from(self.params.degree()) / q.size() * diff)
    }

    pub fn variance(&self, q: &HittingQuery) -> Result<Rational, Error> {
        let mean = self.mean(q)?;
        if q.start_in_target {
            return Ok(Rational::zero());
        }
        let m = Rational::from(self.params.balls());
        let slopes =
            Self::weighted(&q.start_profile, &self.g_slope) - Self::weighted(&q.reference_profile, &self.g_slope);
        let level = Self::weighted(&q.start_profile, &self.g_at_zero);
        let bracket = &m * slopes + &mean * level;
        let lead = Rational::from(2 * self.params.degree()) / q.size();
        Ok(lead * bracket + &mean * &mean - &mean)
    }

    /// Jets in `u` of `|A| + u(N-1) Σ_z g_{s(·,z)}(u)` for the start and the
    /// reference member.
    fn transform_jets(&self, q: &HittingQuery, order: usize) -> Result<(SeriesJet, SeriesJet), Error> {
        let jets: Vec<SeriesJet> = self.kernels.iter().map(|c| c.g_jet(order)).collect();
        let n1 = Rational::from(self.params.urns() - 1);
        let build = |profile: &[u64]| -> Result<SeriesJet, Error> {
            let mut acc = SeriesJet::zero(order);
            for (&c, jet) in profile.iter().zip(&jets) {
                if c > 0 {
                    acc = acc.add(&jet.scale(&Rational::from(c)))?;
                }
            }
            acc.shift().scale(&n1).add(&SeriesJet::constant(q.size(), order))
        };
        Ok((build(&q.start_profile)?, build(&q.reference_profile)?))
    }

    fn moments_from_jet(jet: &SeriesJet, count: usize) -> Vec<Rational> {
        (1..=count)
            .map(|m| {
                let d = jet.derivative(m);
                if m % 2 == 1 {
                    -d
                } else {
                    d
                }
            })
            .collect()
    }

    /// `E^x[T^m]` for `m = 1..=order`.
    pub fn raw_moments(&self, q: &HittingQuery, order: usize) -> Result<Vec<Rational>, Error> {
        self.check(q)?;
        if order == 0 {
            return Err(Error::Domain("moment order must be at least 1".into()));
        }
        if q.start_in_target {
            return Ok(vec![Rational::zero(); order]);
        }
        let jet_order = order.max(2) + 1;
        let (num, den) = self.transform_jets(q, jet_order)?;
        let inner = SeriesJet::scaled_expm1(&Rational::from(self.params.balls()), jet_order);
        let lt = num.compose(&inner)?.div(&den.compose(&inner)?)?;
        Ok(Self::moments_from_jet(&lt, order))
    }

    /// `E^x[(T^Y)^m]` for `m = 1..=order`, read from the u-domain transform.
    pub fn ctmc_raw_moments(&self, q: &HittingQuery, order: usize) -> Result<Vec<Rational>, Error> {
        self.check(q)?;
        if order == 0 {
            return Err(Error::Domain("moment order must be at least 1".into()));
        }
        if q.start_in_target {
            return Ok(vec![Rational::zero(); order]);
        }
        let (num, den) = self.transform_jets(q, order.max(2) + 1)?;
        Ok(Self::moments_from_jet(&num.div(&den)?, order))
    }

    pub fn ctmc_stats(&self, q: &HittingQuery) -> Result<CtmcStats, Error> {
        Ok(CtmcStats::from_discrete(&self.mean(q)?, &self.variance(q)?, self.params.balls()))
    }

    /// Mean, variance, moments to `order` and transform samples.
    pub fn summarize(
        &self,
        q: &HittingQuery,
        order: usize,
        u_grid: &[Rational],
        lambda_grid: &[f64],
        digits: u32,
    ) -> Result<HittingSummary, Error> {
        let mean = self.mean(q)?;
        let variance = self.variance(q)?;
        let raw_moments = self.raw_moments(q, order.max(1))?;
        let mut transform_samples = Vec::with_capacity(u_grid.len() + lambda_grid.len());
        for u in u_grid {
            let v = self.laplace_u(q, u)?;
            transform_samples.push(TransformSample {
                domain: TransformDomain::U,
                argument: u.to_string(),
                display: v.to_string(),
                approx: v.to_f64(),
                exact: Some(v),
            });
        }
        for &lambda in lambda_grid {
            let v = self.laplace_lambda(q, lambda, digits)?;
            transform_samples.push(TransformSample {
                domain: TransformDomain::Lambda,
                argument: lambda.to_string(),
                exact: None,
                approx: v.value_at_u.to_f64(),
                display: v.rendered,
            });
        }
        Ok(HittingSummary { mean, variance, raw_moments, transform_samples, exit_distribution: None })
    }
}
