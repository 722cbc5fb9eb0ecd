//! The kernel functions `f_k(u)` and `g_k(u)`, their derivatives at 0, and
//! the closed forms derived from them.
//!
//! Both functions are sums over `0 <= i <= k`, `0 <= j <= M-k` of
//! `C(k,i) C(M-k,j) (N-1)^i (-1)^j / (N(i+j) + u(N-1))`; `g_k` drops the
//! `i = j = 0` term. Terms with the same `n = i + j` share a denominator, so
//! the sums are evaluated through the grouped coefficients
//! `c_n = Σ_{i+j=n} C(k,i) C(M-k,j) (N-1)^i (-1)^j`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::Error;
use crate::model::ModelParams;
use crate::numeric::{big_pow, binomial, Rational, SeriesJet};
use crate::quadrature;

/// Quadrature target for [`SpecialFunctionContext::f_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-10;

/// `f_k` / `g_k` for one overlap level `k`.
#[derive(Clone, Debug)]
pub struct SpecialFunctionContext {
    params: ModelParams,
    k: u32,
    /// `coeffs[n]` for `n = 0..=M`.
    coeffs: Vec<BigInt>,
}

impl SpecialFunctionContext {
    pub fn new(params: ModelParams, k: u32) -> Result<Self, Error> {
        let m = params.balls();
        if k > m {
            return Err(Error::Domain(format!("overlap level k={k} outside 0..={m}")));
        }
        let n1 = params.urns() as i64 - 1;
        let mut coeffs = vec![BigInt::zero(); m as usize + 1];
        for i in 0..=k {
            let left = binomial(k as u64, i as i64) * big_pow(n1, i);
            for j in 0..=(m - k) {
                let mut term = &left * binomial((m - k) as u64, j as i64);
                if j % 2 == 1 {
                    term = -term;
                }
                coeffs[(i + j) as usize] += term;
            }
        }
        Ok(SpecialFunctionContext { params, k, coeffs })
    }

    /// Contexts for every `k = 0..=M`.
    pub fn all(params: ModelParams) -> Vec<Self> {
        (0..=params.balls()).map(|k| Self::new(params, k).expect("k in range")).collect()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    fn n(&self) -> Rational {
        Rational::from(self.params.urns())
    }

    fn n1(&self) -> Rational {
        Rational::from(self.params.urns() - 1)
    }

    fn sum_from(&self, first: usize, u: &Rational) -> Rational {
        let n = self.n();
        let shift = u * self.n1();
        self.coeffs
            .iter()
            .enumerate()
            .skip(first)
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| Rational::from(c.clone()) / (&n * Rational::from(idx) + &shift))
            .sum()
    }

    /// `f_k(u)` for `u > 0`.
    pub fn f(&self, u: &Rational) -> Result<Rational, Error> {
        if !u.is_positive() {
            return Err(Error::Domain(format!("f_k needs u > 0, got {u}")));
        }
        Ok(self.sum_from(0, u))
    }

    /// `g_k(u)` for `u >= 0`.
    pub fn g(&self, u: &Rational) -> Result<Rational, Error> {
        if u.is_negative() {
            return Err(Error::Domain(format!("g_k needs u >= 0, got {u}")));
        }
        Ok(self.sum_from(1, u))
    }

    pub fn g0(&self) -> Rational {
        self.sum_from(1, &Rational::zero())
    }

    /// Taylor coefficient `[u^m] g_k(u)` at `u = 0`.
    fn g_taylor_coeff(&self, m: u32) -> Rational {
        let n = self.n();
        let base = -self.n1();
        let s: Rational = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| Rational::from(c.clone()) / (&n * Rational::from(idx)).pow(m as i32 + 1))
            .sum();
        base.pow(m as i32) * s
    }

    /// `g_k^{(m)}(0)` for `m >= 1`.
    pub fn g_derivative(&self, m: u32) -> Result<Rational, Error> {
        if m == 0 {
            return Err(Error::Domain("derivative order must be at least 1".into()));
        }
        let fact: Rational = (1..=m).map(Rational::from).product();
        Ok(fact * self.g_taylor_coeff(m))
    }

    /// Taylor jet of `g_k(u)` at `u = 0`.
    pub fn g_jet(&self, order: usize) -> SeriesJet {
        let coeffs = (0..=order as u32).map(|m| self.g_taylor_coeff(m)).collect();
        SeriesJet::from_coeffs(coeffs, order)
    }

    /// `f_k(u)` from its integral representation
    /// `(1/N) ∫_0^1 s^{a-1} [(N-1)s+1]^k (1-s)^{M-k} ds`, `a = (N-1)u/N`.
    pub fn f_quadrature(&self, u: f64) -> Result<f64, Error> {
        if !u.is_finite() || u <= 0.0 {
            return Err(Error::Domain(format!("f_k needs finite u > 0, got {u}")));
        }
        let n = self.params.urns() as f64;
        let k = self.k as i32;
        let rest = (self.params.balls() - self.k) as i32;
        let a = (n - 1.0) * u / n;
        let body = move |s: f64| ((n - 1.0) * s + 1.0).powi(k) * (1.0 - s).powi(rest);
        if a < 1.0 {
            // v = s^a flattens the s^{a-1} singularity: ds s^{a-1} = dv / a.
            let scale = 1.0 / (n * a);
            let integral =
                quadrature::integrate(move |v: f64| body(v.powf(1.0 / a)), 0.0, 1.0, QUADRATURE_TOL / scale)?;
            Ok(scale * integral)
        } else {
            let integral =
                quadrature::integrate(move |s: f64| s.powf(a - 1.0) * body(s), 0.0, 1.0, QUADRATURE_TOL * n)?;
            Ok(integral / n)
        }
    }
}

/// Closed forms for `g_0(0)`, `g_M(0)` and the gaps `g_{k+1}(0) - g_k(0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GClosedForms {
    pub g0: Rational,
    pub g_m: Rational,
    /// `gaps[k] = g_{k+1}(0) - g_k(0)` for `k = 0..M`.
    pub gaps: Vec<Rational>,
}

impl GClosedForms {
    /// `g_k(0)` for all `k`, by telescoping from `g_0`.
    pub fn ladder(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut cur = self.g0.clone();
        out.push(cur.clone());
        for gap in &self.gaps {
            cur += gap;
            out.push(cur.clone());
        }
        out
    }
}

fn harmonic_weighted(params: &ModelParams, f: impl Fn(u32) -> Rational) -> Rational {
    (1..=params.balls()).map(|i| f(i) / Rational::from(i)).sum()
}

/// `(N-1)^k / (M C(M-1,k)) · Σ_{i<=k} C(M,i)/(N-1)^i`.
pub(crate) fn gap(params: &ModelParams, k: u32) -> Rational {
    let m = params.balls();
    let n1 = Rational::from(params.urns() - 1);
    let tail: Rational = (0..=k).map(|i| Rational::from(binomial(m as u64, i as i64)) / n1.pow(i as i32)).sum();
    n1.pow(k as i32) / Rational::from(binomial((m - 1) as u64, k as i64) * BigInt::from(m)) * tail
}

pub fn g_closed_forms(params: &ModelParams) -> GClosedForms {
    let n = Rational::from(params.urns());
    let g0 = -harmonic_weighted(params, |_| Rational::one()) / &n;
    let g_m = harmonic_weighted(params, |i| n.pow(i as i32) - Rational::one()) / &n;
    let gaps = (0..params.balls()).map(|k| gap(params, k)).collect();
    GClosedForms { g0, g_m, gaps }
}

/// `(N-1)/N² · Σ_{i=1}^M (1/i) Σ_{j=1}^i N^j/j`, the closed form of
/// `g_0'(0) - g_M'(0)`.
pub fn g_prime_gap_closed_form(params: &ModelParams) -> Rational {
    let n = Rational::from(params.urns());
    let inner = |i: u32| -> Rational { (1..=i).map(|j| n.pow(j as i32) / Rational::from(j)).sum() };
    let outer = harmonic_weighted(params, inner);
    Rational::from(params.urns() - 1) / (&n * &n) * outer
}

/// Checks, exactly, the two power-sum identities
/// `Σ C(M,i) a^i / i = Σ ((1+a)^i - 1)/i` and
/// `Σ C(M,i) a^i / i² = Σ (1/i) Σ_{j<=i} ((1+a)^j - 1)/j`.
pub fn series_identities_check(params: &ModelParams, a: &Rational) -> bool {
    let m = params.balls();
    let binom_term = |i: u32| Rational::from(binomial(m as u64, i as i64)) * a.pow(i as i32);
    let shifted = |j: u32| (Rational::one() + a).pow(j as i32) - Rational::one();

    let lhs1 = harmonic_weighted(params, binom_term);
    let rhs1 = harmonic_weighted(params, shifted);

    let lhs2: Rational = (1..=m).map(|i| binom_term(i) / Rational::from(i * i)).sum();
    let rhs2 = harmonic_weighted(params, |i| (1..=i).map(|j| shifted(j) / Rational::from(j)).sum());
    lhs1 == rhs1 && lhs2 == rhs2
}

/// `E[g_{ζ+1}(0) - g_ζ(0)]` for `ζ ~ Binomial(m, 1/(N-1))`, in closed form
/// `(N-1)^{M-m} / (M C(M-1,m)) · Σ_{i=M-m}^{M} C(M,i)/(N-1)^i`.
pub fn binomial_gap_expectation(params: &ModelParams, m: u32) -> Result<Rational, Error> {
    let big_m = params.balls();
    if m >= big_m {
        return Err(Error::Domain(format!("binomial size m={m} outside 0..={}", big_m - 1)));
    }
    let n1 = Rational::from(params.urns() - 1);
    let tail: Rational =
        ((big_m - m)..=big_m).map(|i| Rational::from(binomial(big_m as u64, i as i64)) / n1.pow(i as i32)).sum();
    let lead =
        n1.pow((big_m - m) as i32) / Rational::from(binomial((big_m - 1) as u64, m as i64) * BigInt::from(big_m));
    Ok(lead * tail)
}
