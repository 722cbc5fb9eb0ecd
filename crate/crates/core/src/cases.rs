//! Closed-form hitting statistics for particular targets.
//!
//! Values of `g_k(0)` come from the telescoped closed forms in
//! [`crate::special::g_closed_forms`], not from the kernel sums the engine
//! uses, so agreement between the two is a genuine check.

use serde::Serialize;

use crate::error::Error;
use crate::model::{overlap, ModelParams, State};
use crate::numeric::{binomial, Rational};
use crate::special::g_closed_forms;

fn check_level(params: &ModelParams, k: u32, what: &str) -> Result<(), Error> {
    if k > params.balls() {
        return Err(Error::Domain(format!("{what}={k} outside 0..={}", params.balls())));
    }
    Ok(())
}

fn n1(params: &ModelParams) -> Rational {
    Rational::from(params.urns() - 1)
}

/// `Σ_{i=1}^M N^i / i`.
fn power_harmonic(params: &ModelParams, from: u32) -> Rational {
    let n = Rational::from(params.urns());
    (from..=params.balls()).map(|i| n.pow(i as i32) / Rational::from(i)).sum()
}

/// Reciprocal edge conductance `(N-1)^{i+1} / C(M-1, i)` of the count chain.
fn edge_resistance(params: &ModelParams, i: u32) -> Rational {
    n1(params).pow(i as i32 + 1) / Rational::from(binomial(params.balls() as u64 - 1, i as i64))
}

/// Vertex weight `C(M, j) / (N-1)^j` of the count chain.
fn vertex_weight(params: &ModelParams, j: u32) -> Rational {
    Rational::from(binomial(params.balls() as u64, j as i64)) / n1(params).pow(j as i32)
}

/// Mean hitting time of a single state from a start at overlap `k` with it.
pub fn singleton_mean(params: &ModelParams, k: u32) -> Result<Rational, Error> {
    check_level(params, k, "overlap")?;
    Ok((k..params.balls())
        .map(|j| edge_resistance(params, j) * (0..=j).map(|l| vertex_weight(params, l)).sum::<Rational>())
        .sum())
}

/// Mean hitting time of a single state from a start sharing no coordinate
/// with it: `(M(N-1)/N) Σ N^i/i`.
pub fn singleton_mean_disjoint(params: &ModelParams) -> Rational {
    Rational::from(params.degree()) / Rational::from(params.urns()) * power_harmonic(params, 1)
}

/// Variance of the hitting time of a single state from a disjoint start.
pub fn singleton_variance_disjoint(params: &ModelParams) -> Rational {
    let n = Rational::from(params.urns());
    let m = params.balls();
    let s = power_harmonic(params, 1);
    let cross: Rational = (1..=m)
        .map(|i| {
            let tail: Rational = ((i + 1)..=m).map(|j| n.pow(j as i32) / Rational::from(j)).sum();
            tail / Rational::from(i)
        })
        .sum();
    let d = Rational::from(params.degree()) / &n;
    &d * &d * (&s * &s - Rational::from(2i64) * cross) - d * s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoPointStats {
    pub mean: Rational,
    pub exit_prob_y: Rational,
}

/// Mean hitting time of `{y, z}` from `x` and the probability of entering
/// at `y`, from the three pairwise overlaps.
///
/// The overlaps are not checked for joint realizability by three states;
/// an unrealizable triple yields a formal value.
pub fn two_point_stats(params: &ModelParams, sxy: u32, sxz: u32, syz: u32) -> Result<TwoPointStats, Error> {
    for (v, name) in [(sxy, "s(x,y)"), (sxz, "s(x,z)"), (syz, "s(y,z)")] {
        check_level(params, v, name)?;
    }
    if syz == params.balls() {
        return Err(Error::Domain("the two target states coincide".into()));
    }
    let g = g_closed_forms(params).ladder();
    let gm = &g[params.balls() as usize];
    let (gxy, gxz, gyz) = (&g[sxy as usize], &g[sxz as usize], &g[syz as usize]);
    let mean = Rational::from(params.degree()) / Rational::from(2i64) * (gm + gyz - gxy - gxz);
    let exit_prob_y = (gm + gxy - gxz - gyz) / (Rational::from(2i64) * (gm - gyz));
    Ok(TwoPointStats { mean, exit_prob_y })
}

/// [`two_point_stats`] for concrete states; `y` and `z` must differ.
pub fn two_point_stats_for_states(
    params: &ModelParams,
    x: &State,
    y: &State,
    z: &State,
) -> Result<TwoPointStats, Error> {
    for s in [x, y, z] {
        params.check_state(s)?;
    }
    if y == z {
        return Err(Error::Domain(format!("target states must differ, both are {y}")));
    }
    let o = |a: &State, b: &State| overlap(a, b).map(|v| v as u32);
    two_point_stats(params, o(x, y)?, o(x, z)?, o(y, z)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SameUrnStats {
    pub mean: Rational,
    /// `exit[i-1]` is the probability of first reaching `(i, ..., i)`.
    pub exit: Vec<Rational>,
}

/// Hitting statistics for the diagonal `{(i, ..., i)}`.
pub fn same_urn_stats(params: &ModelParams, x: &State) -> Result<SameUrnStats, Error> {
    params.check_state(x)?;
    let n = params.urns() as usize;
    let g = g_closed_forms(params).ladder();
    let mut occupancy = vec![0usize; n];
    for &u in x.positions() {
        occupancy[u as usize - 1] += 1;
    }
    let gn: Vec<&Rational> = occupancy.iter().map(|&c| &g[c]).collect();
    let total: Rational = gn.iter().copied().sum();
    let (g0, gm) = (&g[0], &g[params.balls() as usize]);
    let big_n = Rational::from(params.urns());
    let mean = Rational::from(params.degree()) / &big_n * (gm + n1(params) * g0 - &total);
    let avg = total / &big_n;
    let spread = gm - g0;
    let exit = gn.iter().map(|&gi| big_n.recip().expect("N >= 2") + (gi - &avg) / &spread).collect();
    Ok(SameUrnStats { mean, exit })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SameUrnCorollary {
    pub mean: Rational,
    /// Exit probability at `(i, ..., i)` for urns `i <= M`.
    pub p_low: Rational,
    /// Exit probability for urns `i > M`; unused when `M = N`.
    pub p_high: Rational,
}

/// [`same_urn_stats`] from `x = (1, 2, ..., M)`, in closed form; `M <= N`.
pub fn same_urn_corollary(params: &ModelParams) -> Result<SameUrnCorollary, Error> {
    let (n, m) = (params.urns(), params.balls());
    if m > n {
        return Err(Error::Domain(format!("needs M <= N, got N={n} M={m}")));
    }
    let big_n = Rational::from(n);
    let s = power_harmonic(params, 1);
    let mean = Rational::from(params.degree()) / (&big_n * &big_n) * power_harmonic(params, 2);
    let p_low = big_n.recip().expect("N >= 2") + Rational::from(n - m) / (Rational::from(m) * &s);
    let p_high = big_n.recip().expect("N >= 2") - s.recip().expect("positive");
    Ok(SameUrnCorollary { mean, p_low, p_high })
}

/// Distribution of the number of fixed points of a uniform permutation of
/// `M` items, `k = 0..=M`.
pub fn rencontres_profile(m: u32) -> Result<Vec<Rational>, Error> {
    if m < 2 {
        return Err(Error::Domain(format!("needs M >= 2, got {m}")));
    }
    let fact = |k: u32| -> Rational { (1..=k).map(Rational::from).product() };
    let mut out = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        let p = if k + 1 == m {
            Rational::zero()
        } else if k == m {
            fact(m).recip().expect("nonzero")
        } else {
            // 1/2! - 1/3! + ... + (-1)^{M-k}/(M-k)!
            let alt: Rational = (2..=(m - k))
                .map(|j| {
                    let t = fact(j).recip().expect("nonzero");
                    if j % 2 == 0 {
                        t
                    } else {
                        -t
                    }
                })
                .sum();
            alt / fact(k)
        };
        out.push(p);
    }
    Ok(out)
}

/// Mean time for `M = N` balls starting in one urn to occupy all urns.
pub fn all_distinct_mean(params: &ModelParams) -> Result<Rational, Error> {
    let (n, m) = (params.urns(), params.balls());
    if m != n {
        return Err(Error::Domain(format!("needs M = N, got N={n} M={m}")));
    }
    let g = g_closed_forms(params).ladder();
    let weights = rencontres_profile(m)?;
    let inner: Rational = (0..=(m - 2) as usize).map(|k| &weights[k] * &g[k]).sum();
    let lead = Rational::from(m as u64 * (m as u64 - 1));
    let tail_fact: Rational = (1..=(m - 2)).map(Rational::from).product();
    Ok(lead * (inner - &g[1]) + &g[m as usize] / tail_fact)
}

/// Mean time to reach `h` balls in the reference urn from `k` balls there.
pub fn count_set_mean(params: &ModelParams, k: u32, h: u32) -> Result<Rational, Error> {
    check_level(params, k, "start level")?;
    check_level(params, h, "target level")?;
    let m = params.balls();
    Ok(if k < h {
        (k..h).map(|i| edge_resistance(params, i) * (0..=i).map(|j| vertex_weight(params, j)).sum::<Rational>()).sum()
    } else {
        (h..k)
            .map(|i| edge_resistance(params, i) * ((i + 1)..=m).map(|j| vertex_weight(params, j)).sum::<Rational>())
            .sum()
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommuteCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
}

/// Commute time between count levels `h < k` against total conductance
/// times effective resistance of the count chain.
pub fn network_commute_check(params: &ModelParams, h: u32, k: u32) -> Result<CommuteCheck, Error> {
    check_level(params, k, "upper level")?;
    if h >= k {
        return Err(Error::Domain(format!("needs h < k, got h={h} k={k}")));
    }
    let lhs = count_set_mean(params, k, h)? + count_set_mean(params, h, k)?;
    let chain = CountChain::new(*params, crate::model::DEFAULT_COUNT_URN)?;
    let rhs = chain.total_weight() * chain.resistance(h, k);
    let equal = lhs == rhs;
    Ok(CommuteCheck { lhs, rhs, equal })
}

/// Birth-death chain of the number of balls in a reference urn, with its
/// electric-network weights.
#[derive(Clone, Debug)]
pub struct CountChain {
    params: ModelParams,
    urn: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelStep {
    pub down: Rational,
    pub stay: Rational,
    pub up: Rational,
}

impl CountChain {
    pub fn new(params: ModelParams, urn: u32) -> Result<Self, Error> {
        if urn == 0 || urn > params.urns() {
            return Err(Error::Domain(format!("reference urn {urn} outside 1..={}", params.urns())));
        }
        Ok(CountChain { params, urn })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn urn(&self) -> u32 {
        self.urn
    }

    pub fn levels(&self) -> u32 {
        self.params.balls() + 1
    }

    /// `C_{i,i+1}`; zero at `i = M`.
    pub fn edge(&self, i: u32) -> Rational {
        if i >= self.params.balls() {
            return Rational::zero();
        }
        edge_resistance(&self.params, i).recip().expect("positive")
    }

    /// `C_{i,i} = (N-2) C_{i,i+1}`.
    pub fn loop_weight(&self, i: u32) -> Rational {
        Rational::from(self.params.urns() - 2) * self.edge(i)
    }

    /// `C_i = C(M,i)/(N-1)^i`.
    pub fn vertex(&self, i: u32) -> Rational {
        vertex_weight(&self.params, i)
    }

    pub fn total_weight(&self) -> Rational {
        (0..self.levels()).map(|i| self.vertex(i)).sum()
    }

    /// Series resistance between levels `h < k`.
    pub fn resistance(&self, h: u32, k: u32) -> Rational {
        (h..k).map(|j| edge_resistance(&self.params, j)).sum()
    }

    /// Transition probabilities out of level `i`.
    pub fn step(&self, i: u32) -> LevelStep {
        let m = self.params.balls();
        let big_m = Rational::from(m);
        let down = Rational::from(i) / &big_m;
        let up = Rational::from(m - i) / (&big_m * n1(&self.params));
        let stay = Rational::from((m - i) as u64 * (self.params.urns() as u64 - 2)) / (&big_m * n1(&self.params));
        LevelStep { down, stay, up }
    }

    /// Transition probabilities out of level `i` as conductance ratios.
    pub fn step_from_weights(&self, i: u32) -> LevelStep {
        let c = self.vertex(i);
        let below = if i == 0 { Rational::zero() } else { self.edge(i - 1) };
        LevelStep { down: below / &c, stay: self.loop_weight(i) / &c, up: self.edge(i) / &c }
    }

    /// `C_{i-1,i} + C_{i,i} + C_{i,i+1}`.
    pub fn incident_weight(&self, i: u32) -> Rational {
        let below = if i == 0 { Rational::zero() } else { self.edge(i - 1) };
        below + self.loop_weight(i) + self.edge(i)
    }
}
