//! Ground truth by brute force: first-step equations on the enumerated state
//! space, solved exactly, plus the lumped count chain and a floating-point
//! fallback for larger spaces.

mod chain;
pub(crate) mod dense;
mod dixon;
mod float;
mod lumped;

pub use chain::{AbsorbingSystem, EnumeratedChain};
pub use dense::solve_dense;
pub use float::{FloatSystem, FLOAT_CAP};
pub use lumped::lumped_count_oracle;

use crate::engine::{HittingSummary, TransformDomain, TransformSample};
use crate::error::Error;
use crate::model::State;
use crate::numeric::{expm1, Rational};

/// Default bound on `N^M` for exact solves.
pub const DEFAULT_CAP: u128 = 2000;

pub fn solve_mean(chain: &EnumeratedChain, target: &[State], x: &State) -> Result<Rational, Error> {
    let sys = AbsorbingSystem::new(chain, target)?;
    let i = chain.index_of(x)?;
    Ok(sys.mean_vector()?.swap_remove(i))
}

pub fn solve_second_moment(chain: &EnumeratedChain, target: &[State], x: &State) -> Result<Rational, Error> {
    Ok(solve_raw_moments(chain, target, x, 2)?.swap_remove(1))
}

/// `E^x[T_A^m]` for `m = 1..=order`.
pub fn solve_raw_moments(
    chain: &EnumeratedChain,
    target: &[State],
    x: &State,
    order: usize,
) -> Result<Vec<Rational>, Error> {
    let sys = AbsorbingSystem::new(chain, target)?;
    let i = chain.index_of(x)?;
    Ok(sys.moment_vectors(order)?.into_iter().map(|mut w| w.swap_remove(i)).collect())
}

/// `E^x[z^{T_A}]` for `0 < z < 1`.
pub fn solve_transform(chain: &EnumeratedChain, target: &[State], x: &State, z: &Rational) -> Result<Rational, Error> {
    let sys = AbsorbingSystem::new(chain, target)?;
    let i = chain.index_of(x)?;
    Ok(sys.transform_vector(z)?.swap_remove(i))
}

/// Probability of entering the target at each of its members, in the order
/// given.
pub fn solve_exit_distribution(
    chain: &EnumeratedChain,
    target: &[State],
    x: &State,
) -> Result<Vec<(State, Rational)>, Error> {
    let sys = AbsorbingSystem::new(chain, target)?;
    let i = chain.index_of(x)?;
    let exits = sys.exit_vectors()?;
    Ok(target.iter().cloned().zip(exits.into_iter().map(|mut v| v.swap_remove(i))).collect())
}

/// The generating-function argument `z = M/(u + M)` matching `u`.
pub fn z_for_u(m: u32, u: &Rational) -> Rational {
    let big_m = Rational::from(m);
    &big_m / (u + &big_m)
}

/// Same report as the engine's, computed from the enumerated chain. Works for
/// any target, symmetric or not.
pub fn oracle_summary(
    chain: &EnumeratedChain,
    target: &[State],
    x: &State,
    order: usize,
    u_grid: &[Rational],
    lambda_grid: &[f64],
    digits: u32,
) -> Result<HittingSummary, Error> {
    let sys = AbsorbingSystem::new(chain, target)?;
    let i = chain.index_of(x)?;
    let raw_moments: Vec<Rational> =
        sys.moment_vectors(order.max(2))?.into_iter().map(|mut w| w.swap_remove(i)).collect();
    let mean = raw_moments[0].clone();
    let variance = &raw_moments[1] - &mean * &mean;
    let mut transform_samples = Vec::with_capacity(u_grid.len() + lambda_grid.len());
    for u in u_grid {
        if !u.is_positive() {
            return Err(Error::Domain(format!("transform argument must be positive, got {u}")));
        }
        let v = sys.transform_vector(&z_for_u(chain.params().balls(), u))?.swap_remove(i);
        transform_samples.push(TransformSample {
            domain: TransformDomain::U,
            argument: u.to_string(),
            display: v.to_string(),
            approx: v.to_f64(),
            exact: Some(v),
        });
    }
    for &lambda in lambda_grid {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Domain(format!("λ must be a finite non-negative number, got {lambda}")));
        }
        let v = if lambda == 0.0 {
            Rational::one()
        } else {
            let tol = Rational::from(10i64).pow(-(digits as i32 + 5));
            let e = expm1(&Rational::from_f64(lambda).expect("finite"), &tol);
            let z = (Rational::one() + e).recip().expect("positive");
            sys.transform_vector(&z)?.swap_remove(i)
        };
        transform_samples.push(TransformSample {
            domain: TransformDomain::Lambda,
            argument: lambda.to_string(),
            exact: None,
            approx: v.to_f64(),
            display: v.to_sci_string(digits),
        });
    }
    let exits = sys.exit_vectors()?;
    let exit_distribution = Some(target.iter().cloned().zip(exits.into_iter().map(|mut v| v.swap_remove(i))).collect());
    let mut raw_moments = raw_moments;
    raw_moments.truncate(order.max(1));
    Ok(HittingSummary { mean, variance, raw_moments, transform_samples, exit_distribution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::two_point_stats_for_states;
    use crate::engine::{HittingEngine, HittingQuery};
    use crate::model::{materialize, ModelParams, ProductPermutation, SetDescriptor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn st(s: &str) -> State {
        s.parse().unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn chain(n: u32, m: u32) -> EnumeratedChain {
        EnumeratedChain::new(ModelParams::new(n, m).unwrap(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn mean_examples() {
        let c = chain(3, 2);
        assert_eq!(solve_mean(&c, &[st("2,2")], &st("1,1")).unwrap(), r("10"));
        assert!(solve_mean(&c, &[st("2,2")], &st("2,2")).unwrap().is_zero());
        assert!(solve_mean(&c, &[], &st("2,2")).is_err());

        let c = chain(2, 3);
        let p = *c.params();
        let diag = materialize(&SetDescriptor::Diagonal, &p).unwrap();
        let x = st("1,2,1");
        let q = HittingQuery::new(p, x.clone(), &SetDescriptor::Diagonal).unwrap();
        assert_eq!(solve_mean(&c, &diag, &x).unwrap(), HittingEngine::new(p).mean(&q).unwrap());
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(solve_second_moment(&chain(3, 1), &[st("2")], &st("1")).unwrap(), r("6"));
        assert_eq!(solve_second_moment(&chain(2, 2), &[st("2,2")], &st("1,1")).unwrap(), r("24"));
        assert!(solve_second_moment(&chain(2, 2), &[st("2,2")], &st("2,2")).unwrap().is_zero());
        assert_eq!(solve_raw_moments(&chain(3, 1), &[st("2")], &st("1"), 3).unwrap(), vec![r("2"), r("6"), r("26")]);
    }

    #[test]
    fn transform_examples() {
        let c = chain(3, 1);
        assert_eq!(solve_transform(&c, &[st("2")], &st("1"), &r("1/2")).unwrap(), r("1/3"));
        assert_eq!(solve_transform(&c, &[st("2")], &st("2"), &r("1/2")).unwrap(), r("1"));
        assert!(solve_transform(&c, &[st("2")], &st("1"), &r("1")).is_err());
        assert!(solve_transform(&c, &[st("2")], &st("1"), &r("0")).is_err());
        // z = M/(u+M) at u = 1 matches the u-domain transform
        let p = *c.params();
        let q = HittingQuery::new(p, st("1"), &"singleton:2".parse().unwrap()).unwrap();
        let u = r("1");
        assert_eq!(
            solve_transform(&c, &[st("2")], &st("1"), &z_for_u(1, &u)).unwrap(),
            HittingEngine::new(p).laplace_u(&q, &u).unwrap()
        );
    }

    #[test]
    fn exit_examples() {
        let c = chain(3, 2);
        let p = *c.params();
        let diag = materialize(&SetDescriptor::Diagonal, &p).unwrap();
        let e = solve_exit_distribution(&c, &diag, &st("1,2")).unwrap();
        let probs: Vec<Rational> = e.iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(probs, vec![r("2/5"), r("2/5"), r("1/5")]);
        let single = solve_exit_distribution(&c, &[st("3,1")], &st("1,2")).unwrap();
        assert_eq!(single[0].1, Rational::one());
        // symmetric two-point target seen from a start equidistant to both
        let pair = solve_exit_distribution(&c, &[st("1,1"), st("2,2")], &st("3,3")).unwrap();
        assert_eq!((pair[0].1.clone(), pair[1].1.clone()), (r("1/2"), r("1/2")));
    }

    #[test]
    fn two_point_exit_and_strong_markov_decomposition() {
        let c = chain(3, 2);
        let (x, y, z) = (st("1,1"), st("2,2"), st("1,2"));
        let target = [y.clone(), z.clone()];
        let exits = solve_exit_distribution(&c, &target, &x).unwrap();
        let closed = two_point_stats_for_states(c.params(), &x, &y, &z).unwrap();
        assert_eq!(exits[0].1, closed.exit_prob_y);
        assert_eq!(solve_mean(&c, &target, &x).unwrap(), closed.mean);
        let lhs = solve_mean(&c, std::slice::from_ref(&z), &x).unwrap();
        let rhs =
            solve_mean(&c, &target, &x).unwrap() + &exits[0].1 * solve_mean(&c, std::slice::from_ref(&z), &y).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exit_distribution_sums_to_one() {
        let c = chain(3, 3);
        let target = vec![st("1,1,1"), st("2,2,1"), st("1,3,2")];
        for x in c.states().iter().step_by(4) {
            let e = solve_exit_distribution(&c, &target, x).unwrap();
            assert_eq!(e.iter().map(|(_, v)| v.clone()).sum::<Rational>(), Rational::one());
        }
    }

    #[test]
    fn reordering_invariance() {
        let c = chain(3, 3);
        let p = *c.params();
        let target = vec![st("1,1,1"), st("2,2,1"), st("1,3,2")];
        let x = st("3,2,3");
        let base = solve_raw_moments(&c, &target, &x, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let tau = ProductPermutation::random(&p, &mut rng);
            let moved = solve_raw_moments(&c, &tau.apply_set(&target), &tau.apply(&x), 2).unwrap();
            assert_eq!(moved, base);
        }
        let mut shuffled = target.clone();
        shuffled.reverse();
        assert_eq!(solve_raw_moments(&c, &shuffled, &x, 2).unwrap(), base);
    }

    #[test]
    fn generating_function_slope_at_one() {
        let p = ModelParams::new(3, 3).unwrap();
        let target = vec![st("1,1,1"), st("2,2,1")];
        let f = FloatSystem::new(p, &target, FLOAT_CAP).unwrap();
        let x = f.index_of(&st("3,3,3")).unwrap();
        let eps = 1e-6;
        let slope = (1.0 - f.transform_vector(1.0 - eps).unwrap()[x]) / eps;
        let mean = f.mean_vector().unwrap()[x];
        assert!(((slope - mean) / mean).abs() < 1e-4, "{slope} vs {mean}");
    }

    #[test]
    fn float_agrees_with_exact() {
        for (n, m, d) in [(3, 3, "count:1"), (4, 4, "diagonal"), (2, 8, "pair:1,1,1,1,1,1,1,1;2,1,2,1,2,2,1,1")] {
            let p = ModelParams::new(n, m).unwrap();
            let c = EnumeratedChain::new(p, DEFAULT_CAP).unwrap();
            let target = materialize(&d.parse().unwrap(), &p).unwrap();
            let sys = AbsorbingSystem::new(&c, &target).unwrap();
            let exact = sys.moment_vectors(2).unwrap();
            let z = r("2/3");
            let exact_t = sys.transform_vector(&z).unwrap();
            let f = FloatSystem::new(p, &target, FLOAT_CAP).unwrap();
            let fm = f.mean_vector().unwrap();
            let f2 = f.second_moment_vector().unwrap();
            let ft = f.transform_vector(2.0 / 3.0).unwrap();
            let close = |a: f64, b: &Rational| {
                let b = b.to_f64();
                (a - b).abs() <= 1e-9 * b.abs().max(1.0)
            };
            for i in 0..c.len() {
                assert!(close(fm[i], &exact[0][i]));
                assert!(close(f2[i], &exact[1][i]));
                assert!(close(ft[i], &exact_t[i]));
            }
        }
    }

    #[test]
    fn summary_matches_engine_on_symmetric_target() {
        let c = chain(3, 2);
        let p = *c.params();
        let d: SetDescriptor = "diagonal".parse().unwrap();
        let target = materialize(&d, &p).unwrap();
        let x = st("1,2");
        let grid = [r("1/2"), r("1"), r("2")];
        let o = oracle_summary(&c, &target, &x, 4, &grid, &[0.0, 0.5], 20).unwrap();
        let e = HittingEngine::new(p);
        let q = HittingQuery::new(p, x, &d).unwrap();
        let s = e.summarize(&q, 4, &grid, &[0.0, 0.5], 20).unwrap();
        assert_eq!(o.mean, s.mean);
        assert_eq!(o.variance, s.variance);
        assert_eq!(o.raw_moments, s.raw_moments);
        for (a, b) in o.transform_samples.iter().zip(&s.transform_samples) {
            assert_eq!(a.exact, b.exact);
            if a.domain == TransformDomain::Lambda {
                assert!((a.approx - b.approx).abs() < 1e-15);
            }
        }
        let exits: Vec<Rational> = o.exit_distribution.unwrap().into_iter().map(|(_, v)| v).collect();
        assert_eq!(exits, vec![r("2/5"), r("2/5"), r("1/5")]);
    }

    #[test]
    fn accepts_non_symmetric_target() {
        let c = chain(3, 2);
        let target = vec![st("1,1"), st("2,2"), st("1,2")];
        let o = oracle_summary(&c, &target, &st("3,3"), 2, &[r("1")], &[], 20).unwrap();
        assert!(o.mean.is_positive());
    }

    #[test]
    fn lumping_matches_full_chain() {
        for (n, m) in [(2, 4), (3, 3), (4, 2), (5, 3)] {
            let p = ModelParams::new(n, m).unwrap();
            let c = EnumeratedChain::new(p, DEFAULT_CAP).unwrap();
            for urn in [1, 2] {
                for h in 0..=m {
                    let target = materialize(&SetDescriptor::Count { overlap: h, urn }, &p).unwrap();
                    let sys = AbsorbingSystem::new(&c, &target).unwrap();
                    let means = sys.mean_vector().unwrap();
                    for (i, x) in c.states().iter().enumerate() {
                        let k = x.positions().iter().filter(|&&u| u == urn).count() as u32;
                        assert_eq!(means[i], lumped_count_oracle(&p, urn, k, h).unwrap());
                    }
                }
            }
        }
    }
}
