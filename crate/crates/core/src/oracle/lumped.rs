use crate::error::Error;
use crate::model::ModelParams;
use crate::numeric::Rational;
use crate::oracle::dense::solve_dense;

/// Mean hitting time of level `h` from level `k` for the number of balls in
/// `urn`, by first-step analysis on the `M + 1` levels.
///
/// From level `i` the count drops with probability `i/M` (a ball in the urn
/// is picked and always leaves) and rises with probability
/// `(M-i)/(M(N-1))` (a ball elsewhere is picked and lands in the urn).
pub fn lumped_count_oracle(params: &ModelParams, urn: u32, k: u32, h: u32) -> Result<Rational, Error> {
    let m = params.balls();
    if urn == 0 || urn > params.urns() {
        return Err(Error::Domain(format!("reference urn {urn} outside 1..={}", params.urns())));
    }
    if k > m || h > m {
        return Err(Error::Domain(format!("levels k={k}, h={h} must lie in 0..={m}")));
    }
    if k == h {
        return Ok(Rational::zero());
    }
    let levels: Vec<u32> = (0..=m).filter(|&i| i != h).collect();
    let slot = |i: u32| levels.iter().position(|&l| l == i);
    let big_m = Rational::from(m);
    let spread = &big_m * Rational::from(params.urns() - 1);
    let size = levels.len();
    let mut a = vec![vec![Rational::zero(); size]; size];
    let b = vec![Rational::one(); size];
    for (row, &i) in levels.iter().enumerate() {
        let down = Rational::from(i) / &big_m;
        let up = Rational::from(m - i) / &spread;
        a[row][row] = &down + &up;
        if i > 0 {
            if let Some(c) = slot(i - 1) {
                a[row][c] -= &down;
            }
        }
        if i < m {
            if let Some(c) = slot(i + 1) {
                a[row][c] -= &up;
            }
        }
    }
    let x = solve_dense(a, b)?;
    Ok(x[slot(k).expect("k differs from h")].clone())
}
