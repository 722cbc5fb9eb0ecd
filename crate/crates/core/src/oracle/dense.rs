use crate::error::Error;
use crate::numeric::Rational;

/// Gaussian elimination over the rationals for small dense systems.
pub fn solve_dense(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Result<Vec<Rational>, Error> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Solve(format!("expected a {n}x{n} matrix")));
    }
    for c in 0..n {
        let pivot = (c..n)
            .find(|&r| !a[r][c].is_zero())
            .ok_or_else(|| Error::Solve(format!("singular matrix at column {c}")))?;
        a.swap(c, pivot);
        b.swap(c, pivot);
        let inv = a[c][c].recip().expect("nonzero pivot");
        for r in (c + 1)..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] * &inv;
            let (upper, lower) = a.split_at_mut(r);
            for (dst, src) in lower[0][c..].iter_mut().zip(&upper[c][c..]) {
                *dst -= &f * src;
            }
            let d = &f * &b[c];
            b[r] -= d;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let s: Rational = ((i + 1)..n).map(|k| &a[i][k] * &x[k]).sum();
        x[i] = (&b[i] - s) / &a[i][i];
    }
    Ok(x)
}
