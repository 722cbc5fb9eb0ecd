//! Exact solution of integer linear systems by p-adic lifting.
//!
//! The matrix is factored once modulo a word-size prime. Each lifting step
//! solves for one more p-adic digit of the solution; rational reconstruction
//! then recovers the fractions, and every candidate is accepted only after
//! an exact integer residual check.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::numeric::Rational;

const PRIME_CEILING: u64 = (1 << 31) - 1;
const PRIME_ATTEMPTS: usize = 6;

/// Square matrix with integer entries, stored by rows.
#[derive(Clone, Debug)]
pub(crate) struct SparseIntMatrix {
    n: usize,
    rows: Vec<Vec<(usize, BigInt)>>,
}

impl SparseIntMatrix {
    pub(crate) fn new(n: usize) -> Self {
        SparseIntMatrix { n, rows: vec![Vec::new(); n] }
    }

    pub(crate) fn push(&mut self, row: usize, col: usize, value: BigInt) {
        if !value.is_zero() {
            self.rows[row].push((col, value));
        }
    }

    fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.rows.iter().map(|row| row.iter().map(|(j, a)| a * &x[*j]).sum()).collect()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn primes() -> impl Iterator<Item = u64> {
    (2..=PRIME_CEILING).rev().filter(|&c| is_prime(c))
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn reduce(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

/// LU factorization with row pivoting over `Z/p`.
struct ModLu {
    p: u64,
    n: usize,
    lu: Vec<u64>,
    perm: Vec<usize>,
    inv_diag: Vec<u64>,
}

impl ModLu {
    fn factor(m: &SparseIntMatrix, p: u64) -> Option<ModLu> {
        let n = m.n;
        let mut lu = vec![0u64; n * n];
        for (i, row) in m.rows.iter().enumerate() {
            for (j, a) in row {
                lu[i * n + j] = reduce(a, p);
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut inv_diag = vec![0u64; n];
        let mut nz = Vec::with_capacity(n);
        for c in 0..n {
            let pivot = (c..n).find(|&r| lu[r * n + c] != 0)?;
            if pivot != c {
                for k in 0..n {
                    lu.swap(c * n + k, pivot * n + k);
                }
                perm.swap(c, pivot);
            }
            let inv = pow_mod(lu[c * n + c], p - 2, p);
            inv_diag[c] = inv;
            let (top, bottom) = lu.split_at_mut((c + 1) * n);
            let pivot_row = &top[c * n..];
            nz.clear();
            nz.extend((c + 1..n).filter(|&k| pivot_row[k] != 0));
            for row in bottom.chunks_exact_mut(n) {
                let x = row[c];
                if x == 0 {
                    continue;
                }
                let f = x * inv % p;
                row[c] = f;
                let nf = p - f;
                for &k in &nz {
                    row[k] = (row[k] + nf * pivot_row[k]) % p;
                }
            }
        }
        Some(ModLu { p, n, lu, perm, inv_diag })
    }

    fn solve(&self, b: &[u64]) -> Vec<u64> {
        let (n, p) = (self.n, self.p);
        let pp = p as u128;
        let mut y: Vec<u64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: u128 = row.iter().zip(&y[..i]).map(|(&l, &v)| (l as u128) * (v as u128)).sum();
            y[i] = ((y[i] as u128 + pp - s % pp) % pp) as u64;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: u128 = row.iter().zip(&y[i + 1..]).map(|(&u, &v)| (u as u128) * (v as u128)).sum();
            let t = ((y[i] as u128 + pp - s % pp) % pp) as u64;
            y[i] = t * self.inv_diag[i] % p;
        }
        y
    }
}

/// `t ≡ r/s (mod m)` with `|r|, s <= bound`.
fn rational_reconstruct(t: &BigInt, m: &BigInt, bound: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), t.clone());
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || &s1.abs() > bound {
        return None;
    }
    if s1.sign() == Sign::Minus {
        r1 = -r1;
        s1 = -s1;
    }
    r1.gcd(&s1).is_one().then_some((r1, s1))
}

fn log2_upper(v: &BigInt) -> f64 {
    v.bits() as f64
}

/// A factored system `A x = b` ready for repeated exact solves.
pub(crate) struct ExactSolver {
    matrix: SparseIntMatrix,
    lu: ModLu,
    /// Upper bound on `log2` of the Hadamard bound of `A`'s rows.
    row_bits: Vec<f64>,
}

impl ExactSolver {
    pub(crate) fn new(matrix: SparseIntMatrix) -> Result<Self, Error> {
        for p in primes().take(PRIME_ATTEMPTS) {
            if let Some(lu) = ModLu::factor(&matrix, p) {
                let row_bits = matrix
                    .rows
                    .iter()
                    .map(|row| {
                        let max = row.iter().map(|(_, a)| log2_upper(a)).fold(0.0, f64::max);
                        max + 0.5 * ((row.len() + 1) as f64).log2()
                    })
                    .collect();
                return Ok(ExactSolver { matrix, lu, row_bits });
            }
        }
        Err(Error::Solve(format!("matrix of size {} is singular modulo {PRIME_ATTEMPTS} primes", matrix.n)))
    }

    fn max_steps(&self, b: &[BigInt]) -> usize {
        // Cramer + Hadamard: numerators and the denominator are bounded by the
        // product of row norms of [A | b].
        let bits: f64 = self.row_bits.iter().zip(b).map(|(&r, bi)| r.max(log2_upper(bi)) + 0.5).sum();
        ((2.0 * bits + 2.0) / (self.lu.p as f64).log2()).ceil() as usize + 2
    }

    fn try_reconstruct(&self, digits: &[BigInt], modulus: &BigInt, b: &[BigInt]) -> Option<(Vec<BigInt>, BigInt)> {
        let bound = (modulus / BigInt::from(2)).sqrt();
        let mut den = BigInt::one();
        let mut nums: Vec<BigInt> = Vec::with_capacity(digits.len());
        for a in digits {
            let t = (a * &den).mod_floor(modulus);
            let (r, s) = rational_reconstruct(&t, modulus, &bound)?;
            if !s.is_one() {
                for v in nums.iter_mut() {
                    *v *= &s;
                }
                den *= &s;
                if den > bound {
                    return None;
                }
            }
            nums.push(r);
        }
        let lhs = self.matrix.mul_vec(&nums);
        lhs.iter().zip(b).all(|(l, bi)| *l == bi * &den).then_some((nums, den))
    }

    /// Exact solution as numerators over a common denominator.
    pub(crate) fn solve_int(&self, b: &[BigInt]) -> Result<(Vec<BigInt>, BigInt), Error> {
        let n = self.matrix.n;
        assert_eq!(b.len(), n);
        if b.iter().all(Zero::is_zero) {
            return Ok((vec![BigInt::zero(); n], BigInt::one()));
        }
        let p = self.lu.p;
        let p_big = BigInt::from(p);
        let limit = self.max_steps(b);
        let mut residual = b.to_vec();
        let mut digits = vec![BigInt::zero(); n];
        let mut modulus = BigInt::one();
        let mut next_check = 1;
        for step in 1..=limit {
            let rhs: Vec<u64> = residual.iter().map(|r| reduce(r, p)).collect();
            let x = self.lu.solve(&rhs);
            for (d, &xi) in digits.iter_mut().zip(&x) {
                if xi != 0 {
                    *d += &modulus * xi;
                }
            }
            for (r, row) in residual.iter_mut().zip(&self.matrix.rows) {
                let ax: BigInt = row.iter().filter(|(j, _)| x[*j] != 0).map(|(j, a)| a * x[*j]).sum();
                let (q, rem) = (&*r - ax).div_rem(&p_big);
                debug_assert!(rem.is_zero());
                *r = q;
            }
            modulus *= p;
            if step == next_check || step == limit {
                if let Some(sol) = self.try_reconstruct(&digits, &modulus, b) {
                    return Ok(sol);
                }
                next_check = step + step.div_ceil(2);
            }
        }
        Err(Error::Solve(format!("no certified solution after {limit} lifting steps")))
    }

    pub(crate) fn solve(&self, b: &[BigInt]) -> Result<Vec<Rational>, Error> {
        let (nums, den) = self.solve_int(b)?;
        nums.into_iter().map(|v| Rational::from_bigints(v, den.clone())).collect()
    }

    /// Exact solution for a rational right-hand side.
    pub(crate) fn solve_rational(&self, b: &[Rational]) -> Result<Vec<Rational>, Error> {
        let scale = b.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let scaled: Vec<BigInt> = b.iter().map(|v| v.numer() * (&scale / v.denom())).collect();
        let (nums, den) = self.solve_int(&scaled)?;
        let den = den * scale;
        nums.into_iter().map(|v| Rational::from_bigints(v, den.clone())).collect()
    }
}
