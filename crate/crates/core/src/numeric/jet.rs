//! Truncated power series ("jets") with exact rational coefficients.
//!
//! `coeffs[k]` is the coefficient of `t^k`, so the `k`-th derivative at the
//! expansion point is `k! * coeffs[k]`.

use std::fmt;

use crate::error::Error;
use crate::numeric::Rational;

#[derive(Clone, PartialEq, Eq)]
pub struct SeriesJet {
    coeffs: Vec<Rational>,
}

impl SeriesJet {
    /// A jet of the given truncation order; missing coefficients are zero,
    /// extra ones are dropped.
    pub fn from_coeffs(mut coeffs: Vec<Rational>, order: usize) -> Self {
        coeffs.resize(order + 1, Rational::zero());
        SeriesJet { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        SeriesJet { coeffs: vec![Rational::zero(); order + 1] }
    }

    pub fn constant(value: Rational, order: usize) -> Self {
        Self::from_coeffs(vec![value], order)
    }

    /// The identity series `t`.
    pub fn variable(order: usize) -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()], order)
    }

    /// `scale * (e^t - 1)`.
    pub fn scaled_expm1(scale: &Rational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(Rational::zero());
        let mut factorial = Rational::one();
        for k in 1..=order {
            factorial *= Rational::from(k);
            coeffs.push(scale / &factorial);
        }
        SeriesJet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    /// `k!` times the `k`-th coefficient.
    pub fn derivative(&self, k: usize) -> Rational {
        let fact: Rational = (1..=k).map(Rational::from).product();
        fact * &self.coeffs[k]
    }

    fn check_order(&self, other: &SeriesJet) -> Result<(), Error> {
        if self.order() != other.order() {
            return Err(Error::Jet(format!("truncation orders differ ({} vs {})", self.order(), other.order())));
        }
        Ok(())
    }

    pub fn add(&self, other: &SeriesJet) -> Result<SeriesJet, Error> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(SeriesJet { coeffs })
    }

    pub fn sub(&self, other: &SeriesJet) -> Result<SeriesJet, Error> {
        self.check_order(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(SeriesJet { coeffs })
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &SeriesJet) -> Result<SeriesJet, Error> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &SeriesJet) -> SeriesJet {
        let n = self.coeffs.len();
        let mut coeffs = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        SeriesJet { coeffs }
    }

    /// Truncated quotient; the divisor needs a nonzero constant term.
    pub fn div(&self, other: &SeriesJet) -> Result<SeriesJet, Error> {
        self.check_order(other)?;
        let lead =
            other.coeffs[0].recip().ok_or_else(|| Error::Jet("division by a series with zero constant term".into()))?;
        let n = self.coeffs.len();
        let mut q: Vec<Rational> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc -= &other.coeffs[j] * &q[k - j];
            }
            q.push(acc * &lead);
        }
        Ok(SeriesJet { coeffs: q })
    }

    pub fn scale(&self, factor: &Rational) -> SeriesJet {
        SeriesJet { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// Multiplies by `t`, dropping the coefficient that falls off the end.
    pub fn shift(&self) -> SeriesJet {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(Rational::zero());
        coeffs.extend(self.coeffs[..self.coeffs.len() - 1].iter().cloned());
        SeriesJet { coeffs }
    }

    /// `self ∘ inner`, truncated at the common order. `inner` must vanish at 0.
    pub fn compose(&self, inner: &SeriesJet) -> Result<SeriesJet, Error> {
        self.check_order(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(Error::Jet("inner series of a composition must have zero constant term".into()));
        }
        // Horner: a_n, then acc*inner + a_k.
        let order = self.order();
        let mut acc = SeriesJet::constant(self.coeffs[order].clone(), order);
        for k in (0..order).rev() {
            acc = acc.mul_unchecked(inner);
            acc.coeffs[0] += &self.coeffs[k];
        }
        Ok(acc)
    }
}

impl fmt::Debug for SeriesJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(c: &[i64], order: usize) -> SeriesJet {
        SeriesJet::from_coeffs(c.iter().map(|&v| Rational::from(v)).collect(), order)
    }

    #[test]
    fn product_of_conjugates() {
        let p = jet(&[1, 1], 2).mul(&jet(&[1, -1], 2)).unwrap();
        assert_eq!(p, jet(&[1, 0, -1], 2));
    }

    #[test]
    fn geometric_series() {
        let q = jet(&[1], 3).div(&jet(&[1, -1], 3)).unwrap();
        assert_eq!(q, jet(&[1, 1, 1, 1], 3));
    }

    #[test]
    fn self_quotient_is_one() {
        let a = jet(&[1, 1], 4);
        assert_eq!(a.div(&a).unwrap(), jet(&[1], 4));
    }

    #[test]
    fn division_by_non_unit_fails() {
        assert!(jet(&[1], 3).div(&jet(&[0, 1], 3)).is_err());
        assert!(jet(&[1], 3).mul(&jet(&[1], 2)).is_err());
    }

    #[test]
    fn compose_scaled_exponential() {
        let inner = SeriesJet::scaled_expm1(&Rational::from(2i64), 3);
        let out = SeriesJet::variable(3).compose(&inner).unwrap();
        let expected = SeriesJet::from_coeffs(
            vec![Rational::zero(), Rational::from(2i64), Rational::one(), Rational::new(1, 3)],
            3,
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn compose_constant_and_square() {
        let c = SeriesJet::constant(Rational::new(5, 7), 3);
        let inner = jet(&[0, 1, 1], 3);
        assert_eq!(c.compose(&inner).unwrap(), c);
        let square = jet(&[0, 0, 1], 3);
        assert_eq!(square.compose(&inner).unwrap(), jet(&[0, 0, 1, 2], 3));
        assert!(square.compose(&jet(&[1, 1], 3)).is_err());
    }

    #[test]
    fn derivative_scaling() {
        let e = SeriesJet::scaled_expm1(&Rational::one(), 5);
        for k in 1..=5 {
            assert_eq!(e.derivative(k), Rational::one());
        }
    }
}
