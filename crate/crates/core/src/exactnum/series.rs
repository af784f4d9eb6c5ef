use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::field::Field;
use super::Cyclotomic;
use crate::error::{Error, Result};

/// Truncated Laurent series in one auxiliary variable ε.
///
/// The series stands for `Σ coeffs[k] ε^{lowest + k} + O(ε^truncation)`: every
/// coefficient below `truncation` is exact, nothing above it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsSeries<F: Field = Cyclotomic> {
    lowest: i64,
    coeffs: Vec<F>,
    truncation: i64,
}

impl<F: Field> EpsSeries<F> {
    pub fn new(lowest: i64, coeffs: Vec<F>, truncation: i64) -> Self {
        let mut s = EpsSeries {
            lowest,
            coeffs,
            truncation,
        };
        s.normalize();
        s
    }

    pub fn constant(c: F, truncation: i64) -> Self {
        Self::new(0, vec![c], truncation)
    }

    pub fn zero(truncation: i64) -> Self {
        Self::new(truncation, Vec::new(), truncation)
    }

    fn normalize(&mut self) {
        let keep = (self.truncation - self.lowest).max(0) as usize;
        self.coeffs.truncate(keep);
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lowest += lead as i64;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.lowest = self.truncation;
        }
    }

    pub fn lowest_exponent(&self) -> i64 {
        self.lowest
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of ε^k; `None` above the truncation order.
    pub fn coeff(&self, k: i64) -> Option<F> {
        if k >= self.truncation {
            return None;
        }
        if k < self.lowest {
            return Some(F::zero());
        }
        Some(
            self.coeffs
                .get((k - self.lowest) as usize)
                .cloned()
                .unwrap_or_else(F::zero),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let truncation = self.truncation.min(other.truncation);
        let lowest = self.lowest.min(other.lowest);
        let len = (truncation - lowest).max(0) as usize;
        let mut coeffs = vec![F::zero(); len];
        for (src, off) in [(self, self.lowest), (other, other.lowest)] {
            for (k, c) in src.coeffs.iter().enumerate() {
                let idx = off + k as i64 - lowest;
                if (idx as usize) < len {
                    coeffs[idx as usize] = coeffs[idx as usize].add(c);
                }
            }
        }
        Self::new(lowest, coeffs, truncation)
    }

    pub fn neg(&self) -> Self {
        EpsSeries {
            lowest: self.lowest,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            truncation: self.truncation,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::new(
            self.lowest,
            self.coeffs.iter().map(|x| x.mul(c)).collect(),
            self.truncation,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let truncation = (self.lowest + other.truncation).min(other.lowest + self.truncation);
        let lowest = self.lowest + other.lowest;
        let len = (truncation - lowest).max(0) as usize;
        let mut coeffs = vec![F::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::new(lowest, coeffs, truncation)
    }

    /// Multiplicative inverse; the relative precision is preserved and the
    /// lowest exponent is negated.
    pub fn invert(&self) -> Result<Self> {
        let lead = self.coeffs.first().ok_or(Error::ZeroLeadingCoefficient)?;
        let lead_inv = lead.inv().ok_or(Error::ZeroLeadingCoefficient)?;
        let rel = (self.truncation - self.lowest) as usize;
        let mut out: Vec<F> = Vec::with_capacity(rel);
        out.push(lead_inv.clone());
        for k in 1..rel {
            let mut acc = F::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc = acc.add(&self.coeffs[j].mul(&out[k - j]));
            }
            out.push(acc.mul(&lead_inv).neg());
        }
        Ok(Self::new(-self.lowest, out, -self.lowest + rel as i64))
    }

    /// The ε⁰ coefficient, provided every pole has cancelled.
    pub fn constant_term_at_zero(&self) -> Result<F> {
        if self.lowest < 0 {
            return Err(Error::PoleRemains { order: -self.lowest });
        }
        self.coeff(0).ok_or(Error::PoleRemains { order: 0 })
    }
}

impl EpsSeries<Cyclotomic> {
    /// Σ_{k ≤ order} (aε)^k / k! with rational coefficients.
    pub fn exp_series(a: &BigRational, order: i64) -> Self {
        assert!(order >= 0);
        let mut coeffs = Vec::with_capacity(order as usize + 1);
        let mut term = <BigRational as One>::one();
        for k in 0..=order {
            if k > 0 {
                term = term * a / BigRational::from_integer(BigInt::from(k));
            }
            coeffs.push(Cyclotomic::from_rational(1, term.clone()));
        }
        Self::new(0, coeffs, order + 1)
    }
}
