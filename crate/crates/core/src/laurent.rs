//! Sparse Laurent polynomials in `x_i^{1/2}` with integer coefficients.
//! Exponents are stored doubled so the lattice ½ℤ becomes ℤ.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, BigInt>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = LaurentPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        LaurentPoly::constant(nvars, BigInt::one())
    }

    /// `x_i^{d/2}`.
    pub fn var_half(nvars: usize, i: usize, d: i64) -> Self {
        let mut e = vec![0; nvars];
        e[i] = d;
        let mut p = LaurentPoly::zero(nvars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: BigInt) {
        assert_eq!(exp.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// Doubled exponent vectors with their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &BigInt)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &[i64]) -> BigInt {
        self.terms.get(exp).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn all_coefficients_positive(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    /// True iff every exponent is an integer.
    pub fn has_integer_exponents(&self) -> bool {
        self.terms.keys().flatten().all(|d| d % 2 == 0)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut p = LaurentPoly::zero(self.nvars);
        for (e, k) in &self.terms {
            p.add_term(e.clone(), k * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = LaurentPoly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval_ones(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * e.iter().zip(&r).map(|(&d, s)| s.powi(d as i32)).product::<f64>())
            .sum()
    }

    /// Componentwise maximum and minimum of the doubled exponents.
    pub fn exponent_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        let (mut hi, mut lo) = (first.clone(), first);
        for e in it {
            for i in 0..self.nvars {
                hi[i] = hi[i].max(e[i]);
                lo[i] = lo[i].min(e[i]);
            }
        }
        Some((hi, lo))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| serde_json::json!({"exp": e, "coef": c.to_string()}))
            .collect();
        serde_json::json!({"denominator": 2, "terms": terms})
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = LaurentPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &d) in e.iter().enumerate() {
                match d {
                    0 => {}
                    2 => write!(f, "*x{i}")?,
                    d if d % 2 == 0 => write!(f, "*x{i}^{}", d / 2)?,
                    d => write!(f, "*x{i}^({d}/2)")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = LaurentPoly::var_half(2, 0, 1);
        let y = LaurentPoly::var_half(2, 1, -1);
        let s = &x + &y;
        let sq = &s * &s;
        assert_eq!(sq.n_terms(), 3);
        assert_eq!(sq.coefficient(&[1, -1]), BigInt::from(2));
        assert_eq!(sq.eval_ones(), BigInt::from(4));
        assert!((sq.eval_f64(&[4.0, 9.0]) - (2.0f64 + 1.0 / 3.0).powi(2)).abs() < 1e-12);
        assert!(!s.has_integer_exponents());
        assert!(sq.pow(2).all_coefficients_positive());
        let (hi, lo) = sq.exponent_box().unwrap();
        assert_eq!((hi, lo), (vec![2, 0], vec![0, -2]));
    }

    #[test]
    fn cancellation_drops_terms() {
        let mut p = LaurentPoly::one(1);
        p.add_term(vec![0], BigInt::from(-1));
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }
}
