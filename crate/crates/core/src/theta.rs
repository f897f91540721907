//! Exact univariate polynomials in θ over the rationals, and dense matrices of them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Always `p/q`, including integers (`1/1`).
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A polynomial in θ with rational coefficients. No zero coefficients are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ThetaPoly {
    terms: BTreeMap<u32, Rational>,
}

impl ThetaPoly {
    pub fn zero() -> Self {
        ThetaPoly::default()
    }

    pub fn one() -> Self {
        ThetaPoly::monomial(Rational::one(), 0)
    }

    pub fn constant(c: Rational) -> Self {
        ThetaPoly::monomial(c, 0)
    }

    /// `θ^exp`.
    pub fn theta_pow(exp: u32) -> Self {
        ThetaPoly::monomial(Rational::one(), exp)
    }

    pub fn monomial(coeff: Rational, exp: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        ThetaPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(One::is_one)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coeff(&self, exp: u32) -> Rational {
        self.terms.get(&exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn as_monomial(&self) -> Option<(&Rational, u32)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(&e, c)| (c, e))
        } else {
            None
        }
    }

    fn add_term(&mut self, exp: u32, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    /// The monomial `β` with `β · self == other`, if one exists.
    pub fn monomial_quotient(&self, other: &ThetaPoly) -> Option<ThetaPoly> {
        let (&se, sc) = self.terms.iter().next_back()?;
        let (&oe, oc) = other.terms.iter().next_back()?;
        if oe < se {
            return None;
        }
        let beta = ThetaPoly::monomial(oc / sc, oe - se);
        (&beta * self == *other).then_some(beta)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&e, c)| c.to_f64().unwrap_or(f64::NAN) * theta.powi(e as i32))
            .sum()
    }

    /// `{"<exp>": "p/q", ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.terms
                .iter()
                .map(|(e, c)| (e.to_string(), serde_json::Value::String(rational_string(c))))
                .collect(),
        )
    }
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let a = c.abs();
            match (a.is_one(), e) {
                (_, 0) => write!(f, "{a}")?,
                (true, 1) => f.write_str("θ")?,
                (true, _) => write!(f, "θ^{e}")?,
                (false, 1) => write!(f, "{a}·θ")?,
                (false, _) => write!(f, "{a}·θ^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &ThetaPoly {
    type Output = ThetaPoly;
    fn add(self, rhs: &ThetaPoly) -> ThetaPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&ThetaPoly> for ThetaPoly {
    fn add_assign(&mut self, rhs: &ThetaPoly) {
        for (&e, c) in &rhs.terms {
            self.add_term(e, c);
        }
    }
}

impl Neg for &ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        ThetaPoly { terms: self.terms.iter().map(|(&e, c)| (e, -c)).collect() }
    }
}

impl Sub for &ThetaPoly {
    type Output = ThetaPoly;
    fn sub(self, rhs: &ThetaPoly) -> ThetaPoly {
        self + &(-rhs)
    }
}

impl Mul for &ThetaPoly {
    type Output = ThetaPoly;
    fn mul(self, rhs: &ThetaPoly) -> ThetaPoly {
        let mut out = ThetaPoly::zero();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &rhs.terms {
                out.add_term(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

/// Dense row-major matrix of [`ThetaPoly`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ThetaPoly>,
}

impl ThetaMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ThetaMatrix { rows, cols, data: vec![ThetaPoly::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &ThetaPoly {
        &self.data[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut ThetaPoly {
        &mut self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: ThetaPoly) {
        self.data[r * self.cols + c] = v;
    }

    /// Nonzero entries `(row, col, value)` in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &ThetaPoly)> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i / self.cols, i % self.cols, v))
    }

    /// Grows to `rows x cols`, keeping existing entries in place.
    pub fn resized(&self, rows: usize, cols: usize) -> ThetaMatrix {
        let mut out = ThetaMatrix::zeros(rows, cols);
        for (r, c, v) in self.nonzeros() {
            if r < rows && c < cols {
                out.set(r, c, v.clone());
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, row: &[ThetaPoly]) -> Vec<ThetaPoly> {
        assert_eq!(row.len(), self.rows);
        let mut out = vec![ThetaPoly::zero(); self.cols];
        for (r, c, v) in self.nonzeros() {
            if !row[r].is_zero() {
                out[c] += &(&row[r] * v);
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, col: &[ThetaPoly]) -> Vec<ThetaPoly> {
        assert_eq!(col.len(), self.cols);
        let mut out = vec![ThetaPoly::zero(); self.rows];
        for (r, c, v) in self.nonzeros() {
            if !col[c].is_zero() {
                out[r] += &(v * &col[c]);
            }
        }
        out
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        self.data.iter().map(|p| p.eval(theta)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|r| {
                    serde_json::Value::Array(
                        (0..self.cols).map(|c| self.get(r, c).to_json()).collect(),
                    )
                })
                .collect(),
        )
    }
}

impl fmt::Display for ThetaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(|s| s.chars().count()).max().unwrap_or(1);
        for r in 0..self.rows {
            f.write_str("[")?;
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{:>width$}", cells[r * self.cols + c])?;
            }
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = &ThetaPoly::theta_pow(2) + &ThetaPoly::one();
        let b = &ThetaPoly::theta_pow(2) - &ThetaPoly::one();
        let p = &a * &b;
        assert_eq!(p, &ThetaPoly::theta_pow(4) - &ThetaPoly::one());
        assert!((&a - &a).is_zero());
        assert_eq!(p.to_string(), "θ^4 - 1");
        assert_eq!(ThetaPoly::monomial(rat(3, 2), 1).to_string(), "3/2·θ");
    }

    #[test]
    fn monomial_quotients() {
        let t2 = ThetaPoly::theta_pow(2);
        let x = ThetaPoly::monomial(rat(5, 3), 6);
        assert_eq!(t2.monomial_quotient(&x), Some(ThetaPoly::monomial(rat(5, 3), 4)));
        assert_eq!(x.monomial_quotient(&t2), None);
        let sum = &t2 + &ThetaPoly::one();
        let shifted = &sum * &ThetaPoly::theta_pow(3);
        assert_eq!(sum.monomial_quotient(&shifted), Some(ThetaPoly::theta_pow(3)));
        assert_eq!(sum.monomial_quotient(&(&shifted + &ThetaPoly::one())), None);
    }

    #[test]
    fn evaluation_and_json() {
        let p = ThetaPoly::theta_pow(4);
        assert!((p.eval(2f64.sqrt()) - 4.0).abs() < 1e-14);
        assert_eq!(p.to_json().to_string(), r#"{"4":"1/1"}"#);
        assert_eq!(rational_string(&rat(-6, 4)), "-3/2");
    }
}
