//! Multivariate polynomials and rational functions over ℚ.
//!
//! Just enough algebra to carry exponents like `p'`, `δ₀` or `d` as symbols
//! through the balancing step and compare results by exact identity.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{int, Rational};

type Monomial = BTreeMap<String, u32>;

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::from([(name.to_string(), 1)]), Rational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    /// Replaces `name` by a rational value.
    pub fn substitute(&self, name: &str, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut m = m.clone();
            let mut c = c.clone();
            if let Some(e) = m.remove(name) {
                c *= value.pow(e as i32);
            }
            out.add_term(m, c);
        }
        out
    }

    fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = ma.clone();
                for (v, e) in mb {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{abs}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Quotient of polynomials with a nonzero denominator. Equality is identity of
/// rational functions (cross-multiplication), not of representations.
#[derive(Clone, Debug)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn constant(c: Rational) -> Self {
        Self { num: Poly::constant(c), den: Poly::constant(Rational::one()) }
    }

    pub fn var(name: &str) -> Self {
        Self { num: Poly::var(name), den: Poly::constant(Rational::one()) }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self { num: p, den: Poly::constant(Rational::one()) }
    }

    /// Panics if `den` is the zero polynomial.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self { num, den }.normalized()
    }

    fn normalized(self) -> Self {
        if self.num.is_zero() {
            return Self::constant(Rational::zero());
        }
        match self.den.as_constant() {
            Some(c) if !c.is_one() => {
                let k = c.recip();
                Self { num: self.num.scale(&k), den: Poly::constant(Rational::one()) }
            }
            _ => self,
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// `None` when the substitution makes the denominator vanish.
    pub fn substitute(&self, name: &str, value: &Rational) -> Option<Self> {
        let den = self.den.substitute(name, value);
        if den.is_zero() {
            return None;
        }
        Some(Self { num: self.num.substitute(name, value), den }.normalized())
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        self.num.clone() * other.den.clone() == other.num.clone() * self.den.clone()
    }
}

impl Add for RatFn {
    type Output = RatFn;
    fn add(self, rhs: RatFn) -> RatFn {
        if self.den == rhs.den {
            return RatFn { num: self.num + rhs.num, den: self.den }.normalized();
        }
        let num = self.num * rhs.den.clone() + rhs.num * self.den.clone();
        RatFn { num, den: self.den * rhs.den }.normalized()
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -self.num, den: self.den }
    }
}

impl Sub for RatFn {
    type Output = RatFn;
    fn sub(self, rhs: RatFn) -> RatFn {
        self + (-rhs)
    }
}

impl Mul for RatFn {
    type Output = RatFn;
    fn mul(self, rhs: RatFn) -> RatFn {
        RatFn { num: self.num * rhs.num, den: self.den * rhs.den }.normalized()
    }
}

impl Div for RatFn {
    type Output = RatFn;
    fn div(self, rhs: RatFn) -> RatFn {
        RatFn::new(self.num * rhs.den, self.den * rhs.num)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Scalars the exponent calculus can run over: exact rationals, or rational
/// functions of named symbols.
pub trait ExponentScalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&int(n))
    }

    fn is_zero_value(&self) -> bool;

    /// Sign when it is determined; `None` for expressions in free symbols.
    fn sign(&self) -> Option<Ordering>;
}

impl ExponentScalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn sign(&self) -> Option<Ordering> {
        Some(self.cmp(&Rational::zero()))
    }
}

impl ExponentScalar for RatFn {
    fn from_rational(r: &Rational) -> Self {
        RatFn::constant(r.clone())
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn sign(&self) -> Option<Ordering> {
        self.as_constant().map(|c| c.cmp(&Rational::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn identity_is_representation_independent() {
        let x = RatFn::var("x");
        let one = RatFn::constant(int(1));
        // (x^2 - 1)/(x - 1) == x + 1
        let lhs = (x.clone() * x.clone() - one.clone()) / (x.clone() - one.clone());
        assert_eq!(lhs, x.clone() + one.clone());
        assert_ne!(lhs, x.clone());
    }

    #[test]
    fn substitution() {
        let p = RatFn::var("p");
        let c = RatFn::var("c");
        let f = p.clone() / (p.clone() + c.clone());
        let g = f.substitute("p", &int(1)).unwrap();
        assert_eq!(g, RatFn::constant(int(1)) / (RatFn::constant(int(1)) + c));
        let h = g.substitute("c", &rat(2379, 2)).unwrap();
        assert_eq!(h.as_constant(), Some(rat(2, 2381)));
        let bad = (p.clone() / p.clone()).substitute("p", &int(0));
        assert!(bad.is_none());
    }

    #[test]
    fn display() {
        let p = Poly::var("a") * Poly::constant(int(2)) - Poly::constant(rat(1, 2));
        assert_eq!(p.to_string(), "-1/2 + 2*a");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn signs() {
        assert_eq!(RatFn::constant(rat(-1, 3)).sign(), Some(Ordering::Less));
        assert_eq!(RatFn::var("x").sign(), None);
        assert_eq!(int(0).sign(), Some(Ordering::Equal));
    }
}
