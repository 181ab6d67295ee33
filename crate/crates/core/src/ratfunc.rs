//! Rational functions over ℚ in reduced canonical form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Polynomial;

/// `num / den` with `gcd(num, den) = 1` and `den` monic. Zero is `0 / 1`.
///
/// The canonical form makes structural equality coincide with equality of
/// rational functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn zero(nvars: usize) -> Self {
        RationalFunction { num: Polynomial::zero(nvars), den: Polynomial::one(nvars) }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        RationalFunction { num: Polynomial::constant(nvars, c), den: Polynomial::one(nvars) }
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        let n = p.nvars();
        RationalFunction { num: p, den: Polynomial::one(n) }
    }

    /// Builds `num / den`, reducing to canonical form. Panics if `den` is zero.
    pub fn new(num: Polynomial, den: Polynomial) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RationalFunction { num, den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        let n = self.num.nvars();
        if self.num.is_zero() {
            self.den = Polynomial::one(n);
            return;
        }
        if !self.den.is_constant() {
            let g = self.num.gcd(&self.den);
            if !g.is_one() {
                self.num = self.num.exact_div(&g).expect("gcd divides numerator");
                self.den = self.den.exact_div(&g).expect("gcd divides denominator");
            }
        }
        self.normalize_lc();
    }

    fn normalize_lc(&mut self) {
        let lc = self.den.leading_coefficient();
        if !lc.is_one() {
            let s = lc.recip();
            self.num = self.num.scale(&s);
            self.den = self.den.scale(&s);
        }
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn numer(&self) -> &Polynomial {
        &self.num
    }

    pub fn denom(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        self.is_constant().then(|| self.num.constant_value())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let mut r = RationalFunction { num: self.num.add(&o.num), den: self.den.clone() };
            if r.den.is_one() {
                return r;
            }
            r.reduce();
            return r;
        }
        Self::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.nvars());
        }
        if self.den.is_one() && o.den.is_one() {
            return RationalFunction { num: self.num.mul(&o.num), den: self.den.clone() };
        }
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let a = self.num.exact_div(&g1).expect("gcd divides");
        let d = o.den.exact_div(&g1).expect("gcd divides");
        let c = o.num.exact_div(&g2).expect("gcd divides");
        let b = self.den.exact_div(&g2).expect("gcd divides");
        let mut r = RationalFunction { num: a.mul(&c), den: b.mul(&d) };
        r.normalize_lc();
        r
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars());
        }
        RationalFunction { num: self.num.scale(s), den: self.den.clone() }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut r = RationalFunction { num: self.den.clone(), den: self.num.clone() };
        r.normalize_lc();
        Some(r)
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.recip()?))
    }

    pub fn pow(&self, n: u32) -> Self {
        RationalFunction { num: self.num.pow(n), den: self.den.pow(n) }
    }

    pub fn derivative(&self, k: usize) -> Self {
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative(k));
        }
        Self::new(
            self.num.derivative(k).mul(&self.den).sub(&self.num.mul(&self.den.derivative(k))),
            self.den.mul(&self.den),
        )
    }

    /// Value at a rational point; `None` at a pole.
    pub fn eval(&self, point: &[BigRational]) -> Option<BigRational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point) / d)
    }

    /// Exact square root with positive leading numerator coefficient.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if self.num.leading_coefficient().is_negative() {
            return None;
        }
        let n = self.num.sqrt()?;
        let d = self.den.sqrt()?;
        Some(Self::new(n, d))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.render(names);
        }
        format!("({})/({})", self.num.render(names), self.den.render(names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RationalFunction {
        RationalFunction::from_poly(Polynomial::var(1, 0))
    }
    fn c(v: i64) -> RationalFunction {
        RationalFunction::from_int(1, v)
    }

    #[test]
    fn canonical_form_cancels() {
        let a = x().mul(&x()).sub(&c(1));
        let b = x().sub(&c(1));
        let q = a.div(&b).unwrap();
        assert_eq!(q, x().add(&c(1)));
        assert!(q.is_polynomial());
        let h = c(1).div(&x()).unwrap();
        assert_eq!(h.add(&h).mul(&x()), c(2));
        assert_eq!(c(3).div(&x().scale(&BigRational::from_integer(6.into()))).unwrap().denom(), &Polynomial::var(1, 0));
    }

    #[test]
    fn quotient_rule() {
        let f = c(1).div(&x()).unwrap();
        assert_eq!(f.derivative(0), c(-1).div(&x().mul(&x())).unwrap());
    }

    #[test]
    fn sqrt_of_square_quotient() {
        let f = x().mul(&x()).div(&c(4)).unwrap();
        assert_eq!(f.sqrt(), Some(x().div(&c(2)).unwrap()));
        assert_eq!(x().sqrt(), None);
    }
}
