//! Grassmann-valued superfunctions with rational-function even coefficients.
//!
//! A [`Superfunction`] is a finite sum `Σ_I c_I(x) θ^I` where `θ^I` is a product of
//! odd generators in ascending pool order and `c_I` is a reduced rational function
//! of the even variables. Every sign in this module comes from counting the
//! transpositions needed to sort a concatenated index list.
//!
//! Odd partial derivatives are *left* derivatives: `∂_θ` is moved to the front
//! of the monomial before removing `θ`, picking up `(-1)` for each odd generator
//! it passes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::ratfunc::RationalFunction;

/// ℤ₂ grading.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Bit of the Koszul sign `(-1)^{|a||b|}`.
    pub fn koszul(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, o: Parity) -> Parity {
        Parity::from_bit(self.is_odd() ^ o.is_odd())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OddKind {
    Coordinate,
    Flesh,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OddGenerator {
    pub name: String,
    pub kind: OddKind,
}

/// A generator of the scalar ring.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Var {
    Even(usize),
    Odd(usize),
}

impl Var {
    pub fn parity(self) -> Parity {
        match self {
            Var::Even(_) => Parity::Even,
            Var::Odd(_) => Parity::Odd,
        }
    }
}

/// Ordered even and odd generator names. The order fixes the monomial normal form.
#[derive(Clone, Debug)]
pub struct GeneratorPool {
    even: Vec<String>,
    odd: Vec<OddGenerator>,
    index: HashMap<String, Var>,
}

impl PartialEq for GeneratorPool {
    fn eq(&self, other: &Self) -> bool {
        self.even == other.even && self.odd == other.odd
    }
}

impl Eq for GeneratorPool {}

impl GeneratorPool {
    pub fn new(even: Vec<String>, odd: Vec<OddGenerator>) -> Result<Arc<Self>> {
        if odd.len() > 64 {
            return Err(Error::TooManyGenerators(odd.len()));
        }
        let mut index = HashMap::new();
        for (k, n) in even.iter().enumerate() {
            if index.insert(n.clone(), Var::Even(k)).is_some() {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        for (k, g) in odd.iter().enumerate() {
            if index.insert(g.name.clone(), Var::Odd(k)).is_some() {
                return Err(Error::DuplicateName(g.name.clone()));
            }
        }
        Ok(Arc::new(GeneratorPool { even, odd, index }))
    }

    /// Even coordinates, odd coordinates, then flesh generators.
    pub fn with_names(even: &[&str], odd: &[&str], flesh: &[&str]) -> Result<Arc<Self>> {
        let odd_gens = odd
            .iter()
            .map(|n| OddGenerator { name: n.to_string(), kind: OddKind::Coordinate })
            .chain(flesh.iter().map(|n| OddGenerator { name: n.to_string(), kind: OddKind::Flesh }))
            .collect();
        Self::new(even.iter().map(|s| s.to_string()).collect(), odd_gens)
    }

    pub fn even_names(&self) -> &[String] {
        &self.even
    }

    pub fn odd_generators(&self) -> &[OddGenerator] {
        &self.odd
    }

    pub fn num_even(&self) -> usize {
        self.even.len()
    }

    pub fn num_odd(&self) -> usize {
        self.odd.len()
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn var(&self, name: &str) -> Result<Var> {
        self.lookup(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, v: Var) -> &str {
        match v {
            Var::Even(k) => &self.even[k],
            Var::Odd(k) => &self.odd[k].name,
        }
    }

    pub fn is_flesh(&self, k: usize) -> bool {
        self.odd[k].kind == OddKind::Flesh
    }

    /// Indices (into the odd list) of odd coordinates, in pool order.
    pub fn odd_coordinates(&self) -> Vec<usize> {
        (0..self.odd.len()).filter(|&k| !self.is_flesh(k)).collect()
    }

    pub fn coordinate_mask(&self) -> u64 {
        self.odd_coordinates().iter().fold(0, |m, &k| m | (1 << k))
    }

    pub fn flesh_mask(&self) -> u64 {
        (0..self.odd.len()).filter(|&k| self.is_flesh(k)).fold(0, |m, k| m | (1 << k))
    }
}

pub fn same_pool(a: &Arc<GeneratorPool>, b: &Arc<GeneratorPool>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Sign bit of `θ^a θ^b` relative to the sorted monomial `θ^{a∪b}`.
fn merge_sign(a: u64, b: u64) -> bool {
    let mut odd = false;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        odd ^= above.count_ones() % 2 == 1;
    }
    odd
}

fn mask_indices(m: u64) -> Vec<usize> {
    (0..64).filter(|k| m & (1u64 << k) != 0).collect()
}

/// Element of the scalar ring over a [`GeneratorPool`].
#[derive(Clone, Debug)]
pub struct Superfunction {
    pool: Arc<GeneratorPool>,
    terms: BTreeMap<u64, RationalFunction>,
}

impl PartialEq for Superfunction {
    fn eq(&self, other: &Self) -> bool {
        same_pool(&self.pool, &other.pool) && self.terms == other.terms
    }
}

impl Eq for Superfunction {}

impl Superfunction {
    pub fn zero(pool: &Arc<GeneratorPool>) -> Self {
        Superfunction { pool: pool.clone(), terms: BTreeMap::new() }
    }

    pub fn one(pool: &Arc<GeneratorPool>) -> Self {
        Self::from_ratfunc(pool, RationalFunction::one(pool.num_even()))
    }

    pub fn constant(pool: &Arc<GeneratorPool>, c: BigRational) -> Self {
        Self::from_ratfunc(pool, RationalFunction::constant(pool.num_even(), c))
    }

    pub fn from_int(pool: &Arc<GeneratorPool>, c: i64) -> Self {
        Self::constant(pool, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn from_ratfunc(pool: &Arc<GeneratorPool>, c: RationalFunction) -> Self {
        Self::term(pool, 0, c)
    }

    /// `c · θ^mask` for a normal-form mask.
    pub fn term(pool: &Arc<GeneratorPool>, mask: u64, c: RationalFunction) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mask, c);
        }
        Superfunction { pool: pool.clone(), terms }
    }

    pub fn generator(pool: &Arc<GeneratorPool>, v: Var) -> Self {
        let n = pool.num_even();
        match v {
            Var::Even(k) => Self::from_ratfunc(pool, RationalFunction::from_poly(Polynomial::var(n, k))),
            Var::Odd(k) => Self::term(pool, 1 << k, RationalFunction::one(n)),
        }
    }

    pub fn named(pool: &Arc<GeneratorPool>, name: &str) -> Result<Self> {
        Ok(Self::generator(pool, pool.var(name)?))
    }

    pub fn pool(&self) -> &Arc<GeneratorPool> {
        &self.pool
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &RationalFunction)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mask: u64) -> RationalFunction {
        self.terms.get(&mask).cloned().unwrap_or_else(|| RationalFunction::zero(self.pool.num_even()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Parity, or `None` if inhomogeneous. Zero reports `Even`.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.count_ones() % 2 == 1);
        let Some(first) = it.next() else {
            return Some(Parity::Even);
        };
        it.all(|p| p == first).then(|| Parity::from_bit(first))
    }

    /// True if zero or homogeneous of parity `p`.
    pub fn has_parity(&self, p: Parity) -> bool {
        self.terms.keys().all(|m| (m.count_ones() % 2 == 1) == p.is_odd())
    }

    pub fn body(&self) -> RationalFunction {
        self.coefficient(0)
    }

    /// `self - body(self)`.
    pub fn soul(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&0);
        s
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_constant()))
    }

    /// Value of a constant superfunction.
    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            return self.terms.get(&0).and_then(|c| c.constant_value());
        }
        None
    }

    /// True when every even coefficient is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.terms.values().all(|c| c.is_polynomial())
    }

    pub fn uses_flesh(&self) -> bool {
        let f = self.pool.flesh_mask();
        self.terms.keys().any(|m| m & f != 0)
    }

    fn check_pool(&self, other: &Self) -> Result<()> {
        if same_pool(&self.pool, &other.pool) {
            Ok(())
        } else {
            Err(Error::PoolMismatch)
        }
    }

    fn insert(&mut self, mask: u64, c: RationalFunction) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_pool(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert(*m, c.clone());
        }
        Ok(r)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        Superfunction {
            pool: self.pool.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    /// Supercommutative product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_pool(other)?;
        let mut r = Superfunction::zero(&self.pool);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca.mul(cb);
                let c = if merge_sign(*ma, *mb) { c.neg() } else { c };
                r.insert(ma | mb, c);
            }
        }
        Ok(r)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Superfunction::zero(&self.pool);
        }
        Superfunction {
            pool: self.pool.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.scale(s))).collect(),
        }
    }

    pub fn scale_int(&self, s: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(s)))
    }

    /// Multiply by an even rational function.
    pub fn mul_ratfunc(&self, r: &RationalFunction) -> Self {
        let mut out = Superfunction::zero(&self.pool);
        for (m, c) in &self.terms {
            out.insert(*m, c.mul(r));
        }
        out
    }

    /// `-self` when `flag` is set.
    pub fn negate_if(self, flag: bool) -> Self {
        if flag {
            -&self
        } else {
            self
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Superfunction::one(&self.pool);
        for _ in 0..n {
            acc = &acc * self;
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    /// Left partial derivative with respect to a pool generator.
    pub fn partial(&self, v: Var) -> Result<Self> {
        match v {
            Var::Even(k) => {
                if k >= self.pool.num_even() {
                    return Err(Error::UnknownVariable(format!("even #{k}")));
                }
                let mut r = Superfunction::zero(&self.pool);
                for (m, c) in &self.terms {
                    r.insert(*m, c.derivative(k));
                }
                Ok(r)
            }
            Var::Odd(k) => {
                if k >= self.pool.num_odd() {
                    return Err(Error::UnknownVariable(format!("odd #{k}")));
                }
                if self.pool.is_flesh(k) {
                    return Err(Error::FleshDerivative(self.pool.odd[k].name.clone()));
                }
                let bit = 1u64 << k;
                let mut r = Superfunction::zero(&self.pool);
                for (m, c) in &self.terms {
                    if m & bit == 0 {
                        continue;
                    }
                    let before = (m & (bit - 1)).count_ones() % 2 == 1;
                    r.insert(m ^ bit, if before { c.neg() } else { c.clone() });
                }
                Ok(r)
            }
        }
    }

    pub fn partial_named(&self, name: &str) -> Result<Self> {
        self.partial(self.pool.var(name)?)
    }

    /// Multiplicative inverse via a finite Neumann series in the nilpotent part.
    pub fn invert(&self) -> Result<Self> {
        let b = self.body();
        let binv = b
            .recip()
            .ok_or_else(|| Error::NonInvertible(format!("body of {self} is zero")))?;
        let u = self.soul().mul_ratfunc(&binv);
        let mut sum = Superfunction::one(&self.pool);
        let mut power = Superfunction::one(&self.pool);
        let neg_u = -&u;
        loop {
            power = &power * &neg_u;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.mul_ratfunc(&binv))
    }

    pub fn checked_div(&self, d: &Self) -> Result<Self> {
        self.checked_mul(&d.invert()?)
    }

    /// Square root of an even superfunction whose body is an exact square.
    pub fn sqrt(&self) -> Result<Self> {
        if self.parity() != Some(Parity::Even) {
            return Err(Error::OddSquareRoot);
        }
        let b = self.body();
        if b.is_zero() {
            return if self.is_zero() {
                Ok(self.clone())
            } else {
                Err(Error::NotASquare(format!("{self} has zero body")))
            };
        }
        let sb = b
            .sqrt()
            .ok_or_else(|| Error::NotASquare(b.render(self.pool.even_names())))?;
        let u = self.soul().mul_ratfunc(&b.recip().expect("nonzero body"));
        // sqrt(1+u) = Σ_k binom(1/2, k) u^k
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut coeff = BigRational::one();
        let mut sum = Superfunction::one(&self.pool);
        let mut power = Superfunction::one(&self.pool);
        let mut k = 0i64;
        loop {
            power = &power * &u;
            if power.is_zero() {
                break;
            }
            coeff = coeff * (&half - BigRational::from_integer(BigInt::from(k)))
                / BigRational::from_integer(BigInt::from(k + 1));
            k += 1;
            sum = &sum + &power.scale(&coeff);
        }
        Ok(sum.mul_ratfunc(&sb))
    }

    /// Coefficient of `θ¹⋯θ^m` over the odd coordinates (flesh excluded).
    pub fn berezin_top(&self) -> Result<RationalFunction> {
        let top = self.pool.coordinate_mask();
        let mut out = RationalFunction::zero(self.pool.num_even());
        for (m, c) in &self.terms {
            if m & top == top {
                if *m != top {
                    return Err(Error::FleshInTopCoefficient);
                }
                out = c.clone();
            }
        }
        Ok(out)
    }

    /// Body evaluated at a rational point of the even variables.
    pub fn body_at(&self, point: &[BigRational]) -> Option<BigRational> {
        self.body().eval(point)
    }

    /// Apply `f` to every even coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&RationalFunction) -> RationalFunction) -> Self {
        let mut out = Superfunction::zero(&self.pool);
        for (m, c) in &self.terms {
            out.insert(*m, f(c));
        }
        out
    }

    /// Canonical text: terms by ascending Grassmann degree, then index order.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let names = self.pool.even_names();
        let mut keys: Vec<(u32, Vec<usize>, u64)> =
            self.terms.keys().map(|&m| (m.count_ones(), mask_indices(m), m)).collect();
        keys.sort();
        let mut out = String::new();
        for (i, (_, idx, m)) in keys.iter().enumerate() {
            let c = &self.terms[m];
            let (neg, text) = if *m == 0 {
                (false, c.render(names))
            } else {
                let mono: Vec<&str> = idx.iter().map(|&k| self.pool.odd[k].name.as_str()).collect();
                let mono = mono.join("*");
                if c.is_one() {
                    (false, mono)
                } else if c.neg().is_one() {
                    (true, mono)
                } else {
                    (false, format!("({})*{}", c.render(names), mono))
                }
            };
            match (i, neg) {
                (0, true) => {
                    out.push('-');
                    out.push_str(&text);
                }
                (0, false) => out.push_str(&text),
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&text);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&text);
                }
            }
        }
        out
    }
}

impl fmt::Display for Superfunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &Superfunction {
    type Output = Superfunction;
    fn add(self, o: &Superfunction) -> Superfunction {
        self.checked_add(o).expect("pool mismatch in add")
    }
}

impl Sub for &Superfunction {
    type Output = Superfunction;
    fn sub(self, o: &Superfunction) -> Superfunction {
        self.checked_sub(o).expect("pool mismatch in sub")
    }
}

impl Mul for &Superfunction {
    type Output = Superfunction;
    fn mul(self, o: &Superfunction) -> Superfunction {
        self.checked_mul(o).expect("pool mismatch in mul")
    }
}

impl Neg for &Superfunction {
    type Output = Superfunction;
    fn neg(self) -> Superfunction {
        self.neg_ref()
    }
}

impl Add for Superfunction {
    type Output = Superfunction;
    fn add(self, o: Superfunction) -> Superfunction {
        &self + &o
    }
}

impl Sub for Superfunction {
    type Output = Superfunction;
    fn sub(self, o: Superfunction) -> Superfunction {
        &self - &o
    }
}

impl Mul for Superfunction {
    type Output = Superfunction;
    fn mul(self, o: Superfunction) -> Superfunction {
        &self * &o
    }
}

impl Neg for Superfunction {
    type Output = Superfunction;
    fn neg(self) -> Superfunction {
        self.neg_ref()
    }
}

/// Sum of an iterator of superfunctions over `pool`.
pub fn sum(pool: &Arc<GeneratorPool>, it: impl IntoIterator<Item = Superfunction>) -> Superfunction {
    it.into_iter().fold(Superfunction::zero(pool), |a, b| &a + &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool() -> Arc<GeneratorPool> {
        GeneratorPool::with_names(&["x", "y"], &["th1", "th2", "th3"], &["l1"]).unwrap()
    }

    fn v(p: &Arc<GeneratorPool>, n: &str) -> Superfunction {
        Superfunction::named(p, n).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn anticommutation_and_nilpotency() {
        let p = pool();
        let (t1, t2) = (v(&p, "th1"), v(&p, "th2"));
        assert_eq!(&t2 * &t1, -(&t1 * &t2));
        assert!((&(&t1 * &t2) * &t1).is_zero());
        let x = v(&p, "x");
        let n = &t1 * &t2;
        assert_eq!(&(&x + &n) * &(&x - &n), &x * &x);
    }

    #[test]
    fn left_odd_derivative() {
        let p = pool();
        let (t1, t2) = (v(&p, "th1"), v(&p, "th2"));
        let f = &t1 * &t2;
        assert_eq!(f.partial_named("th1").unwrap(), t2);
        assert_eq!(f.partial_named("th2").unwrap(), -&t1);
        // Leibniz oracle: ∂_{θ2}(θ1·θ2) = ∂θ1/∂θ2 · θ2 − θ1 · ∂θ2/∂θ2
        let leibniz = &(&t1.partial_named("th2").unwrap() * &t2) - &(&t1 * &t2.partial_named("th2").unwrap());
        assert_eq!(f.partial_named("th2").unwrap(), leibniz);
        let x = v(&p, "x");
        assert_eq!((&(&x * &x) * &t1).partial_named("x").unwrap(), (&x * &t1).scale_int(2));
        assert_eq!(v(&p, "l1").partial_named("l1"), Err(Error::FleshDerivative("l1".into())));
        assert_eq!(x.partial_named("z"), Err(Error::UnknownVariable("z".into())));
    }

    #[test]
    fn inverse_examples() {
        let p = pool();
        let two = Superfunction::from_int(&p, 2);
        assert_eq!(two.invert().unwrap(), Superfunction::constant(&p, q(1, 2)));
        let n = &v(&p, "th1") * &v(&p, "th2");
        let one = Superfunction::one(&p);
        let f = &one + &n;
        let inv = f.invert().unwrap();
        assert_eq!(inv, &one - &n);
        assert!((&f * &inv).is_one());
        let x = v(&p, "x");
        assert!((&x * &x.invert().unwrap()).is_one());
        assert!(matches!(n.invert(), Err(Error::NonInvertible(_))));
    }

    #[test]
    fn sqrt_examples() {
        let p = pool();
        let n = &v(&p, "th1") * &v(&p, "th2");
        assert!(Superfunction::one(&p).sqrt().unwrap().is_one());
        let f = &Superfunction::from_int(&p, 4) + &n;
        let s = f.sqrt().unwrap();
        assert_eq!(s, &Superfunction::from_int(&p, 2) + &n.scale(&q(1, 4)));
        assert_eq!(&s * &s, f);
        let x = v(&p, "x");
        let x2 = &x * &x;
        let g = &x2 + &(&x2 * &n);
        let sg = g.sqrt().unwrap();
        assert_eq!(sg, &x * &(&Superfunction::one(&p) + &n.scale(&q(1, 2))));
        assert!(matches!(Superfunction::from_int(&p, 2).sqrt(), Err(Error::NotASquare(_))));
        assert_eq!(v(&p, "th1").sqrt(), Err(Error::OddSquareRoot));
    }

    #[test]
    fn berezin_examples() {
        let p = GeneratorPool::with_names(&["x"], &["th1", "th2"], &["l1"]).unwrap();
        let (t1, t2) = (v(&p, "th1"), v(&p, "th2"));
        let x = v(&p, "x");
        let n = RationalFunction::one(1);
        assert_eq!((&t1 * &t2).berezin_top().unwrap(), n);
        assert!((&x * &x).berezin_top().unwrap().is_zero());
        let f = &(&x.scale_int(3) * &t2) * &t1;
        assert_eq!(f.berezin_top().unwrap(), x.body().scale(&q(-3, 1)));
        let fl = &(&t1 * &t2) * &v(&p, "l1");
        assert_eq!(fl.berezin_top(), Err(Error::FleshInTopCoefficient));
    }

    #[test]
    fn parity_and_body() {
        let p = pool();
        let t1 = v(&p, "th1");
        let x = v(&p, "x");
        assert_eq!(t1.parity(), Some(Parity::Odd));
        assert_eq!((&x + &t1).parity(), None);
        assert_eq!(Superfunction::zero(&p).parity(), Some(Parity::Even));
        assert!(Superfunction::zero(&p).has_parity(Parity::Odd));
        assert_eq!((&x + &(&t1 * &v(&p, "th2"))).body(), x.body());
    }

    #[test]
    fn pool_mismatch_is_reported() {
        let a = Superfunction::one(&pool());
        let other = GeneratorPool::with_names(&["u"], &[], &[]).unwrap();
        let b = Superfunction::one(&other);
        assert_eq!(a.checked_mul(&b), Err(Error::PoolMismatch));
    }
}
