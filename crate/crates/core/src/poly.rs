//! Sparse multivariate polynomials over ℚ.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors, so iteration is in
//! ascending pure-lex order and the leading term is the last entry. Variable 0 is
//! the most significant. GCDs use the recursive primitive PRS algorithm, which is
//! plenty for the handful of variables and low degrees that show up in metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

/// Exact square root of a non-negative rational, if it exists.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Exponents, c: BigRational) -> Self {
        let nvars = exps.len();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            debug_assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().iter().all(|&e| e == 0),
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_value().is_one()
    }

    /// The constant term.
    pub fn constant_value(&self) -> BigRational {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> Option<(&Exponents, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|e| e[k]).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), -c);
        }
        r
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.nvars);
        }
        if self.is_constant() {
            return other.scale(&self.constant_value());
        }
        if other.is_constant() {
            return self.scale(&other.constant_value());
        }
        let mut r = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                r.add_term(e2, c * BigRational::from_integer(BigInt::from(e[k])));
            }
        }
        r
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Scale so that the leading coefficient is 1 (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Coefficient of `x_k^d`, as a polynomial not involving `x_k`.
    pub fn coeff_in(&self, k: usize, d: u32) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == d {
                let mut e2 = e.clone();
                e2[k] = 0;
                r.terms.insert(e2, c.clone());
            }
        }
        r
    }

    fn shift(&self, k: usize, d: u32) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[k] += d;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if d.is_constant() {
            return Some(self.scale(&d.constant_value().recip()));
        }
        let (ed, cd) = d.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let mut r = self.clone();
        let mut q = Self::zero(self.nvars);
        while let Some((er, cr)) = r.leading().map(|(e, c)| (e.clone(), c.clone())) {
            if er.iter().zip(&ed).any(|(a, b)| a < b) {
                return None;
            }
            let et: Exponents = er.iter().zip(&ed).map(|(a, b)| a - b).collect();
            let t = Self::monomial(et, cr / &cd);
            r = r.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    /// Monic greatest common divisor. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        gcd_from(self, other, 0).monic()
    }

    /// Exact square root with positive leading coefficient, if one exists.
    pub fn sqrt(&self) -> Option<Self> {
        let Some((e0, c0)) = self.leading().map(|(e, c)| (e.clone(), c.clone())) else {
            return Some(self.clone());
        };
        if e0.iter().any(|e| e % 2 == 1) {
            return None;
        }
        let r0 = rational_sqrt(&c0)?;
        let half: Exponents = e0.iter().map(|e| e / 2).collect();
        let lead = Self::monomial(half.clone(), r0.clone());
        let two_lead_c = &r0 * BigRational::from_integer(BigInt::from(2));
        let mut s = lead;
        let mut last = half.clone();
        loop {
            let r = self.sub(&s.mul(&s));
            let Some((er, cr)) = r.leading().map(|(e, c)| (e.clone(), c.clone())) else {
                return Some(s);
            };
            if er.iter().zip(&half).any(|(a, b)| a < b) {
                return None;
            }
            let et: Exponents = er.iter().zip(&half).map(|(a, b)| a - b).collect();
            if et >= last {
                return None;
            }
            last = et.clone();
            s = s.add(&Self::monomial(et, cr / &two_lead_c));
        }
    }

    /// Render with the given variable names, terms in descending lex order.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (k, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(names[k].clone()),
                    _ => factors.push(format!("{}^{}", names[k], p)),
                }
            }
            if factors.is_empty() {
                let _ = write!(out, "{}", a);
            } else {
                if !a.is_one() {
                    let _ = write!(out, "{}*", a);
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

fn content_in(p: &Polynomial, k: usize) -> Polynomial {
    let mut g = Polynomial::zero(p.nvars);
    for d in (0..=p.degree_in(k)).rev() {
        let c = p.coeff_in(k, d);
        if c.is_zero() {
            continue;
        }
        g = gcd_from(&g, &c, k + 1).monic();
        if g.is_constant() {
            return Polynomial::one(p.nvars);
        }
    }
    g
}

fn primitive_part(p: &Polynomial, k: usize) -> Polynomial {
    let c = content_in(p, k);
    p.exact_div(&c).expect("content divides").monic()
}

fn pseudo_remainder(p: &Polynomial, q: &Polynomial, k: usize) -> Polynomial {
    let dq = q.degree_in(k);
    let lq = q.coeff_in(k, dq);
    let mut r = p.clone();
    while !r.is_zero() && r.degree_in(k) >= dq {
        let dr = r.degree_in(k);
        let lr = r.coeff_in(k, dr);
        r = lq.mul(&r).sub(&lr.mul(&q.shift(k, dr - dq)));
    }
    r
}

/// GCD of polynomials that do not involve variables below `start`.
fn gcd_from(a: &Polynomial, b: &Polynomial, start: usize) -> Polynomial {
    let n = a.nvars;
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(n);
    }
    let Some(k) = (start..n).find(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0) else {
        return Polynomial::one(n);
    };
    let ca = content_in(a, k);
    let cb = content_in(b, k);
    let c = gcd_from(&ca, &cb, k + 1);
    let mut p = a.exact_div(&ca).expect("content divides").monic();
    let mut q = b.exact_div(&cb).expect("content divides").monic();
    if p.degree_in(k) < q.degree_in(k) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        if q.degree_in(k) == 0 {
            return c;
        }
        let r = pseudo_remainder(&p, &q, k);
        if r.is_zero() {
            return c.mul(&q);
        }
        p = q;
        q = primitive_part(&r, k);
    }
}
