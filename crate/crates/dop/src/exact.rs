//! Rationals, dense polynomials, rational functions and truncated Laurent
//! series over Q.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn big(n: &BigInt) -> Rational {
    BigRational::from_integer(n.clone())
}

/// Parses `p`, `-p`, `p/q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn floor_i64(q: &Rational) -> i64 {
    q.floor().to_integer().to_i64().expect("exponent out of range")
}

/// Representative of `q` mod 1 in `[0, 1)`.
pub fn frac(q: &Rational) -> Rational {
    q - q.floor()
}

pub fn factorial(n: u64) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= i;
    }
    f
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * (n - i) / (i + 1);
    }
    b
}

/// Rising factorial `a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: &Rational, n: u64) -> Rational {
    let mut p = Rational::one();
    let mut t = a.clone();
    for _ in 0..n {
        p *= &t;
        t += Rational::one();
    }
    p
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| ln_abs(q).exp() * if q.is_negative() { -1.0 } else { 1.0 })
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of `|q|`, for `q != 0`.
pub fn ln_abs(q: &Rational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// The two charts where local data is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Zero,
    Infinity,
}

impl Point {
    pub fn name(self) -> &'static str {
        match self {
            Point::Zero => "zero",
            Point::Infinity => "infinity",
        }
    }
}

/// Dense univariate polynomial, `c[i]` is the coefficient of `x^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Rational>,
}

impl Poly {
    pub fn from_coeffs(mut c: Vec<Rational>) -> Poly {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Poly {
        Poly { c: vec![] }
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn x() -> Poly {
        Poly::monomial(Rational::one(), 1)
    }

    pub fn constant(q: Rational) -> Poly {
        Poly::from_coeffs(vec![q])
    }

    pub fn monomial(q: Rational, d: usize) -> Poly {
        let mut c = vec![Rational::zero(); d + 1];
        c[d] = q;
        Poly::from_coeffs(c)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn lead(&self) -> Option<&Rational> {
        self.c.last()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn ord(&self) -> Option<usize> {
        self.c.iter().position(|x| !x.is_zero())
    }

    pub fn is_monomial(&self) -> bool {
        self.c.iter().filter(|x| !x.is_zero()).count() == 1
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|x| x * q).collect() }
    }

    pub fn eval(&self, q: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for a in self.c.iter().rev() {
            acc = acc * q + a;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.c.iter().enumerate().skip(1).map(|(i, a)| a * int(i as i64)).collect(),
        )
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Poly {
        Poly {
            c: self
                .c
                .iter()
                .enumerate()
                .map(|(i, a)| if i % 2 == 1 { -a } else { a.clone() })
                .collect(),
        }
    }

    /// `x^d p(1/x)`; requires `d >= deg`.
    pub fn reverse(&self, d: usize) -> Poly {
        let mut c = vec![Rational::zero(); d + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[d - i] = a.clone();
        }
        Poly::from_coeffs(c)
    }

    /// `x^k p`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    /// `p / x^k`, dropping anything below `x^k`.
    pub fn unshift(&self, k: usize) -> Poly {
        Poly::from_coeffs(self.c.iter().skip(k).cloned().collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..n {
            r = &r * self;
        }
        r
    }

    /// `p(q(x))`.
    pub fn compose(&self, q: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for a in self.c.iter().rev() {
            acc = &(&acc * q) + &Poly::constant(a.clone());
        }
        acc
    }

    /// Taylor coefficients at `b`: `p(b + t) = sum out[r] t^r`.
    pub fn taylor_at(&self, b: &Rational) -> Vec<Rational> {
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &c[j + 1] * b;
                c[j] += t;
            }
        }
        c
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.deg().expect("division by zero polynomial");
        let lc = d.lead().unwrap().clone();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let t = &r[i + dd] / &lc;
            if !t.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    let s = &t * dj;
                    r[i + j] -= s;
                }
            }
            q[i] = t;
        }
        r.truncate(dd);
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer coefficients of a rational multiple of `self` with content 1
    /// and positive leading coefficient.
    pub fn primitive_ints(&self) -> Vec<BigInt> {
        let mut l = BigInt::one();
        for a in &self.c {
            l = l.lcm(a.denom());
        }
        let mut v: Vec<BigInt> = self.c.iter().map(|a| (a * big(&l)).to_integer()).collect();
        let mut g = BigInt::zero();
        for a in &v {
            g = g.gcd(a);
        }
        if !g.is_zero() {
            let neg = v.last().map_or(false, |x| x.is_negative());
            for a in v.iter_mut() {
                *a = &*a / &g;
                if neg {
                    *a = -&*a;
                }
            }
        }
        v
    }

    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let m = a.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&m.to_string());
            } else if m.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{m}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs(
            (0..n)
                .map(|i| match (self.c.get(i), o.c.get(i)) {
                    (Some(a), Some(b)) => a + b,
                    (Some(a), None) | (None, Some(a)) => a.clone(),
                    (None, None) => unreachable!(),
                })
                .collect(),
        )
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl<'a> Neg for &'a Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { c: self.c.iter().map(|a| -a).collect() }
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(Poly);
owned_ops!(RatFun);

/// Reduced fraction of polynomials with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<RatFun> {
        if den.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RatFun::zero());
        }
        let g = Poly::gcd(&num, &den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let l = den.lead().unwrap().recip();
        Ok(RatFun { num: num.scale(&l), den: den.scale(&l) })
    }

    pub fn zero() -> RatFun {
        RatFun { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> RatFun {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(q: Rational) -> RatFun {
        RatFun::from_poly(Poly::constant(q))
    }

    pub fn from_poly(p: Poly) -> RatFun {
        RatFun { num: p, den: Poly::one() }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.deg() == Some(0)
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero rational function".into()));
        }
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFun) -> Result<RatFun> {
        Ok(self * &o.inv()?)
    }

    pub fn scale(&self, q: &Rational) -> RatFun {
        if q.is_zero() {
            return RatFun::zero();
        }
        RatFun { num: self.num.scale(q), den: self.den.clone() }
    }

    pub fn derivative(&self) -> RatFun {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        RatFun::new(n, &self.den * &self.den).unwrap()
    }

    pub fn eval(&self, q: &Rational) -> Option<Rational> {
        let d = self.den.eval(q);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(q) / d)
        }
    }

    pub fn fmt_var(&self, var: &str) -> String {
        if self.is_poly() {
            return self.num.fmt_var(var);
        }
        format!("({})/({})", self.num.fmt_var(var), self.den.fmt_var(var))
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl<'a> Add<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn add(self, o: &RatFun) -> RatFun {
        if self.den == o.den {
            return RatFun::new(&self.num + &o.num, self.den.clone()).unwrap();
        }
        RatFun::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }
}

impl<'a> Sub<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn sub(self, o: &RatFun) -> RatFun {
        self + &(-o)
    }
}

impl<'a> Neg for &'a RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }
}

impl<'a> Mul<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn mul(self, o: &RatFun) -> RatFun {
        if self.is_zero() || o.is_zero() {
            return RatFun::zero();
        }
        RatFun::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }
}

/// Laurent series `sum c[i] x^(val+i)`, known modulo `x^prec`.
///
/// `val` is only the start of storage; leading stored coefficients may be
/// zero. A series with `val == prec` stores nothing: it is zero up to its
/// precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    val: i64,
    c: Vec<Rational>,
    prec: i64,
}

impl LaurentSeries {
    pub fn new(val: i64, mut c: Vec<Rational>, prec: i64) -> LaurentSeries {
        let val = val.min(prec);
        c.resize((prec - val) as usize, Rational::zero());
        LaurentSeries { val, c, prec }
    }

    pub fn zero(prec: i64) -> LaurentSeries {
        LaurentSeries { val: prec, c: vec![], prec }
    }

    pub fn one(prec: i64) -> LaurentSeries {
        LaurentSeries::monomial(Rational::one(), 0, prec)
    }

    pub fn monomial(q: Rational, e: i64, prec: i64) -> LaurentSeries {
        LaurentSeries::new(e, vec![q], prec)
    }

    pub fn from_poly(p: &Poly, prec: i64) -> LaurentSeries {
        LaurentSeries::new(0, p.coeffs().to_vec(), prec)
    }

    /// Power series from `f(n)` for `n < prec`.
    pub fn from_fn(prec: i64, f: impl FnMut(u64) -> Rational) -> LaurentSeries {
        LaurentSeries::new(0, (0..prec.max(0) as u64).map(f).collect(), prec)
    }

    pub fn start(&self) -> i64 {
        self.val
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn stored(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, n: i64) -> Option<Rational> {
        if n >= self.prec {
            None
        } else if n < self.val {
            Some(Rational::zero())
        } else {
            Some(self.c[(n - self.val) as usize].clone())
        }
    }

    /// True order of the series; `None` when every known coefficient is 0.
    pub fn valuation(&self) -> Option<i64> {
        self.c.iter().position(|a| !a.is_zero()).map(|i| self.val + i as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    /// Strips stored leading zeros.
    pub fn normalized(&self) -> LaurentSeries {
        match self.valuation() {
            None => LaurentSeries::zero(self.prec),
            Some(v) => LaurentSeries {
                val: v,
                c: self.c[(v - self.val) as usize..].to_vec(),
                prec: self.prec,
            },
        }
    }

    fn order_or_prec(&self) -> i64 {
        self.valuation().unwrap_or(self.prec)
    }

    pub fn truncate(&self, prec: i64) -> LaurentSeries {
        if prec >= self.prec {
            return self.clone();
        }
        LaurentSeries::new(self.val, self.c.clone(), prec)
    }

    /// `x^k f`.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries { val: self.val + k, c: self.c.clone(), prec: self.prec + k }
    }

    pub fn scale(&self, q: &Rational) -> LaurentSeries {
        LaurentSeries { val: self.val, c: self.c.iter().map(|a| a * q).collect(), prec: self.prec }
    }

    pub fn derivative(&self) -> LaurentSeries {
        let c = self.c.iter().enumerate().map(|(i, a)| a * int(self.val + i as i64)).collect();
        LaurentSeries::new(self.val - 1, c, self.prec - 1)
    }

    /// `f(-x)`.
    pub fn reflect(&self) -> LaurentSeries {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| if (self.val + i as i64).rem_euclid(2) == 1 { -a } else { a.clone() })
            .collect();
        LaurentSeries { val: self.val, c, prec: self.prec }
    }

    pub fn mul_poly(&self, p: &Poly) -> LaurentSeries {
        let Some(o) = p.ord() else {
            return LaurentSeries::zero(self.prec);
        };
        let prec = self.prec + o as i64;
        let mut c = vec![Rational::zero(); (prec - self.val).max(0) as usize];
        for (j, b) in p.coeffs().iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (i, a) in self.c.iter().enumerate() {
                let idx = i + j;
                if idx >= c.len() {
                    break;
                }
                c[idx] += a * b;
            }
        }
        LaurentSeries::new(self.val, c, prec)
    }

    pub fn inverse(&self) -> Result<LaurentSeries> {
        let s = self.normalized();
        let Some(v) = s.valuation() else {
            return Err(Error::NotInvertible("series is zero to its precision".into()));
        };
        let r = (s.prec - v) as usize;
        let a0 = s.c[0].recip();
        let mut b: Vec<Rational> = Vec::with_capacity(r);
        for n in 0..r {
            let mut acc = if n == 0 { Rational::one() } else { Rational::zero() };
            for i in 1..=n {
                if !s.c[i].is_zero() {
                    acc -= &s.c[i] * &b[n - i];
                }
            }
            b.push(acc * &a0);
        }
        Ok(LaurentSeries::new(-v, b, -v + r as i64))
    }

    pub fn div(&self, o: &LaurentSeries) -> Result<LaurentSeries> {
        Ok(self * &o.inverse()?)
    }

    /// Agreement on all coefficients known to both.
    pub fn eq_mod(&self, o: &LaurentSeries) -> bool {
        (self - o).is_zero()
    }

    pub fn fmt_var(&self, var: &str) -> String {
        let mut out = String::new();
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = self.val + i as i64;
            let neg = a.is_negative();
            let m = a.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            if mono.is_empty() {
                out.push_str(&m.to_string());
            } else if m.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{m}*{mono}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push_str(&format!(" + O({var}^{})", self.prec));
        out
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl<'a> Add<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, o: &LaurentSeries) -> LaurentSeries {
        let prec = self.prec.min(o.prec);
        let val = self.val.min(o.val).min(prec);
        let c = (val..prec)
            .map(|n| self.coeff(n).unwrap() + o.coeff(n).unwrap())
            .collect();
        LaurentSeries::new(val, c, prec)
    }
}

impl<'a> Sub<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, o: &LaurentSeries) -> LaurentSeries {
        self + &(-o)
    }
}

impl<'a> Neg for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        LaurentSeries { val: self.val, c: self.c.iter().map(|a| -a).collect(), prec: self.prec }
    }
}

impl<'a> Mul<&'a LaurentSeries> for &'a LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, o: &LaurentSeries) -> LaurentSeries {
        let (oa, ob) = (self.order_or_prec(), o.order_or_prec());
        let prec = (self.prec.saturating_add(ob)).min(o.prec.saturating_add(oa));
        let val = (oa + ob).min(prec);
        let len = (prec - val) as usize;
        let mut c = vec![Rational::zero(); len];
        let a = &self.c[(oa - self.val).min(self.c.len() as i64) as usize..];
        let b = &o.c[(ob - o.val).min(o.c.len() as i64) as usize..];
        for (i, x) in a.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                c[i + j] += x * y;
            }
        }
        LaurentSeries::new(val, c, prec)
    }
}

owned_ops!(LaurentSeries);

/// Expansion of `f` at 0 in `x`, or at infinity in `w = 1/x`, known modulo
/// the `order`-th power of the local variable.
pub fn series_expand(f: &RatFun, at: Point, order: i64) -> Result<LaurentSeries> {
    if f.den().is_zero() {
        return Err(Error::Malformed("zero denominator".into()));
    }
    if f.is_zero() {
        return Ok(LaurentSeries::zero(order));
    }
    let (n1, d1, shift) = match at {
        Point::Zero => {
            let (rn, rd) = (f.num().ord().unwrap(), f.den().ord().unwrap());
            (f.num().unshift(rn), f.den().unshift(rd), rn as i64 - rd as i64)
        }
        Point::Infinity => {
            let (dn, dd) = (f.num().deg().unwrap(), f.den().deg().unwrap());
            (f.num().reverse(dn), f.den().reverse(dd), dd as i64 - dn as i64)
        }
    };
    let terms = (order - shift).max(0) as usize;
    let d0 = d1.coeff(0).recip();
    let mut g: Vec<Rational> = Vec::with_capacity(terms);
    for n in 0..terms {
        let mut acc = n1.coeff(n);
        for i in 1..=n.min(d1.deg().unwrap_or(0)) {
            let di = &d1.coeffs()[i];
            if !di.is_zero() {
                acc -= di * &g[n - i];
            }
        }
        g.push(acc * &d0);
    }
    if terms == 0 {
        return Ok(LaurentSeries::zero(order));
    }
    Ok(LaurentSeries::new(shift, g, order))
}
