//! The Weyl algebra `Q[x, D]` and operator action on log/exp series.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{big, binomial, factorial, floor_i64, int, LaurentSeries, Point, Poly, Rational};

/// `sum_i c[i](x) D^i` with the x-powers on the left.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffOp {
    c: Vec<Poly>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl DiffOp {
    pub fn new(mut c: Vec<Poly>) -> DiffOp {
        while c.last().map_or(false, |p| p.is_zero()) {
            c.pop();
        }
        DiffOp { c }
    }

    pub fn zero() -> DiffOp {
        DiffOp { c: vec![] }
    }

    pub fn one() -> DiffOp {
        DiffOp::from_poly(Poly::one())
    }

    pub fn x() -> DiffOp {
        DiffOp::from_poly(Poly::x())
    }

    pub fn d() -> DiffOp {
        DiffOp::monomial(Rational::one(), 0, 1)
    }

    pub fn constant(q: Rational) -> DiffOp {
        DiffOp::from_poly(Poly::constant(q))
    }

    pub fn from_poly(p: Poly) -> DiffOp {
        DiffOp::new(vec![p])
    }

    /// `q x^j D^i`.
    pub fn monomial(q: Rational, j: usize, i: usize) -> DiffOp {
        let mut c = vec![Poly::zero(); i + 1];
        c[i] = Poly::monomial(q, j);
        DiffOp::new(c)
    }

    /// `x D - a`.
    pub fn euler(a: Rational) -> DiffOp {
        DiffOp::new(vec![Poly::constant(-a), Poly::x()])
    }

    /// `theta (theta + c - 1) - x (theta + a)(theta + b)`, theta = xD.
    pub fn gauss(a: &Rational, b: &Rational, c: &Rational) -> DiffOp {
        let one = Rational::one();
        let theta = DiffOp::new(vec![Poly::zero(), Poly::x()]);
        let shift = |q: &Rational| &theta + &DiffOp::constant(q.clone());
        let left = theta.compose(&shift(&(c - &one)));
        let right = DiffOp::x().compose(&shift(a).compose(&shift(b)));
        &left - &right
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Poly {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn order(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Poly> {
        self.c.last()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.c.iter().filter_map(|p| p.deg()).max()
    }

    /// `(i, j, a_ij)` for each nonzero coefficient of `x^j D^i`.
    pub fn support(&self) -> Vec<(usize, usize, Rational)> {
        let mut out = vec![];
        for (i, p) in self.c.iter().enumerate() {
            for (j, a) in p.coeffs().iter().enumerate() {
                if !a.is_zero() {
                    out.push((i, j, a.clone()));
                }
            }
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> DiffOp {
        DiffOp::new(self.c.iter().map(|p| p.scale(q)).collect())
    }

    /// `p * self`.
    pub fn mul_poly(&self, p: &Poly) -> DiffOp {
        DiffOp::new(self.c.iter().map(|a| a * p).collect())
    }

    /// Divides every coefficient by the largest common power of x.
    pub fn strip_x_power(&self) -> (DiffOp, usize) {
        let k = self.c.iter().filter_map(|p| p.ord()).min().unwrap_or(0);
        (DiffOp::new(self.c.iter().map(|p| p.unshift(k)).collect()), k)
    }

    pub fn compose(&self, o: &DiffOp) -> DiffOp {
        if self.is_zero() || o.is_zero() {
            return DiffOp::zero();
        }
        let mu = self.c.len() - 1;
        let mut derivs: Vec<Vec<Poly>> = Vec::with_capacity(o.c.len());
        for b in &o.c {
            let mut v = vec![b.clone()];
            for m in 1..=mu {
                let next = v[m - 1].derivative();
                v.push(next);
            }
            derivs.push(v);
        }
        let mut out = vec![Poly::zero(); mu + o.c.len()];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for m in 0..=i {
                let bin = big(&binomial(i as u64, m as u64));
                let am = a.scale(&bin);
                for (k, dv) in derivs.iter().enumerate() {
                    if dv[m].is_zero() {
                        continue;
                    }
                    let idx = i - m + k;
                    out[idx] = &out[idx] + &(&am * &dv[m]);
                }
            }
        }
        DiffOp::new(out)
    }

    pub fn pow(&self, n: u32) -> DiffOp {
        let mut r = DiffOp::one();
        for _ in 0..n {
            r = r.compose(self);
        }
        r
    }

    /// `sum (-D)^i a_i`.
    pub fn adjoint(&self) -> DiffOp {
        let mut out = vec![Poly::zero(); self.c.len()];
        for (i, a) in self.c.iter().enumerate() {
            let mut dm = a.clone();
            for m in 0..=i {
                if dm.is_zero() {
                    break;
                }
                let mut s = big(&binomial(i as u64, m as u64));
                if i % 2 == 1 {
                    s = -s;
                }
                out[i - m] = &out[i - m] + &dm.scale(&s);
                dm = dm.derivative();
            }
        }
        DiffOp::new(out)
    }

    /// `x -> -x`.
    pub fn reflect(&self) -> DiffOp {
        DiffOp::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let r = a.reflect();
                    if i % 2 == 1 {
                        -r
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    /// `x -> 1/w`, `D -> -w^2 D_w`, multiplied by the least power `w^e`
    /// making the coefficients polynomial. Returns the operator in `w` and `e`.
    pub fn invert_chart(&self) -> (DiffOp, i64) {
        if self.is_zero() {
            return (DiffOp::zero(), 0);
        }
        let m = self.max_degree().unwrap_or(0);
        let step = DiffOp::monomial(int(-1), 2, 1);
        let mut t = DiffOp::one();
        let mut acc = DiffOp::zero();
        for a in &self.c {
            if !a.is_zero() {
                let lifted = a.reverse(m);
                acc = &acc + &t.mul_poly(&lifted);
            }
            t = step.compose(&t);
        }
        let k = acc.c.iter().filter_map(|p| p.ord()).min().unwrap_or(0).min(m);
        let out = DiffOp::new(acc.c.iter().map(|p| p.unshift(k)).collect());
        (out, (m - k) as i64)
    }

    pub fn fourier(&self, dir: Direction) -> DiffOp {
        let mut acc = DiffOp::zero();
        for (i, j, a) in self.support() {
            let neg = match dir {
                Direction::Forward => i % 2 == 1,
                Direction::Inverse => j % 2 == 1,
            };
            let s = if neg { -a } else { a };
            acc = &acc + &dj_xi(j, i).scale(&s);
        }
        acc
    }

    pub fn apply(&self, s: &LogExpSeries) -> Result<LogExpSeries> {
        if s.terms.is_empty() {
            return Err(Error::PrecisionUnderflow("series carries no terms".into()));
        }
        match s.chart {
            Point::Zero => Ok(self.apply_local(s)),
            Point::Infinity => {
                let (psi, e) = self.invert_chart();
                let r = psi.apply_local(s);
                Ok(r.shift(-e))
            }
        }
    }

    fn apply_local(&self, s: &LogExpSeries) -> LogExpSeries {
        let mut out: Vec<LogExpTerm> = vec![];
        let mut cur = s.terms.clone();
        for (i, a) in self.c.iter().enumerate() {
            if i > 0 {
                cur = derive_terms(&cur);
            }
            if a.is_zero() {
                continue;
            }
            for t in &cur {
                out.push(LogExpTerm { series: t.series.mul_poly(a), ..t.clone() });
            }
        }
        if self.is_zero() {
            for t in &s.terms {
                out.push(LogExpTerm { series: LaurentSeries::zero(t.series.prec()), ..t.clone() });
            }
        }
        LogExpSeries::new(out, s.chart)
    }

    pub fn fmt_vars(&self, x: &str, d: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, p) in self.c.iter().enumerate().rev() {
            for (j, a) in p.coeffs().iter().enumerate().rev() {
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
                let mut parts: Vec<String> = vec![];
                if !m.is_one() || (i == 0 && j == 0) {
                    parts.push(m.to_string());
                }
                match j {
                    0 => {}
                    1 => parts.push(x.into()),
                    _ => parts.push(format!("{x}^{j}")),
                }
                match i {
                    0 => {}
                    1 => parts.push(d.into()),
                    _ => parts.push(format!("{d}^{i}")),
                }
                out.push_str(&parts.join("*"));
            }
        }
        out
    }
}

/// `D^j x^i` in canonical form.
fn dj_xi(j: usize, i: usize) -> DiffOp {
    let mut c = vec![Poly::zero(); j + 1];
    for m in 0..=j.min(i) {
        let coef = big(&(binomial(j as u64, m as u64) * factorial(i as u64) / factorial((i - m) as u64)));
        c[j - m] = Poly::monomial(coef, i - m);
    }
    DiffOp::new(c)
}

fn derive_terms(ts: &[LogExpTerm]) -> Vec<LogExpTerm> {
    let mut out = Vec::with_capacity(ts.len() * 2);
    for t in ts {
        let f = &t.series;
        let mut main = f.derivative();
        if !t.alpha.is_zero() {
            main = &main + &f.shift(-1).scale(&t.alpha);
        }
        if !t.delta.is_zero() {
            main = &main - &f.shift(-2).scale(&t.delta);
        }
        out.push(LogExpTerm { series: main, ..t.clone() });
        if t.k > 0 {
            out.push(LogExpTerm {
                series: f.shift(-1).scale(&int(t.k as i64)),
                k: t.k - 1,
                ..t.clone()
            });
        }
    }
    out
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_vars("x", "D"))
    }
}

impl<'a> std::ops::Add<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn add(self, o: &DiffOp) -> DiffOp {
        let n = self.c.len().max(o.c.len());
        DiffOp::new((0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }
}

impl<'a> std::ops::Sub<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn sub(self, o: &DiffOp) -> DiffOp {
        self + &(-o)
    }
}

impl<'a> std::ops::Neg for &'a DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp { c: self.c.iter().map(|p| -p).collect() }
    }
}

impl<'a> std::ops::Mul<&'a DiffOp> for &'a DiffOp {
    type Output = DiffOp;
    fn mul(self, o: &DiffOp) -> DiffOp {
        self.compose(o)
    }
}

/// `series(t) * t^alpha * (ln t)^k * exp(delta / t)` in the local variable
/// `t` of the chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogExpTerm {
    pub series: LaurentSeries,
    pub alpha: Rational,
    pub k: u32,
    pub delta: Rational,
}

impl LogExpTerm {
    pub fn new(series: LaurentSeries, alpha: Rational, k: u32, delta: Rational) -> LogExpTerm {
        LogExpTerm { series, alpha, k, delta }
    }

    pub fn power(series: LaurentSeries, alpha: Rational) -> LogExpTerm {
        LogExpTerm::new(series, alpha, 0, Rational::zero())
    }
}

/// Finite sum of [`LogExpTerm`]s, merged by `(alpha mod 1, k, delta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogExpSeries {
    pub terms: Vec<LogExpTerm>,
    pub chart: Point,
}

impl LogExpSeries {
    pub fn new(terms: Vec<LogExpTerm>, chart: Point) -> LogExpSeries {
        let mut merged: BTreeMap<(Rational, u32, Rational), LaurentSeries> = BTreeMap::new();
        for t in terms {
            let fl = floor_i64(&t.alpha);
            let a = &t.alpha - int(fl);
            let s = t.series.shift(fl);
            let key = (a, t.k, t.delta);
            let entry = match merged.remove(&key) {
                Some(prev) => &prev + &s,
                None => s,
            };
            merged.insert(key, entry);
        }
        let terms = merged
            .into_iter()
            .map(|((alpha, k, delta), series)| LogExpTerm { series: series.normalized(), alpha, k, delta })
            .collect();
        LogExpSeries { terms, chart }
    }

    pub fn single(t: LogExpTerm, chart: Point) -> LogExpSeries {
        LogExpSeries::new(vec![t], chart)
    }

    pub fn from_series(s: LaurentSeries, chart: Point) -> LogExpSeries {
        LogExpSeries::single(LogExpTerm::power(s, Rational::zero()), chart)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.series.is_zero())
    }

    /// Smallest precision over the terms (absolute, in the local variable,
    /// not counting the fractional part of alpha).
    pub fn min_prec(&self) -> Option<i64> {
        self.terms.iter().map(|t| t.series.prec()).min()
    }

    /// Lowest stored exponent over all terms.
    pub fn min_start(&self) -> Option<i64> {
        self.terms.iter().map(|t| t.series.valuation().unwrap_or(t.series.prec())).min()
    }

    pub fn add(&self, o: &LogExpSeries) -> LogExpSeries {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        LogExpSeries::new(t, self.chart)
    }

    pub fn sub(&self, o: &LogExpSeries) -> LogExpSeries {
        self.add(&o.scale(&int(-1)))
    }

    pub fn scale(&self, q: &Rational) -> LogExpSeries {
        LogExpSeries {
            terms: self.terms.iter().map(|t| LogExpTerm { series: t.series.scale(q), ..t.clone() }).collect(),
            chart: self.chart,
        }
    }

    /// Multiplies by `t^k` for an integer `k`.
    pub fn shift(&self, k: i64) -> LogExpSeries {
        LogExpSeries {
            terms: self.terms.iter().map(|t| LogExpTerm { series: t.series.shift(k), ..t.clone() }).collect(),
            chart: self.chart,
        }
    }

    pub fn truncate(&self, prec: i64) -> LogExpSeries {
        LogExpSeries {
            terms: self.terms.iter().map(|t| LogExpTerm { series: t.series.truncate(prec), ..t.clone() }).collect(),
            chart: self.chart,
        }
    }

    /// Image under `t -> -t` with the branch constants `(-1)^alpha` and
    /// `ln(-1)` set to 1 and 0; each `(alpha, delta)` class is scaled on its
    /// own, so solutions of `phi` map to solutions of `reflect(phi)`.
    pub fn reflect(&self) -> LogExpSeries {
        LogExpSeries::new(
            self.terms
                .iter()
                .map(|t| LogExpTerm {
                    series: t.series.reflect(),
                    alpha: t.alpha.clone(),
                    k: t.k,
                    delta: -&t.delta,
                })
                .collect(),
            self.chart,
        )
    }

    /// Keeps only terms with a nonzero known coefficient.
    pub fn nonzero_terms(&self) -> Vec<&LogExpTerm> {
        self.terms.iter().filter(|t| !t.series.is_zero()).collect()
    }

    pub fn fmt_var(&self, var: &str) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .filter(|t| !t.series.is_zero())
            .map(|t| {
                let mut s = format!("({})", t.series.fmt_var(var));
                if !t.alpha.is_zero() {
                    s.push_str(&format!("*{var}^({})", t.alpha));
                }
                if t.k > 0 {
                    s.push_str(&format!("*ln({var})^{}", t.k));
                }
                if !t.delta.is_zero() {
                    s.push_str(&format!("*exp(({})/{var})", t.delta));
                }
                s
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for LogExpSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.chart == Point::Zero { "x" } else { "w" };
        f.write_str(&self.fmt_var(var))
    }
}
