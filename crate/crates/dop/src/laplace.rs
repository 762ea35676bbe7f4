//! Formal Laplace transform of `f x^alpha (ln x)^k` with exact Gamma
//! constants.
//!
//! All constants are kept as finite combinations of `Gamma^(j)(b)` over Q,
//! rewritten with `Gamma^(j)(b+1) = b Gamma^(j)(b) + j Gamma^(j-1)(b)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{big, binomial, factorial, frac, int, is_integer, LaurentSeries, Point, Rational};
use crate::weyl::{LogExpSeries, LogExpTerm};

fn is_pos_int(q: &Rational) -> bool {
    is_integer(q) && q.is_positive()
}

fn is_neg_int(q: &Rational) -> bool {
    is_integer(q) && q.is_negative()
}

fn fact(n: u64) -> Rational {
    big(&factorial(n))
}

fn sign(n: i64) -> Rational {
    if n.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Basis element of the constant field used in results.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    One,
    Gamma { base: Rational, j: usize },
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::One => write!(f, "1"),
            Constant::Gamma { base, j: 0 } => write!(f, "G({base})"),
            Constant::Gamma { base, j } => write!(f, "G^({j})({base})"),
        }
    }
}

/// `rational + sum_j coords[j] Gamma^(j)(base)`.
#[derive(Clone, Debug)]
pub struct GammaVector {
    base: Rational,
    coords: BTreeMap<usize, Rational>,
    rational: Rational,
}

impl GammaVector {
    pub fn zero(base: Rational) -> GammaVector {
        GammaVector { base, coords: BTreeMap::new(), rational: Rational::zero() }
    }

    /// `Gamma^(j)(base)`.
    pub fn gamma(base: Rational, j: usize) -> GammaVector {
        let mut g = GammaVector::zero(base);
        g.coords.insert(j, Rational::one());
        g.fold()
    }

    pub fn rational(q: Rational, base: Rational) -> GammaVector {
        GammaVector { rational: q, ..GammaVector::zero(base) }
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn coords(&self) -> &BTreeMap<usize, Rational> {
        &self.coords
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rational
    }

    /// `Gamma(n) = (n-1)!` is rational at positive integers.
    fn fold(mut self) -> GammaVector {
        self.coords.retain(|_, c| !c.is_zero());
        if is_pos_int(&self.base) {
            if let Some(c) = self.coords.remove(&0) {
                let n = self.base.to_integer().to_u64().unwrap();
                self.rational += c * fact(n - 1);
            }
        }
        self
    }

    /// Rewrites on base `b - 1`.
    fn step_down(&self) -> GammaVector {
        let b1 = &self.base - Rational::one();
        let mut out = GammaVector::rational(self.rational.clone(), b1.clone());
        for (&j, c) in &self.coords {
            *out.coords.entry(j).or_default() += c * &b1;
            if j > 0 {
                *out.coords.entry(j - 1).or_default() += c * int(j as i64);
            }
        }
        out.fold()
    }

    /// Rewrites on base `b + 1`; needs `b != 0`.
    fn step_up(&self) -> GammaVector {
        let b = &self.base;
        let top = self.coords.keys().max().copied().unwrap_or(0);
        // e[j] = Gamma^(j)(b) as coordinates over Gamma^(i)(b+1)
        let mut e: Vec<Vec<Rational>> = vec![];
        for j in 0..=top {
            let mut v = vec![Rational::zero(); top + 1];
            v[j] = b.recip();
            if j > 0 {
                for i in 0..=top {
                    let t = &e[j - 1][i] * int(j as i64) / b;
                    v[i] -= t;
                }
            }
            e.push(v);
        }
        let b1 = b + Rational::one();
        let mut out = GammaVector::rational(self.rational.clone(), b1);
        for (&j, c) in &self.coords {
            for (i, a) in e[j].iter().enumerate() {
                if !a.is_zero() {
                    *out.coords.entry(i).or_default() += c * a;
                }
            }
        }
        out.fold()
    }

    pub fn rebase(&self, target: &Rational) -> Result<GammaVector> {
        if !is_integer(&(target - &self.base)) {
            return Err(Error::Malformed(format!("cannot rebase {} to {}", self.base, target)));
        }
        if is_integer(target) && !target.is_positive() {
            return Err(Error::Malformed(format!("Gamma has a pole at {target}")));
        }
        let mut g = self.clone();
        while &g.base < target {
            g = g.step_up();
        }
        while &g.base > target {
            g = g.step_down();
        }
        Ok(g)
    }

    pub fn canonical_base(b: &Rational) -> Rational {
        if is_integer(b) {
            Rational::one()
        } else {
            frac(b)
        }
    }

    pub fn canonical(&self) -> GammaVector {
        self.rebase(&GammaVector::canonical_base(&self.base)).expect("canonical base is pole free")
    }

    pub fn components(&self) -> BTreeMap<Constant, Rational> {
        let c = self.canonical();
        let mut out = BTreeMap::new();
        if !c.rational.is_zero() {
            out.insert(Constant::One, c.rational.clone());
        }
        for (&j, a) in &c.coords {
            if !a.is_zero() {
                out.insert(Constant::Gamma { base: c.base.clone(), j }, a.clone());
            }
        }
        out
    }

    pub fn add(&self, o: &GammaVector) -> GammaVector {
        let a = self.canonical();
        let b = o.canonical();
        if a.base != b.base && !b.coords.is_empty() && !a.coords.is_empty() {
            panic!("adding Gamma constants from different classes mod 1");
        }
        let base = if a.coords.is_empty() { b.base.clone() } else { a.base.clone() };
        let mut out = GammaVector::rational(&a.rational + &b.rational, base);
        for (j, c) in a.coords.iter().chain(b.coords.iter()) {
            *out.coords.entry(*j).or_default() += c;
        }
        out.fold()
    }

    pub fn scale(&self, q: &Rational) -> GammaVector {
        GammaVector {
            base: self.base.clone(),
            coords: self.coords.iter().map(|(j, c)| (*j, c * q)).collect(),
            rational: &self.rational * q,
        }
        .fold()
    }

    pub fn is_zero(&self) -> bool {
        self.components().is_empty()
    }
}

impl PartialEq for GammaVector {
    fn eq(&self, o: &GammaVector) -> bool {
        self.components() == o.components()
    }
}

impl fmt::Display for GammaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components().into_iter().map(|(k, c)| format!("({c})*{k}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `C(k,m) (-1)^m Gamma^(k-m)(beta+1)`: coefficient of `(ln z)^m` in
/// `z^{beta+1} L(x^beta (ln x)^k)` for `beta` not a negative integer.
pub fn monomial_coeff(beta: &Rational, k: u32, m: u32) -> GammaVector {
    let g = GammaVector::gamma(beta + Rational::one(), (k - m) as usize);
    g.scale(&(big(&binomial(k as u64, m as u64)) * sign(m as i64)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Generic,
    NegativeInteger,
}

/// `z^{prefactor} sum_j (ln z)^j sum_l K_l S_{j,l}(1/z)`.
#[derive(Clone, Debug)]
pub struct LaplaceResult {
    pub alpha: Rational,
    pub k: u32,
    pub prefactor_exponent: Rational,
    pub branch: Branch,
    pub log_terms: Vec<Vec<(GammaVector, LaurentSeries)>>,
}

const MONO_PREC: i64 = 8;

impl LaplaceResult {
    /// Coefficient series per log power, keyed by basis constant.
    pub fn collapse(&self) -> Vec<BTreeMap<Constant, LaurentSeries>> {
        self.log_terms
            .iter()
            .map(|pairs| {
                let mut m: BTreeMap<Constant, LaurentSeries> = BTreeMap::new();
                for (g, s) in pairs {
                    for (key, c) in g.components() {
                        let t = s.scale(&c);
                        let e = match m.remove(&key) {
                            Some(prev) => &prev + &t,
                            None => t,
                        };
                        m.insert(key, e);
                    }
                }
                m.retain(|_, s| !s.is_zero());
                m
            })
            .collect()
    }

    /// Equal prefactors and equal collapsed coefficients on common precision.
    pub fn same_as(&self, o: &LaplaceResult) -> bool {
        if self.prefactor_exponent != o.prefactor_exponent {
            return false;
        }
        let (a, b) = (self.collapse(), o.collapse());
        let n = a.len().max(b.len());
        for j in 0..n {
            let empty = BTreeMap::new();
            let (x, y) = (a.get(j).unwrap_or(&empty), b.get(j).unwrap_or(&empty));
            let keys: std::collections::BTreeSet<&Constant> = x.keys().chain(y.keys()).collect();
            for key in keys {
                match (x.get(key), y.get(key)) {
                    (Some(s), Some(t)) => {
                        if !s.eq_mod(t) {
                            return false;
                        }
                    }
                    (Some(s), None) | (None, Some(s)) => {
                        if !s.is_zero() {
                            return false;
                        }
                    }
                    (None, None) => {}
                }
            }
        }
        true
    }

    /// `h_{alpha,k,k}`: the rational top series with `L = z^{-a-1} Gamma(a) sum h_j (ln z)^j`.
    pub fn top_series(&self) -> Option<LaurentSeries> {
        if self.branch != Branch::Generic {
            return None;
        }
        let pairs = self.log_terms.get(self.k as usize)?;
        let (_, s) = pairs.iter().find(|(_, s)| !s.is_zero())?;
        Some(s.scale(&sign(self.k as i64)))
    }

    pub fn max_log(&self) -> usize {
        self.collapse().iter().rposition(|m| !m.is_empty()).unwrap_or(0)
    }

    fn map_series(&self, prefactor: Rational, f: impl Fn(&LaurentSeries) -> LaurentSeries) -> LaplaceResult {
        LaplaceResult {
            prefactor_exponent: prefactor,
            log_terms: self.log_terms.iter().map(|v| v.iter().map(|(g, s)| (g.clone(), f(s))).collect()).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, q: &Rational) -> LaplaceResult {
        self.map_series(self.prefactor_exponent.clone(), |s| s.scale(q))
    }

    /// Multiplies by `z`.
    pub fn mul_z(&self) -> LaplaceResult {
        self.map_series(&self.prefactor_exponent + Rational::one(), |s| s.clone())
    }

    /// Re-expresses on prefactor `z^e` for `e - prefactor` a nonnegative integer.
    pub fn with_prefactor(&self, e: &Rational) -> LaplaceResult {
        let d = e - &self.prefactor_exponent;
        assert!(is_integer(&d) && !d.is_negative());
        let d = d.to_integer().to_i64().unwrap();
        self.map_series(e.clone(), |s| s.shift(d))
    }

    /// `d/dz` of the result.
    pub fn derivative(&self) -> LaplaceResult {
        let e = self.prefactor_exponent.clone();
        let n = self.log_terms.len();
        let mut out: Vec<Vec<(GammaVector, LaurentSeries)>> = vec![vec![]; n];
        for (j, pairs) in self.log_terms.iter().enumerate() {
            for (g, s) in pairs {
                // z^{e-n} -> (e - n) z^{e-n-1}
                let c: Vec<Rational> =
                    s.stored().iter().enumerate().map(|(i, a)| a * (&e - int(s.start() + i as i64))).collect();
                out[j].push((g.clone(), LaurentSeries::new(s.start(), c, s.prec())));
                if j > 0 {
                    out[j - 1].push((g.scale(&int(j as i64)), s.clone()));
                }
            }
        }
        LaplaceResult { prefactor_exponent: e - Rational::one(), log_terms: out, ..self.clone() }
    }

    /// Sum of results (same class of prefactor mod 1).
    pub fn add(&self, o: &LaplaceResult) -> LaplaceResult {
        let e = if self.prefactor_exponent >= o.prefactor_exponent {
            self.prefactor_exponent.clone()
        } else {
            o.prefactor_exponent.clone()
        };
        let (a, b) = (self.with_prefactor(&e), o.with_prefactor(&e));
        let n = a.log_terms.len().max(b.log_terms.len());
        let mut log_terms = vec![vec![]; n];
        for v in [a.log_terms, b.log_terms] {
            for (j, pairs) in v.into_iter().enumerate() {
                log_terms[j].extend(pairs);
            }
        }
        LaplaceResult { prefactor_exponent: e, log_terms, ..self.clone() }
    }

    /// Projection on one basis constant as a log series in `w = 1/z`.
    pub fn component(&self, key: &Constant) -> LogExpSeries {
        let mut terms = vec![];
        for (j, m) in self.collapse().into_iter().enumerate() {
            if let Some(s) = m.get(key) {
                // (ln z)^j = (-ln w)^j, z^e = w^{-e}
                terms.push(LogExpTerm::new(s.scale(&sign(j as i64)), -&self.prefactor_exponent, j as u32, Rational::zero()));
            }
        }
        if terms.is_empty() {
            terms.push(LogExpTerm::power(LaurentSeries::zero(MONO_PREC), -&self.prefactor_exponent));
        }
        LogExpSeries::new(terms, Point::Infinity)
    }

    pub fn constants(&self) -> Vec<Constant> {
        let mut keys: Vec<Constant> = self.collapse().into_iter().flat_map(|m| m.into_keys()).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn to_json(&self) -> Value {
        let logs: Vec<Value> = self
            .collapse()
            .into_iter()
            .enumerate()
            .map(|(j, m)| {
                json!({
                    "log_power": j,
                    "parts": m.iter().map(|(c, s)| json!({
                        "constant": c.to_string(),
                        "series": {
                            "valuation": s.normalized().start(),
                            "prec": s.prec(),
                            "coeffs": s.normalized().stored().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                        },
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "alpha": self.alpha.to_string(),
            "k": self.k,
            "prefactor_exponent": self.prefactor_exponent.to_string(),
            "branch": match self.branch { Branch::Generic => "generic", Branch::NegativeInteger => "negative-integer" },
            "variable": "x",
            "log_terms": logs,
            "constants": self.constants().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// `F_n = p.f. int_0^x (x-t)^n/n! t^alpha (ln t)^k dt` as a sum of
/// `c x^{alpha+n+1} (ln x)^l`.
pub fn finite_part_coeffs(alpha: &Rational, k: u32, n: u32) -> Vec<Rational> {
    let k = k as usize;
    let mut a = vec![Rational::zero(); k + 2];
    let hit = -alpha - Rational::one();
    for m in 0..=n as u64 {
        let s = int(m as i64) + alpha + Rational::one();
        if s.is_zero() {
            continue;
        }
        let c = sign(m as i64) / (fact(m) * fact(n as u64 - m)) / &s;
        for l in 0..=k {
            let mut t = &c * fact(k as u64) * sign((k - l) as i64) / fact(l as u64);
            for _ in 0..(k - l) {
                t /= &s;
            }
            a[l] += t;
        }
    }
    if is_integer(&hit) && !hit.is_negative() && hit <= int(n as i64) {
        let h = hit.to_integer().to_u64().unwrap();
        let top = sign(alpha.to_integer().to_i64().unwrap() + 1) / (fact(h) * fact(n as u64 - h)) / int(k as i64 + 1);
        a[k + 1] += top;
    }
    a
}

pub fn finite_part_primitive(alpha: &Rational, k: u32, n: u32, order: usize) -> LogExpSeries {
    let e = alpha + int(n as i64 + 1);
    let terms = finite_part_coeffs(alpha, k, n)
        .into_iter()
        .enumerate()
        .map(|(l, c)| LogExpTerm::new(LaurentSeries::monomial(c, 0, order as i64), e.clone(), l as u32, Rational::zero()))
        .collect();
    LogExpSeries::new(terms, Point::Zero)
}

/// `L(x^beta (ln x)^k) = z^{beta' } ...` via `z^{n+1} L(F_n)` with `n = -beta-1`.
fn negative_monomial(beta: &Rational, k: u32) -> LaplaceResult {
    let n = (-beta - Rational::one()).to_integer().to_u32().unwrap();
    let a = finite_part_coeffs(beta, k, n);
    let mut log_terms: Vec<Vec<(GammaVector, LaurentSeries)>> = vec![vec![]; k as usize + 2];
    // x^0 (ln x)^l transforms to z^{-1} sum_j c_j(0, l) (ln z)^j
    for (l, al) in a.iter().enumerate() {
        if al.is_zero() {
            continue;
        }
        for j in 0..=l {
            let g = monomial_coeff(&Rational::zero(), l as u32, j as u32).scale(al);
            log_terms[j].push((g, LaurentSeries::one(MONO_PREC)));
        }
    }
    LaplaceResult {
        alpha: beta.clone(),
        k,
        prefactor_exponent: -beta - Rational::one(),
        branch: Branch::NegativeInteger,
        log_terms,
    }
}

pub fn laplace_monomial(alpha: &Rational, k: u32) -> LaplaceResult {
    if is_neg_int(alpha) {
        return negative_monomial(alpha, k);
    }
    let log_terms = (0..=k).map(|m| vec![(monomial_coeff(alpha, k, m), LaurentSeries::one(MONO_PREC))]).collect();
    LaplaceResult {
        alpha: alpha.clone(),
        k,
        prefactor_exponent: -alpha - Rational::one(),
        branch: Branch::Generic,
        log_terms,
    }
}

/// `r[n][j][l]` with `rho_{alpha+n,j} = sum_l rho_{alpha,l} r[n][j][l]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportTable {
    pub alpha: Rational,
    pub k: u32,
    pub values: Vec<Vec<Vec<Rational>>>,
}

impl TransportTable {
    pub fn get(&self, n: usize, j: usize, l: usize) -> &Rational {
        &self.values[n][j][l]
    }
}

/// Iterates `rho_{b+1,j} = rho_{b,j} - (j+1)/(b+1) rho_{b,j+1}`.
pub fn transport(alpha: &Rational, k: u32, n_max: usize) -> Result<TransportTable> {
    let k = k as usize;
    let mut layer: Vec<Vec<Rational>> =
        (0..=k).map(|j| (0..=k).map(|l| if j == l { Rational::one() } else { Rational::zero() }).collect()).collect();
    let mut values = vec![layer.clone()];
    for i in 0..n_max {
        let d = alpha + int(i as i64 + 1);
        if d.is_zero() {
            return Err(Error::Pole { shift: i });
        }
        let mut next = layer.clone();
        for j in 0..k {
            let f = int(j as i64 + 1) / &d;
            for l in 0..=k {
                next[j][l] = &layer[j][l] - &f * &layer[j + 1][l];
            }
        }
        layer = next;
        values.push(layer.clone());
    }
    Ok(TransportTable { alpha: alpha.clone(), k: k as u32, values })
}

/// `L(f x^alpha (ln x)^k)` for a power series `f`.
pub fn laplace_series(f: &LaurentSeries, alpha: &Rational, k: u32, order: usize) -> Result<LaplaceResult> {
    let f = f.truncate(order as i64).normalized();
    if f.start() < 0 && !f.is_zero() {
        return Err(Error::Malformed("laplace_series needs a power series".into()));
    }
    let p = f.prec().min(order as i64).max(0) as usize;
    let a = |n: usize| f.coeff(n as i64).unwrap_or_else(Rational::zero);
    if is_neg_int(alpha) {
        let nn = (-alpha).to_integer().to_usize().unwrap();
        let pre = -alpha - Rational::one();
        let mut log_terms: Vec<Vec<(GammaVector, LaurentSeries)>> = vec![vec![]; k as usize + 2];
        for n in 0..nn.min(p) {
            let an = a(n);
            if an.is_zero() {
                continue;
            }
            let mono = negative_monomial(&(alpha + int(n as i64)), k);
            for (j, pairs) in mono.log_terms.into_iter().enumerate() {
                for (g, _) in pairs {
                    let s = LaurentSeries::monomial(an.clone(), n as i64, p as i64);
                    log_terms[j].push((g, s));
                }
            }
        }
        if p > nn {
            let g = LaurentSeries::new(0, (nn..p).map(a).collect(), (p - nn) as i64);
            let sub = laplace_series(&g, &Rational::zero(), k, p - nn)?;
            for (j, pairs) in sub.log_terms.into_iter().enumerate() {
                for (gv, s) in pairs {
                    log_terms[j].push((gv, s.shift(nn as i64)));
                }
            }
        }
        for v in log_terms.iter_mut() {
            for (_, s) in v.iter_mut() {
                *s = s.truncate(p as i64);
            }
        }
        return Ok(LaplaceResult { alpha: alpha.clone(), k, prefactor_exponent: pre, branch: Branch::NegativeInteger, log_terms });
    }
    let table = transport(alpha, k, p.saturating_sub(1))?;
    let zero_alpha = alpha.is_zero();
    // (alpha)_{n+1} = Gamma(alpha+n+1)/Gamma(alpha); n! when alpha = 0
    let mut weights: Vec<Rational> = Vec::with_capacity(p);
    let mut w = if zero_alpha { Rational::one() } else { alpha.clone() };
    for n in 0..p {
        if n > 0 {
            w *= if zero_alpha { int(n as i64) } else { alpha + int(n as i64) };
        }
        weights.push(w.clone());
    }
    let ks = k as usize;
    let mut log_terms = vec![vec![]; ks + 1];
    for (j, slot) in log_terms.iter_mut().enumerate() {
        for l in j..=ks {
            let mut kl = monomial_coeff(alpha, k, l as u32);
            if !zero_alpha {
                kl = kl.scale(&alpha.recip());
            }
            let c = (0..p).map(|n| a(n) * &weights[n] * table.get(n, j, l)).collect();
            slot.push((kl, LaurentSeries::new(0, c, p as i64)));
        }
    }
    Ok(LaplaceResult { alpha: alpha.clone(), k, prefactor_exponent: -alpha - Rational::one(), branch: Branch::Generic, log_terms })
}

/// Term-wise transform of a logarithmic series at zero.
pub fn laplace_logseries(z: &LogExpSeries, order: usize) -> Result<Vec<LaplaceResult>> {
    if z.chart != Point::Zero {
        return Err(Error::UnsupportedTerm("input must live on the chart at zero".into()));
    }
    let mut out = vec![];
    for t in &z.terms {
        if !t.delta.is_zero() {
            return Err(Error::UnsupportedTerm(format!("exponential factor exp({}/x)", t.delta)));
        }
        let s = t.series.normalized();
        if s.is_zero() {
            continue;
        }
        let v = s.start();
        let alpha = &t.alpha + int(v);
        let f = s.shift(-v);
        let n = (order as i64).min(f.prec()).max(0) as usize;
        out.push(laplace_series(&f, &alpha, t.k, n)?);
    }
    Ok(out)
}

/// Projection of a term-wise transform on one constant, summed.
pub fn component_sum(parts: &[LaplaceResult], key: &Constant) -> Option<LogExpSeries> {
    let mut acc: Option<LogExpSeries> = None;
    for p in parts {
        let c = p.component(key);
        acc = Some(match acc {
            None => c,
            Some(a) => a.add(&c),
        });
    }
    acc
}

pub fn all_constants(parts: &[LaplaceResult]) -> Vec<Constant> {
    let mut keys: Vec<Constant> = parts.iter().flat_map(|p| p.constants()).collect();
    keys.sort();
    keys.dedup();
    keys
}
