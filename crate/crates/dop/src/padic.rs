//! p-adic valuations and coefficient growth.
//!
//! Radii are kept on the exponent scale: `r = p^s` with
//! `s = liminf v_p(a_n)/n`, so `pi_v = p^{-1/(p-1)}` sits at `s = -1/(p-1)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{big, int, is_integer, rat, to_f64, LaurentSeries, Rational};
use crate::exec::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Place {
    p: u64,
}

impl Place {
    pub fn new(p: u64) -> Result<Place> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::Malformed(format!("{p} is not prime")));
        }
        Ok(Place { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `1/(p-1)`, the exponent `s` of `pi_v^{-1}`.
    pub fn pi_exponent(&self) -> Rational {
        rat(1, self.p as i64 - 1)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

pub fn default_places() -> Vec<Place> {
    [2, 3, 5, 7, 11, 13].iter().map(|&p| Place { p }).collect()
}

pub fn parse_places(text: &str) -> Result<Vec<Place>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let p: u64 = s.trim().parse().map_err(|_| Error::Malformed(format!("bad place '{s}'")))?;
            Place::new(p)
        })
        .collect()
}

/// `v_p(n)` for an integer, `None` for zero.
pub fn valuation_int(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    // square up p^(2^i) while it divides, then descend
    let mut powers = vec![BigInt::from(p)];
    let mut m = n.abs();
    loop {
        let last = powers.last().unwrap();
        if last.bits() * 2 > m.bits() + 1 {
            break;
        }
        let next = last * last;
        if !m.is_multiple_of(&next) {
            break;
        }
        powers.push(next);
    }
    let mut v = 0i64;
    for (i, q) in powers.iter().enumerate().rev() {
        loop {
            let (d, r) = m.div_rem(q);
            if !r.is_zero() {
                break;
            }
            m = d;
            v += 1 << i;
        }
    }
    Some(v)
}

pub fn valuation(q: &Rational, place: Place) -> Option<i64> {
    let a = valuation_int(q.numer(), place.p)?;
    let b = valuation_int(q.denom(), place.p).unwrap_or(0);
    Some(a - b)
}

/// `v_p(n!) = (n - digitsum_p(n))/(p-1)`.
pub fn legendre(n: u64, p: u64) -> u64 {
    let mut s = 0;
    let mut m = n;
    while m > 0 {
        s += m % p;
        m /= p;
    }
    (n - s) / (p - 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationProfile {
    pub place: Place,
    pub values: Vec<Option<i64>>,
}

impl ValuationProfile {
    pub fn from_coeffs(coeffs: &[Rational], place: Place, exec: Exec) -> ValuationProfile {
        ValuationProfile { place, values: exec::map(exec, coeffs, |q| valuation(q, place)) }
    }

    /// `v_p(a_n)` for `n = 0..=n_max` of a power series.
    pub fn from_series(f: &LaurentSeries, place: Place, n_max: usize, exec: Exec) -> ValuationProfile {
        let c: Vec<Rational> = (0..=n_max as i64).map(|n| f.coeff(n).unwrap_or_else(Rational::zero)).collect();
        ValuationProfile::from_coeffs(&c, place, exec)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Default tail window: the second half.
    pub fn default_window(&self) -> usize {
        (self.len() / 2).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RadiusExponent {
    Finite(Rational),
    Infinite,
}

impl RadiusExponent {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            RadiusExponent::Finite(s) => Some(s),
            RadiusExponent::Infinite => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            RadiusExponent::Finite(s) => to_f64(s),
            RadiusExponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for RadiusExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusExponent::Finite(s) => write!(f, "{s}"),
            RadiusExponent::Infinite => write!(f, "inf"),
        }
    }
}

/// `min v_p(a_n)/n` over the last `window` indices with `n >= 1`.
pub fn radius_estimate(profile: &ValuationProfile, window: usize) -> Result<RadiusExponent> {
    if window > profile.len() {
        return Err(Error::Malformed(format!("window {window} exceeds profile length {}", profile.len())));
    }
    let lo = (profile.len() - window).max(1);
    let best = (lo..profile.len())
        .filter_map(|n| profile.values[n].map(|v| rat(v, n as i64)))
        .min();
    Ok(best.map(RadiusExponent::Finite).unwrap_or(RadiusExponent::Infinite))
}

pub fn series_radius(f: &LaurentSeries, place: Place, n_max: usize, exec: Exec) -> Result<RadiusExponent> {
    let prof = ValuationProfile::from_series(f, place, n_max, exec);
    radius_estimate(&prof, prof.default_window())
}

#[derive(Clone, Debug, PartialEq)]
pub enum GrowthKind {
    Factorial,
    Pochhammer(Rational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub kind: GrowthKind,
    pub place: Place,
    pub n: u64,
    /// `|v_p(t_N)/N - 1/(p-1)|`.
    pub deviation: f64,
    /// Max of the same over `N/2..=N`.
    pub window_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GrowthReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": match &self.kind {
                GrowthKind::Factorial => "factorial".to_string(),
                GrowthKind::Pochhammer(a) => format!("pochhammer({a})"),
            },
            "place": self.place.p,
            "N": self.n,
            "deviation": self.deviation,
            "window_deviation": self.window_deviation,
            "tolerance": self.tolerance,
            "pass": self.pass,
        })
    }
}

/// `v_p((alpha)_n)` for `n = 0..=n_max`, summed term by term.
fn pochhammer_valuations(alpha: &Rational, place: Place, n_max: u64) -> Vec<i64> {
    let mut out = vec![0i64];
    let mut acc = 0i64;
    for i in 0..n_max {
        acc += valuation(&(alpha + int(i as i64)), place).expect("hypothesis excludes zero factors");
        out.push(acc);
    }
    out
}

pub fn growth_check(kind: &GrowthKind, place: Place, n: u64, tolerance: f64) -> Result<GrowthReport> {
    let p = place.p;
    let vals: Vec<i64> = match kind {
        GrowthKind::Factorial => (0..=n).map(|m| legendre(m, p) as i64).collect(),
        GrowthKind::Pochhammer(a) => {
            if is_integer(a) && !a.is_positive() {
                return Err(Error::Hypothesis(format!("alpha = {a} must be a positive integer or non-integer")));
            }
            if !is_integer(a) && a.denom().is_multiple_of(&BigInt::from(p)) {
                return Err(Error::Hypothesis(format!("denominator of {a} must be prime to {p}")));
            }
            pochhammer_valuations(a, place, n)
        }
    };
    let target = 1.0 / (p as f64 - 1.0);
    let dev = |m: u64| (vals[m as usize] as f64 / m as f64 - target).abs();
    let deviation = if n == 0 { 0.0 } else { dev(n) };
    let window_deviation = ((n / 2).max(1)..=n).map(dev).fold(0.0, f64::max);
    Ok(GrowthReport {
        kind: kind.clone(),
        place,
        n,
        deviation,
        window_deviation,
        tolerance,
        pass: deviation < tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaceReport {
    pub place: Place,
    pub s_estimate: RadiusExponent,
    pub target: Rational,
    pub margin: Option<Rational>,
    pub n: usize,
    pub window: usize,
    pub pass: bool,
}

impl PlaceReport {
    fn new(place: Place, s: RadiusExponent, target: Rational, n: usize, window: usize, tol: f64) -> PlaceReport {
        let margin = s.finite().map(|s| s - &target);
        let pass = margin.as_ref().map(|m| to_f64(m) >= -tol).unwrap_or(true);
        PlaceReport { place, s_estimate: s, target, margin, n, window, pass }
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "place": self.place.p,
            "s_estimate": self.s_estimate.to_string(),
            "target": self.target.to_string(),
            "margin": self.margin.as_ref().map(|m| m.to_string()).unwrap_or_else(|| "inf".into()),
            "N": self.n,
            "window": self.window,
            "verdict": self.verdict(),
        })
    }
}

/// Legendre remainder bound `2 log_p(n)/n` on `|v_p(n!)/n - 1/(p-1)|`.
pub fn digit_slack(p: u64, n: usize) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    2.0 * (n as f64).ln() / (p as f64).ln() / n as f64
}

/// Tolerance on `s` margins.
pub const MARGIN_TOL: f64 = 0.05;
/// Least-squares slope of `ln|a_n/n!|` against `n ln n` above which growth is
/// super-exponential.
pub const ARCH_SLOPE_MAX: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenReport {
    pub places: Vec<PlaceReport>,
    pub archimedean_slope: f64,
    pub archimedean_pass: bool,
    pub verdict: Verdict,
}

impl ScreenReport {
    pub fn to_json(&self) -> Value {
        json!({
            "places": self.places.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "archimedean": {"slope": self.archimedean_slope, "max": ARCH_SLOPE_MAX, "pass": self.archimedean_pass},
            "verdict": self.verdict.as_str(),
        })
    }
}

/// Tail regression slope of `ln|a_n/n!|` on `n ln n`.
pub fn archimedean_slope(f: &LaurentSeries, n_max: usize) -> f64 {
    let mut lnfact = vec![0.0f64; n_max + 1];
    for n in 1..=n_max {
        lnfact[n] = lnfact[n - 1] + (n as f64).ln();
    }
    let pts: Vec<(f64, f64)> = ((n_max / 2).max(2)..=n_max)
        .filter_map(|n| {
            let a = f.coeff(n as i64)?;
            if a.is_zero() {
                return None;
            }
            Some(((n as f64) * (n as f64).ln(), crate::exact::ln_abs(&a) - lnfact[n]))
        })
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Finite-place screen `min(r_v(f) pi_v, 1) = 1` plus an archimedean
/// `|a_n/n!| <= C^n` check.
pub fn e_screen(f: &LaurentSeries, places: &[Place], n_max: usize, exec: Exec) -> ScreenReport {
    let reports = exec::map(exec, places, |&pl| {
        let prof = ValuationProfile::from_series(f, pl, n_max, Exec::Sequential);
        let w = prof.default_window();
        let s = radius_estimate(&prof, w).expect("window fits");
        PlaceReport::new(pl, s, pl.pi_exponent(), n_max, w, MARGIN_TOL)
    });
    let slope = archimedean_slope(f, n_max);
    let arch = slope <= ARCH_SLOPE_MAX;
    let fails = reports.iter().filter(|r| !r.pass).count();
    let verdict = if !arch || (fails == reports.len() && fails > 0) {
        Verdict::Inconsistent
    } else if fails == 0 {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    };
    ScreenReport { places: reports, archimedean_slope: slope, archimedean_pass: arch, verdict }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberReport {
    pub places: Vec<PlaceReport>,
    pub member: bool,
}

impl MemberReport {
    pub fn to_json(&self) -> Value {
        json!({
            "places": self.places.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "member": self.member,
        })
    }
}

/// `s(y) >= min_b s(b) - s_shift/(p-1)` at each place.
pub fn r_algebra_member(
    y: &LaurentSeries,
    baseline: &[LaurentSeries],
    s_shift: i64,
    places: &[Place],
    n_max: usize,
    exec: Exec,
) -> Result<MemberReport> {
    let reports: Vec<Result<PlaceReport>> = exec::map(exec, places, |&pl| {
        let sy = series_radius(y, pl, n_max, Exec::Sequential)?;
        let mut base: Option<Rational> = None;
        for b in baseline {
            if let RadiusExponent::Finite(s) = series_radius(b, pl, n_max, Exec::Sequential)? {
                base = Some(match base {
                    Some(x) if x <= s => x,
                    _ => s,
                });
            }
        }
        let target = match base {
            Some(b) => b - int(s_shift) * pl.pi_exponent(),
            None => return Ok(PlaceReport::new(pl, sy, Rational::zero(), n_max, n_max / 2, MARGIN_TOL)),
        };
        Ok(PlaceReport::new(pl, sy, target, n_max, (n_max + 1) / 2, MARGIN_TOL))
    });
    let places: Vec<PlaceReport> = reports.into_iter().collect::<Result<_>>()?;
    let member = places.iter().all(|r| r.pass);
    Ok(MemberReport { places, member })
}

/// Coefficient sequences from CSV `n,numerator,denominator` with a header.
pub fn series_from_csv(text: &str) -> Result<LaurentSeries> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Malformed(format!("csv: {e}")))?.clone();
    if headers.len() != 3 {
        return Err(Error::Malformed("csv header must be n,numerator,denominator".into()));
    }
    let mut entries: Vec<(usize, Rational)> = vec![];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Malformed(format!("csv: {e}")))?;
        let get = |i: usize| -> Result<BigInt> {
            rec.get(i)
                .unwrap_or("")
                .parse::<BigInt>()
                .map_err(|_| Error::Malformed(format!("csv field '{}'", rec.get(i).unwrap_or(""))))
        };
        let n = get(0)?.to_usize().ok_or_else(|| Error::Malformed("csv index must be >= 0".into()))?;
        let d = get(2)?;
        if d.is_zero() {
            return Err(Error::Malformed("csv denominator is zero".into()));
        }
        entries.push((n, Rational::new(get(1)?, d)));
    }
    let len = entries.iter().map(|(n, _)| n + 1).max().unwrap_or(0);
    let mut c = vec![Rational::zero(); len];
    for (n, q) in entries {
        c[n] = q;
    }
    Ok(LaurentSeries::new(0, c, len as i64))
}

/// Builtin test sequences.
pub fn builtin_series(name: &str, n: usize) -> Option<LaurentSeries> {
    let mut c = Vec::with_capacity(n + 1);
    let mut fact = BigInt::one();
    for m in 0..=n {
        if m > 0 {
            fact *= m;
        }
        let f = big(&fact);
        c.push(match name {
            "geometric" => Rational::one(),
            "euler" => if m % 2 == 0 { f } else { -f },
            "factorial" => f,
            "factorial-squared" => &f * &f,
            "exp" => f.recip(),
            _ => return None,
        });
    }
    Some(LaurentSeries::new(0, c, n as i64 + 1))
}
