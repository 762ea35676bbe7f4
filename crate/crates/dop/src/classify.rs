//! Structural checks for E-operators and for the dual G-operator shape.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{frac, int, LaurentSeries, Point, Rational};
use crate::exec::{self, Exec};
use crate::local::{chart_op, exp_parts, exponents, regular_part_solutions, twist, LocalData};
use crate::padic::{digit_slack, series_radius, Place, PlaceReport, RadiusExponent, MARGIN_TOL};
use crate::polygon::nr_polygon;
use crate::weyl::{DiffOp, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Unsupported,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unsupported => "unsupported",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassVerdict {
    Candidate,
    Rejected(String),
    Inconclusive(String),
}

impl ClassVerdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            ClassVerdict::Candidate => 0,
            ClassVerdict::Rejected(_) => 2,
            ClassVerdict::Inconclusive(_) => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClassVerdict::Candidate => "candidate-E-operator",
            ClassVerdict::Rejected(_) => "rejected",
            ClassVerdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            ClassVerdict::Candidate => None,
            ClassVerdict::Rejected(r) | ClassVerdict::Inconclusive(r) => Some(r),
        }
    }
}

/// Margins of one formal series factor at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorMargins {
    pub delta: Rational,
    pub exponent: Rational,
    pub places: Vec<PlaceReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub condition1: Status,
    pub max_degree: usize,
    pub condition2: Status,
    pub offending_slopes: Vec<Rational>,
    pub vertical_side: bool,
    pub condition3_structural: Status,
    pub structural_note: String,
    pub infinity: Option<LocalData>,
    /// Primes dividing denominators of the monic operator or its local data.
    pub bad_primes: Vec<u64>,
    pub condition3_arithmetic: Vec<FactorMargins>,
    pub arithmetic_consistent: bool,
    pub verdict: ClassVerdict,
}

fn prime_factors(n: &BigInt, out: &mut BTreeSet<u64>, cap: u64) {
    let mut m = n.clone();
    for p in 2..=cap {
        let bp = BigInt::from(p);
        if (&m % &bp).is_zero() {
            out.insert(p);
            while (&m % &bp).is_zero() {
                m /= &bp;
            }
        }
    }
}

fn bad_primes(psi: &DiffOp, data: &LocalData, cap: u64) -> Vec<u64> {
    let mut out = BTreeSet::new();
    let mut qs: Vec<Rational> = data.exponents.clone();
    qs.extend(data.delta_parts.iter().flat_map(|d| std::iter::once(d.delta.clone()).chain(d.exponent.clone())));
    if let Some(lead) = psi.leading() {
        let l = lead.lead().cloned().unwrap_or_else(Rational::zero);
        for c in psi.coeffs() {
            qs.extend(c.coeffs().iter().map(|a| a / &l));
        }
        // the other coefficients of the leading polynomial are singular points
        qs.extend(lead.coeffs().iter().filter(|a| !a.is_zero()).map(|a| &l / a));
    }
    for q in qs {
        if !q.is_zero() {
            prime_factors(q.denom(), &mut out, cap);
        }
    }
    out.into_iter().collect()
}

/// Formal series factors `y(t)` of the rank-one and horizontal pieces at infinity.
fn series_factors(psi: &DiffOp, data: &LocalData, order: usize) -> Vec<(Rational, Rational, LaurentSeries)> {
    let chart = chart_op(psi, Point::Infinity);
    let mut out = vec![];
    for part in &data.delta_parts {
        let op = if part.delta.is_zero() { chart.clone() } else { twist(&chart, &part.delta) };
        if !part.delta.is_zero() && part.exponent.is_none() {
            continue;
        }
        let Ok(basis) = regular_part_solutions(&op, Point::Infinity, order) else { continue };
        for (e, rho) in basis.entries.iter().zip(basis.exponents.iter()) {
            for t in e.nonzero_terms() {
                let s = t.series.normalized();
                let v = s.start();
                out.push((part.delta.clone(), rho.clone(), s.shift(-v)));
            }
        }
    }
    out
}

pub fn check_e_conditions(psi: &DiffOp, places: &[Place], order: usize) -> Result<ClassReport> {
    if psi.is_zero() {
        return Err(Error::Malformed("zero operator".into()));
    }
    let max_degree = psi.max_degree().unwrap_or(0);
    let condition1 = if max_degree >= 1 { Status::Pass } else { Status::Fail };
    let nr = nr_polygon(psi)?;
    let allowed = [int(-1), int(0)];
    let offending_slopes: Vec<Rational> = nr.slope_set().into_iter().filter(|s| !allowed.contains(s)).collect();
    let vertical_side = nr.has_vertical_side();
    let condition2 = if offending_slopes.is_empty() && !vertical_side { Status::Pass } else { Status::Fail };

    let (condition3_structural, structural_note, infinity) = match exp_parts(psi, Point::Infinity) {
        Err(Error::UnsupportedSlope(s)) => (Status::Unsupported, format!("unsupported slope {s}"), None),
        Err(e) => return Err(e),
        Ok(d) => {
            if !d.exponent_tokens.is_empty() {
                (Status::Fail, format!("irrational exponents {}", d.exponent_tokens.join(", ")), Some(d))
            } else if !d.delta_tokens.is_empty() {
                (Status::Unsupported, format!("irrational exponential parts {}", d.delta_tokens.join(", ")), Some(d))
            } else if d.delta_parts.iter().any(|p| !p.delta.is_zero() && p.exponent.is_none()) {
                (Status::Unsupported, "repeated exponential part".into(), Some(d))
            } else {
                (Status::Pass, "rational exponents and exponential parts".into(), Some(d))
            }
        }
    };

    let mut bad = vec![];
    let mut arithmetic = vec![];
    if let Some(d) = &infinity {
        let cap = places.iter().map(|p| p.p()).max().unwrap_or(2);
        bad = bad_primes(psi, d, cap);
        if condition3_structural == Status::Pass {
            let factors = series_factors(psi, d, order);
            arithmetic = exec::map(Exec::default(), &factors, |(delta, rho, y)| FactorMargins {
                delta: delta.clone(),
                exponent: rho.clone(),
                places: places
                    .iter()
                    .map(|&pl| {
                        let s = series_radius(y, pl, order.saturating_sub(1), Exec::Sequential)
                            .unwrap_or(RadiusExponent::Infinite);
                        let target = pl.pi_exponent();
                        let margin = s.finite().map(|s| s - &target);
                        // finite-N dips of v_p(n!)/n are bounded by the digit-sum slack
                        let tol = MARGIN_TOL + digit_slack(pl.p(), order / 2);
                        let pass = margin.as_ref().map(|m| crate::exact::to_f64(m) >= -tol).unwrap_or(true);
                        PlaceReport {
                            place: pl,
                            s_estimate: s,
                            target,
                            margin,
                            n: order.saturating_sub(1),
                            window: order / 2,
                            pass,
                        }
                    })
                    .collect(),
            });
        }
    }
    let arithmetic_consistent = arithmetic
        .iter()
        .all(|f| f.places.iter().all(|r| r.pass || bad.contains(&r.place.p())));

    let verdict = if condition1 == Status::Fail {
        ClassVerdict::Rejected("condition 1: all coefficients are constant".into())
    } else if condition2 == Status::Fail {
        let mut parts: Vec<String> = offending_slopes.iter().map(|s| format!("slope {s} not in {{-1,0}}")).collect();
        if vertical_side {
            parts.push("vertical side".into());
        }
        ClassVerdict::Rejected(format!("condition 2: {}", parts.join(", ")))
    } else if condition3_structural == Status::Fail {
        ClassVerdict::Rejected(format!("condition 3: {structural_note}"))
    } else if condition3_structural == Status::Unsupported {
        ClassVerdict::Inconclusive(format!("condition 3: {structural_note}"))
    } else if !arithmetic_consistent {
        ClassVerdict::Inconclusive("condition 3: radius margins fail at a good sampled place".into())
    } else {
        ClassVerdict::Candidate
    };

    Ok(ClassReport {
        condition1,
        max_degree,
        condition2,
        offending_slopes,
        vertical_side,
        condition3_structural,
        structural_note,
        infinity,
        bad_primes: bad,
        condition3_arithmetic: arithmetic,
        arithmetic_consistent,
        verdict,
    })
}

impl ClassReport {
    pub fn to_json(&self) -> Value {
        json!({
            "condition1": {"status": self.condition1.as_str(), "max_degree": self.max_degree},
            "condition2": {
                "status": self.condition2.as_str(),
                "offending_slopes": self.offending_slopes.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                "vertical_side": self.vertical_side,
            },
            "condition3_structural": {
                "status": self.condition3_structural.as_str(),
                "note": self.structural_note,
                "infinity": self.infinity.as_ref().map(|d| d.to_json()),
            },
            "condition3_arithmetic": {
                "bad_primes": self.bad_primes,
                "consistent": self.arithmetic_consistent,
                "factors": self.condition3_arithmetic.iter().map(|f| json!({
                    "delta": f.delta.to_string(),
                    "exponent": f.exponent.to_string(),
                    "places": f.places.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            },
            "verdict": self.verdict.label(),
            "reason": self.verdict.reason(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GDualReport {
    pub pass: bool,
    pub slopes: Vec<Rational>,
    pub zero: LocalData,
    pub infinity: LocalData,
    pub reasons: Vec<String>,
}

impl GDualReport {
    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.pass,
            "slopes": self.slopes.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "zero": self.zero.to_json(),
            "infinity": self.infinity.to_json(),
            "reasons": self.reasons,
        })
    }
}

/// Slopes only 0 and vertical, regular at 0 and infinity with rational exponents.
pub fn g_dual_report(phi: &DiffOp) -> Result<GDualReport> {
    if phi.is_zero() {
        return Err(Error::Malformed("zero operator".into()));
    }
    let nr = nr_polygon(phi)?;
    let zero = exponents(phi, Point::Zero)?;
    let infinity = exponents(phi, Point::Infinity)?;
    let mut reasons = vec![];
    for s in nr.slope_set() {
        if !s.is_zero() {
            reasons.push(format!("slope {s}"));
        }
    }
    for d in [&zero, &infinity] {
        if !d.regular {
            reasons.push(format!("irregular at {}", d.point.name()));
        }
        if !d.exponent_tokens.is_empty() {
            reasons.push(format!("irrational exponents at {}", d.point.name()));
        }
    }
    Ok(GDualReport { pass: reasons.is_empty(), slopes: nr.slope_set(), zero, infinity, reasons })
}

fn congruent(a: &Rational, b: &Rational) -> bool {
    frac(&(a - b)).is_zero() || frac(&(a + b)).is_zero()
}

/// Exponents in `alphas` without a partner `+-gamma_j mod 1`.
pub fn compatibility_violations(alphas: &[Rational], gammas: &[Rational]) -> Vec<Rational> {
    alphas.iter().filter(|a| !gammas.iter().any(|g| congruent(a, g))).cloned().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub alphas: Vec<Rational>,
    pub gammas: Vec<Rational>,
    pub violations: Vec<Rational>,
}

impl CompatibilityReport {
    pub fn compatible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let st = |v: &[Rational]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>();
        json!({
            "alphas": st(&self.alphas),
            "gammas": st(&self.gammas),
            "violations": st(&self.violations),
            "compatible": self.compatible(),
        })
    }
}

/// Exponents of the inverse transform at 0 against the exponents of `psi` at infinity.
pub fn exponent_compatibility(psi: &DiffOp) -> Result<CompatibilityReport> {
    let phi = psi.fourier(Direction::Inverse);
    let at0 = exponents(&phi, Point::Zero)?;
    if !at0.regular {
        return Err(Error::WrongRegularity("inverse transform is irregular at zero".into()));
    }
    if !at0.exponent_tokens.is_empty() {
        return Err(Error::UnsupportedExponent(at0.exponent_tokens.join(", ")));
    }
    let inf = exp_parts(psi, Point::Infinity)?;
    if !inf.all_rational() {
        return Err(Error::UnsupportedExponent("irrational data at infinity".into()));
    }
    let mut gammas = inf.exponents.clone();
    gammas.extend(inf.delta_parts.iter().filter_map(|d| d.exponent.clone()));
    let violations = compatibility_violations(&at0.exponents, &gammas);
    Ok(CompatibilityReport { alphas: at0.exponents, gammas, violations })
}

/// Check of many operators at once.
pub fn classify_batch(ops: &[DiffOp], places: &[Place], order: usize, exec: Exec) -> Vec<Result<ClassReport>> {
    exec::map(exec, ops, |op| check_e_conditions(op, places, order))
}

pub fn places_upto(cap: u64) -> Vec<Place> {
    (2..=cap).filter_map(|p| Place::new(p).ok()).collect()
}

pub fn max_place(places: &[Place]) -> u64 {
    places.iter().map(|p| p.p()).max().unwrap_or(0).to_u64().unwrap_or(0)
}
