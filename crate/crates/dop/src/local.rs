//! Local data at 0 and infinity: companion systems, gauge transforms,
//! exponents, formal solutions and exponential parts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{big, factorial, frac, int, is_integer, LaurentSeries, Point, Poly, RatFun, Rational};
use crate::polygon::local_newton;
use crate::weyl::{DiffOp, LogExpSeries, LogExpTerm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: Vec<Vec<RatFun>>,
}

impl RatMatrix {
    pub fn new(rows: Vec<Vec<RatFun>>) -> Result<RatMatrix> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("matrix must be square and nonempty".into()));
        }
        Ok(RatMatrix { rows })
    }

    pub fn zero(n: usize) -> RatMatrix {
        RatMatrix { rows: vec![vec![RatFun::zero(); n]; n] }
    }

    pub fn identity(n: usize) -> RatMatrix {
        let mut m = RatMatrix::zero(n);
        for i in 0..n {
            m.rows[i][i] = RatFun::one();
        }
        m
    }

    /// `I + f e_ij`.
    pub fn elementary(n: usize, i: usize, j: usize, f: RatFun) -> RatMatrix {
        let mut m = RatMatrix::identity(n);
        m.rows[i][j] = &m.rows[i][j] + &f;
        m
    }

    pub fn diag(d: Vec<RatFun>) -> RatMatrix {
        let mut m = RatMatrix::zero(d.len());
        for (i, f) in d.into_iter().enumerate() {
            m.rows[i][i] = f;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &RatFun {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<RatFun>] {
        &self.rows
    }

    pub fn transpose(&self) -> RatMatrix {
        let n = self.dim();
        RatMatrix { rows: (0..n).map(|i| (0..n).map(|j| self.rows[j][i].clone()).collect()).collect() }
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        let n = self.dim();
        let mut out = RatMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                if self.rows[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !o.rows[k][j].is_zero() {
                        out.rows[i][j] = &out.rows[i][j] + &(&self.rows[i][k] * &o.rows[k][j]);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &RatMatrix) -> RatMatrix {
        let rows = self
            .rows
            .iter()
            .zip(&o.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        RatMatrix { rows }
    }

    pub fn neg(&self) -> RatMatrix {
        RatMatrix { rows: self.rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect() }
    }

    pub fn derivative(&self) -> RatMatrix {
        RatMatrix { rows: self.rows.iter().map(|r| r.iter().map(|x| x.derivative()).collect()).collect() }
    }

    pub fn inverse(&self) -> Result<RatMatrix> {
        let n = self.dim();
        let mut a = self.rows.clone();
        let mut inv = RatMatrix::identity(n).rows;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or_else(|| Error::NotInvertible("singular matrix".into()))?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let s = a[col][col].inv()?;
            for j in 0..n {
                a[col][j] = &a[col][j] * &s;
                inv[col][j] = &inv[col][j] * &s;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] = &a[r][j] - &t;
                    let t = &f * &inv[col][j];
                    inv[r][j] = &inv[r][j] - &t;
                }
            }
        }
        Ok(RatMatrix { rows: inv })
    }

    pub fn to_json(&self) -> Value {
        json!(self.rows.iter().map(|r| r.iter().map(|f| f.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
    }
}

/// Superdiagonal ones, last row `-a_i / a_mu`.
pub fn companion(phi: &DiffOp) -> Result<RatMatrix> {
    let mu = match phi.order() {
        Some(m) if m >= 1 => m,
        _ => return Err(Error::Malformed("companion matrix needs order >= 1".into())),
    };
    let lead = phi.coeff(mu);
    let mut m = RatMatrix::zero(mu);
    for i in 0..mu - 1 {
        m.rows[i][i + 1] = RatFun::one();
    }
    for i in 0..mu {
        m.rows[mu - 1][i] = -&RatFun::new(phi.coeff(i), lead.clone())?;
    }
    Ok(m)
}

/// `Y G Y^-1 + Y' Y^-1`.
pub fn gauge(y: &RatMatrix, g: &RatMatrix) -> Result<RatMatrix> {
    let yi = y.inverse()?;
    Ok(y.mul(g).mul(&yi).add(&y.derivative().mul(&yi)))
}

/// `theta(theta - 1)...(theta - i + 1)`.
fn falling(i: usize) -> Poly {
    let mut p = Poly::one();
    for t in 0..i {
        p = &p * &Poly::from_coeffs(vec![int(-(t as i64)), Rational::one()]);
    }
    p
}

/// `phi = sum_m x^m P_m(theta)`.
pub fn theta_form(phi: &DiffOp) -> BTreeMap<i64, Poly> {
    let mut out: BTreeMap<i64, Poly> = BTreeMap::new();
    for (i, j, a) in phi.support() {
        let m = j as i64 - i as i64;
        let e = out.entry(m).or_default();
        *e = &*e + &falling(i).scale(&a);
    }
    out.retain(|_, p| !p.is_zero());
    out
}

pub fn chart_op(phi: &DiffOp, at: Point) -> DiffOp {
    match at {
        Point::Zero => phi.clone(),
        Point::Infinity => phi.invert_chart().0,
    }
}

/// Lowest x-order `m0` of the theta form and its coefficient.
pub fn indicial(phi: &DiffOp, at: Point) -> Result<(i64, Poly)> {
    let tf = theta_form(&chart_op(phi, at));
    tf.into_iter().next().ok_or_else(|| Error::Malformed("zero operator".into()))
}

const TRIAL_LIMIT: u64 = 10_000_000;

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut factors: Vec<(BigInt, u32)> = vec![];
    let mut d: u64 = 2;
    while BigInt::from(d) * BigInt::from(d) <= n && d < TRIAL_LIMIT {
        let bd = BigInt::from(d);
        let mut e = 0;
        while (&n % &bd).is_zero() {
            n /= &bd;
            e += 1;
        }
        if e > 0 {
            factors.push((bd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        factors.push((n, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = vec![];
        for a in &out {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(a * &pk);
                pk *= &p;
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Rational roots with multiplicity and the remaining factor.
pub fn rational_roots(p: &Poly) -> (Vec<(Rational, u32)>, Poly) {
    let mut out: Vec<(Rational, u32)> = vec![];
    if p.is_zero() {
        return (out, Poly::zero());
    }
    let mut rest = p.monic();
    let z = rest.ord().unwrap_or(0);
    if z > 0 {
        out.push((Rational::zero(), z as u32));
        rest = rest.unshift(z);
    }
    if rest.deg().unwrap_or(0) > 0 {
        let ints = rest.primitive_ints();
        let nums = divisors(&ints[0]);
        let dens = divisors(ints.last().unwrap());
        let mut cands: Vec<Rational> = vec![];
        for a in &nums {
            for b in &dens {
                let q = Rational::new(a.clone(), b.clone());
                cands.push(q.clone());
                cands.push(-q);
            }
        }
        cands.sort();
        cands.dedup();
        for c in cands {
            let lin = Poly::from_coeffs(vec![-c.clone(), Rational::one()]);
            let mut m = 0;
            while rest.deg().unwrap_or(0) > 0 && rest.eval(&c).is_zero() {
                rest = rest.div_rem(&lin).0;
                m += 1;
            }
            if m > 0 {
                out.push((c, m));
            }
        }
    }
    out.sort();
    (out, rest.monic())
}

fn root_token(p: &Poly, var: &str) -> Option<String> {
    if p.deg().unwrap_or(0) == 0 {
        None
    } else {
        Some(format!("RootOf({})", p.monic().fmt_var(var)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaPart {
    pub delta: Rational,
    pub mult: u64,
    /// Exponent of the rank-one factor `exp(delta/t) t^rho` when `mult == 1`.
    pub exponent: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalData {
    pub point: Point,
    pub exponents: Vec<Rational>,
    pub exponent_tokens: Vec<String>,
    pub delta_parts: Vec<DeltaPart>,
    pub delta_tokens: Vec<String>,
    pub regular: bool,
}

impl LocalData {
    pub fn all_rational(&self) -> bool {
        self.exponent_tokens.is_empty()
            && self.delta_tokens.is_empty()
            && self.delta_parts.iter().all(|d| d.delta.is_zero() || d.exponent.is_some())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "point": self.point.name(),
            "regular": self.regular,
            "exponents": self.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "exponent_tokens": self.exponent_tokens,
            "delta_parts": self.delta_parts.iter().map(|d| json!({
                "delta": d.delta.to_string(),
                "mult": d.mult,
                "exponent": d.exponent.as_ref().map(|e| e.to_string()),
            })).collect::<Vec<_>>(),
            "delta_tokens": self.delta_tokens,
        })
    }
}

fn expand_roots(roots: &[(Rational, u32)]) -> Vec<Rational> {
    roots.iter().flat_map(|(r, m)| std::iter::repeat(r.clone()).take(*m as usize)).collect()
}

/// Exponents at a point; irregular points report their regular part plus
/// exponential data.
pub fn exponents(phi: &DiffOp, at: Point) -> Result<LocalData> {
    let nl = local_newton(phi, at)?;
    if !nl.is_regular() {
        return match exp_parts(phi, at) {
            Err(Error::UnsupportedSlope(s)) => {
                let (_, p) = indicial(phi, at)?;
                let (roots, rest) = rational_roots(&p);
                Ok(LocalData {
                    point: at,
                    exponents: expand_roots(&roots),
                    exponent_tokens: root_token(&rest, "t").into_iter().collect(),
                    delta_parts: vec![],
                    delta_tokens: vec![format!("unsupported slope: {s}")],
                    regular: false,
                })
            }
            r => r,
        };
    }
    let (_, p) = indicial(phi, at)?;
    let (roots, rest) = rational_roots(&p);
    let mu = phi.order().unwrap_or(0) as u64;
    Ok(LocalData {
        point: at,
        exponents: expand_roots(&roots),
        exponent_tokens: root_token(&rest, "t").into_iter().collect(),
        delta_parts: vec![DeltaPart { delta: Rational::zero(), mult: mu, exponent: None }],
        delta_tokens: vec![],
        regular: true,
    })
}

/// `t^{2 mu} exp(-delta/t) psi exp(delta/t)`.
pub fn twist(psi: &DiffOp, delta: &Rational) -> DiffOp {
    let mu = psi.order().unwrap_or(0);
    let mut q = DiffOp::one();
    let mut acc = DiffOp::zero();
    for i in 0..=mu {
        let a = psi.coeff(i);
        if !a.is_zero() {
            acc = &acc + &q.mul_poly(&a.shift(2 * (mu - i)));
        }
        let step = DiffOp::new(vec![
            Poly::from_coeffs(vec![-delta.clone(), int(-2 * i as i64)]),
            Poly::monomial(Rational::one(), 2),
        ]);
        q = step.compose(&q);
    }
    acc
}

pub fn exp_parts(phi: &DiffOp, at: Point) -> Result<LocalData> {
    let nl = local_newton(phi, at)?;
    if let Some((s, _)) = nl.slopes.iter().find(|(s, _)| !s.is_zero() && !s.is_one()) {
        return Err(Error::UnsupportedSlope(format!("{s} at {}", at.name())));
    }
    let psi = chart_op(phi, at);
    let (_, p) = indicial(phi, at)?;
    let (roots, rest) = rational_roots(&p);
    let flat = p.deg().unwrap_or(0) as u64;
    let mut data = LocalData {
        point: at,
        exponents: expand_roots(&roots),
        exponent_tokens: root_token(&rest, "t").into_iter().collect(),
        delta_parts: vec![],
        delta_tokens: vec![],
        regular: true,
    };
    if flat > 0 {
        data.delta_parts.push(DeltaPart { delta: Rational::zero(), mult: flat, exponent: None });
    }
    let hull = &nl.lower_hull;
    for w in hull.windows(2) {
        let ((u0, v0), (u1, v1)) = (w[0], w[1]);
        if v1 - v0 != u1 - u0 {
            continue;
        }
        data.regular = false;
        let mut chi = vec![Rational::zero(); (u1 - u0 + 1) as usize];
        for i in u0..=u1 {
            let j = v0 + (i - u0) + i;
            if j >= 0 {
                chi[(i - u0) as usize] = psi.coeff(i as usize).coeff(j as usize);
            }
        }
        // growth exp(delta/t) has t^2 D acting as -delta
        let chi_delta = Poly::from_coeffs(chi).reflect();
        let (droots, drest) = rational_roots(&chi_delta);
        for (d, m) in droots {
            let exponent = if m == 1 { twist_exponent(&psi, &d) } else { None };
            data.delta_parts.push(DeltaPart { delta: d, mult: m as u64, exponent });
        }
        data.delta_tokens.extend(root_token(&drest, "d"));
    }
    Ok(data)
}

fn twist_exponent(psi: &DiffOp, delta: &Rational) -> Option<Rational> {
    let tw = twist(psi, delta);
    let (_, p) = theta_form(&tw).into_iter().next()?;
    if p.deg() != Some(1) {
        return None;
    }
    Some(-(p.coeff(0) / p.coeff(1)))
}

fn antiderivative(p: &Poly) -> Poly {
    let mut c = vec![Rational::zero()];
    for (t, a) in p.coeffs().iter().enumerate() {
        c.push(a / int(t as i64 + 1));
    }
    Poly::from_coeffs(c)
}

/// `Q(beta + d/dL) g`.
fn apply_shifted(q: &Poly, beta: &Rational, g: &Poly) -> Poly {
    let c = q.taylor_at(beta);
    let mut acc = Poly::zero();
    let mut dg = g.clone();
    for ct in c {
        if dg.is_zero() {
            break;
        }
        if !ct.is_zero() {
            acc = &acc + &dg.scale(&ct);
        }
        dg = dg.derivative();
    }
    acc
}

/// Solves `Q(beta + d/dL) g = r` with no terms below `L^e`, `e` the root
/// multiplicity of `beta`.
fn solve_shifted(q: &Poly, beta: &Rational, r: &Poly) -> (Poly, usize) {
    let c = q.taylor_at(beta);
    let e = c.iter().position(|a| !a.is_zero()).unwrap_or(c.len());
    if r.is_zero() {
        return (Poly::zero(), e);
    }
    let u: Vec<Rational> = c[e..].to_vec();
    let d = r.deg().unwrap_or(0);
    // power-series inverse of U in the nilpotent d/dL
    let mut v = vec![u[0].recip()];
    for n in 1..=d {
        let mut s = Rational::zero();
        for t in 1..=n.min(u.len() - 1) {
            s += &u[t] * &v[n - t];
        }
        v.push(-s * &v[0]);
    }
    let mut h = Poly::zero();
    let mut dr = r.clone();
    for vt in &v {
        h = &h + &dr.scale(vt);
        dr = dr.derivative();
    }
    for _ in 0..e {
        h = antiderivative(&h);
    }
    (h, e)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionBasis {
    pub chart: Point,
    pub exponents: Vec<Rational>,
    pub connection: Vec<Vec<Rational>>,
    pub entries: Vec<LogExpSeries>,
    pub order: usize,
}

fn series_json(s: &LaurentSeries) -> Value {
    let s = s.normalized();
    json!({
        "valuation": s.start(),
        "prec": s.prec(),
        "coeffs": s.stored().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
    })
}

pub fn log_exp_json(s: &LogExpSeries) -> Value {
    json!(s
        .terms
        .iter()
        .map(|t| json!({
            "alpha": t.alpha.to_string(),
            "k": t.k,
            "delta": t.delta.to_string(),
            "series": series_json(&t.series),
        }))
        .collect::<Vec<_>>())
}

impl SolutionBasis {
    pub fn to_json(&self) -> Value {
        json!({
            "chart": self.chart.name(),
            "exponents": self.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "C": self.connection.iter().map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "entries": self.entries.iter().map(|e| json!({"terms": log_exp_json(e)})).collect::<Vec<_>>(),
        })
    }

    /// Rows `D^r y_c` for bases made of plain power series.
    pub fn fundamental_matrix(&self) -> Result<Vec<Vec<LaurentSeries>>> {
        let mut cols = vec![];
        for e in &self.entries {
            let nz = e.nonzero_terms();
            match nz.as_slice() {
                [t] if t.alpha.is_zero() && t.k == 0 && t.delta.is_zero() => cols.push(t.series.clone()),
                _ => return Err(Error::UnsupportedTerm("fundamental matrix needs plain series entries".into())),
            }
        }
        Ok(fundamental_matrix(&cols))
    }
}

pub fn fundamental_matrix(sols: &[LaurentSeries]) -> Vec<Vec<LaurentSeries>> {
    let mu = sols.len();
    let mut rows = vec![sols.to_vec()];
    for r in 1..mu {
        let next = rows[r - 1].iter().map(|s| s.derivative()).collect();
        rows.push(next);
    }
    rows
}

struct Slot {
    n: usize,
    l: usize,
}

fn run_recurrence(q: &[Poly], rho: &Rational, order: usize, seed: &Slot) -> Vec<Poly> {
    let mut g: Vec<Poly> = vec![Poly::zero(); order];
    for n in seed.n..order {
        let mut r = Poly::zero();
        for s in 1..q.len().min(n + 1) {
            if q[s].is_zero() || g[n - s].is_zero() {
                continue;
            }
            let beta = rho + int((n - s) as i64);
            r = &r - &apply_shifted(&q[s], &beta, &g[n - s]);
        }
        let (mut h, _) = solve_shifted(&q[0], &(rho + int(n as i64)), &r);
        if n == seed.n {
            h = &h + &Poly::monomial(Rational::one(), seed.l);
        }
        g[n] = h;
    }
    g
}

/// Formal solutions `sum_n g_n(ln t) t^{rho+n}` at a regular point.
pub fn frobenius_solutions(phi: &DiffOp, at: Point, order: usize) -> Result<SolutionBasis> {
    if !local_newton(phi, at)?.is_regular() {
        return Err(Error::WrongRegularity(format!("operator is irregular at {}", at.name())));
    }
    let psi = chart_op(phi, at);
    regular_part_solutions(&psi, at, order)
}

/// The recurrence solutions from the indicial polynomial of `psi` (already
/// in the local variable). At an irregular point these are the formal
/// solutions of the horizontal part.
pub fn regular_part_solutions(psi: &DiffOp, chart: Point, order: usize) -> Result<SolutionBasis> {
    let tf = theta_form(psi);
    let m0 = *tf.keys().next().ok_or_else(|| Error::Malformed("zero operator".into()))?;
    let top = *tf.keys().last().unwrap();
    let q: Vec<Poly> = (m0..=top).map(|m| tf.get(&m).cloned().unwrap_or_default()).collect();
    let (roots, rest) = rational_roots(&q[0]);
    if let Some(tok) = root_token(&rest, "t") {
        return Err(Error::UnsupportedExponent(tok));
    }
    let mut classes: BTreeMap<Rational, Vec<(Rational, u32)>> = BTreeMap::new();
    for (r, m) in &roots {
        classes.entry(frac(r)).or_default().push((r.clone(), *m));
    }
    let mut class_list: Vec<Vec<(Rational, u32)>> = classes.into_values().collect();
    class_list.sort_by(|a, b| a[0].0.cmp(&b[0].0));

    let mut entries = vec![];
    let mut blocks: Vec<Vec<Vec<Rational>>> = vec![];
    for class in &class_list {
        let rho = class[0].0.clone();
        let mut slots: Vec<Slot> = vec![];
        for (r, m) in class.iter().rev() {
            let n = (r - &rho).to_integer().to_usize().unwrap();
            for l in 0..*m as usize {
                slots.push(Slot { n, l });
            }
        }
        let sols: Vec<Vec<Poly>> = slots.iter().map(|s| run_recurrence(&q, &rho, order, s)).collect();
        // d/dL acts nilpotently on the class; read coordinates off the free slots
        let dim = slots.len();
        let mut nmat = vec![vec![Rational::zero(); dim]; dim];
        for (p, g) in sols.iter().enumerate() {
            for (qi, s) in slots.iter().enumerate() {
                if s.n < order {
                    nmat[qi][p] = g[s.n].derivative().coeff(s.l);
                }
            }
        }
        let nilpotent = nmat.iter().flatten().any(|a| !a.is_zero());
        let mut c = nmat.clone();
        for (i, s) in slots.iter().enumerate() {
            c[i][i] = if nilpotent { rho.clone() } else { &rho + int(s.n as i64) };
        }
        blocks.push(c);
        for g in &sols {
            let kmax = g.iter().filter_map(|p| p.deg()).max().unwrap_or(0);
            let terms = (0..=kmax)
                .map(|k| {
                    let coeffs = g.iter().map(|p| p.coeff(k)).collect();
                    LogExpTerm::new(LaurentSeries::new(0, coeffs, order as i64), rho.clone(), k as u32, Rational::zero())
                })
                .collect();
            entries.push(LogExpSeries::new(terms, chart));
        }
    }
    let mu: usize = blocks.iter().map(|b| b.len()).sum();
    let mut connection = vec![vec![Rational::zero(); mu]; mu];
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                connection[off + i][off + j] = a.clone();
            }
        }
        off += b.len();
    }
    Ok(SolutionBasis { chart, exponents: expand_roots(&roots), connection, entries, order })
}

fn laurent_inverse(w: &[Vec<LaurentSeries>]) -> Result<Vec<Vec<LaurentSeries>>> {
    let n = w.len();
    if n == 0 || w.iter().any(|r| r.len() != n) {
        return Err(Error::Malformed("fundamental matrix must be square".into()));
    }
    let cap = w.iter().flatten().map(|s| s.prec()).max().unwrap() + 2;
    let mut a: Vec<Vec<LaurentSeries>> = w.to_vec();
    let mut inv: Vec<Vec<LaurentSeries>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { LaurentSeries::one(cap) } else { LaurentSeries::zero(cap) }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| a[r][col].valuation().unwrap())
            .ok_or_else(|| Error::NotInvertible("fundamental matrix is singular at truncation".into()))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = a[col][col].inverse()?;
        for j in 0..n {
            a[col][j] = &a[col][j] * &s;
            inv[col][j] = &inv[col][j] * &s;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] = &a[r][j] - &t;
                let t = &f * &inv[col][j];
                inv[r][j] = &inv[r][j] - &t;
            }
        }
    }
    Ok(inv)
}

/// Last row of `a_mu^-1 (W^T)^-1`: solutions of the adjoint operator.
pub fn dual_row(w: &[Vec<LaurentSeries>], phi: &DiffOp) -> Result<Vec<LaurentSeries>> {
    let mu = phi.order().unwrap_or(0);
    if mu == 0 || w.len() != mu {
        return Err(Error::Malformed("fundamental matrix size must equal the order".into()));
    }
    let inv = laurent_inverse(w)?;
    let cap = w.iter().flatten().map(|s| s.prec()).max().unwrap() + 2;
    let lead = phi.coeff(mu);
    let lead_s = LaurentSeries::from_poly(&lead, cap + lead.deg().unwrap_or(0) as i64);
    (0..mu).map(|c| inv[c][mu - 1].div(&lead_s)).collect()
}

/// Primitive of `y x^alpha (ln x)^k exp(delta/x)`: the `delta != 0` branch
/// uses the forward recurrence, `delta = 0` the closed forms.
pub fn lemma51_solve(y: &LaurentSeries, alpha: &Rational, k: u32, delta: &Rational, order: usize) -> LogExpSeries {
    let y = y.truncate(order as i64);
    let (v, p) = (y.start(), y.prec());
    let yc = |m: i64| y.coeff(m).unwrap_or_else(Rational::zero);
    let k = k as usize;
    if !delta.is_zero() {
        let start = v + 2;
        let width = (p + 2 - start).max(0) as usize;
        let mut a = vec![vec![Rational::zero(); width]; k + 1];
        for idx in 0..width {
            let n = start + idx as i64;
            for i in (0..=k).rev() {
                let (prev, up) = if idx == 0 {
                    (Rational::zero(), Rational::zero())
                } else {
                    let up = if i < k { a[i + 1][idx - 1].clone() } else { Rational::zero() };
                    (a[i][idx - 1].clone(), up)
                };
                let mut s = (int(n - 1) + alpha) * prev + int(i as i64 + 1) * up;
                if i == k {
                    s -= yc(n - 2);
                }
                a[i][idx] = s / delta;
            }
        }
        let terms = a
            .into_iter()
            .enumerate()
            .map(|(i, c)| LogExpTerm::new(LaurentSeries::new(start, c, p + 2), alpha.clone(), i as u32, delta.clone()))
            .collect();
        return LogExpSeries::new(terms, Point::Zero);
    }
    let start = v + 1;
    let width = (p + 1 - start).max(0) as usize;
    let mut a = vec![vec![Rational::zero(); width]; k + 2];
    for idx in 0..width {
        let n = start + idx as i64;
        let s = int(n) + alpha;
        if s.is_zero() {
            a[k + 1][idx] = yc(n - 1) / int(k as i64 + 1);
        } else {
            for i in 0..=k {
                a[i][idx] = lemma51_closed_form(&y, alpha, k as u32, i as u32, n);
            }
        }
    }
    let terms = a
        .into_iter()
        .enumerate()
        .map(|(i, c)| LogExpTerm::new(LaurentSeries::new(start, c, p + 1), alpha.clone(), i as u32, Rational::zero()))
        .collect();
    LogExpSeries::new(terms, Point::Zero)
}

/// `a_{i,N} = (-1)^{k-i} k! y_{N-1} / (i! (N+alpha)^{k-i+1})` for `delta = 0`.
pub fn lemma51_closed_form(y: &LaurentSeries, alpha: &Rational, k: u32, i: u32, n: i64) -> Rational {
    let s = int(n) + alpha;
    if s.is_zero() || i > k {
        return Rational::zero();
    }
    let yn = y.coeff(n - 1).unwrap_or_else(Rational::zero);
    let mut r = big(&factorial(k as u64)) / big(&factorial(i as u64)) * yn;
    for _ in 0..=(k - i) {
        r /= &s;
    }
    if (k - i) % 2 == 1 {
        r = -r;
    }
    r
}

/// Back substitution of `(N+alpha) a_{i,N} + (i+1) a_{i+1,N} = [i=k] y_{N-1}`
/// for `delta = 0`, independent of the closed forms.
pub fn lemma51_recurrence(y: &LaurentSeries, alpha: &Rational, k: u32, n: i64) -> Vec<Rational> {
    let k = k as usize;
    let s = int(n) + alpha;
    let yn = y.coeff(n - 1).unwrap_or_else(Rational::zero);
    let mut a = vec![Rational::zero(); k + 2];
    if s.is_zero() {
        a[k + 1] = yn / int(k as i64 + 1);
        return a;
    }
    for i in (0..=k).rev() {
        let rhs = if i == k { yn.clone() } else { -int(i as i64 + 1) * &a[i + 1] };
        a[i] = rhs / &s;
    }
    a
}

/// Support of the exponent data used by the classifier: denominators of
/// exponents and the primes of any coefficient denominator.
pub fn denominators(xs: &[Rational]) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = xs.iter().filter(|x| !is_integer(x)).map(|x| x.denom().clone()).collect();
    out.sort();
    out.dedup();
    out
}

pub fn lcm_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::one(), |a, b| a.lcm(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::weyl::Direction;
    use proptest::prelude::*;

    fn op(rows: &[&[i64]]) -> DiffOp {
        DiffOp::new(rows.iter().map(|r| Poly::from_ints(r)).collect())
    }

    fn rf(c: &[i64]) -> RatFun {
        RatFun::from_poly(Poly::from_ints(c))
    }

    #[test]
    fn companion_examples() {
        let a = companion(&op(&[&[0, -1], &[1]])).unwrap();
        assert_eq!(a.rows(), &[vec![rf(&[0, 1])]]);
        let airy = companion(&op(&[&[0, -1], &[], &[1]])).unwrap();
        assert_eq!(airy.rows(), &[vec![rf(&[]), rf(&[1])], vec![rf(&[0, 1]), rf(&[])]]);
        let c = companion(&op(&[&[1], &[1], &[0, 1]])).unwrap();
        let minus_inv_x = RatFun::new(Poly::from_ints(&[-1]), Poly::x()).unwrap();
        assert_eq!(c.get(1, 0), &minus_inv_x);
        assert_eq!(c.get(1, 1), &minus_inv_x);
        assert!(companion(&DiffOp::one()).is_err());
    }

    #[test]
    fn gauge_examples() {
        let g = RatMatrix::new(vec![vec![rf(&[1, 2]), rf(&[0, 1])], vec![rf(&[3]), rf(&[])]]).unwrap();
        assert_eq!(gauge(&RatMatrix::identity(2), &g).unwrap(), g);
        let y = RatMatrix::diag(vec![rf(&[0, 1]), rf(&[1])]);
        let inv_x = RatFun::new(Poly::one(), Poly::x()).unwrap();
        assert_eq!(gauge(&y, &RatMatrix::zero(2)).unwrap(), RatMatrix::diag(vec![inv_x.clone(), RatFun::zero()]));
        let c = rat(3, 7);
        let g = RatMatrix::new(vec![vec![inv_x.scale(&c)]]).unwrap();
        let y = RatMatrix::new(vec![vec![rf(&[0, 1])]]).unwrap();
        assert_eq!(gauge(&y, &g).unwrap().get(0, 0), &inv_x.scale(&(c + int(1))));
        assert!(gauge(&RatMatrix::zero(1), &g).is_err());
    }

    #[test]
    fn exponent_examples() {
        let a = rat(2, 5);
        let e = DiffOp::euler(a.clone());
        assert_eq!(exponents(&e, Point::Zero).unwrap().exponents, vec![a.clone()]);
        assert_eq!(exponents(&e, Point::Infinity).unwrap().exponents, vec![-a]);
        let theta2 = op(&[&[], &[0, 1], &[0, 0, 1]]);
        assert_eq!(exponents(&theta2, Point::Zero).unwrap().exponents, vec![int(0), int(0)]);
        let t = exponents(&op(&[&[-1], &[], &[0, 0, 1]]), Point::Zero).unwrap();
        assert!(t.exponents.is_empty());
        assert_eq!(t.exponent_tokens.len(), 1);
    }

    #[test]
    fn frobenius_examples() {
        let geo = op(&[&[-1], &[1, -1]]);
        let b = frobenius_solutions(&geo, Point::Zero, 5).unwrap();
        assert_eq!(b.entries[0].terms[0].series, LaurentSeries::new(0, vec![int(1); 5], 5));
        assert_eq!(b.connection, vec![vec![int(0)]]);

        let b = frobenius_solutions(&op(&[&[], &[1], &[0, 1]]), Point::Zero, 6).unwrap();
        assert_eq!(b.entries.len(), 2);
        assert_eq!(b.entries[0].nonzero_terms().len(), 1);
        assert_eq!(b.entries[1].nonzero_terms()[0].k, 1);
        assert_eq!(b.connection, vec![vec![int(0), int(1)], vec![int(0), int(0)]]);

        let b = frobenius_solutions(&op(&[&[-1], &[1]]), Point::Zero, 4).unwrap();
        let want = LaurentSeries::new(0, vec![int(1), int(1), rat(1, 2), rat(1, 6)], 4);
        assert_eq!(b.entries[0].terms[0].series, want);

        assert!(matches!(frobenius_solutions(&op(&[&[-1], &[1]]), Point::Infinity, 4), Err(Error::WrongRegularity(_))));
        assert!(matches!(
            frobenius_solutions(&op(&[&[-1], &[], &[0, 0, 1]]), Point::Zero, 4),
            Err(Error::UnsupportedExponent(_))
        ));
    }

    fn corpus() -> Vec<DiffOp> {
        vec![
            DiffOp::euler(rat(1, 2)),
            DiffOp::euler(int(-3)),
            op(&[&[], &[0, 1], &[0, 0, 1]]),
            op(&[&[-1], &[1, -1]]),
            DiffOp::gauss(&rat(1, 2), &rat(1, 3), &rat(1, 4)),
            DiffOp::gauss(&int(1), &int(1), &int(1)),
            op(&[&[-1], &[], &[0, 0, 1]]),
            op(&[&[0, -1], &[], &[1]]),
            // theta^3 - x: one class with a log ladder of length 3
            &DiffOp::new(vec![Poly::zero(), Poly::x()]).pow(3) - &DiffOp::x(),
            // x^2 D^2 - 2: exponents 2 and -1 in one class
            op(&[&[-2], &[], &[0, 0, 1]]),
        ]
    }

    #[test]
    fn frobenius_residuals_vanish() {
        for phi in corpus() {
            let Ok(b) = frobenius_solutions(&phi, Point::Zero, 30) else { continue };
            let mu = phi.order().unwrap();
            assert_eq!(b.entries.len(), mu, "{phi}");
            for e in &b.entries {
                let r = phi.apply(e).unwrap();
                assert!(r.is_zero(), "{phi}: {r}");
                assert!(r.min_prec().unwrap() >= 30 - mu as i64 - 2, "{phi}");
            }
            for i in 0..mu {
                for j in 0..i {
                    assert!(b.connection[i][j].is_zero());
                }
            }
        }
    }

    #[test]
    fn log_ladder_connection() {
        let phi = &DiffOp::new(vec![Poly::zero(), Poly::x()]).pow(3) - &DiffOp::x();
        let b = frobenius_solutions(&phi, Point::Zero, 12).unwrap();
        let ks: Vec<u32> = b.entries.iter().map(|e| e.terms.iter().map(|t| t.k).max().unwrap()).collect();
        assert_eq!(ks, vec![0, 1, 2]);
        assert_eq!(b.connection[0][1], int(1));
        assert_eq!(b.connection[1][2], int(2));
    }

    #[test]
    fn exp_part_examples() {
        let d1 = op(&[&[-1], &[1]]);
        let e = exp_parts(&d1, Point::Infinity).unwrap();
        assert!(!e.regular);
        assert_eq!(e.delta_parts.len(), 1);
        assert_eq!(e.delta_parts[0].delta, int(1));
        assert_eq!(e.delta_parts[0].exponent, Some(int(0)));

        let d2 = op(&[&[-1], &[], &[1]]);
        let e = exp_parts(&d2, Point::Infinity).unwrap();
        let ds: Vec<_> = e.delta_parts.iter().map(|d| d.delta.clone()).collect();
        assert_eq!(ds, vec![int(-1), int(1)]);

        let e = exp_parts(&op(&[&[1], &[0, 1]]), Point::Infinity).unwrap();
        assert!(e.regular);
        assert_eq!(e.exponents, vec![int(1)]);

        let airy = op(&[&[0, -1], &[], &[1]]);
        assert!(matches!(exp_parts(&airy, Point::Infinity), Err(Error::UnsupportedSlope(_))));
        let ex = exponents(&airy, Point::Infinity).unwrap();
        assert!(!ex.delta_tokens.is_empty());
    }

    #[test]
    fn exp_part_exponent_matches_solution() {
        // x^(1/2) e^{2x} solves D - 2 - 1/(2x), i.e. 2xD - 4x - 1
        let phi = op(&[&[-1, -4], &[0, 2]]);
        let e = exp_parts(&phi, Point::Infinity).unwrap();
        let d = e.delta_parts.iter().find(|d| !d.delta.is_zero()).unwrap();
        assert_eq!(d.delta, int(2));
        assert_eq!(d.exponent, Some(rat(-1, 2)));
        let s = LogExpSeries::single(LogExpTerm::new(LaurentSeries::one(10), rat(-1, 2), 0, int(2)), Point::Infinity);
        assert!(phi.apply(&s).unwrap().is_zero());
    }

    #[test]
    fn dual_row_examples() {
        let d2 = op(&[&[], &[], &[1]]);
        let w = vec![
            vec![LaurentSeries::one(10), LaurentSeries::monomial(int(1), 1, 10)],
            vec![LaurentSeries::zero(9), LaurentSeries::one(9)],
        ];
        let row = dual_row(&w, &d2).unwrap();
        assert!(row[0].eq_mod(&LaurentSeries::monomial(int(-1), 1, 9)));
        assert!(row[1].eq_mod(&LaurentSeries::one(9)));

        let e = DiffOp::euler(int(1));
        let row = dual_row(&[vec![LaurentSeries::monomial(int(1), 1, 10)]], &e).unwrap();
        assert_eq!(row[0].normalized().valuation(), Some(-2));
        let adj = e.adjoint();
        assert_eq!(adj, op(&[&[-2], &[0, -1]]));
        assert!(adj.apply(&LogExpSeries::from_series(row[0].clone(), Point::Zero)).unwrap().is_zero());

        let d1 = op(&[&[-1], &[1]]);
        let ex = frobenius_solutions(&d1, Point::Zero, 12).unwrap();
        let row = dual_row(&ex.fundamental_matrix().unwrap(), &d1).unwrap();
        let r = d1.adjoint().apply(&LogExpSeries::from_series(row[0].clone(), Point::Zero)).unwrap();
        assert!(r.is_zero());
        assert_eq!(row[0].coeff(3), Some(rat(-1, 6)));

        let sing = vec![vec![LaurentSeries::one(5), LaurentSeries::one(5)], vec![LaurentSeries::zero(5), LaurentSeries::zero(5)]];
        assert!(matches!(dual_row(&sing, &d2), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn primitive_examples() {
        let one = LaurentSeries::one(10);
        let z = lemma51_solve(&one, &int(0), 0, &int(0), 10);
        let t = z.nonzero_terms();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].series.normalized().stored()[0], int(1));
        assert_eq!(t[0].series.valuation(), Some(1));

        let z = lemma51_solve(&one, &int(-1), 0, &int(0), 10);
        let t = z.nonzero_terms();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].k, 1);
        assert_eq!(t[0].series.coeff(0), Some(int(1)));

        let z = lemma51_solve(&one, &int(0), 0, &int(1), 10);
        let s = &z.terms[0].series;
        for n in 2..8 {
            assert_eq!(s.coeff(n), Some(-big(&factorial(n as u64 - 1))));
        }
    }

    #[test]
    fn exponent_sign_duality_shifted() {
        for phi in corpus() {
            let e = exponents(&phi, Point::Zero).unwrap();
            if !e.regular || !e.exponent_tokens.is_empty() {
                continue;
            }
            let (m0, _) = indicial(&phi, Point::Zero).unwrap();
            let mut want: Vec<Rational> = e.exponents.iter().map(|r| -r - int(1 + m0)).collect();
            want.sort();
            assert_eq!(exponents(&phi.adjoint(), Point::Zero).unwrap().exponents, want, "{phi}");
        }
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(-3i64..=3, 0..3).prop_map(|c| Poly::from_ints(&c))
    }

    fn arb_unimodular() -> impl Strategy<Value = RatMatrix> {
        prop::collection::vec((0usize..2, 0usize..2, arb_poly()), 1..4).prop_map(|es| {
            let mut y = RatMatrix::identity(2);
            for (i, j, p) in es {
                if i != j {
                    y = y.mul(&RatMatrix::elementary(2, i, j, RatFun::from_poly(p)));
                }
            }
            y
        })
    }

    fn arb_op() -> impl Strategy<Value = DiffOp> {
        (arb_poly(), arb_poly(), arb_poly().prop_filter("nonzero", |p| !p.is_zero()))
            .prop_map(|(a, b, c)| DiffOp::new(vec![a, b, c]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gauge_transpose_duality(y in arb_unimodular(), phi in arb_op()) {
            let a = companion(&phi).unwrap();
            let lhs = gauge(&y, &a).unwrap().transpose().neg();
            let yt = y.inverse().unwrap().transpose();
            let rhs = gauge(&yt, &a.transpose().neg()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rational_roots_recovered(rs in prop::collection::vec((-6i64..=6, 1i64..=4), 1..4), extra in 0u8..2) {
            let mut p = Poly::one();
            for (a, b) in &rs {
                p = &p * &Poly::from_coeffs(vec![-rat(*a, *b), int(1)]);
            }
            if extra == 1 {
                p = &p * &Poly::from_ints(&[-3, 0, 1]);
            }
            let (roots, rest) = rational_roots(&p);
            let mut want: Vec<Rational> = rs.iter().map(|(a, b)| rat(*a, *b)).collect();
            want.sort();
            prop_assert_eq!(expand_roots(&roots), want);
            prop_assert_eq!(rest.deg().unwrap_or(0), 2 * extra as usize);
        }

        #[test]
        fn euler_products_solve(a in -4i64..4, b in -4i64..4, d in 1i64..4, order in 6usize..14) {
            let phi = DiffOp::euler(rat(a, d)).compose(&DiffOp::euler(rat(b, d)));
            let basis = frobenius_solutions(&phi, Point::Zero, order).unwrap();
            for e in &basis.entries {
                prop_assert!(phi.apply(e).unwrap().is_zero());
            }
            for at in [Point::Zero, Point::Infinity] {
                let inf = frobenius_solutions(&phi, at, order).unwrap();
                for e in &inf.entries {
                    prop_assert!(phi.apply(e).unwrap().is_zero());
                }
            }
        }

        #[test]
        fn reflected_frobenius_solutions(a in -3i64..3, b in 1i64..4, c in 1i64..4) {
            let phi = DiffOp::gauss(&rat(a, 2), &rat(b, 3), &rat(c, 5));
            let basis = frobenius_solutions(&phi, Point::Zero, 16).unwrap();
            let refl = phi.reflect();
            for e in &basis.entries {
                prop_assert!(refl.apply(&e.reflect()).unwrap().is_zero());
            }
        }

        #[test]
        fn primitive_derivative_residual(
            ys in prop::collection::vec(-5i64..=5, 1..10),
            an in -6i64..6, ad in prop_oneof![Just(1i64), Just(2), Just(3)],
            k in 0u32..3,
            delta in prop_oneof![Just(0i64), Just(1), Just(-2)],
        ) {
            let n = ys.len() as i64;
            let y = LaurentSeries::new(0, ys.into_iter().map(int).collect(), n + 10);
            let alpha = rat(an, ad);
            let z = lemma51_solve(&y, &alpha, k, &int(delta), 20);
            let dz = DiffOp::d().apply(&z).unwrap();
            let src = LogExpSeries::single(LogExpTerm::new(y.truncate(20), alpha.clone(), k, int(delta)), Point::Zero);
            let r = dz.sub(&src);
            prop_assert!(r.is_zero(), "{}", r);
            prop_assert!(r.min_prec().unwrap() >= src.min_prec().unwrap() - 1);
            if delta == 0 {
                for nn in 1..n + 1 {
                    let rec = lemma51_recurrence(&y, &alpha, k, nn);
                    for i in 0..=k {
                        if !(int(nn) + &alpha).is_zero() {
                            prop_assert_eq!(&rec[i as usize], &lemma51_closed_form(&y, &alpha, k, i, nn));
                        }
                    }
                }
            }
        }

        #[test]
        fn fourier_of_gauss_is_regular_somewhere(a in 1i64..4, b in 1i64..4) {
            // sanity for the classifier corpus: F(Gauss) has slopes in {0, 1} at infinity
            let g = DiffOp::gauss(&rat(a, 2), &rat(b, 3), &rat(1, 4));
            let f = g.fourier(Direction::Forward);
            let nl = local_newton(&f, Point::Infinity).unwrap();
            prop_assert!(nl.slopes.iter().all(|(s, _)| s.is_zero() || s.is_one()));
        }
    }
}
