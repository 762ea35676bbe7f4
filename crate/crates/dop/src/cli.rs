//! Operator expression parser and the `dop` command line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::classify::check_e_conditions;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, LaurentSeries, Point};
use crate::exec::Exec;
use crate::laplace::{laplace_series, LaplaceResult};
use crate::local::{companion, exp_parts, exponents, frobenius_solutions, lemma51_solve, log_exp_json};
use crate::padic::{builtin_series, default_places, e_screen, parse_places, series_from_csv, Place};
use crate::polygon::nr_polygon;
use crate::weyl::{DiffOp, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok {
    X,
    D,
    Num,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize, usize, String)>,
    pos: usize,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|i| offset - i).unwrap_or(offset + 1);
    (line, col)
}

fn perr(src: &str, offset: usize, msg: impl Into<String>) -> Error {
    let (line, col) = line_col(src, offset);
    Error::Parse { line, col, msg: msg.into() }
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Result<Lexer<'a>> {
        let b = src.as_bytes();
        let mut toks = vec![];
        let mut i = 0;
        while i < b.len() {
            let c = b[i] as char;
            let start = i;
            let t = match c {
                ' ' | '\t' | '\n' | '\r' => {
                    i += 1;
                    continue;
                }
                'x' => Tok::X,
                'D' => Tok::D,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '0'..='9' => {
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i + 1 < b.len() && b[i] == b'/' && b[i + 1].is_ascii_digit() {
                        i += 1;
                        while i < b.len() && b[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                    toks.push((Tok::Num, start, i, src[start..i].to_string()));
                    continue;
                }
                _ => return Err(perr(src, i, format!("unexpected character '{c}'"))),
            };
            i += 1;
            toks.push((t, start, i, src[start..i].to_string()));
        }
        toks.push((Tok::End, b.len(), b.len(), String::new()));
        Ok(Lexer { src, toks, pos: 0 })
    }

    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, String) {
        let t = self.toks[self.pos].clone();
        if t.0 != Tok::End {
            self.pos += 1;
        }
        (t.0, t.3)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() != t {
            return Err(perr(self.src, self.offset(), format!("expected {what}")));
        }
        self.bump();
        Ok(())
    }

    // expr := ['-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<DiffOp> {
        let neg = if self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(&crate::exact::int(-1));
        }
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<DiffOp> {
        let mut acc = self.factor()?;
        while self.peek() == Tok::Star {
            self.bump();
            acc = &acc * &self.factor()?;
        }
        match self.peek() {
            Tok::X | Tok::D | Tok::Num | Tok::LParen => {
                Err(perr(self.src, self.offset(), "juxtaposition is not allowed, use '*'"))
            }
            _ => Ok(acc),
        }
    }

    fn factor(&mut self) -> Result<DiffOp> {
        let base = self.base()?;
        if self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump() {
            (Tok::Num, s) if !s.contains('/') => {
                let n: u32 = s.parse().map_err(|_| perr(self.src, at, "exponent too large"))?;
                Ok(base.pow(n))
            }
            (Tok::Minus, _) => Err(perr(self.src, at, "negative exponent")),
            _ => Err(perr(self.src, at, "expected a nonnegative integer exponent")),
        }
    }

    fn base(&mut self) -> Result<DiffOp> {
        let at = self.offset();
        match self.bump() {
            (Tok::X, _) => Ok(DiffOp::x()),
            (Tok::D, _) => Ok(DiffOp::d()),
            (Tok::Num, s) => Ok(DiffOp::constant(parse_rational(&s).map_err(|_| perr(self.src, at, "bad number"))?)),
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            (Tok::End, _) => Err(perr(self.src, at, "unexpected end of input")),
            (_, s) => Err(perr(self.src, at, format!("unexpected '{s}'"))),
        }
    }
}

/// Parses `x`, `D`, rationals, `+ - * ^` and parentheses into a normalized operator.
pub fn parse_operator(text: &str) -> Result<DiffOp> {
    let mut lx = Lexer::new(text)?;
    let op = lx.expr()?;
    if lx.peek() != Tok::End {
        return Err(perr(text, lx.offset(), "trailing input"));
    }
    Ok(op)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum At {
    #[value(name = "0")]
    Zero,
    #[value(name = "inf")]
    Inf,
}

impl At {
    fn point(self) -> Point {
        match self {
            At::Zero => Point::Zero,
            At::Inf => Point::Infinity,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dop", version, about = "Exact differential operator toolkit")]
pub struct Cli {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Print nothing; only the exit code matters
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Fourier transform x -> D, D -> -x
    Fourier {
        #[arg(allow_hyphen_values = true)]
        op: String,
        /// Use the inverse transform x -> -D, D -> x
        #[arg(long)]
        inverse: bool,
    },
    /// Formal adjoint
    Adjoint {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Substitution x -> -x
    Reflect {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Substitution x -> 1/x with cleared denominators
    Invert {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Newton-Ramis polygon
    Polygon {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Companion matrix
    Companion {
        #[arg(allow_hyphen_values = true)]
        op: String,
    },
    /// Exponents at a point
    Exponents {
        #[arg(allow_hyphen_values = true)]
        op: String,
        #[arg(long, value_enum, default_value = "0")]
        at: At,
    },
    /// Formal solutions at a regular singular point
    Solve {
        #[arg(allow_hyphen_values = true)]
        op: String,
        #[arg(long, value_enum, default_value = "0")]
        at: At,
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// Exponential parts at a point
    ExpParts {
        #[arg(allow_hyphen_values = true)]
        op: String,
        #[arg(long, value_enum, default_value = "inf")]
        at: At,
    },
    /// Laplace transform of f x^alpha (ln x)^k
    Laplace {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// CSV file `n,numerator,denominator` (default f = 1)
        #[arg(long)]
        series: Option<PathBuf>,
        /// Builtin sequence: geometric, euler, factorial, factorial-squared, exp
        #[arg(long, conflicts_with = "series")]
        builtin: Option<String>,
    },
    /// Primitive of y x^alpha (ln x)^k exp(delta/x)
    Lemma51 {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        delta: String,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, conflicts_with = "series")]
        builtin: Option<String>,
    },
    /// p-adic growth screen of a coefficient sequence
    Padic {
        #[arg(long = "p", required = true)]
        p: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        terms: usize,
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, conflicts_with = "series", default_value = "euler")]
        builtin: String,
    },
    /// Check the structural E-operator conditions
    Classify {
        #[arg(allow_hyphen_values = true)]
        op: String,
        /// Comma separated primes (default: $DOP_PLACES or 2,3,5,7,11,13)
        #[arg(long)]
        places: Option<String>,
        #[arg(long, default_value_t = 30)]
        order: usize,
    },
}

fn load_series(path: &Option<PathBuf>, builtin: Option<&str>, n: usize) -> Result<LaurentSeries> {
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        return series_from_csv(&text);
    }
    match builtin {
        Some(name) => builtin_series(name, n).ok_or_else(|| Error::Malformed(format!("unknown builtin series '{name}'"))),
        None => Ok(LaurentSeries::one(n as i64 + 1)),
    }
}

fn places_from(arg: &Option<String>) -> Result<Vec<Place>> {
    match arg {
        Some(s) => parse_places(s),
        None => match std::env::var("DOP_PLACES") {
            Ok(s) if !s.trim().is_empty() => parse_places(&s),
            _ => Ok(default_places()),
        },
    }
}

fn op_json(op: &DiffOp) -> Value {
    json!({
        "operator": op.to_string(),
        "order": op.order(),
        "coeffs": op.coeffs().iter().map(|p| p.fmt_var("x")).collect::<Vec<_>>(),
    })
}

fn laplace_text(r: &LaplaceResult) -> String {
    let mut out = format!("x^({}) * [\n", r.prefactor_exponent);
    for (j, m) in r.collapse().iter().enumerate() {
        for (c, s) in m {
            out.push_str(&format!("  (ln x)^{j} * {c} * ({})\n", s.fmt_var("(1/x)")));
        }
    }
    out.push(']');
    out
}

struct Outcome {
    text: String,
    json: Value,
    code: i32,
}

fn ok(text: String, json: Value) -> Result<Outcome> {
    Ok(Outcome { text, json, code: 0 })
}

fn dispatch(cmd: &Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::Fourier { op, inverse } => {
            let dir = if *inverse { Direction::Inverse } else { Direction::Forward };
            let r = parse_operator(op)?.fourier(dir);
            ok(r.to_string(), op_json(&r))
        }
        Cmd::Adjoint { op } => {
            let r = parse_operator(op)?.adjoint();
            ok(r.to_string(), op_json(&r))
        }
        Cmd::Reflect { op } => {
            let r = parse_operator(op)?.reflect();
            ok(r.to_string(), op_json(&r))
        }
        Cmd::Invert { op } => {
            let (r, e) = parse_operator(op)?.invert_chart();
            let mut j = op_json(&r);
            j["cleared_power"] = json!(e);
            ok(format!("{r}  (cleared x^{e})"), j)
        }
        Cmd::Polygon { op } => {
            let nr = nr_polygon(&parse_operator(op)?)?;
            let v: Vec<String> = nr.vertices.iter().map(|(u, w)| format!("({u},{w})")).collect();
            let s: Vec<String> = nr.slopes.iter().map(|(q, m)| format!("{q} (x{m})")).collect();
            let mut j = nr.to_json();
            j["vertical_side"] = json!(nr.has_vertical_side());
            ok(format!("vertices: {}\nslopes: {}", v.join(" "), s.join(", ")), j)
        }
        Cmd::Companion { op } => {
            let m = companion(&parse_operator(op)?)?;
            let rows: Vec<String> = m.rows().iter().map(|r| r.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("  ")).collect();
            ok(rows.join("\n"), json!({"matrix": m.to_json()}))
        }
        Cmd::Exponents { op, at } => {
            let d = exponents(&parse_operator(op)?, at.point())?;
            let mut ex: Vec<String> = d.exponents.iter().map(|e| e.to_string()).collect();
            ex.extend(d.exponent_tokens.iter().cloned());
            let mut text = format!("exponents at {}: {}", at.point().name(), ex.join(", "));
            if !d.regular {
                text.push_str(" (irregular)");
            }
            ok(text, d.to_json())
        }
        Cmd::Solve { op, at, order } => {
            let b = frobenius_solutions(&parse_operator(op)?, at.point(), *order)?;
            let var = if at.point() == Point::Zero { "x" } else { "t" };
            let lines: Vec<String> = b.entries.iter().map(|e| e.fmt_var(var)).collect();
            ok(lines.join("\n"), b.to_json())
        }
        Cmd::ExpParts { op, at } => {
            let d = exp_parts(&parse_operator(op)?, at.point())?;
            let parts: Vec<String> = d
                .delta_parts
                .iter()
                .map(|p| match &p.exponent {
                    Some(e) => format!("delta {} (x{}), exponent {e}", p.delta, p.mult),
                    None => format!("delta {} (x{})", p.delta, p.mult),
                })
                .chain(d.delta_tokens.iter().cloned())
                .collect();
            ok(parts.join("\n"), d.to_json())
        }
        Cmd::Laplace { alpha, k, order, series, builtin } => {
            let a = parse_rational(alpha)?;
            let f = load_series(series, builtin.as_deref(), *order)?;
            let r = laplace_series(&f, &a, *k, *order)?;
            ok(laplace_text(&r), r.to_json())
        }
        Cmd::Lemma51 { alpha, k, delta, order, series, builtin } => {
            let a = parse_rational(alpha)?;
            let d = parse_rational(delta)?;
            let y = load_series(series, builtin.as_deref(), *order)?;
            let z = lemma51_solve(&y, &a, *k, &d, *order);
            ok(z.fmt_var("x"), json!({"chart": "zero", "terms": log_exp_json(&z)}))
        }
        Cmd::Padic { p, terms, series, builtin } => {
            let places: Vec<Place> = p.iter().map(|&q| Place::new(q)).collect::<Result<_>>()?;
            let f = load_series(series, Some(builtin.as_str()), *terms)?;
            let n = (*terms).min(f.prec().max(1) as usize - 1);
            let r = e_screen(&f, &places, n, Exec::default());
            let mut lines: Vec<String> = r
                .places
                .iter()
                .map(|pr| {
                    let m = pr.margin.as_ref().map(|m| m.to_string()).unwrap_or_else(|| "inf".into());
                    format!("p={}: s={} target={} margin={} ({})", pr.place, pr.s_estimate, pr.target, m, pr.verdict())
                })
                .collect();
            lines.push(format!("archimedean slope {:.4}", r.archimedean_slope));
            lines.push(format!("verdict: {}", r.verdict.as_str()));
            ok(lines.join("\n"), r.to_json())
        }
        Cmd::Classify { op, places, order } => {
            let psi = parse_operator(op)?;
            let pl = places_from(places)?;
            let r = check_e_conditions(&psi, &pl, *order)?;
            let text = match r.verdict.reason() {
                Some(why) => format!("{}: {why}", r.verdict.label()),
                None => r.verdict.label().to_string(),
            };
            Ok(Outcome { text, json: r.to_json(), code: r.verdict.exit_code() })
        }
    }
}

/// Runs one command line; returns the printed output and the exit code.
pub fn run<I, T>(args: I) -> (String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (e.to_string(), code);
        }
    };
    match dispatch(&cli.cmd) {
        Ok(o) => {
            let out = if cli.quiet {
                String::new()
            } else if cli.json {
                serde_json::to_string_pretty(&o.json).expect("json")
            } else {
                o.text
            };
            (out, o.code)
        }
        Err(e) => {
            let out = if cli.quiet {
                String::new()
            } else if cli.json {
                serde_json::to_string_pretty(&json!({"error": e.to_string(), "code": e.exit_code()})).expect("json")
            } else {
                format!("error: {e}")
            };
            (out, e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Poly;
    use crate::weyl::tests::arb_op;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let op = parse_operator("x^2*D^2 + (3*x-1)*D + 1").unwrap();
        assert_eq!(op.order(), Some(2));
        assert_eq!(op.coeffs(), &[Poly::one(), Poly::from_ints(&[-1, 3]), Poly::from_ints(&[0, 0, 1])]);
        assert_eq!(parse_operator("D*x").unwrap().to_string(), "x*D + 1");
        assert_eq!(parse_operator("(D-1)*(D+1)").unwrap().to_string(), "D^2 - 1");
        assert_eq!(parse_operator("1/2*x - -3").err().map(|e| e.exit_code()), Some(1));
        assert_eq!(parse_operator("-D + x").unwrap(), &DiffOp::x() - &DiffOp::d());
    }

    #[test]
    fn parse_errors() {
        match parse_operator("x^-1") {
            Err(Error::Parse { col, msg, .. }) => assert_eq!((col, msg.as_str()), (3, "negative exponent")),
            e => panic!("{e:?}"),
        }
        match parse_operator("x +\n  y") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            e => panic!("{e:?}"),
        }
        assert!(parse_operator("2x").is_err());
        assert!(parse_operator("(x").is_err());
        assert!(parse_operator("x^1/2").is_err());
    }

    #[test]
    fn run_examples() {
        assert_eq!(run(["dop", "fourier", "x"]), ("D".to_string(), 0));
        let (out, code) = run(["dop", "polygon", "D-1", "--json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!((v["vertices"].clone(), v["slopes"].clone(), code), (json!([[0, 0], [1, -1]]), json!([["-1", 1]]), 0));
        let (out, code) = run(["dop", "classify", "D^2 - x"]);
        assert_eq!(code, 2);
        assert!(out.contains("rejected") && out.contains("-3/2"), "{out}");
        assert_eq!(run(["dop", "--quiet", "classify", "D - 1"]), (String::new(), 2));
        assert_eq!(run(["dop", "bogus"]).1, 1);
        assert_eq!(run(["dop", "fourier", "x +"]).1, 1);
        assert_eq!(run(["dop", "exp-parts", "D^2 - x"]).1, 4);
        assert_eq!(run(["dop", "solve", "D - 1", "--at", "inf"]).1, 4);
    }

    #[test]
    fn laplace_command() {
        let (out, code) = run(["dop", "laplace", "--alpha", "-1", "--k", "0", "--order", "4"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("(ln x)^1"), "{out}");
        let (out, _) = run(["dop", "laplace", "--alpha", "1/2", "--builtin", "geometric", "--order", "3", "--json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["prefactor_exponent"], json!("-3/2"));
    }

    #[test]
    fn primitive_command() {
        let (out, code) = run(["dop", "lemma51", "--alpha", "0", "--k", "0", "--delta", "0", "--order", "4"]);
        assert_eq!(code, 0);
        assert!(out.contains('x'), "{out}");
    }

    #[test]
    fn places_env() {
        assert_eq!(places_from(&Some("3,5".into())).unwrap().len(), 2);
        assert!(places_from(&Some("4".into())).is_err());
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(op in arb_op(4, 5)) {
            let text = op.to_string();
            prop_assert_eq!(parse_operator(&text).unwrap(), op);
        }
    }
}
