//! Basis-function dictionaries.
//!
//! A dictionary is an ordered list of evaluable scalar terms over the state.
//! The first `n` entries are always the coordinate projections `x1..xn` (the
//! linear head); the remaining entries form the nonlinear tail. Terms come
//! from a closed grammar so a dictionary is reproducible from its textual
//! form alone: monomials, sine/cosine of a bilinear argument, and
//! `ln(1 + xk^2)`.

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// One evaluable basis function. Coordinate indices are zero-based in memory
/// and one-based in the textual form (`x1` is index 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Term {
    /// Product of coordinate powers, e.g. `x1^2*x2`. Factors are sorted by
    /// coordinate index and every power is at least one.
    Monomial(Vec<(usize, u32)>),
    /// `sin(xi*xj)`
    Sin(usize, usize),
    /// `cos(xi*xj)`
    Cos(usize, usize),
    /// `ln(1+xk^2)`
    Log1pSq(usize),
}

impl Term {
    /// Plain projection `x(k)`.
    pub fn coord(k: usize) -> Self {
        Term::Monomial(vec![(k, 1)])
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Term::Monomial(factors) => factors
                .iter()
                .map(|&(k, p)| x[k].powi(p as i32))
                .product(),
            Term::Sin(i, j) => (x[*i] * x[*j]).sin(),
            Term::Cos(i, j) => (x[*i] * x[*j]).cos(),
            Term::Log1pSq(k) => (1.0 + x[*k] * x[*k]).ln(),
        }
    }

    /// Largest coordinate index referenced by the term.
    fn max_index(&self) -> usize {
        match self {
            Term::Monomial(factors) => factors.iter().map(|&(k, _)| k).max().unwrap_or(0),
            Term::Sin(i, j) | Term::Cos(i, j) => (*i).max(*j),
            Term::Log1pSq(k) => *k,
        }
    }

    /// True when the term is exactly the projection onto coordinate `k`.
    fn is_coord(&self, k: usize) -> bool {
        matches!(self, Term::Monomial(f) if f.as_slice() == [(k, 1)])
    }

    /// Parse the textual form of the grammar.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |detail: &str| Error::Config(format!("cannot parse term `{s}`: {detail}"));

        fn parse_coord(tok: &str) -> Option<usize> {
            let rest = tok.strip_prefix('x')?;
            let idx: usize = rest.parse().ok()?;
            (idx >= 1).then(|| idx - 1)
        }

        // sin(xi*xj) / cos(xi*xj)
        for (prefix, make) in [
            ("sin(", true),
            ("cos(", false),
        ] {
            if let Some(inner) = s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
                let (a, b) = inner
                    .split_once('*')
                    .ok_or_else(|| bad("expected a bilinear argument `xi*xj`"))?;
                let i = parse_coord(a.trim()).ok_or_else(|| bad("bad coordinate"))?;
                let j = parse_coord(b.trim()).ok_or_else(|| bad("bad coordinate"))?;
                return Ok(if make { Term::Sin(i, j) } else { Term::Cos(i, j) });
            }
        }

        // ln(1+xk^2)
        if let Some(inner) = s.strip_prefix("ln(1+").and_then(|r| r.strip_suffix("^2)")) {
            let k = parse_coord(inner.trim()).ok_or_else(|| bad("bad coordinate"))?;
            return Ok(Term::Log1pSq(k));
        }

        // monomial: factors joined by `*`, each `xk` or `xk^p`
        let mut factors: Vec<(usize, u32)> = Vec::new();
        for factor in s.split('*') {
            let factor = factor.trim();
            let (coord, pow) = match factor.split_once('^') {
                Some((c, p)) => {
                    let pow: u32 = p
                        .trim()
                        .parse()
                        .map_err(|_| bad("bad exponent"))?;
                    (c.trim(), pow)
                }
                None => (factor, 1),
            };
            if pow == 0 {
                return Err(bad("zero exponent is not in the grammar"));
            }
            let k = parse_coord(coord).ok_or_else(|| bad("bad coordinate"))?;
            factors.push((k, pow));
        }
        if factors.is_empty() {
            return Err(bad("empty term"));
        }
        factors.sort_by_key(|&(k, _)| k);
        // merge repeated coordinates
        let mut merged: Vec<(usize, u32)> = Vec::new();
        for (k, p) in factors {
            match merged.last_mut() {
                Some((lk, lp)) if *lk == k => *lp += p,
                _ => merged.push((k, p)),
            }
        }
        Ok(Term::Monomial(merged))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Monomial(factors) => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|&(k, p)| {
                        if p == 1 {
                            format!("x{}", k + 1)
                        } else {
                            format!("x{}^{}", k + 1, p)
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
            Term::Sin(i, j) => write!(f, "sin(x{}*x{})", i + 1, j + 1),
            Term::Cos(i, j) => write!(f, "cos(x{}*x{})", i + 1, j + 1),
            Term::Log1pSq(k) => write!(f, "ln(1+x{}^2)", k + 1),
        }
    }
}

impl TryFrom<String> for Term {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Term::parse(&s)
    }
}

impl From<Term> for String {
    fn from(t: Term) -> String {
        t.to_string()
    }
}

/// Ordered basis-function library with an enforced linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryRepr", into = "DictionaryRepr")]
pub struct Dictionary {
    n: usize,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRepr(Vec<Term>);

impl TryFrom<DictionaryRepr> for Dictionary {
    type Error = Error;
    fn try_from(r: DictionaryRepr) -> Result<Self> {
        Dictionary::from_terms(r.0)
    }
}

impl From<Dictionary> for DictionaryRepr {
    fn from(d: Dictionary) -> DictionaryRepr {
        DictionaryRepr(d.terms)
    }
}

impl Dictionary {
    /// Build from terms; the state dimension is the length of the leading run
    /// of coordinate projections `x1, x2, ...` in order.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        let mut n = 0;
        while n < terms.len() && terms[n].is_coord(n) {
            n += 1;
        }
        if n == 0 {
            return Err(Error::Config(
                "dictionary must start with the coordinate projections x1..xn".into(),
            ));
        }
        let dict = Dictionary { n, terms };
        for (i, t) in dict.terms.iter().enumerate() {
            if t.max_index() >= dict.n {
                return Err(Error::Config(format!(
                    "dictionary term {i} ({t}) references coordinate beyond the linear head (n = {})",
                    dict.n
                )));
            }
        }
        Ok(dict)
    }

    pub fn parse_terms(strings: &[&str]) -> Result<Self> {
        let terms = strings
            .iter()
            .map(|s| Term::parse(s))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(terms)
    }

    /// State dimension (length of the linear head).
    pub fn state_dim(&self) -> usize {
        self.n
    }

    /// Total number of basis functions.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonlinear tail entries.
    pub fn tail_len(&self) -> usize {
        self.terms.len() - self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Evaluate the full dictionary `[x; M(x)]`. The linear head is copied
    /// bit-identically from `x`; every entry must come out finite.
    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                context: "dictionary evaluation",
                expected: format!("state of length {}", self.n),
                got: format!("length {}", x.len()),
            });
        }
        let mut z = DVector::zeros(self.terms.len());
        z.rows_mut(0, self.n).copy_from(x);
        for (i, t) in self.terms.iter().enumerate().skip(self.n) {
            let v = t.eval(x);
            if !v.is_finite() {
                return Err(Error::Domain {
                    index: i,
                    term: t.to_string(),
                });
            }
            z[i] = v;
        }
        Ok(z)
    }

    /// Evaluate only the nonlinear tail `M(x)`.
    pub fn eval_tail(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let z = self.eval(x)?;
        Ok(z.rows(self.n, self.tail_len()).into_owned())
    }

    /// Whether `Z(0) = 0`. Dictionaries with constant-offset terms such as
    /// `cos` violate this; callers are expected to warn and proceed.
    pub fn vanishes_at_origin(&self) -> bool {
        let zero = DVector::zeros(self.n);
        match self.eval(&zero) {
            Ok(z) => z.iter().all(|&v| v == 0.0),
            Err(_) => false,
        }
    }
}

/// The nine-term benchmark dictionary used throughout the case studies:
/// `[x1; x2; x1^2; x1*x2; x2^2; sin(x1*x2); cos(x1*x2); ln(1+x1^2); ln(1+x2^2)]`.
pub fn benchmark_dictionary() -> Dictionary {
    Dictionary::parse_terms(&[
        "x1",
        "x2",
        "x1^2",
        "x1*x2",
        "x2^2",
        "sin(x1*x2)",
        "cos(x1*x2)",
        "ln(1+x1^2)",
        "ln(1+x2^2)",
    ])
    .expect("benchmark dictionary is well-formed")
}
