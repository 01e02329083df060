//! Systems of Boolean polynomials and their text format.
//!
//! A system file starts with a `# vars: <n>` header; every following
//! non-empty, non-comment line is one polynomial, written as ` + `-joined
//! terms where a term is `x<i>` factors joined by `*`, the literal `1`, or
//! `0` for the zero polynomial. `#` starts a comment.

use std::fmt;

use crate::anf::{Assignment, Monomial, Poly, VarId, MAX_VARS};
use crate::error::CoreError;
use crate::order::VarOrder;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoolSystem {
    n: usize,
    polys: Vec<Poly>,
}

impl BoolSystem {
    /// Every variable mentioned by `polys` must be within 1..=n.
    pub fn new(n: usize, polys: Vec<Poly>) -> Result<Self, CoreError> {
        if n > MAX_VARS {
            return Err(CoreError::VarOutOfRange { index: n, max: MAX_VARS });
        }
        for p in &polys {
            if let Some(v) = p.max_var() {
                if v.index() > n {
                    return Err(CoreError::VarOutOfRange { index: v.index(), max: n });
                }
            }
        }
        Ok(BoolSystem { n, polys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// True when every polynomial vanishes at `a`. The assignment must have
    /// the system's width.
    pub fn satisfied_by(&self, a: &Assignment) -> bool {
        assert_eq!(a.n(), self.n, "assignment width does not match the system");
        self.polys.iter().all(|p| !p.eval_bits(a.bits()))
    }

    /// Renames every variable through `o`; zero sets correspond bijectively
    /// under the same renaming.
    pub fn apply_order(&self, o: &VarOrder) -> Result<BoolSystem, CoreError> {
        if o.n() != self.n {
            return Err(CoreError::OrderLength { have: o.n(), want: self.n });
        }
        Ok(BoolSystem {
            n: self.n,
            polys: self.polys.iter().map(|p| p.rename(o)).collect(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let mut n: Option<usize> = None;
        let mut polys = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if n.is_none() {
                n = Some(parse_header(trimmed, line)?);
                continue;
            }
            // Strip comments; a line may carry a trailing one.
            let body = trimmed.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            polys.push(parse_poly(body, n.unwrap(), line)?);
        }
        let n = n.ok_or_else(|| CoreError::parse(1, "missing `# vars: <n>` header"))?;
        BoolSystem::new(n, polys)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# vars: {}\n", self.n);
        for p in &self.polys {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for BoolSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<usize, CoreError> {
    let err = || CoreError::parse(lineno, format!("expected `# vars: <n>` header, found `{line}`"));
    let rest = line.strip_prefix('#').ok_or_else(err)?.trim_start();
    let count = rest.strip_prefix("vars:").ok_or_else(err)?.trim();
    let n: usize = count
        .parse()
        .map_err(|_| CoreError::parse(lineno, format!("invalid variable count `{count}`")))?;
    if n > MAX_VARS {
        return Err(CoreError::parse(
            lineno,
            format!("variable count {n} exceeds the supported maximum {MAX_VARS}"),
        ));
    }
    Ok(n)
}

fn parse_poly(body: &str, n: usize, lineno: usize) -> Result<Poly, CoreError> {
    if body == "0" {
        return Ok(Poly::zero());
    }
    let mut terms = Vec::new();
    for term in body.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(CoreError::parse(lineno, "empty term"));
        }
        if term == "1" {
            terms.push(Monomial::ONE);
            continue;
        }
        let mut m = Monomial::ONE;
        for factor in term.split('*') {
            let factor = factor.trim();
            let digits = factor
                .strip_prefix('x')
                .ok_or_else(|| CoreError::parse(lineno, format!("unknown token `{factor}`")))?;
            let index: usize = digits.parse().map_err(|_| {
                CoreError::parse(lineno, format!("invalid variable index `{factor}`"))
            })?;
            if index == 0 || index > n {
                return Err(CoreError::parse(
                    lineno,
                    format!("variable x{index} out of range for n = {n}"),
                ));
            }
            // A repeated factor folds idempotently.
            m = m.with(VarId::new(index));
        }
        terms.push(m);
    }
    // Duplicate terms cancel mod 2 during canonicalization.
    Ok(Poly::from_monomials(terms))
}
