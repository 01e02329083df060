//! Boolean polynomials in algebraic normal form.
//!
//! Everything lives in the quotient ring 𝔽₂[x₁..xₙ]/⟨xᵢ²+xᵢ⟩, so polynomials
//! are multilinear: a monomial is a set of variables (the empty set being the
//! constant 1) and a polynomial is an XOR-sum of distinct monomials. Values
//! are canonicalized on construction, which makes structural equality coincide
//! with semantic equality and keeps formatting deterministic.

use std::cmp::Ordering::{self, Equal, Greater, Less};
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;
use crate::order::VarOrder;

/// Hard cap on the variable count; monomials pack one bit per variable.
pub const MAX_VARS: usize = 128;

/// 1-based variable identifier `x1..x128`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(u32);

impl VarId {
    /// Panics unless `1 <= index <= MAX_VARS`; use [`VarId::try_new`] for
    /// untrusted input.
    pub fn new(index: usize) -> Self {
        assert!(
            (1..=MAX_VARS).contains(&index),
            "variable index {index} outside 1..={MAX_VARS}"
        );
        VarId(index as u32)
    }

    pub fn try_new(index: usize) -> Result<Self, CoreError> {
        if (1..=MAX_VARS).contains(&index) {
            Ok(VarId(index as u32))
        } else {
            Err(CoreError::VarOutOfRange { index, max: MAX_VARS })
        }
    }

    /// 1-based index.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn bit(self) -> u32 {
        self.0 - 1
    }

    pub(crate) fn from_bit(bit: u32) -> Self {
        VarId(bit + 1)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Product of distinct variables; the empty product is the constant 1.
///
/// Bit `i` of the backing word stands for `x(i+1)`. The product of two
/// monomials is the union of their variable sets, which is exactly the
/// idempotent reduction x·x = x.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn var(v: VarId) -> Self {
        Monomial(1u128 << v.bit())
    }

    pub fn from_vars<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        let mut mask = 0u128;
        for v in vars {
            mask |= 1u128 << v.bit();
        }
        Monomial(mask)
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: VarId) -> bool {
        self.0 >> v.bit() & 1 == 1
    }

    /// Set union of the variable sets: xᵢ² collapses to xᵢ structurally.
    pub fn product(self, other: Self) -> Self {
        Monomial(self.0 | other.0)
    }

    pub fn with(self, v: VarId) -> Self {
        Monomial(self.0 | 1u128 << v.bit())
    }

    pub fn without(self, v: VarId) -> Self {
        Monomial(self.0 & !(1u128 << v.bit()))
    }

    pub fn max_var(self) -> Option<VarId> {
        if self.0 == 0 {
            None
        } else {
            Some(VarId(128 - self.0.leading_zeros()))
        }
    }

    /// Ascending variable iterator.
    pub fn vars(self) -> impl Iterator<Item = VarId> {
        let mut mask = self.0;
        std::iter::from_fn(move || {
            if mask == 0 {
                return None;
            }
            let b = mask.trailing_zeros();
            mask &= mask - 1;
            Some(VarId::from_bit(b))
        })
    }

    /// True when every variable of the monomial is set in `bits`.
    pub fn satisfied_by(self, bits: u128) -> bool {
        self.0 & bits == self.0
    }

    pub(crate) fn mask(self) -> u128 {
        self.0
    }

    pub(crate) fn from_mask(mask: u128) -> Self {
        Monomial(mask)
    }

    /// Degree-then-lexicographic comparison under a variable ordering, with
    /// the highest distinct renamed variable breaking degree ties. The
    /// greatest element of a polynomial under this order is its leading
    /// monomial.
    pub fn deglex_cmp(self, other: Self, order: &VarOrder) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| order.rename_mask(self.0).cmp(&order.rename_mask(other.0)))
    }
}

impl Ord for Monomial {
    /// Canonical term order used for storage and formatting: higher degree
    /// first, degree ties resolved by ascending variable lists compared
    /// lexicographically (`x1*x4` before `x2*x3`). A sorted term vector reads
    /// in the textbook way, `x1*x2 + x3 + 1`.
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            if self.0 == other.0 {
                return Equal;
            }
            let low = {
                let diff = self.0 ^ other.0;
                diff & diff.wrapping_neg()
            };
            // Whichever term owns the smallest non-shared variable sorts first.
            if self.0 & low != 0 {
                Less
            } else {
                Greater
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for v in self.vars() {
            if !first {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// XOR-sum of distinct monomials, stored strictly ascending in the canonical
/// term order. The empty sum is the zero polynomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: Vec<Monomial>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { terms: vec![Monomial::ONE] }
    }

    pub fn var(v: VarId) -> Self {
        Poly { terms: vec![Monomial::var(v)] }
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Poly { terms: vec![m] }
    }

    /// XOR-fold of the given monomials: pairs cancel over 𝔽₂.
    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(monomials: I) -> Self {
        let mut v: Vec<Monomial> = monomials.into_iter().collect();
        v.sort_unstable();
        let mut terms = Vec::with_capacity(v.len());
        let mut i = 0;
        while i < v.len() {
            let mut j = i + 1;
            while j < v.len() && v[j] == v[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                terms.push(v[i]);
            }
            i = j;
        }
        Poly { terms }
    }

    fn from_sorted(terms: Vec<Monomial>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0] < w[1]), "term vector not canonical");
        Poly { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_one()
    }

    /// Constants are exactly 0 and 1 in canonical ANF.
    pub fn is_constant(&self) -> bool {
        self.is_zero() || self.is_one()
    }

    fn support_mask(&self) -> u128 {
        self.terms.iter().fold(0u128, |acc, m| acc | m.mask())
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.support_mask() >> v.bit() & 1 == 1
    }

    /// Greatest variable occurring anywhere in the polynomial (the lvar under
    /// the fixed internal order x1 ≺ … ≺ xn).
    pub fn max_var(&self) -> Option<VarId> {
        Monomial(self.support_mask()).max_var()
    }

    /// Greatest variable of the polynomial under `order` (the class variable).
    pub fn max_var_under(&self, order: &VarOrder) -> Option<VarId> {
        Monomial(self.support_mask())
            .vars()
            .max_by_key(|v| order.rank(*v))
    }

    /// Symmetric difference of term sets.
    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Equal => {
                    // x + x = 0
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly::from_sorted(out)
    }

    /// Distributes over terms; duplicate products cancel mod 2.
    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &a in &self.terms {
            for &b in &other.terms {
                prods.push(a.product(b));
            }
        }
        Poly::from_monomials(prods)
    }

    /// Splits into (I, U) with p = I·v + U: `I` collects the terms containing
    /// `v` with `v` removed, `U` is p with `v` set to 0. Neither part
    /// mentions `v`.
    pub fn split_on(&self, v: VarId) -> (Poly, Poly) {
        let mut i_terms = Vec::new();
        let mut u_terms = Vec::new();
        for &m in &self.terms {
            if m.contains(v) {
                i_terms.push(m.without(v));
            } else {
                u_terms.push(m);
            }
        }
        // Removing a variable shared by every collected term keeps the
        // canonical order: degrees drop uniformly and pairwise symmetric
        // differences are unchanged.
        (Poly::from_sorted(i_terms), Poly::from_sorted(u_terms))
    }

    /// Leading split under `order`: (x_c, I, U) with x_c the class variable
    /// and p = I·x_c + U. Errors on constants, which have no class variable.
    pub fn leading_split(&self, order: &VarOrder) -> Result<(VarId, Poly, Poly), CoreError> {
        let xc = self
            .max_var_under(order)
            .ok_or(CoreError::ConstantLeadingSplit)?;
        let (i, u) = self.split_on(xc);
        Ok((xc, i, u))
    }

    /// Total degree; `None` is the distinguished marker for the zero
    /// polynomial (conventionally −∞).
    pub fn tdeg(&self) -> Option<usize> {
        self.terms.iter().map(|m| m.degree()).max()
    }

    /// Leading monomial under degree-then-lexicographic comparison in `order`.
    pub fn lm(&self, order: &VarOrder) -> Result<Monomial, CoreError> {
        self.terms
            .iter()
            .copied()
            .max_by(|a, b| a.deglex_cmp(*b, order))
            .ok_or(CoreError::LmOfZero)
    }

    /// Replaces `v` by `q` in one pass: p = I·v + U becomes I·q + U. The
    /// result is v-free whenever `q` is; either way it evaluates like p with
    /// the value of `q` wired into `v`.
    pub fn substitute(&self, v: VarId, q: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let (with_v, rest) = self.split_on(v);
        with_v.mul(q).add(&rest)
    }

    pub(crate) fn eval_bits(&self, bits: u128) -> bool {
        self.terms
            .iter()
            .fold(false, |acc, m| acc ^ m.satisfied_by(bits))
    }

    /// Evaluates at a total assignment; errors if the assignment does not
    /// cover every variable of the polynomial.
    pub fn eval(&self, a: &Assignment) -> Result<bool, CoreError> {
        if let Some(v) = self.max_var() {
            if a.n() < v.index() {
                return Err(CoreError::AssignmentTooShort { have: a.n(), need: v.index() });
            }
        }
        Ok(self.eval_bits(a.bits()))
    }

    /// Renames every variable through `order`; bijectivity means no terms
    /// collide.
    pub fn rename(&self, order: &VarOrder) -> Poly {
        Poly::from_monomials(
            self.terms
                .iter()
                .map(|m| Monomial::from_mask(order.rename_mask(m.mask()))),
        )
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::add(self, rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

/// Total assignment to x1..xn, packed with bit i-1 holding xᵢ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    bits: u128,
    n: usize,
}

impl Assignment {
    /// Bits above position n-1 are masked off.
    pub fn new(bits: u128, n: usize) -> Self {
        assert!(n <= MAX_VARS, "assignment width {n} exceeds {MAX_VARS}");
        let mask = if n == MAX_VARS { u128::MAX } else { (1u128 << n) - 1 };
        Assignment { bits: bits & mask, n }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut bits = 0u128;
        for (i, &b) in values.iter().enumerate() {
            if b {
                bits |= 1u128 << i;
            }
        }
        Assignment::new(bits, values.len())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn get(&self, v: VarId) -> bool {
        assert!(v.index() <= self.n, "{v} outside assignment of width {}", self.n);
        self.bits >> v.bit() & 1 == 1
    }

    /// Leftmost character is x1.
    pub fn to_bitstring(&self) -> String {
        (0..self.n)
            .map(|i| if self.bits >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self, CoreError> {
        if s.len() > MAX_VARS {
            return Err(CoreError::VarOutOfRange { index: s.len(), max: MAX_VARS });
        }
        let mut bits = 0u128;
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1u128 << i,
                '0' => {}
                other => {
                    return Err(CoreError::parse(1, format!("invalid bit character `{other}`")));
                }
            }
        }
        Ok(Assignment { bits, n: s.len() })
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Assignment::from_bitstring(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VarId {
        VarId::new(i)
    }

    fn m(vars: &[usize]) -> Monomial {
        Monomial::from_vars(vars.iter().map(|&i| v(i)))
    }

    fn p(terms: &[&[usize]]) -> Poly {
        Poly::from_monomials(terms.iter().map(|t| m(t)))
    }

    #[test]
    fn monomial_product_is_idempotent() {
        assert_eq!(m(&[1]).product(m(&[1])), m(&[1]));
        assert_eq!(m(&[1, 2]).product(m(&[2, 3])), m(&[1, 2, 3]));
        assert_eq!(Monomial::ONE.product(m(&[4])), m(&[4]));
    }

    #[test]
    fn canonical_term_order_sorts_degree_then_lex() {
        let mut terms = vec![Monomial::ONE, m(&[2, 3]), m(&[3]), m(&[1, 4]), m(&[1])];
        terms.sort();
        assert_eq!(terms, vec![m(&[1, 4]), m(&[2, 3]), m(&[1]), m(&[3]), Monomial::ONE]);
    }

    #[test]
    fn add_cancels_over_f2() {
        // (x1*x2 + x3) + (x3 + 1) = x1*x2 + 1
        let a = p(&[&[1, 2], &[3]]);
        let b = p(&[&[3], &[]]);
        assert_eq!(a.add(&b), p(&[&[1, 2], &[]]));
        assert_eq!(a.add(&a), Poly::zero());
        assert_eq!(a.add(&Poly::zero()), a);
    }

    #[test]
    fn mul_applies_idempotent_reduction() {
        let x1 = Poly::var(v(1));
        assert_eq!(x1.mul(&x1), x1);
        // (x1 + 1)·x1 = x1·x1 + x1 = 0
        let x1p1 = p(&[&[1], &[]]);
        assert_eq!(x1p1.mul(&x1), Poly::zero());
        // (x2*x4 + x4)·x2 = x2*x4 + x2*x4 = 0
        let f = p(&[&[2, 4], &[4]]);
        let x2 = Poly::var(v(2));
        assert_eq!(f.mul(&x2), Poly::zero());
    }

    #[test]
    fn mul_matches_truth_tables_exhaustively() {
        // Deterministic cross-check of ring semantics against pointwise AND.
        let polys = [
            p(&[&[1, 2], &[3], &[]]),
            p(&[&[2, 3], &[1]]),
            p(&[&[1], &[2], &[3]]),
            Poly::one(),
            Poly::zero(),
        ];
        for a in &polys {
            for b in &polys {
                let prod = a.mul(b);
                let sum = a.add(b);
                for bits in 0u128..8 {
                    assert_eq!(prod.eval_bits(bits), a.eval_bits(bits) & b.eval_bits(bits));
                    assert_eq!(sum.eval_bits(bits), a.eval_bits(bits) ^ b.eval_bits(bits));
                }
            }
        }
    }

    #[test]
    fn eval_handles_constants_and_short_assignments() {
        let f = p(&[&[1, 2], &[3], &[]]);
        let a = Assignment::from_bools(&[true, true, false, false, false]);
        assert_eq!(f.eval(&a), Ok(false));
        assert_eq!(Poly::zero().eval(&a), Ok(false));
        assert_eq!(Poly::one().eval(&a), Ok(true));
        let short = Assignment::from_bools(&[true, true]);
        assert_eq!(
            f.eval(&short),
            Err(CoreError::AssignmentTooShort { have: 2, need: 3 })
        );
    }

    #[test]
    fn substitute_examples() {
        // substitute(x2*x4 + x5, x5 := 0) = x2*x4
        let f2 = p(&[&[2, 4], &[5]]);
        assert_eq!(f2.substitute(v(5), &Poly::zero()), p(&[&[2, 4]]));
        // substitute(x1 + x4 + x5, x5 := x2*x4) = x2*x4 + x1 + x4
        let f3 = p(&[&[1], &[4], &[5]]);
        let q = p(&[&[2, 4]]);
        assert_eq!(f3.substitute(v(5), &q), p(&[&[2, 4], &[1], &[4]]));
        // untouched when v is absent
        assert_eq!(f2.substitute(v(1), &Poly::one()), f2);
    }

    #[test]
    fn leading_split_examples() {
        let id3 = VarOrder::identity(3);
        // x1*x2 + x3: class x3, I = 1, U = x1*x2
        let f = p(&[&[1, 2], &[3]]);
        let (xc, i, u) = f.leading_split(&id3).unwrap();
        assert_eq!(xc, v(3));
        assert_eq!(i, Poly::one());
        assert_eq!(u, p(&[&[1, 2]]));

        // x1*x2 + x1: class x2, I = x1, U = x1
        let id2 = VarOrder::identity(2);
        let g = p(&[&[1, 2], &[1]]);
        let (xc, i, u) = g.leading_split(&id2).unwrap();
        assert_eq!(xc, v(2));
        assert_eq!(i, Poly::var(v(1)));
        assert_eq!(u, Poly::var(v(1)));

        assert_eq!(
            Poly::one().leading_split(&id2),
            Err(CoreError::ConstantLeadingSplit)
        );
        assert_eq!(
            Poly::zero().leading_split(&id2),
            Err(CoreError::ConstantLeadingSplit)
        );
    }

    #[test]
    fn leading_split_respects_the_ordering() {
        // Under x3 ≺ x2 ≺ x1 the class of x1*x2 + x3 is x1.
        let order = VarOrder::from_one_based(&[3, 2, 1]).unwrap();
        let f = p(&[&[1, 2], &[3]]);
        let (xc, i, u) = f.leading_split(&order).unwrap();
        assert_eq!(xc, v(1));
        assert_eq!(i, Poly::var(v(2)));
        assert_eq!(u, Poly::var(v(3)));
    }

    #[test]
    fn tdeg_and_lm() {
        let id = VarOrder::identity(4);
        let f = p(&[&[1, 2], &[3]]);
        assert_eq!(f.tdeg(), Some(2));
        assert_eq!(Poly::one().tdeg(), Some(0));
        assert_eq!(Poly::zero().tdeg(), None);
        assert_eq!(f.lm(&id), Ok(m(&[1, 2])));
        assert_eq!(Poly::zero().lm(&id), Err(CoreError::LmOfZero));
        // degree ties: the higher variable wins under the identity order
        let g = p(&[&[1, 4], &[2, 3]]);
        assert_eq!(g.lm(&id), Ok(m(&[1, 4])));
    }

    #[test]
    fn display_is_canonical() {
        let f = p(&[&[3], &[], &[1, 2]]);
        assert_eq!(f.to_string(), "x1*x2 + x3 + 1");
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::one().to_string(), "1");
        assert_eq!(p(&[&[2, 3], &[1, 4]]).to_string(), "x1*x4 + x2*x3");
    }

    #[test]
    fn assignment_bitstring_round_trip() {
        let a = Assignment::from_bools(&[true, false, true, true, false]);
        assert_eq!(a.to_bitstring(), "10110");
        assert_eq!(Assignment::from_bitstring("10110").unwrap(), a);
        assert!(a.get(v(1)));
        assert!(!a.get(v(2)));
        assert!(Assignment::from_bitstring("10x").is_err());
    }
}
