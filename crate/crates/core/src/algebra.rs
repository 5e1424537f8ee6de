//! Free graded-commutative algebras over the rationals.
//!
//! A [`GeneratorTable`] freezes an ordered list of graded generators. Elements
//! are [`Poly`] values: sparse rational combinations of [`Monomial`]s, each an
//! exponent vector over the table. A monomial always denotes the ordered
//! product `g_0^{e_0} g_1^{e_1} ...` in table order, so the only place a Koszul
//! sign can appear is when two monomials are multiplied.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn sign(negative: bool) -> Rational {
    if negative {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Renders a rational as `n` or `n/d`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Where a generator came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Origin {
    Base,
    /// `s^j v` in a sphere model.
    Suspended(u32),
    /// `s^k v` in a disk model.
    Disk(u32),
    /// The `i`-th copy in a tensor product.
    TensorCopy(u32, Box<Origin>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
    pub origin: Origin,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32, origin: Origin) -> Self {
        Self {
            name: name.into(),
            degree,
            origin,
        }
    }

    pub fn base(name: impl Into<String>, degree: u32) -> Self {
        Self::new(name, degree, Origin::Base)
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// A frozen, ordered set of graded generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorTable {
    gens: Vec<Generator>,
    by_name: HashMap<String, usize>,
}

impl GeneratorTable {
    pub fn new(gens: Vec<Generator>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(gens.len());
        for (i, g) in gens.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::ModelConstruction(format!(
                    "generator {} has degree 0",
                    g.name
                )));
            }
            if g.origin == Origin::Base && g.degree < 2 {
                return Err(Error::ModelConstruction(format!(
                    "base generator {} has degree {} (need at least 2)",
                    g.name, g.degree
                )));
            }
            if by_name.insert(g.name.clone(), i).is_some() {
                return Err(Error::ModelConstruction(format!(
                    "duplicate generator name {}",
                    g.name
                )));
            }
        }
        Ok(Self { gens, by_name })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator(&self, i: usize) -> &Generator {
        &self.gens[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.gens[i].degree
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.gens[i].is_odd()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn max_degree(&self) -> u32 {
        self.gens.iter().map(|g| g.degree).max().unwrap_or(0)
    }

    pub fn unit_monomial(&self) -> Monomial {
        Monomial {
            exps: vec![0; self.len()].into_boxed_slice(),
            degree: 0,
        }
    }

    /// Builds a monomial from `(generator, exponent)` pairs. Odd generators may
    /// appear at most once; returns `None` if that would be violated.
    pub fn monomial(&self, factors: &[(usize, u16)]) -> Option<Monomial> {
        let mut exps = vec![0u16; self.len()];
        for &(i, e) in factors {
            exps[i] += e;
        }
        self.monomial_from_exponents(exps)
    }

    pub fn monomial_from_exponents(&self, exps: Vec<u16>) -> Option<Monomial> {
        assert_eq!(exps.len(), self.len(), "exponent vector length");
        let mut degree = 0;
        for (i, &e) in exps.iter().enumerate() {
            if e > 1 && self.is_odd(i) {
                return None;
            }
            degree += e as u32 * self.degree(i);
        }
        Some(Monomial {
            exps: exps.into_boxed_slice(),
            degree,
        })
    }

    pub fn one(&self) -> Poly {
        Poly::from_monomial(self.unit_monomial(), Rational::one())
    }

    pub fn constant(&self, c: Rational) -> Poly {
        Poly::from_monomial(self.unit_monomial(), c)
    }

    pub fn gen(&self, i: usize) -> Poly {
        let m = self.monomial(&[(i, 1)]).expect("single generator");
        Poly::from_monomial(m, Rational::one())
    }

    /// Product of two monomials with its Koszul sign, or `None` when an odd
    /// generator would be squared.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        debug_assert_eq!(a.exps.len(), self.len());
        debug_assert_eq!(b.exps.len(), self.len());
        let mut negative = false;
        // odd generators of `a` with index greater than the current position
        let mut odd_in_a_after = 0usize;
        let mut exps = vec![0u16; self.len()];
        for i in (0..self.len()).rev() {
            let (ea, eb) = (a.exps[i], b.exps[i]);
            if self.is_odd(i) {
                if ea > 0 && eb > 0 {
                    return None;
                }
                if eb > 0 && odd_in_a_after % 2 == 1 {
                    negative = !negative;
                }
                if ea > 0 {
                    odd_in_a_after += 1;
                }
            }
            exps[i] = ea + eb;
        }
        Some((
            negative,
            Monomial {
                exps: exps.into_boxed_slice(),
                degree: a.degree + b.degree,
            },
        ))
    }

    /// Graded-commutative product; both operands must be over this table.
    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let c = if neg { -(ca * cb) } else { ca * cb };
                    accumulate(&mut out, m, c);
                }
            }
        }
        Poly { terms: out }
    }

    /// Checked product: errors if either operand was built over a table of a
    /// different size.
    pub fn multiply(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn check(&self, a: &Poly) -> Result<()> {
        match a.terms.keys().find(|m| m.exps.len() != self.len()) {
            Some(m) => Err(Error::Structural(format!(
                "element over {} generators used with a table of {}",
                m.exps.len(),
                self.len()
            ))),
            None => Ok(()),
        }
    }

    pub fn pow(&self, a: &Poly, e: u32) -> Poly {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn mul_monomial_poly(&self, m: &Monomial, p: &Poly) -> Poly {
        self.mul(&Poly::from_monomial(m.clone(), Rational::one()), p)
    }

    /// All monomials of total degree `n`, in canonical order.
    pub fn basis_of_degree(&self, n: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u16; self.len()];
        self.enumerate(0, n, &mut exps, &mut out);
        out
    }

    fn enumerate(&self, i: usize, remaining: u32, exps: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == self.len() {
            if remaining == 0 {
                out.push(Monomial {
                    exps: exps.clone().into_boxed_slice(),
                    degree: exps
                        .iter()
                        .enumerate()
                        .map(|(j, &e)| e as u32 * self.degree(j))
                        .sum(),
                });
            }
            return;
        }
        let d = self.degree(i);
        let max_e = if self.is_odd(i) { 1 } else { remaining / d };
        let max_e = max_e.min(remaining / d);
        for e in (0..=max_e).rev() {
            exps[i] = e as u16;
            self.enumerate(i + 1, remaining - e * d, exps, out);
        }
        exps[i] = 0;
    }

    /// Moves `p` into this table along an order-preserving index map
    /// `i ↦ map[i]`. Order preservation means no Koszul signs arise.
    pub fn reindex(&self, p: &Poly, map: &[usize]) -> Poly {
        debug_assert!(map.windows(2).all(|w| w[0] < w[1]), "monotone index map");
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let mut exps = vec![0u16; self.len()];
            for i in m.support() {
                exps[map[i]] = m.exponent(i);
            }
            let mono = self.monomial_from_exponents(exps).expect("reindexed monomial");
            out.add_term(mono, c.clone());
        }
        out
    }

    /// Views an element of a table that is a prefix of this one.
    pub fn embed(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let mut exps = m.exponents().to_vec();
            assert!(exps.len() <= self.len(), "embedding into a smaller table");
            exps.resize(self.len(), 0);
            out.add_term(
                self.monomial_from_exponents(exps).expect("embedded monomial"),
                c.clone(),
            );
        }
        out
    }

    /// The inverse of [`GeneratorTable::embed`]: views an element as living
    /// over this shorter prefix table, or `None` if it uses later generators.
    pub fn restrict(&self, p: &Poly) -> Option<Poly> {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let exps = m.exponents();
            if exps[self.len()..].iter().any(|&e| e > 0) {
                return None;
            }
            out.add_term(
                self.monomial_from_exponents(exps[..self.len()].to_vec())?,
                c.clone(),
            );
        }
        Some(out)
    }

    /// Human-readable rendering, e.g. `2 x^2 y - 1/2 z`.
    pub fn format(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in p.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if negative {
                    s.push('-');
                }
            } else {
                s.push_str(if negative { " - " } else { " + " });
            }
            let body = self.format_monomial(m);
            if body.is_empty() {
                s.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                s.push_str(&body);
            } else {
                let _ = write!(s, "{} {}", format_rational(&abs), body);
            }
        }
        s
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.gens[i].name.clone()),
                _ => parts.push(format!("{}^{}", self.gens[i].name, e)),
            }
        }
        parts.join(" ")
    }

    /// Dimensions of the degree pieces `0..=max` read off the Hilbert series
    /// `prod_even 1/(1-t^a) * prod_odd (1+t^b)`.
    pub fn hilbert_dims(&self, max: u32) -> Vec<usize> {
        let mut series = vec![0usize; max as usize + 1];
        series[0] = 1;
        for g in &self.gens {
            let d = g.degree as usize;
            if g.is_odd() {
                for n in (d..series.len()).rev() {
                    series[n] += series[n - d];
                }
            } else {
                for n in d..series.len() {
                    series[n] += series[n - d];
                }
            }
        }
        series
    }
}

/// An exponent vector over a generator table, with cached total degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Box<[u16]>,
    degree: u32,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Indices of generators present, in table order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    /// Splits into the factor on generators `< at` and the factor on `>= at`.
    /// The product of the two halves, in that order, is this monomial with no
    /// sign.
    pub fn split_at(&self, at: usize, table: &GeneratorTable) -> (Monomial, Monomial) {
        let mut lo = self.exps.to_vec();
        let mut hi = self.exps.to_vec();
        for e in &mut lo[at..] {
            *e = 0;
        }
        for e in &mut hi[..at] {
            *e = 0;
        }
        (
            table.monomial_from_exponents(lo).expect("sub-monomial"),
            table.monomial_from_exponents(hi).expect("sub-monomial"),
        )
    }
}

impl Ord for Monomial {
    /// Graded first; within a degree, larger exponents on earlier generators
    /// come first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn accumulate(map: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// A rational linear combination of monomials. No zero coefficients are
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[allow(clippy::len_without_is_empty)] // is_zero plays that role
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        accumulate(&mut self.terms, m, c);
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// The common degree of all terms, or `None` if zero or inhomogeneous.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.degree);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    pub fn is_homogeneous_of(&self, n: u32) -> bool {
        self.terms.keys().all(|m| m.degree == n)
    }

    /// The smallest monomial in canonical order, with its coefficient.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    /// Keeps the terms whose monomial satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn uses_only(&self, allowed: impl Fn(usize) -> bool) -> bool {
        self.terms.keys().all(|m| m.support().all(&allowed))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}
