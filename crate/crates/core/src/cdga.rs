//! Free commutative differential graded algebras: differentials stored on
//! generators, derivations, morphisms, tensor products and partial
//! derivatives.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::algebra::{rat, Generator, GeneratorTable, Monomial, Origin, Poly, Rational};
use crate::error::{Error, Result};

/// Applies the derivation of degree `degree` determined by `values` on
/// generators, extended by the Koszul rule
/// `θ(ab) = θ(a) b + (-1)^{|θ||a|} a θ(b)`.
pub fn apply_derivation(table: &GeneratorTable, degree: i32, values: &[Poly], a: &Poly) -> Poly {
    let mut out = Poly::zero();
    let odd = degree.rem_euclid(2) == 1;
    for (m, c) in a.terms() {
        for i in m.support().collect::<Vec<_>>() {
            let theta = &values[i];
            if theta.is_zero() {
                continue;
            }
            let e = m.exponent(i);
            let mut left = m.exponents().to_vec();
            let mut right = m.exponents().to_vec();
            left[i] -= 1;
            for x in &mut left[i + 1..] {
                *x = 0;
            }
            for x in &mut right[..=i] {
                *x = 0;
            }
            let left = table.monomial_from_exponents(left).expect("sub-monomial");
            let right = table.monomial_from_exponents(right).expect("sub-monomial");
            let mut coeff = c * rat(e as i64);
            if odd && left.degree() % 2 == 1 {
                coeff = -coeff;
            }
            let lhs = table.mul_monomial_poly(&left, theta);
            let term = table.mul(&lhs, &Poly::from_monomial(right, Rational::one()));
            out += &term.scale(&coeff);
        }
    }
    out
}

/// A derivation given by its values on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub degree: i32,
    pub values: Vec<Poly>,
}

impl Derivation {
    pub fn new(table: &GeneratorTable, degree: i32, values: Vec<Poly>) -> Result<Self> {
        if values.len() != table.len() {
            return Err(Error::Structural(format!(
                "derivation has {} values for {} generators",
                values.len(),
                table.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            table.check(v)?;
            let want = table.degree(i) as i32 + degree;
            if !v.is_zero() && v.degree().map(|d| d as i32) != Some(want) {
                return Err(Error::ModelConstruction(format!(
                    "derivation value on {} is not homogeneous of degree {}",
                    table.generator(i).name,
                    want
                )));
            }
        }
        Ok(Self { degree, values })
    }

    pub fn apply(&self, table: &GeneratorTable, a: &Poly) -> Poly {
        apply_derivation(table, self.degree, &self.values, a)
    }
}

/// A free graded-commutative algebra with a differential of degree +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cdga {
    label: String,
    table: Arc<GeneratorTable>,
    d: Vec<Poly>,
}

impl Cdga {
    /// Builds the algebra, checking that `d` raises degree by one on every
    /// generator. `d² = 0` is checked separately by [`Cdga::check_d_squared`].
    pub fn new(label: impl Into<String>, table: GeneratorTable, d: Vec<Poly>) -> Result<Self> {
        Self::with_table(label, Arc::new(table), d)
    }

    pub fn with_table(
        label: impl Into<String>,
        table: Arc<GeneratorTable>,
        d: Vec<Poly>,
    ) -> Result<Self> {
        let label = label.into();
        if d.len() != table.len() {
            return Err(Error::ModelConstruction(format!(
                "{label}: differential given on {} of {} generators",
                d.len(),
                table.len()
            )));
        }
        for (i, v) in d.iter().enumerate() {
            table.check(v)?;
            if !v.is_homogeneous_of(table.degree(i) + 1) {
                return Err(Error::ModelConstruction(format!(
                    "{label}: d{} is not homogeneous of degree {}",
                    table.generator(i).name,
                    table.degree(i) + 1
                )));
            }
        }
        Ok(Self { label, table, d })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn table(&self) -> &GeneratorTable {
        &self.table
    }

    pub fn table_arc(&self) -> Arc<GeneratorTable> {
        Arc::clone(&self.table)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn d_gen(&self, i: usize) -> &Poly {
        &self.d[i]
    }

    pub fn d_values(&self) -> &[Poly] {
        &self.d
    }

    pub fn gen(&self, i: usize) -> Poly {
        self.table.gen(i)
    }

    pub fn gen_by_name(&self, name: &str) -> Option<Poly> {
        self.table.index_of(name).map(|i| self.table.gen(i))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.table.mul(a, b)
    }

    pub fn format(&self, a: &Poly) -> String {
        self.table.format(a)
    }

    pub fn differential(&self, a: &Poly) -> Poly {
        apply_derivation(&self.table, 1, &self.d, a)
    }

    /// Returns the first generator with `d(d g) ≠ 0` and the residue, or
    /// `None` if `d² = 0`. Since `d²` is a derivation, generators suffice.
    pub fn check_d_squared(&self) -> Option<(usize, Poly)> {
        (0..self.len()).find_map(|i| {
            let dd = self.differential(&self.d[i]);
            (!dd.is_zero()).then_some((i, dd))
        })
    }

    pub fn even_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.table.is_odd(i)).collect()
    }

    pub fn odd_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.table.is_odd(i)).collect()
    }

    /// `d(V^even) = 0` and `d(V^odd) ⊂ ∧V^even`.
    pub fn is_pure(&self) -> bool {
        (0..self.len()).all(|i| {
            if self.table.is_odd(i) {
                self.d[i].uses_only(|j| !self.table.is_odd(j))
            } else {
                self.d[i].is_zero()
            }
        })
    }

    /// An ordering `z_1..z_r` of the generators with `d z_t ∈ ∧V(t-1)`.
    /// Even generators followed by odd ones (each in input order) is used when
    /// it qualifies; otherwise the lowest-index-first topological order.
    pub fn filtration_order(&self) -> Result<Vec<usize>> {
        let mut parity_order = self.even_indices();
        parity_order.extend(self.odd_indices());
        if self.is_filtration(&parity_order) {
            return Ok(parity_order);
        }
        let n = self.len();
        let deps: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut used = vec![false; n];
                for (m, _) in self.d[i].terms() {
                    for j in m.support() {
                        used[j] = true;
                    }
                }
                (0..n).filter(|&j| used[j]).collect()
            })
            .collect();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|&i| !placed[i] && deps[i].iter().all(|&j| placed[j]));
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => {
                    return Err(Error::ModelConstruction(format!(
                        "{}: no ordering of generators with d z_t in the subalgebra on earlier generators",
                        self.label
                    )))
                }
            }
        }
        Ok(order)
    }

    pub fn is_filtration(&self, order: &[usize]) -> bool {
        let mut position = vec![0; self.len()];
        for (t, &i) in order.iter().enumerate() {
            position[i] = t;
        }
        order.iter().enumerate().all(|(t, &i)| {
            self.d[i]
                .terms()
                .all(|(m, _)| m.support().all(|j| position[j] < t))
        })
    }

    /// The same algebra with generators listed in `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Cdga> {
        let gens: Vec<Generator> = order
            .iter()
            .map(|&i| self.table.generator(i).clone())
            .collect();
        let table = GeneratorTable::new(gens)?;
        let mut new_index = vec![0; self.len()];
        for (t, &i) in order.iter().enumerate() {
            new_index[i] = t;
        }
        let d = order
            .iter()
            .map(|&i| transport(&self.d[i], &table, &new_index))
            .collect();
        Cdga::new(self.label.clone(), table, d)
    }

    /// The tensor product with generator copies tagged 1 and 2. Names get the
    /// suffixes `_1` and `_2`.
    pub fn tensor(&self, other: &Cdga) -> Result<Cdga> {
        let mut gens = Vec::with_capacity(self.len() + other.len());
        for (copy, alg) in [(1u32, self), (2u32, other)] {
            for g in alg.table.generators() {
                gens.push(Generator::new(
                    format!("{}_{}", g.name, copy),
                    g.degree,
                    Origin::TensorCopy(copy, Box::new(g.origin.clone())),
                ));
            }
        }
        let table = GeneratorTable::new(gens)?;
        let left: Vec<usize> = (0..self.len()).collect();
        let right: Vec<usize> = (self.len()..self.len() + other.len()).collect();
        let mut d: Vec<Poly> = self.d.iter().map(|p| table.reindex(p, &left)).collect();
        d.extend(other.d.iter().map(|p| table.reindex(p, &right)));
        Cdga::new(format!("{}⊗{}", self.label, other.label), table, d)
    }
}

/// Moves a polynomial to another table along an arbitrary injective index
/// map, reordering factors with their Koszul signs.
pub fn transport(p: &Poly, target: &GeneratorTable, map: &[usize]) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut img = target.one();
        for i in m.support() {
            let g = target.gen(map[i]);
            img = target.mul(&img, &target.pow(&g, m.exponent(i) as u32));
        }
        out += &img.scale(c);
    }
    out
}

/// `∂f/∂x` for `f` in the even subalgebra.
pub fn partial_derivative(table: &GeneratorTable, f: &Poly, x: usize) -> Result<Poly> {
    if table.is_odd(x) {
        return Err(Error::Domain(format!(
            "partial derivative with respect to odd generator {}",
            table.generator(x).name
        )));
    }
    if !f.uses_only(|j| !table.is_odd(j)) {
        return Err(Error::Domain(
            "partial derivative of an element involving odd generators".into(),
        ));
    }
    let mut out = Poly::zero();
    for (m, c) in f.terms() {
        let e = m.exponent(x);
        if e == 0 {
            continue;
        }
        let mut exps = m.exponents().to_vec();
        exps[x] -= 1;
        let mono = table.monomial_from_exponents(exps).expect("even monomial");
        out.add_term(mono, c * rat(e as i64));
    }
    Ok(out)
}

/// A degree-zero algebra map given on generators.
#[derive(Clone, Debug)]
pub struct CdgaMorphism {
    pub source: Arc<Cdga>,
    pub target: Arc<Cdga>,
    values: Vec<Poly>,
}

impl CdgaMorphism {
    /// Builds the map and checks degrees and `φ d = d φ` on generators.
    pub fn new(source: Arc<Cdga>, target: Arc<Cdga>, values: Vec<Poly>) -> Result<Self> {
        let m = Self::unchecked(source, target, values)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds the map checking only shapes and degrees.
    pub fn unchecked(source: Arc<Cdga>, target: Arc<Cdga>, values: Vec<Poly>) -> Result<Self> {
        if values.len() != source.len() {
            return Err(Error::Structural(format!(
                "morphism has {} values for {} generators",
                values.len(),
                source.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            target.table().check(v)?;
            if !v.is_homogeneous_of(source.table().degree(i)) {
                return Err(Error::ModelConstruction(format!(
                    "morphism {} -> {}: image of {} has the wrong degree",
                    source.label(),
                    target.label(),
                    source.table().generator(i).name
                )));
            }
        }
        Ok(Self {
            source,
            target,
            values,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.source.len() {
            let lhs = self.apply(self.source.d_gen(i));
            let rhs = self.target.differential(&self.values[i]);
            if lhs != rhs {
                return Err(Error::ModelConstruction(format!(
                    "morphism {} -> {} does not commute with d on {}",
                    self.source.label(),
                    self.target.label(),
                    self.source.table().generator(i).name
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[Poly] {
        &self.values
    }

    pub fn apply_monomial(&self, m: &Monomial) -> Poly {
        let t = self.target.table();
        let mut img = t.one();
        for i in m.support() {
            img = t.mul(&img, &t.pow(&self.values[i], m.exponent(i) as u32));
            if img.is_zero() {
                break;
            }
        }
        img
    }

    pub fn apply(&self, a: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in a.terms() {
            if c.is_zero() {
                continue;
            }
            out += &self.apply_monomial(m).scale(c);
        }
        out
    }

    pub fn compose(&self, after: &CdgaMorphism) -> Result<CdgaMorphism> {
        if !Arc::ptr_eq(&self.target, &after.source) && *self.target != *after.source {
            return Err(Error::Structural("composing non-matching morphisms".into()));
        }
        let values = self.values.iter().map(|v| after.apply(v)).collect();
        CdgaMorphism::unchecked(Arc::clone(&self.source), Arc::clone(&after.target), values)
    }

    pub fn is_identity(&self) -> bool {
        self.source.table() == self.target.table()
            && self
                .values
                .iter()
                .enumerate()
                .all(|(i, v)| *v == self.target.gen(i))
    }
}
