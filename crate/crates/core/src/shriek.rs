//! Shriek maps as `S`-linear cocycles `φ: D^k → S^{k-1}`, built one
//! generator at a time, together with the checks that tie them to the
//! Jacobian of a pure model.
//!
//! A map is stored by its values on the free `S`-module basis of `D^k`: the
//! monomials in the disk generators `s^k z_t`. It is extended by
//! `φ(a·ν) = (-1)^{|φ||a|} a·φ(ν)` for `a ∈ S`. Values are known only up to a
//! degree bound; asking for anything above it is an error rather than zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{Generator, GeneratorTable, Monomial, Poly, Rational};
use crate::cdga::{partial_derivative, Cdga};
use crate::error::{Error, Result};
use crate::mapping::{relative_tensor, DiskModel};

/// An `S`-linear map `D^k(t) → S^{k-1}(t)`. Keys and values are elements of
/// the disk algebra's table; values only involve sphere generators.
#[derive(Clone, Debug, PartialEq)]
pub struct SLinearMap {
    stage: usize,
    degree: i64,
    bound: u32,
    values: BTreeMap<Monomial, Poly>,
}

fn sign(negative: bool) -> Rational {
    if negative {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Monomials in the disk generators `s^k z_0 .. s^k z_{stage-1}` of degree at
/// most `bound`, as monomials of the disk algebra.
fn disk_monomials(disk: &DiskModel, stage: usize, bound: u32) -> Vec<Monomial> {
    let table = disk.algebra().table();
    if stage == 0 {
        return vec![table.unit_monomial()];
    }
    let first = disk.disk_index(0);
    let sub = GeneratorTable::new(
        (0..stage)
            .map(|t| table.generator(first + t).clone())
            .collect::<Vec<Generator>>(),
    )
    .expect("disk generators form a table");
    let mut out = Vec::new();
    for n in 0..=bound {
        for m in sub.basis_of_degree(n) {
            let mut exps = vec![0u16; table.len()];
            for i in m.support() {
                exps[first + i] = m.exponent(i);
            }
            out.push(table.monomial_from_exponents(exps).expect("disk monomial"));
        }
    }
    out
}

/// Degree of the `s^k`-part of the largest term of `p`.
fn max_disk_degree(disk: &DiskModel, p: &Poly) -> u32 {
    let table = disk.algebra().table();
    let at = disk.disk_index(0);
    p.terms()
        .map(|(m, _)| m.split_at(at, table).1.degree())
        .max()
        .unwrap_or(0)
}

impl SLinearMap {
    /// `φ_0`: the identity of the ground field, defined on the unit only.
    pub fn identity(disk: &DiskModel) -> Self {
        let table = disk.algebra().table();
        let mut values = BTreeMap::new();
        values.insert(table.unit_monomial(), table.one());
        Self {
            stage: 0,
            degree: 0,
            bound: u32::MAX,
            values,
        }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Values are known on basis monomials of degree at most this.
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn values(&self) -> impl Iterator<Item = (&Monomial, &Poly)> {
        self.values.iter()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            values: self.values.iter().map(|(m, v)| (m.clone(), v.scale(c))).collect(),
            ..self.clone()
        }
    }

    /// The value on a basis monomial.
    pub fn value(&self, nu: &Monomial) -> Result<&Poly> {
        if nu.degree() > self.bound {
            return Err(Error::Bound {
                bound: self.bound,
                required: nu.degree(),
            });
        }
        self.values.get(nu).ok_or_else(|| {
            Error::Structural(format!(
                "basis monomial outside stage {} of the shriek map",
                self.stage
            ))
        })
    }

    /// Evaluates on an arbitrary element of the disk algebra.
    pub fn apply(&self, disk: &DiskModel, p: &Poly) -> Result<Poly> {
        let table = disk.algebra().table();
        let at = disk.disk_index(0);
        let odd_map = self.degree.rem_euclid(2) == 1;
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            let (a, nu) = m.split_at(at, table);
            let v = self.value(&nu)?;
            if v.is_zero() {
                continue;
            }
            let c = c * sign(odd_map && a.degree() % 2 == 1);
            out += &table.mul_monomial_poly(&a, v).scale(&c);
        }
        Ok(out)
    }

    /// The first basis monomial of degree at most `through` on which
    /// `d∘φ - (-1)^{|φ|} φ∘d` does not vanish, with the defect.
    pub fn cocycle_defect(&self, disk: &DiskModel, through: u32) -> Result<Option<(Monomial, Poly)>> {
        if through >= self.bound {
            return Err(Error::Bound {
                bound: self.bound,
                required: through + 1,
            });
        }
        let alg = disk.algebra();
        let s = sign(self.degree.rem_euclid(2) == 1);
        let monomials = disk_monomials(disk, self.stage, through);
        let defects: Vec<Option<(Monomial, Poly)>> = monomials
            .into_par_iter()
            .map(|nu| -> Result<Option<(Monomial, Poly)>> {
                let v = self.value(&nu)?;
                let lhs = alg.differential(v);
                let d_nu = alg.differential(&Poly::from_monomial(nu.clone(), Rational::one()));
                let rhs = self.apply(disk, &d_nu)?.scale(&s);
                let defect = &lhs - &rhs;
                Ok((!defect.is_zero()).then_some((nu, defect)))
            })
            .collect::<Result<_>>()?;
        Ok(defects.into_iter().flatten().next())
    }

    /// Transport along the orientation-reversing involution of the disk
    /// model: `ν ↦ τ(φ(τν))`.
    pub fn transport_by_involution(&self, disk: &DiskModel) -> Result<Self> {
        let inv = disk.involution()?;
        let first = disk.disk_index(0);
        let values = self
            .values
            .iter()
            .map(|(nu, v)| {
                let factors: u32 = (first..first + disk.rank()).map(|i| nu.exponent(i) as u32).sum();
                (nu.clone(), inv.apply(v).scale(&sign(factors % 2 == 1)))
            })
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }
}

/// Whether step `t` falls in the first case of the construction, where
/// `s^k z_t` has even degree.
pub fn is_polynomial_step(disk: &DiskModel, t: usize) -> bool {
    !disk.algebra().table().is_odd(disk.disk_index(t))
}

/// The extra degree step `t` needs from its predecessor.
fn step_lookahead(disk: &DiskModel, t: usize) -> u32 {
    if is_polynomial_step(disk, t) {
        max_disk_degree(disk, disk.tau(t))
    } else {
        0
    }
}

/// One step of the construction: from `f` on stage `t` to `Φ(f)` on stage
/// `t + 1`, defined on basis monomials of degree at most `bound`.
///
/// With `z = z_t`:
/// * `s^k z` even: `Φf(ν) = σz·f(ν) + (-1)^{|f|} f(τz·ν)` and
///   `Φf(ν·(s^k z)^l) = 0` for `l ≥ 1`,
/// * `s^k z` odd: `Φf(ν·s^k z) = (-1)^{|f|+|ν|} f(ν)` and `Φf(ν) = 0`,
///
/// for `ν` free of `s^k z`.
pub fn phi_step(f: &SLinearMap, disk: &DiskModel, bound: u32) -> Result<SLinearMap> {
    let t = f.stage;
    if t >= disk.rank() {
        return Err(Error::Structural("shriek map already at the last stage".into()));
    }
    let required = bound.saturating_add(step_lookahead(disk, t));
    if f.bound < required {
        return Err(Error::Bound {
            bound: f.bound,
            required,
        });
    }
    let alg = disk.algebra();
    let table = alg.table();
    let idx = disk.disk_index(t);
    let polynomial = is_polynomial_step(disk, t);
    let f_odd = f.degree.rem_euclid(2) == 1;
    let sigma = disk.sigma(t);
    let tau = disk.tau(t);
    let degree = if polynomial {
        f.degree + sigma.degree().expect("σz is homogeneous") as i64
    } else {
        f.degree - table.degree(idx) as i64
    };
    let monomials = disk_monomials(disk, t + 1, bound);
    let values: Vec<(Monomial, Poly)> = monomials
        .into_par_iter()
        .map(|nu| -> Result<(Monomial, Poly)> {
            let e = nu.exponent(idx);
            let value = if polynomial {
                if e > 0 {
                    Poly::zero()
                } else {
                    let first = table.mul(&sigma, f.value(&nu)?);
                    let moved = table.mul(tau, &Poly::from_monomial(nu.clone(), Rational::one()));
                    let second = f.apply(disk, &moved)?.scale(&sign(f_odd));
                    &first + &second
                }
            } else if e == 0 {
                Poly::zero()
            } else {
                let mut exps = nu.exponents().to_vec();
                exps[idx] = 0;
                let rest = table.monomial_from_exponents(exps).expect("sub-monomial");
                let s = sign(f_odd != (rest.degree() % 2 == 1));
                f.value(&rest)?.scale(&s)
            };
            Ok((nu, value))
        })
        .collect::<Result<_>>()?;
    Ok(SLinearMap {
        stage: t + 1,
        degree,
        bound,
        values: values.into_iter().collect(),
    })
}

/// Determinant over a commutative ring of even elements, by expansion over
/// permutations.
pub fn determinant(table: &GeneratorTable, m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Poly::zero();
    permutations(&mut perm, 0, false, &mut |p, odd| {
        let mut term = table.one();
        for (row, &col) in p.iter().enumerate() {
            term = table.mul(&term, &m[row][col]);
            if term.is_zero() {
                return;
            }
        }
        total += &term.scale(&sign(odd));
    });
    total
}

fn permutations(p: &mut Vec<usize>, k: usize, odd: bool, visit: &mut impl FnMut(&[usize], bool)) {
    if k == p.len() {
        visit(p, odd);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, odd != (i != k), visit);
        p.swap(k, i);
    }
}

/// `(∂(d y_j)/∂x_i)` for a pure model in filtration order, rows indexed by
/// `i` and columns by `j`.
pub fn jacobian_matrix(base: &Cdga) -> Result<Vec<Vec<Poly>>> {
    if !base.is_pure() {
        return Err(Error::Purity(format!("{} is not pure", base.label())));
    }
    let evens = base.even_indices();
    let odds = base.odd_indices();
    evens
        .iter()
        .map(|&x| {
            odds.iter()
                .map(|&y| partial_derivative(base.table(), base.d_gen(y), x))
                .collect()
        })
        .collect()
}

/// `det(∂(d y_j)/∂x_i)` for a pure model with as many even as odd
/// generators, in the model's own generator order.
pub fn jacobian_determinant(base: &Cdga) -> Result<Poly> {
    let (p, q) = (base.even_indices().len(), base.odd_indices().len());
    if p != q {
        return Err(Error::Domain(format!(
            "the Jacobian needs as many even as odd generators, found {p} and {q}"
        )));
    }
    Ok(determinant(base.table(), &jacobian_matrix(base)?))
}

/// Outcome of reducing `φ(s^k x_{[p]})` modulo the ideal generated by the
/// base generators and the `σx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Nontriviality {
    /// The residue, as an element of the sphere model.
    pub residue: Poly,
    /// `c` with residue `= c·σy_{[q]}`, if the residue has that form.
    pub scalar: Option<Rational>,
}

impl Nontriviality {
    pub fn holds(&self) -> bool {
        self.scalar.as_ref().is_some_and(|c| !c.is_zero())
    }
}

/// Numbers of even and odd generators.
pub fn parity_counts(base: &Cdga) -> (usize, usize) {
    (base.even_indices().len(), base.odd_indices().len())
}

/// `s^k x_1 ⋯ s^k x_p` in the disk algebra.
pub fn top_disk_monomial(disk: &DiskModel) -> Monomial {
    let (p, _) = parity_counts(disk.sphere().base());
    disk.algebra()
        .table()
        .monomial(&(0..p).map(|i| (disk.disk_index(i), 1)).collect::<Vec<_>>())
        .expect("distinct generators")
}

/// `σy_{[j]} = σy_j ⋯ σy_1` in the disk algebra.
pub fn sigma_y_product(disk: &DiskModel, j: usize) -> Poly {
    let (p, _) = parity_counts(disk.sphere().base());
    let table = disk.algebra().table();
    (0..j).rev().fold(table.one(), |acc, i| table.mul(&acc, &disk.sigma(p + i)))
}

/// Reduces `φ(s^k x_{[p]})` modulo the ideal `I` of the sphere model spanned
/// by `z⊗1` (or `z` for `k ≥ 2`) and `σx_i`, checking first that `d(I) ⊆ I`.
pub fn nontriviality_check(phi: &SLinearMap, disk: &DiskModel) -> Result<Nontriviality> {
    let base = disk.sphere().base();
    if !base.is_pure() {
        return Err(Error::Purity(format!("{} is not pure", base.label())));
    }
    let (p, q) = parity_counts(base);
    let r = disk.rank();
    let alg = disk.algebra();
    let table = alg.table();
    // the quotient keeps exactly the generators r + p .. 2r, which are σy_j
    // for k ≥ 2 and 1⊗y_j ≡ σy_j for k = 1
    let kept = |i: usize| i >= r + p && i < 2 * r;
    let project = |a: &Poly| -> Poly {
        let mut out = Poly::zero();
        for (m, c) in a.terms() {
            if m.support().all(kept) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    };
    for i in 0..2 * r {
        let image = project(alg.d_gen(i));
        if !image.is_zero() {
            let what = if kept(i) { "the quotient differential" } else { "d(I) ⊆ I" };
            return Err(Error::Purity(format!(
                "{what} fails: d{} = {} survives in the quotient",
                table.generator(i).name,
                alg.format(&image)
            )));
        }
    }
    let top = phi.value(&top_disk_monomial(disk))?;
    let residue = project(top);
    let target = project(&sigma_y_product(disk, q));
    let scalar = match (residue.leading(), target.leading()) {
        (None, _) => Some(Rational::zero()),
        (Some((m, c)), Some((tm, tc))) if m == tm => {
            let ratio = c / tc;
            (residue == target.scale(&ratio)).then_some(ratio)
        }
        _ => None,
    };
    Ok(Nontriviality { residue, scalar })
}

/// Everything computed about the shriek map of a disk model.
#[derive(Clone, Debug)]
pub struct ShriekCertificate {
    pub k: u32,
    pub p: usize,
    pub q: usize,
    pub pure: bool,
    /// `φ_0, …, φ_r` before normalization.
    pub history: Vec<SLinearMap>,
    /// `(-1)^{p(p+3)/2} φ_r`.
    pub phi: SLinearMap,
    pub normalization: Rational,
    /// The cocycle identity holds on basis monomials up to this degree.
    pub checked_through: u32,
    /// `μ(φ(1))` in the base model.
    pub mu_phi_one: Poly,
    /// The remaining fields are the consequences for pure models with `k`
    /// odd and `p ≤ q`; they are `None` otherwise.
    pub pure_checks: Option<PureChecks>,
}

#[derive(Clone, Debug)]
pub struct PureChecks {
    /// `φ_r(s^k x_{[p]})`.
    pub top_value: Poly,
    /// Whether `φ_{p+j}(s^k x_{[p]}) = σy_{[j]}` for every `j`.
    pub top_matches: bool,
    /// Whether `φ_i(s^k x_{[i]∖I}) = [I = ∅]` for every `i ≤ p`.
    pub even_part_holds: bool,
    /// `α_{ji}` with `τy_j = (-1)^k Σ_i α_{ji}·s^k x_i`, indexed `[j][i]`.
    pub alpha: Vec<Vec<Poly>>,
    /// Whether `μ(α_{ji}) = ∂(d y_j)/∂x_i` for all `j, i`.
    pub alpha_matches: bool,
    /// Whether `φ_{p+j}(s^k x_{[p]∖I}) = (-1)^{deg I + pj} det(α_{t,i_r})`
    /// for every `j` and `|I| = j`, and `0` when `|I| > j`.
    pub minors_hold: bool,
    /// `det(∂(dy_j)/∂x_i)` when `p = q`.
    pub jacobian: Option<Poly>,
    /// Whether `μφ(1)` equals the Jacobian (or 0 when `p < q`).
    pub jacobian_matches: bool,
    pub nontriviality: Nontriviality,
}

impl ShriekCertificate {
    /// Whether every check that applies passed.
    pub fn passed(&self) -> bool {
        self.pure_checks.as_ref().is_none_or(|c| {
            c.top_matches
                && c.even_part_holds
                && c.alpha_matches
                && c.minors_hold
                && c.jacobian_matches
                && c.nontriviality.holds()
        })
    }
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// Builds `φ_0, …, φ_r` and checks the cocycle identity on basis monomials
/// of degree at most `check_through`, then runs the pure-case checks where
/// they apply.
pub fn build_phi(disk: &DiskModel, check_through: u32) -> Result<ShriekCertificate> {
    let base = Arc::clone(disk.sphere().base());
    let k = disk.k();
    let r = disk.rank();
    let (p, q) = parity_counts(&base);
    let pure = base.is_pure();
    let table = disk.algebra().table();
    let top = top_disk_monomial(disk);
    let needed = (check_through + 1).max(top.degree());
    // stage bounds, from the last stage down
    let mut bounds = vec![0u32; r + 1];
    bounds[r] = needed;
    for t in (0..r).rev() {
        bounds[t] = bounds[t + 1] + step_lookahead(disk, t);
    }
    let mut history = vec![SLinearMap::identity(disk)];
    for t in 0..r {
        let next = phi_step(&history[t], disk, bounds[t + 1])?;
        if let Some((nu, defect)) = next.cocycle_defect(disk, check_through)? {
            return Err(Error::Consistency(format!(
                "φ_{} is not a cocycle on {}: defect {}",
                t + 1,
                disk.algebra().format(&Poly::from_monomial(nu, Rational::one())),
                disk.algebra().format(&defect)
            )));
        }
        history.push(next);
    }
    let normalization = sign((p * (p + 3) / 2) % 2 == 1);
    let phi = history[r].scale(&normalization);
    let mu = disk.sphere().mu()?;
    let s_table = disk.sphere().algebra().table();
    let to_sphere = |v: &Poly| -> Poly { s_table.restrict(v).expect("values lie in the sphere model") };
    let mu_phi_one = mu.apply(&to_sphere(phi.value(&table.unit_monomial())?));
    let pure_checks = if pure && k % 2 == 1 && p <= q {
        Some(pure_checks(disk, &history, &phi, &mu_phi_one)?)
    } else {
        None
    };
    Ok(ShriekCertificate {
        k,
        p,
        q,
        pure,
        history,
        phi,
        normalization,
        checked_through: check_through,
        mu_phi_one,
        pure_checks,
    })
}

/// `α_{ji}` read off from `τy_j`, as elements of the sphere model.
pub fn alpha_matrix(disk: &DiskModel) -> Result<Vec<Vec<Poly>>> {
    let base = disk.sphere().base();
    let (p, q) = parity_counts(base);
    let table = disk.algebra().table();
    let s_table = disk.sphere().algebra().table();
    let at = disk.disk_index(0);
    let ks = sign(disk.k() % 2 == 1);
    (0..q)
        .map(|j| {
            let mut row = vec![Poly::zero(); p];
            for (m, c) in disk.tau(p + j).terms() {
                let (a, nu) = m.split_at(at, table);
                let support: Vec<usize> = nu.support().collect();
                let i = match support.as_slice() {
                    [i] if *i < at + p && nu.exponent(*i) == 1 => i - at,
                    _ => {
                        return Err(Error::Consistency(format!(
                            "τ{} is not linear in the s^k x_i",
                            base.table().generator(p + j).name
                        )))
                    }
                };
                let a = s_table.restrict(&Poly::from_monomial(a, c * &ks)).expect("sphere part");
                row[i] += &a;
            }
            Ok(row)
        })
        .collect()
}

fn pure_checks(
    disk: &DiskModel,
    history: &[SLinearMap],
    phi: &SLinearMap,
    mu_phi_one: &Poly,
) -> Result<PureChecks> {
    let base = disk.sphere().base();
    let (p, q) = parity_counts(base);
    let table = disk.algebra().table();
    let b_table = base.table();
    let mu = disk.sphere().mu()?;
    let x_monomial = |set: &[usize]| -> Monomial {
        table
            .monomial(&set.iter().map(|&i| (disk.disk_index(i), 1)).collect::<Vec<_>>())
            .expect("distinct generators")
    };
    let top = x_monomial(&(0..p).collect::<Vec<_>>());
    let top_value = history[p + q].value(&top)?.clone();
    let mut top_matches = true;
    for j in 0..=q {
        top_matches &= *history[p + j].value(&top)? == sigma_y_product(disk, j);
    }
    let mut even_part_holds = true;
    for (i, phi_i) in history.iter().enumerate().take(p + 1) {
        for removed in subsets(i) {
            let kept: Vec<usize> = (0..i).filter(|t| !removed.contains(t)).collect();
            let expected = if removed.is_empty() { table.one() } else { Poly::zero() };
            even_part_holds &= *phi_i.value(&x_monomial(&kept))? == expected;
        }
    }
    let alpha = alpha_matrix(disk)?;
    let mut alpha_matches = true;
    for (j, row) in alpha.iter().enumerate() {
        for (i, a) in row.iter().enumerate() {
            let expected = partial_derivative(b_table, base.d_gen(p + j), i)?;
            alpha_matches &= mu.apply(a) == expected;
        }
    }
    let s_table = disk.sphere().algebra().table();
    let mut minors_hold = true;
    for j in 0..=q {
        for set in subsets(p) {
            if set.len() < j {
                continue;
            }
            let rest: Vec<usize> = (0..p).filter(|t| !set.contains(t)).collect();
            let value = history[p + j].value(&x_monomial(&rest))?;
            let expected = if set.len() > j {
                Poly::zero()
            } else {
                let minor: Vec<Vec<Poly>> = (0..j)
                    .map(|t| set.iter().map(|&i| alpha[t][i].clone()).collect())
                    .collect();
                let deg_i: usize = set.iter().map(|i| i + 1).sum();
                table.embed(&determinant(s_table, &minor).scale(&sign((deg_i + p * j) % 2 == 1)))
            };
            minors_hold &= *value == expected;
        }
    }
    let jacobian = if p == q { Some(jacobian_determinant(base)?) } else { None };
    let jacobian_matches = match &jacobian {
        Some(det) => mu_phi_one == det,
        None => mu_phi_one.is_zero(),
    };
    let nontriviality = nontriviality_check(phi, disk)?;
    Ok(PureChecks {
        top_value,
        top_matches,
        even_part_holds,
        alpha,
        alpha_matches,
        minors_hold,
        jacobian,
        jacobian_matches,
        nontriviality,
    })
}

/// `id ⊗ φ` on `E ⊗_S D`, for an algebra `E` over the sphere model `S`.
#[derive(Clone, Debug)]
pub struct ExtLift {
    phi: SLinearMap,
    disk: DiskModel,
    left: Arc<Cdga>,
    total: Arc<Cdga>,
}

/// Lifts `φ` along `S → E`: the map `e ⊗ ν ↦ (-1)^{|φ||e|} e·φ(ν)` on the
/// relative tensor product.
pub fn extlift(phi: &SLinearMap, left: Arc<Cdga>, disk: &DiskModel) -> Result<ExtLift> {
    let total = Arc::new(relative_tensor(&left, disk, "_r")?);
    Ok(ExtLift {
        phi: phi.clone(),
        disk: disk.clone(),
        left,
        total,
    })
}

impl ExtLift {
    pub fn total(&self) -> &Arc<Cdga> {
        &self.total
    }

    pub fn left(&self) -> &Arc<Cdga> {
        &self.left
    }

    pub fn degree(&self) -> i64 {
        self.phi.degree()
    }

    pub fn apply(&self, w: &Poly) -> Result<Poly> {
        let n = self.left.len();
        let t_table = self.total.table();
        let l_table = self.left.table();
        let d_table = self.disk.algebra().table();
        let s_table = self.disk.sphere().algebra().table();
        let first = self.disk.disk_index(0);
        let odd_map = self.phi.degree().rem_euclid(2) == 1;
        let mut out = Poly::zero();
        for (m, c) in w.terms() {
            let (e, nu_r) = m.split_at(n, t_table);
            let mut exps = vec![0u16; d_table.len()];
            for i in nu_r.support() {
                exps[first + i - n] = nu_r.exponent(i);
            }
            let nu = d_table.monomial_from_exponents(exps).expect("disk monomial");
            let v = self.phi.value(&nu)?;
            if v.is_zero() {
                continue;
            }
            let v = l_table.embed(&s_table.restrict(v).expect("values lie in the sphere model"));
            let mut e_exps = e.exponents().to_vec();
            e_exps.truncate(n);
            let e = l_table.monomial_from_exponents(e_exps).expect("left monomial");
            let c = c * sign(odd_map && e.degree() % 2 == 1);
            out += &l_table.mul_monomial_poly(&e, &v).scale(&c);
        }
        Ok(out)
    }

    /// The image of the unit, `φ(1)` viewed in `E`.
    pub fn at_unit(&self) -> Result<Poly> {
        self.apply(&self.total.table().one())
    }

    /// First monomial of degree at most `through` on which the lift fails to
    /// commute with the differentials up to the sign `(-1)^{|φ|}`.
    pub fn cocycle_defect(&self, through: u32) -> Result<Option<(Monomial, Poly)>> {
        let s = sign(self.phi.degree().rem_euclid(2) == 1);
        let monomials: Vec<Monomial> = (0..=through)
            .flat_map(|n| self.total.table().basis_of_degree(n))
            .collect();
        let defects: Vec<Option<(Monomial, Poly)>> = monomials
            .into_par_iter()
            .map(|w| -> Result<Option<(Monomial, Poly)>> {
                let wp = Poly::from_monomial(w.clone(), Rational::one());
                let lhs = self.left.differential(&self.apply(&wp)?);
                let rhs = self.apply(&self.total.differential(&wp))?.scale(&s);
                let defect = &lhs - &rhs;
                Ok((!defect.is_zero()).then_some((w, defect)))
            })
            .collect::<Result<_>>()?;
        Ok(defects.into_iter().flatten().next())
    }
}

/// `λ` with `[μφ(1)] = λ·ω`, given the reduction of `μφ(1)` in the base and
/// the coordinates of `ω`.
pub fn lambda_from_class(coords: &[Rational], omega: &[Rational]) -> Result<Rational> {
    let lead = omega
        .iter()
        .find(|c| !c.is_zero())
        .ok_or_else(|| Error::Consistency("orientation class is zero".into()))?;
    Ok(coords.first().cloned().unwrap_or_else(Rational::zero) / lead)
}
