//! Euler characteristic, orientation class, Poincaré pairing, the diagonal
//! class and the ellipticity report of a model.

use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use crate::algebra::{Poly, Rational};
use crate::cdga::{Cdga, CdgaMorphism};
use crate::error::{Error, Result};
use crate::homology::{Class, CohomologyBasis};
use crate::linalg::{from_entries, invert, kernel_and_image, SparseVec};

/// `Σ b_j + Σ (1 - a_i)` over odd generators of degree `b_j` and even
/// generators of degree `a_i`.
pub fn formal_dimension(a: &Cdga) -> i64 {
    a.table()
        .generators()
        .iter()
        .map(|g| if g.is_odd() { g.degree as i64 } else { 1 - g.degree as i64 })
        .sum()
}

/// Width of the vanishing window used to certify finite dimensionality: the
/// largest generator degree.
pub fn window_width(a: &Cdga) -> u32 {
    a.table().max_degree()
}

/// Cohomology through the top degree `m` plus the vanishing window above it.
pub fn cohomology_with_window(a: Arc<Cdga>, m: u32) -> Result<CohomologyBasis> {
    let w = window_width(&a);
    CohomologyBasis::compute(a, m + w)
}

/// `Σ_{n ≤ m} (-1)^n dim H^n`, after checking that `H` vanishes in the
/// window `m < n ≤ m + width`.
pub fn euler_characteristic(basis: &CohomologyBasis, m: u32) -> Result<i64> {
    let w = window_width(basis.algebra());
    let top = m + w;
    if basis.max_degree() < top {
        return Err(Error::Range {
            degree: top,
            max: basis.max_degree(),
        });
    }
    if let Some(n) = (m + 1..=top).find(|&n| basis.dim(n).map_or(true, |d| d > 0)) {
        return Err(Error::NotFinite(format!(
            "H^{n} ≠ 0 inside the window above degree {m}"
        )));
    }
    let mut chi = 0i64;
    for n in 0..=m {
        let d = basis.dim(n)? as i64;
        chi += if n % 2 == 0 { d } else { -d };
    }
    Ok(chi)
}

/// The orientation class `ω`, spanning `H^m`.
#[derive(Clone, Debug)]
pub struct PoincareData {
    pub m: u32,
    pub omega: Class,
    pub omega_rep: Poly,
}

impl PoincareData {
    /// The `ω`-coefficient of a class of degree `m`.
    pub fn pairing(&self, c: &Class) -> Result<Rational> {
        if c.degree != self.m {
            return Err(Error::Consistency(format!(
                "pairing a class of degree {} against ω in degree {}",
                c.degree, self.m
            )));
        }
        Ok(c.coords[0].clone() / &self.omega.coords[0])
    }
}

/// `ω` as the basis class of `H^m`. Its representative has leading
/// coefficient 1 in monomial order.
pub fn orientation_class(basis: &CohomologyBasis, m: u32) -> Result<PoincareData> {
    let dim = basis.dim(m)?;
    if dim != 1 {
        return Err(Error::NotPoincare { degree: m, dim });
    }
    let omega = Class::basis(m, 1, 0);
    let omega_rep = basis.representative(&omega)?;
    Ok(PoincareData { m, omega, omega_rep })
}

/// `⟨e_a ⌣ f_b⟩` for bases `e` of `H^j` and `f` of `H^{m-j}`.
pub fn pairing_matrix(basis: &CohomologyBasis, pd: &PoincareData, j: u32) -> Result<Vec<Vec<Rational>>> {
    let low = basis.basis_classes(j)?;
    let high = basis.basis_classes(pd.m - j)?;
    low.iter()
        .map(|a| high.iter().map(|b| pd.pairing(&basis.cup(a, b)?)).collect())
        .collect()
}

/// Checks that every pairing `H^j × H^{m-j} → Q` is nondegenerate.
pub fn check_pairing(basis: &CohomologyBasis, pd: &PoincareData) -> Result<()> {
    for j in 0..=pd.m {
        let mat = pairing_matrix(basis, pd, j)?;
        let square = mat.len() == basis.dim(pd.m - j)?;
        if !square || (!mat.is_empty() && invert(&mat).is_none()) {
            return Err(Error::DegeneratePairing { low: j, high: pd.m - j });
        }
    }
    Ok(())
}

/// The diagonal class and its pullback along the multiplication map.
#[derive(Clone, Debug)]
pub struct DiagonalClass {
    /// The tensor-square model the class lives on.
    pub square: Arc<Cdga>,
    /// `Σ_i (-1)^{|b_i|} b_i × b^i` at the cochain level.
    pub representative: Poly,
    /// `μ^*` of the class, in `H^m`.
    pub pullback: Class,
    pub chi: i64,
    /// Whether the pullback equals `χ·ω`.
    pub holds: bool,
}

/// Builds the diagonal class from the dual basis of the Poincaré pairing and
/// pulls it back along `μ: A ⊗ A → A`.
pub fn diagonal_class(basis: &CohomologyBasis, pd: &PoincareData) -> Result<DiagonalClass> {
    let a = Arc::clone(basis.algebra());
    let square = Arc::new(a.tensor(&a)?);
    let r = a.len();
    let st = square.table();
    let left = |p: &Poly| st.embed(p);
    let right_map: Vec<usize> = (r..2 * r).collect();
    let right = |p: &Poly| st.reindex(p, &right_map);
    let mut representative = Poly::zero();
    for j in 0..=pd.m {
        let mat = pairing_matrix(basis, pd, j)?;
        if mat.is_empty() {
            continue;
        }
        let inv = invert(&mat).ok_or(Error::DegeneratePairing { low: j, high: pd.m - j })?;
        let low = basis.representatives(j)?;
        let high = basis.representatives(pd.m - j)?;
        let sign = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
        for (a_idx, e) in low.iter().enumerate() {
            // dual element Σ_b inv[b][a] f_b
            let mut dual = Poly::zero();
            for (b_idx, f) in high.iter().enumerate() {
                dual += &f.scale(&inv[b_idx][a_idx]);
            }
            representative += &st.mul(&left(e), &right(&dual)).scale(&sign);
        }
    }
    let mu = CdgaMorphism::new(
        Arc::clone(&square),
        Arc::clone(&a),
        (0..2 * r).map(|i| a.table().gen(i % r)).collect(),
    )?;
    let pullback = basis.reduce_in_degree(pd.m, &mu.apply(&representative))?;
    let chi = euler_characteristic(basis, pd.m)?;
    let holds = pullback == pd.omega.scale(&Rational::from_integer(chi.into()));
    Ok(DiagonalClass {
        square,
        representative,
        pullback,
        chi,
        holds,
    })
}

/// `dim (∧V^even / (dy_1, …, dy_q))_n` for `n ≤ limit`, where each `dy_j` is
/// projected to the even subalgebra.
pub fn quotient_dims(a: &Cdga, limit: u32) -> Vec<usize> {
    let evens = a.even_indices();
    let odds = a.odd_indices();
    let t = a.table();
    let even_only = |p: &Poly| p.filter(|m| m.support().all(|i| !t.is_odd(i)));
    let relations: Vec<Poly> = odds.iter().map(|&y| even_only(a.d_gen(y))).collect();
    (0..=limit)
        .map(|n| {
            let basis: Vec<_> = t
                .basis_of_degree(n)
                .into_iter()
                .filter(|m| m.support().all(|i| evens.contains(&i)))
                .collect();
            let index: std::collections::HashMap<_, _> =
                basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
            let mut rows: Vec<SparseVec> = Vec::new();
            for rel in &relations {
                let Some(dr) = rel.degree() else { continue };
                if dr > n {
                    continue;
                }
                for m in t.basis_of_degree(n - dr) {
                    if !m.support().all(|i| evens.contains(&i)) {
                        continue;
                    }
                    let prod = t.mul_monomial_poly(&m, rel);
                    rows.push(from_entries(prod.terms().map(|(mm, c)| (index[mm], c.clone()))));
                }
            }
            let (_, image) = kernel_and_image(&rows);
            basis.len() - image.rank()
        })
        .collect()
}

/// Finds the top degree of a graded quotient from its dimensions: the last
/// nonzero degree followed by a zero window of the given width. `None` if no
/// such window occurs in the scanned range.
pub fn top_degree_with_window(dims: &[usize], width: u32) -> Option<u32> {
    let width = width.max(1) as usize;
    let mut last_nonzero = None;
    for (n, &d) in dims.iter().enumerate() {
        if d > 0 {
            last_nonzero = Some(n);
        } else if let Some(top) = last_nonzero {
            if n - top >= width {
                return Some(top as u32);
            }
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticReport {
    pub p: usize,
    pub q: usize,
    pub pure: bool,
    /// `∧V^even / (dy)` certified finite by the window criterion.
    pub quotient_finite: bool,
    pub quotient_top: Option<u32>,
    /// `p = q` and the quotient is finite.
    pub regular: bool,
    pub m: i64,
    pub m_bar: Option<i64>,
    pub k: Option<u32>,
    /// `None` when the cohomology could not be certified finite.
    pub chi: Option<i64>,
    pub top_nonzero_degree: Option<u32>,
    /// Whether `χ ≠ 0 ⟺ p = q` holds for this model.
    pub chi_parity_consistent: Option<bool>,
    pub notes: Vec<String>,
}

/// `m̄ = m - (q - p)(k - 1)` for `k` odd and `-m - (k - 2)p + kq` for `k`
/// even: the degree of the shriek map for sphere dimension `k`.
pub fn loop_dimension(m: i64, p: usize, q: usize, k: u32) -> i64 {
    let (p, q, k) = (p as i64, q as i64, k as i64);
    if k % 2 == 1 {
        m - (q - p) * (k - 1)
    } else {
        -m - (k - 2) * p + k * q
    }
}

pub const PARITY_NOTE: &str = "χ ≠ 0 is tested against p = q (rank of even generators equals rank of odd \
generators); the alternative reading dim π_even < dim π_odd is not used";

pub fn elliptic_report(a: &Arc<Cdga>, k: Option<u32>) -> Result<EllipticReport> {
    let p = a.even_indices().len();
    let q = a.odd_indices().len();
    let pure = a.is_pure();
    let m = formal_dimension(a);
    let even_width = a.even_indices().iter().map(|&i| a.table().degree(i)).max().unwrap_or(1);
    let mut notes = vec![PARITY_NOTE.to_string()];
    let (quotient_finite, quotient_top) = if pure {
        let limit: u32 = a
            .odd_indices()
            .iter()
            .map(|&y| a.table().degree(y) + 1)
            .sum::<u32>()
            + even_width;
        let dims = quotient_dims(a, limit);
        let top = top_degree_with_window(&dims, even_width);
        (top.is_some(), top)
    } else {
        notes.push("not pure: the regular-sequence test does not apply".into());
        (false, None)
    };
    let regular = pure && p == q && quotient_finite;
    let mut chi = None;
    let mut top_nonzero_degree = None;
    if m >= 0 {
        let basis = cohomology_with_window(Arc::clone(a), m as u32)?;
        match euler_characteristic(&basis, m as u32) {
            Ok(c) => {
                chi = Some(c);
                top_nonzero_degree = (0..=m as u32).rev().find(|&n| basis.dim(n).unwrap_or(0) > 0);
            }
            Err(Error::NotFinite(msg)) => notes.push(format!("cohomology not certified finite: {msg}")),
            Err(e) => return Err(e),
        }
    } else {
        notes.push(format!("formal dimension {m} is negative"));
    }
    let chi_parity_consistent = chi.map(|c| (c != 0) == (p == q));
    if let Some(c) = chi {
        if c != 0 && !pure {
            return Err(Error::Purity(format!(
                "{} has χ = {c} but is not pure; a model with nonzero Euler characteristic \
                 must be pure with a regular sequence dy_1, …, dy_p",
                a.label()
            )));
        }
    }
    Ok(EllipticReport {
        p,
        q,
        pure,
        quotient_finite,
        quotient_top,
        regular,
        m,
        m_bar: k.map(|k| loop_dimension(m, p, q, k)),
        k,
        chi,
        top_nonzero_degree,
        chi_parity_consistent,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    fn model(gens: &[(&str, u32)], d: &[&str]) -> Arc<Cdga> {
        Arc::new(ModelSpec::from_parts("m", gens, d).unwrap().to_cdga().unwrap())
    }

    fn s2() -> Arc<Cdga> {
        model(&[("x", 2), ("y", 3)], &["0", "x^2"])
    }

    fn cp2() -> Arc<Cdga> {
        model(&[("x", 2), ("y", 5)], &["0", "x^3"])
    }

    fn s3() -> Arc<Cdga> {
        model(&[("y", 3)], &["0"])
    }

    fn s2xs2() -> Arc<Cdga> {
        model(&[("x", 2), ("x'", 2), ("y", 3), ("y'", 3)], &["0", "0", "x^2", "x'^2"])
    }

    fn chi_of(a: Arc<Cdga>) -> i64 {
        let m = formal_dimension(&a) as u32;
        let b = cohomology_with_window(a, m).unwrap();
        euler_characteristic(&b, m).unwrap()
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(chi_of(s2()), 2);
        assert_eq!(chi_of(cp2()), 3);
        assert_eq!(chi_of(s3()), 0);
        assert_eq!(chi_of(s2xs2()), 4);
    }

    #[test]
    fn window_refuses_infinite_cohomology() {
        let a = model(&[("x", 2), ("x'", 2), ("y", 3)], &["0", "0", "x^2"]);
        let b = CohomologyBasis::compute(Arc::clone(&a), 8).unwrap();
        assert!(matches!(euler_characteristic(&b, 2), Err(Error::NotFinite(_))));
    }

    #[test]
    fn orientation_classes() {
        for (a, expect) in [(s2(), "[x]"), (s2xs2(), "[x x']"), (s3(), "[y]")] {
            let m = formal_dimension(&a) as u32;
            let b = CohomologyBasis::compute(Arc::clone(&a), m).unwrap();
            let pd = orientation_class(&b, m).unwrap();
            assert_eq!(b.format_class(&pd.omega), expect);
            check_pairing(&b, &pd).unwrap();
        }
        let b = CohomologyBasis::compute(s2(), 4).unwrap();
        assert!(matches!(orientation_class(&b, 3), Err(Error::NotPoincare { degree: 3, dim: 0 })));
    }

    #[test]
    fn diagonal_class_pulls_back_to_chi_omega() {
        for (a, chi, pullback) in [(s2(), 2, "2 [x]"), (s3(), 0, "0"), (cp2(), 3, "3 [x^2]")] {
            let m = formal_dimension(&a) as u32;
            let b = cohomology_with_window(Arc::clone(&a), m).unwrap();
            let pd = orientation_class(&b, m).unwrap();
            let dc = diagonal_class(&b, &pd).unwrap();
            assert_eq!(dc.chi, chi);
            assert!(dc.holds);
            assert_eq!(b.format_class(&dc.pullback), pullback);
        }
    }

    #[test]
    fn diagonal_class_of_the_two_sphere() {
        let a = s2();
        let b = cohomology_with_window(Arc::clone(&a), 2).unwrap();
        let pd = orientation_class(&b, 2).unwrap();
        let dc = diagonal_class(&b, &pd).unwrap();
        assert_eq!(dc.square.format(&dc.representative), "x_1 + x_2");
        let s3 = s3();
        let b = cohomology_with_window(Arc::clone(&s3), 3).unwrap();
        let pd = orientation_class(&b, 3).unwrap();
        let dc = diagonal_class(&b, &pd).unwrap();
        assert_eq!(dc.square.format(&dc.representative), "-y_1 + y_2");
    }

    // Hilbert series of k[x_i]/(f_j) for a regular sequence:
    // Π(1 - t^{|f_j|}) / Π(1 - t^{|x_i|})
    fn regular_quotient_series(even: &[u32], rel: &[u32], limit: usize) -> Vec<i64> {
        let mut s = vec![0i64; limit + 1];
        s[0] = 1;
        for &d in rel {
            for n in (d as usize..=limit).rev() {
                s[n] -= s[n - d as usize];
            }
        }
        for &d in even {
            for n in d as usize..=limit {
                s[n] += s[n - d as usize];
            }
        }
        s
    }

    #[test]
    fn quotient_dims_match_hilbert_series() {
        for (a, even, rel) in [
            (s2(), vec![2], vec![4]),
            (cp2(), vec![2], vec![6]),
            (s2xs2(), vec![2, 2], vec![4, 4]),
        ] {
            let dims = quotient_dims(&a, 12);
            let oracle = regular_quotient_series(&even, &rel, 12);
            assert_eq!(dims.iter().map(|&d| d as i64).collect::<Vec<_>>(), oracle);
        }
    }

    #[test]
    fn reports() {
        let r = elliptic_report(&s2(), Some(1)).unwrap();
        assert!(r.pure && r.regular && r.quotient_finite);
        assert_eq!((r.p, r.q, r.m, r.m_bar, r.chi), (1, 1, 2, Some(2), Some(2)));
        let r = elliptic_report(&model(&[("x", 4), ("y", 7)], &["0", "x^2"]), Some(3)).unwrap();
        assert_eq!((r.m, r.m_bar), (4, Some(4)));
        let bad = model(&[("x", 2), ("x'", 2), ("y", 3)], &["0", "0", "x^2"]);
        let r = elliptic_report(&bad, None).unwrap();
        assert!(r.pure && !r.quotient_finite && !r.regular);
        assert_eq!(r.chi, None);
        let r = elliptic_report(&s3(), Some(1)).unwrap();
        assert_eq!(r.chi_parity_consistent, Some(true));
        assert!(!r.regular);
    }
}
