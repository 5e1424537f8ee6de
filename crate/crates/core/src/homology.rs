//! Degreewise cohomology of a free CDGA over the rationals.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{format_rational, Monomial, Poly, Rational};
use crate::cdga::Cdga;
use crate::error::{Error, Result};
use crate::linalg::{from_entries, kernel_and_image, scale, unit, Echelon, SparseVec};

/// A cohomology class given by coordinates against the chosen basis of
/// `H^degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Class {
    pub degree: u32,
    #[serde(serialize_with = "serialize_coords")]
    pub coords: Vec<Rational>,
}

fn serialize_coords<S: serde::Serializer>(
    coords: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(coords.iter().map(format_rational))
}

impl Class {
    pub fn zero(degree: u32, dim: usize) -> Self {
        Self {
            degree,
            coords: vec![Rational::zero(); dim],
        }
    }

    pub fn basis(degree: u32, dim: usize, i: usize) -> Self {
        let mut c = Self::zero(degree, dim);
        c.coords[i] = Rational::one();
        c
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            degree: self.degree,
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Class) -> Self {
        assert_eq!(self.degree, other.degree, "adding classes of different degree");
        Self {
            degree: self.degree,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// One weight block of the cochains in a fixed degree.
#[derive(Clone, Debug, Default)]
struct Block {
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    reps: Vec<Poly>,
    /// Coboundary rows with empty tags plus representative rows tagged by
    /// their index within the block.
    reducer: Echelon,
    coboundaries: Echelon,
}

#[derive(Clone, Debug)]
struct Piece {
    blocks: BTreeMap<Weight, Block>,
    /// Offset of each block's classes in the coordinates of `H^n`.
    offsets: BTreeMap<Weight, usize>,
    dim: usize,
    /// False for degrees above the cohomology range, where only coboundaries
    /// are known.
    full: bool,
}

type Weight = Vec<i64>;

/// Integer gradings of the generators that the differential preserves, one
/// weight vector per generator. Cochains split into blocks of equal weight
/// and `d` maps each block of degree `n` into the block of the same weight in
/// degree `n + 1`, so the linear algebra runs block by block.
/// Kernel vectors of `d` on a block and the echelon form of its image.
type KernelAndImage = (Vec<SparseVec>, Echelon);

pub fn preserved_weights(algebra: &Cdga) -> Vec<Weight> {
    let n = algebra.len();
    // one equation per term of each d g: weight(term) - weight(g) = 0
    let mut rows: Vec<SparseVec> = Vec::new();
    for g in 0..n {
        for (m, _) in algebra.d_gen(g).terms() {
            let mut entries: Vec<(usize, Rational)> =
                m.support().map(|i| (i, Rational::from_integer(m.exponent(i).into()))).collect();
            entries.push((g, -Rational::one()));
            rows.push(from_entries(entries));
        }
    }
    // the solution space is the kernel of the map w ↦ (row · w)
    let mut columns: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        for (i, c) in row {
            columns[*i].push((r, c.clone()));
        }
    }
    let (kernel, _) = kernel_and_image(&columns);
    let solutions: Vec<Vec<i64>> = kernel
        .iter()
        .map(|v| {
            let lcm = v
                .iter()
                .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
            let mut w = vec![0i64; n];
            for (i, c) in v {
                let x = (c * Rational::from_integer(lcm.clone())).to_integer();
                w[*i] = x.to_i64().expect("small weight");
            }
            w
        })
        .collect();
    (0..n).map(|g| solutions.iter().map(|w| w[g]).collect()).collect()
}

fn weight_of(m: &Monomial, weights: &[Weight], width: usize) -> Weight {
    let mut w = vec![0i64; width];
    for i in m.support() {
        let e = m.exponent(i) as i64;
        for (acc, x) in w.iter_mut().zip(&weights[i]) {
            *acc += e * x;
        }
    }
    w
}

/// `H^n` for `0 ≤ n ≤ max_degree` with representatives and a reduction map,
/// plus coboundary spaces up to a possibly higher degree.
#[derive(Clone, Debug)]
pub struct CohomologyBasis {
    algebra: Arc<Cdga>,
    max_degree: u32,
    weights: Vec<Weight>,
    pieces: Vec<Piece>,
}

fn index_of(basis: &[Monomial]) -> HashMap<Monomial, usize> {
    basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect()
}

fn to_vec(p: &Poly, index: &HashMap<Monomial, usize>) -> SparseVec {
    let mut v: SparseVec = p
        .terms()
        .map(|(m, c)| (*index.get(m).expect("monomial of the expected degree"), c.clone()))
        .collect();
    v.sort_by_key(|(i, _)| *i);
    v
}

fn to_poly(v: &SparseVec, basis: &[Monomial]) -> Poly {
    let mut p = Poly::zero();
    for (i, c) in v {
        p.add_term(basis[*i].clone(), c.clone());
    }
    p
}

impl CohomologyBasis {
    /// Computes `H^n` for every `n ≤ max_degree`. Fails if `d² ≠ 0`.
    pub fn compute(algebra: Arc<Cdga>, max_degree: u32) -> Result<Self> {
        Self::compute_with_coboundaries(algebra, max_degree, max_degree)
    }

    /// Computes `H^n` for `n ≤ max_degree` and, in addition, the coboundary
    /// spaces up to `coboundary_degree`, which is enough to decide whether
    /// an element of those higher degrees is exact.
    pub fn compute_with_coboundaries(
        algebra: Arc<Cdga>,
        max_degree: u32,
        coboundary_degree: u32,
    ) -> Result<Self> {
        if let Some((i, residue)) = algebra.check_d_squared() {
            return Err(Error::ModelConstruction(format!(
                "{}: d²{} = {} ≠ 0",
                algebra.label(),
                algebra.table().generator(i).name,
                algebra.format(&residue)
            )));
        }
        let top = coboundary_degree.max(max_degree);
        let weights = preserved_weights(&algebra);
        let width = weights.first().map_or(0, |w| w.len());
        let table = algebra.table();
        // degree n ↦ weight ↦ monomials, for n ≤ top + 1 when a kernel in
        // degree top is needed, otherwise n ≤ top
        let last = if max_degree == top { top + 1 } else { top };
        let graded: Vec<BTreeMap<Weight, Vec<Monomial>>> = (0..=last)
            .into_par_iter()
            .map(|n| {
                let mut blocks: BTreeMap<Weight, Vec<Monomial>> = BTreeMap::new();
                for m in table.basis_of_degree(n) {
                    blocks.entry(weight_of(&m, &weights, width)).or_default().push(m);
                }
                blocks
            })
            .collect();
        let indices: Vec<BTreeMap<Weight, HashMap<Monomial, usize>>> = graded
            .par_iter()
            .map(|blocks| blocks.iter().map(|(w, b)| (w.clone(), index_of(b))).collect())
            .collect();
        // pass (n, w): kernel of d on the block and its image in degree n + 1
        let jobs: Vec<(u32, &Weight)> = (0..last)
            .flat_map(|n| graded[n as usize].keys().map(move |w| (n, w)))
            .collect();
        let passes: Vec<((u32, Weight), KernelAndImage)> = jobs
            .into_par_iter()
            .map(|(n, w)| {
                let source = &graded[n as usize][w];
                let target = indices[n as usize + 1].get(w);
                let images: Vec<SparseVec> = source
                    .iter()
                    .map(|m| {
                        let dm = algebra.differential(&Poly::from_monomial(m.clone(), Rational::one()));
                        match target {
                            Some(index) => to_vec(&dm, index),
                            None => {
                                debug_assert!(dm.is_zero(), "d leaves its weight block");
                                Vec::new()
                            }
                        }
                    })
                    .collect();
                ((n, w.clone()), kernel_and_image(&images))
            })
            .collect();
        let mut kernels: HashMap<(u32, Weight), Vec<SparseVec>> = HashMap::new();
        let mut images: HashMap<(u32, Weight), Echelon> = HashMap::new();
        for ((n, w), (kernel, image)) in passes {
            kernels.insert((n, w.clone()), kernel);
            images.insert((n + 1, w), image);
        }
        let mut pieces = Vec::with_capacity(top as usize + 1);
        for (n, blocks) in graded.into_iter().enumerate().take(top as usize + 1) {
            let n = n as u32;
            let full = n <= max_degree;
            let built: Vec<(Weight, Block)> = blocks
                .into_iter()
                .map(|(w, basis)| {
                    let coboundaries = images.remove(&(n, w.clone())).unwrap_or_default();
                    let kernel = if full {
                        kernels.remove(&(n, w.clone())).unwrap_or_default()
                    } else {
                        Vec::new()
                    };
                    (w, basis, coboundaries, kernel)
                })
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|(w, basis, coboundaries, kernel)| {
                    let mut reducer = Echelon::new();
                    let mut reps = Vec::new();
                    if full {
                        for row in coboundaries.clone().into_vectors() {
                            reducer.insert(row, Vec::new());
                        }
                        for z in kernel {
                            let (res, _) = reducer.reduce(z, Vec::new());
                            if let Some((_, lead)) = res.first() {
                                let res = scale(&res, &lead.recip());
                                reducer.insert(res.clone(), unit(reps.len()));
                                reps.push(to_poly(&res, &basis));
                            }
                        }
                    }
                    let index = index_of(&basis);
                    (
                        w,
                        Block {
                            basis,
                            index,
                            reps,
                            reducer,
                            coboundaries,
                        },
                    )
                })
                .collect();
            let mut offsets = BTreeMap::new();
            let mut dim = 0;
            for (w, b) in &built {
                offsets.insert(w.clone(), dim);
                dim += b.reps.len();
            }
            pieces.push(Piece {
                blocks: built.into_iter().collect(),
                offsets,
                dim,
                full,
            });
        }
        Ok(Self {
            algebra,
            max_degree,
            weights,
            pieces,
        })
    }

    pub fn algebra(&self) -> &Arc<Cdga> {
        &self.algebra
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Highest degree in which exactness can be decided.
    pub fn coboundary_degree(&self) -> u32 {
        self.pieces.len() as u32 - 1
    }

    fn piece(&self, n: u32) -> Result<&Piece> {
        match self.pieces.get(n as usize) {
            Some(p) if p.full => Ok(p),
            _ => Err(Error::Range {
                degree: n,
                max: self.max_degree,
            }),
        }
    }

    fn any_piece(&self, n: u32) -> Result<&Piece> {
        self.pieces.get(n as usize).ok_or(Error::Range {
            degree: n,
            max: self.coboundary_degree(),
        })
    }

    /// Splits `p` into its weight components.
    fn components(&self, p: &Poly) -> BTreeMap<Weight, Poly> {
        let width = self.weights.first().map_or(0, |w| w.len());
        let mut out: BTreeMap<Weight, Poly> = BTreeMap::new();
        for (m, c) in p.terms() {
            out.entry(weight_of(m, &self.weights, width))
                .or_insert_with(Poly::zero)
                .add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn dim(&self, n: u32) -> Result<usize> {
        Ok(self.piece(n)?.dim)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.pieces.iter().filter(|p| p.full).map(|p| p.dim).collect()
    }

    pub fn representatives(&self, n: u32) -> Result<Vec<Poly>> {
        Ok(self
            .piece(n)?
            .blocks
            .values()
            .flat_map(|b| b.reps.iter().cloned())
            .collect())
    }

    pub fn basis_classes(&self, n: u32) -> Result<Vec<Class>> {
        let dim = self.dim(n)?;
        Ok((0..dim).map(|i| Class::basis(n, dim, i)).collect())
    }

    pub fn unit(&self) -> Result<Class> {
        self.reduce_in_degree(0, &self.algebra.table().one())
    }

    pub fn representative(&self, c: &Class) -> Result<Poly> {
        let piece = self.piece(c.degree)?;
        let mut p = Poly::zero();
        let reps = piece.blocks.values().flat_map(|b| b.reps.iter());
        for (r, x) in reps.zip(&c.coords) {
            if !x.is_zero() {
                p += &r.scale(x);
            }
        }
        Ok(p)
    }

    /// Coordinates of a cocycle of degree `n`. Errors if it is not a cocycle.
    pub fn reduce_in_degree(&self, n: u32, p: &Poly) -> Result<Class> {
        let piece = self.piece(n)?;
        if !p.is_homogeneous_of(n) {
            return Err(Error::Consistency(format!(
                "element of the wrong degree reduced in degree {n}"
            )));
        }
        let mut coords = vec![Rational::zero(); piece.dim];
        for (w, part) in self.components(p) {
            let block = &piece.blocks[&w];
            let (res, tag) = block.reducer.reduce(to_vec(&part, &block.index), Vec::new());
            if !res.is_empty() {
                return Err(Error::NotCocycle(n));
            }
            let offset = piece.offsets[&w];
            for (i, c) in tag {
                coords[offset + i] = -c;
            }
        }
        Ok(Class { degree: n, coords })
    }

    /// Reduces a homogeneous nonzero cocycle; the zero polynomial needs an
    /// explicit degree, see [`CohomologyBasis::reduce_in_degree`].
    pub fn reduce(&self, p: &Poly) -> Result<Class> {
        let n = p
            .degree()
            .ok_or_else(|| Error::Consistency("reducing a zero or inhomogeneous element".into()))?;
        self.reduce_in_degree(n, p)
    }

    /// Whether `p` of degree `n` is exact; works up to the coboundary degree.
    pub fn is_coboundary(&self, n: u32, p: &Poly) -> Result<bool> {
        let piece = self.any_piece(n)?;
        if !p.is_homogeneous_of(n) {
            return Err(Error::Consistency(format!(
                "element of the wrong degree tested in degree {n}"
            )));
        }
        for (w, part) in self.components(p) {
            let block = &piece.blocks[&w];
            let (res, _) = block.coboundaries.reduce(to_vec(&part, &block.index), Vec::new());
            if !res.is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_cocycle(&self, p: &Poly) -> bool {
        self.algebra.differential(p).is_zero()
    }

    pub fn cup(&self, a: &Class, b: &Class) -> Result<Class> {
        let n = a.degree + b.degree;
        if n > self.max_degree {
            return Err(Error::Range {
                degree: n,
                max: self.max_degree,
            });
        }
        let pa = self.representative(a)?;
        let pb = self.representative(b)?;
        self.reduce_in_degree(n, &self.algebra.mul(&pa, &pb))
    }

    /// Human-readable form in terms of representatives, e.g. `2[x] - [y]`.
    pub fn format_class(&self, c: &Class) -> String {
        let Ok(reps) = self.representatives(c.degree) else {
            return "?".into();
        };
        let mut parts = Vec::new();
        for (r, x) in reps.iter().zip(&c.coords) {
            if x.is_zero() {
                continue;
            }
            let body = format!("[{}]", self.algebra.format(r));
            let coeff = if x.is_one() {
                String::new()
            } else if *x == -Rational::one() {
                "-".into()
            } else {
                format!("{} ", format_rational(x))
            };
            parts.push(format!("{coeff}{body}"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ").replace("+ -", "- ")
        }
    }

    /// Size of the cochain basis in degree `n`.
    pub fn cochain_dim(&self, n: u32) -> Result<usize> {
        Ok(self.any_piece(n)?.blocks.values().map(|b| b.basis.len()).sum())
    }

    /// A random coboundary `d(b)` of degree `n`, built from three degree
    /// `n - 1` monomials chosen by `pick`, which receives the number of
    /// candidates and returns an index and a coefficient.
    pub fn coboundary_from(&self, n: u32, mut pick: impl FnMut(usize) -> (usize, i64)) -> Result<Poly> {
        if n == 0 {
            return Ok(Poly::zero());
        }
        let lower: Vec<&Monomial> = self
            .any_piece(n - 1)?
            .blocks
            .values()
            .flat_map(|b| b.basis.iter())
            .collect();
        if lower.is_empty() {
            return Ok(Poly::zero());
        }
        let mut b = Poly::zero();
        for _ in 0..3 {
            let (i, c) = pick(lower.len());
            b.add_term(lower[i].clone(), crate::algebra::rat(c));
        }
        Ok(self.algebra.differential(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Generator, GeneratorTable};
    use crate::linalg::rank_dense;

    type Terms<'a> = &'a [(i64, &'a [(usize, u16)])];

    fn model(gens: &[(&str, u32)], d: &[Terms]) -> Arc<Cdga> {
        let t = GeneratorTable::new(gens.iter().map(|(n, k)| Generator::base(*n, *k)).collect()).unwrap();
        let dv = d
            .iter()
            .map(|terms| {
                let mut p = Poly::zero();
                for (c, f) in terms.iter() {
                    p.add_term(t.monomial(f).unwrap(), rat(*c));
                }
                p
            })
            .collect();
        Arc::new(Cdga::new("m", t, dv).unwrap())
    }

    fn s2() -> Arc<Cdga> {
        model(&[("x", 2), ("y", 3)], &[&[], &[(1, &[(0, 2)])]])
    }

    fn cp2() -> Arc<Cdga> {
        model(&[("x", 2), ("y", 5)], &[&[], &[(1, &[(0, 3)])]])
    }

    // Independent oracle: dim H^n = dim C^n - rank d_n - rank d_{n-1} from
    // dense matrices.
    fn dense_dims(a: &Cdga, max: u32) -> Vec<usize> {
        let t = a.table();
        let rank = |n: u32| -> usize {
            let src = t.basis_of_degree(n);
            let dst = t.basis_of_degree(n + 1);
            let rows: Vec<Vec<Rational>> = src
                .iter()
                .map(|m| {
                    let dm = a.differential(&Poly::from_monomial(m.clone(), Rational::one()));
                    dst.iter().map(|b| dm.coefficient(b)).collect()
                })
                .collect();
            if dst.is_empty() {
                0
            } else {
                rank_dense(&rows)
            }
        };
        (0..=max)
            .map(|n| {
                let c = t.basis_of_degree(n).len();
                c - rank(n) - if n == 0 { 0 } else { rank(n - 1) }
            })
            .collect()
    }

    #[test]
    fn sphere_and_projective_plane() {
        let h = CohomologyBasis::compute(s2(), 8).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 1, 0, 0, 0, 0, 0, 0]);
        let h = CohomologyBasis::compute(cp2(), 8).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 1, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn dims_match_dense_oracle() {
        let m = model(
            &[("x", 2), ("w", 2), ("y", 3), ("z", 5)],
            &[&[], &[], &[(1, &[(0, 2)]), (-1, &[(1, 2)])], &[(1, &[(0, 1), (1, 2)])]],
        );
        let h = CohomologyBasis::compute(Arc::clone(&m), 12).unwrap();
        assert_eq!(h.dims(), dense_dims(&m, 12));
    }

    #[test]
    fn cup_products() {
        let h = CohomologyBasis::compute(s2(), 6).unwrap();
        let x = Class::basis(2, 1, 0);
        assert!(h.cup(&x, &x).unwrap().is_zero());
        assert_eq!(h.cup(&h.unit().unwrap(), &x).unwrap(), x);
        let h = CohomologyBasis::compute(cp2(), 6).unwrap();
        let x = Class::basis(2, 1, 0);
        let x2 = h.cup(&x, &x).unwrap();
        assert_eq!(h.format_class(&x2), "[x^2]");
        assert!(matches!(h.cup(&x2, &x2), Err(Error::Range { .. })));
    }

    #[test]
    fn reduction_kills_coboundaries() {
        let m = cp2();
        let h = CohomologyBasis::compute(Arc::clone(&m), 10).unwrap();
        let t = m.table();
        let xy = t.mul(&t.gen(0), &t.gen(1));
        let dxy = m.differential(&xy);
        assert!(h.reduce_in_degree(8, &dxy).unwrap().is_zero());
        let x2 = t.pow(&t.gen(0), 2);
        assert_eq!(h.reduce(&x2.scale(&rat(5))).unwrap(), Class::basis(4, 1, 0).scale(&rat(5)));
        let x4 = t.pow(&t.gen(0), 4);
        assert!(h.is_coboundary(8, &x4).unwrap());
        assert!(matches!(h.reduce(&xy), Err(Error::NotCocycle(7))));
    }

    #[test]
    fn refuses_broken_models() {
        let m = model(
            &[("x", 2), ("y", 3), ("z", 4)],
            &[&[], &[(1, &[(0, 2)])], &[(1, &[(0, 1), (1, 1)])]],
        );
        assert!(CohomologyBasis::compute(m, 4).is_err());
    }
}
