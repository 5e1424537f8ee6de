//! Exact sparse linear algebra over the rationals.
//!
//! Vectors are sorted `(column, value)` lists without zeros. An [`Echelon`]
//! keeps rows keyed by their leading column; each row carries a tag vector
//! that records how it was combined, which is how kernels and coordinates are
//! read off.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::algebra::Rational;

pub type SparseVec = Vec<(usize, Rational)>;

/// `v + c·w`.
pub fn axpy(v: &[(usize, Rational)], c: &Rational, w: &[(usize, Rational)]) -> SparseVec {
    if c.is_zero() {
        return v.to_vec();
    }
    let mut out = Vec::with_capacity(v.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        let take_v = j == w.len() || (i < v.len() && v[i].0 < w[j].0);
        let take_w = i == v.len() || (j < w.len() && w[j].0 < v[i].0);
        if take_v {
            out.push(v[i].clone());
            i += 1;
        } else if take_w {
            out.push((w[j].0, c * &w[j].1));
            j += 1;
        } else {
            let s = &v[i].1 + c * &w[j].1;
            if !s.is_zero() {
                out.push((v[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(v: &[(usize, Rational)], c: &Rational) -> SparseVec {
    if c.is_zero() {
        return Vec::new();
    }
    v.iter().map(|(i, x)| (*i, x * c)).collect()
}

pub fn unit(i: usize) -> SparseVec {
    vec![(i, Rational::one())]
}

/// Builds a sparse vector from `(column, value)` pairs in any order.
pub fn from_entries(entries: impl IntoIterator<Item = (usize, Rational)>) -> SparseVec {
    let mut map: std::collections::BTreeMap<usize, Rational> = Default::default();
    for (i, x) in entries {
        *map.entry(i).or_insert_with(Rational::zero) += x;
    }
    map.into_iter().filter(|(_, x)| !x.is_zero()).collect()
}

#[derive(Clone, Debug)]
struct Row {
    vec: SparseVec,
    tag: SparseVec,
}

/// Rows in echelon form, each normalized to leading coefficient 1.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: HashMap<usize, Row>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.rows.contains_key(&col)
    }

    /// Eliminates every pivot column from `v`, applying the same operations
    /// to `tag`. Returns the residues.
    pub fn reduce(&self, mut v: SparseVec, mut tag: SparseVec) -> (SparseVec, SparseVec) {
        let mut i = 0;
        while i < v.len() {
            let col = v[i].0;
            match self.rows.get(&col) {
                Some(row) => {
                    let c = -v[i].1.clone();
                    v = axpy(&v, &c, &row.vec);
                    tag = axpy(&tag, &c, &row.tag);
                }
                None => i += 1,
            }
        }
        (v, tag)
    }

    /// The row vectors, in no particular order.
    pub fn into_vectors(self) -> impl Iterator<Item = SparseVec> {
        self.rows.into_values().map(|r| r.vec)
    }

    /// Reduces and inserts. Returns `None` if `v` was independent of the
    /// existing rows, otherwise the residual tag of the dependency.
    pub fn insert(&mut self, v: SparseVec, tag: SparseVec) -> Option<SparseVec> {
        let (v, tag) = self.reduce(v, tag);
        match v.first() {
            None => Some(tag),
            Some((col, lead)) => {
                let inv = lead.recip();
                let col = *col;
                self.rows.insert(
                    col,
                    Row {
                        vec: scale(&v, &inv),
                        tag: scale(&tag, &inv),
                    },
                );
                None
            }
        }
    }
}

/// Kernel of the linear map sending basis vector `i` to `images[i]`, together
/// with an echelon basis of the image. Kernel vectors are expressed in the
/// source basis.
pub fn kernel_and_image(images: &[SparseVec]) -> (Vec<SparseVec>, Echelon) {
    // sparse rows first keeps fill-in down
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by_key(|&i| images[i].len());
    let mut image = Echelon::new();
    let mut kernel = Vec::new();
    for i in order {
        if let Some(k) = image.insert(images[i].clone(), unit(i)) {
            kernel.push(k);
        }
    }
    (kernel, image)
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "square matrix");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn rank_dense(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if !row[col].is_zero() {
                let f = &row[col] / &pivot_row[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= &f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}
