#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use num_traits::One;
use rand::rngs::StdRng;
use rand::Rng;

use sullivan::algebra::{GeneratorTable, Monomial, Poly, Rational};
use sullivan::cdga::Cdga;
use sullivan::linalg::rank_dense;
use sullivan::model::ModelSpec;

pub const VALID: [&str; 7] = ["s2", "s3", "cp2", "hp2", "s2xs2", "s4", "s3xs3"];

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn model_path(name: &str) -> PathBuf {
    models_dir().join(format!("{name}.model"))
}

pub fn spec(name: &str) -> ModelSpec {
    let text = std::fs::read_to_string(model_path(name)).expect("bundled model");
    ModelSpec::parse(&text).expect("valid model")
}

pub fn algebra(name: &str) -> Arc<Cdga> {
    Arc::new(spec(name).to_cdga().expect("model builds"))
}

/// The `k` values for which the sphere constructions apply: all generator
/// degrees must exceed `k` when `k ≥ 2`.
pub fn applicable_ks(a: &Cdga) -> Vec<u32> {
    [1u32, 3]
        .into_iter()
        .filter(|&k| k == 1 || a.table().generators().iter().all(|g| g.degree > k))
        .collect()
}

/// A uniformly chosen monomial of degree exactly `n`, or `None` when the
/// random walk gets stuck.
pub fn random_monomial(t: &GeneratorTable, n: u32, rng: &mut StdRng) -> Option<Monomial> {
    for _ in 0..50 {
        let mut exps = vec![0u16; t.len()];
        let mut left = n;
        while left > 0 {
            let choices: Vec<usize> = (0..t.len())
                .filter(|&i| t.degree(i) <= left && !(t.is_odd(i) && exps[i] == 1))
                .collect();
            if choices.is_empty() {
                break;
            }
            let i = choices[rng.gen_range(0..choices.len())];
            exps[i] += 1;
            left -= t.degree(i);
        }
        if left == 0 {
            return t.monomial_from_exponents(exps);
        }
    }
    None
}

/// A random homogeneous element of degree `n` with up to three terms.
pub fn random_element(t: &GeneratorTable, n: u32, rng: &mut StdRng) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..3 {
        if let Some(m) = random_monomial(t, n, rng) {
            p.add_term(m, Rational::from_integer(rng.gen_range(-3i64..=3).into()));
        }
    }
    p
}

/// `dim C^n - rank d_n - rank d_{n-1}` from dense matrices of `d`.
pub fn rank_oracle_dims(a: &Cdga, max: u32) -> Vec<usize> {
    let t = a.table();
    let matrix = |n: u32| -> Vec<Vec<Rational>> {
        let src = t.basis_of_degree(n);
        let dst = t.basis_of_degree(n + 1);
        src.iter()
            .map(|m| {
                let img = a.differential(&Poly::from_monomial(m.clone(), Rational::one()));
                dst.iter().map(|mm| img.coefficient(mm)).collect()
            })
            .collect()
    };
    let ranks: Vec<usize> = (0..=max).map(|n| rank_dense(&matrix(n))).collect();
    (0..=max)
        .map(|n| {
            let c = t.basis_of_degree(n).len();
            c - ranks[n as usize] - if n > 0 { ranks[n as usize - 1] } else { 0 }
        })
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(t: &GeneratorTable, m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return t.one();
    }
    let mut out = Poly::zero();
    for col in 0..n {
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = t.mul(&m[0][col], &cofactor_det(t, &minor));
        if col % 2 == 0 {
            out += &term;
        } else {
            out -= &term;
        }
    }
    out
}

/// Coefficients of `Π(1 - t^{e_j}) / Π(1 - t^{a_i})` through `limit`.
pub fn complete_intersection_series(even: &[u32], relations: &[u32], limit: usize) -> Vec<i64> {
    let mut s = vec![0i64; limit + 1];
    s[0] = 1;
    for &d in relations {
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
