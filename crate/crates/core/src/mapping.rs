//! Models of mapping spaces out of spheres and disks.
//!
//! For a base model `(∧V, d)` with generators `z_1..z_r` ordered so that
//! `d z_t ∈ ∧V(t-1)`:
//!
//! * the sphere model `S^{k-1}V` has generators `z_t` and `s^{k-1}z_t`
//!   (for `k = 1` it is the tensor square, with `z_t⊗1` and `1⊗z_t`),
//! * the disk model `D^kV` adds `s^k z_t` with `d s^k z_t = σz_t + τz_t`,
//! * the sphere-space model is the relative tensor product `D^k ⊗_{S^{k-1}} D^k`.
//!
//! Generator layout is fixed: index `t` holds `z_t` (or `z_t⊗1`), index
//! `r + t` holds `s^{k-1}z_t` (or `1⊗z_t`), and in the disk model index
//! `2r + t` holds `s^k z_t`.

use std::sync::Arc;

use crate::algebra::{rat, Generator, GeneratorTable, Origin, Poly};
use crate::cdga::{apply_derivation, Cdga, CdgaMorphism};
use crate::error::{Error, Result};

pub const ITERATION_CAP: usize = 64;

/// How the degree −1 derivation `s` used in the `k = 1` disk differential
/// acts on the second tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LoopSuspension {
    /// `s(z⊗1) = s(1⊗z) = sz`.
    Symmetric,
    /// `s(z⊗1) = sz`, `s(1⊗z) = 0`. Kept to show that it never converges.
    #[cfg_attr(not(test), allow(dead_code))]
    LeftOnly,
}

pub fn suspension_name(j: u32, name: &str) -> String {
    match j {
        1 => format!("s{name}"),
        _ => format!("s{j}{name}"),
    }
}

#[derive(Clone, Debug)]
pub struct SphereModel {
    k: u32,
    base: Arc<Cdga>,
    algebra: Arc<Cdga>,
}

impl SphereModel {
    /// Builds `S^{k-1}V`. The base is first put in filtration order. For
    /// `k ≥ 2` every generator must have degree greater than `k`.
    pub fn build(base: &Cdga, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ModelConstruction("k must be at least 1".into()));
        }
        if let Some((i, residue)) = base.check_d_squared() {
            return Err(Error::ModelConstruction(format!(
                "{}: d²{} = {} ≠ 0",
                base.label(),
                base.table().generator(i).name,
                base.format(&residue)
            )));
        }
        let base = Arc::new(base.reordered(&base.filtration_order()?)?);
        let t = base.table();
        let r = base.len();
        if k >= 2 {
            if let Some(g) = t.generators().iter().find(|g| g.degree <= k) {
                return Err(Error::ModelConstruction(format!(
                    "generator {} has degree {} but k = {k} needs all degrees above {k}",
                    g.name, g.degree
                )));
            }
        }
        let algebra = if k == 1 {
            let sq = base.tensor(&base)?;
            Cdga::with_table(
                format!("S0({})", base.label()),
                sq.table_arc(),
                sq.d_values().to_vec(),
            )?
        } else {
            let j = k - 1;
            let mut gens = t.generators().to_vec();
            gens.extend(t.generators().iter().map(|g| {
                Generator::new(suspension_name(j, &g.name), g.degree - j, Origin::Suspended(j))
            }));
            let table = GeneratorTable::new(gens)?;
            let susp: Vec<Poly> = (0..2 * r)
                .map(|i| if i < r { table.gen(r + i) } else { Poly::zero() })
                .collect();
            let sign = rat(if j.is_multiple_of(2) { 1 } else { -1 });
            let mut d: Vec<Poly> = (0..r).map(|i| table.embed(base.d_gen(i))).collect();
            for i in 0..r {
                let dv = table.embed(base.d_gen(i));
                d.push(apply_derivation(&table, -(j as i32), &susp, &dv).scale(&sign));
            }
            Cdga::new(format!("S{}({})", j, base.label()), table, d)?
        };
        if let Some((i, _)) = algebra.check_d_squared() {
            return Err(Error::Consistency(format!(
                "sphere model differential squares to a nonzero value on {}",
                algebra.table().generator(i).name
            )));
        }
        Ok(Self {
            k,
            base,
            algebra: Arc::new(algebra),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// The base model in the filtration order used throughout.
    pub fn base(&self) -> &Arc<Cdga> {
        &self.base
    }

    pub fn algebra(&self) -> &Arc<Cdga> {
        &self.algebra
    }

    pub fn rank(&self) -> usize {
        self.base.len()
    }

    /// `σ z_t`: `s^{k-1}z_t` for `k ≥ 2`, `1⊗z_t - z_t⊗1` for `k = 1`.
    pub fn sigma(&self, t: usize) -> Poly {
        let r = self.rank();
        let a = self.algebra.table();
        if self.k == 1 {
            &a.gen(r + t) - &a.gen(t)
        } else {
            a.gen(r + t)
        }
    }

    /// `μ`: multiplication `∧V⊗∧V → ∧V` for `k = 1`, otherwise the map
    /// killing `s^{k-1}V`.
    pub fn mu(&self) -> Result<CdgaMorphism> {
        let r = self.rank();
        let b = self.base.table();
        let values = (0..2 * r)
            .map(|i| {
                if i < r {
                    b.gen(i)
                } else if self.k == 1 {
                    b.gen(i - r)
                } else {
                    Poly::zero()
                }
            })
            .collect();
        CdgaMorphism::new(Arc::clone(&self.algebra), Arc::clone(&self.base), values)
    }

    /// Orientation reversal: `s^{k-1}v ↦ -s^{k-1}v` for `k ≥ 2`, the factor
    /// swap for `k = 1`.
    pub fn involution(&self) -> Result<CdgaMorphism> {
        let r = self.rank();
        let a = self.algebra.table();
        let values = (0..2 * r)
            .map(|i| match (self.k, i < r) {
                (1, true) => a.gen(i + r),
                (1, false) => a.gen(i - r),
                (_, true) => a.gen(i),
                (_, false) => -a.gen(i),
            })
            .collect();
        CdgaMorphism::new(Arc::clone(&self.algebra), Arc::clone(&self.algebra), values)
    }
}

#[derive(Clone, Debug)]
pub struct DiskModel {
    sphere: SphereModel,
    algebra: Arc<Cdga>,
    tau: Vec<Poly>,
}

impl DiskModel {
    pub fn build(sphere: &SphereModel) -> Result<Self> {
        Self::build_with(sphere, LoopSuspension::Symmetric, ITERATION_CAP)
    }

    pub(crate) fn build_with(
        sphere: &SphereModel,
        rule: LoopSuspension,
        cap: usize,
    ) -> Result<Self> {
        let k = sphere.k();
        let r = sphere.rank();
        let s_alg = sphere.algebra();
        let mut gens = s_alg.table().generators().to_vec();
        gens.extend(sphere.base().table().generators().iter().map(|g| {
            Generator::new(suspension_name(k, &g.name), g.degree - k, Origin::Disk(k))
        }));
        let table = Arc::new(GeneratorTable::new(gens)?);
        let mut d: Vec<Poly> = (0..2 * r).map(|i| table.embed(s_alg.d_gen(i))).collect();
        d.extend((0..r).map(|_| Poly::zero()));
        // s^k as a derivation: base generators (and, for k = 1 with the
        // symmetric rule, the second copies) go to s^k z
        let susp: Vec<Poly> = (0..3 * r)
            .map(|i| {
                if i < r || (k == 1 && rule == LoopSuspension::Symmetric && i < 2 * r) {
                    table.gen(2 * r + i % r)
                } else {
                    Poly::zero()
                }
            })
            .collect();
        let base = sphere.base();
        for t in 0..r {
            let sigma = table.embed(&sphere.sigma(t));
            let tau = if k >= 2 {
                let sign = rat(if k.is_multiple_of(2) { 1 } else { -1 });
                apply_derivation(&table, -(k as i32), &susp, &table.embed(base.d_gen(t))).scale(&sign)
            } else {
                let mut sum = Poly::zero();
                let mut term = table.gen(t);
                let mut n = 1usize;
                loop {
                    let dterm = apply_derivation(&table, 1, &d, &term);
                    term = apply_derivation(&table, -1, &susp, &dterm).scale(&rat_recip(n));
                    if term.is_zero() {
                        break;
                    }
                    sum += &term;
                    if n == cap {
                        return Err(Error::IterationCap {
                            generator: base.table().generator(t).name.clone(),
                            cap,
                        });
                    }
                    n += 1;
                }
                -sum
            };
            let earlier = |i: usize| i % r < t;
            if !tau.uses_only(earlier) {
                return Err(Error::Consistency(format!(
                    "τ{} leaves the previous stage",
                    base.table().generator(t).name
                )));
            }
            d[2 * r + t] = &sigma + &tau;
        }
        let label = format!("D{}({})", k, base.label());
        let algebra = Cdga::with_table(label, table, d)?;
        if let Some((i, residue)) = algebra.check_d_squared() {
            return Err(Error::Consistency(format!(
                "disk model: d²{} = {}",
                algebra.table().generator(i).name,
                algebra.format(&residue)
            )));
        }
        let tau = (0..r)
            .map(|t| algebra.d_gen(2 * r + t) - &algebra.table().embed(&sphere.sigma(t)))
            .collect();
        Ok(Self {
            sphere: sphere.clone(),
            algebra: Arc::new(algebra),
            tau,
        })
    }

    pub fn k(&self) -> u32 {
        self.sphere.k()
    }

    pub fn sphere(&self) -> &SphereModel {
        &self.sphere
    }

    pub fn algebra(&self) -> &Arc<Cdga> {
        &self.algebra
    }

    pub fn rank(&self) -> usize {
        self.sphere.rank()
    }

    /// Index of `s^k z_t` in the disk algebra.
    pub fn disk_index(&self, t: usize) -> usize {
        2 * self.rank() + t
    }

    pub fn is_disk_generator(&self, i: usize) -> bool {
        i >= 2 * self.rank()
    }

    pub fn sigma(&self, t: usize) -> Poly {
        self.algebra.table().embed(&self.sphere.sigma(t))
    }

    pub fn tau(&self, t: usize) -> &Poly {
        &self.tau[t]
    }

    /// The projection onto the base killing every suspension; for `k = 1`
    /// both tensor copies map to the base.
    pub fn projection(&self) -> Result<CdgaMorphism> {
        let r = self.rank();
        let b = self.sphere.base().table();
        let k = self.k();
        let values = (0..3 * r)
            .map(|i| {
                if i < r || (k == 1 && i < 2 * r) {
                    b.gen(i % r)
                } else {
                    Poly::zero()
                }
            })
            .collect();
        CdgaMorphism::new(
            Arc::clone(&self.algebra),
            Arc::clone(self.sphere.base()),
            values,
        )
    }

    /// Extends the sphere involution by `s^k z ↦ -s^k z`.
    pub fn involution(&self) -> Result<CdgaMorphism> {
        let r = self.rank();
        let a = self.algebra.table();
        let on_sphere = self.sphere.involution()?;
        let mut values: Vec<Poly> = on_sphere.values().iter().map(|v| a.embed(v)).collect();
        values.extend((0..r).map(|t| -a.gen(2 * r + t)));
        CdgaMorphism::new(Arc::clone(&self.algebra), Arc::clone(&self.algebra), values)
    }
}

fn rat_recip(n: usize) -> crate::algebra::Rational {
    crate::algebra::rat_frac(1, n as i64)
}

/// `left ⊗_S D`, where the first `2r` generators of `left` are those of the
/// sphere model `S` of `disk`. The disk suspension generators are appended
/// with names carrying `suffix`.
pub fn relative_tensor(left: &Cdga, disk: &DiskModel, suffix: &str) -> Result<Cdga> {
    let r = disk.rank();
    let s_alg = disk.sphere().algebra();
    let lt = left.table();
    let over_s = lt.len() >= 2 * r
        && (0..2 * r).all(|i| {
            lt.generator(i) == s_alg.table().generator(i)
                && s_alg.table().restrict(left.d_gen(i)).as_ref() == Some(s_alg.d_gen(i))
        });
    if !over_s {
        return Err(Error::Structural(format!(
            "{} is not an algebra over {}",
            left.label(),
            s_alg.label()
        )));
    }
    let n = left.len();
    let dt = disk.algebra().table();
    let mut gens = lt.generators().to_vec();
    for t in 0..r {
        let g = dt.generator(disk.disk_index(t));
        gens.push(Generator::new(
            format!("{}{}", g.name, suffix),
            g.degree,
            g.origin.clone(),
        ));
    }
    let table = GeneratorTable::new(gens)?;
    let map: Vec<usize> = (0..3 * r)
        .map(|i| if i < 2 * r { i } else { n + i - 2 * r })
        .collect();
    let mut d: Vec<Poly> = (0..n).map(|i| table.embed(left.d_gen(i))).collect();
    d.extend((0..r).map(|t| table.reindex(disk.algebra().d_gen(disk.disk_index(t)), &map)));
    let out = Cdga::new(format!("{}⊗_S{}", left.label(), disk.algebra().label()), table, d)?;
    if let Some((i, _)) = out.check_d_squared() {
        return Err(Error::Consistency(format!(
            "relative tensor product: d² ≠ 0 on {}",
            out.table().generator(i).name
        )));
    }
    Ok(out)
}

/// The model `D^k ⊗_{S^{k-1}} D^k` of `Map(S^k, M)` with the evaluation
/// inclusion of the base and the projection onto constant maps.
#[derive(Clone, Debug)]
pub struct SphereSpaceModel {
    disk: DiskModel,
    algebra: Arc<Cdga>,
    evaluation: CdgaMorphism,
    constants: CdgaMorphism,
}

impl SphereSpaceModel {
    pub fn build(base: &Cdga, k: u32) -> Result<Self> {
        let sphere = SphereModel::build(base, k)?;
        let disk = DiskModel::build(&sphere)?;
        Self::from_disk(disk)
    }

    pub fn from_disk(disk: DiskModel) -> Result<Self> {
        let r = disk.rank();
        let k = disk.k();
        let algebra = Arc::new(relative_tensor(disk.algebra(), &disk, "_r")?);
        let base = Arc::clone(disk.sphere().base());
        let a = algebra.table();
        let evaluation = CdgaMorphism::new(
            Arc::clone(&base),
            Arc::clone(&algebra),
            (0..r).map(|t| a.gen(t)).collect(),
        )?;
        let constants = CdgaMorphism::new(
            Arc::clone(&algebra),
            Arc::clone(&base),
            (0..a.len())
                .map(|i| {
                    if i < r || (k == 1 && i < 2 * r) {
                        base.table().gen(i % r)
                    } else {
                        Poly::zero()
                    }
                })
                .collect(),
        )?;
        if !evaluation.compose(&constants)?.is_identity() {
            return Err(Error::Consistency(
                "constants projection does not split the evaluation inclusion".into(),
            ));
        }
        Ok(Self {
            disk,
            algebra,
            evaluation,
            constants,
        })
    }

    pub fn k(&self) -> u32 {
        self.disk.k()
    }

    pub fn base(&self) -> &Arc<Cdga> {
        self.disk.sphere().base()
    }

    pub fn disk(&self) -> &DiskModel {
        &self.disk
    }

    pub fn algebra(&self) -> &Arc<Cdga> {
        &self.algebra
    }

    pub fn evaluation(&self) -> &CdgaMorphism {
        &self.evaluation
    }

    pub fn constants(&self) -> &CdgaMorphism {
        &self.constants
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::CohomologyBasis;

    fn model(gens: &[(&str, u32)], d: &[&str]) -> Cdga {
        crate::model::ModelSpec::from_parts("m", gens, d)
            .unwrap()
            .to_cdga()
            .unwrap()
    }

    fn s2() -> Cdga {
        model(&[("x", 2), ("y", 3)], &["0", "x^2"])
    }

    fn s4() -> Cdga {
        model(&[("x", 4), ("y", 7)], &["0", "x^2"])
    }

    #[test]
    fn loop_sphere_model_is_tensor_square() {
        let s = SphereModel::build(&s2(), 1).unwrap();
        assert_eq!(s.algebra().len(), 4);
        assert!(s.algebra().check_d_squared().is_none());
    }

    #[test]
    fn higher_sphere_model_degrees() {
        let s = SphereModel::build(&s4(), 3).unwrap();
        let a = s.algebra();
        let names: Vec<(String, u32)> = a
            .table()
            .generators()
            .iter()
            .map(|g| (g.name.clone(), g.degree))
            .collect();
        assert_eq!(
            names,
            vec![
                ("x".into(), 4),
                ("y".into(), 7),
                ("s2x".into(), 2),
                ("s2y".into(), 5)
            ]
        );
        // d(s²y) = (+1)·s²(x²) = 2 x s²x
        assert_eq!(a.format(a.d_gen(3)), "2 x s2x");
        assert!(SphereModel::build(&s2(), 3).is_err());
        assert!(SphereModel::build(&s2(), 2).is_err());
    }

    #[test]
    fn higher_disk_model_tau() {
        let s = SphereModel::build(&s4(), 3).unwrap();
        let d = DiskModel::build(&s).unwrap();
        let a = d.algebra();
        assert_eq!(a.format(d.tau(1)), "-2 x s3x");
        assert!(d.tau(0).is_zero());
        assert_eq!(a.format(a.d_gen(d.disk_index(0))), "s2x");
    }

    #[test]
    fn loop_disk_model_s2() {
        let s = SphereModel::build(&s2(), 1).unwrap();
        let d = DiskModel::build(&s).unwrap();
        let a = d.algebra();
        assert_eq!(a.format(a.d_gen(d.disk_index(0))), "-x_1 + x_2");
        assert_eq!(a.format(d.tau(1)), "-x_1 sx - x_2 sx");
    }

    #[test]
    fn one_sided_loop_suspension_does_not_terminate() {
        let s = SphereModel::build(&s2(), 1).unwrap();
        let err = DiskModel::build_with(&s, LoopSuspension::LeftOnly, ITERATION_CAP).unwrap_err();
        assert!(matches!(err, Error::IterationCap { ref generator, .. } if generator == "y"));
    }

    #[test]
    fn disk_models_retract_onto_the_base() {
        for (base, k) in [(s2(), 1), (s4(), 3), (model(&[("x", 2), ("y", 5)], &["0", "x^3"]), 1)] {
            let d = DiskModel::build(&SphereModel::build(&base, k).unwrap()).unwrap();
            let hd = CohomologyBasis::compute(Arc::clone(d.algebra()), 10).unwrap();
            let hb = CohomologyBasis::compute(Arc::clone(d.sphere().base()), 10).unwrap();
            assert_eq!(hd.dims(), hb.dims());
            let proj = d.projection().unwrap();
            for n in 0..=10 {
                for rep in &hd.representatives(n).unwrap() {
                    assert!(!hb.reduce_in_degree(n, &proj.apply(rep)).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn relative_tensor_with_sphere_is_the_disk() {
        let s = SphereModel::build(&s2(), 1).unwrap();
        let d = DiskModel::build(&s).unwrap();
        let t = relative_tensor(s.algebra(), &d, "").unwrap();
        assert_eq!(t.table(), d.algebra().table());
        assert_eq!(t.d_values(), d.algebra().d_values());
    }

    #[test]
    fn free_loop_model_of_s2() {
        let ssm = SphereSpaceModel::build(&s2(), 1).unwrap();
        let h = CohomologyBasis::compute(Arc::clone(ssm.algebra()), 6).unwrap();
        assert_eq!(h.dim(0).unwrap(), 1);
        assert!(h.dim(1).unwrap() > 0);
        assert!(ssm.evaluation().compose(ssm.constants()).unwrap().is_identity());
    }

    #[test]
    fn sphere_space_model_of_s4() {
        let ssm = SphereSpaceModel::build(&s4(), 3).unwrap();
        assert_eq!(ssm.algebra().len(), 8);
        assert!(ssm.algebra().check_d_squared().is_none());
    }

    #[test]
    fn involutions_square_to_identity() {
        for (base, k) in [(s2(), 1), (s4(), 3)] {
            let d = DiskModel::build(&SphereModel::build(&base, k).unwrap()).unwrap();
            let inv = d.involution().unwrap();
            assert!(inv.compose(&inv).unwrap().is_identity());
            let sinv = d.sphere().involution().unwrap();
            assert!(sinv.compose(&sinv).unwrap().is_identity());
        }
    }
}
