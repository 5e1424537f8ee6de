//! The brane coproduct `δ_ns(u×v) = ev*(ω·c*(u))·v` on the model of
//! `Map(S^k, M)`, the vanishing verifier for `ev*ω ⌣ α`, and the comparison
//! of the shriek-map coproduct with it.

use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{format_rational, Poly, Rational};
use crate::cdga::{Cdga, CdgaMorphism};
use crate::duality::{elliptic_report, formal_dimension, orientation_class, window_width, PoincareData};
use crate::error::{Error, Result};
use crate::homology::{Class, CohomologyBasis};
use crate::linalg::{from_entries, kernel_and_image};
use crate::mapping::{DiskModel, SphereModel, SphereSpaceModel};
use crate::shriek::{extlift, lambda_from_class, ShriekCertificate};

/// Everything the coproduct needs: the sphere-space model, cohomology of the
/// base and of the model, and the orientation class.
#[derive(Debug)]
pub struct SphereSpaceContext {
    pub ssm: SphereSpaceModel,
    /// Cohomology of the (filtration-ordered) base through `max(bound, m + width)`.
    pub base: CohomologyBasis,
    pub poincare: PoincareData,
    /// Cohomology of the sphere-space model through `bound`.
    pub cohomology: CohomologyBasis,
    pub bound: u32,
    ev_omega: Poly,
}

impl SphereSpaceContext {
    pub fn build(a: &Cdga, k: u32, bound: u32) -> Result<Self> {
        let ssm = SphereSpaceModel::build(a, k)?;
        Self::from_model(ssm, bound)
    }

    pub fn from_model(ssm: SphereSpaceModel, bound: u32) -> Result<Self> {
        let base_alg = Arc::clone(ssm.base());
        let m = formal_dimension(&base_alg);
        if m < 0 || m as u32 > bound {
            return Err(Error::Bound {
                bound,
                required: m.max(0) as u32,
            });
        }
        let m = m as u32;
        let top = bound.max(m + window_width(&base_alg));
        let base = CohomologyBasis::compute(base_alg, top)?;
        let poincare = orientation_class(&base, m)?;
        let cohomology = CohomologyBasis::compute(Arc::clone(ssm.algebra()), bound)?;
        let ev_omega = ssm.evaluation().apply(&poincare.omega_rep);
        Ok(Self {
            ssm,
            base,
            poincare,
            cohomology,
            bound,
            ev_omega,
        })
    }

    pub fn m(&self) -> u32 {
        self.poincare.m
    }

    /// `ev*ω` at the cochain level.
    pub fn ev_omega(&self) -> &Poly {
        &self.ev_omega
    }

    /// `c*` on a class of the sphere-space model.
    pub fn constants_class(&self, u: &Class) -> Result<Class> {
        let rep = self.cohomology.representative(u)?;
        self.base.reduce_in_degree(u.degree, &self.ssm.constants().apply(&rep))
    }

    /// `δ_ns` on cocycle representatives of degrees `du` and `dv`.
    pub fn ns_coproduct_of_reps(&self, du: u32, u: &Poly, dv: u32, v: &Poly) -> Result<Class> {
        let n = du + dv + self.m();
        if n > self.bound {
            return Err(Error::Range {
                degree: n,
                max: self.bound,
            });
        }
        let base = self.ssm.base();
        let c_u = self.ssm.constants().apply(u);
        let omega_c = base.mul(&self.poincare.omega_rep, &c_u);
        let lifted = self.ssm.evaluation().apply(&omega_c);
        let product = self.ssm.algebra().mul(&lifted, v);
        self.cohomology.reduce_in_degree(n, &product)
    }

    /// `δ_ns(u×v)`.
    pub fn ns_coproduct(&self, u: &Class, v: &Class) -> Result<Class> {
        let ur = self.cohomology.representative(u)?;
        let vr = self.cohomology.representative(v)?;
        self.ns_coproduct_of_reps(u.degree, &ur, v.degree, &vr)
    }

    /// `ev*ω ⌣ α`.
    pub fn ev_omega_cup(&self, alpha: &Class) -> Result<Class> {
        let rep = self.cohomology.representative(alpha)?;
        let n = alpha.degree + self.m();
        if n > self.bound {
            return Err(Error::Range {
                degree: n,
                max: self.bound,
            });
        }
        self.cohomology
            .reduce_in_degree(n, &self.ssm.algebra().mul(&self.ev_omega, &rep))
    }

    /// A basis of `ker(c*: H^n(Map) → H^n(M))`.
    pub fn constants_kernel(&self, n: u32) -> Result<Vec<Class>> {
        let dim = self.cohomology.dim(n)?;
        let images = self
            .cohomology
            .basis_classes(n)?
            .iter()
            .map(|c| {
                let img = self.constants_class(c)?;
                Ok(from_entries(img.coords.into_iter().enumerate()))
            })
            .collect::<Result<Vec<_>>>()?;
        let (kernel, _) = kernel_and_image(&images);
        Ok(kernel
            .into_iter()
            .map(|v| {
                let mut c = Class::zero(n, dim);
                for (i, x) in v {
                    c.coords[i] = x;
                }
                c
            })
            .collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoproductEntry {
    pub u_degree: u32,
    pub u_index: usize,
    pub v_degree: u32,
    pub v_index: usize,
    pub value: Class,
}

/// `δ_ns(u×v)` on all pairs of basis classes with `|u| + |v| + m ≤ bound`.
#[derive(Clone, Debug, Serialize)]
pub struct CoproductTable {
    pub k: u32,
    pub m: u32,
    pub bound: u32,
    pub entries: Vec<CoproductEntry>,
}

impl CoproductTable {
    pub fn build(ctx: &SphereSpaceContext) -> Result<Self> {
        let m = ctx.m();
        let mut pairs = Vec::new();
        for du in 0..=ctx.bound - m {
            for dv in 0..=ctx.bound - m - du {
                for i in 0..ctx.cohomology.dim(du)? {
                    for j in 0..ctx.cohomology.dim(dv)? {
                        pairs.push((du, i, dv, j));
                    }
                }
            }
        }
        let entries = pairs
            .into_par_iter()
            .map(|(du, i, dv, j)| {
                let u = Class::basis(du, ctx.cohomology.dim(du)?, i);
                let v = Class::basis(dv, ctx.cohomology.dim(dv)?, j);
                Ok(CoproductEntry {
                    u_degree: du,
                    u_index: i,
                    v_degree: dv,
                    v_index: j,
                    value: ctx.ns_coproduct(&u, &v)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            k: ctx.ssm.k(),
            m,
            bound: ctx.bound,
            entries,
        })
    }

    pub fn get(&self, u_degree: u32, u_index: usize, v_degree: u32, v_index: usize) -> Option<&Class> {
        self.entries
            .iter()
            .find(|e| (e.u_degree, e.u_index, e.v_degree, e.v_index) == (u_degree, u_index, v_degree, v_index))
            .map(|e| &e.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassVerdict {
    pub degree: u32,
    pub index: usize,
    pub class: String,
    /// `ev*ω ⌣ α`, formatted.
    pub product: String,
    pub product_zero: bool,
    /// `χ·(ev*ω ⌣ α) = 0`.
    pub vanishes: bool,
}

/// The splitting `H^n(Map) ≅ H^n(M) ⊕ ker c*` and the coproduct identities
/// on it, in one degree.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeDecomposition {
    pub degree: u32,
    pub dim: usize,
    pub base_dim: usize,
    pub kernel_dim: usize,
    /// `c*∘ev* = id` on `H^n(M)` and the dimensions add up.
    pub splits: bool,
    /// `δ_ns(α×1) = 0` for a basis of `ker c*`.
    pub kernel_left_vanishes: bool,
    /// `δ_ns(1×α) = ev*ω ⌣ α` for a basis of `H^n`.
    pub unit_left_matches: bool,
}

impl DegreeDecomposition {
    pub fn holds(&self) -> bool {
        self.splits && self.kernel_left_vanishes && self.unit_left_matches
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub model: String,
    pub k: u32,
    pub chi: Option<i64>,
    pub m: i64,
    pub bound: u32,
    pub applicable: bool,
    pub reason: Option<String>,
    pub verdicts: Vec<ClassVerdict>,
    pub decomposition: Vec<DegreeDecomposition>,
    pub pass: bool,
}

impl VanishingReport {
    fn not_applicable(model: &str, k: u32, chi: Option<i64>, m: i64, bound: u32, reason: String) -> Self {
        Self {
            model: model.to_string(),
            k,
            chi,
            m,
            bound,
            applicable: false,
            reason: Some(reason),
            verdicts: Vec::new(),
            decomposition: Vec::new(),
            pass: false,
        }
    }

    pub fn decomposition_holds(&self) -> bool {
        self.decomposition.iter().all(|d| d.holds())
    }
}

/// Checks `χ·(ev*ω ⌣ α) = 0` for every basis class `α` of `H^{>0}` with
/// `|α| + m ≤ bound`, together with the `ker c*` decomposition facts.
pub fn verify_vanishing(a: &Cdga, k: u32, bound: u32) -> Result<VanishingReport> {
    let label = a.label().to_string();
    let m = formal_dimension(a);
    let report = elliptic_report(&Arc::new(a.clone()), Some(k))?;
    let chi = report.chi;
    let refuse = |reason: String| Ok(VanishingReport::not_applicable(&label, k, chi, m, bound, reason));
    if k == 0 {
        return refuse("k must be at least 1".into());
    }
    if k >= 2 {
        if k.is_multiple_of(2) {
            return refuse(format!("k = {k} is even; the vanishing statement needs k odd"));
        }
        if let Some(g) = a.table().generators().iter().find(|g| g.degree <= k) {
            return refuse(format!("generator {} has degree {} ≤ k = {k}", g.name, g.degree));
        }
    }
    let Some(chi) = chi else {
        return refuse("cohomology is not certified finite-dimensional".into());
    };
    if m < 0 || m as u32 > bound {
        return refuse(format!("bound {bound} is below the formal dimension {m}"));
    }
    let ctx = SphereSpaceContext::build(a, k, bound)?;
    vanishing_with_context(&ctx, &label, chi)
}

pub fn vanishing_with_context(ctx: &SphereSpaceContext, label: &str, chi: i64) -> Result<VanishingReport> {
    let m = ctx.m();
    let chi_q = Rational::from_integer(chi.into());
    let coh = &ctx.cohomology;
    let mut jobs = Vec::new();
    for n in 1..=ctx.bound - m {
        for i in 0..coh.dim(n)? {
            jobs.push((n, i));
        }
    }
    let verdicts = jobs
        .into_par_iter()
        .map(|(n, i)| {
            let alpha = Class::basis(n, coh.dim(n)?, i);
            let product = ctx.ev_omega_cup(&alpha)?;
            Ok(ClassVerdict {
                degree: n,
                index: i,
                class: coh.format_class(&alpha),
                product: coh.format_class(&product),
                product_zero: product.is_zero(),
                vanishes: product.scale(&chi_q).is_zero(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decomposition = (1..=ctx.bound - m)
        .into_par_iter()
        .map(|n| decompose(ctx, n))
        .collect::<Result<Vec<_>>>()?;
    let pass = verdicts.iter().all(|v| v.vanishes);
    Ok(VanishingReport {
        model: label.to_string(),
        k: ctx.ssm.k(),
        chi: Some(chi),
        m: m as i64,
        bound: ctx.bound,
        applicable: true,
        reason: None,
        verdicts,
        decomposition,
        pass,
    })
}

fn decompose(ctx: &SphereSpaceContext, n: u32) -> Result<DegreeDecomposition> {
    let coh = &ctx.cohomology;
    let dim = coh.dim(n)?;
    let base_dim = ctx.base.dim(n)?;
    let kernel = ctx.constants_kernel(n)?;
    let mut splits = kernel.len() + base_dim == dim;
    for b in ctx.base.representatives(n)? {
        let up = coh.reduce_in_degree(n, &ctx.ssm.evaluation().apply(&b))?;
        let back = ctx.constants_class(&up)?;
        splits &= back == ctx.base.reduce_in_degree(n, &b)?;
    }
    let unit = coh.unit()?;
    let mut kernel_left_vanishes = true;
    for alpha in &kernel {
        kernel_left_vanishes &= ctx.ns_coproduct(alpha, &unit)?.is_zero();
    }
    let mut unit_left_matches = true;
    for alpha in coh.basis_classes(n)? {
        unit_left_matches &= ctx.ns_coproduct(&unit, &alpha)? == ctx.ev_omega_cup(&alpha)?;
    }
    Ok(DegreeDecomposition {
        degree: n,
        dim,
        base_dim,
        kernel_dim: kernel.len(),
        splits,
        kernel_left_vanishes,
        unit_left_matches,
    })
}

/// `λ` with `[μφ(1)] = λ·ω` in `H^m` of the base.
pub fn lambda_gamma(cert: &ShriekCertificate, base: &CohomologyBasis, pd: &PoincareData) -> Result<Rational> {
    lambda_of(&cert.mu_phi_one, base, pd)
}

fn lambda_of(value: &Poly, base: &CohomologyBasis, pd: &PoincareData) -> Result<Rational> {
    if value.is_zero() {
        return Ok(Rational::zero());
    }
    if value.degree() != Some(pd.m) {
        return Err(Error::Consistency(format!(
            "μφ(1) has degree {:?}, expected the top degree {}",
            value.degree(),
            pd.m
        )));
    }
    let class = base.reduce_in_degree(pd.m, value)?;
    lambda_from_class(&class.coords, &pd.omega.coords)
}

/// The orientation reversal of the sphere model, checked to be an involution.
pub fn tau_involution(sphere: &SphereModel) -> Result<CdgaMorphism> {
    let tau = sphere.involution()?;
    if !tau.compose(&tau)?.is_identity() {
        return Err(Error::Consistency("τ² ≠ id".into()));
    }
    Ok(tau)
}

/// `λ` recomputed on the certificate transported along `τ`, after checking
/// that the transported map is still a cocycle.
pub fn lambda_under_involution(
    cert: &ShriekCertificate,
    disk: &DiskModel,
    base: &CohomologyBasis,
    pd: &PoincareData,
) -> Result<Rational> {
    tau_involution(disk.sphere())?;
    let moved = cert.phi.transport_by_involution(disk)?;
    if let Some((nu, defect)) = moved.cocycle_defect(disk, cert.checked_through)? {
        return Err(Error::Consistency(format!(
            "τ-transported map fails the cocycle identity on {}: {}",
            disk.algebra().table().format_monomial(&nu),
            disk.algebra().format(&defect)
        )));
    }
    let one = disk.algebra().table().unit_monomial();
    let value = moved.value(&one)?;
    let mu = disk.sphere().mu()?;
    let s_table = disk.sphere().algebra().table();
    let value = s_table
        .restrict(value)
        .ok_or_else(|| Error::Structural("φ(1) leaves the sphere model".into()))?;
    lambda_of(&mu.apply(&value), base, pd)
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    /// `λ` read off from the lifted map evaluated at `1`.
    #[serde(serialize_with = "ser_rational")]
    pub lambda_from_lift: Rational,
    pub lift_value: String,
    pub lift_is_cocycle: bool,
    pub checked_through: u32,
    /// `λ·δ_ns(1×1) = λ·ev*ω`, formatted.
    pub scaled_unit_coproduct: String,
    pub pass: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

/// Lifts the certificate's `φ` to the sphere-space model, evaluates at `1`,
/// projects to the base and compares the resulting multiple of `ω` with `λ`.
pub fn compare_coproducts(cert: &ShriekCertificate, ctx: &SphereSpaceContext, through: u32) -> Result<Comparison> {
    let disk = ctx.ssm.disk();
    let lift = extlift(&cert.phi, Arc::clone(disk.algebra()), disk)?;
    if lift.total().table().generators() != ctx.ssm.algebra().table().generators() {
        return Err(Error::Structural(
            "lifted map and sphere-space model are built on different tables".into(),
        ));
    }
    let through = through.min(cert.checked_through);
    let lift_is_cocycle = lift.cocycle_defect(through)?.is_none();
    let at_one = lift.at_unit()?;
    let projected = disk.projection()?.apply(&at_one);
    let lambda = lambda_gamma(cert, &ctx.base, &ctx.poincare)?;
    let lambda_from_lift = lambda_of(&projected, &ctx.base, &ctx.poincare)?;
    let unit = ctx.cohomology.unit()?;
    let scaled = ctx.ns_coproduct(&unit, &unit)?.scale(&lambda);
    Ok(Comparison {
        pass: lift_is_cocycle && lambda == lambda_from_lift,
        lambda,
        lambda_from_lift,
        lift_value: disk.algebra().format(&at_one),
        lift_is_cocycle,
        checked_through: through,
        scaled_unit_coproduct: ctx.cohomology.format_class(&scaled),
    })
}
