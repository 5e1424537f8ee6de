//! Acceptance gate: runs criteria 1 to 9 and prints one line per criterion.
//! All comparisons are exact; the only tolerances are the runtime ceilings
//! below. Set `UPDATE_GOLDEN=1` to rewrite the CLI golden files.

mod common;

use std::path::PathBuf;
use std::process::Command as Process;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use sullivan::algebra::{Poly, Rational};
use sullivan::cdga::Cdga;
use sullivan::duality::{
    cohomology_with_window, diagonal_class, elliptic_report, euler_characteristic, formal_dimension,
    loop_dimension, orientation_class, quotient_dims,
};
use sullivan::homology::{Class, CohomologyBasis};
use sullivan::mapping::{DiskModel, SphereModel, SphereSpaceModel};
use sullivan::model::ModelSpec;
use sullivan::shriek::{alpha_matrix, build_phi};
use sullivan::string_ops::{lambda_gamma, lambda_under_involution, verify_vanishing, SphereSpaceContext};

/// Runtime ceilings: criterion 1 and the whole criterion 6 suite.
const SOUNDNESS_LIMIT: Duration = Duration::from_secs(60);
const MAIN_THEOREM_LIMIT: Duration = Duration::from_secs(600);
/// Degree ceiling for the soundness suites.
const SOUNDNESS_DEGREE: u32 = 16;
const PERTURBATION_TRIALS: usize = 20;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut checked = 0usize;
    for name in VALID {
        let base = algebra(name);
        let mut algebras: Vec<(String, Arc<Cdga>)> = vec![(name.to_string(), Arc::clone(&base))];
        for k in applicable_ks(&base) {
            let sphere = ok(SphereModel::build(&base, k), "sphere model")?;
            let disk = ok(DiskModel::build(&sphere), "disk model")?;
            let ssm = ok(SphereSpaceModel::from_disk(disk.clone()), "sphere-space model")?;
            algebras.push((format!("{name} S^{} k={k}", k - 1), Arc::clone(sphere.algebra())));
            algebras.push((format!("{name} D^{k}"), Arc::clone(disk.algebra())));
            algebras.push((format!("{name} Map(S^{k})"), Arc::clone(ssm.algebra())));
        }
        for (label, a) in algebras {
            ensure!(a.check_d_squared().is_none(), "d² ≠ 0 on {label}");
            let t = a.table();
            for _ in 0..150 {
                let da = rng.gen_range(0..=SOUNDNESS_DEGREE);
                let db = rng.gen_range(0..=SOUNDNESS_DEGREE - da);
                let x = random_element(t, da, &mut rng);
                let y = random_element(t, db, &mut rng);
                let xy = a.mul(&x, &y);
                let sign = if da % 2 == 1 { -Rational::one() } else { Rational::one() };
                let leibniz = a.mul(&a.differential(&x), &y) + a.mul(&x, &a.differential(&y)).scale(&sign);
                ensure!(a.differential(&xy) == leibniz, "Leibniz fails on {label}: {} · {}", a.format(&x), a.format(&y));
                let koszul = if da * db % 2 == 1 { -Rational::one() } else { Rational::one() };
                ensure!(xy == a.mul(&y, &x).scale(&koszul), "graded commutativity fails on {label}");
                ensure!(a.differential(&a.differential(&xy)).is_zero(), "d² ≠ 0 on a product in {label}");
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < SOUNDNESS_LIMIT, "took {elapsed:?}, limit {SOUNDNESS_LIMIT:?}");
    Ok(format!("{checked} random products through degree {SOUNDNESS_DEGREE}"))
}

fn classical_cohomology() -> Outcome {
    let expected_chi = [("s2", 2), ("cp2", 3), ("s2xs2", 4), ("s3", 0), ("hp2", 3)];
    for (name, chi) in expected_chi {
        let a = algebra(name);
        let golden = spec(name).expect.dims.ok_or("missing golden dims")?;
        let basis = ok(CohomologyBasis::compute(Arc::clone(&a), 12), "cohomology")?;
        let oracle = rank_oracle_dims(&a, 12);
        ensure!(basis.dims() == golden, "{name}: dims {:?} against golden {golden:?}", basis.dims());
        ensure!(oracle == golden, "{name}: rank oracle {oracle:?} against golden {golden:?}");
        let m = formal_dimension(&a);
        let top = golden.iter().rposition(|&d| d > 0).unwrap() as i64;
        ensure!(m == top, "{name}: m = {m} but the top nonzero degree is {top}");
        let b = ok(cohomology_with_window(Arc::clone(&a), m as u32), "cohomology")?;
        let c = ok(euler_characteristic(&b, m as u32), "euler")?;
        ensure!(c == chi, "{name}: χ = {c}, expected {chi}");
    }
    Ok("S², CP², S²×S², S³, HP² through degree 12; χ = 2, 3, 4, 0, 3".into())
}

fn diagonal() -> Outcome {
    for name in ["s2", "cp2", "s2xs2", "s3", "hp2"] {
        let a = algebra(name);
        let m = formal_dimension(&a) as u32;
        let b = ok(cohomology_with_window(Arc::clone(&a), m), "cohomology")?;
        let pd = ok(orientation_class(&b, m), "orientation")?;
        let dc = ok(diagonal_class(&b, &pd), "diagonal class")?;
        let expected = pd.omega.scale(&Rational::from_integer(dc.chi.into()));
        ensure!(dc.pullback == expected, "{name}: μ*Δ = {}", b.format_class(&dc.pullback));
    }
    Ok("μ*Δ = χ·ω on five models".into())
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect()).collect()
}

/// `φ_{p+j}(s^k x_{[p]∖I}) = (-1)^{deg I + pj} det(α_{t,i})` for `|I| = j`,
/// with the determinant from cofactor expansion.
fn minors_by_cofactors(disk: &DiskModel, history: &[sullivan::shriek::SLinearMap], p: usize, q: usize) -> Result<usize, String> {
    let alpha = ok(alpha_matrix(disk), "α")?;
    let table = disk.algebra().table();
    let s_table = disk.sphere().algebra().table();
    let mut count = 0;
    for j in 0..=q.min(p) {
        for set in subsets(p).into_iter().filter(|s| s.len() == j) {
            let rest: Vec<(usize, u16)> = (0..p).filter(|t| !set.contains(t)).map(|i| (disk.disk_index(i), 1)).collect();
            let mono = table.monomial(&rest).unwrap();
            let value = ok(history[p + j].value(&mono), "φ value")?;
            let minor: Vec<Vec<Poly>> = (0..j).map(|t| set.iter().map(|&i| alpha[t][i].clone()).collect()).collect();
            let deg_i: usize = set.iter().map(|i| i + 1).sum();
            let mut expected = table.embed(&cofactor_det(s_table, &minor));
            if (deg_i + p * j) % 2 == 1 {
                expected = -expected;
            }
            ensure!(*value == expected, "minor identity fails for I = {set:?}");
            count += 1;
        }
    }
    Ok(count)
}

fn shriek() -> Outcome {
    let mut runs = 0;
    for name in VALID {
        let a = algebra(name);
        for k in applicable_ks(&a) {
            let sphere = ok(SphereModel::build(&a, k), "sphere model")?;
            let disk = ok(DiskModel::build(&sphere), "disk model")?;
            let m = formal_dimension(&a);
            let through = (2 * m + 2 * k as i64) as u32;
            let cert = ok(build_phi(&disk, through), &format!("{name} k={k}"))?;
            let checks = cert.pure_checks.as_ref().ok_or(format!("{name}: no pure checks"))?;
            ensure!(checks.top_matches, "{name} k={k}: φ(s^k x_[p]) = {}", disk.algebra().format(&checks.top_value));
            ensure!(checks.minors_hold && checks.even_part_holds, "{name} k={k}: minor identities");
            ensure!(checks.jacobian_matches, "{name} k={k}: μφ(1) = {}", a.format(&cert.mu_phi_one));
            ensure!(cert.passed(), "{name} k={k}: certificate failed");
            let m_bar = loop_dimension(m, cert.p, cert.q, k);
            ensure!(cert.phi.degree() == m_bar, "{name} k={k}: deg φ = {} ≠ m̄ = {m_bar}", cert.phi.degree());
            if name == "s2xs2" || name == "s3xs3" {
                minors_by_cofactors(&disk, &cert.history, cert.p, cert.q)?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} certificates, cocycle checked through 2m + 2k"))
}

fn lambda_is_chi() -> Outcome {
    let mut seen = Vec::new();
    for name in VALID {
        let a = algebra(name);
        let m = formal_dimension(&a) as u32;
        let b = ok(cohomology_with_window(Arc::clone(&a), m), "cohomology")?;
        let chi = ok(euler_characteristic(&b, m), "euler")?;
        for k in applicable_ks(&a) {
            let ctx = ok(SphereSpaceContext::build(&a, k, m), "context")?;
            let disk = ctx.ssm.disk().clone();
            let cert = ok(build_phi(&disk, 2 * m + 2 * k), "certificate")?;
            let lambda = ok(lambda_gamma(&cert, &ctx.base, &ctx.poincare), "λ")?;
            ensure!(lambda == Rational::from_integer(chi.into()), "{name} k={k}: λ = {lambda}, χ = {chi}");
            let tau = ok(lambda_under_involution(&cert, &disk, &ctx.base, &ctx.poincare), "λ after τ")?;
            ensure!(tau == lambda, "{name} k={k}: λ changes under τ to {tau}");
            seen.push(format!("{name}/{k}:{lambda}"));
        }
    }
    Ok(seen.join(" "))
}

fn main_theorem() -> Outcome {
    let start = Instant::now();
    let mut classes = 0;
    for (name, k, bound) in [("s2", 1, 12), ("cp2", 1, 12), ("s2xs2", 1, 12), ("s4", 3, 14), ("hp2", 3, 14)] {
        let a = algebra(name);
        let r = ok(verify_vanishing(&a, k, bound), name)?;
        ensure!(r.applicable, "{name}: not applicable: {:?}", r.reason);
        if let Some(v) = r.verdicts.iter().find(|v| !v.product_zero) {
            return Err(format!("{name}: ev*ω⌣{} = {}", v.class, v.product));
        }
        ensure!(r.pass, "{name}: report failed");
        classes += r.verdicts.len();
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < MAIN_THEOREM_LIMIT, "took {elapsed:?}");
    Ok(format!("ev*ω⌣α = 0 on {classes} basis classes"))
}

fn random_class(basis: &CohomologyBasis, n: u32, rng: &mut StdRng) -> Class {
    let dim = basis.dim(n).unwrap();
    Class {
        degree: n,
        coords: (0..dim).map(|_| Rational::from_integer(rng.gen_range(-3i64..=3).into())).collect(),
    }
}

fn coproduct_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut trials = 0;
    for name in VALID {
        let a = algebra(name);
        let m = formal_dimension(&a) as u32;
        for k in applicable_ks(&a) {
            let bound = m + if name == "s2xs2" { 4 } else { 6 };
            let ctx = ok(SphereSpaceContext::build(&a, k, bound), "context")?;
            let coh = &ctx.cohomology;
            let unit = ok(coh.unit(), "unit")?;
            for n in 0..=bound - m {
                for alpha in ok(coh.basis_classes(n), "basis")? {
                    let lhs = ok(ctx.ns_coproduct(&unit, &alpha), "δ_ns")?;
                    let rhs = ok(ctx.ev_omega_cup(&alpha), "ev*ω⌣α")?;
                    ensure!(lhs == rhs, "{name} k={k}: δ_ns(1×α) ≠ ev*ω⌣α in degree {n}");
                }
                for alpha in ok(ctx.constants_kernel(n), "ker c*")? {
                    let v = ok(ctx.ns_coproduct(&alpha, &unit), "δ_ns")?;
                    ensure!(v.is_zero(), "{name} k={k}: δ_ns(α×1) ≠ 0 for α ∈ ker c* in degree {n}");
                }
            }
            for _ in 0..PERTURBATION_TRIALS {
                let du = rng.gen_range(0..=bound - m);
                let dv = rng.gen_range(0..=bound - m - du);
                let u = random_class(coh, du, &mut rng);
                let v = random_class(coh, dv, &mut rng);
                let ur = ok(coh.representative(&u), "representative")?;
                let vr = ok(coh.representative(&v), "representative")?;
                let mut pick = |len: usize| (rng.gen_range(0..len), rng.gen_range(-3i64..=3));
                let bu = ok(coh.coboundary_from(du, &mut pick), "coboundary")?;
                let bv = ok(coh.coboundary_from(dv, &mut pick), "coboundary")?;
                let plain = ok(ctx.ns_coproduct_of_reps(du, &ur, dv, &vr), "δ_ns")?;
                let moved = ok(ctx.ns_coproduct_of_reps(du, &(&ur + &bu), dv, &(&vr + &bv)), "δ_ns")?;
                ensure!(plain == moved, "{name} k={k}: δ_ns depends on representatives");
                trials += 1;
            }
        }
    }
    Ok(format!("identities on all bundled models, {trials} perturbation trials"))
}

fn ellipticity() -> Outcome {
    for (name, even, relations) in [("s2", vec![2], vec![4]), ("cp2", vec![2], vec![6]), ("s2xs2", vec![2, 2], vec![4, 4])] {
        let a = algebra(name);
        let dims: Vec<i64> = quotient_dims(&a, 16).into_iter().map(|d| d as i64).collect();
        let series = complete_intersection_series(&even, &relations, 16);
        ensure!(dims == series, "{name}: quotient dims {dims:?} against Hilbert series {series:?}");
        let r = ok(elliptic_report(&a, None), "report")?;
        let top = relations.iter().sum::<u32>() - even.iter().sum::<u32>();
        ensure!(r.regular && r.quotient_top == Some(top), "{name}: window detector found {:?}", r.quotient_top);
    }
    let bad = algebra("not_elliptic");
    let r = ok(elliptic_report(&bad, None), "report")?;
    ensure!(!r.regular && !r.quotient_finite && r.chi.is_none(), "∧(x₂,x′₂,y₃) accepted");
    for name in VALID {
        let r = ok(elliptic_report(&algebra(name), None), "report")?;
        ensure!(r.chi_parity_consistent == Some(true), "{name}: χ ≠ 0 ⟺ p = q fails");
    }
    Ok("window detector matches Hilbert series; ∧(x₂,x′₂,y₃) rejected".into())
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_cli(args: &[&str], cache: Option<&std::path::Path>) -> (i32, String, String) {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_sullivan"));
    cmd.args(args).env_remove("SULLIVAN_CACHE_DIR");
    match cache {
        Some(dir) => {
            cmd.arg("--cache-dir").arg(dir);
        }
        None => {
            cmd.arg("--no-cache");
        }
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden_invocations() -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    let mut add = |model: &str, args: &[&str]| {
        let file = format!("{model}.{}.txt", args.join("_").replace("--", ""));
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.push(model_path(model).to_string_lossy().into_owned());
        out.push((file, full));
    };
    for name in VALID {
        add(name, &["validate"]);
        add(name, &["cohomology", "--max-degree", "12"]);
        add(name, &["euler"]);
        add(name, &["diagonal-class"]);
        add(name, &["jacobian"]);
        add(name, &["shriek", "--k", "1"]);
        add(name, &["compare", "--k", "1"]);
        add(name, &["vanishing", "--k", "1", "--max-degree", "12"]);
    }
    for name in ["s4", "hp2"] {
        add(name, &["shriek", "--k", "3"]);
        add(name, &["compare", "--k", "3"]);
        add(name, &["vanishing", "--k", "3", "--max-degree", "14"]);
    }
    add("s2", &["--format", "structured", "vanishing", "--k", "1", "--max-degree", "8"]);
    add("broken_d2", &["validate"]);
    add("inhomogeneous", &["validate"]);
    add("not_elliptic", &["validate"]);
    add("not_elliptic", &["euler"]);
    out
}

fn cli_contract() -> Outcome {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let root = models_dir().canonicalize().unwrap();
    let invocations = golden_invocations();
    for (file, args) in &invocations {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, stdout, stderr) = run_cli(&argv, None);
        let stderr = stderr.replace(&*root.to_string_lossy(), "<models>").replace(&*models_dir().to_string_lossy(), "<models>");
        let text = format!("exit {code}\n--- stdout\n{stdout}--- stderr\n{stderr}");
        let path = golden_dir().join(file);
        if update {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &text).unwrap();
        } else {
            let expected = std::fs::read_to_string(&path).map_err(|e| format!("{file}: {e}"))?;
            ensure!(expected == text, "{file}: output differs from golden");
        }
    }
    for name in VALID.iter().chain(["broken_d2", "not_elliptic"].iter()) {
        let s = spec(name);
        let again = ok(ModelSpec::parse(&s.to_text()), "reparse")?;
        ensure!(again == s, "{name}: text round trip changed the spec");
        let from_json = ok(ModelSpec::parse(&s.to_json()), "JSON parse")?;
        ensure!(from_json == s, "{name}: JSON round trip changed the spec");
    }
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["shriek", "--k", "1"],
        vec!["vanishing", "--k", "1", "--max-degree", "10"],
        vec!["--format", "structured", "euler"],
    ] {
        let path = model_path("cp2").to_string_lossy().into_owned();
        let mut argv = args.clone();
        argv.push(&path);
        let fresh = run_cli(&argv, None);
        let first = run_cli(&argv, Some(dir.path()));
        let cached = run_cli(&argv, Some(dir.path()));
        ensure!(fresh == first && first == cached, "{args:?}: cached output differs");
    }
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    ensure!(entries == 3, "expected 3 cache entries, found {entries}");
    Ok(format!("{} golden reports, round trips, cache byte identity", invocations.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("soundness gates", soundness),
        ("classical cohomology", classical_cohomology),
        ("diagonal class", diagonal),
        ("shriek construction", shriek),
        ("λ = χ", lambda_is_chi),
        ("main theorem at desk scale", main_theorem),
        ("coproduct formula consistency", coproduct_consistency),
        ("ellipticity criteria", ellipticity),
        ("CLI contract", cli_contract),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
