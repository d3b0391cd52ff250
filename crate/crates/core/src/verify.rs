//! Seeded property suites for every module, run by `heightlab verify`.
//!
//! Each check draws its inputs from its own ChaCha stream of the seed, so a
//! report is a pure function of `(suite, seed)`. A suite stops at the first
//! failing check.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coadjoint::{self, coadjoint_act, coadjoint_matrix, d_vector, orbit_representative, pfaffian};
use crate::counting::{self, CountConfig, RationalPoint};
use crate::data;
use crate::enveloping::{self, normal_order, symmetrize, RewriteStrategy};
use crate::error::Result;
use crate::geometry::{abc_invariants, twist_pole_set, validate_model, CompactificationModel};
use crate::group::{self, bch};
use crate::lie::{LieAlgebra, Vector};
use crate::linalg;
use crate::poly::PolynomialOnDual;
use crate::rational::{self, q, qf, Q};
use crate::report::SCHEMA_VERSION;
use crate::zeta;

pub const SUITES: [&str; 7] = ["lie", "group", "coadjoint", "enveloping", "geometry", "zeta", "counting"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

type CheckFn = fn(&mut ChaCha8Rng) -> std::result::Result<usize, String>;

fn algebras() -> Result<Vec<(String, LieAlgebra)>> {
    data::list(data::Kind::Algebras)?.into_iter().map(|n| Ok((n.clone(), data::algebra(&n)?))).collect()
}

fn nonabelian() -> Result<Vec<(String, LieAlgebra)>> {
    Ok(algebras()?.into_iter().filter(|(_, a)| !a.is_abelian()).collect())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random functional with some coordinates zeroed so that lower strata are
/// visited too.
fn random_ell(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector(
        (0..n)
            .map(|_| if rng.gen_bool(0.25) { Q::zero() } else { rational::random_q(rng, 9, 4) })
            .collect(),
    )
}

fn checks(suite: &str) -> Vec<(&'static str, CheckFn)> {
    match suite {
        "lie" => vec![("jacobi", lie_jacobi), ("malcev_bases", lie_malcev), ("kirillov_quadruple", lie_kirillov)],
        "group" => vec![
            ("bch_associative", group_assoc),
            ("bch_matrix_oracle", group_matrix),
            ("bch_inverse", group_inverse),
            ("bch_low_degree_terms", group_terms),
            ("universal_scalar", group_universal),
        ],
        "coadjoint" => vec![
            ("pfaffian_squared_is_det", co_pf_det),
            ("pfaffian_orbit_invariant", co_pf_invariant),
            ("polarization_certificate", co_polarization),
            ("d_vector_orbit_constant", co_d_vector),
            ("cross_section_unique", co_cross_section),
        ],
        "enveloping" => vec![
            ("pbw_confluence", env_confluence),
            ("invariants_central", env_central),
            ("symmetrization_equivariant", env_equivariant),
            ("eigenvalue_orbit_constant", env_eigenvalue),
        ],
        "geometry" => vec![
            ("models_validate", geo_models),
            ("abc_scaling", geo_abc),
            ("submodel_lexicographic_drop", geo_submodel),
            ("twist_pole_drop", geo_twists),
        ],
        "zeta" => vec![
            ("projective_line_values", zeta_p1),
            ("unit_volume_limit", zeta_limit),
            ("trivial_twist_is_untwisted", zeta_trivial_twist),
            ("unit_integrals", zeta_units),
        ],
        "counting" => vec![
            ("small_counts", count_small),
            ("monotone", count_monotone),
            ("translation_bijective", count_translation),
        ],
        _ => Vec::new(),
    }
}

/// Runs one named suite, or every suite for `"all"`.
pub fn run(suite: &str, seed: u64) -> Result<SuiteReport> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(crate::Error::Parse(format!("unknown suite {suite:?}; expected one of {SUITES:?} or \"all\"")));
    };
    let mut out = Vec::new();
    let mut stream = 0u64;
    'suites: for s in names {
        for (name, f) in checks(s) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            stream += 1;
            let outcome = match f(&mut rng) {
                Ok(cases) => CheckOutcome { name: format!("{s}.{name}"), cases, passed: true, detail: String::new() },
                Err(detail) => CheckOutcome { name: format!("{s}.{name}"), cases: 0, passed: false, detail },
            };
            let failed = !outcome.passed;
            out.push(outcome);
            if failed {
                break 'suites;
            }
        }
    }
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        suite: suite.to_string(),
        seed,
        passed: out.iter().all(|c| c.passed),
        checks: out,
    })
}

// ---- lie -------------------------------------------------------------------

fn lie_jacobi(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let n = a.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    ensure(a.jacobi_residual(i, j, k).is_zero(), || format!("{name}: Jacobi fails at ({i},{j},{k})"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

fn lie_malcev(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let b = a.strong_malcev_basis();
        b.verify(&a).map_err(|e| format!("{name}: {e}"))?;
        let series = a.ascending_central_series().map_err(err)?;
        ensure(series.last().map(|s| s.dim()) == Some(a.dim()), || format!("{name}: central series stalls"))?;
        cases += 1;
    }
    Ok(cases)
}

fn lie_kirillov(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in nonabelian().map_err(err)? {
        let k = a.kirillov_quadruple().map_err(err)?;
        ensure(a.bracket(&k.x, &k.y).map_err(err)? == k.z, || format!("{name}: [X, Y] ≠ Z"))?;
        ensure(a.center().contains(&k.z) && !k.z.is_zero(), || format!("{name}: Z not central"))?;
        ensure(k.g0.is_ideal() && k.g0.dim() + 1 == a.dim() && !k.g0.contains(&k.x), || {
            format!("{name}: g0 is not a complementary ideal")
        })?;
        cases += 1;
    }
    Ok(cases)
}

// ---- group -----------------------------------------------------------------

const GROUP_CASES: usize = 50;

fn group_assoc(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        for _ in 0..GROUP_CASES {
            let (x, y, z) = (a.random_element(rng, 5, 3), a.random_element(rng, 5, 3), a.random_element(rng, 5, 3));
            let l = bch(&a, &bch(&a, &x, &y).map_err(err)?, &z).map_err(err)?;
            let r = bch(&a, &x, &bch(&a, &y, &z).map_err(err)?).map_err(err)?;
            ensure(l == r, || format!("{name}: associativity fails"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn group_matrix(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let rep = data::rep(&name, &a).map_err(err)?;
        for _ in 0..GROUP_CASES {
            let (x, y) = (a.random_element(rng, 5, 3), a.random_element(rng, 5, 3));
            let oracle = rep.log(&linalg::mat_mul(&rep.exp(&x), &rep.exp(&y))).map_err(err)?;
            ensure(bch(&a, &x, &y).map_err(err)? == oracle, || format!("{name}: bch ≠ log(exp x exp y)"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn group_inverse(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        for _ in 0..GROUP_CASES {
            let x = a.random_element(rng, 5, 3);
            let e = bch(&a, &x, &group::group_inverse(&x)).map_err(err)?;
            ensure(e.is_zero(), || format!("{name}: x · x^-1 ≠ 1"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn group_terms(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let t2 = group::bch_terms(2);
    ensure(t2 == vec![("[X,Y]".to_string(), qf(1, 2))], || format!("degree 2 terms {t2:?}"))?;
    // written against the right-nested brackets [X,[X,Y]] and [Y,[X,Y]]
    let mut t3: Vec<(String, Q)> = group::bch_terms(3)
        .into_iter()
        .map(|(l, c)| if l == "[[X,Y],Y]" { ("[Y,[X,Y]]".to_string(), -c) } else { (l, c) })
        .collect();
    t3.sort();
    let want = vec![("[X,[X,Y]]".to_string(), qf(1, 12)), ("[Y,[X,Y]]".to_string(), qf(-1, 12))];
    ensure(t3 == want, || format!("degree 3 terms {t3:?}"))?;
    Ok(2)
}

fn group_universal(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, expect) in [("h3", 2u64), ("n3", 2), ("k4", 6)] {
        let a = data::algebra(name).map_err(err)?;
        let got = group::universal_scalar(&a).map_err(err)?;
        ensure(got == expect, || format!("{name}: universal scalar {got}, expected {expect}"))?;
        cases += 1;
    }
    Ok(cases)
}

// ---- coadjoint -------------------------------------------------------------

const ORBIT_CASES: usize = 40;

fn co_pf_det(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let basis = a.strong_malcev_basis();
        for _ in 0..ORBIT_CASES {
            let ell = random_ell(rng, a.dim());
            let st = d_vector(&a, &ell, &basis).map_err(err)?;
            let pf = pfaffian(&a, &ell, &basis, &st).map_err(err)?;
            let det = linalg::det(&coadjoint::stratum_block(&a, &ell, &basis, &st));
            ensure(&pf * &pf == det, || format!("{name}: Pf² ≠ det at {:?}", ell.to_strings()))?;
            ensure(!pf.is_zero(), || format!("{name}: Pf vanishes on its own stratum"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn co_pf_invariant(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let basis = a.strong_malcev_basis();
        for _ in 0..ORBIT_CASES {
            let ell = random_ell(rng, a.dim());
            let g = a.random_element(rng, 5, 3);
            let moved = coadjoint_act(&a, &g, &ell).map_err(err)?;
            let st = d_vector(&a, &ell, &basis).map_err(err)?;
            let p0 = pfaffian(&a, &ell, &basis, &st).map_err(err)?;
            let p1 = pfaffian(&a, &moved, &basis, &st).map_err(err)?;
            ensure(p0 == p1, || format!("{name}: Pf not Ad*-invariant at {:?}", ell.to_strings()))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn co_polarization(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let basis = a.strong_malcev_basis();
        for _ in 0..ORBIT_CASES {
            let ell = random_ell(rng, a.dim());
            let m = coadjoint::vergne_polarization(&a, &ell, &basis).map_err(err)?;
            ensure(coadjoint::is_isotropic(&a, &ell, &m), || format!("{name}: polarization not isotropic"))?;
            let want = coadjoint::polarization_dim(&a, &ell).map_err(err)?;
            ensure(m.dim() == want, || format!("{name}: polarization dim {} ≠ {want}", m.dim()))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn co_d_vector(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let basis = a.strong_malcev_basis();
        for _ in 0..ORBIT_CASES {
            let ell = random_ell(rng, a.dim());
            let moved = coadjoint_act(&a, &a.random_element(rng, 5, 3), &ell).map_err(err)?;
            let d0 = d_vector(&a, &ell, &basis).map_err(err)?;
            ensure(d0 == d_vector(&a, &moved, &basis).map_err(err)?, || format!("{name}: d-vector changes on orbit"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn co_cross_section(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in algebras().map_err(err)? {
        let basis = a.strong_malcev_basis();
        for _ in 0..ORBIT_CASES / 4 {
            let ell = random_ell(rng, a.dim());
            let rep = orbit_representative(&a, &ell, &basis).map_err(err)?;
            ensure(orbit_representative(&a, &rep, &basis).map_err(err)? == rep, || format!("{name}: not idempotent"))?;
            for _ in 0..5 {
                let moved = coadjoint_act(&a, &a.random_element(rng, 5, 3), &ell).map_err(err)?;
                ensure(orbit_representative(&a, &moved, &basis).map_err(err)? == rep, || {
                    format!("{name}: representative changes along the orbit of {:?}", ell.to_strings())
                })?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

// ---- enveloping ------------------------------------------------------------

fn env_confluence(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in nonabelian().map_err(err)? {
        for _ in 0..20 {
            let len = rng.gen_range(2..=5);
            let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..a.dim())).collect();
            let l = normal_order(&a, &word, RewriteStrategy::Leftmost);
            let r = normal_order(&a, &word, RewriteStrategy::Rightmost);
            ensure(l == r, || format!("{name}: strategies disagree on {word:?}"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn env_central(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for name in data::list(data::Kind::Invariants).map_err(err)? {
        let a = data::algebra(&name).map_err(err)?;
        for (j, p) in data::invariants(&name).map_err(err)?.polys.iter().enumerate() {
            let u = symmetrize(&a, p).map_err(err)?;
            ensure(enveloping::is_central(&a, &u), || format!("{name}: invariant {j} does not symmetrize to a central element"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn random_quadratic(rng: &mut ChaCha8Rng, n: usize) -> PolynomialOnDual {
    let mut p = PolynomialOnDual::zero(n);
    for _ in 0..3 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let c = PolynomialOnDual::constant(n, rational::random_q(rng, 5, 2));
        let term = &(&c * &PolynomialOnDual::coordinate(n, i)) * &PolynomialOnDual::coordinate(n, j);
        p = &p + &term;
        let lin = &PolynomialOnDual::constant(n, rational::random_q(rng, 5, 2)) * &PolynomialOnDual::coordinate(n, i);
        p = &p + &lin;
    }
    p
}

fn env_equivariant(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for (name, a) in nonabelian().map_err(err)? {
        for _ in 0..10 {
            let p = random_quadratic(rng, a.dim());
            let x = a.random_element(rng, 5, 3);
            let lhs = symmetrize(&a, &p.compose_linear(&coadjoint_matrix(&a, &x))).map_err(err)?;
            let rhs = enveloping::transport(&a, &symmetrize(&a, &p).map_err(err)?, &coadjoint::ad_exp(&a, &x.scale(&-Q::one())));
            ensure(lhs == rhs, || format!("{name}: symmetrization is not equivariant"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn env_eigenvalue(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for name in data::list(data::Kind::Invariants).map_err(err)? {
        let a = data::algebra(&name).map_err(err)?;
        for p in &data::invariants(&name).map_err(err)?.polys {
            for _ in 0..10 {
                let ell = random_ell(rng, a.dim());
                let ev = enveloping::scalar_eigenvalue(&a, p, &ell, rng).map_err(err)?;
                let moved = coadjoint_act(&a, &a.random_element(rng, 5, 3), &ell).map_err(err)?;
                let ev2 = enveloping::eval_at_2pi_i(p, &moved).map_err(err)?;
                ensure(ev.graded == ev2.graded, || format!("{name}: eigenvalue changes along an orbit"))?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

// ---- geometry --------------------------------------------------------------

fn models() -> std::result::Result<Vec<CompactificationModel>, String> {
    data::list(data::Kind::Models).map_err(err)?.iter().map(|n| data::model(n).map_err(err)).collect()
}

fn geo_models(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let ms = models()?;
    for m in &ms {
        let v = validate_model(m);
        ensure(v.valid, || format!("{}: {:?}", m.name, v.checks))?;
    }
    Ok(ms.len())
}

fn geo_abc(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for m in models()? {
        let base = m.anticanonical();
        let k = abc_invariants(&m, &base).map_err(err)?;
        ensure(k.a == Q::one() && k.b == m.num_boundary(), || format!("{}: a(-K) = {:?}", m.name, k.ab()))?;
        for _ in 0..5 {
            let t = num_traits::Signed::abs(&rational::random_q(rng, 7, 3)) + qf(1, 3);
            let scaled = abc_invariants(&m, &base.scale(&t)).map_err(err)?;
            ensure(scaled.a == &k.a / &t && scaled.b == k.b, || format!("{}: a(tL) ≠ a(L)/t", m.name))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn geo_submodel(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let ambient = data::model("heis_p3").map_err(err)?;
    let sub = data::model("heis_center").map_err(err)?;
    let amb = abc_invariants(&ambient, &ambient.anticanonical()).map_err(err)?;
    let restricted = crate::geometry::DivisorClass {
        l: sub.ambient_anticanonical.clone().ok_or("submodel has no ambient class")?,
    };
    let s = abc_invariants(&sub, &restricted).map_err(err)?;
    ensure(s.ab() == (qf(1, 2), 1), || format!("submodel (a, b) = {:?}", s.ab()))?;
    ensure(amb.ab() == (q(1), 1), || format!("ambient (a, b) = {:?}", amb.ab()))?;
    ensure(s.ab() < amb.ab(), || "no lexicographic drop".into())?;
    Ok(1)
}

fn geo_twists(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let ms = models()?;
    let mut cases = 0;
    for t in data::list(data::Kind::Twists).map_err(err)? {
        let text = std::fs::read_to_string(data::resolve(data::Kind::Twists, &t).map_err(err)?).map_err(err)?;
        let owner: serde_json::Value = serde_json::from_str(&text).map_err(err)?;
        let owner = owner["model"].as_str().unwrap_or_default();
        let m = ms.iter().find(|m| m.name == owner).ok_or_else(|| format!("{t}: unknown model {owner}"))?;
        let f = data::twist(m, &t).map_err(err)?;
        let a0 = twist_pole_set(m, &f).map_err(err)?;
        ensure(!f.is_trivial() && a0.a0.len() < m.num_boundary(), || format!("{t}: no pole drop"))?;
        cases += 1;
    }
    Ok(cases)
}

// ---- zeta ------------------------------------------------------------------

fn zeta_p1(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let m = data::model("p1").map_err(err)?;
    let mut cases = 0;
    for p in crate::primes::primes_up_to(50) {
        let v = zeta::local_height_integral(&m, p, &[q(2)]).map_err(err)?.exact;
        let want = Q::one() + qf(1, p as i64);
        ensure(v.as_ref() == Some(&want), || format!("p = {p}: {v:?}"))?;
        cases += 1;
    }
    Ok(cases)
}

fn zeta_limit(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for m in models()? {
        let s: Vec<Q> = m.kappa.iter().map(|&k| q(k + 60)).collect();
        for p in [101u64, 103] {
            let v = zeta::local_height_integral(&m, p, &s).map_err(err)?.exact.ok_or("inexact")?;
            ensure(rational::to_f64(&(v - Q::one())).abs() < 1e-100, || format!("{}: no unit-volume limit", m.name))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn zeta_trivial_twist(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for m in models()? {
        let f = crate::geometry::RationalFunctionDivisor::trivial(&m);
        for p in [5u64, 7, 11, 13] {
            if m.is_bad(p) {
                continue;
            }
            for shift in 0..3 {
                let s: Vec<Q> = m.kappa.iter().map(|&k| q(k + shift)).collect();
                let a = zeta::twisted_local_factor(&m, &f, p, &s).map_err(err)?.exact;
                let b = zeta::local_height_integral(&m, p, &s).map_err(err)?.exact;
                ensure(a == b, || format!("{}: trivial twist differs at p = {p}", m.name))?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn zeta_units(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for p in crate::primes::primes_up_to(13) {
        let total: Q = (0..6).map(|m| zeta::twisted_unit_integral(p, m)).sum();
        // only m = 0, 1 contribute
        ensure(total == Q::one() - qf(2, p as i64), || format!("p = {p}: unit integrals sum to {total}"))?;
        cases += 1;
    }
    Ok(cases)
}

// ---- counting --------------------------------------------------------------

fn count_small(_: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let p1 = data::model("p1").map_err(err)?;
    for (b, n) in [(0u64, 0u64), (1, 3), (4, 7)] {
        let got = counting::enumerate_points(&p1, b).map_err(err)?;
        ensure(got == n, || format!("P1: N({b}) = {got}, expected {n}"))?;
    }
    let h = counting::height(&p1, &RationalPoint(vec![2, 1])).map_err(err)?;
    ensure(h == 4, || format!("H(1/2) = {h}"))?;
    Ok(4)
}

fn count_monotone(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for m in models()? {
        let mut th: Vec<u64> = (0..10).map(|_| rng.gen_range(0..3000)).collect();
        th.sort_unstable();
        let c = counting::count_points(&m, &th, &CountConfig::default()).map_err(err)?;
        ensure(c.windows(2).all(|w| w[0].1 <= w[1].1), || format!("{}: N not monotone", m.name))?;
        let listed = counting::list_points(&m, th[9], 2 * counting::box_radius(&m, th[9]) + 2).len() as u64;
        ensure(listed == c[9].1, || format!("{}: enumeration misses points", m.name))?;
        cases += 1;
    }
    Ok(cases)
}

fn count_translation(rng: &mut ChaCha8Rng) -> std::result::Result<usize, String> {
    let mut cases = 0;
    for name in ["p1", "p2", "blowup_p2"] {
        let m = data::model(name).map_err(err)?;
        let b = 500;
        let n = counting::enumerate_points(&m, b).map_err(err)?;
        for _ in 0..3 {
            let g: Vec<i64> = (0..m.dim).map(|_| rng.gen_range(-3..=3)).collect();
            let ng = counting::translated_count(&m, &g, b).map_err(err)?;
            ensure(ng == n, || format!("{name}: N_γ({b}) = {ng} ≠ {n} for γ = {g:?}"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_and_are_reproducible() {
        let a = run("all", 42).unwrap();
        assert!(a.passed, "{:#?}", a.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        assert_eq!(a, run("all", 42).unwrap());
        assert!(run("nonsense", 1).is_err());
    }
}
