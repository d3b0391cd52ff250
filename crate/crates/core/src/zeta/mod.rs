//! Local height integrals and their Euler products.
//!
//! At a good prime `q` the local height integral of a model is
//!
//! ```text
//! q^{-n} Σ_{A' ⊆ A} |D^0_{A'}(F_q)| ∏_{α ∈ A'} (q - 1) / (q^{s_α - κ_α + 1} - 1)
//! ```
//!
//! and twisting by an additive character replaces the codimension-one terms
//! by character sums over unit shells.

mod euler;
pub mod quad;

pub use euler::{
    archimedean_density, euler_leading_constant, partial_products, real_height, EulerEstimate, PartialProduct,
};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CompactificationModel, RationalFunctionDivisor};
use crate::rational::{self, Q};

/// Value of a local factor: exact when every `s_α - κ_α` is an integer,
/// floating point otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalFactorValue {
    pub p: u64,
    #[serde(serialize_with = "crate::report::ser_q_vec")]
    pub s: Vec<Q>,
    #[serde(serialize_with = "ser_opt_q")]
    pub exact: Option<Q>,
    pub value: f64,
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(q) => s.serialize_str(&rational::fmt_q(q)),
        None => s.serialize_none(),
    }
}

/// Either exact rational arithmetic or floating point, chosen per call.
#[derive(Clone, Debug)]
enum Num {
    Exact(Q),
    Float(f64),
}

impl Num {
    fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => rational::to_f64(q),
            Num::Float(x) => *x,
        }
    }
}

/// `q^t` for rational `t`, exact when `t` is an integer.
fn q_pow(q: u64, t: &Q) -> Num {
    if rational::is_integer(t) {
        let e: i64 = t.to_integer().try_into().expect("exponent fits in i64");
        Num::Exact(rational::pow_i(&rational::q(q as i64), e))
    } else {
        Num::Float((q as f64).powf(rational::to_f64(t)))
    }
}

fn check_s(m: &CompactificationModel, s: &[Q]) -> Result<Vec<Q>> {
    if s.len() != m.num_boundary() {
        return Err(Error::DimensionMismatch { expected: m.num_boundary(), got: s.len() });
    }
    let t: Vec<Q> = s.iter().zip(&m.kappa).map(|(sa, &k)| sa - rational::q(k) + Q::one()).collect();
    if let Some(i) = t.iter().position(|x| *x <= Q::zero()) {
        return Err(Error::precondition(
            "convergence_domain",
            format!("s_{} = {} must exceed κ - 1 = {}", m.boundary[i], rational::fmt_q(&s[i]), m.kappa[i] - 1),
        ));
    }
    Ok(t)
}

fn check_good(m: &CompactificationModel, p: u64) -> Result<()> {
    if !crate::primes::is_prime(p) {
        return Err(Error::precondition("prime", format!("{p} is not prime")));
    }
    if m.is_bad(p) {
        return Err(Error::precondition("good_prime", format!("{p} is a bad prime of model {}", m.name)));
    }
    Ok(())
}

/// `(q - 1) / (q^t - 1)`.
fn boundary_factor(q: u64, t: &Q) -> Num {
    match q_pow(q, t) {
        Num::Exact(qt) => Num::Exact(rational::q(q as i64 - 1) / (qt - Q::one())),
        Num::Float(qt) => Num::Float((q as f64 - 1.0) / (qt - 1.0)),
    }
}

fn product(factors: impl IntoIterator<Item = Num>) -> Num {
    factors.into_iter().fold(Num::Exact(Q::one()), |acc, f| match (acc, f) {
        (Num::Exact(a), Num::Exact(b)) => Num::Exact(a * b),
        (a, b) => Num::Float(a.to_f64() * b.to_f64()),
    })
}

fn sum(terms: impl IntoIterator<Item = Num>) -> Num {
    terms.into_iter().fold(Num::Exact(Q::zero()), |acc, f| match (acc, f) {
        (Num::Exact(a), Num::Exact(b)) => Num::Exact(a + b),
        (a, b) => Num::Float(a.to_f64() + b.to_f64()),
    })
}

fn scale(c: Q, x: Num) -> Num {
    match x {
        Num::Exact(q) => Num::Exact(c * q),
        Num::Float(f) => Num::Float(rational::to_f64(&c) * f),
    }
}

fn finish(p: u64, s: &[Q], v: Num) -> LocalFactorValue {
    let value = v.to_f64();
    let exact = match v {
        Num::Exact(q) => Some(q),
        Num::Float(_) => None,
    };
    LocalFactorValue { p, s: s.to_vec(), exact, value }
}

/// Closed-form local height integral `∫_{G(Q_p)} H(s; g)^{-1} dg` at a good
/// prime.
pub fn local_height_integral(m: &CompactificationModel, p: u64, s: &[Q]) -> Result<LocalFactorValue> {
    check_good(m, p)?;
    let t = check_s(m, s)?;
    let qn = rational::pow_i(&rational::q(p as i64), -(m.dim as i64));
    let terms = m.strata.iter().map(|(set, count)| {
        let c = count.eval(&rational::q(p as i64));
        scale(c, product(set.iter().map(|&a| boundary_factor(p, &t[a]))))
    });
    Ok(finish(p, s, scale(qn, sum(terms))))
}

/// `∫_{Z_p^*} ψ(p^{-m} u) du` with `vol(Z_p) = 1`.
pub fn twisted_unit_integral(p: u64, m: u32) -> Q {
    match m {
        0 => Q::one() - rational::qf(1, p as i64),
        1 => -rational::qf(1, p as i64),
        _ => Q::zero(),
    }
}

/// `Σ_{k ≥ 1} q^{-t k} · ∫_{Z_q^*} ψ(q^{-k d} u) du`.
fn twisted_shell_series(q: u64, t: &Q, d: u32) -> Num {
    match d {
        0 => match q_pow(q, t) {
            Num::Exact(qt) => Num::Exact(twisted_unit_integral(q, 0) / (qt - Q::one())),
            Num::Float(qt) => Num::Float(rational::to_f64(&twisted_unit_integral(q, 0)) / (qt - 1.0)),
        },
        // only k = 1 survives
        1 => match q_pow(q, &-t.clone()) {
            Num::Exact(x) => Num::Exact(x * twisted_unit_integral(q, 1)),
            Num::Float(x) => Num::Float(x * rational::to_f64(&twisted_unit_integral(q, 1))),
        },
        _ => Num::Exact(Q::zero()),
    }
}

/// Local integral of `H(s; g)^{-1} ψ(f(g))`.
///
/// The open orbit contributes 1. A point of `D_α^0` off the zero locus of
/// `f` contributes `q^{-(n-1)}` times the twisted shell series at
/// `m = k d_α`. Points on the zero locus and deeper strata are taken at their
/// untwisted value.
pub fn twisted_local_factor(
    m: &CompactificationModel,
    f: &RationalFunctionDivisor,
    p: u64,
    s: &[Q],
) -> Result<LocalFactorValue> {
    check_good(m, p)?;
    let t = check_s(m, s)?;
    if f.d.len() != m.num_boundary() {
        return Err(Error::DimensionMismatch { expected: m.num_boundary(), got: f.d.len() });
    }
    let qq = rational::q(p as i64);
    let n = m.dim as i64;
    let mut terms = Vec::new();
    for (set, count) in &m.strata {
        let c = count.eval(&qq);
        match set.as_slice() {
            [] => terms.push(Num::Exact(c * rational::pow_i(&qq, -n))),
            &[a] => {
                let on_zero = f.zero_meet(a).eval(&qq);
                let off_zero = c - &on_zero;
                terms.push(scale(off_zero * rational::pow_i(&qq, -(n - 1)), twisted_shell_series(p, &t[a], f.d[a])));
                terms.push(scale(on_zero * rational::pow_i(&qq, -n), boundary_factor(p, &t[a])));
            }
            deeper => terms.push(scale(
                c * rational::pow_i(&qq, -n),
                product(deeper.iter().map(|&a| boundary_factor(p, &t[a]))),
            )),
        }
    }
    Ok(finish(p, s, sum(terms)))
}

/// `s = κ` as rationals.
pub fn anticanonical_s(m: &CompactificationModel) -> Vec<Q> {
    m.kappa.iter().map(|&k| rational::q(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::IntPoly;
    use crate::rational::{q, qf};
    use std::collections::BTreeMap;

    #[test]
    fn p1_values() {
        let m = CompactificationModel::projective(1);
        assert_eq!(local_height_integral(&m, 7, &[q(2)]).unwrap().exact, Some(qf(8, 7)));
        // s = 3: 1/5 (5 + 4/(25 - 1)) = 31/30
        assert_eq!(local_height_integral(&m, 5, &[q(3)]).unwrap().exact, Some(qf(31, 30)));
        let v = local_height_integral(&m, 5, &[qf(5, 2)]).unwrap();
        assert!(v.exact.is_none());
        assert!((v.value - (1.0 + 0.8 / (5f64.powf(1.5) - 1.0))).abs() < 1e-14);
    }

    #[test]
    fn preconditions() {
        let m = CompactificationModel::blowup_p2();
        assert!(matches!(
            local_height_integral(&m, 3, &[q(3), q(2)]),
            Err(Error::Precondition { invariant: "good_prime", .. })
        ));
        assert!(matches!(
            local_height_integral(&m, 5, &[q(2), q(2)]),
            Err(Error::Precondition { invariant: "convergence_domain", .. })
        ));
        assert!(local_height_integral(&m, 5, &[q(3)]).is_err());
    }

    #[test]
    fn large_s_limit_is_unit_volume() {
        for m in [CompactificationModel::projective(2), CompactificationModel::blowup_p2()] {
            let s: Vec<Q> = m.kappa.iter().map(|&k| q(k + 40)).collect();
            for p in [5u64, 7, 101] {
                let v = local_height_integral(&m, p, &s).unwrap().exact.unwrap();
                assert!(rational::to_f64(&(v - q(1))).abs() < (p as f64).powi(-30));
            }
        }
    }

    #[test]
    fn unit_integrals() {
        assert_eq!(twisted_unit_integral(7, 0), qf(6, 7));
        assert_eq!(twisted_unit_integral(7, 1), qf(-1, 7));
        assert_eq!(twisted_unit_integral(7, 3), q(0));
    }

    #[test]
    fn twisted_factors() {
        let m = CompactificationModel::projective(1);
        let trivial = RationalFunctionDivisor::trivial(&m);
        for s in [2, 3, 5] {
            assert_eq!(
                twisted_local_factor(&m, &trivial, 7, &[q(s)]).unwrap().exact,
                local_height_integral(&m, 7, &[q(s)]).unwrap().exact
            );
        }
        let fx = RationalFunctionDivisor {
            name: "x".into(),
            model: m.name.clone(),
            d: vec![1],
            has_zero_component: true,
            zero_meets: BTreeMap::new(),
        };
        assert_eq!(twisted_local_factor(&m, &fx, 7, &[q(2)]).unwrap().exact, Some(qf(48, 49)));

        let b = CompactificationModel::blowup_p2();
        let fy = RationalFunctionDivisor {
            name: "y".into(),
            model: b.name.clone(),
            d: vec![1, 1],
            has_zero_component: true,
            zero_meets: BTreeMap::from([(0, IntPoly::new(vec![1]))]),
        };
        let v = twisted_local_factor(&b, &fy, 5, &[q(3), q(2)]).unwrap().exact.unwrap();
        // open orbit, D1 off and on the zero locus, D2, D1 ∩ D2
        let qq = q(5);
        let expect = q(1) - (&qq - q(1)) / qq.pow(3) + q(1) / qq.pow(2) - q(1) / qq.pow(2) + q(1) / qq.pow(2);
        assert_eq!(v, expect);
    }
}
