//! Archimedean densities and regularized Euler products.

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use super::{anticanonical_s, local_height_integral, quad, twisted_local_factor};
use crate::error::{Error, Result};
use crate::geometry::{CompactificationModel, HeightKind, RationalFunctionDivisor};
use crate::primes::primes_up_to;
use crate::rational::{self, Q};

/// Anticanonical real height `H_∞(κ; x)` on `G(R) = R^n`.
pub fn real_height(m: &CompactificationModel, x: &[f64]) -> f64 {
    let top = x.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    match m.height {
        HeightKind::Projective => top.powi(m.dim as i32 + 1),
        HeightKind::BlowupP2 => {
            let mx = x[0].abs().max(1.0);
            mx * top * top
        }
    }
}

const DENSITY_TOL: f64 = 1e-8;

/// `∫_{R^n} H_∞(κ; x)^{-1} dx`. The integrand is even in every coordinate,
/// so the integral is `2^n` times the one over the positive orthant, done as
/// nested adaptive quadrature split at the kinks `x_k = 1` and
/// `x_k = x_j`.
pub fn archimedean_density(m: &CompactificationModel) -> Result<f64> {
    let n = m.dim;
    // inner levels get a tighter tolerance so their errors do not pile up
    let inner_tol = DENSITY_TOL * 1e-3;
    fn level(m: &CompactificationModel, prefix: &[f64], tol: f64, inner_tol: f64) -> Result<f64> {
        let n = m.dim;
        let k = prefix.len();
        if k == n {
            return Ok(1.0 / real_height(m, prefix));
        }
        let mut breaks = vec![1.0];
        breaks.extend(prefix.iter().copied());
        let err = std::cell::RefCell::new(None);
        let f = |x: f64| {
            let mut p = prefix.to_vec();
            p.push(x);
            match level(m, &p, inner_tol, inner_tol) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let v = quad::integrate_half_line(f, &breaks, tol);
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        v
    }
    let half = level(m, &[], DENSITY_TOL * 1e-2, inner_tol)?;
    Ok(half * 2f64.powi(n as i32))
}

/// Log-domain compensated sum in the given order.
fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `(1 - 1/p)^r · I_p`, exact.
fn regularize(p: u64, r: usize, value: Q) -> Q {
    let one_minus = Q::one() - rational::qf(1, p as i64);
    num_traits::pow(one_minus, r) * value
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerEstimate {
    pub model: String,
    pub pole_order: usize,
    pub truncation_prime: u64,
    pub archimedean_density: f64,
    /// `∏_{p ≤ P} (1 - 1/p)^{#A} I_p(κ)`, bad primes included.
    pub euler_product: f64,
    /// Tamagawa number: `archimedean_density · euler_product`.
    pub tau: f64,
    pub kappa_product: i64,
    /// `τ / ∏ κ_α`, the constant multiplying `B log(B)^{b-1} / (b-1)!` in the
    /// count.
    pub leading_constant: f64,
    /// `max_p p² |factor_p - 1|` over the primes used.
    pub fitted_c: f64,
    pub tail_heuristic: f64,
    /// Exact regularized factors at the first few primes.
    pub factors_sample: Vec<(u64, String)>,
}

/// Regularized Euler product of the anticanonical height zeta function at
/// `s = κ`, truncated at `P`.
pub fn euler_leading_constant(m: &CompactificationModel, prime_bound: u64) -> Result<EulerEstimate> {
    if prime_bound < 100 {
        return Err(Error::precondition("prime_bound", format!("prime bound {prime_bound} < 100")));
    }
    let r = m.num_boundary();
    let s = anticanonical_s(m);
    let primes = primes_up_to(prime_bound);
    let factors: Vec<(u64, Q)> = primes
        .par_iter()
        .map(|&p| {
            let raw = if m.is_bad(p) {
                m.bad_factors.get(&p).cloned().ok_or_else(|| {
                    Error::precondition("bad_factor", format!("model {} ships no factor at bad prime {p}", m.name))
                })?
            } else {
                local_height_integral(m, p, &s)?.exact.expect("integral exponents at s = κ")
            };
            Ok((p, regularize(p, r, raw)))
        })
        .collect::<Result<_>>()?;
    let floats: Vec<f64> = factors.iter().map(|(_, f)| rational::to_f64(f)).collect();
    let log_sum = kahan_sum(floats.iter().map(|f| f.ln()));
    let euler_product = log_sum.exp();
    let fitted_c = factors
        .iter()
        .zip(&floats)
        .filter(|((p, _), _)| !m.is_bad(*p))
        .map(|((p, _), f)| (*p as f64).powi(2) * (f - 1.0).abs())
        .fold(0.0, f64::max);
    let density = archimedean_density(m)?;
    let tau = density * euler_product;
    let pf = prime_bound as f64;
    let kappa_product: i64 = m.kappa.iter().product();
    Ok(EulerEstimate {
        model: m.name.clone(),
        pole_order: r,
        truncation_prime: prime_bound,
        archimedean_density: density,
        euler_product,
        tau,
        kappa_product,
        leading_constant: tau / kappa_product as f64,
        fitted_c,
        tail_heuristic: tau * fitted_c / (pf * pf.ln()),
        factors_sample: factors.iter().take(6).map(|(p, f)| (*p, rational::fmt_q(f))).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialProduct {
    pub prime_bound: u64,
    pub value: f64,
}

/// `∏_{p ≤ P, good} (1 - 1/p)^{r} · factor_p(κ)` at each checkpoint `P`,
/// where the factor is twisted by `f` when given.
pub fn partial_products(
    m: &CompactificationModel,
    f: Option<&RationalFunctionDivisor>,
    regularization: usize,
    checkpoints: &[u64],
) -> Result<Vec<PartialProduct>> {
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let s = anticanonical_s(m);
    let primes: Vec<u64> = primes_up_to(top).into_iter().filter(|&p| !m.is_bad(p)).collect();
    let logs: Vec<f64> = primes
        .par_iter()
        .map(|&p| {
            let v = match f {
                Some(f) => twisted_local_factor(m, f, p, &s)?,
                None => local_height_integral(m, p, &s)?,
            };
            let exact = v.exact.expect("integral exponents at s = κ");
            Ok(rational::to_f64(&regularize(p, regularization, exact)).ln())
        })
        .collect::<Result<_>>()?;
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    Ok(sorted
        .into_iter()
        .map(|bound| {
            let k = primes.partition_point(|&p| p <= bound);
            PartialProduct { prime_bound: bound, value: kahan_sum(logs[..k].iter().copied()).exp() }
        })
        .collect())
}
