//! Universal enveloping algebra in PBW normal form.
//!
//! Elements are finite sums `Σ c_e X_1^{e_1} ··· X_n^{e_n}` in the order of
//! the fixed basis. Products are normalized by rewriting
//! `X_j X_i = X_i X_j + [X_j, X_i]` for `j > i`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::coadjoint;
use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, Vector};
use crate::linalg::Mat;
use crate::poly::{Exponents, PolynomialOnDual};
use crate::rational::{self, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopingElement {
    dim: usize,
    terms: BTreeMap<Exponents, Q>,
}

impl EnvelopingElement {
    pub fn zero(dim: usize) -> Self {
        EnvelopingElement { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::monomial(vec![0; dim], Q::one())
    }

    pub fn monomial(e: Exponents, c: Q) -> Self {
        let mut out = Self::zero(e.len());
        out.add_term(e, c);
        out
    }

    /// Image of `x ∈ g` in `U(g)`.
    pub fn from_vector(x: &Vector) -> Self {
        let n = x.dim();
        let mut out = Self::zero(n);
        for (i, c) in x.0.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn generator(dim: usize, i: usize) -> Self {
        Self::from_vector(&Vector::basis(dim, i))
    }

    fn add_term(&mut self, e: Exponents, c: Q) {
        let slot = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    /// Same coefficients read as a polynomial on `g*` (the symbol map on
    /// normal-ordered monomials).
    pub fn as_polynomial(&self) -> PolynomialOnDual {
        PolynomialOnDual::from_terms(self.dim, self.terms.iter().map(|(e, c)| (e.clone(), c.clone())))
            .expect("same dimension")
    }
}

fn word_of(e: &[u32]) -> Vec<usize> {
    e.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize)).collect()
}

fn exponents_of(word: &[usize], dim: usize) -> Exponents {
    let mut e = vec![0; dim];
    for &i in word {
        e[i] += 1;
    }
    e
}

/// Order in which out-of-order adjacent pairs are rewritten.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteStrategy {
    /// First descent from the left.
    Leftmost,
    /// Last descent from the left.
    Rightmost,
}

/// Normal form of a word in the generators.
pub fn normal_order(alg: &LieAlgebra, word: &[usize], strategy: RewriteStrategy) -> EnvelopingElement {
    let n = alg.dim();
    let mut out = EnvelopingElement::zero(n);
    let mut pending: BTreeMap<Vec<usize>, Q> = BTreeMap::from([(word.to_vec(), Q::one())]);
    while let Some((w, c)) = pending.pop_last() {
        if c.is_zero() {
            continue;
        }
        let descents = (0..w.len().saturating_sub(1)).filter(|&k| w[k] > w[k + 1]);
        let pos = match strategy {
            RewriteStrategy::Leftmost => descents.min(),
            RewriteStrategy::Rightmost => descents.max(),
        };
        let Some(k) = pos else {
            out.add_term(exponents_of(&w, n), c);
            continue;
        };
        let mut swapped = w.clone();
        swapped.swap(k, k + 1);
        *pending.entry(swapped).or_insert_with(Q::zero) += &c;
        for (m, coef) in alg.bracket_basis(w[k], w[k + 1]).0.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let mut shorter = w[..k].to_vec();
            shorter.push(m);
            shorter.extend_from_slice(&w[k + 2..]);
            *pending.entry(shorter).or_insert_with(Q::zero) += &c * coef;
        }
    }
    out
}

/// Product in `U(g)`, normal ordered.
pub fn pbw_multiply(alg: &LieAlgebra, a: &EnvelopingElement, b: &EnvelopingElement) -> EnvelopingElement {
    pbw_multiply_with(alg, a, b, RewriteStrategy::Leftmost)
}

pub fn pbw_multiply_with(
    alg: &LieAlgebra,
    a: &EnvelopingElement,
    b: &EnvelopingElement,
    strategy: RewriteStrategy,
) -> EnvelopingElement {
    let mut cache: HashMap<(Exponents, Exponents), EnvelopingElement> = HashMap::new();
    let mut out = EnvelopingElement::zero(alg.dim());
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let key = (ea.clone(), eb.clone());
            let prod = cache.entry(key).or_insert_with(|| {
                let mut w = word_of(ea);
                w.extend(word_of(eb));
                normal_order(alg, &w, strategy)
            });
            out = out.add(&prod.scale(&(ca * cb)));
        }
    }
    out
}

fn distinct_permutations(word: &[usize]) -> Vec<Vec<usize>> {
    fn go(rest: &mut BTreeMap<usize, usize>, cur: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<usize> = rest.iter().filter(|(_, &c)| c > 0).map(|(&k, _)| k).collect();
        for k in keys {
            *rest.get_mut(&k).expect("present") -= 1;
            cur.push(k);
            go(rest, cur, len, out);
            cur.pop();
            *rest.get_mut(&k).expect("present") += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for &l in word {
        *counts.entry(l).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    go(&mut counts, &mut Vec::new(), word.len(), &mut out);
    out
}

/// Symmetrization `Y_1 ··· Y_r ↦ (1/r!) Σ_σ Y_σ(1) ··· Y_σ(r)`, extended
/// linearly and normal ordered.
pub fn symmetrize(alg: &LieAlgebra, p: &PolynomialOnDual) -> Result<EnvelopingElement> {
    let n = alg.dim();
    if p.vars() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.vars() });
    }
    let mut out = EnvelopingElement::zero(n);
    for (e, c) in p.terms() {
        let perms = distinct_permutations(&word_of(e));
        let weight = c / Q::from_integer(BigInt::from(perms.len()));
        for w in perms {
            out = out.add(&normal_order(alg, &w, RewriteStrategy::Leftmost).scale(&weight));
        }
    }
    Ok(out)
}

pub fn commutator(alg: &LieAlgebra, a: &EnvelopingElement, b: &EnvelopingElement) -> EnvelopingElement {
    pbw_multiply(alg, a, b).sub(&pbw_multiply(alg, b, a))
}

/// Commutes with every generator.
pub fn is_central(alg: &LieAlgebra, a: &EnvelopingElement) -> bool {
    (0..alg.dim()).all(|i| commutator(alg, a, &EnvelopingElement::generator(alg.dim(), i)).is_zero())
}

/// Image of `a` under the algebra map induced by the linear map of `g`
/// whose columns are the images of the basis vectors.
pub fn transport(alg: &LieAlgebra, a: &EnvelopingElement, map: &Mat) -> EnvelopingElement {
    let n = alg.dim();
    let images: Vec<EnvelopingElement> = (0..n)
        .map(|j| EnvelopingElement::from_vector(&Vector((0..n).map(|i| map[i][j].clone()).collect())))
        .collect();
    let mut out = EnvelopingElement::zero(n);
    for (e, c) in &a.terms {
        let mut term = EnvelopingElement::one(n).scale(c);
        for l in word_of(e) {
            term = pbw_multiply(alg, &term, &images[l]);
        }
        out = out.add(&term);
    }
    out
}

/// `P(2πiℓ)` with the exact rational part of each homogeneous degree kept.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    /// `(r, Σ_{|e| = r} c_e ℓ^e)`; the degree-`r` contribution is this
    /// rational times `(2πi)^r`.
    #[serde(serialize_with = "ser_graded")]
    pub graded: Vec<(u32, Q)>,
    pub re: f64,
    pub im: f64,
}

fn ser_graded<S: serde::Serializer>(g: &[(u32, Q)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(g.iter().map(|(r, q)| (r, rational::fmt_q(q))))
}

impl Eigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub fn eval_at_2pi_i(p: &PolynomialOnDual, ell: &Vector) -> Result<Eigenvalue> {
    let mut graded: BTreeMap<u32, Q> = BTreeMap::new();
    for (e, c) in p.terms() {
        let r: u32 = e.iter().sum();
        let mono = PolynomialOnDual::from_terms(p.vars(), [(e.clone(), c.clone())])?.eval(&ell.0)?;
        *graded.entry(r).or_insert_with(Q::zero) += mono;
    }
    graded.retain(|_, v| !v.is_zero());
    let mut z = Complex64::new(0.0, 0.0);
    for (&r, v) in &graded {
        // (2πi)^r = (2π)^r i^r
        let mag = (2.0 * PI).powi(r as i32) * rational::to_f64(v);
        z += match r % 4 {
            0 => Complex64::new(mag, 0.0),
            1 => Complex64::new(0.0, mag),
            2 => Complex64::new(-mag, 0.0),
            _ => Complex64::new(0.0, -mag),
        };
    }
    Ok(Eigenvalue { graded: graded.into_iter().collect(), re: z.re, im: z.im })
}

/// Scalar by which the invariant operator of `p` acts in the representation
/// attached to `ℓ`, after checking that `p` is constant on 20 sampled orbit
/// points.
pub fn scalar_eigenvalue<R: Rng + ?Sized>(
    alg: &LieAlgebra,
    p: &PolynomialOnDual,
    ell: &Vector,
    rng: &mut R,
) -> Result<Eigenvalue> {
    coadjoint::check_orbit_invariance(alg, ell, std::slice::from_ref(p), rng, 20)?;
    eval_at_2pi_i(p, ell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heisenberg_commutation() {
        let g = LieAlgebra::heisenberg();
        let (z, y, x) = (0, 1, 2);
        let xy = pbw_multiply(&g, &EnvelopingElement::generator(3, x), &EnvelopingElement::generator(3, y));
        let expected = EnvelopingElement::monomial(vec![0, 1, 1], q(1)).add(&EnvelopingElement::generator(3, z));
        assert_eq!(xy, expected);
        let a = EnvelopingElement::monomial(vec![1, 2, 1], qf(3, 2));
        assert_eq!(pbw_multiply(&g, &EnvelopingElement::one(3), &a), a);
    }

    #[test]
    fn symmetrization_examples() {
        let g = LieAlgebra::heisenberg();
        let lz = PolynomialOnDual::coordinate(3, 0);
        assert_eq!(symmetrize(&g, &lz).unwrap(), EnvelopingElement::generator(3, 0));
        let yx = PolynomialOnDual::from_terms(3, [(vec![0, 1, 1], q(1))]).unwrap();
        let expected = EnvelopingElement::monomial(vec![0, 1, 1], q(1))
            .add(&EnvelopingElement::generator(3, 0).scale(&qf(1, 2)));
        assert_eq!(symmetrize(&g, &yx).unwrap(), expected);
    }

    #[test]
    fn centrality() {
        let g = LieAlgebra::heisenberg();
        assert!(is_central(&g, &EnvelopingElement::generator(3, 0)));
        assert!(!is_central(&g, &EnvelopingElement::generator(3, 2)));
        let k = LieAlgebra::k4();
        let casimir = PolynomialOnDual::from_terms(4, [(vec![0, 2, 0, 0], q(1)), (vec![1, 0, 1, 0], q(-2))]).unwrap();
        assert!(is_central(&k, &symmetrize(&k, &casimir).unwrap()));
        let not_inv = PolynomialOnDual::from_terms(4, [(vec![0, 2, 0, 0], q(1))]).unwrap();
        assert!(!is_central(&k, &symmetrize(&k, &not_inv).unwrap()));
    }

    #[test]
    fn strategies_agree() {
        let k = LieAlgebra::k4();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let len = rng.gen_range(0..7);
            let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..4)).collect();
            assert_eq!(
                normal_order(&k, &w, RewriteStrategy::Leftmost),
                normal_order(&k, &w, RewriteStrategy::Rightmost)
            );
        }
    }

    #[test]
    fn eigenvalue_linear_and_constant() {
        let g = LieAlgebra::heisenberg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ell = Vector::from_ints(&[3, 1, -1]);
        let ev = scalar_eigenvalue(&g, &PolynomialOnDual::coordinate(3, 0), &ell, &mut rng).unwrap();
        assert!(ev.re.abs() < 1e-12 && (ev.im - 2.0 * PI * 3.0).abs() < 1e-9);
        let one = PolynomialOnDual::constant(3, q(1));
        let ev1 = scalar_eigenvalue(&g, &one, &ell, &mut rng).unwrap();
        assert_eq!((ev1.re, ev1.im), (1.0, 0.0));
        let bad = PolynomialOnDual::coordinate(3, 2);
        assert!(scalar_eigenvalue(&g, &bad, &Vector::from_ints(&[1, 0, 0]), &mut rng).is_err());
    }
}
