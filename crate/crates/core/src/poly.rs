//! Sparse polynomials on `g*`, i.e. elements of `S(g) = Q[g*]`, in the dual
//! coordinates of the fixed basis.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rational::{fmt_q, parse_q, pow_i, Q};

pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialOnDual {
    vars: usize,
    terms: BTreeMap<Exponents, Q>,
}

impl PolynomialOnDual {
    pub fn zero(vars: usize) -> Self {
        PolynomialOnDual { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: Q) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// The coordinate function `ℓ ↦ ℓ_i`.
    pub fn coordinate(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        Self::from_terms(vars, [(e, Q::one())]).expect("valid exponent vector")
    }

    pub fn from_terms(vars: usize, terms: impl IntoIterator<Item = (Exponents, Q)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars {
                return Err(Error::DimensionMismatch { expected: vars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: Q) {
        let slot = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[Q]) -> Result<Q> {
        if point.len() != self.vars {
            return Err(Error::DimensionMismatch { expected: self.vars, got: point.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| e.iter().zip(point).fold(c.clone(), |acc, (&k, x)| acc * pow_i(x, k as i64)))
            .sum())
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.vars, Q::one()), |acc, _| &acc * self)
    }

    /// `ℓ ↦ P(L ℓ)` for an `n x n` matrix `L` acting on coordinate columns.
    pub fn compose_linear(&self, l: &Mat) -> Self {
        let images: Vec<Self> = (0..self.vars)
            .map(|i| {
                let terms = (0..self.vars).map(|j| {
                    let mut e = vec![0; self.vars];
                    e[j] = 1;
                    (e, l[i][j].clone())
                });
                Self::from_terms(self.vars, terms).expect("square matrix")
            })
            .collect();
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            let mono = e
                .iter()
                .zip(&images)
                .fold(Self::constant(self.vars, c.clone()), |acc, (&k, img)| &acc * &img.pow(k));
            out = &out + &mono;
        }
        out
    }

    fn to_raw(&self) -> Vec<(Exponents, String)> {
        self.terms.iter().map(|(e, c)| (e.clone(), fmt_q(c))).collect()
    }
}

impl Add for &PolynomialOnDual {
    type Output = PolynomialOnDual;
    fn add(self, rhs: &PolynomialOnDual) -> PolynomialOnDual {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Mul for &PolynomialOnDual {
    type Output = PolynomialOnDual;
    fn mul(self, rhs: &PolynomialOnDual) -> PolynomialOnDual {
        let mut out = PolynomialOnDual::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// A named list of polynomials sharing one set of variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSet {
    pub vars: usize,
    pub polys: Vec<PolynomialOnDual>,
}

#[derive(Serialize, Deserialize)]
struct PolyFile {
    vars: usize,
    polys: Vec<Vec<(Exponents, String)>>,
}

impl PolynomialSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolyFile = serde_json::from_str(text)?;
        let polys = file
            .polys
            .into_iter()
            .map(|raw| {
                let terms = raw.into_iter().map(|(e, c)| Ok((e, parse_q(&c)?))).collect::<Result<Vec<_>>>()?;
                PolynomialOnDual::from_terms(file.vars, terms)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolynomialSet { vars: file.vars, polys })
    }

    pub fn to_json(&self) -> String {
        let file = PolyFile { vars: self.vars, polys: self.polys.iter().map(PolynomialOnDual::to_raw).collect() };
        serde_json::to_string(&file).expect("serializable")
    }
}
