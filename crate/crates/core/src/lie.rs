//! Finite-dimensional nilpotent Lie algebras over the rationals.
//!
//! An algebra is stored through its structure constants `c_{ij}^k` for
//! `i < j` only; the bracket of any two vectors is the bilinear extension with
//! antisymmetry synthesized on the fly. Loading an algebra checks the Jacobi
//! identity on every basis triple and that the ascending central series
//! reaches the whole algebra.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Subspace};
use crate::rational::{self, fmt_q, parse_q, Q};

/// Coordinates in the fixed basis of an algebra (or of its dual).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(pub Vec<Q>);

impl Vector {
    pub fn zero(n: usize) -> Self {
        Vector(vec![Q::zero(); n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = Q::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Vector(xs.iter().map(|&x| rational::q(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Q) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn dot(&self, other: &Vector) -> Q {
        linalg::dot(&self.0, &other.0)
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn to_strings(&self) -> Vec<String> {
        rational::fmt_q_list(&self.0)
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&Vector> for &Q {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

/// Sparse structure-constant table entry: `[X_i, X_j] = sum c_k X_k`, `i < j`.
type Terms = Vec<(usize, Q)>;

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    labels: Vec<String>,
    constants: BTreeMap<(usize, usize), Terms>,
}

/// A subalgebra of `g`, given by a canonical basis of its underlying space.
#[derive(Clone, Debug, PartialEq)]
pub struct Subalgebra {
    space: Subspace,
    is_ideal: bool,
}

impl Subalgebra {
    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_ideal(&self) -> bool {
        self.is_ideal
    }

    pub fn generators(&self) -> Vec<Vector> {
        self.space.basis().iter().cloned().map(Vector).collect()
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.space.contains(&v.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MalcevKind {
    Weak,
    Strong,
}

/// Ordered basis whose prefixes are subalgebras (weak) or ideals (strong).
#[derive(Clone, Debug, PartialEq)]
pub struct MalcevBasis {
    pub vectors: Vec<Vector>,
    pub kind: MalcevKind,
    /// Prefix lengths at which the requested chain members are spanned.
    pub checkpoints: Vec<usize>,
}

impl MalcevBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn prefix_space(&self, k: usize) -> Subspace {
        let n = self.vectors.first().map_or(0, Vector::dim);
        Subspace::span(n, self.vectors[..k].iter().map(|v| v.0.clone()))
    }

    /// Matrix whose rows are the basis vectors.
    pub fn matrix(&self) -> Mat {
        self.vectors.iter().map(|v| v.0.clone()).collect()
    }

    /// Coordinates of `ell` in the dual basis: `(ell(v_1), ..., ell(v_n))`.
    pub fn dual_coords(&self, ell: &Vector) -> Vec<Q> {
        self.vectors.iter().map(|v| v.dot(ell)).collect()
    }

    /// Checks the prefix property for every prefix.
    pub fn verify(&self, alg: &LieAlgebra) -> Result<()> {
        if self.vectors.len() != alg.dim()
            || linalg::rank(&self.matrix()) != alg.dim()
        {
            return Err(Error::invalid("malcev_basis", "vectors do not form a basis"));
        }
        for k in 1..=self.len() {
            let sub = alg.subalgebra(self.vectors[..k].to_vec())?;
            if self.kind == MalcevKind::Strong && !sub.is_ideal() {
                return Err(Error::invalid("malcev_basis", format!("prefix {k} is not an ideal")));
            }
        }
        Ok(())
    }
}

/// `(Z, Y, X, g0)` with `[X, Y] = Z`, `g0 = z_g(Y)`, `g = g0 + QX` and `Z`
/// spanning the center.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducingQuadruple {
    pub z: Vector,
    pub y: Vector,
    pub x: Vector,
    pub g0: Subalgebra,
}

impl LieAlgebra {
    /// Builds and validates an algebra. `brackets` may list each unordered
    /// pair at most once, in either order.
    pub fn new(labels: Vec<String>, brackets: Vec<(usize, usize, Terms)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::invalid("dimension", "algebra must have positive dimension"));
        }
        let mut constants = BTreeMap::new();
        for (i, j, terms) in brackets {
            if i >= n || j >= n || terms.iter().any(|(k, _)| *k >= n) {
                return Err(Error::invalid("basis", "bracket refers to unknown basis index"));
            }
            if i == j {
                return Err(Error::invalid("antisymmetry", format!("[{0},{0}] must not be listed", labels[i])));
            }
            let (key, sign) = if i < j { ((i, j), Q::one()) } else { ((j, i), -Q::one()) };
            let mut dense = vec![Q::zero(); n];
            for (k, c) in terms {
                dense[k] += c * &sign;
            }
            let sparse: Terms = dense.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
            if constants.insert(key, sparse).is_some() {
                return Err(Error::invalid(
                    "brackets",
                    format!("pair ({}, {}) listed twice", labels[key.0], labels[key.1]),
                ));
            }
        }
        constants.retain(|_, t: &mut Terms| !t.is_empty());
        let alg = LieAlgebra { labels, constants };
        alg.check_jacobi()?;
        alg.ascending_central_series()?;
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        Vector::basis(self.dim(), i)
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.is_empty()
    }

    /// Structure constants with every coefficient integral.
    pub fn has_integral_constants(&self) -> bool {
        self.constants.values().flatten().all(|(_, c)| rational::is_integer(c))
    }

    /// `[X_i, X_j]` as a dense vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vector {
        let n = self.dim();
        let mut out = Vector::zero(n);
        if i == j {
            return out;
        }
        let (key, neg) = if i < j { ((i, j), false) } else { ((j, i), true) };
        if let Some(terms) = self.constants.get(&key) {
            for (k, c) in terms {
                out.0[*k] = if neg { -c.clone() } else { c.clone() };
            }
        }
        out
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.dim() });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = vec![Q::zero(); self.dim()];
        for (&(i, j), terms) in &self.constants {
            let coef = &x.0[i] * &y.0[j] - &x.0[j] * &y.0[i];
            if coef.is_zero() {
                continue;
            }
            for (k, c) in terms {
                out[*k] += &coef * c;
            }
        }
        Vector(out)
    }

    /// Matrix of `ad_x` acting on column coordinates: column `k` is `[x, X_k]`.
    pub fn ad_matrix(&self, x: &Vector) -> Mat {
        let n = self.dim();
        let cols: Vec<Vector> = (0..n).map(|k| self.bracket_unchecked(x, &self.basis_vector(k))).collect();
        (0..n).map(|r| (0..n).map(|c| cols[c].0[r].clone()).collect()).collect()
    }

    pub fn jacobi_residual(&self, i: usize, j: usize, k: usize) -> Vector {
        let (a, b, c) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
        let t1 = self.bracket_unchecked(&a, &self.bracket_unchecked(&b, &c));
        let t2 = self.bracket_unchecked(&b, &self.bracket_unchecked(&c, &a));
        let t3 = self.bracket_unchecked(&c, &self.bracket_unchecked(&a, &b));
        &(&t1 + &t2) + &t3
    }

    fn check_jacobi(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if !self.jacobi_residual(i, j, k).is_zero() {
                        return Err(Error::invalid(
                            "jacobi",
                            format!(
                                "Jacobi identity fails on ({}, {}, {})",
                                self.labels[i], self.labels[j], self.labels[k]
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Wraps a subspace as a subalgebra after checking closure under the
    /// bracket.
    pub fn subalgebra(&self, generators: Vec<Vector>) -> Result<Subalgebra> {
        for g in &generators {
            self.check_dim(g)?;
        }
        let space = Subspace::span(self.dim(), generators.into_iter().map(|v| v.0));
        self.subalgebra_from_space(space)
    }

    pub fn subalgebra_from_space(&self, space: Subspace) -> Result<Subalgebra> {
        let basis: Vec<Vector> = space.basis().iter().cloned().map(Vector).collect();
        for (a, x) in basis.iter().enumerate() {
            for y in &basis[a + 1..] {
                if !space.contains(&self.bracket_unchecked(x, y).0) {
                    return Err(Error::invalid("subalgebra", "subspace is not closed under the bracket"));
                }
            }
        }
        let is_ideal = basis.iter().all(|y| {
            (0..self.dim()).all(|k| space.contains(&self.bracket_unchecked(&self.basis_vector(k), y).0))
        });
        Ok(Subalgebra { space, is_ideal })
    }

    pub fn whole(&self) -> Subalgebra {
        Subalgebra { space: Subspace::full(self.dim()), is_ideal: true }
    }

    pub fn zero_subalgebra(&self) -> Subalgebra {
        Subalgebra { space: Subspace::zero(self.dim()), is_ideal: true }
    }

    /// `{x : [x, h] ⊆ target}` for a subspace `h`, as a linear system.
    fn bracket_preimage(&self, h: &Subspace, target: &Subspace) -> Subspace {
        let n = self.dim();
        let ann = target.annihilator();
        let mut eqs: Mat = Vec::new();
        for hv in h.basis() {
            let hv = Vector(hv.clone());
            // x ↦ [x, hv] has matrix -ad_hv.
            let ad = self.ad_matrix(&hv);
            for phi in &ann {
                // phi([x, hv]) = -phi(ad_hv x)
                let row: Vec<Q> = (0..n).map(|c| -(0..n).fold(Q::zero(), |acc, r| acc + &phi[r] * &ad[r][c])).collect();
                eqs.push(row);
            }
        }
        Subspace::from_equations(n, &eqs)
    }

    pub fn centralizer(&self, h: &Subspace) -> Result<Subalgebra> {
        if h.ambient() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: h.ambient() });
        }
        self.subalgebra_from_space(self.bracket_preimage(h, &Subspace::zero(self.dim())))
    }

    pub fn normalizer(&self, h: &Subspace) -> Result<Subalgebra> {
        if h.ambient() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: h.ambient() });
        }
        self.subalgebra_from_space(self.bracket_preimage(h, h))
    }

    pub fn center(&self) -> Subalgebra {
        self.centralizer(&Subspace::full(self.dim())).expect("center is a subalgebra")
    }

    /// `0 = g_0 ⊂ g_1 ⊂ ... ⊂ g_k = g` with `g_j = {x : [x, g] ⊆ g_{j-1}}`.
    pub fn ascending_central_series(&self) -> Result<Vec<Subalgebra>> {
        let n = self.dim();
        let full = Subspace::full(n);
        let mut series = vec![self.zero_subalgebra()];
        for _ in 0..n {
            let prev = series.last().expect("nonempty").space.clone();
            let next = self.bracket_preimage(&full, &prev);
            if next.dim() == prev.dim() {
                break;
            }
            let done = next.dim() == n;
            series.push(self.subalgebra_from_space(next)?);
            if done {
                return Ok(series);
            }
        }
        Err(Error::invalid(
            "nilpotency",
            "ascending central series does not reach the algebra",
        ))
    }

    /// Number of steps of the ascending central series.
    pub fn nilpotency_class(&self) -> usize {
        self.ascending_central_series().map(|s| s.len() - 1).unwrap_or(usize::MAX)
    }

    /// Picks the lowest-index canonical basis vector in `candidates ∖ h`,
    /// falling back to the first echelon vector of `candidates` outside `h`.
    fn lowest_candidate(&self, candidates: &Subspace, h: &Subspace) -> Option<Vector> {
        (0..self.dim())
            .map(|i| self.basis_vector(i))
            .find(|e| candidates.contains(&e.0) && !h.contains(&e.0))
            .or_else(|| candidates.basis().iter().find(|v| !h.contains(v)).cloned().map(Vector))
    }

    /// Extends the chain `0 ⊂ c_1 ⊂ ... ⊂ c_r (⊂ g)` to a Malcev basis.
    pub fn malcev_basis_through(&self, chain: &[Subalgebra], kind: MalcevKind) -> Result<MalcevBasis> {
        let n = self.dim();
        for w in chain.windows(2) {
            if !w[1].space.contains_space(&w[0].space) {
                return Err(Error::precondition("ascending_chain", "chain is not ascending"));
            }
        }
        if kind == MalcevKind::Strong {
            if let Some(bad) = chain.iter().find(|c| !c.is_ideal) {
                return Err(Error::precondition(
                    "ideal_chain",
                    format!("strong basis requested but a {}-dimensional member is not an ideal", bad.dim()),
                ));
            }
        }
        let mut targets: Vec<Subspace> = chain.iter().map(|c| c.space.clone()).collect();
        if targets.last().map_or(true, |t| t.dim() < n) {
            targets.push(Subspace::full(n));
        }
        let mut vectors: Vec<Vector> = Vec::new();
        let mut h = Subspace::zero(n);
        let mut checkpoints = Vec::new();
        for (idx, target) in targets.iter().enumerate() {
            while h.dim() < target.dim() {
                let pool = match kind {
                    MalcevKind::Weak => self.bracket_preimage(&h, &h),
                    MalcevKind::Strong => self.bracket_preimage(&Subspace::full(n), &h),
                }
                .intersection(target);
                let x = self.lowest_candidate(&pool, &h).ok_or_else(|| {
                    Error::invalid("nilpotency", "no extension vector found; algebra is not nilpotent")
                })?;
                h = h.sum(&Subspace::span(n, [x.0.clone()]));
                vectors.push(x);
            }
            if idx < chain.len() {
                checkpoints.push(h.dim());
            }
        }
        Ok(MalcevBasis { vectors, kind, checkpoints })
    }

    /// Strong Malcev basis through the ascending central series.
    pub fn strong_malcev_basis(&self) -> MalcevBasis {
        let series = self.ascending_central_series().expect("validated at construction");
        self.malcev_basis_through(&series[1..], MalcevKind::Strong)
            .expect("central series is a chain of ideals")
    }

    pub fn kirillov_quadruple(&self) -> Result<ReducingQuadruple> {
        if self.is_abelian() {
            return Err(Error::precondition("noncommutative", "algebra is abelian"));
        }
        let series = self.ascending_central_series()?;
        let center = &series[1];
        if center.dim() != 1 {
            return Err(Error::precondition(
                "one_dimensional_center",
                format!("center has dimension {}", center.dim()),
            ));
        }
        let z = center.generators().remove(0);
        let y = self
            .lowest_candidate(&series[2].space, &center.space)
            .expect("g_2 strictly contains g_1 for noncommutative algebras");
        let g0 = self.centralizer(&Subspace::span(self.dim(), [y.0.clone()]))?;
        let x0 = self
            .lowest_candidate(&Subspace::full(self.dim()), &g0.space)
            .expect("centralizer of a noncentral vector is proper");
        let bracket = self.bracket_unchecked(&x0, &y);
        let pc = z.0.iter().position(|c| !c.is_zero()).expect("nonzero");
        let lambda = &bracket.0[pc] / &z.0[pc];
        let x = x0.scale(&lambda.recip());
        debug_assert_eq!(self.bracket_unchecked(&x, &y), z);
        Ok(ReducingQuadruple { z, y, x, g0 })
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, num: i64, den: i64) -> Vector {
        Vector(rational::random_vec(rng, self.dim(), num, den))
    }

    // ---- standard algebras -------------------------------------------------

    pub fn abelian(n: usize) -> Self {
        let labels = (1..=n).map(|i| format!("A{i}")).collect();
        LieAlgebra::new(labels, Vec::new()).expect("abelian algebra is valid")
    }

    /// `h3 = <Z, Y, X>` with `[X, Y] = Z`.
    pub fn heisenberg() -> Self {
        let labels = ["Z", "Y", "X"].map(String::from).to_vec();
        LieAlgebra::new(labels, vec![(2, 1, vec![(0, Q::one())])]).expect("h3 is valid")
    }

    /// `k4 = <X1, X2, X3, Y>` with `[Y, X_i] = X_{i-1}`.
    pub fn k4() -> Self {
        let labels = ["X1", "X2", "X3", "Y"].map(String::from).to_vec();
        let br = vec![(3, 1, vec![(0, Q::one())]), (3, 2, vec![(1, Q::one())])];
        LieAlgebra::new(labels, br).expect("k4 is valid")
    }

    /// Strictly upper triangular `m x m` matrices, basis `E_ij` ordered by
    /// decreasing `j - i` so the center comes first.
    pub fn strictly_upper_triangular(m: usize) -> Self {
        let (labels, brackets) = upper_triangular_table(m);
        LieAlgebra::new(labels, brackets).expect("n_m is valid")
    }

    // ---- file format -------------------------------------------------------

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AlgebraFile = serde_json::from_str(text)?;
        if file.basis.len() != file.dim {
            return Err(Error::invalid(
                "dimension",
                format!("dim = {} but {} basis labels", file.dim, file.basis.len()),
            ));
        }
        let idx = |l: &str| {
            file.basis
                .iter()
                .position(|b| b == l)
                .ok_or_else(|| Error::Parse(format!("unknown basis label {l:?}")))
        };
        let mut brackets = Vec::new();
        for entry in &file.brackets {
            let terms = entry
                .terms
                .iter()
                .map(|(l, c)| Ok((idx(l)?, parse_q(c)?)))
                .collect::<Result<Terms>>()?;
            brackets.push((idx(&entry.i)?, idx(&entry.j)?, terms));
        }
        LieAlgebra::new(file.basis.clone(), brackets)
    }

    pub fn to_json(&self) -> String {
        let brackets = self
            .constants
            .iter()
            .map(|(&(i, j), terms)| BracketEntry {
                i: self.labels[i].clone(),
                j: self.labels[j].clone(),
                terms: terms.iter().map(|(k, c)| (self.labels[*k].clone(), fmt_q(c))).collect(),
            })
            .collect();
        let file = AlgebraFile { dim: self.dim(), basis: self.labels.clone(), brackets };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

fn upper_triangular_table(m: usize) -> (Vec<String>, Vec<(usize, usize, Terms)>) {
    let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    pairs.sort_by_key(|&(i, j)| (std::cmp::Reverse(j - i), i));
    let labels = pairs.iter().map(|(i, j)| format!("E{}{}", i + 1, j + 1)).collect();
    let pos = |p: (usize, usize)| pairs.iter().position(|&q| q == p);
    let mut brackets = Vec::new();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(k, l)) in pairs.iter().enumerate().skip(a + 1) {
            // [E_ij, E_kl] = δ_jk E_il − δ_li E_kj
            let mut terms = Vec::new();
            if j == k {
                terms.push((pos((i, l)).expect("upper"), Q::one()));
            }
            if l == i {
                terms.push((pos((k, j)).expect("upper"), -Q::one()));
            }
            if !terms.is_empty() {
                brackets.push((a, b, terms));
            }
        }
    }
    (labels, brackets)
}

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    dim: usize,
    basis: Vec<String>,
    #[serde(default)]
    brackets: Vec<BracketEntry>,
}

#[derive(Serialize, Deserialize)]
struct BracketEntry {
    i: String,
    j: String,
    terms: Vec<(String, String)>,
}
