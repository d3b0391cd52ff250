//! Group law in exponential coordinates.
//!
//! A group element is represented by `log g ∈ g`. Products use the
//! Baker–Campbell–Hausdorff series truncated at the nilpotency class; the
//! series coefficients are generated once, exactly, in the free associative
//! algebra on two letters. Matrix representations provide an independent
//! route through finite exponential and logarithm series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, Vector};
use crate::linalg::{self, Mat};
use crate::rational::{self, parse_q, Q};

/// Highest total degree carried by the coefficient tables.
pub const MAX_BCH_DEGREE: usize = 6;

/// Letters of the free algebra: `0 = X`, `1 = Y`.
pub type Word = Vec<u8>;

/// Noncommutative polynomial in `X, Y`.
pub type NcPoly = BTreeMap<Word, Q>;

fn nc_add_into(acc: &mut NcPoly, p: &NcPoly, scale: &Q) {
    for (w, c) in p {
        let e = acc.entry(w.clone()).or_insert_with(Q::zero);
        *e += c * scale;
        if e.is_zero() {
            acc.remove(w);
        }
    }
}

fn nc_mul(a: &NcPoly, b: &NcPoly, max_deg: usize) -> NcPoly {
    let mut out = NcPoly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > max_deg {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let e = out.entry(w).or_insert_with(Q::zero);
            *e += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn letter(l: u8) -> NcPoly {
    NcPoly::from([(vec![l], Q::one())])
}

fn nc_exp(p: &NcPoly, max_deg: usize) -> NcPoly {
    let mut out = NcPoly::from([(Vec::new(), Q::one())]);
    let mut power = NcPoly::from([(Vec::new(), Q::one())]);
    for k in 1..=max_deg {
        power = nc_mul(&power, p, max_deg);
        nc_add_into(&mut out, &power, &Q::new(BigInt::one(), rational::factorial(k)));
    }
    out
}

fn nc_log_one_plus(w: &NcPoly, max_deg: usize) -> NcPoly {
    let mut out = NcPoly::new();
    let mut power = NcPoly::from([(Vec::new(), Q::one())]);
    for k in 1..=max_deg {
        power = nc_mul(&power, w, max_deg);
        let sign = if k % 2 == 1 { Q::one() } else { -Q::one() };
        nc_add_into(&mut out, &power, &(sign / rational::q(k as i64)));
    }
    out
}

/// Bracket expression in the free Lie algebra on `X, Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LieTree {
    Letter(u8),
    Bracket(Box<LieTree>, Box<LieTree>),
}

impl LieTree {
    pub fn bracket(a: LieTree, b: LieTree) -> LieTree {
        LieTree::Bracket(Box::new(a), Box::new(b))
    }

    /// `[w_1, [w_2, [..., [w_{k-1}, w_k]]]]`.
    pub fn right_nested(word: &[u8]) -> LieTree {
        let (last, rest) = word.split_last().expect("nonempty word");
        rest.iter()
            .rev()
            .fold(LieTree::Letter(*last), |acc, &l| LieTree::bracket(LieTree::Letter(l), acc))
    }

    pub fn degree(&self) -> usize {
        match self {
            LieTree::Letter(_) => 1,
            LieTree::Bracket(a, b) => a.degree() + b.degree(),
        }
    }

    /// Expansion `[a, b] = ab - ba` in the free associative algebra.
    pub fn expand(&self) -> NcPoly {
        match self {
            LieTree::Letter(l) => letter(*l),
            LieTree::Bracket(a, b) => {
                let (ea, eb) = (a.expand(), b.expand());
                let mut out = nc_mul(&ea, &eb, usize::MAX);
                nc_add_into(&mut out, &nc_mul(&eb, &ea, usize::MAX), &-Q::one());
                out
            }
        }
    }

    pub fn eval(&self, alg: &LieAlgebra, x: &Vector, y: &Vector) -> Vector {
        match self {
            LieTree::Letter(0) => x.clone(),
            LieTree::Letter(_) => y.clone(),
            LieTree::Bracket(a, b) => alg.bracket_unchecked(&a.eval(alg, x, y), &b.eval(alg, x, y)),
        }
    }
}

impl fmt::Display for LieTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieTree::Letter(0) => write!(f, "X"),
            LieTree::Letter(_) => write!(f, "Y"),
            LieTree::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

fn is_lyndon(w: &[u8]) -> bool {
    (1..w.len()).all(|i| w < &w[i..])
}

fn standard_bracketing(w: &[u8]) -> LieTree {
    if w.len() == 1 {
        return LieTree::Letter(w[0]);
    }
    // Longest proper Lyndon suffix.
    let split = (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("last letter is Lyndon");
    LieTree::bracket(standard_bracketing(&w[..split]), standard_bracketing(&w[split..]))
}

fn words(len: usize) -> impl Iterator<Item = Word> {
    (0..1u32 << len).map(move |bits| (0..len).rev().map(|i| ((bits >> i) & 1) as u8).collect())
}

/// Dynkin coefficient of a word: sum over its factorizations into blocks
/// `X^r Y^s` with `r + s > 0`.
fn dynkin_coefficient(w: &[u8]) -> Q {
    fn block(seg: &[u8]) -> Option<(usize, usize)> {
        let r = seg.iter().take_while(|&&l| l == 0).count();
        seg[r..].iter().all(|&l| l == 1).then_some((r, seg.len() - r))
    }
    fn go(rest: &[u8], blocks: usize, weight: Q, acc: &mut Q) {
        if rest.is_empty() {
            let sign = if blocks % 2 == 1 { Q::one() } else { -Q::one() };
            *acc += sign * weight / rational::q(blocks as i64);
            return;
        }
        for cut in 1..=rest.len() {
            if let Some((r, s)) = block(&rest[..cut]) {
                let w = &weight / Q::from_integer(rational::factorial(r) * rational::factorial(s));
                go(&rest[cut..], blocks + 1, w, acc);
            }
        }
    }
    let mut acc = Q::zero();
    go(w, 0, Q::one(), &mut acc);
    acc / rational::q(w.len() as i64)
}

/// Exact coefficient tables for `log(exp X exp Y)` through degree six.
pub struct BchTable {
    /// Homogeneous components of `log(exp X exp Y)`, indexed by degree.
    pub series: Vec<NcPoly>,
    /// Nonzero Dynkin coefficients of right-nested words, by degree.
    pub dynkin: Vec<Vec<(Word, Q)>>,
    /// Coefficients in the Lyndon basis with standard bracketing, by degree.
    pub lyndon: Vec<Vec<(LieTree, Q)>>,
}

impl BchTable {
    fn build() -> Self {
        let d = MAX_BCH_DEGREE;
        let product = nc_mul(&nc_exp(&letter(0), d), &nc_exp(&letter(1), d), d);
        let mut shifted = product;
        shifted.remove(&Vec::new());
        let log = nc_log_one_plus(&shifted, d);
        let mut series = vec![NcPoly::new(); d + 1];
        for (w, c) in log {
            series[w.len()].insert(w, c);
        }

        let dynkin = (0..=d)
            .map(|deg| {
                if deg == 0 {
                    return Vec::new();
                }
                words(deg)
                    .map(|w| {
                        let c = dynkin_coefficient(&w);
                        (w, c)
                    })
                    .filter(|(_, c)| !c.is_zero())
                    .collect()
            })
            .collect();

        let lyndon = (0..=d)
            .map(|deg| {
                if deg == 0 {
                    return Vec::new();
                }
                let trees: Vec<LieTree> = words(deg).filter(|w| is_lyndon(w)).map(|w| standard_bracketing(&w)).collect();
                let expansions: Vec<NcPoly> = trees.iter().map(LieTree::expand).collect();
                let rows: Mat = words(deg)
                    .map(|w| expansions.iter().map(|e| e.get(&w).cloned().unwrap_or_else(Q::zero)).collect())
                    .collect();
                let rhs: Vec<Q> = words(deg).map(|w| series[deg].get(&w).cloned().unwrap_or_else(Q::zero)).collect();
                let coeffs = linalg::solve(&rows, &rhs).expect("BCH component is a Lie element");
                trees.into_iter().zip(coeffs).filter(|(_, c)| !c.is_zero()).collect()
            })
            .collect();

        BchTable { series, dynkin, lyndon }
    }

    pub fn get() -> &'static BchTable {
        static TABLE: Lazy<BchTable> = Lazy::new(BchTable::build);
        &TABLE
    }
}

fn check_class(alg: &LieAlgebra) -> Result<usize> {
    let class = alg.nilpotency_class();
    if class > MAX_BCH_DEGREE {
        return Err(Error::precondition(
            "bch_table_depth",
            format!("nilpotency class {class} exceeds coefficient table depth {MAX_BCH_DEGREE}"),
        ));
    }
    Ok(class)
}

/// `b_j(x, y)` through the Dynkin table: a sum of right-nested brackets.
pub fn bch_component(alg: &LieAlgebra, x: &Vector, y: &Vector, degree: usize) -> Vector {
    let table = BchTable::get();
    let mut memo: HashMap<Word, Vector> = HashMap::new();
    let mut out = Vector::zero(alg.dim());
    for (w, c) in &table.dynkin[degree] {
        let v = right_nested_eval(alg, x, y, w, &mut memo);
        out = &out + &v.scale(c);
    }
    out
}

fn right_nested_eval(alg: &LieAlgebra, x: &Vector, y: &Vector, w: &[u8], memo: &mut HashMap<Word, Vector>) -> Vector {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let head = if w[0] == 0 { x } else { y };
    let v = if w.len() == 1 {
        head.clone()
    } else {
        let tail = right_nested_eval(alg, x, y, &w[1..], memo);
        alg.bracket_unchecked(head, &tail)
    };
    memo.insert(w.to_vec(), v.clone());
    v
}

/// `x * y = log(exp x exp y)`, exact.
pub fn bch(alg: &LieAlgebra, x: &Vector, y: &Vector) -> Result<Vector> {
    if x.dim() != alg.dim() || y.dim() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: x.dim().min(y.dim()) });
    }
    let class = check_class(alg)?;
    let mut out = x + y;
    for deg in 2..=class {
        out = &out + &bch_component(alg, x, y, deg);
    }
    Ok(out)
}

/// Same product evaluated through the Lyndon-basis table.
pub fn bch_lyndon(alg: &LieAlgebra, x: &Vector, y: &Vector) -> Result<Vector> {
    let class = check_class(alg)?;
    let table = BchTable::get();
    let mut out = x + y;
    for deg in 2..=class {
        for (tree, c) in &table.lyndon[deg] {
            out = &out + &tree.eval(alg, x, y).scale(c);
        }
    }
    Ok(out)
}

pub fn group_inverse(x: &Vector) -> Vector {
    -x
}

/// Least `a ≥ 1` such that `a · g_Z` is a universal order: `a^{j-1}` times
/// every coefficient of `b_j` is integral for `2 ≤ j ≤ class`, and
/// `b_j(aX_i, aX_k) ∈ a · g_Z` holds on all basis pairs.
pub fn universal_scalar(alg: &LieAlgebra) -> Result<u64> {
    if !alg.has_integral_constants() {
        return Err(Error::precondition(
            "integral_structure_constants",
            "structure constants must be integral; rescale the basis first",
        ));
    }
    let class = check_class(alg)?;
    let table = BchTable::get();
    let lcm_bound: BigInt = (2..=class)
        .flat_map(|j| table.lyndon[j].iter().map(|(_, c)| c.denom().clone()))
        .fold(BigInt::one(), |acc, d| num_integer::Integer::lcm(&acc, &d));
    let bound: u64 = lcm_bound.try_into().unwrap_or(u64::MAX);
    (1..=bound)
        .find(|&a| is_universal_scalar(alg, a, class))
        .ok_or_else(|| Error::Numerical("no universal scalar below the denominator bound".into()))
}

fn is_universal_scalar(alg: &LieAlgebra, a: u64, class: usize) -> bool {
    let table = BchTable::get();
    let aq = rational::q(a as i64);
    let ladder = (2..=class).all(|j| {
        let scale = rational::pow_i(&aq, j as i64 - 1);
        table.lyndon[j].iter().all(|(_, c)| rational::is_integer(&(c * &scale)))
    });
    if !ladder {
        return false;
    }
    let n = alg.dim();
    (0..n).all(|i| {
        (0..n).all(|k| {
            let (xi, xk) = (alg.basis_vector(i).scale(&aq), alg.basis_vector(k).scale(&aq));
            (2..=class).all(|j| {
                bch_component(alg, &xi, &xk, j).0.iter().all(|c| rational::is_integer(&(c / &aq)))
            })
        })
    })
}

/// Faithful representation by strictly upper triangular rational matrices.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    size: usize,
    images: Vec<Mat>,
}

#[derive(Deserialize)]
struct RepFile {
    dim: usize,
    images: BTreeMap<String, Vec<Vec<String>>>,
}

fn is_strictly_upper(m: &Mat) -> bool {
    m.iter().enumerate().all(|(i, r)| r.iter().take(i + 1).all(Zero::is_zero))
}

fn commutator(a: &Mat, b: &Mat) -> Mat {
    linalg::mat_sub(&linalg::mat_mul(a, b), &linalg::mat_mul(b, a))
}

impl MatrixRep {
    /// Checks shape, strict upper triangularity, the homomorphism property
    /// and faithfulness.
    pub fn new(alg: &LieAlgebra, size: usize, images: Vec<Mat>) -> Result<Self> {
        if images.len() != alg.dim() {
            return Err(Error::DimensionMismatch { expected: alg.dim(), got: images.len() });
        }
        for m in &images {
            if m.len() != size || m.iter().any(|r| r.len() != size) {
                return Err(Error::invalid("matrix_shape", format!("image is not {size}x{size}")));
            }
            if !is_strictly_upper(m) {
                return Err(Error::invalid("strictly_upper", "image is not strictly upper triangular"));
            }
        }
        let rep = MatrixRep { size, images };
        let n = alg.dim();
        for i in 0..n {
            for j in i + 1..n {
                let lhs = rep.image(&alg.bracket_basis(i, j));
                let rhs = commutator(&rep.images[i], &rep.images[j]);
                if lhs != rhs {
                    return Err(Error::invalid(
                        "homomorphism",
                        format!("bracket of {} and {} is not mapped to the commutator", alg.labels()[i], alg.labels()[j]),
                    ));
                }
            }
        }
        let flat: Mat = rep.images.iter().map(|m| m.iter().flatten().cloned().collect()).collect();
        if linalg::rank(&flat) != n {
            return Err(Error::invalid("faithful", "images are linearly dependent"));
        }
        Ok(rep)
    }

    pub fn from_json(alg: &LieAlgebra, text: &str) -> Result<Self> {
        let file: RepFile = serde_json::from_str(text)?;
        let mut images = vec![None; alg.dim()];
        for (label, rows) in &file.images {
            let i = alg.index_of(label).ok_or_else(|| Error::Parse(format!("unknown basis label {label:?}")))?;
            let m = rows.iter().map(|r| r.iter().map(|s| parse_q(s)).collect()).collect::<Result<Mat>>()?;
            images[i] = Some(m);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::Parse(format!("missing image for {}", alg.labels()[i]))))
            .collect::<Result<Vec<_>>>()?;
        MatrixRep::new(alg, file.dim, images)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn image(&self, x: &Vector) -> Mat {
        let mut out = linalg::zeros(self.size, self.size);
        for (c, m) in x.0.iter().zip(&self.images) {
            if !c.is_zero() {
                out = linalg::mat_add(&out, &linalg::mat_scale(m, c));
            }
        }
        out
    }

    /// Preimage of a matrix in the image of the representation.
    pub fn preimage(&self, m: &Mat) -> Result<Vector> {
        let n = self.images.len();
        let rows: Mat = (0..self.size * self.size)
            .map(|k| (0..n).map(|i| self.images[i][k / self.size][k % self.size].clone()).collect())
            .collect();
        let rhs: Vec<Q> = m.iter().flatten().cloned().collect();
        linalg::solve(&rows, &rhs)
            .map(Vector)
            .ok_or_else(|| Error::precondition("in_image", "matrix is not in the image of the representation"))
    }

    pub fn exp(&self, x: &Vector) -> Mat {
        mat_exp(&self.image(x)).expect("strictly upper triangular matrices are nilpotent")
    }

    pub fn log(&self, m: &Mat) -> Result<Vector> {
        self.preimage(&mat_log(m)?)
    }
}

fn nilpotent_powers(a: &Mat) -> Result<Vec<Mat>> {
    let n = a.len();
    let mut powers = vec![linalg::identity(n)];
    for _ in 0..n {
        let next = linalg::mat_mul(powers.last().expect("nonempty"), a);
        if linalg::is_zero_mat(&next) {
            return Ok(powers);
        }
        powers.push(next);
    }
    Err(Error::precondition("nilpotent", "matrix is not nilpotent"))
}

/// `exp(A) = Σ A^k / k!` for nilpotent `A`.
pub fn mat_exp(a: &Mat) -> Result<Mat> {
    let powers = nilpotent_powers(a)?;
    let mut out = linalg::zeros(a.len(), a.len());
    for (k, p) in powers.iter().enumerate() {
        out = linalg::mat_add(&out, &linalg::mat_scale(p, &Q::new(BigInt::one(), rational::factorial(k))));
    }
    Ok(out)
}

/// `log(M) = Σ (-1)^{k+1} (M - I)^k / k` for unipotent `M`.
pub fn mat_log(m: &Mat) -> Result<Mat> {
    let n = linalg::mat_sub(m, &linalg::identity(m.len()));
    let powers = nilpotent_powers(&n)
        .map_err(|_| Error::precondition("unipotent", "matrix is not unipotent"))?;
    let mut out = linalg::zeros(m.len(), m.len());
    for (k, p) in powers.iter().enumerate().skip(1) {
        let sign = if k % 2 == 1 { Q::one() } else { -Q::one() };
        out = linalg::mat_add(&out, &linalg::mat_scale(p, &(sign / rational::q(k as i64))));
    }
    Ok(out)
}

/// Coefficients of the Lyndon-basis expansion of `b_j`, rendered as bracket
/// expressions; used for reports.
pub fn bch_terms(degree: usize) -> Vec<(String, Q)> {
    BchTable::get().lyndon.get(degree).map_or_else(Vec::new, |terms| {
        terms.iter().map(|(t, c)| (t.to_string(), c.clone())).collect()
    })
}

/// Largest absolute value of a Lyndon coefficient denominator through
/// `degree`; a quick handle on how far the table reaches.
pub fn max_denominator(degree: usize) -> BigInt {
    let table = BchTable::get();
    (2..=degree.min(MAX_BCH_DEGREE))
        .flat_map(|j| table.lyndon[j].iter().map(|(_, c)| c.denom().abs()))
        .max()
        .unwrap_or_else(BigInt::one)
}
