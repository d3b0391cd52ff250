//! Coadjoint orbits: the skew form `B_ℓ`, radicals, Vergne polarizations,
//! d-vector strata, cross-section representatives and relative Pfaffians.
//!
//! Points of `g*` are coordinate vectors in the dual of the fixed basis.
//! Everything that depends on a flag of ideals takes a strong Malcev basis.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group;
use crate::lie::{LieAlgebra, MalcevBasis, MalcevKind, Subalgebra, Vector};
use crate::linalg::{self, Mat, Subspace};
use crate::poly::PolynomialOnDual;
use crate::rational::{self, Q};

/// `exp(ad_x)`, i.e. `Ad(exp x)` on column coordinates.
pub fn ad_exp(alg: &LieAlgebra, x: &Vector) -> Mat {
    group::mat_exp(&alg.ad_matrix(x)).expect("ad of a nilpotent algebra is nilpotent")
}

/// Matrix of `Ad*(exp x)` on dual coordinates: the transpose of `exp(-ad_x)`.
pub fn coadjoint_matrix(alg: &LieAlgebra, x: &Vector) -> Mat {
    linalg::transpose(&ad_exp(alg, &-x))
}

/// `Ad*(g) ℓ = ℓ ∘ Ad(g⁻¹)` for `g = exp x`.
pub fn coadjoint_act(alg: &LieAlgebra, x: &Vector, ell: &Vector) -> Result<Vector> {
    check_dim(alg, x)?;
    check_dim(alg, ell)?;
    Ok(Vector(linalg::mat_vec(&coadjoint_matrix(alg, x), &ell.0)))
}

fn check_dim(alg: &LieAlgebra, v: &Vector) -> Result<()> {
    if v.dim() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: v.dim() });
    }
    Ok(())
}

/// `M_ij = ℓ([X_i, X_j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewForm(pub Mat);

impl SkewForm {
    pub fn rank(&self) -> usize {
        linalg::rank(&self.0)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let m = &self.0;
        (0..m.len()).all(|i| (0..m.len()).all(|j| m[i][j] == -m[j][i].clone()))
    }

    pub fn eval(&self, x: &Vector, y: &Vector) -> Q {
        linalg::dot(&x.0, &linalg::mat_vec(&self.0, &y.0))
    }
}

pub fn b_form(alg: &LieAlgebra, ell: &Vector) -> Result<SkewForm> {
    check_dim(alg, ell)?;
    Ok(SkewForm(form_in_basis(alg, ell, &identity_basis(alg))))
}

fn identity_basis(alg: &LieAlgebra) -> Vec<Vector> {
    (0..alg.dim()).map(|i| alg.basis_vector(i)).collect()
}

/// `(ℓ([v_a, v_b]))_{a,b}` for the given vectors.
fn form_in_basis(alg: &LieAlgebra, ell: &Vector, vs: &[Vector]) -> Mat {
    let n = vs.len();
    let mut m = linalg::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            let v = alg.bracket_unchecked(&vs[a], &vs[b]).dot(ell);
            m[b][a] = -v.clone();
            m[a][b] = v;
        }
    }
    m
}

/// `r_ℓ = {x : ℓ([x, g]) = 0}`.
pub fn radical(alg: &LieAlgebra, ell: &Vector) -> Result<Subalgebra> {
    let form = b_form(alg, ell)?;
    alg.subalgebra_from_space(Subspace::from_equations(alg.dim(), &form.0))
}

pub fn orbit_dim(alg: &LieAlgebra, ell: &Vector) -> Result<usize> {
    Ok(b_form(alg, ell)?.rank())
}

fn require_strong(basis: &MalcevBasis) -> Result<()> {
    if basis.kind != MalcevKind::Strong {
        return Err(Error::precondition("strong_basis", "a strong Malcev basis is required"));
    }
    Ok(())
}

/// Radical of `ℓ|_h` inside `h`, for `h` spanned by `vs`.
fn restricted_radical(alg: &LieAlgebra, ell: &Vector, vs: &[Vector]) -> Vec<Vector> {
    let m = form_in_basis(alg, ell, vs);
    linalg::kernel(&m, vs.len())
        .into_iter()
        .map(|coeffs| {
            coeffs.iter().zip(vs).fold(Vector::zero(alg.dim()), |acc, (c, v)| &acc + &v.scale(c))
        })
        .collect()
}

/// `m_ℓ = Σ_j r_{ℓ|g_j}(g_j)` along the prefixes of a strong Malcev basis.
pub fn vergne_polarization(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis) -> Result<Subalgebra> {
    check_dim(alg, ell)?;
    require_strong(basis)?;
    let n = alg.dim();
    let mut span = Subspace::zero(n);
    for j in 1..=n {
        let rad = restricted_radical(alg, ell, &basis.vectors[..j]);
        span = span.sum(&Subspace::span(n, rad.into_iter().map(|v| v.0)));
    }
    alg.subalgebra_from_space(span)
}

/// Expected polarization dimension `dim r_ℓ + (n - dim r_ℓ)/2`.
pub fn polarization_dim(alg: &LieAlgebra, ell: &Vector) -> Result<usize> {
    let r = radical(alg, ell)?.dim();
    Ok(r + (alg.dim() - r) / 2)
}

/// Whether `ℓ([a, b]) = 0` on all generator pairs of `m`.
pub fn is_isotropic(alg: &LieAlgebra, ell: &Vector, m: &Subalgebra) -> bool {
    let gens = m.generators();
    form_in_basis(alg, ell, &gens).iter().flatten().all(Zero::is_zero)
}

/// d-vector of a point together with its jump (`I`) and flat (`J`) index
/// sets. Indices are 0-based; [`StratumData::one_based`] renders them for
/// reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StratumData {
    pub d: Vec<usize>,
    pub i_set: Vec<usize>,
    pub j_set: Vec<usize>,
}

impl StratumData {
    pub fn from_d(d: Vec<usize>) -> Result<Self> {
        let mut i_set = Vec::new();
        let mut j_set = Vec::new();
        let mut prev = 0;
        for (idx, &dj) in d.iter().enumerate() {
            match dj.checked_sub(prev) {
                Some(1) => i_set.push(idx),
                Some(0) => j_set.push(idx),
                _ => return Err(Error::invalid("d_vector", format!("d = {d:?} does not step by 0 or 1"))),
            }
            prev = dj;
        }
        if i_set.len() % 2 == 1 {
            return Err(Error::invalid("d_vector", format!("|I| = {} is odd", i_set.len())));
        }
        Ok(StratumData { d, i_set, j_set })
    }

    pub fn k(&self) -> usize {
        self.i_set.len() / 2
    }

    pub fn one_based(set: &[usize]) -> Vec<usize> {
        set.iter().map(|i| i + 1).collect()
    }
}

/// `d_j = rank (ℓ([v_a, v_b]))_{a ≤ n, b ≤ j}` in a strong Malcev basis.
pub fn d_vector(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis) -> Result<StratumData> {
    check_dim(alg, ell)?;
    require_strong(basis)?;
    let m = form_in_basis(alg, ell, &basis.vectors);
    let n = alg.dim();
    let d = (1..=n)
        .map(|j| linalg::rank(&m.iter().map(|row| row[..j].to_vec()).collect()))
        .collect();
    StratumData::from_d(d)
}

/// Cross-section point of the orbit of `ℓ` together with the group element
/// `g` (in exponential coordinates) with `Ad*(g) ℓ = representative`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossSection {
    pub representative: Vector,
    pub element: Vector,
    pub stratum: StratumData,
}

/// The unique point of `Ad*(G) ℓ` whose `I`-coordinates (in the dual Malcev
/// basis) vanish.
pub fn orbit_representative(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis) -> Result<Vector> {
    Ok(cross_section(alg, ell, basis)?.representative)
}

pub fn cross_section(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis) -> Result<CrossSection> {
    let stratum = d_vector(alg, ell, basis)?;
    let n = alg.dim();
    let vs = &basis.vectors;
    let mut cur = ell.clone();
    let mut element = Vector::zero(n);
    for &i in &stratum.i_set {
        let target = vs[i].dot(&cur);
        if target.is_zero() {
            continue;
        }
        let m = form_in_basis(alg, &cur, vs);
        // columns b < i must vanish on the acting direction
        let cols: Mat = (0..i).map(|b| (0..n).map(|a| m[a][b].clone()).collect()).collect();
        let candidates = if cols.is_empty() { linalg::identity(n) } else { linalg::kernel(&cols, n) };
        let coeffs = candidates
            .into_iter()
            .find(|c| !column_pair(c, &m, i).is_zero())
            .ok_or_else(|| {
                Error::Numerical(format!("cross-section solve failed at index {}: inconsistent d-vector", i + 1))
            })?;
        let x = coeffs.iter().zip(vs).fold(Vector::zero(n), |acc, (c, v)| &acc + &v.scale(c));
        let t = &target / &column_pair(&coeffs, &m, i);
        let step = x.scale(&t);
        cur = coadjoint_act(alg, &step, &cur)?;
        element = group::bch(alg, &step, &element)?;
        debug_assert!(vs[i].dot(&cur).is_zero());
    }
    Ok(CrossSection { representative: cur, element, stratum })
}

/// `ℓ([X, v_i])` for `X = Σ c_a v_a`, read off the basis form.
fn column_pair(c: &[Q], m: &Mat, i: usize) -> Q {
    c.iter().zip(m).fold(Q::zero(), |acc, (ca, row)| acc + ca * &row[i])
}

/// Pfaffian of an even-dimensional skew-symmetric matrix by expansion along
/// the first row.
pub fn pfaffian_of(m: &Mat) -> Result<Q> {
    let n = m.len();
    if n % 2 == 1 {
        return Err(Error::precondition("even_dimension", format!("{n}x{n} matrix has no Pfaffian")));
    }
    fn go(m: &Mat, idx: &[usize]) -> Q {
        if idx.is_empty() {
            return Q::one();
        }
        let first = idx[0];
        let mut acc = Q::zero();
        for (pos, &j) in idx.iter().enumerate().skip(1) {
            let a = &m[first][j];
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != first && k != j).collect();
            let term = a * go(m, &rest);
            if pos % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    Ok(go(m, &(0..n).collect::<Vec<_>>()))
}

/// The `2k x 2k` block `B_ℓ(v_{i_r}, v_{i_r'})` over the jump indices.
pub fn stratum_block(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis, stratum: &StratumData) -> Mat {
    let vs: Vec<Vector> = stratum.i_set.iter().map(|&i| basis.vectors[i].clone()).collect();
    form_in_basis(alg, ell, &vs)
}

/// Relative Pfaffian of `ℓ` on the given stratum.
pub fn pfaffian(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis, stratum: &StratumData) -> Result<Q> {
    check_dim(alg, ell)?;
    if stratum.i_set.len() % 2 == 1 {
        return Err(Error::precondition("even_jump_set", "|I| is odd"));
    }
    pfaffian_of(&stratum_block(alg, ell, basis, stratum))
}

/// Draws `samples` group elements and fails if some polynomial changes value
/// along the orbit of `ell`.
pub fn check_orbit_invariance<R: Rng + ?Sized>(
    alg: &LieAlgebra,
    ell: &Vector,
    polys: &[PolynomialOnDual],
    rng: &mut R,
    samples: usize,
) -> Result<()> {
    let base: Vec<Q> = polys.iter().map(|p| p.eval(&ell.0)).collect::<Result<_>>()?;
    for _ in 0..samples {
        let g = alg.random_element(rng, 5, 3);
        let moved = coadjoint_act(alg, &g, ell)?;
        for (j, (p, b)) in polys.iter().zip(&base).enumerate() {
            if &p.eval(&moved.0)? != b {
                return Err(Error::precondition(
                    "orbit_invariance",
                    format!("polynomial {j} is not constant on the orbit"),
                ));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitNorm {
    #[serde(serialize_with = "crate::report::ser_q")]
    pub exact: Q,
    pub value: f64,
}

/// `max_j |P_j(ℓ)|` at the real place, after checking invariance by sampling.
pub fn orbit_norm<R: Rng + ?Sized>(
    alg: &LieAlgebra,
    ell: &Vector,
    invariants: &[PolynomialOnDual],
    rng: &mut R,
) -> Result<OrbitNorm> {
    check_orbit_invariance(alg, ell, invariants, rng, 20)?;
    let exact = invariants
        .iter()
        .map(|p| p.eval(&ell.0).map(|v| num_traits::Signed::abs(&v)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or_else(Q::zero);
    Ok(OrbitNorm { value: rational::to_f64(&exact), exact })
}

/// `|Pf(ℓ)|_p^{-1} = p^{v_p(Pf ℓ)}`, the multiplicity bound at a good prime.
pub fn multiplicity_bound(alg: &LieAlgebra, ell: &Vector, basis: &MalcevBasis, p: u64) -> Result<Q> {
    let stratum = d_vector(alg, ell, basis)?;
    let pf = pfaffian(alg, ell, basis, &stratum)?;
    let v = rational::valuation(&pf, p)
        .ok_or_else(|| Error::precondition("nonzero_pfaffian", "Pf(ℓ) = 0"))?;
    Ok(rational::pow_i(&rational::q(p as i64), v))
}

/// Samples `samples` rational points (coordinates zeroed at random so that
/// lower strata are hit) and tallies the d-vectors found, ordered
/// lexicographically. Sample `i` uses ChaCha stream `i` of `seed`, so the
/// result does not depend on the worker count.
pub fn discover_strata(
    alg: &LieAlgebra,
    basis: &MalcevBasis,
    samples: usize,
    seed: u64,
) -> Result<BTreeMap<Vec<usize>, usize>> {
    let found: Vec<Vec<usize>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let ell = Vector(
                (0..alg.dim())
                    .map(|_| if rng.gen_bool(0.5) { Q::zero() } else { rational::random_q(&mut rng, 9, 4) })
                    .collect(),
            );
            d_vector(alg, &ell, basis).map(|s| s.d)
        })
        .collect::<Result<_>>()?;
    let mut tally = BTreeMap::new();
    for d in found {
        *tally.entry(d).or_insert(0) += 1;
    }
    Ok(tally)
}

/// Everything the orbit report needs about one point.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitAnalysis {
    pub stratum: StratumData,
    pub radical: Subalgebra,
    pub orbit_dim: usize,
    pub pfaffian: Q,
    pub representative: Vector,
    pub element: Vector,
    pub polarization: Subalgebra,
}

pub fn analyze(alg: &LieAlgebra, ell: &Vector) -> Result<OrbitAnalysis> {
    let basis = alg.strong_malcev_basis();
    let cs = cross_section(alg, ell, &basis)?;
    let pfaffian = pfaffian(alg, ell, &basis, &cs.stratum)?;
    Ok(OrbitAnalysis {
        radical: radical(alg, ell)?,
        orbit_dim: orbit_dim(alg, ell)?,
        pfaffian,
        polarization: vergne_polarization(alg, ell, &basis)?,
        stratum: cs.stratum,
        representative: cs.representative,
        element: cs.element,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    #[test]
    fn heisenberg_action_closed_form() {
        let g = LieAlgebra::heisenberg();
        let t = qf(3, 2);
        let x = g.basis_vector(2).scale(&t);
        let ell = v(&[4, 1, -2]);
        // (c, a, b) -> (c, a - t c, b)
        assert_eq!(coadjoint_act(&g, &x, &ell).unwrap(), Vector(vec![q(4), q(1) - &t * q(4), q(-2)]));
        let central = g.basis_vector(0).scale(&q(7));
        assert_eq!(coadjoint_act(&g, &central, &ell).unwrap(), ell);
    }

    #[test]
    fn heisenberg_forms_and_strata() {
        let g = LieAlgebra::heisenberg();
        let basis = g.strong_malcev_basis();
        let ell = v(&[5, 1, 2]);
        assert_eq!(orbit_dim(&g, &ell).unwrap(), 2);
        assert_eq!(radical(&g, &ell).unwrap().generators(), vec![v(&[1, 0, 0])]);
        let s = d_vector(&g, &ell, &basis).unwrap();
        assert_eq!(s.d, vec![0, 1, 2]);
        assert_eq!(StratumData::one_based(&s.i_set), vec![2, 3]);
        assert_eq!(StratumData::one_based(&s.j_set), vec![1]);
        assert_eq!(orbit_representative(&g, &ell, &basis).unwrap(), v(&[5, 0, 0]));
        // B(Y, X) = ℓ([Y, X]) = -c
        assert_eq!(pfaffian(&g, &ell, &basis, &s).unwrap(), q(-5));
        let pol = vergne_polarization(&g, &ell, &basis).unwrap();
        assert_eq!(pol.space(), &Subspace::span(3, [v(&[1, 0, 0]).0, v(&[0, 1, 0]).0]));

        let flat = v(&[0, 3, -1]);
        assert_eq!(orbit_dim(&g, &flat).unwrap(), 0);
        assert_eq!(radical(&g, &flat).unwrap().dim(), 3);
        assert_eq!(d_vector(&g, &flat, &basis).unwrap().d, vec![0, 0, 0]);
        let s0 = d_vector(&g, &flat, &basis).unwrap();
        assert_eq!(pfaffian(&g, &flat, &basis, &s0).unwrap(), q(1));
        assert_eq!(vergne_polarization(&g, &flat, &basis).unwrap().dim(), 3);
        assert_eq!(orbit_representative(&g, &flat, &basis).unwrap(), flat);
    }

    #[test]
    fn k4_generic_orbit() {
        let g = LieAlgebra::k4();
        let basis = g.strong_malcev_basis();
        let ell = v(&[2, 3, -1, 4]);
        assert_eq!(orbit_dim(&g, &ell).unwrap(), 2);
        let s = d_vector(&g, &ell, &basis).unwrap();
        assert_eq!(s.d, vec![0, 1, 1, 2]);
        let pol = vergne_polarization(&g, &ell, &basis).unwrap();
        assert_eq!(pol.dim(), 3);
        assert!(is_isotropic(&g, &ell, &pol));
        let rep = orbit_representative(&g, &ell, &basis).unwrap();
        assert!(rep.0[1].is_zero() && rep.0[3].is_zero());
        // a2^2 - 2 a1 a3 is preserved: 9 + 4 = 13 = -2 * 2 * a3'
        assert_eq!(rep.0[2], qf(-13, 4));
    }

    #[test]
    fn weak_basis_rejected() {
        let g = LieAlgebra::heisenberg();
        let mut basis = g.strong_malcev_basis();
        basis.kind = MalcevKind::Weak;
        assert!(matches!(
            vergne_polarization(&g, &v(&[1, 0, 0]), &basis),
            Err(Error::Precondition { invariant: "strong_basis", .. })
        ));
    }

    #[test]
    fn pfaffian_expansion() {
        // Pf of the 4x4 skew matrix with a12 a34 - a13 a24 + a14 a23
        let a = |i: i64| q(i);
        let m = vec![
            vec![a(0), a(1), a(2), a(3)],
            vec![a(-1), a(0), a(4), a(5)],
            vec![a(-2), a(-4), a(0), a(6)],
            vec![a(-3), a(-5), a(-6), a(0)],
        ];
        assert_eq!(pfaffian_of(&m).unwrap(), q(6 - 10 + 12));
        assert_eq!(pfaffian_of(&m).unwrap().pow(2), linalg::det(&m));
        assert!(pfaffian_of(&linalg::zeros(3, 3)).is_err());
    }

    #[test]
    fn multiplicity_bounds() {
        let g = LieAlgebra::heisenberg();
        let basis = g.strong_malcev_basis();
        assert_eq!(multiplicity_bound(&g, &v(&[125, 1, 1]), &basis, 5).unwrap(), q(125));
        assert_eq!(multiplicity_bound(&g, &v(&[7, 1, 1]), &basis, 5).unwrap(), q(1));
        let inv_p = Vector(vec![qf(1, 5), q(0), q(0)]);
        assert_eq!(multiplicity_bound(&g, &inv_p, &basis, 5).unwrap(), qf(1, 5));
        assert_eq!(multiplicity_bound(&g, &v(&[0, 1, 1]), &basis, 5).unwrap(), q(1));
    }

    #[test]
    fn norm_and_invariance_check() {
        let g = LieAlgebra::heisenberg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lz = PolynomialOnDual::coordinate(3, 0);
        let n = orbit_norm(&g, &v(&[-4, 2, 9]), &[lz.clone()], &mut rng).unwrap();
        assert_eq!(n.exact, q(4));
        assert_eq!(orbit_norm(&g, &Vector::zero(3), &[lz], &mut rng).unwrap().value, 0.0);
        let ly = PolynomialOnDual::coordinate(3, 1);
        assert!(matches!(
            orbit_norm(&g, &v(&[1, 2, 3]), &[ly], &mut rng),
            Err(Error::Precondition { invariant: "orbit_invariance", .. })
        ));
    }

    #[test]
    fn strata_discovery_is_deterministic() {
        let g = LieAlgebra::k4();
        let basis = g.strong_malcev_basis();
        let a = discover_strata(&g, &basis, 300, 42).unwrap();
        let b = discover_strata(&g, &basis, 300, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.contains_key(&vec![0, 0, 0, 0]));
        assert!(a.contains_key(&vec![0, 1, 1, 2]));
        assert_eq!(a.values().sum::<usize>(), 300);
    }
}
