mod common;

use heightlab::coadjoint::{self, b_form, coadjoint_act, d_vector, orbit_representative};
use heightlab::data;
use heightlab::enveloping::{normal_order, RewriteStrategy};
use heightlab::geometry::{abc_invariants, DivisorClass};
use heightlab::group::{self, bch, mat_exp, mat_log};
use heightlab::linalg;
use heightlab::rational::{self, q, qf};
use heightlab::zeta;
use heightlab::{LieAlgebra, Vector, Q};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn shipped() -> Vec<(String, LieAlgebra)> {
    data::list(data::Kind::Algebras).unwrap().into_iter().map(|n| (n.clone(), data::algebra(&n).unwrap())).collect()
}

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| qf(n, d))
}

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(rational(), n).prop_map(Vector)
}

fn int_vector(n: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-5i64..=5, n).prop_map(|v| Vector::from_ints(&v))
}

/// An algebra index together with vectors of its dimension.
fn with_vectors(k: usize) -> impl Strategy<Value = (usize, Vec<Vector>)> {
    let dims: Vec<usize> = shipped().iter().map(|(_, a)| a.dim()).collect();
    (0..dims.len()).prop_flat_map(move |i| (Just(i), proptest::collection::vec(vector(dims[i]), k)))
}

fn alg(i: usize) -> (String, LieAlgebra) {
    shipped().swap_remove(i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bch_is_associative((i, v) in with_vectors(3)) {
        let (_, a) = alg(i);
        let l = bch(&a, &bch(&a, &v[0], &v[1]).unwrap(), &v[2]).unwrap();
        let r = bch(&a, &v[0], &bch(&a, &v[1], &v[2]).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn bch_matches_matrix_logarithm((i, v) in with_vectors(2)) {
        let (name, a) = alg(i);
        let rep = data::rep(&name, &a).unwrap();
        let oracle = rep.log(&linalg::mat_mul(&rep.exp(&v[0]), &rep.exp(&v[1]))).unwrap();
        prop_assert_eq!(bch(&a, &v[0], &v[1]).unwrap(), oracle);
        prop_assert_eq!(group::bch_lyndon(&a, &v[0], &v[1]).unwrap(), bch(&a, &v[0], &v[1]).unwrap());
    }

    #[test]
    fn log_of_inverse_is_negative((i, v) in with_vectors(1)) {
        let (name, a) = alg(i);
        let rep = data::rep(&name, &a).unwrap();
        let m = rep.image(&v[0]);
        let g = mat_exp(&m).unwrap();
        let inv = linalg::inverse(&g).unwrap();
        prop_assert_eq!(mat_log(&inv).unwrap(), linalg::mat_scale(&m, &-Q::one()));
        prop_assert_eq!(mat_log(&g).unwrap(), m);
    }

    #[test]
    fn universal_lattice_is_closed((i, v) in (0..shipped().len()).prop_flat_map(|i| {
        let n = shipped()[i].1.dim();
        (Just(i), proptest::collection::vec(int_vector(n), 2))
    })) {
        let (_, a) = alg(i);
        let s = q(group::universal_scalar(&a).unwrap() as i64);
        let x = v[0].scale(&s);
        let y = v[1].scale(&s);
        let z = bch(&a, &x, &y).unwrap();
        prop_assert!(z.0.iter().all(|c| rational::is_integer(&(c / &s))));
    }

    #[test]
    fn b_form_rank_is_even((i, v) in with_vectors(1)) {
        let (_, a) = alg(i);
        let f = b_form(&a, &v[0]).unwrap();
        prop_assert!(f.is_antisymmetric());
        prop_assert_eq!(f.rank() % 2, 0);
    }

    #[test]
    fn pfaffian_squares_to_determinant((i, v) in with_vectors(2)) {
        let (_, a) = alg(i);
        let basis = a.strong_malcev_basis();
        let st = d_vector(&a, &v[0], &basis).unwrap();
        let pf = coadjoint::pfaffian(&a, &v[0], &basis, &st).unwrap();
        let block = coadjoint::stratum_block(&a, &v[0], &basis, &st);
        prop_assert_eq!(&pf * &pf, linalg::det(&block));
        let moved = coadjoint_act(&a, &v[1], &v[0]).unwrap();
        prop_assert_eq!(coadjoint::pfaffian(&a, &moved, &basis, &st).unwrap(), pf);
    }

    #[test]
    fn polarization_certificate((i, v) in with_vectors(1)) {
        let (_, a) = alg(i);
        let basis = a.strong_malcev_basis();
        let m = coadjoint::vergne_polarization(&a, &v[0], &basis).unwrap();
        prop_assert!(coadjoint::is_isotropic(&a, &v[0], &m));
        prop_assert_eq!(m.dim(), coadjoint::polarization_dim(&a, &v[0]).unwrap());
        // closed under the bracket
        for x in m.generators() {
            for y in m.generators() {
                prop_assert!(m.contains(&a.bracket(&x, &y).unwrap()));
            }
        }
    }

    #[test]
    fn d_vector_and_representative_are_orbit_invariants((i, v) in with_vectors(2)) {
        let (_, a) = alg(i);
        let basis = a.strong_malcev_basis();
        let moved = coadjoint_act(&a, &v[1], &v[0]).unwrap();
        prop_assert_eq!(d_vector(&a, &v[0], &basis).unwrap(), d_vector(&a, &moved, &basis).unwrap());
        let rep = orbit_representative(&a, &v[0], &basis).unwrap();
        prop_assert_eq!(orbit_representative(&a, &moved, &basis).unwrap(), rep.clone());
        prop_assert_eq!(orbit_representative(&a, &rep, &basis).unwrap(), rep);
    }

    #[test]
    fn cross_section_element_reaches_representative((i, v) in with_vectors(1)) {
        let (_, a) = alg(i);
        let basis = a.strong_malcev_basis();
        let cs = coadjoint::cross_section(&a, &v[0], &basis).unwrap();
        prop_assert_eq!(coadjoint_act(&a, &cs.element, &v[0]).unwrap(), cs.representative);
    }

    #[test]
    fn malcev_prefixes_are_ideals((i, v) in with_vectors(2)) {
        let (_, a) = alg(i);
        let basis = a.strong_malcev_basis();
        for k in 1..=a.dim() {
            let prefix = basis.prefix_space(k);
            // project v[1] into the prefix through its coordinates
            let y = basis.vectors[..k].iter().zip(&v[1].0).fold(Vector::zero(a.dim()), |acc, (b, c)| &acc + &b.scale(c));
            prop_assert!(prefix.contains(&a.bracket(&v[0], &y).unwrap().0));
        }
    }

    #[test]
    fn central_series_members_are_ideals((i, v) in with_vectors(2)) {
        let (_, a) = alg(i);
        let series = a.ascending_central_series().unwrap();
        for w in series.windows(2) {
            let gens = w[1].generators();
            let y = gens.iter().zip(&v[1].0).fold(Vector::zero(a.dim()), |acc, (b, c)| &acc + &b.scale(c));
            // [g, z_{k+1}] ⊆ z_k
            prop_assert!(w[0].contains(&a.bracket(&v[0], &y).unwrap()));
        }
    }

    #[test]
    fn pbw_is_confluent(i in 0..shipped().len(), word in proptest::collection::vec(0usize..16, 2..6)) {
        let (_, a) = alg(i);
        let word: Vec<usize> = word.into_iter().map(|l| l % a.dim()).collect();
        prop_assert_eq!(
            normal_order(&a, &word, RewriteStrategy::Leftmost),
            normal_order(&a, &word, RewriteStrategy::Rightmost)
        );
    }

    #[test]
    fn abc_scales(num in 1i64..20, den in 1i64..20, l in proptest::collection::vec(1i64..6, 2)) {
        let m = data::model("blowup_p2").unwrap();
        let class = DivisorClass::from_ints(&l);
        let base = abc_invariants(&m, &class).unwrap();
        let t = qf(num, den);
        let scaled = abc_invariants(&m, &class.scale(&t)).unwrap();
        prop_assert_eq!(&scaled.a, &(&base.a / &t));
        prop_assert_eq!(scaled.b, base.b);
        prop_assert_eq!(&scaled.c_set, &base.c_set);
        prop_assert!(base.b >= 1);
        let proportional = m.kappa[0] * l[1] == m.kappa[1] * l[0];
        prop_assert_eq!(base.b == m.num_boundary(), proportional);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn symmetrization_is_equivariant(
        i in 0..shipped().len(),
        coeffs in proptest::collection::vec(rational(), 6),
        idx in proptest::collection::vec(0usize..16, 6),
        g in proptest::collection::vec(rational(), 6),
    ) {
        use heightlab::enveloping::{symmetrize, transport};
        use heightlab::poly::PolynomialOnDual;
        let (_, a) = alg(i);
        let n = a.dim();
        let x = Vector(g[..n].to_vec());
        let mut p = PolynomialOnDual::zero(n);
        for k in 0..3 {
            let c = PolynomialOnDual::constant(n, coeffs[k].clone());
            let lin = &c * &PolynomialOnDual::coordinate(n, idx[2 * k] % n);
            p = &p + &lin;
            let quad = &lin * &PolynomialOnDual::coordinate(n, idx[2 * k + 1] % n);
            p = &p + &quad;
        }
        let lhs = symmetrize(&a, &p.compose_linear(&coadjoint::coadjoint_matrix(&a, &x))).unwrap();
        let rhs = transport(&a, &symmetrize(&a, &p).unwrap(), &coadjoint::ad_exp(&a, &x.scale(&-Q::one())));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn kirillov_centralizer_has_codimension_one() {
    for (name, a) in shipped().into_iter().filter(|(_, a)| !a.is_abelian()) {
        let k = a.kirillov_quadruple().unwrap();
        let c = a.centralizer(&linalg::Subspace::span(a.dim(), [k.y.0.clone()])).unwrap();
        assert_eq!(c.dim(), a.dim() - 1, "{name}");
        assert_eq!(a.bracket(&k.x, &k.y).unwrap(), k.z, "{name}");
    }
}

#[test]
fn heisenberg_invariant_separates_orbits() {
    let a = data::algebra("h3").unwrap();
    let basis = a.strong_malcev_basis();
    let inv = &data::invariants("h3").unwrap().polys[0];
    let mut rng = common::rng(7);
    for _ in 0..100 {
        let l1 = a.random_element(&mut rng, 9, 4);
        let l2 = a.random_element(&mut rng, 9, 4);
        let (v1, v2) = (inv.eval(&l1.0).unwrap(), inv.eval(&l2.0).unwrap());
        if v1 != v2 {
            assert_ne!(orbit_representative(&a, &l1, &basis).unwrap(), orbit_representative(&a, &l2, &basis).unwrap());
        }
    }
}

#[test]
fn regularized_factors_are_one_plus_o_p_minus_two() {
    for name in ["p1", "p2", "p3", "blowup_p2"] {
        let m = data::model(name).unwrap();
        let e = zeta::euler_leading_constant(&m, 10_000).unwrap();
        assert!(e.fitted_c > 0.0 && e.fitted_c < 10.0, "{name}: C = {}", e.fitted_c);
    }
}

#[test]
fn unit_volume_at_large_s() {
    for name in ["p1", "p2", "p3", "blowup_p2"] {
        let m = data::model(name).unwrap();
        let s: Vec<Q> = m.kappa.iter().map(|&k| q(k + 50)).collect();
        for p in heightlab::primes::primes_up_to(200).into_iter().filter(|&p| !m.is_bad(p)) {
            let v = zeta::local_height_integral(&m, p, &s).unwrap().exact.unwrap();
            let dev = (v - Q::one()).abs();
            assert!(!dev.is_zero() && rational::to_f64(&dev) < (p as f64).powi(-45), "{name} p={p}");
        }
    }
}
