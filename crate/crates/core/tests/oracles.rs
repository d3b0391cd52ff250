mod common;

use common::{brute_local_integral, character_sum_integral, s_grid};
use heightlab::counting::{self, CountConfig, RationalPoint};
use heightlab::data;
use heightlab::geometry::{twist_pole_set, CompactificationModel};
use heightlab::rational::{self, q};
use heightlab::zeta::{self, local_height_integral, twisted_unit_integral};
use heightlab::{LieAlgebra, Vector, Q};

fn models() -> Vec<CompactificationModel> {
    ["p1", "p2", "p3", "blowup_p2"].iter().map(|n| data::model(n).unwrap()).collect()
}

#[test]
fn local_integral_matches_residue_oracle() {
    for m in models() {
        for p in [5u64, 7, 11] {
            for s in s_grid(&m) {
                let sq: Vec<Q> = s.iter().map(|&x| q(x)).collect();
                let closed = local_height_integral(&m, p, &sq).unwrap().exact.unwrap();
                assert_eq!(closed, brute_local_integral(&m, p, &s, 3), "{} p={p} s={s:?}", m.name);
            }
        }
    }
}

#[test]
fn oracle_is_depth_independent() {
    let m = CompactificationModel::blowup_p2();
    for s in s_grid(&m) {
        assert_eq!(brute_local_integral(&m, 5, &s, 1), brute_local_integral(&m, 5, &s, 3));
    }
}

#[test]
fn shipped_bad_factors_match_oracle() {
    let m = data::model("blowup_p2").unwrap();
    for (&p, v) in &m.bad_factors {
        assert_eq!(*v, brute_local_integral(&m, p, &m.kappa, 4), "p = {p}");
    }
}

#[test]
fn unit_integrals_match_character_sums() {
    for p in [2u64, 3, 5, 7, 11, 13] {
        for m in 0..=4 {
            assert_eq!(twisted_unit_integral(p, m), character_sum_integral(p, m), "p={p} m={m}");
        }
    }
}

#[test]
fn shipped_twists_drop_the_pole() {
    for (model, twist) in [("p1", "p1_x"), ("p2", "p2_x"), ("p3", "p3_x"), ("blowup_p2", "blowup_x"), ("blowup_p2", "blowup_y")] {
        let m = data::model(model).unwrap();
        let f = data::twist(&m, twist).unwrap();
        let a0 = twist_pole_set(&m, &f).unwrap();
        assert!(a0.a0.len() < m.num_boundary(), "{twist}");
    }
}

#[test]
fn heisenberg_points_are_additive_points() {
    // the Heisenberg group in P^3 through its 3x3 unipotent matrices
    let alg = LieAlgebra::heisenberg();
    let rep = data::rep("h3", &alg).unwrap();
    let m = data::model("heis_p3").unwrap();
    let b = 3000;
    let pts = counting::list_points(&m, b, (b as f64).powf(0.25) as u64 + 1);
    assert_eq!(pts.len() as u64, counting::enumerate_points(&m, b).unwrap());
    let mut back = Vec::new();
    for pt in &pts {
        let w = pt.w();
        // affine coordinates (x, y, z) = upper-triangular entries
        let c: Vec<Q> = pt.0[1..].iter().map(|&v| rational::qf(v, w)).collect();
        let mut g = heightlab::linalg::identity(3);
        g[0][1] = c[0].clone();
        g[1][2] = c[1].clone();
        g[0][2] = c[2].clone();
        let x: Vector = rep.log(&g).unwrap();
        let h = rep.exp(&x);
        let den = [&h[0][1], &h[1][2], &h[0][2]]
            .iter()
            .fold(num_bigint::BigInt::from(1), |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
        let den: i64 = den.try_into().unwrap();
        let nums: Vec<i64> = [&h[0][1], &h[1][2], &h[0][2]]
            .iter()
            .map(|v| (v.numer() * (num_bigint::BigInt::from(den) / v.denom())).try_into().unwrap())
            .collect();
        back.push(RationalPoint::affine(den, &nums).unwrap());
    }
    let mut a = pts.clone();
    a.sort();
    back.sort();
    assert_eq!(a, back);
}

#[test]
fn translations_preserve_counts() {
    let p1 = data::model("p1").unwrap();
    for b in [10_000u64, 100_000, 1_000_000] {
        let n = counting::enumerate_points(&p1, b).unwrap();
        for g in [1i64, -1, 2, 3, -5] {
            let ng = counting::translated_count(&p1, &[g], b).unwrap();
            assert!(((ng as f64) / (n as f64) - 1.0).abs() < 0.05);
            assert_eq!(ng, n, "γ = {g}, B = {b}");
        }
    }
    let bl = data::model("blowup_p2").unwrap();
    let n = counting::enumerate_points(&bl, 2000).unwrap();
    for g in [[1i64, 0], [0, 1], [2, -1], [-3, 2], [1, 1]] {
        assert_eq!(counting::translated_count(&bl, &g, 2000).unwrap(), n);
    }
}

#[test]
fn counts_are_monotone() {
    for m in models() {
        let th: Vec<u64> = (0..40).map(|k| k * k * 25).collect();
        let c = counting::count_points(&m, &th, &CountConfig::default()).unwrap();
        assert!(c.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}

#[test]
fn checkpoints_resume() {
    let dir = std::env::temp_dir().join(format!("heightlab-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let m = data::model("p2").unwrap();
    let cfg = CountConfig { checkpoint_dir: Some(dir.clone()), ..CountConfig::default() };
    let th = [1000, 100_000];
    let first = counting::count_points(&m, &th, &cfg).unwrap();
    assert!(std::fs::read_dir(&dir).unwrap().count() > 0);
    let second = counting::count_points(&m, &th, &cfg).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, counting::count_points(&m, &th, &CountConfig::default()).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn twisted_products_are_cauchy() {
    for (model, twist) in [("p1", "p1_x"), ("p2", "p2_x"), ("blowup_p2", "blowup_x"), ("blowup_p2", "blowup_y")] {
        let m = data::model(model).unwrap();
        let f = data::twist(&m, twist).unwrap();
        let r = twist_pole_set(&m, &f).unwrap().a0.len();
        let pp = zeta::partial_products(&m, Some(&f), r, &[1000, 20_000]).unwrap();
        assert!((pp[0].value - pp[1].value).abs() < 1e-3, "{twist}: {pp:?}");
    }
}
