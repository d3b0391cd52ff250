//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use heightlab::geometry::{CompactificationModel, HeightKind};
use heightlab::rational::{self, q, qf};
use heightlab::Q;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `log_p H_p(s; x)` when `u_i = max(0, -v_p(x_i))`.
pub fn log_height(kind: HeightKind, s: &[i64], u: &[i64]) -> i64 {
    let top = u.iter().copied().max().unwrap_or(0);
    match kind {
        HeightKind::Projective => s[0] * top,
        HeightKind::BlowupP2 => s[0] * u[0] + s[1] * (top - u[0]),
    }
}

/// `p^e` as a rational.
fn pp(p: u64, e: i64) -> Q {
    rational::pow_i(&q(p as i64), e)
}

#[derive(Clone, Copy, Debug)]
enum Bin {
    Finite(i64),
    Tail,
}

/// Ordered partitions of `items` into nonempty blocks.
fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let n = items.len();
    // choose the first block as any nonempty subset
    for mask in 1..(1u32 << n) {
        let first: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| items[i]).collect();
        for mut tail in ordered_partitions(&rest) {
            tail.insert(0, first.clone());
            out.push(tail);
        }
    }
    out
}

/// `∫_{Q_p^n} H_p(s; x)^{-1} dx` by residue classes.
///
/// Each coordinate is sorted into `Z_p` or a shell `p^{-k} Z_p^*`. Shells up
/// to depth `k ≤ depth` get their measure by counting unit residues modulo
/// `p^depth`; deeper shells are summed exactly as geometric series over the
/// chambers of the order of the deep valuations.
pub fn brute_local_integral(m: &CompactificationModel, p: u64, s: &[i64], depth: u32) -> Q {
    let modulus = p.pow(depth);
    let units = (0..modulus).filter(|r| r % p != 0).count() as i64;
    let unit_frac = qf(units, modulus as i64);
    let mu = |k: i64| if k == 0 { Q::one() } else { pp(p, k) * &unit_frac };
    let n = m.dim;
    let d = depth as i64;
    let mut total = Q::zero();
    let choices: Vec<Bin> = (0..=d).map(Bin::Finite).chain([Bin::Tail]).collect();
    let mut idx = vec![0usize; n];
    loop {
        let bins: Vec<Bin> = idx.iter().map(|&i| choices[i]).collect();
        let tail: Vec<usize> = (0..n).filter(|&i| matches!(bins[i], Bin::Tail)).collect();
        let finite_weight: Q = bins
            .iter()
            .map(|b| match b {
                Bin::Finite(k) => mu(*k),
                Bin::Tail => Q::one(),
            })
            .product();
        if tail.is_empty() {
            let u: Vec<i64> = bins.iter().map(|b| if let Bin::Finite(k) = b { *k } else { 0 }).collect();
            total += finite_weight * pp(p, -log_height(m.height, s, &u));
        } else {
            for blocks in ordered_partitions(&tail) {
                // exponent of p in ∏_{tail} p^{u_i} · H^{-1} for gaps g
                let f = |g: &[i64]| -> i64 {
                    let mut u: Vec<i64> = bins.iter().map(|b| if let Bin::Finite(k) = b { *k } else { 0 }).collect();
                    let mut level = d;
                    for (block, gap) in blocks.iter().zip(g) {
                        level += gap;
                        for &i in block {
                            u[i] = level;
                        }
                    }
                    tail.iter().map(|&i| u[i]).sum::<i64>() - log_height(m.height, s, &u)
                };
                let base = vec![1i64; blocks.len()];
                let f0 = f(&base);
                let mut term = pp(p, f0);
                for j in 0..blocks.len() {
                    let mut g = base.clone();
                    g[j] += 1;
                    let a = f(&g) - f0;
                    assert!(a < 0, "divergent chamber");
                    term = term / (Q::one() - pp(p, a));
                }
                total += &finite_weight * term * rational::pow_i(&unit_frac, tail.len() as i64);
            }
        }
        let mut i = 0;
        while i < n {
            idx[i] += 1;
            if idx[i] < choices.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    total
}

/// `p^{-m} Σ_{u ∈ (Z/p^m)^*} exp(2πi u / p^m)`, computed in `Z[x]/Φ_{p^m}`.
/// `m = 0` is the measure of `Z_p^*`.
pub fn character_sum_integral(p: u64, m: u32) -> Q {
    if m == 0 {
        return qf((1..p).count() as i64, p as i64);
    }
    let n = p.pow(m) as usize;
    let step = p.pow(m - 1) as usize;
    let mut coeffs = vec![0i64; n];
    for u in (0..n).filter(|u| *u as u64 % p != 0) {
        coeffs[u] += 1;
    }
    // x^{(p-1) step} ≡ -Σ_{j<p-1} x^{j step}
    let phi_deg = (p as usize - 1) * step;
    for deg in (phi_deg..n).rev() {
        let c = coeffs[deg];
        if c != 0 {
            coeffs[deg] = 0;
            let shift = deg - phi_deg;
            for j in 0..(p as usize - 1) {
                coeffs[shift + j * step] -= c;
            }
        }
    }
    assert!(coeffs[1..].iter().all(|&c| c == 0), "character sum is not rational");
    qf(coeffs[0], n as i64)
}

/// Exponent vectors `s` with `s_α ∈ {κ_α, κ_α + 1, κ_α + 2}`.
pub fn s_grid(m: &CompactificationModel) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &k in &m.kappa {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..3).map(move |j| {
                    let mut w = v.clone();
                    w.push(k + j);
                    w
                })
            })
            .collect();
    }
    out
}
