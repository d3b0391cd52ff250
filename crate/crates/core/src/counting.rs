//! Rational points of bounded anticanonical height on the shipped models,
//! and asymptotic fits of the counts.

use std::fs;
use std::path::PathBuf;

use num_integer::{Integer, Roots};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CompactificationModel, HeightKind};

/// `(w : x_1 : ... : x_n)` with `w > 0` and coprime coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalPoint(pub Vec<i64>);

impl RationalPoint {
    /// Normalizes an arbitrary nonzero tuple with `w ≠ 0`.
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        let Some(&w) = coords.first() else {
            return Err(Error::invalid("point", "empty coordinate tuple"));
        };
        if w == 0 {
            return Err(Error::precondition("point_in_group", "w = 0 is a boundary point"));
        }
        let g = coords.iter().fold(0i64, |acc, &c| acc.gcd(&c));
        let sign = w.signum();
        Ok(RationalPoint(coords.iter().map(|c| sign * c / g).collect()))
    }

    /// Affine point `x ∈ Q^n`, written over the common denominator `w`.
    pub fn affine(w: i64, numerators: &[i64]) -> Result<Self> {
        let mut c = vec![w];
        c.extend_from_slice(numerators);
        Self::new(c)
    }

    pub fn is_primitive(&self) -> bool {
        self.0.first().is_some_and(|&w| w > 0) && self.0.iter().fold(0i64, |acc, &c| acc.gcd(&c)) == 1
    }

    pub fn w(&self) -> i64 {
        self.0[0]
    }
}

fn check_point(m: &CompactificationModel, pt: &RationalPoint) -> Result<()> {
    if pt.0.len() != m.dim + 1 {
        return Err(Error::DimensionMismatch { expected: m.dim + 1, got: pt.0.len() });
    }
    if pt.0[0] == 0 {
        return Err(Error::precondition("point_in_group", "w = 0 is a boundary point"));
    }
    if !pt.is_primitive() {
        return Err(Error::invalid("primitive", format!("{:?} is not a primitive tuple with w > 0", pt.0)));
    }
    Ok(())
}

fn raw_height(kind: HeightKind, n: usize, c: &[i64]) -> u128 {
    let top = c.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as u128;
    match kind {
        HeightKind::Projective => top.pow(n as u32 + 1),
        HeightKind::BlowupP2 => {
            let m = c[0].unsigned_abs().max(c[1].unsigned_abs()) as u128;
            let g = c[0].unsigned_abs().gcd(&c[1].unsigned_abs()) as u128;
            top * top * m / g
        }
    }
}

/// Anticanonical height of a point of `G(Q)`.
pub fn height(m: &CompactificationModel, pt: &RationalPoint) -> Result<u128> {
    check_point(m, pt)?;
    Ok(raw_height(m.height, m.dim, &pt.0))
}

/// Left translation by `γ ∈ G(Z) = Z^n`: `x ↦ x + γ`.
pub fn translate(pt: &RationalPoint, gamma: &[i64]) -> RationalPoint {
    let w = pt.w();
    let mut c = pt.0.clone();
    for (x, g) in c[1..].iter_mut().zip(gamma) {
        *x += g * w;
    }
    RationalPoint::new(c).expect("w is unchanged")
}

/// `⌊B^{1/k}⌋`.
fn iroot(b: u64, k: u32) -> u64 {
    b.nth_root(k)
}

#[derive(Clone, Debug)]
pub struct CountConfig {
    /// Refuse enumerations whose box holds more tuples than this.
    pub budget: u128,
    pub partitions: usize,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig { budget: 20_000_000_000, partitions: 64, checkpoint_dir: None }
    }
}

/// Number of tuples the enumeration of `B` will touch.
pub fn enumeration_cost(m: &CompactificationModel, b: u64) -> u128 {
    match m.height {
        HeightKind::Projective => {
            let t = iroot(b, m.dim as u32 + 1) as u128;
            t * (2 * t + 1).pow(m.dim as u32)
        }
        HeightKind::BlowupP2 => {
            let r = b.sqrt() as u128;
            let bf = b as f64;
            r * (2 * r + 1) + (8.0 / 3.0 * bf.powf(0.75)) as u128
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    model: String,
    max_b: u64,
    partition: usize,
    thresholds: Vec<u64>,
    counts: Vec<u64>,
}

/// Exact `N(B)` for every threshold, from one enumeration at the largest.
/// Work is split into interleaved partitions of the `w` range; partition
/// counts are integer vectors summed in partition order, so the result does
/// not depend on the worker count.
pub fn count_points(m: &CompactificationModel, thresholds: &[u64], cfg: &CountConfig) -> Result<Vec<(u64, u64)>> {
    let mut sorted = thresholds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&max_b) = sorted.last() else {
        return Ok(Vec::new());
    };
    if max_b == 0 {
        return Ok(vec![(0, 0)]);
    }
    let cost = enumeration_cost(m, max_b);
    if cost > cfg.budget {
        return Err(Error::Budget(format!(
            "B = {max_b} needs about {cost} tuples, budget is {}",
            cfg.budget
        )));
    }
    let parts = cfg.partitions.max(1);
    let w_max = match m.height {
        HeightKind::Projective => iroot(max_b, m.dim as u32 + 1),
        HeightKind::BlowupP2 => max_b.sqrt(),
    };
    let per_part: Vec<Vec<u64>> = (0..parts)
        .into_par_iter()
        .map(|k| {
            if let Some(c) = load_checkpoint(cfg, m, max_b, k, &sorted) {
                return Ok(c);
            }
            let ws = (1 + k as u64..=w_max).step_by(parts);
            let counts = match m.height {
                HeightKind::Projective => projective_partition(m.dim, ws, &sorted),
                HeightKind::BlowupP2 => blowup_partition(ws, &sorted),
            };
            store_checkpoint(cfg, m, max_b, k, &sorted, &counts)?;
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let mut buckets = vec![0u64; sorted.len()];
    for counts in per_part {
        for (b, c) in buckets.iter_mut().zip(counts) {
            *b += c;
        }
    }
    let mut acc = 0;
    let cumulative: Vec<u64> = buckets
        .into_iter()
        .map(|c| {
            acc += c;
            acc
        })
        .collect();
    Ok(thresholds
        .iter()
        .map(|b| (*b, if *b == 0 { 0 } else { cumulative[sorted.binary_search(b).expect("present")] }))
        .collect())
}

fn checkpoint_path(cfg: &CountConfig, m: &CompactificationModel, max_b: u64, k: usize) -> Option<PathBuf> {
    let safe: String = m.name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    cfg.checkpoint_dir.as_ref().map(|d| d.join(format!("{safe}_{max_b}_{k}.json")))
}

fn load_checkpoint(cfg: &CountConfig, m: &CompactificationModel, max_b: u64, k: usize, th: &[u64]) -> Option<Vec<u64>> {
    let text = fs::read_to_string(checkpoint_path(cfg, m, max_b, k)?).ok()?;
    let c: Checkpoint = serde_json::from_str(&text).ok()?;
    (c.model == m.name && c.max_b == max_b && c.partition == k && c.thresholds == th).then_some(c.counts)
}

fn store_checkpoint(
    cfg: &CountConfig,
    m: &CompactificationModel,
    max_b: u64,
    k: usize,
    th: &[u64],
    counts: &[u64],
) -> Result<()> {
    let Some(path) = checkpoint_path(cfg, m, max_b, k) else {
        return Ok(());
    };
    let c = Checkpoint { model: m.name.clone(), max_b, partition: k, thresholds: th.to_vec(), counts: counts.to_vec() };
    fs::write(path, serde_json::to_string(&c)?)?;
    Ok(())
}

/// Counts by threshold bucket: `out[i]` = points with `B_{i-1} < H ≤ B_i`.
fn projective_partition(n: usize, ws: impl Iterator<Item = u64>, th: &[u64]) -> Vec<u64> {
    let max_b = *th.last().expect("nonempty");
    let t = iroot(max_b, n as u32 + 1);
    // radius at which each bucket starts
    let radii: Vec<u64> = th.iter().map(|&b| iroot(b, n as u32 + 1)).collect();
    let mut hist = vec![0u64; t as usize + 1];
    let mut coords = vec![0i64; n];
    for w in ws {
        coords.iter_mut().for_each(|c| *c = -(t as i64));
        loop {
            let g = coords.iter().fold(w, |acc, &c| acc.gcd(&c.unsigned_abs()));
            if g == 1 {
                let top = coords.iter().fold(w, |acc, &c| acc.max(c.unsigned_abs()));
                hist[top as usize] += 1;
            }
            // odometer over [-t, t]^n
            let mut i = 0;
            while i < n {
                coords[i] += 1;
                if coords[i] <= t as i64 {
                    break;
                }
                coords[i] = -(t as i64);
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    let mut out = vec![0u64; th.len()];
    for (r, c) in hist.into_iter().enumerate() {
        if c > 0 {
            let bucket = radii.partition_point(|&rad| rad < r as u64);
            out[bucket] += c;
        }
    }
    out
}

fn blowup_partition(ws: impl Iterator<Item = u64>, th: &[u64]) -> Vec<u64> {
    let max_b = *th.last().expect("nonempty") as u128;
    let r = (max_b as u64).sqrt() as i64;
    let mut out = vec![0u64; th.len()];
    for w in ws {
        for x in -r..=r {
            let m = w.max(x.unsigned_abs()) as u128;
            if m * m > max_b {
                continue;
            }
            let g = w.gcd(&x.unsigned_abs()) as u128;
            let y_max = ((max_b * g / m) as u64).sqrt() as u128;
            if y_max < m {
                continue;
            }
            for y in -(y_max as i64)..=(y_max as i64) {
                let ay = y.unsigned_abs() as u128;
                if (g as u64).gcd(&(ay as u64)) != 1 {
                    continue;
                }
                let top = m.max(ay);
                let h = top * top * m / g;
                if h <= max_b {
                    out[th.partition_point(|&b| (b as u128) < h)] += 1;
                }
            }
        }
    }
    out
}

/// `N(B)` for a single bound.
pub fn enumerate_points(m: &CompactificationModel, b: u64) -> Result<u64> {
    Ok(count_points(m, &[b], &CountConfig::default())?[0].1)
}

/// Largest coordinate of a primitive tuple of height at most `b`.
pub fn box_radius(m: &CompactificationModel, b: u64) -> u64 {
    match m.height {
        HeightKind::Projective => iroot(b, m.dim as u32 + 1),
        HeightKind::BlowupP2 => b.sqrt(),
    }
}

/// Explicit list of points of height at most `b`, found by a plain sweep of
/// the box `max |coord| ≤ radius`. Used for small cross-checks.
pub fn list_points(m: &CompactificationModel, b: u64, radius: u64) -> Vec<RationalPoint> {
    let n = m.dim;
    let r = radius as i64;
    let mut out = Vec::new();
    let mut coords = vec![-r; n];
    for w in 1..=r {
        coords.iter_mut().for_each(|c| *c = -r);
        loop {
            let mut full = vec![w];
            full.extend_from_slice(&coords);
            if full.iter().fold(0i64, |acc, &c| acc.gcd(&c)) == 1 && raw_height(m.height, n, &full) <= b as u128 {
                out.push(RationalPoint(full));
            }
            let mut i = 0;
            while i < n {
                coords[i] += 1;
                if coords[i] <= r {
                    break;
                }
                coords[i] = -r;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    out
}

/// `#{pt : H(γ · pt) ≤ B}`, enumerated over a box large enough to contain
/// `γ^{-1}` of the height ball.
pub fn translated_count(m: &CompactificationModel, gamma: &[i64], b: u64) -> Result<u64> {
    if gamma.len() != m.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, got: gamma.len() });
    }
    let shift = gamma.iter().map(|g| g.unsigned_abs()).max().unwrap_or(0) + 1;
    // |x| ≤ |x + γw| + |γ| w, and every coordinate of a point in the ball is
    // at most sqrt(B) (blow-up) or B^{1/(n+1)} (projective)
    let base = box_radius(m, b);
    let r = (base * shift) as i64;
    let n = m.dim;
    let count: u64 = (1..=r)
        .into_par_iter()
        .map(|w| {
            let mut hits = 0u64;
            let mut coords = vec![w; n + 1];
            coords[1..].iter_mut().for_each(|c| *c = -r);
            loop {
                if coords.iter().fold(0i64, |acc, &c| acc.gcd(&c)) == 1 {
                    let moved: Vec<i64> =
                        std::iter::once(w).chain(coords[1..].iter().zip(gamma).map(|(x, g)| x + g * w)).collect();
                    if raw_height(m.height, n, &moved) <= b as u128 {
                        hits += 1;
                    }
                }
                let mut i = 1;
                while i <= n {
                    coords[i] += 1;
                    if coords[i] <= r {
                        break;
                    }
                    coords[i] = -r;
                    i += 1;
                }
                if i > n {
                    break;
                }
            }
            hits
        })
        .sum();
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub n_over_prediction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub model: String,
    pub pole_order: usize,
    pub samples: Vec<Sample>,
    /// Coefficients `c_j` of `N(B)/B ≈ Σ_{j<b} c_j log(B)^j`.
    pub coefficients: Vec<f64>,
    pub fitted_leading: f64,
    /// `τ / (b - 1)!`.
    pub predicted_leading: f64,
    pub relative_deviation: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Least-squares fit of `N(B)/B` by a polynomial of degree `b - 1` in
/// `log B`, compared against `τ / (b - 1)!`.
pub fn fit_and_compare(model: &str, samples: &[(u64, u64)], b: usize, tau: f64) -> Result<CountReport> {
    if b == 0 {
        return Err(Error::precondition("pole_order", "b must be at least 1"));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(bb, _)| *bb > 1)
        .map(|&(bb, n)| ((bb as f64).ln(), n as f64 / bb as f64))
        .collect();
    if pts.len() < 3 {
        return Err(Error::precondition("sample_count", format!("need at least 3 samples, got {}", pts.len())));
    }
    let lo = samples.iter().map(|s| s.0).min().unwrap_or(0) as f64;
    let hi = samples.iter().map(|s| s.0).max().unwrap_or(0) as f64;
    if hi < 100.0 * lo {
        return Err(Error::precondition("sample_span", "samples must span at least two decades of B"));
    }
    if pts.len() < b {
        return Err(Error::Numerical(format!("{} samples cannot determine {b} coefficients", pts.len())));
    }
    let coefficients = least_squares(&pts, b)?;
    let fitted_leading = coefficients[b - 1];
    let predicted_leading = tau / factorial(b - 1);
    let samples = samples
        .iter()
        .map(|&(bb, n)| {
            let l = (bb as f64).ln();
            let pred = predicted_leading * bb as f64 * l.powi(b as i32 - 1);
            Sample { b: bb, n, n_over_prediction: if pred > 0.0 { n as f64 / pred } else { f64::NAN } }
        })
        .collect();
    Ok(CountReport {
        model: model.to_string(),
        pole_order: b,
        samples,
        coefficients,
        fitted_leading,
        predicted_leading,
        relative_deviation: (fitted_leading / predicted_leading - 1.0).abs(),
    })
}

/// Normal equations for `y ≈ Σ_{j<k} c_j x^j`, solved with partial
/// pivoting.
fn least_squares(pts: &[(f64, f64)], k: usize) -> Result<Vec<f64>> {
    let mut a = vec![vec![0.0; k + 1]; k];
    for &(x, y) in pts {
        let pow: Vec<f64> = (0..k).map(|j| x.powi(j as i32)).collect();
        for i in 0..k {
            for j in 0..k {
                a[i][j] += pow[i] * pow[j];
            }
            a[i][k] += pow[i] * y;
        }
    }
    for c in 0..k {
        let p = (c..k).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).expect("nonempty");
        if a[p][c].abs() < 1e-12 {
            return Err(Error::Numerical("ill-conditioned fit".into()));
        }
        a.swap(c, p);
        for i in 0..k {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..=k {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    Ok((0..k).map(|i| a[i][k] / a[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights() {
        let p1 = CompactificationModel::projective(1);
        assert_eq!(height(&p1, &RationalPoint(vec![2, 1])).unwrap(), 4);
        assert_eq!(height(&p1, &RationalPoint(vec![1, 0])).unwrap(), 1);
        let bl = CompactificationModel::blowup_p2();
        assert_eq!(height(&bl, &RationalPoint(vec![1, 0, 0])).unwrap(), 1);
        // M = 3, m = 2, g = 2
        assert_eq!(height(&bl, &RationalPoint(vec![2, 2, 3])).unwrap(), 9);
        assert!(matches!(height(&p1, &RationalPoint(vec![0, 1])), Err(Error::Precondition { .. })));
        assert!(matches!(height(&p1, &RationalPoint(vec![2, 4])), Err(Error::Invalid { .. })));
    }

    #[test]
    fn small_counts() {
        let p1 = CompactificationModel::projective(1);
        assert_eq!(enumerate_points(&p1, 4).unwrap(), 7);
        assert_eq!(enumerate_points(&p1, 1).unwrap(), 3);
        for m in [p1, CompactificationModel::projective(2), CompactificationModel::blowup_p2()] {
            assert_eq!(enumerate_points(&m, 0).unwrap(), 0);
        }
    }

    #[test]
    fn thresholds_agree_with_single_runs() {
        for m in [CompactificationModel::projective(2), CompactificationModel::blowup_p2()] {
            let th = [10, 100, 1000, 5000];
            let many = count_points(&m, &th, &CountConfig::default()).unwrap();
            for (b, n) in many {
                assert_eq!(n, enumerate_points(&m, b).unwrap());
                assert_eq!(n as usize, list_points(&m, b, 2 * (b as f64).sqrt() as u64 + 2).len());
            }
        }
    }

    #[test]
    fn budget_guard() {
        let cfg = CountConfig { budget: 1000, ..CountConfig::default() };
        let r = count_points(&CompactificationModel::projective(1), &[1_000_000], &cfg);
        assert!(matches!(r, Err(Error::Budget(_))));
        assert_eq!(r.unwrap_err().exit_code(), 3);
    }

    #[test]
    fn synthetic_fit() {
        let samples: Vec<(u64, u64)> = [1e6, 1e7, 1e8, 1e9]
            .iter()
            .map(|&b: &f64| (b as u64, (2.0 * b * b.ln() + 5.0 * b).round() as u64))
            .collect();
        let r = fit_and_compare("synthetic", &samples, 2, 2.0).unwrap();
        assert!((r.fitted_leading - 2.0).abs() < 1e-6, "{}", r.fitted_leading);
        assert!(fit_and_compare("x", &samples[..2], 2, 2.0).is_err());
        assert!(fit_and_compare("x", &[(100, 1), (200, 2), (300, 3)], 1, 1.0).is_err());
    }
}
