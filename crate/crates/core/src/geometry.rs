//! Boundary bookkeeping for equivariant compactifications: models as data,
//! the Picard lattice in the `D_α` basis, and the cone invariants `a`, `b`,
//! `C`, `c` of a divisor class.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, parse_q, Q};

/// Integer polynomial in one variable, ascending coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntPoly(Vec<i64>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        IntPoly(c)
    }

    /// `1 + q + ... + q^{k-1}`.
    pub fn geometric(k: usize) -> Self {
        IntPoly(vec![1; k])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, &c| acc * x + rational::q(c))
    }

    pub fn eval_int(&self, x: u64) -> BigInt {
        let x = BigInt::from(x);
        self.0.iter().rev().fold(BigInt::zero(), |acc, &c| acc * &x + BigInt::from(c))
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.0.len().max(other.0.len());
        let get = |p: &IntPoly, i: usize| p.0.get(i).copied().unwrap_or(0);
        IntPoly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&IntPoly(other.0.iter().map(|c| -c).collect()))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let body = match (k, mag) {
                (0, m) => m.to_string(),
                (1, 1) => "q".into(),
                (1, m) => format!("{m}q"),
                (k, 1) => format!("q^{k}"),
                (k, m) => format!("{m}q^{k}"),
            };
            if first {
                write!(f, "{sign}{body}")?;
            } else {
                write!(f, " {sign} {body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

/// Which concrete height evaluator a model binds to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightKind {
    /// `max_j |x_j|^{n+1}` on `P^n`.
    Projective,
    /// Anticanonical height on the blow-up of `P^2` at `(0:0:1)`.
    BlowupP2,
}

/// Sorted set of boundary indices.
pub type BoundarySet = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct CompactificationModel {
    pub name: String,
    pub dim: usize,
    pub boundary: Vec<String>,
    pub kappa: Vec<i64>,
    pub strata: BTreeMap<BoundarySet, IntPoly>,
    pub total: Option<IntPoly>,
    pub height: HeightKind,
    pub bad_primes: Vec<u64>,
    /// Exact local height integrals at `s = κ` for the bad primes.
    pub bad_factors: BTreeMap<u64, Q>,
    /// Restriction of an ambient anticanonical class, for submodels.
    pub ambient_anticanonical: Option<Vec<Q>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    name: String,
    dim: usize,
    boundary: Vec<String>,
    kappa: BTreeMap<String, i64>,
    strata: BTreeMap<String, IntPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total: Option<IntPoly>,
    height: HeightKind,
    #[serde(default)]
    bad_primes: Vec<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    bad_factors: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ambient_anticanonical: Option<BTreeMap<String, String>>,
}

impl CompactificationModel {
    pub fn num_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary_index(&self, label: &str) -> Option<usize> {
        self.boundary.iter().position(|b| b == label)
    }

    pub fn anticanonical(&self) -> DivisorClass {
        DivisorClass { l: self.kappa.iter().map(|&k| rational::q(k)).collect() }
    }

    pub fn is_bad(&self, p: u64) -> bool {
        self.bad_primes.contains(&p)
    }

    fn parse_set(&self, key: &str) -> Result<BoundarySet> {
        if key.trim().is_empty() {
            return Ok(Vec::new());
        }
        let mut set = key
            .split(',')
            .map(|l| {
                self.boundary_index(l.trim())
                    .ok_or_else(|| Error::Parse(format!("unknown boundary component {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        set.sort_unstable();
        set.dedup();
        Ok(set)
    }

    fn set_key(&self, set: &[usize]) -> String {
        set.iter().map(|&i| self.boundary[i].as_str()).collect::<Vec<_>>().join(",")
    }

    /// Parses a model file. Structural problems are parse errors; the
    /// geometric invariants are checked separately by [`validate_model`].
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut model = CompactificationModel {
            name: file.name,
            dim: file.dim,
            boundary: file.boundary,
            kappa: Vec::new(),
            strata: BTreeMap::new(),
            total: file.total,
            height: file.height,
            bad_primes: file.bad_primes,
            bad_factors: BTreeMap::new(),
            ambient_anticanonical: None,
        };
        model.kappa = model
            .boundary
            .iter()
            .map(|b| file.kappa.get(b).copied().ok_or_else(|| Error::Parse(format!("missing kappa for {b:?}"))))
            .collect::<Result<_>>()?;
        if file.kappa.len() != model.boundary.len() {
            return Err(Error::Parse("kappa lists an unknown boundary component".into()));
        }
        for (key, poly) in file.strata {
            let set = model.parse_set(&key)?;
            model.strata.insert(set, poly);
        }
        for (p, v) in file.bad_factors {
            let p: u64 = p.parse().map_err(|_| Error::Parse(format!("bad prime key {p:?}")))?;
            model.bad_factors.insert(p, parse_q(&v)?);
        }
        if let Some(amb) = file.ambient_anticanonical {
            let l = model
                .boundary
                .iter()
                .map(|b| amb.get(b).ok_or_else(|| Error::Parse(format!("missing ambient class at {b:?}"))).and_then(|s| parse_q(s)))
                .collect::<Result<_>>()?;
            model.ambient_anticanonical = Some(l);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            name: self.name.clone(),
            dim: self.dim,
            boundary: self.boundary.clone(),
            kappa: self.boundary.iter().cloned().zip(self.kappa.iter().copied()).collect(),
            strata: self.strata.iter().map(|(s, p)| (self.set_key(s), p.clone())).collect(),
            total: self.total.clone(),
            height: self.height,
            bad_primes: self.bad_primes.clone(),
            bad_factors: self.bad_factors.iter().map(|(p, v)| (p.to_string(), rational::fmt_q(v))).collect(),
            ambient_anticanonical: self
                .ambient_anticanonical
                .as_ref()
                .map(|l| self.boundary.iter().cloned().zip(l.iter().map(rational::fmt_q)).collect()),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// `|D^0_{A'}(F_q)|`, zero for strata not listed.
    pub fn stratum_count(&self, set: &[usize]) -> Option<&IntPoly> {
        self.strata.get(set)
    }

    /// Sum of all stratum polynomials.
    pub fn strata_total(&self) -> IntPoly {
        self.strata.values().fold(IntPoly::new(Vec::new()), |acc, p| acc.add(p))
    }

    /// `P^n` with its hyperplane at infinity: `κ = n + 1`.
    pub fn projective(n: usize) -> Self {
        let total = IntPoly::geometric(n + 1);
        CompactificationModel {
            name: format!("P{n}"),
            dim: n,
            boundary: vec!["H".into()],
            kappa: vec![n as i64 + 1],
            strata: BTreeMap::from([(vec![], IntPoly::monomial(n)), (vec![0], IntPoly::geometric(n))]),
            total: Some(total),
            height: HeightKind::Projective,
            bad_primes: Vec::new(),
            bad_factors: BTreeMap::new(),
            ambient_anticanonical: None,
        }
    }

    /// Blow-up of `P^2` at `(0:0:1)`: `D1` the strict transform of the line
    /// at infinity, `D2` the exceptional curve, `κ = (3, 2)`.
    pub fn blowup_p2() -> Self {
        CompactificationModel {
            name: "Bl_p P2".into(),
            dim: 2,
            boundary: vec!["D1".into(), "D2".into()],
            kappa: vec![3, 2],
            strata: BTreeMap::from([
                (vec![], IntPoly::monomial(2)),
                (vec![0], IntPoly::monomial(1)),
                (vec![1], IntPoly::monomial(1)),
                (vec![0, 1], IntPoly::new(vec![1])),
            ]),
            total: Some(IntPoly::new(vec![1, 2, 1])),
            height: HeightKind::BlowupP2,
            bad_primes: vec![2, 3],
            bad_factors: BTreeMap::from([(2, rational::qf(9, 4)), (3, rational::qf(16, 9))]),
            ambient_anticanonical: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub invariant: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelValidation {
    pub model: String,
    pub valid: bool,
    pub checks: Vec<Check>,
}

impl ModelValidation {
    pub fn into_result(self) -> Result<()> {
        match self.checks.into_iter().find(|c| !c.ok) {
            None => Ok(()),
            Some(c) => Err(Error::Invalid { invariant: c.invariant, detail: c.detail }),
        }
    }
}

/// Checks `κ_α ≥ 2`, the open-orbit count `q^n`, and the total point count,
/// all as identities of integer polynomials.
pub fn validate_model(m: &CompactificationModel) -> ModelValidation {
    let mut checks = Vec::new();
    let low: Vec<&str> = m
        .boundary
        .iter()
        .zip(&m.kappa)
        .filter(|(_, &k)| k < 2)
        .map(|(b, _)| b.as_str())
        .collect();
    checks.push(Check {
        invariant: "kappa_at_least_two",
        ok: low.is_empty(),
        detail: if low.is_empty() { "all κ_α ≥ 2".into() } else { format!("κ < 2 at {}", low.join(",")) },
    });
    let open = m.strata.get(&Vec::new()).cloned().unwrap_or_else(|| IntPoly::new(Vec::new()));
    let expected = IntPoly::monomial(m.dim);
    checks.push(Check {
        invariant: "open_orbit_count",
        ok: open == expected,
        detail: format!("|G(F_q)| = {open}, expected {expected}"),
    });
    let sum = m.strata_total();
    checks.push(match &m.total {
        Some(t) => Check {
            invariant: "total_point_count",
            ok: &sum == t,
            detail: format!("Σ strata = {sum}, total = {t}"),
        },
        None => Check {
            invariant: "total_point_count",
            ok: false,
            detail: "model does not ship a total point count".into(),
        },
    });
    ModelValidation { model: m.name.clone(), valid: checks.iter().all(|c| c.ok), checks }
}

/// A class `Σ l_α D_α` in `Pic(X)_Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    pub l: Vec<Q>,
}

impl DivisorClass {
    pub fn from_ints(l: &[i64]) -> Self {
        DivisorClass { l: l.iter().map(|&x| rational::q(x)).collect() }
    }

    pub fn is_effective(&self) -> bool {
        self.l.iter().all(|x| !x.is_negative())
    }

    pub fn scale(&self, t: &Q) -> Self {
        DivisorClass { l: self.l.iter().map(|x| x * t).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbcInvariants {
    #[serde(serialize_with = "crate::report::ser_q")]
    pub a: Q,
    pub b: usize,
    /// Boundary indices with `κ_α ≠ a l_α`.
    pub c_set: Vec<usize>,
    #[serde(serialize_with = "crate::report::ser_q")]
    pub c: Q,
}

impl AbcInvariants {
    /// Lexicographic comparison of `(a, b)`.
    pub fn ab(&self) -> (Q, usize) {
        (self.a.clone(), self.b)
    }
}

pub fn abc_invariants(m: &CompactificationModel, class: &DivisorClass) -> Result<AbcInvariants> {
    if class.l.len() != m.num_boundary() {
        return Err(Error::DimensionMismatch { expected: m.num_boundary(), got: class.l.len() });
    }
    if class.l.iter().any(|x| !x.is_positive()) {
        return Err(Error::precondition("positive_class", "every l_α must be positive"));
    }
    let ratios: Vec<Q> = m.kappa.iter().zip(&class.l).map(|(&k, l)| rational::q(k) / l).collect();
    let a = ratios.iter().max().cloned().expect("at least one boundary component");
    let c_set: Vec<usize> = (0..ratios.len()).filter(|&i| ratios[i] != a).collect();
    let b = ratios.len() - c_set.len();
    let c = (0..ratios.len())
        .filter(|i| !c_set.contains(i))
        .fold(Q::one(), |acc, i| acc / &class.l[i]);
    Ok(AbcInvariants { a, b, c_set, c })
}

/// Boundary data of `div(f) = E(f) - Σ d_α D_α` for a twisting function.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunctionDivisor {
    pub name: String,
    pub model: String,
    pub d: Vec<u32>,
    pub has_zero_component: bool,
    /// `|D_α^0 ∩ E(f)|` over `F_q` for the components the zero locus meets.
    pub zero_meets: BTreeMap<usize, IntPoly>,
}

#[derive(Deserialize)]
struct TwistFile {
    model: String,
    name: String,
    d: BTreeMap<String, u32>,
    has_zero_component: bool,
    #[serde(default)]
    zero_meets: BTreeMap<String, IntPoly>,
}

impl RationalFunctionDivisor {
    pub fn trivial(m: &CompactificationModel) -> Self {
        RationalFunctionDivisor {
            name: "1".into(),
            model: m.name.clone(),
            d: vec![0; m.num_boundary()],
            has_zero_component: false,
            zero_meets: BTreeMap::new(),
        }
    }

    pub fn from_json(m: &CompactificationModel, text: &str) -> Result<Self> {
        let file: TwistFile = serde_json::from_str(text)?;
        let d = m
            .boundary
            .iter()
            .map(|b| file.d.get(b).copied().ok_or_else(|| Error::Parse(format!("missing d for {b:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let zero_meets = file
            .zero_meets
            .into_iter()
            .map(|(b, p)| {
                m.boundary_index(&b)
                    .map(|i| (i, p))
                    .ok_or_else(|| Error::Parse(format!("unknown boundary component {b:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(RationalFunctionDivisor {
            name: file.name,
            model: file.model,
            d,
            has_zero_component: file.has_zero_component,
            zero_meets,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.d.iter().all(|&x| x == 0)
    }

    pub fn zero_meet(&self, alpha: usize) -> IntPoly {
        self.zero_meets.get(&alpha).cloned().unwrap_or_else(|| IntPoly::new(Vec::new()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwistPoleSet {
    /// `A_0(f) = {α : d_α(f) = 0}`.
    pub a0: Vec<usize>,
    /// Set when every `d_α` vanishes, i.e. the twist is trivial on the
    /// boundary.
    pub degenerate: bool,
}

pub fn twist_pole_set(m: &CompactificationModel, f: &RationalFunctionDivisor) -> Result<TwistPoleSet> {
    if f.d.len() != m.num_boundary() {
        return Err(Error::DimensionMismatch { expected: m.num_boundary(), got: f.d.len() });
    }
    let a0: Vec<usize> = (0..f.d.len()).filter(|&i| f.d[i] == 0).collect();
    Ok(TwistPoleSet { degenerate: a0.len() == m.num_boundary(), a0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn projective_models_validate() {
        for n in 1..=3 {
            let m = CompactificationModel::projective(n);
            let v = validate_model(&m);
            assert!(v.valid, "{v:?}");
            // |P^n(F_q)| at q = 5
            let expect: u64 = (0..=n as u32).map(|k| 5u64.pow(k)).sum();
            assert_eq!(m.strata_total().eval_int(5), BigInt::from(expect));
        }
        assert!(validate_model(&CompactificationModel::blowup_p2()).valid);
    }

    #[test]
    fn kappa_one_rejected() {
        let mut m = CompactificationModel::projective(1);
        m.kappa = vec![1];
        let v = validate_model(&m);
        assert!(!v.valid);
        assert!(matches!(v.into_result(), Err(Error::Invalid { invariant: "kappa_at_least_two", .. })));
    }

    #[test]
    fn abc_examples() {
        let m = CompactificationModel::blowup_p2();
        let k = abc_invariants(&m, &m.anticanonical()).unwrap();
        assert_eq!((k.a.clone(), k.b, k.c_set.clone(), k.c.clone()), (q(1), 2, vec![], qf(1, 6)));
        let h = abc_invariants(&m, &DivisorClass::from_ints(&[1, 1])).unwrap();
        assert_eq!((h.a, h.b, h.c_set, h.c), (q(3), 1, vec![1], q(1)));
        assert!(abc_invariants(&m, &DivisorClass::from_ints(&[1, 0])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = CompactificationModel::blowup_p2();
        let back = CompactificationModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let text = r#"{"name": "x", "dim": 1, "boundary": ["D"], "kappa": {"D": 2},
            "strata": {"": [0, 1], "E": [1]}, "height": "projective"}"#;
        assert!(CompactificationModel::from_json(text).is_err());
    }

    #[test]
    fn poly_display() {
        assert_eq!(IntPoly::new(vec![1, 2, 1]).to_string(), "q^2 + 2q + 1");
        assert_eq!(IntPoly::new(vec![-1, 0, 1]).to_string(), "q^2 - 1");
        assert_eq!(IntPoly::new(vec![]).to_string(), "0");
    }
}
