//! Exact rational helpers shared by every module.
//!
//! Rationals cross every file and report boundary as strings of the form
//! `"p/q"` (or `"p"` when the denominator is one).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::Error;

/// Exact rational number.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(n))
        }
    }
}

/// Comma separated list of rationals, e.g. `"5,1,-1/2"`.
pub fn parse_q_list(s: &str) -> Result<Vec<Q>, Error> {
    s.split(',').map(parse_q).collect()
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_q_list(xs: &[Q]) -> Vec<String> {
    xs.iter().map(fmt_q).collect()
}

pub fn to_f64(x: &Q) -> f64 {
    // Direct conversion loses nothing for the magnitudes handled here; fall
    // back to a ratio of floats when the integer parts overflow f64.
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let bits = x.numer().bits().max(x.denom().bits()) as i64 - 1000;
            let shift = bits.max(0) as usize;
            let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// `base^exp` for an integer exponent of either sign.
pub fn pow_i(base: &Q, exp: i64) -> Q {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// p-adic valuation of a nonzero rational.
pub fn valuation(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let count = |mut n: BigInt| {
        let mut v = 0i64;
        n = n.abs();
        loop {
            let (quo, rem) = n.div_rem(&p);
            if !rem.is_zero() {
                break;
            }
            n = quo;
            v += 1;
        }
        v
    };
    Some(count(x.numer().clone()) - count(x.denom().clone()))
}

/// Small random rational with numerator in `-num..=num` and denominator in
/// `1..=den`.
pub fn random_q<R: Rng + ?Sized>(rng: &mut R, num: i64, den: i64) -> Q {
    let n = rng.gen_range(-num..=num);
    let d = rng.gen_range(1..=den);
    qf(n, d)
}

pub fn random_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize, num: i64, den: i64) -> Vec<Q> {
    (0..dim).map(|_| random_q(rng, num, den)).collect()
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("6/4").unwrap(), qf(3, 2));
        assert_eq!(parse_q(" -7 ").unwrap(), q(-7));
        assert_eq!(fmt_q(&qf(-3, 6)), "-1/2");
        assert_eq!(fmt_q(&q(8)), "8");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(parse_q_list("5,1,2").unwrap(), vec![q(5), q(1), q(2)]);
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&q(125), 5), Some(3));
        assert_eq!(valuation(&qf(3, 10), 5), Some(-1));
        assert_eq!(valuation(&qf(3, 10), 7), Some(0));
        assert_eq!(valuation(&q(0), 5), None);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(pow_i(&q(2), -3), qf(1, 8));
        assert_eq!(pow_i(&qf(2, 3), 2), qf(4, 9));
        assert_eq!(pow_i(&q(7), 0), q(1));
    }
}
