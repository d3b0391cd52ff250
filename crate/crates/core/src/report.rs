//! Serialization helpers shared by report types: rationals travel as
//! `"p/q"` strings.

use serde::Serializer;

use crate::lie::Vector;
use crate::rational::{fmt_q, Q};

/// Version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

pub fn ser_q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

pub fn ser_q_vec<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(fmt_q))
}

pub fn ser_vector<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
    ser_q_vec(&v.0, s)
}
