//! Exact computational toolkit for heights on equivariant compactifications
//! of unipotent groups.

pub mod coadjoint;
pub mod counting;
pub mod data;
pub mod enveloping;
pub mod error;
pub mod geometry;
pub mod group;
pub mod lie;
pub mod linalg;
pub mod poly;
pub mod primes;
pub mod rational;
pub mod report;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
pub use lie::{LieAlgebra, MalcevBasis, MalcevKind, ReducingQuadruple, Subalgebra, Vector};
pub use rational::Q;
