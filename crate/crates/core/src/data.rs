//! Access to the shipped data directory.
//!
//! The directory is `$HEIGHTLAB_DATA` when set, else the `data/` folder of
//! the source tree. Every loader accepts either a bare name (`h3`) looked up
//! under the matching subdirectory, or a path to a file.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{validate_model, CompactificationModel, RationalFunctionDivisor};
use crate::group::MatrixRep;
use crate::lie::LieAlgebra;
use crate::poly::PolynomialSet;

pub const DATA_ENV: &str = "HEIGHTLAB_DATA";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Algebras,
    Reps,
    Invariants,
    Models,
    Twists,
}

impl Kind {
    fn dir(self) -> &'static str {
        match self {
            Kind::Algebras => "algebras",
            Kind::Reps => "reps",
            Kind::Invariants => "invariants",
            Kind::Models => "models",
            Kind::Twists => "twists",
        }
    }
}

pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_ENV) {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"),
    }
}

/// Path for a name or an explicit file.
pub fn resolve(kind: Kind, name: &str) -> Result<PathBuf> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Ok(direct.to_path_buf());
    }
    let stem = name.strip_suffix(".json").unwrap_or(name);
    let shipped = data_dir().join(kind.dir()).join(format!("{stem}.json"));
    if shipped.is_file() {
        Ok(shipped)
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no {} entry {name:?} (looked in {})", kind.dir(), shipped.display()),
        )))
    }
}

/// File stem, used to pair an algebra with its representation and
/// invariants.
pub fn stem(name: &str) -> String {
    Path::new(name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| name.to_string())
}

fn read(kind: Kind, name: &str) -> Result<String> {
    Ok(fs::read_to_string(resolve(kind, name)?)?)
}

/// Sorted names of the shipped entries of one kind.
pub fn list(kind: Kind) -> Result<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(data_dir().join(kind.dir()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    names.sort();
    Ok(names)
}

pub fn algebra(name: &str) -> Result<LieAlgebra> {
    LieAlgebra::from_json(&read(Kind::Algebras, name)?)
}

pub fn rep(name: &str, alg: &LieAlgebra) -> Result<MatrixRep> {
    MatrixRep::from_json(alg, &read(Kind::Reps, &stem(name))?)
}

pub fn invariants(name: &str) -> Result<PolynomialSet> {
    PolynomialSet::from_json(&read(Kind::Invariants, &stem(name))?)
}

/// Loads and validates a model.
pub fn model(name: &str) -> Result<CompactificationModel> {
    let m = CompactificationModel::from_json(&read(Kind::Models, name)?)?;
    validate_model(&m).into_result()?;
    Ok(m)
}

pub fn twist(m: &CompactificationModel, name: &str) -> Result<RationalFunctionDivisor> {
    let f = RationalFunctionDivisor::from_json(m, &read(Kind::Twists, name)?)?;
    if f.model != m.name {
        return Err(Error::invalid("twist_model", format!("twist {:?} belongs to model {:?}, not {:?}", f.name, f.model, m.name)));
    }
    Ok(f)
}
