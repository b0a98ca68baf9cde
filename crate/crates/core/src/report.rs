//! Machine-readable output helpers shared by the tools.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::scalar::{decimal17, Scalar};
use crate::surface::{Notation, Surface};

/// An exact quantity rendered as a `p/q` string plus a 17-significant-digit decimal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactValue {
    pub fraction: String,
    pub decimal: String,
}

impl ExactValue {
    pub fn new<T: Scalar>(v: &T) -> Self {
        ExactValue { fraction: v.to_fraction_string(), decimal: decimal17(v.to_f64_lossy()) }
    }
}

/// Run metadata embedded in every JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub surface: Option<String>,
    /// SHA-256 of the surface's canonical two-line description.
    pub surface_hash: Option<String>,
    pub subcommand: String,
    pub flags: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub rng: Option<String>,
    /// Taken from `SOURCE_DATE_EPOCH` when set, so reruns stay byte-identical.
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, surface: Option<&Surface>) -> Self {
        RunManifest {
            tool: "curvestat".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            surface: surface.map(|s| s.name().to_string()),
            surface_hash: surface.map(surface_hash),
            subcommand: subcommand.into(),
            flags: BTreeMap::new(),
            seeds: Vec::new(),
            rng: None,
            timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.into(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64, rng: &str) -> Self {
        self.seeds.push(seed);
        self.rng = Some(rng.into());
        self
    }
}

/// `serialize_with` adapter writing a scalar as an [`ExactValue`].
pub fn serialize_exact<T: Scalar, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    ExactValue::new(v).serialize(s)
}

pub fn surface_hash(surface: &Surface) -> String {
    let digest = Sha256::digest(surface.to_description(Notation::Upper).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
