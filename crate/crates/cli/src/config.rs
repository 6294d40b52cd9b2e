//! JSON experiment descriptions.
//!
//! A config file holds either a single experiment object or
//! `{"experiments": [obj, obj, ...]}`. Numbers that carry data (vector
//! entries, probe points) accept decimal strings so nothing is squeezed
//! through a binary double on the way in.

use meaniter_core::{Error, MeanSpecWire, Result, WireNumber};
use serde::Deserialize;
use serde_json::Value;

/// `eval`: one mean applied to one vector.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub mean: MeanSpecWire,
    pub x: Vec<WireNumber>,
    pub precision_bits: Option<u32>,
}

/// `residuum`: point estimate by all methods at arity `p`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResiduumConfig {
    pub mean: MeanSpecWire,
    pub x: WireNumber,
    #[serde(default = "two")]
    pub p: usize,
    pub precision_bits: Option<u32>,
}

/// `probe-residuality`: defect-exponent fit over a radius schedule.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub mean: MeanSpecWire,
    pub x: WireNumber,
    /// Arity of the probe. Defaults to 3: even-order cancellations that can
    /// hide the cubic defect at p = 2 are generically absent at p = 3.
    #[serde(default = "three")]
    pub p: usize,
    /// Strictly decreasing probe radii; defaults to seven half-decade steps
    /// from 1e-1 down to 1e-4.
    pub radii: Option<Vec<f64>>,
    pub precision_bits: Option<u32>,
}

/// `p-independence`: the same estimate across several arities.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PIndependenceConfig {
    pub mean: MeanSpecWire,
    pub x: WireNumber,
    /// Arities to compare; defaults to [2, 3, 5].
    pub arities: Option<Vec<usize>>,
    pub precision_bits: Option<u32>,
}

/// `iterate` / `verify`: a mean-type mapping and a start vector.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingConfig {
    pub means: Vec<MeanSpecWire>,
    pub x0: Vec<WireNumber>,
    pub max_iter: Option<usize>,
    pub precision_bits: Option<u32>,
}

fn two() -> usize {
    2
}

fn three() -> usize {
    3
}

/// Splits a parsed config file into its experiment objects. A top-level
/// `experiments` array marks a batch; anything else is a single experiment.
pub fn experiments(root: Value) -> Result<(Vec<Value>, bool)> {
    match root {
        Value::Object(map) if map.contains_key("experiments") => {
            if let Some(extra) = map.keys().find(|k| *k != "experiments") {
                return Err(Error::InvalidConfig(format!(
                    "unexpected key {extra:?} next to \"experiments\""
                )));
            }
            match map.into_iter().next().expect("checked nonempty").1 {
                Value::Array(items) if !items.is_empty() => Ok((items, true)),
                Value::Array(_) => Err(Error::InvalidConfig(
                    "\"experiments\" must not be empty".into(),
                )),
                other => Err(Error::InvalidConfig(format!(
                    "\"experiments\" must be an array, got {other}"
                ))),
            }
        }
        obj @ Value::Object(_) => Ok((vec![obj], false)),
        other => Err(Error::InvalidConfig(format!(
            "config must be a JSON object, got {other}"
        ))),
    }
}

/// Deserializes one experiment into the command's config type.
pub fn parse<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T> {
    serde_json::from_value(value)
        .map_err(|e| Error::InvalidConfig(format!("bad experiment description: {e}")))
}
