//! JSON wire format for means, mappings, and numeric inputs.
//!
//! Experiment configs describe a mean as a flat object, e.g.
//! `{"family": "gini", "alpha": 2, "beta": 1}` or
//! `{"family": "qa", "generator": "log"}`. Generators and deviations use
//! the compact expression strings understood by
//! [`parse_generator`](crate::means::parse_generator) /
//! [`parse_deviation`](crate::means::parse_deviation).

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gauss::MeanTypeMapping;
use crate::means::{parse_deviation, parse_generator, Interval, MeanSpec};
use crate::precision::Real;

/// One mean in wire form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanSpecWire {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// Generator expression for `qa`, e.g. `"log"`, `"exp"`, `"x^2+3*x"`.
    #[serde(default)]
    pub generator: Option<String>,
    /// Numerator generator for `bajraktarevic`.
    #[serde(default)]
    pub f: Option<String>,
    /// Weight generator for `bajraktarevic`.
    #[serde(default)]
    pub g: Option<String>,
    /// Deviation expression for `quasideviation`, e.g. `"difference:log"`
    /// or `"bajraktarevic:x^2,x"`.
    #[serde(default)]
    pub deviation: Option<String>,
    /// Optional `[lo, hi]` restriction of the family's natural domain.
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
}

impl MeanSpecWire {
    /// Validates and builds the described mean.
    pub fn build(&self) -> Result<MeanSpec> {
        let spec = match self.family.as_str() {
            "arithmetic" => MeanSpec::arithmetic(),
            "geometric" => MeanSpec::geometric(),
            "power" => MeanSpec::power(self.number("alpha", self.alpha)?)?,
            "gini" => MeanSpec::gini(
                self.number("alpha", self.alpha)?,
                self.number("beta", self.beta)?,
            )?,
            "qa" | "quasiarithmetic" | "quasi_arithmetic" => {
                let expr = self.text("generator", &self.generator)?;
                MeanSpec::quasi_arithmetic(parse_generator(expr)?)?
            }
            "bajraktarevic" => {
                let f = parse_generator(self.text("f", &self.f)?)?;
                let g = parse_generator(self.text("g", &self.g)?)?;
                MeanSpec::bajraktarevic(f, g)?
            }
            "qd" | "quasideviation" => {
                let expr = self.text("deviation", &self.deviation)?;
                MeanSpec::quasideviation(parse_deviation(expr)?)
            }
            "min" => MeanSpec::min(),
            "max" => MeanSpec::max(),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown mean family {other:?}"
                )))
            }
        };
        match self.domain {
            Some([lo, hi]) => spec.with_domain(Interval::new(lo, hi)?),
            None => Ok(spec),
        }
    }

    fn number(&self, name: &str, value: Option<f64>) -> Result<f64> {
        value.ok_or_else(|| {
            Error::InvalidConfig(format!(
                "family {:?} requires the field {name:?}",
                self.family
            ))
        })
    }

    fn text<'a>(&self, name: &str, value: &'a Option<String>) -> Result<&'a str> {
        value.as_deref().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "family {:?} requires the field {name:?}",
                self.family
            ))
        })
    }
}

/// A numeric input: either a JSON number (converted as the exact double it
/// is) or a decimal string parsed at the target precision. Strings are the
/// lossless form.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WireNumber {
    Number(f64),
    Text(String),
}

impl WireNumber {
    pub fn to_real(&self, prec: u32) -> Result<Real> {
        match self {
            WireNumber::Number(v) if v.is_finite() => Ok(Real::from_f64(*v, prec)),
            WireNumber::Number(v) => Err(Error::Parse(format!(
                "numeric input must be finite, got {v}"
            ))),
            WireNumber::Text(s) => Real::from_decimal(s, prec),
        }
    }
}

/// Converts a wire vector at a common precision.
pub fn reals_from_wire(xs: &[WireNumber], prec: u32) -> Result<Vec<Real>> {
    xs.iter().map(|x| x.to_real(prec)).collect()
}

/// Builds a mean-type mapping from a list of wire means.
pub fn mapping_from_wire(means: &[MeanSpecWire]) -> Result<MeanTypeMapping> {
    let specs = means
        .iter()
        .map(MeanSpecWire::build)
        .collect::<Result<Vec<_>>>()?;
    MeanTypeMapping::new(specs)
}
