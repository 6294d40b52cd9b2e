//! Shared fixtures for the criterion benchmarks.

use meaniter_core::{GeneratorFunction, MeanSpec, MeanTypeMapping, Real};

/// The worked-example mapping (G(2,1), geometric, G(1,−1)).
pub fn gini_triple() -> MeanTypeMapping {
    MeanTypeMapping::new(vec![
        MeanSpec::gini(2.0, 1.0).unwrap(),
        MeanSpec::geometric(),
        MeanSpec::gini(1.0, -1.0).unwrap(),
    ])
    .unwrap()
}

/// The arithmetic–geometric pair whose invariant mean is the AGM.
pub fn agm_pair() -> MeanTypeMapping {
    MeanTypeMapping::new(vec![MeanSpec::arithmetic(), MeanSpec::geometric()]).unwrap()
}

/// A quasiarithmetic mean with a transcendental generator.
pub fn qa_log() -> MeanSpec {
    MeanSpec::quasi_arithmetic(GeneratorFunction::log()).unwrap()
}

/// Converts f64 samples to `Real`s at the given precision.
pub fn reals(vals: &[f64], bits: u32) -> Vec<Real> {
    vals.iter().map(|v| Real::from_f64(*v, bits)).collect()
}
