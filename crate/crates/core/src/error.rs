//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by mean evaluation, residuum estimation, and iteration.
#[derive(Debug, Error)]
pub enum Error {
    /// Configuration or construction-time parameter error.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Input lies outside the domain an operation requires.
    #[error("domain violation: {0}")]
    Domain(String),

    /// Division where the divisor is exactly zero.
    #[error("division by exact zero")]
    DivisionByZero,

    /// A root-finding bracket does not straddle the target value.
    /// For quasideviation solves this signals a deviation function
    /// violating the sign condition (D1).
    #[error("root finder bracket failure: {0}")]
    NonBracketing(String),

    /// A generator could not be inverted; signals a non-monotone generator.
    #[error("generator inversion failure: {0}")]
    InversionFailure(String),

    /// A generator function failed a construction-time axiom spot check.
    #[error("generator '{name}' violates axiom '{axiom}' near {at}")]
    GeneratorAxiom {
        /// Catalog name of the generator.
        name: String,
        /// The violated axiom.
        axiom: &'static str,
        /// Sample point where the violation was observed.
        at: String,
    },

    /// A deviation function failed a construction-time axiom spot check.
    #[error("deviation function violates axiom '{axiom}' near {at}")]
    DeviationAxiom {
        /// The violated axiom.
        axiom: &'static str,
        /// Sample point where the violation was observed.
        at: String,
    },

    /// Analytic residuum denominator is numerically zero; signals a
    /// vanishing first derivative or a non-normalizable deviation.
    #[error("residuum denominator numerically zero at {at}")]
    ZeroDenominator {
        /// Evaluation point.
        at: String,
    },

    /// The diagonal derivative identities of a deviation function fail a
    /// finite-difference check; the analytic residuum would be unreliable.
    #[error("deviation diagonal identity {which} violated at {at}: residual {magnitude}")]
    DiagonalIdentity {
        /// Which identity failed (1 or 2).
        which: u8,
        /// Evaluation point.
        at: String,
        /// Observed residual magnitude.
        magnitude: String,
    },

    /// The extrapolation table for a limit estimate did not converge;
    /// signals a mean that is not smooth enough at the probe point.
    #[error("extrapolation table did not converge: best correction {best_correction}")]
    ExtrapolationDiverged {
        /// Smallest correction observed along the table diagonal.
        best_correction: String,
    },

    /// The two Hessian-based residuum forms disagree beyond tolerance;
    /// the mean is not symmetric-C^2 at the probe point.
    #[error("hessian residuum forms disagree at {at}: mixed {mixed}, pure {pure}")]
    HessianDisagreement {
        /// Evaluation point.
        at: String,
        /// Value from the mixed-partial form.
        mixed: String,
        /// Value from the pure-second-partial form.
        pure: String,
    },

    /// An operation that needs arity >= 2 was called with a smaller one.
    #[error("arity {0} not supported; residuum operations require p >= 2")]
    InvalidArity(usize),

    /// Gauss iteration left the starting bracket; signals a broken
    /// user-supplied mean.
    #[error("mean property violated at step {step}: {detail}")]
    MeanPropertyViolated {
        /// Iteration step at which the violation occurred.
        step: usize,
        /// Violating coordinate and bounds.
        detail: String,
    },

    /// Gauss iteration hit its step limit before contracting.
    #[error("no convergence within {max_iter} iterations; last diameter {last_diameter}")]
    NonConvergence {
        /// Step budget that was exhausted.
        max_iter: usize,
        /// Diameter of the final state.
        last_diameter: String,
    },

    /// Too few variance ratios survived the precision floor to estimate a
    /// limit. Raising the working precision yields more usable ratios.
    #[error(
        "only {usable} usable variance ratios (need >= {needed}); raise working_bits"
    )]
    InsufficientRatios {
        /// Usable ratios found.
        usable: usize,
        /// Minimum required.
        needed: usize,
    },

    /// Malformed textual input (mean spec JSON, generator expression,
    /// decimal number).
    #[error("parse error: {0}")]
    Parse(String),
}
