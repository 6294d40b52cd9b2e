//! Symmetric means, their residua, and Gauss-type iteration.
//!
//! The crate provides three layers:
//!
//! * [`precision`] — arbitrary-precision reals ([`Real`]) with explicit
//!   working/guard budgets ([`PrecisionConfig`]);
//! * [`means`] — mean families (power, Gini, quasi-arithmetic,
//!   Bajraktarević, quasideviation), their evaluation, and axiom probes;
//! * [`residuum`] — the residuum ξ_M of a mean: analytic formulas per
//!   family plus two independent numerical estimators, a local-expansion
//!   probe, and an arity-independence check;
//! * [`gauss`] — iteration of mean-type mappings M = (M₁, …, M_p) to their
//!   invariant mean, with empirical verification of the quadratic
//!   variance-collapse law Var M(y)/(Var y)² → ¼·Var(ξ_{M₁}(K), …, ξ_{M_p}(K)).

pub mod error;
pub mod gauss;
pub mod means;
pub mod precision;
pub mod residuum;
pub mod wire;

pub use error::{Error, Result};
pub use gauss::{
    invariant_mean, iterate, predicted_limit, superlinearity_check, verdict_from_trace,
    verify_limit, InvariantMean, IterationTrace, LimitVerdict, MeanTypeMapping,
    SuperlinearityReport, TerminationReason, DEFAULT_MAX_ITER,
};
pub use means::{
    eval_mean, parse_deviation, parse_generator, probe_mean_axioms, qa_invert, qd_solve,
    AxiomReport, AxiomViolation, DeviationFunction, GeneratorFunction, Interval, Mean, MeanFamily,
    MeanSpec,
};
pub use precision::{
    PrecisionConfig, Real, DEFAULT_GUARD_BITS, DEFAULT_ITERATION_BITS, DEFAULT_RESIDUUM_BITS,
};
pub use residuum::{
    bajraktarevic_invariants, check_diagonal_identities, p_independence_check, residuality_probe,
    residuum_analytic, residuum_hessian, residuum_limit, Method, PIndependenceReport,
    ResidualityReport, ResiduumEstimate,
};
pub use wire::{mapping_from_wire, reals_from_wire, MeanSpecWire, WireNumber};
