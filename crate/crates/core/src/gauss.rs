//! Gauss-type iteration of mean-type mappings.
//!
//! A mean-type mapping M = (M₁, …, M_p) sends y ∈ I^p to
//! (M₁(y), …, M_p(y)). Iterating it contracts every starting vector to the
//! diagonal; the common limit coordinate K(x) is the M-invariant mean. The
//! contraction is quadratic, and the variance ratio
//! Var M(y) / (Var y)² approaches ¼·Var(ξ_{M₁}(K), …, ξ_{M_p}(K)), the
//! residuum variance of the component means at the invariant point. This
//! module builds iteration traces, extracts the invariant mean, and checks
//! the ratio law and the superlinear collapse empirically.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::{eval_mean, Interval, MeanSpec};
use crate::precision::{PrecisionConfig, Real};
use crate::residuum::residuum_analytic;

/// Iteration budget; quadratic convergence reaches any practical precision
/// long before this.
pub const DEFAULT_MAX_ITER: usize = 64;

/// A square mean-type mapping: p means applied to the same p-vector.
#[derive(Debug, Clone)]
pub struct MeanTypeMapping {
    means: Vec<MeanSpec>,
    domain: Interval,
}

impl MeanTypeMapping {
    /// Bundles `means` into a mapping on the intersection of their domains.
    pub fn new(means: Vec<MeanSpec>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidArity(means.len()));
        }
        let mut domain = means[0].domain();
        for m in &means[1..] {
            domain = domain.intersect(&m.domain())?;
        }
        Ok(Self { means, domain })
    }

    /// Number of component means = arity of each evaluation.
    pub fn arity(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[MeanSpec] {
        &self.means
    }

    /// The common domain all components act on.
    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// One application: y ↦ (M₁(y), …, M_p(y)).
    pub fn apply(&self, y: &[Real]) -> Result<Vec<Real>> {
        if y.len() != self.means.len() {
            return Err(Error::InvalidArity(y.len()));
        }
        self.means.iter().map(|m| eval_mean(m, y)).collect()
    }

    /// Component labels joined for display, e.g. `(gini(2,1), geometric)`.
    pub fn name(&self) -> String {
        let parts: Vec<String> = self.means.iter().map(MeanSpec::name).collect();
        format!("({})", parts.join(", "))
    }
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// Var y^(n) fell below the precision floor 2^(g−w)·scale².
    VarianceUnderflow,
    /// The budget ran out before the floor was reached.
    MaxIterations,
    /// The state became exactly constant (finite-step collapse).
    BecameConstant,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerminationReason::VarianceUnderflow => "variance_underflow",
            TerminationReason::MaxIterations => "max_iterations",
            TerminationReason::BecameConstant => "became_constant",
        })
    }
}

/// Complete record of one iteration run.
///
/// `states[n]` is y^(n); `variances` and `diameters` are per-state
/// (population variance and max−min). `ratios[n] = Var y^(n+1)/(Var y^(n))²`
/// is `None` once Var y^(n) sinks below the usable floor
/// 2^(2g−w)·scale² — past that point the square in the denominator turns
/// roundoff into noise.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub states: Vec<Vec<Real>>,
    pub variances: Vec<Real>,
    pub diameters: Vec<Real>,
    pub ratios: Vec<Option<Real>>,
    pub invariant_estimate: Real,
    pub terminated_reason: TerminationReason,
}

impl IterationTrace {
    /// Number of recorded states (iterations + 1).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The ratios that survived the usable-floor filter, in order.
    pub fn usable_ratios(&self) -> Vec<&Real> {
        self.ratios.iter().flatten().collect()
    }

    /// Writes the trace as CSV: `n,y_1,…,y_p,variance,diameter,ratio`, one
    /// row per state, values as full-precision decimal strings. The ratio
    /// cell is empty where the ratio is undefined (filtered or final row).
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let p = self.states.first().map_or(0, Vec::len);
        out.write_all(b"n")?;
        for i in 1..=p {
            write!(out, ",y_{i}")?;
        }
        out.write_all(b",variance,diameter,ratio\n")?;
        for (n, state) in self.states.iter().enumerate() {
            write!(out, "{n}")?;
            for y in state {
                write!(out, ",{}", y.to_decimal(None))?;
            }
            write!(
                out,
                ",{},{}",
                self.variances[n].to_decimal(None),
                self.diameters[n].to_decimal(None)
            )?;
            match self.ratios.get(n) {
                Some(Some(r)) => writeln!(out, ",{}", r.to_decimal(None))?,
                _ => out.write_all(b",\n")?,
            }
        }
        Ok(())
    }
}

/// Invariant mean with its enclosure width.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantMean {
    pub value: Real,
    pub uncertainty: Real,
}

/// Empirical vs. predicted variance-ratio limit.
#[derive(Debug, Clone, Serialize)]
pub struct LimitVerdict {
    /// Median of the last few usable ratios r_n.
    pub empirical_limit: Real,
    /// ¼·Var(ξ_{M₁}(K), …, ξ_{M_p}(K)) at the computed invariant mean.
    pub predicted_limit: Real,
    /// |empirical − predicted| / max(|predicted|, guard floor).
    pub relative_gap: Real,
    #[serde(skip)]
    pub n_ratios_used: usize,
    /// The invariant mean the prediction was evaluated at.
    #[serde(rename = "K")]
    pub k: Real,
    pub precision_bits: u32,
}

/// Empirical convergence-order diagnostics extracted from a trace.
#[derive(Debug, Clone, Serialize)]
pub struct SuperlinearityReport {
    /// The state became exactly constant in finitely many steps.
    pub exact_collapse: bool,
    /// Last diam y^(n+1) / diam y^(n) with a positive denominator.
    pub final_diameter_quotient: Option<Real>,
    /// Last log(1/Var y^(n+1)) / log(1/Var y^(n)) over states with
    /// Var ≤ 1/4; at least 2 under quadratic convergence.
    pub final_log_inv_var_growth: Option<Real>,
    /// Diameters were still shrinking at the end (or collapsed exactly).
    pub contracting: bool,
    /// Digits-of-agreement at least doubled across the last measured step
    /// (or the state collapsed exactly).
    pub superlinear: bool,
}

/// Population variance 𝔼(y−𝔼y)², computed in centered form. The
/// uncentered 𝔼y² − (𝔼y)² form is mathematically identical but loses all
/// significance once Var ≪ (𝔼y)², which is exactly the regime the
/// iteration spends most of its time in.
fn population_variance(y: &[Real], w: u32) -> Real {
    let n = Real::from_usize(y.len(), w);
    let mean = Real::sum(y) / &n;
    let mut acc = Real::zero(w);
    for v in y {
        let c = v - &mean;
        acc = acc + &c * &c;
    }
    acc / &n
}

fn diameter(y: &[Real]) -> Real {
    Real::max_of(y) - Real::min_of(y)
}

/// Iterates `mapping` from `x0` until the variance underflows the precision
/// floor, the state becomes exactly constant, or `max_iter` applications.
///
/// All arithmetic runs at `cfg.working_bits()`. Every step is checked
/// against the mean-property sandwich min y ≤ M_i(y) ≤ max y (up to one
/// guard tolerance); a violation signals a broken user-supplied mean and
/// aborts.
pub fn iterate(
    mapping: &MeanTypeMapping,
    x0: &[Real],
    cfg: PrecisionConfig,
    max_iter: usize,
) -> Result<IterationTrace> {
    let p = mapping.arity();
    if x0.len() != p {
        return Err(Error::InvalidArity(x0.len()));
    }
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    let w = cfg.working_bits();
    let domain = mapping.domain();
    let mut cur = Vec::with_capacity(p);
    for v in x0 {
        if !domain.contains(v) {
            return Err(Error::Domain(format!(
                "start coordinate {} outside common domain {domain}",
                v.to_decimal(Some(20))
            )));
        }
        cur.push(v.with_prec(w));
    }

    let mut scale = Real::one(w);
    for v in &cur {
        let a = v.abs();
        if a > scale {
            scale = a;
        }
    }
    let scale_sq = &scale * &scale;
    let stop_floor = cfg.abs_tolerance(&scale_sq);
    let usable_floor = &stop_floor * &Real::exp2i(i64::from(cfg.guard_bits()), w);
    let sandwich_tol = cfg.abs_tolerance(&scale);

    let mut states = vec![cur.clone()];
    let mut variances = vec![population_variance(&cur, w)];
    let mut diameters = vec![diameter(&cur)];

    let terminated_reason = loop {
        let n = states.len() - 1;
        if diameters[n].is_zero() {
            break TerminationReason::BecameConstant;
        }
        if variances[n] < stop_floor {
            break TerminationReason::VarianceUnderflow;
        }
        if n >= max_iter {
            break TerminationReason::MaxIterations;
        }
        let next = mapping.apply(&cur)?;
        let lo = Real::min_of(&cur) - &sandwich_tol;
        let hi = Real::max_of(&cur) + &sandwich_tol;
        for (i, y) in next.iter().enumerate() {
            if *y < lo || *y > hi {
                return Err(Error::MeanPropertyViolated {
                    step: n,
                    detail: format!(
                        "component {} of {} left [min, max]: {}",
                        i + 1,
                        mapping.name(),
                        y.to_decimal(Some(20))
                    ),
                });
            }
        }
        cur = next;
        states.push(cur.clone());
        variances.push(population_variance(&cur, w));
        diameters.push(diameter(&cur));
    };

    let mut ratios = Vec::with_capacity(states.len().saturating_sub(1));
    for n in 0..states.len() - 1 {
        ratios.push(if variances[n] > usable_floor {
            Some(&variances[n + 1] / &(&variances[n] * &variances[n]))
        } else {
            None
        });
    }

    let invariant_estimate = Real::sum(&cur) / Real::from_usize(p, w);
    Ok(IterationTrace {
        states,
        variances,
        diameters,
        ratios,
        invariant_estimate,
        terminated_reason,
    })
}

/// The M-invariant mean K(x0): the common limit of the iteration, with the
/// final state diameter as its uncertainty. Fails if `DEFAULT_MAX_ITER`
/// applications were not enough to converge.
pub fn invariant_mean(
    mapping: &MeanTypeMapping,
    x0: &[Real],
    cfg: PrecisionConfig,
) -> Result<InvariantMean> {
    let trace = iterate(mapping, x0, cfg, DEFAULT_MAX_ITER)?;
    if trace.terminated_reason == TerminationReason::MaxIterations {
        return Err(Error::NonConvergence {
            max_iter: DEFAULT_MAX_ITER,
            last_diameter: trace
                .diameters
                .last()
                .expect("trace has at least one state")
                .to_decimal(Some(12)),
        });
    }
    Ok(InvariantMean {
        value: trace.invariant_estimate,
        uncertainty: trace
            .diameters
            .into_iter()
            .last()
            .expect("trace has at least one state"),
    })
}

/// The predicted variance-ratio limit ¼·Var(ξ_{M₁}(k), …, ξ_{M_p}(k)),
/// using the analytic residuum of every component at `k`.
pub fn predicted_limit(mapping: &MeanTypeMapping, k: &Real) -> Result<Real> {
    let residua = mapping
        .means()
        .iter()
        .map(|m| residuum_analytic(m, k).map(|e| e.value))
        .collect::<Result<Vec<Real>>>()?;
    Ok(population_variance(&residua, k.prec()) / 4u32)
}

/// Runs the iteration and compares the empirical tail of
/// r_n = Var y^(n+1)/(Var y^(n))² against the predicted limit at the
/// computed invariant mean.
pub fn verify_limit(
    mapping: &MeanTypeMapping,
    x0: &[Real],
    cfg: PrecisionConfig,
) -> Result<LimitVerdict> {
    let trace = iterate(mapping, x0, cfg, DEFAULT_MAX_ITER)?;
    verdict_from_trace(mapping, &trace, cfg)
}

/// The comparison half of [`verify_limit`], reusing an existing trace.
///
/// The empirical limit is the median of the last three usable ratios
/// rather than the final one: each r_n carries an O(diam y^(n)) wobble, and
/// the median damps a single stray tail entry.
pub fn verdict_from_trace(
    mapping: &MeanTypeMapping,
    trace: &IterationTrace,
    cfg: PrecisionConfig,
) -> Result<LimitVerdict> {
    if trace.diameters.first().is_none_or(Real::is_zero) {
        return Err(Error::InvalidConfig(
            "the start vector is constant; the ratio law needs a nonconstant start".into(),
        ));
    }
    let usable = trace.usable_ratios();
    if usable.len() < 3 {
        return Err(Error::InsufficientRatios {
            usable: usable.len(),
            needed: 3,
        });
    }
    let mut tail: Vec<Real> = usable[usable.len() - 3..]
        .iter()
        .map(|r| (*r).clone())
        .collect();
    tail.sort_by(|a, b| a.total_cmp(b));
    let empirical_limit = tail.swap_remove(1);

    let k = trace.invariant_estimate.clone();
    let predicted_limit = self::predicted_limit(mapping, &k)?;
    let floor = cfg.guard_eps();
    let denom = {
        let m = predicted_limit.abs();
        if m > floor {
            m
        } else {
            floor
        }
    };
    let relative_gap = (&empirical_limit - &predicted_limit).abs() / &denom;
    Ok(LimitVerdict {
        empirical_limit,
        predicted_limit,
        relative_gap,
        n_ratios_used: 3,
        k,
        precision_bits: cfg.working_bits(),
    })
}

/// Convergence-order diagnostics: final diameter quotient, growth of
/// log(1/Var) per step, and flags for exact collapse / failure to contract.
pub fn superlinearity_check(trace: &IterationTrace) -> SuperlinearityReport {
    let exact_collapse = trace.terminated_reason == TerminationReason::BecameConstant;
    let w = trace.invariant_estimate.prec();

    let mut final_diameter_quotient = None;
    for n in (0..trace.diameters.len().saturating_sub(1)).rev() {
        if trace.diameters[n].is_positive() {
            final_diameter_quotient = Some(&trace.diameters[n + 1] / &trace.diameters[n]);
            break;
        }
    }

    // Only measure growth once Var ≤ 1/4, so both logarithms are comfortably
    // positive. Under Var_{n+1} ≈ r·Var_n² with r < 1 the quotient
    // log(1/Var_{n+1}) / log(1/Var_n) = 2 + log(1/r)/log(1/Var_n) stays ≥ 2.
    let bound = Real::one(w) / 4u32;
    let mut final_log_inv_var_growth = None;
    for n in (0..trace.variances.len().saturating_sub(1)).rev() {
        let a = &trace.variances[n];
        let b = &trace.variances[n + 1];
        if a.is_positive() && b.is_positive() && a <= &bound && b <= &bound {
            let la = (Real::one(w) / a).ln().expect("argument is positive");
            let lb = (Real::one(w) / b).ln().expect("argument is positive");
            final_log_inv_var_growth = Some(lb / la);
            break;
        }
    }

    let contracting = exact_collapse
        || final_diameter_quotient
            .as_ref()
            .is_some_and(|q| *q < 0.9);
    let superlinear = exact_collapse
        || final_log_inv_var_growth
            .as_ref()
            .is_some_and(|g| *g >= 1.9);
    SuperlinearityReport {
        exact_collapse,
        final_diameter_quotient,
        final_log_inv_var_growth,
        contracting,
        superlinear,
    }
}
