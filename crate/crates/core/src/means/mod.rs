//! Mean families and their evaluation on vectors of any arity.
//!
//! The concrete families are arithmetic, geometric, power, Gini,
//! quasiarithmetic, Bajraktarević, and quasideviation means. The first four
//! evaluate by closed formula; the last three go through root-finding
//! ([`qa_invert`] and [`qd_solve`]).

mod generator;
mod parse;
mod solve;

pub use generator::{DeviationFunction, GeneratorFunction};
pub use parse::{parse_deviation, parse_generator};
pub use solve::{qa_invert, qd_solve};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::{PrecisionConfig, Real};

/// An open interval with extended-real endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Creates the open interval (lo, hi); endpoints may be infinite.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidConfig(format!(
                "interval endpoints must satisfy lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The whole real line.
    pub fn whole() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// The positive half-line (0, ∞).
    pub fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    /// Lower endpoint (may be −∞).
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Upper endpoint (may be +∞).
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Strict interior membership.
    pub fn contains(&self, v: &Real) -> bool {
        v.is_finite() && *v > self.lo && *v < self.hi
    }

    /// Intersection; errors when the overlap is empty.
    pub fn intersect(&self, other: &Interval) -> Result<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Distance from an interior point to the nearest finite endpoint;
    /// `None` when both endpoints are infinite.
    pub fn distance_to_boundary(&self, x: &Real) -> Option<Real> {
        let prec = x.prec();
        let mut best: Option<Real> = None;
        if self.lo.is_finite() {
            best = Some(x - &Real::from_f64(self.lo, prec));
        }
        if self.hi.is_finite() {
            let d = Real::from_f64(self.hi, prec) - x;
            best = Some(match best {
                Some(b) if b < d => b,
                _ => d,
            });
        }
        best
    }

    /// `n` strictly interior sample points, spread across the interval
    /// (log-spaced toward any infinite end).
    pub fn probe_grid(&self, n: usize, prec: u32) -> Vec<Real> {
        assert!(n >= 2, "probe grid needs at least 2 points");
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let f = (i as f64 + 0.5) / n as f64; // in (0,1)
            let v = match (self.lo.is_finite(), self.hi.is_finite()) {
                (true, true) => self.lo + (self.hi - self.lo) * f,
                (true, false) => self.lo + (-6.0 + 12.0 * f).exp(),
                (false, true) => self.hi - (-6.0 + 12.0 * f).exp(),
                (false, false) => (10.0 * (f - 0.5)).sinh(),
            };
            pts.push(Real::from_f64(v, prec));
        }
        pts
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Formats an `f64` family parameter compactly ("2" rather than "2.0").
pub(crate) fn fmt_param(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// A p-variable mean: internal (min ≤ M(x) ≤ max) on its domain.
///
/// Implementations must be pure; the same input always yields the same
/// output. All built-in families implement this via [`MeanSpec`].
pub trait Mean: Send + Sync {
    /// Evaluates the mean of a nonempty vector with entries in the domain.
    fn eval(&self, x: &[Real]) -> Result<Real>;

    /// The open interval on which the mean is defined.
    fn domain(&self) -> Interval;

    /// Human-readable label for reports and error messages.
    fn describe(&self) -> String {
        "mean".into()
    }
}

/// The mean family plus its parameters.
#[derive(Clone)]
pub enum MeanFamily {
    /// Arithmetic mean on the whole line.
    Arithmetic,
    /// Geometric mean on (0, ∞).
    Geometric,
    /// Power (Hölder) mean of exponent `alpha`; `alpha = 0` is geometric.
    Power { alpha: f64 },
    /// Gini mean `G_{α,β}`: ratio of power sums when α ≠ β.
    Gini { alpha: f64, beta: f64 },
    /// Quasiarithmetic mean with a strictly monotone generator.
    QuasiArithmetic(GeneratorFunction),
    /// Bajraktarević mean with numerator `f` and positive weight `g`,
    /// where f/g is strictly increasing.
    Bajraktarevic {
        f: GeneratorFunction,
        g: GeneratorFunction,
        /// The equivalent deviation E(x,u) = g(u)f(x) − f(u)g(x), used for
        /// evaluation.
        deviation: DeviationFunction,
    },
    /// Implicit mean solving Σ E(xᵢ, u) = 0.
    Quasideviation(DeviationFunction),
    /// Smallest coordinate — a non-strict mean, useful as a degenerate
    /// iteration component.
    Min,
    /// Largest coordinate — a non-strict mean.
    Max,
}

/// Declarative description of one mean: family, parameters, and domain.
#[derive(Clone)]
pub struct MeanSpec {
    family: MeanFamily,
    domain: Interval,
}

impl MeanSpec {
    /// Arithmetic mean on ℝ.
    pub fn arithmetic() -> Self {
        Self {
            family: MeanFamily::Arithmetic,
            domain: Interval::whole(),
        }
    }

    /// Geometric mean on (0, ∞).
    pub fn geometric() -> Self {
        Self {
            family: MeanFamily::Geometric,
            domain: Interval::positive(),
        }
    }

    /// Power mean of exponent `alpha` on (0, ∞).
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "power mean exponent must be finite, got {alpha}"
            )));
        }
        Ok(Self {
            family: MeanFamily::Power { alpha },
            domain: Interval::positive(),
        })
    }

    /// Gini mean `G_{α,β}` on (0, ∞).
    pub fn gini(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gini parameters must be finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self {
            family: MeanFamily::Gini { alpha, beta },
            domain: Interval::positive(),
        })
    }

    /// Quasiarithmetic mean; the generator must carry a verified
    /// strict-monotonicity claim.
    pub fn quasi_arithmetic(gen: GeneratorFunction) -> Result<Self> {
        if !gen.strictly_monotone() {
            return Err(Error::InvalidConfig(format!(
                "quasiarithmetic mean requires a strictly monotone generator; '{}' makes no such claim",
                gen.name()
            )));
        }
        let domain = gen.domain();
        Ok(Self {
            family: MeanFamily::QuasiArithmetic(gen),
            domain,
        })
    }

    /// Bajraktarević mean `B_{f,g}`. Checks that g is positive and f/g
    /// strictly increasing on a sample grid.
    pub fn bajraktarevic(f: GeneratorFunction, g: GeneratorFunction) -> Result<Self> {
        let deviation = DeviationFunction::bajraktarevic(&f, &g)?;
        let domain = deviation.domain();
        Ok(Self {
            family: MeanFamily::Bajraktarevic { f, g, deviation },
            domain,
        })
    }

    /// Quasideviation mean `D_E`.
    pub fn quasideviation(e: DeviationFunction) -> Self {
        let domain = e.domain();
        Self {
            family: MeanFamily::Quasideviation(e),
            domain,
        }
    }

    /// Minimum of the coordinates (non-strict).
    pub fn min() -> Self {
        Self {
            family: MeanFamily::Min,
            domain: Interval::whole(),
        }
    }

    /// Maximum of the coordinates (non-strict).
    pub fn max() -> Self {
        Self {
            family: MeanFamily::Max,
            domain: Interval::whole(),
        }
    }

    /// Restricts the domain to a subinterval (e.g. to keep probes away
    /// from a singularity). The new domain must lie inside the current one.
    pub fn with_domain(mut self, domain: Interval) -> Result<Self> {
        if domain.lo < self.domain.lo || domain.hi > self.domain.hi {
            return Err(Error::InvalidConfig(format!(
                "domain {domain} is not a subinterval of {}",
                self.domain
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    /// The family with its parameters.
    pub fn family(&self) -> &MeanFamily {
        &self.family
    }

    /// The interval the mean is evaluated on.
    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Compact label, e.g. `gini(2,1)` or `qa(log)`.
    pub fn name(&self) -> String {
        match &self.family {
            MeanFamily::Arithmetic => "arithmetic".into(),
            MeanFamily::Geometric => "geometric".into(),
            MeanFamily::Power { alpha } => format!("power({})", fmt_param(*alpha)),
            MeanFamily::Gini { alpha, beta } => {
                format!("gini({},{})", fmt_param(*alpha), fmt_param(*beta))
            }
            MeanFamily::QuasiArithmetic(g) => format!("qa({})", g.name()),
            MeanFamily::Bajraktarevic { f, g, .. } => {
                format!("bajraktarevic({},{})", f.name(), g.name())
            }
            MeanFamily::Quasideviation(e) => format!("quasideviation({})", e.name()),
            MeanFamily::Min => "min".into(),
            MeanFamily::Max => "max".into(),
        }
    }
}

impl std::fmt::Debug for MeanSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MeanSpec({} on {})", self.name(), self.domain)
    }
}

impl std::fmt::Display for MeanSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl Mean for MeanSpec {
    fn eval(&self, x: &[Real]) -> Result<Real> {
        eval_mean(self, x)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        self.name()
    }
}

/// Working precision for a vector: the largest operand precision,
/// floored at 64 bits.
fn working_bits(x: &[Real]) -> u32 {
    x.iter().map(Real::prec).max().unwrap_or(64).max(64)
}

/// Evaluates `spec` on a nonempty vector with entries strictly inside the
/// domain. The result lies between min(x) and max(x) and equals x₁ when all
/// entries are equal.
pub fn eval_mean(spec: &MeanSpec, x: &[Real]) -> Result<Real> {
    if x.is_empty() {
        return Err(Error::InvalidArity(0));
    }
    for xi in x {
        if !spec.domain.contains(xi) {
            return Err(Error::Domain(format!(
                "input {} outside domain {} of {}",
                xi.to_decimal(Some(20)),
                spec.domain,
                spec.name()
            )));
        }
    }
    let w = working_bits(x);
    if x.iter().all(|xi| xi == &x[0]) {
        return Ok(x[0].with_prec(w));
    }

    match &spec.family {
        MeanFamily::Arithmetic => {
            let n = Real::from_usize(x.len(), w);
            Ok(Real::sum(x) / n)
        }
        MeanFamily::Geometric => gini_equal_params(0.0, x, w),
        MeanFamily::Power { alpha } => {
            if *alpha == 0.0 {
                gini_equal_params(0.0, x, w)
            } else {
                gini_distinct_params(*alpha, 0.0, x, w)
            }
        }
        MeanFamily::Gini { alpha, beta } => {
            if alpha == beta {
                gini_equal_params(*alpha, x, w)
            } else {
                gini_distinct_params(*alpha, *beta, x, w)
            }
        }
        MeanFamily::QuasiArithmetic(gen) => {
            let mut fx = Vec::with_capacity(x.len());
            for xi in x {
                fx.push(gen.eval(xi)?);
            }
            let target = Real::sum(&fx) / Real::from_usize(x.len(), w);
            let lo = Real::min_of(x).with_prec(w);
            let hi = Real::max_of(x).with_prec(w);
            qa_invert(gen, &target, &lo, &hi)
        }
        MeanFamily::Bajraktarevic { deviation, .. } => qd_solve(deviation, x),
        MeanFamily::Quasideviation(e) => qd_solve(e, x),
        MeanFamily::Min => Ok(Real::min_of(x).with_prec(w)),
        MeanFamily::Max => Ok(Real::max_of(x).with_prec(w)),
    }
}

/// Gini mean with α ≠ β: (Σxᵢ^α / Σxᵢ^β)^(1/(α−β)), the ratio-of-power-sums
/// form. Used verbatim even for |α−β| < 2^-40; nearly equal parameters make
/// the exponent 1/(α−β) large and the evaluation ill-conditioned, which is
/// accepted rather than hidden behind blending.
fn gini_distinct_params(alpha: f64, beta: f64, x: &[Real], w: u32) -> Result<Real> {
    let a = Real::from_f64(alpha, w);
    let b = Real::from_f64(beta, w);
    let mut sum_a = Real::zero(w);
    let mut sum_b = Real::zero(w);
    for xi in x {
        sum_a = sum_a + xi.pow(&a)?;
        sum_b = sum_b + xi.pow(&b)?;
    }
    let ratio = sum_a.checked_div(&sum_b)?;
    let inv_gap = Real::one(w) / (a - b);
    ratio.pow(&inv_gap)
}

/// Gini mean with α = β: exp(Σxᵢ^α ln xᵢ / Σxᵢ^α), in log space. α = 0 is
/// the geometric mean.
fn gini_equal_params(alpha: f64, x: &[Real], w: u32) -> Result<Real> {
    let a = Real::from_f64(alpha, w);
    let mut num = Real::zero(w);
    let mut den = Real::zero(w);
    for xi in x {
        let weight = xi.pow(&a)?;
        num = num + &weight * &xi.ln()?;
        den = den + weight;
    }
    Ok(num.checked_div(&den)?.exp())
}

/// One axiom violation found by [`probe_mean_axioms`].
#[derive(Debug, Clone, Serialize)]
pub struct AxiomViolation {
    /// Which axiom: `mean-property`, `symmetry`, or `repetition-invariance`.
    pub axiom: &'static str,
    /// Index of the offending sample vector.
    pub sample_index: usize,
    /// What was observed.
    pub detail: String,
}

/// Outcome of fuzzing a mean against the mean-property, symmetry, and
/// repetition-invariance axioms.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    /// Total individual checks executed.
    pub checks_run: usize,
    /// Violations found; empty for a well-behaved mean.
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    /// True when no violation was found.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Permutations exercised per sample: all 6 for length ≤ 3, otherwise a
/// fixed set of 6 (reversal, rotations, adjacent swaps).
fn sample_permutations(p: usize) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..p).collect();
    if p <= 3 {
        let mut all = Vec::new();
        let mut idx = id.clone();
        permute_into(&mut idx, 0, &mut all);
        all
    } else {
        let mut reversed = id.clone();
        reversed.reverse();
        let rot1: Vec<usize> = (0..p).map(|i| (i + 1) % p).collect();
        let rot2: Vec<usize> = (0..p).map(|i| (i + 2) % p).collect();
        let mut swap_first = id.clone();
        swap_first.swap(0, 1);
        let mut swap_last = id.clone();
        swap_last.swap(p - 2, p - 1);
        vec![reversed, rot1, rot2, swap_first, swap_last, id]
    }
}

fn permute_into(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute_into(idx, k + 1, out);
        idx.swap(k, i);
    }
}

/// Fuzzes `mean` on the given sample vectors: internality (min ≤ M ≤ max),
/// symmetry under sampled permutations, and repetition invariance for
/// repeat counts q ∈ {2, 3}. Violations are reported, not raised; only
/// evaluation failures (domain escapes) surface as errors.
pub fn probe_mean_axioms(mean: &dyn Mean, samples: &[Vec<Real>]) -> Result<AxiomReport> {
    let mut report = AxiomReport {
        checks_run: 0,
        violations: Vec::new(),
    };
    for (si, x) in samples.iter().enumerate() {
        if x.is_empty() {
            return Err(Error::InvalidArity(0));
        }
        let w = working_bits(x);
        let cfg = PrecisionConfig::new(w)?;
        let scale = {
            let m = Real::max_of(x).abs();
            if m > 1.0 {
                m
            } else {
                Real::one(w)
            }
        };
        // Root-finding families stop at the guard tolerance; give the
        // comparison an extra 2^8 headroom above that.
        let tol = cfg.abs_tolerance(&scale) * 256u32;

        let value = mean.eval(x)?;
        report.checks_run += 1;
        let lo = Real::min_of(x);
        let hi = Real::max_of(x);
        if value < lo - &tol || value > hi + &tol {
            report.violations.push(AxiomViolation {
                axiom: "mean-property",
                sample_index: si,
                detail: format!(
                    "M = {} outside [{}, {}]",
                    value.to_decimal(Some(20)),
                    lo.to_decimal(Some(20)),
                    hi.to_decimal(Some(20))
                ),
            });
        }

        for perm in sample_permutations(x.len()) {
            let permuted: Vec<Real> = perm.iter().map(|&i| x[i].clone()).collect();
            let pv = mean.eval(&permuted)?;
            report.checks_run += 1;
            if (&pv - &value).abs() > tol {
                report.violations.push(AxiomViolation {
                    axiom: "symmetry",
                    sample_index: si,
                    detail: format!(
                        "permutation {perm:?} changed the value by {}",
                        (&pv - &value).abs().to_decimal(Some(6))
                    ),
                });
            }
        }

        for q in [2usize, 3] {
            let mut repeated = Vec::with_capacity(x.len() * q);
            for xi in x {
                for _ in 0..q {
                    repeated.push(xi.clone());
                }
            }
            let rv = mean.eval(&repeated)?;
            report.checks_run += 1;
            if (&rv - &value).abs() > tol {
                report.violations.push(AxiomViolation {
                    axiom: "repetition-invariance",
                    sample_index: si,
                    detail: format!(
                        "repeating entries {q} times moved the value by {}",
                        (&rv - &value).abs().to_decimal(Some(6))
                    ),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
