//! Generator functions f (with f′, f″) and deviation functions E(x,u)
//! (with ∂₁E, ∂₁²E), including the built-in catalog.
//!
//! Validity is spot-checked on a sample grid at construction rather than
//! proven; a violation that slips through the grid is caught later by the
//! solvers, which raise errors naming the violated axiom.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::means::{fmt_param, Interval};
use crate::precision::{PrecisionConfig, Real};

type Unary = Arc<dyn Fn(&Real) -> Result<Real> + Send + Sync>;
type Binary = Arc<dyn Fn(&Real, &Real) -> Result<Real> + Send + Sync>;

/// Precision used for construction-time grid checks.
const CHECK_BITS: u32 = 256;
/// Sample count for the monotonicity / derivative grid.
const GRID_POINTS: usize = 64;
/// Sample count per axis for the deviation sign grid.
const DEV_GRID_POINTS: usize = 16;

/// A generator f with its first two derivatives.
///
/// Quasiarithmetic means need f strictly monotone with nowhere-vanishing f′;
/// Bajraktarević means only need the ratio f/g monotone, so members like
/// x·log x (not monotone on all of (0,∞)) are admitted with
/// `strictly_monotone = false` and are rejected by the quasiarithmetic
/// constructor.
#[derive(Clone)]
pub struct GeneratorFunction {
    name: String,
    domain: Interval,
    eval: Unary,
    d1: Unary,
    d2: Unary,
    strictly_monotone: bool,
    /// +1 increasing, −1 decreasing, 0 when no monotonicity is claimed.
    direction: i8,
}

impl GeneratorFunction {
    /// Wraps user closures. When `strictly_monotone` is claimed, the claim
    /// is spot-checked on a 64-point grid: strictly ordered values and a
    /// nowhere-zero f′ of the matching sign.
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        eval: impl Fn(&Real) -> Result<Real> + Send + Sync + 'static,
        d1: impl Fn(&Real) -> Result<Real> + Send + Sync + 'static,
        d2: impl Fn(&Real) -> Result<Real> + Send + Sync + 'static,
        strictly_monotone: bool,
    ) -> Result<Self> {
        let mut gen = Self {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            strictly_monotone,
            direction: 0,
        };
        if strictly_monotone {
            gen.direction = gen.checked_direction()?;
        }
        Ok(gen)
    }

    /// Catalog name (or the normalized expression it was parsed from).
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Domain of definition.
    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Whether a verified strict-monotonicity claim is attached.
    pub fn strictly_monotone(&self) -> bool {
        self.strictly_monotone
    }

    /// +1 for increasing, −1 for decreasing, 0 when unclaimed.
    pub fn direction(&self) -> i8 {
        self.direction
    }

    /// f(x); errors when x is outside the domain.
    pub fn eval(&self, x: &Real) -> Result<Real> {
        self.check_domain(x)?;
        (self.eval)(x)
    }

    /// f′(x).
    pub fn d1(&self, x: &Real) -> Result<Real> {
        self.check_domain(x)?;
        (self.d1)(x)
    }

    /// f″(x).
    pub fn d2(&self, x: &Real) -> Result<Real> {
        self.check_domain(x)?;
        (self.d2)(x)
    }

    fn check_domain(&self, x: &Real) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!(
                "argument {} outside domain {} of generator '{}'",
                x.to_decimal(Some(20)),
                self.domain,
                self.name
            )));
        }
        Ok(())
    }

    /// Determines the monotone direction on the sample grid, failing on any
    /// ordering break or a vanishing derivative.
    fn checked_direction(&self) -> Result<i8> {
        let grid = self.domain.probe_grid(GRID_POINTS, CHECK_BITS);
        let cfg = PrecisionConfig::new(CHECK_BITS)?;
        let values: Vec<Real> = grid.iter().map(|p| (self.eval)(p)).collect::<Result<_>>()?;
        let slopes: Vec<Real> = grid.iter().map(|p| (self.d1)(p)).collect::<Result<_>>()?;

        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = values.windows(2).all(|w| w[0] > w[1]);
        if !increasing && !decreasing {
            let at = grid
                .iter()
                .zip(values.windows(2))
                .find(|(_, w)| if increasing { false } else { w[0] >= w[1] })
                .map(|(p, _)| p.to_decimal(Some(8)))
                .unwrap_or_else(|| "grid".into());
            return Err(Error::GeneratorAxiom {
                name: self.name.clone(),
                axiom: "strictly monotone on sample grid",
                at,
            });
        }

        let slope_scale = Real::max_of(&slopes.iter().map(Real::abs).collect::<Vec<_>>()).clone();
        for (p, s) in grid.iter().zip(&slopes) {
            if slope_scale.is_zero() || cfg.effectively_zero(s, &slope_scale) {
                return Err(Error::GeneratorAxiom {
                    name: self.name.clone(),
                    axiom: "nowhere vanishing first derivative",
                    at: p.to_decimal(Some(8)),
                });
            }
            let expect = if increasing { 1 } else { -1 };
            if s.signum() != expect {
                return Err(Error::GeneratorAxiom {
                    name: self.name.clone(),
                    axiom: "derivative sign matches monotone direction",
                    at: p.to_decimal(Some(8)),
                });
            }
        }
        Ok(if increasing { 1 } else { -1 })
    }

    /// Identity generator x on ℝ.
    pub fn identity() -> Self {
        Self::new(
            "x",
            Interval::whole(),
            |x| Ok(x.clone()),
            |x| Ok(Real::one(x.prec())),
            |x| Ok(Real::zero(x.prec())),
            true,
        )
        .expect("identity generator is monotone")
    }

    /// Constant generator c on ℝ (not monotone; Bajraktarević weight use).
    pub fn constant(c: f64) -> Self {
        Self::new(
            fmt_param(c),
            Interval::whole(),
            move |x| Ok(Real::from_f64(c, x.prec())),
            |x| Ok(Real::zero(x.prec())),
            |x| Ok(Real::zero(x.prec())),
            false,
        )
        .expect("constant generator construction cannot fail")
    }

    /// Natural logarithm on (0, ∞).
    pub fn log() -> Self {
        Self::new(
            "log",
            Interval::positive(),
            |x| x.ln(),
            |x| Real::one(x.prec()).checked_div(x),
            |x| (-Real::one(x.prec())).checked_div(&(x * x)),
            true,
        )
        .expect("log generator is monotone")
    }

    /// Exponential on ℝ.
    pub fn exp() -> Self {
        Self::new(
            "exp",
            Interval::whole(),
            |x| Ok(x.exp()),
            |x| Ok(x.exp()),
            |x| Ok(x.exp()),
            true,
        )
        .expect("exp generator is monotone")
    }

    /// Power x^α on (0, ∞), α ≠ 0 (α = 0 would be constant).
    pub fn power(alpha: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "power generator needs a finite nonzero exponent, got {alpha}"
            )));
        }
        let name = if alpha == 1.0 {
            "x".to_string()
        } else {
            format!("x^{}", fmt_param(alpha))
        };
        Self::new(
            name,
            Interval::positive(),
            move |x| x.pow(&Real::from_f64(alpha, x.prec())),
            move |x| {
                let p = x.prec();
                Ok(Real::from_f64(alpha, p) * x.pow(&Real::from_f64(alpha - 1.0, p))?)
            },
            move |x| {
                let p = x.prec();
                Ok(Real::from_f64(alpha * (alpha - 1.0), p)
                    * x.pow(&Real::from_f64(alpha - 2.0, p))?)
            },
            true,
        )
    }

    /// x·log x on (0, ∞). Not monotone there (minimum at 1/e), so carries
    /// no monotonicity claim; usable as a Bajraktarević numerator.
    pub fn xlogx() -> Self {
        Self::new(
            "xlogx",
            Interval::positive(),
            |x| Ok(x * &x.ln()?),
            |x| Ok(x.ln()? + Real::one(x.prec())),
            |x| Real::one(x.prec()).checked_div(x),
            false,
        )
        .expect("xlogx generator construction cannot fail")
    }

    /// Linear combination Σ cᵢ·fᵢ on the intersection of the part domains.
    /// Monotonicity is re-probed on the grid: the combination claims it
    /// exactly when the sampled values are strictly ordered.
    pub fn combine(name: impl Into<String>, terms: Vec<(f64, GeneratorFunction)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidConfig(
                "generator combination needs at least one term".into(),
            ));
        }
        let mut domain = terms[0].1.domain;
        for (_, g) in &terms[1..] {
            domain = domain.intersect(&g.domain)?;
        }
        let name = name.into();
        let parts: Arc<Vec<(f64, GeneratorFunction)>> = Arc::new(terms);

        let mk = |pick: fn(&GeneratorFunction) -> &Unary, parts: Arc<Vec<(f64, GeneratorFunction)>>| {
            move |x: &Real| -> Result<Real> {
                let w = x.prec().max(64);
                let mut acc = Real::zero(w);
                for (c, g) in parts.iter() {
                    acc = acc + Real::from_f64(*c, w) * pick(g)(x)?;
                }
                Ok(acc)
            }
        };
        let eval = mk(|g| &g.eval, Arc::clone(&parts));
        let d1 = mk(|g| &g.d1, Arc::clone(&parts));
        let d2 = mk(|g| &g.d2, Arc::clone(&parts));

        // Probe first without a claim, then attach one if the grid supports it.
        let unclaimed = Self {
            name: name.clone(),
            domain,
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            strictly_monotone: false,
            direction: 0,
        };
        match unclaimed.checked_direction() {
            Ok(dir) => Ok(Self {
                strictly_monotone: true,
                direction: dir,
                ..unclaimed
            }),
            Err(_) => Ok(unclaimed),
        }
    }
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GeneratorFunction('{}' on {}, monotone={})",
            self.name, self.domain, self.strictly_monotone
        )
    }
}

/// A deviation function E(x, u) with its first two x-partials.
///
/// The sign condition (D1), sign E(x,u) = sign(x−u), is spot-checked on a
/// 16×16 grid at construction together with its diagonal consequence
/// E(x,x) = 0. Partials in u are deliberately not required: the residuum
/// needs only ∂₁E, ∂₁²E on the diagonal.
#[derive(Clone)]
pub struct DeviationFunction {
    name: String,
    domain: Interval,
    eval: Binary,
    d1: Binary,
    d11: Binary,
}

impl DeviationFunction {
    /// Wraps user closures and runs the (D1) grid check.
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        eval: impl Fn(&Real, &Real) -> Result<Real> + Send + Sync + 'static,
        d1: impl Fn(&Real, &Real) -> Result<Real> + Send + Sync + 'static,
        d11: impl Fn(&Real, &Real) -> Result<Real> + Send + Sync + 'static,
    ) -> Result<Self> {
        let dev = Self {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d11: Arc::new(d11),
        };
        dev.check_sign_condition()?;
        Ok(dev)
    }

    /// Catalog name / expression label.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Domain of both arguments.
    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// E(x, u).
    pub fn eval(&self, x: &Real, u: &Real) -> Result<Real> {
        self.check_domain(x)?;
        self.check_domain(u)?;
        (self.eval)(x, u)
    }

    /// ∂₁E(x, u).
    pub fn d1(&self, x: &Real, u: &Real) -> Result<Real> {
        self.check_domain(x)?;
        self.check_domain(u)?;
        (self.d1)(x, u)
    }

    /// ∂₁²E(x, u).
    pub fn d11(&self, x: &Real, u: &Real) -> Result<Real> {
        self.check_domain(x)?;
        self.check_domain(u)?;
        (self.d11)(x, u)
    }

    fn check_domain(&self, v: &Real) -> Result<()> {
        if !self.domain.contains(v) {
            return Err(Error::Domain(format!(
                "argument {} outside domain {} of deviation '{}'",
                v.to_decimal(Some(20)),
                self.domain,
                self.name
            )));
        }
        Ok(())
    }

    /// (D1) on the grid: strict sign match off the diagonal, zero on it.
    fn check_sign_condition(&self) -> Result<()> {
        let grid = self.domain.probe_grid(DEV_GRID_POINTS, CHECK_BITS);
        let cfg = PrecisionConfig::new(CHECK_BITS)?;
        for x in &grid {
            // Scale for the diagonal zero check: the largest |E| on this row.
            let mut row_scale = Real::zero(CHECK_BITS);
            for u in &grid {
                let e = (self.eval)(x, u)?;
                let expected = x.total_cmp(u) as i32;
                if expected != 0 && e.signum() != expected.signum() {
                    return Err(Error::DeviationAxiom {
                        axiom: "sign E(x,u) = sign(x-u)",
                        at: format!(
                            "(x, u) = ({}, {})",
                            x.to_decimal(Some(8)),
                            u.to_decimal(Some(8))
                        ),
                    });
                }
                if e.abs() > row_scale {
                    row_scale = e.abs();
                }
            }
            let diag = (self.eval)(x, x)?;
            if !row_scale.is_zero() && !cfg.effectively_zero(&diag, &row_scale) {
                return Err(Error::DeviationAxiom {
                    axiom: "E(x,x) = 0",
                    at: format!("x = {}", x.to_decimal(Some(8))),
                });
            }
        }
        Ok(())
    }

    /// E(x,u) = x − u: the arithmetic mean as a deviation mean.
    pub fn linear() -> Self {
        Self::new(
            "linear",
            Interval::whole(),
            |x, u| Ok(x - u),
            |x, u| Ok(Real::one(x.prec().max(u.prec()))),
            |x, u| Ok(Real::zero(x.prec().max(u.prec()))),
        )
        .expect("linear deviation satisfies (D1)")
    }

    /// E(x,u) = ±(f(x) − f(u)) for a strictly monotone generator, oriented
    /// so that (D1) holds; its mean is the quasiarithmetic mean of f.
    pub fn difference(gen: &GeneratorFunction) -> Result<Self> {
        if !gen.strictly_monotone() {
            return Err(Error::InvalidConfig(format!(
                "difference deviation requires a strictly monotone generator; '{}' makes no such claim",
                gen.name()
            )));
        }
        let sign = f64::from(gen.direction());
        let name = format!("difference:{}", gen.name());
        let (ge, gd1, gd2) = (gen.clone(), gen.clone(), gen.clone());
        Self::new(
            name,
            gen.domain(),
            move |x, u| {
                let w = x.prec().max(u.prec());
                Ok(Real::from_f64(sign, w) * (ge.eval(x)? - ge.eval(u)?))
            },
            move |x, u| {
                let w = x.prec().max(u.prec());
                Ok(Real::from_f64(sign, w) * gd1.d1(x)?)
            },
            move |x, u| {
                let w = x.prec().max(u.prec());
                Ok(Real::from_f64(sign, w) * gd2.d2(x)?)
            },
        )
    }

    /// E(x,u) = g(u)f(x) − f(u)g(x); its mean is the Bajraktarević mean
    /// B_{f,g}. Requires g > 0 and f/g strictly increasing (checked on the
    /// grid before the generic (D1) check).
    pub fn bajraktarevic(f: &GeneratorFunction, g: &GeneratorFunction) -> Result<Self> {
        let domain = f.domain().intersect(&g.domain())?;
        let grid = domain.probe_grid(GRID_POINTS, CHECK_BITS);
        let mut prev_ratio: Option<(Real, Real)> = None;
        for p in &grid {
            let gv = g.eval(p)?;
            if !gv.is_positive() {
                return Err(Error::GeneratorAxiom {
                    name: g.name().to_string(),
                    axiom: "positive weight on sample grid",
                    at: p.to_decimal(Some(8)),
                });
            }
            let ratio = f.eval(p)?.checked_div(&gv)?;
            if let Some((prev_p, prev_r)) = prev_ratio {
                if prev_r >= ratio {
                    return Err(Error::GeneratorAxiom {
                        name: format!("{}/{}", f.name(), g.name()),
                        axiom: "strictly increasing ratio on sample grid",
                        at: prev_p.to_decimal(Some(8)),
                    });
                }
            }
            prev_ratio = Some((p.clone(), ratio));
        }

        let name = format!("bajraktarevic:{},{}", f.name(), g.name());
        let (f0, g0) = (f.clone(), g.clone());
        let (f1, g1) = (f.clone(), g.clone());
        let (f2, g2) = (f.clone(), g.clone());
        Self::new(
            name,
            domain,
            move |x, u| Ok(g0.eval(u)? * f0.eval(x)? - f0.eval(u)? * g0.eval(x)?),
            move |x, u| Ok(g1.eval(u)? * f1.d1(x)? - f1.eval(u)? * g1.d1(x)?),
            move |x, u| Ok(g2.eval(u)? * f2.d2(x)? - f2.eval(u)? * g2.d2(x)?),
        )
    }
}

impl fmt::Debug for DeviationFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DeviationFunction('{}' on {})", self.name, self.domain)
    }
}
