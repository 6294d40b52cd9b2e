//! Configurable-precision real arithmetic.
//!
//! [`Real`] wraps an MPFR binary floating-point number together with its
//! working precision. All binary operations between two `Real`s are carried
//! out at the maximum of the operand precisions with a single to-nearest
//! rounding, so results are deterministic for a fixed precision and operand
//! order. [`PrecisionConfig`] carries the working/guard bit split used for
//! tolerance budgeting by the solvers and the iteration engine.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default working precision for residuum estimation.
pub const DEFAULT_RESIDUUM_BITS: u32 = 1024;

/// Default working precision for convergence-ratio studies. Each Gauss step
/// roughly squares the variance, so this supports on the order of ten usable
/// ratio points before the precision floor.
pub const DEFAULT_ITERATION_BITS: u32 = 8192;

/// Default guard bits sacrificed to roundoff before a quantity is declared
/// zero relative to its scale.
pub const DEFAULT_GUARD_BITS: u32 = 32;

/// Working/guard precision budget.
///
/// `guard_bits` is the number of low-order bits written off as roundoff:
/// a value `v` counts as zero relative to a positive `scale` once
/// `|v| <= scale * 2^(guard_bits - working_bits)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionConfig {
    working_bits: u32,
    guard_bits: u32,
}

impl PrecisionConfig {
    /// Creates a config with the given working precision and the default
    /// guard allowance (capped so the invariants hold).
    pub fn new(working_bits: u32) -> Result<Self> {
        let guard = DEFAULT_GUARD_BITS.min((working_bits / 2).saturating_sub(2));
        Self::with_guard(working_bits, guard)
    }

    /// Creates a config with an explicit guard allowance.
    pub fn with_guard(working_bits: u32, guard_bits: u32) -> Result<Self> {
        if working_bits < 64 {
            return Err(Error::InvalidConfig(format!(
                "working_bits must be >= 64, got {working_bits}"
            )));
        }
        if guard_bits == 0 || guard_bits * 2 >= working_bits {
            return Err(Error::InvalidConfig(format!(
                "guard_bits must satisfy 0 < guard_bits < working_bits/2, got {guard_bits}"
            )));
        }
        Ok(Self {
            working_bits,
            guard_bits,
        })
    }

    /// Working precision in bits.
    pub fn working_bits(&self) -> u32 {
        self.working_bits
    }

    /// Guard bits.
    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// The relative zero threshold `2^(guard_bits - working_bits)`.
    pub fn guard_eps(&self) -> Real {
        Real::exp2i(i64::from(self.guard_bits) - i64::from(self.working_bits), 64)
    }

    /// Absolute tolerance at a given positive scale:
    /// `scale * 2^(guard_bits - working_bits)`.
    ///
    /// Panics if `scale` is not strictly positive.
    pub fn abs_tolerance(&self, scale: &Real) -> Real {
        assert!(
            scale.is_finite() && scale.is_positive(),
            "tolerance scale must be positive"
        );
        let shift = self.working_bits - self.guard_bits;
        Real(Float::with_val(scale.prec(), &scale.0 >> shift))
    }

    /// True iff `v` is zero up to roundoff relative to `scale`:
    /// `|v| <= scale * 2^(guard_bits - working_bits)`.
    ///
    /// Panics if `scale` is not strictly positive.
    pub fn effectively_zero(&self, v: &Real, scale: &Real) -> bool {
        v.abs() <= self.abs_tolerance(scale)
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::new(DEFAULT_RESIDUUM_BITS).expect("default precision config is valid")
    }
}

/// An arbitrary-precision real number with an explicit binary precision.
///
/// Values are immutable; every operation produces a fresh `Real`. All
/// rounding is to-nearest. Binary operations run at the maximum of the two
/// operand precisions.
#[derive(Debug, Clone)]
pub struct Real(Float);

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let prec = self.prec().max(rhs.prec());
                Real(Float::with_val(prec, std::ops::$trait::$method(&self.0, &rhs.0)))
            }
        }
        impl std::ops::$trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                std::ops::$trait::$method(self, &rhs)
            }
        }
        impl std::ops::$trait<u32> for &Real {
            type Output = Real;
            fn $method(self, rhs: u32) -> Real {
                Real(Float::with_val(
                    self.prec(),
                    std::ops::$trait::$method(&self.0, rhs),
                ))
            }
        }
        impl std::ops::$trait<u32> for Real {
            type Output = Real;
            fn $method(self, rhs: u32) -> Real {
                std::ops::$trait::$method(&self, rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl std::ops::Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.prec(), -&self.0))
    }
}

impl std::ops::Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl Real {
    /// Binary precision in bits.
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Zero at the given precision.
    pub fn zero(prec: u32) -> Real {
        Real(Float::with_val(prec, 0))
    }

    /// One at the given precision.
    pub fn one(prec: u32) -> Real {
        Real(Float::with_val(prec, 1))
    }

    /// `2^e` at the given precision (exact).
    pub fn exp2i(e: i64, prec: u32) -> Real {
        Real(Float::with_val(
            prec,
            Float::i_exp(1, i32::try_from(e).expect("exponent fits in i32")),
        ))
    }

    /// Converts an `f64` exactly (every finite double is representable at
    /// `prec >= 53`).
    pub fn from_f64(v: f64, prec: u32) -> Real {
        Real(Float::with_val(prec, v))
    }

    /// Converts an integer exactly.
    pub fn from_i64(v: i64, prec: u32) -> Real {
        Real(Float::with_val(prec, v))
    }

    /// Converts an unsigned integer exactly.
    pub fn from_usize(v: usize, prec: u32) -> Real {
        Real(Float::with_val(prec, v as u64))
    }

    /// Parses a decimal string, rounding to-nearest at `prec` bits.
    /// Rejects empty input and non-finite values.
    pub fn from_decimal(s: &str, prec: u32) -> Result<Real> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::Parse(format!("invalid decimal number {s:?}: {e}")))?;
        let v = Float::with_val(prec, parsed);
        if !v.is_finite() {
            return Err(Error::Parse(format!(
                "decimal number {s:?} is not a finite real"
            )));
        }
        Ok(Real(v))
    }

    /// Re-rounds the value to `prec` bits (to-nearest when narrowing).
    pub fn with_prec(&self, prec: u32) -> Real {
        Real(Float::with_val(prec, &self.0))
    }

    /// Wraps a raw backend value, bridging to backend-native test oracles.
    #[cfg(test)]
    pub(crate) fn from_float(v: Float) -> Real {
        Real(v)
    }

    /// Nearest `f64` (for diagnostics and low-stakes reporting only).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// True for ordinary finite values.
    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// True iff exactly zero.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// True iff strictly positive.
    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    /// True iff strictly negative.
    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Sign as -1, 0, or 1.
    pub fn signum(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_sign_negative() {
            -1
        } else {
            1
        }
    }

    /// Total order; panics on NaN (which the public constructors never
    /// produce).
    pub fn total_cmp(&self, other: &Real) -> Ordering {
        self.partial_cmp(other).expect("Real values are never NaN")
    }

    /// Absolute value (exact).
    pub fn abs(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    /// Exponential, correctly rounded at the operand precision.
    pub fn exp(&self) -> Real {
        Real(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    /// Natural logarithm; errors on a non-positive argument.
    pub fn ln(&self) -> Result<Real> {
        if !self.is_positive() {
            return Err(Error::Domain(format!(
                "log requires a positive argument, got {}",
                self.to_decimal(Some(20))
            )));
        }
        Ok(Real(Float::with_val(self.prec(), self.0.ln_ref())))
    }

    /// Square root; errors on a negative argument.
    pub fn sqrt(&self) -> Result<Real> {
        if self.is_negative() {
            return Err(Error::Domain(format!(
                "sqrt requires a nonnegative argument, got {}",
                self.to_decimal(Some(20))
            )));
        }
        Ok(Real(Float::with_val(self.prec(), self.0.sqrt_ref())))
    }

    /// Real power `self^exponent`; errors when the result is not a real
    /// number (negative base with non-integer exponent, 0^negative).
    pub fn pow(&self, exponent: &Real) -> Result<Real> {
        let prec = self.prec().max(exponent.prec());
        let v = Float::with_val(prec, (&self.0).pow(&exponent.0));
        if v.is_nan() || v.is_infinite() {
            return Err(Error::Domain(format!(
                "pow({}, {}) is not a finite real",
                self.to_decimal(Some(20)),
                exponent.to_decimal(Some(20))
            )));
        }
        Ok(Real(v))
    }

    /// Division that rejects an exactly zero divisor.
    pub fn checked_div(&self, divisor: &Real) -> Result<Real> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self / divisor)
    }

    /// Reciprocal; errors on exact zero.
    pub fn recip(&self) -> Result<Real> {
        Real::one(self.prec()).checked_div(self)
    }

    /// One unit in the last place of `self` (uses the magnitude's binary
    /// exponent; zero has no ulp and yields `2^-prec`).
    pub fn ulp(&self) -> Real {
        let exp = i64::from(self.0.get_exp().unwrap_or(0));
        Real::exp2i(exp - i64::from(self.prec()), 64)
    }

    /// Sum of a nonempty slice at the maximum operand precision,
    /// accumulated left to right.
    pub fn sum(values: &[Real]) -> Real {
        assert!(!values.is_empty(), "sum of an empty slice");
        let prec = values.iter().map(Real::prec).max().unwrap();
        let mut acc = Float::with_val(prec, 0);
        for v in values {
            acc += &v.0;
        }
        Real(acc)
    }

    /// Maximum of a nonempty slice.
    pub fn max_of(values: &[Real]) -> &Real {
        values
            .iter()
            .max_by(|a, b| a.total_cmp(b))
            .expect("max of an empty slice")
    }

    /// Minimum of a nonempty slice.
    pub fn min_of(values: &[Real]) -> &Real {
        values
            .iter()
            .min_by(|a, b| a.total_cmp(b))
            .expect("min of an empty slice")
    }

    /// Formats as a decimal string. `digits = None` prints enough digits to
    /// re-read the exact value at the same precision; otherwise the value is
    /// rounded to the requested significant digit count.
    pub fn to_decimal(&self, digits: Option<usize>) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        if !self.0.is_finite() {
            // Only the residuality probe's "exact" sentinel (+∞) reaches
            // here; parse rejects non-finite input, so no round trip.
            return if self.0.is_nan() {
                "nan".into()
            } else if self.0.is_sign_negative() {
                "-inf".into()
            } else {
                "inf".into()
            };
        }
        let (neg, mut mantissa, exp) = {
            let s = self.0.to_string_radix_round(10, digits, Round::Nearest);
            split_radix_string(&s)
        };
        // Strip trailing zeros; they never affect the parsed value.
        while mantissa.len() > 1 && mantissa.ends_with('0') {
            mantissa.pop();
        }
        let sign = if neg { "-" } else { "" };
        let ndigits = mantissa.len() as i64;
        if (-6..=24).contains(&exp) {
            if exp <= 0 {
                let zeros = "0".repeat((-exp) as usize);
                format!("{sign}0.{zeros}{mantissa}")
            } else if exp >= ndigits {
                let zeros = "0".repeat((exp - ndigits) as usize);
                format!("{sign}{mantissa}{zeros}")
            } else {
                let (int, frac) = mantissa.split_at(exp as usize);
                format!("{sign}{int}.{frac}")
            }
        } else {
            let (first, rest) = mantissa.split_at(1);
            if rest.is_empty() {
                format!("{sign}{first}e{}", exp - 1)
            } else {
                format!("{sign}{first}.{rest}e{}", exp - 1)
            }
        }
    }
}

/// Splits an MPFR radix-10 string `[-]d.dddde[+-]E` or `[-]d.dddd` into
/// (negative, digits, decimal exponent with the point before digit one).
fn split_radix_string(s: &str) -> (bool, String, i64) {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (mantissa_part, exp_part) = match body.split_once(['e', 'E', '@']) {
        Some((m, e)) => (m, e.parse::<i64>().expect("exponent digits")),
        None => (body, 0),
    };
    let digits: String = mantissa_part.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = mantissa_part
        .find('.')
        .map_or(mantissa_part.trim_start_matches('-').len() as i64, |i| i as i64);
    // MPFR prints one digit before the point; exponent is relative to that.
    (neg, digits, exp_part + point)
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(None))
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal(None))
    }
}
