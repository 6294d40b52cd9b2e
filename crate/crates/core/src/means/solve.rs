//! Bracketed root-finding for the implicit mean families.
//!
//! Both solvers share the same skeleton: a global bisection phase down to a
//! width of 2⁻⁶⁴·scale (the sign pattern is forced, so bisection cannot
//! stall), then a fast local phase — Newton for quasiarithmetic inversion
//! (f′ is available), safeguarded secant for deviation solves (∂₂E is
//! deliberately not part of the interface). Every accepted step stays
//! strictly inside the current bracket.

use crate::error::{Error, Result};
use crate::means::{DeviationFunction, GeneratorFunction};
use crate::precision::{PrecisionConfig, Real};

/// A sign-change bracket [a, b] with cached endpoint values.
struct Bracket {
    a: Real,
    fa: Real,
    b: Real,
    fb: Real,
}

impl Bracket {
    fn width(&self) -> Real {
        &self.b - &self.a
    }

    fn midpoint(&self) -> Real {
        (&self.a + &self.b) / 2u32
    }

    /// Replaces the endpoint whose value has the same sign as `fu`.
    fn absorb(&mut self, u: Real, fu: Real) {
        if fu.signum() == self.fa.signum() {
            self.a = u;
            self.fa = fu;
        } else {
            self.b = u;
            self.fb = fu;
        }
    }
}

/// Bisects until `width <= target` or an exact zero is hit (returned early).
fn bisect_phase(
    bracket: &mut Bracket,
    f: &mut dyn FnMut(&Real) -> Result<Real>,
    target: &Real,
) -> Result<Option<Real>> {
    // Each step halves the width; 64-bit parameters bound the step count.
    while bracket.width() > *target {
        let mid = bracket.midpoint();
        if mid <= bracket.a || mid >= bracket.b {
            break; // bracket no longer splittable at this precision
        }
        let fmid = f(&mid)?;
        if fmid.is_zero() {
            return Ok(Some(mid));
        }
        bracket.absorb(mid, fmid);
    }
    Ok(None)
}

/// Inverts a strictly monotone generator: finds u in [lo, hi] with
/// f(u) = y. The bracket must straddle y.
pub fn qa_invert(gen: &GeneratorFunction, y: &Real, lo: &Real, hi: &Real) -> Result<Real> {
    let w = y.prec().max(lo.prec()).max(hi.prec()).max(64);
    let cfg = PrecisionConfig::new(w)?;
    let a = lo.with_prec(w);
    let b = hi.with_prec(w);
    if a >= b {
        return Err(Error::InvalidConfig(format!(
            "inversion bracket needs lo < hi, got [{}, {}]",
            a.to_decimal(Some(20)),
            b.to_decimal(Some(20))
        )));
    }

    let fla = gen.eval(&a)?;
    let flb = gen.eval(&b)?;
    let fa = &fla - y;
    let fb = &flb - y;
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonBracketing(format!(
            "f([{}, {}]) = [{}, {}] does not straddle y = {}",
            a.to_decimal(Some(10)),
            b.to_decimal(Some(10)),
            fla.to_decimal(Some(10)),
            flb.to_decimal(Some(10)),
            y.to_decimal(Some(10))
        )));
    }

    let scale_x = bracket_scale(&a, &b);
    let scale_y = {
        let m = fla.abs();
        let n = flb.abs();
        let fm = if m > n { m } else { n };
        let ya = y.abs();
        if ya > fm {
            ya
        } else {
            fm
        }
    };
    let width_floor = cfg.abs_tolerance(&scale_x);
    let value_floor = cfg.abs_tolerance(&scale_y);

    let mut feval = |u: &Real| -> Result<Real> { Ok(gen.eval(u)? - y) };
    let mut bracket = Bracket { a, fa, b, fb };
    let coarse = &scale_x * &Real::exp2i(-64, 64);
    let coarse_target = if coarse > width_floor {
        coarse
    } else {
        width_floor.clone()
    };
    if let Some(root) = bisect_phase(&mut bracket, &mut feval, &coarse_target)? {
        return Ok(root);
    }

    // Newton from the bracket midpoint, falling back to bisection whenever
    // the proposed step is undefined or leaves the bracket.
    let mut u = bracket.midpoint();
    for _ in 0..128 {
        let fu = feval(&u)?;
        if fu.is_zero() || fu.abs() <= value_floor {
            return Ok(u);
        }
        bracket.absorb(u.clone(), fu.clone());
        if bracket.width() <= width_floor {
            return Ok(bracket.midpoint());
        }
        let next = match gen.d1(&u) {
            Ok(d) if !d.is_zero() => {
                // f(u) − y is quantised in steps of about |f′(u)|·ulp(u), so
                // once |fu| sits inside that quantum no representable point
                // can do better: u is the root at working precision. (This
                // matters when the root lies within one ulp of a bracket
                // endpoint and the value floor is unreachable.)
                let quantum = &(&d.abs() * &u.abs()) * &Real::exp2i(2 - i64::from(w), 64);
                if fu.abs() <= quantum {
                    return Ok(u);
                }
                let candidate = &u - &(fu / d);
                if candidate > bracket.a && candidate < bracket.b {
                    candidate
                } else {
                    bracket.midpoint()
                }
            }
            _ => bracket.midpoint(),
        };
        if next == u {
            return Ok(u);
        }
        u = next;
    }
    Err(Error::InversionFailure(format!(
        "no convergence inverting '{}'; final bracket width {}",
        gen.name(),
        bracket.width().to_decimal(Some(6))
    )))
}

/// Solves Σᵢ E(xᵢ, u) = 0 for u in [min x, max x]. The sign condition (D1)
/// forces F(min x) ≥ 0 ≥ F(max x); a wrong endpoint sign is reported as a
/// deviation-function violation.
pub fn qd_solve(dev: &DeviationFunction, x: &[Real]) -> Result<Real> {
    if x.is_empty() {
        return Err(Error::InvalidArity(0));
    }
    let w = x.iter().map(Real::prec).max().unwrap().max(64);
    let cfg = PrecisionConfig::new(w)?;
    if x.iter().all(|xi| xi == &x[0]) {
        // E(c, c) = 0, so the root is the common value.
        dev.eval(&x[0], &x[0])?; // still validate the domain
        return Ok(x[0].with_prec(w));
    }

    let a = Real::min_of(x).with_prec(w);
    let b = Real::max_of(x).with_prec(w);
    let mut feval = |u: &Real| -> Result<Real> {
        let mut acc = Real::zero(w);
        for xi in x {
            acc = acc + dev.eval(xi, u)?;
        }
        Ok(acc)
    };

    let fa = feval(&a)?;
    let fb = feval(&b)?;
    if fa.is_negative() || fb.is_positive() {
        return Err(Error::NonBracketing(format!(
            "sign condition (D1) violated for '{}': F(min x) = {}, F(max x) = {}",
            dev.name(),
            fa.to_decimal(Some(10)),
            fb.to_decimal(Some(10))
        )));
    }
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }

    let scale_x = bracket_scale(&a, &b);
    let scale_f = {
        let m = fa.abs();
        let n = fb.abs();
        if m > n {
            m
        } else {
            n
        }
    };
    let width_floor = cfg.abs_tolerance(&scale_x);
    let value_floor = cfg.abs_tolerance(&scale_f);

    let mut bracket = Bracket { a, fa, b, fb };
    let coarse = &scale_x * &Real::exp2i(-64, 64);
    let coarse_target = if coarse > width_floor {
        coarse
    } else {
        width_floor.clone()
    };
    if let Some(root) = bisect_phase(&mut bracket, &mut feval, &coarse_target)? {
        return Ok(root);
    }

    // Secant phase: superlinear without needing ∂₂E, safeguarded by the
    // bracket. The previous iterate seeds the first secant step.
    let mut prev = bracket.a.clone();
    let mut fprev = bracket.fa.clone();
    let mut u = bracket.midpoint();
    for _ in 0..256 {
        let fu = feval(&u)?;
        if fu.is_zero() || fu.abs() <= value_floor {
            return Ok(u);
        }
        bracket.absorb(u.clone(), fu.clone());
        if bracket.width() <= width_floor {
            return Ok(bracket.midpoint());
        }
        let denom = &fu - &fprev;
        let step = &u - &prev;
        let next = if denom.is_zero() {
            bracket.midpoint()
        } else {
            // Same quantisation guard as the Newton phase, with the secant
            // slope standing in for the derivative: F(u) moves in steps of
            // about |F′(u)|·ulp(u), so a residual inside that quantum is a
            // root at working precision.
            let quantum =
                &(&denom.abs() / &step.abs()) * &(&u.abs() * &Real::exp2i(2 - i64::from(w), 64));
            if fu.abs() <= quantum {
                return Ok(u);
            }
            let candidate = &u - &(&fu * &step / denom);
            if candidate > bracket.a && candidate < bracket.b {
                candidate
            } else {
                bracket.midpoint()
            }
        };
        prev = u.clone();
        fprev = fu;
        if next == u {
            return Ok(u);
        }
        u = next;
    }
    Err(Error::InversionFailure(format!(
        "deviation solve for '{}' did not converge; final bracket width {}",
        dev.name(),
        bracket.width().to_decimal(Some(6))
    )))
}

/// Natural length scale of a bracket: max(|a|, |b|, 1).
fn bracket_scale(a: &Real, b: &Real) -> Real {
    let m = a.abs();
    let n = b.abs();
    let big = if m > n { m } else { n };
    if big > 1.0 {
        big
    } else {
        Real::one(a.prec())
    }
}
