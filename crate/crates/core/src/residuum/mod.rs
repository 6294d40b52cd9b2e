//! Residuum estimation.
//!
//! The residuum ξ_M(x) of a symmetric mean is the second-order coefficient
//! of its expansion at the diagonal,
//!
//! ```text
//! M(x·1 + s) = x + 𝔼s + ½·ξ_M(x)·Var(s) + o(‖s‖²),
//! ```
//!
//! equivalently ξ_M(x) = −p²·∂₁∂₂M(x·1) = (p²/(p−1))·∂₁²M(x·1). It
//! generalizes the Arrow–Pratt index f″/f′ of a quasiarithmetic generator.
//! Three estimators are provided: closed-form per family
//! ([`residuum_analytic`]), a Richardson-extrapolated directional limit
//! ([`residuum_limit`]), and central finite differences of both Hessian
//! forms ([`residuum_hessian`]). [`residuality_probe`] measures the decay
//! exponent of the expansion defect, and [`p_independence_check`] verifies
//! that the estimate does not depend on the arity used to compute it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::{eval_mean, DeviationFunction, GeneratorFunction, MeanFamily, MeanSpec};
use crate::precision::{PrecisionConfig, Real};

/// How a [`ResiduumEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form family formula.
    Analytic,
    /// Diagonal directional limit with Richardson extrapolation.
    LimitExtrapolation,
    /// Central finite differences of the diagonal Hessian.
    HessianFd,
}

/// A residuum value with an empirical error bound.
///
/// The uncertainty is a bound in spirit, not a proof: halving the step or
/// doubling the precision moves the value by less than 4× of it.
#[derive(Debug, Clone, Serialize)]
pub struct ResiduumEstimate {
    /// Estimated ξ_M(x).
    pub value: Real,
    /// Nonnegative error bound.
    pub uncertainty: Real,
    /// Estimator that produced the value.
    pub method: Method,
    /// Arity used by the estimator. The analytic formulas hold for every
    /// arity; they report the minimal p = 2.
    #[serde(rename = "p")]
    pub p_used: usize,
}

/// Result of fitting the expansion-defect decay exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualityReport {
    /// Fitted slope α̂ of log(defect) against log(radius); +∞ when the
    /// defect vanishes at roundoff level (`exact`).
    pub fitted_exponent: Real,
    /// Fitted scale λ̂ = exp(intercept).
    pub fitted_scale: Real,
    /// Radii that entered the fit.
    pub radii_used: Vec<Real>,
    /// Number of perturbation directions probed per radius.
    pub directions_used: usize,
    /// True when the defect is zero up to roundoff at some radius (e.g.
    /// the arithmetic mean, whose expansion is exact); no fit is possible.
    pub exact: bool,
}

/// Residuum estimates for one mean across several arities.
#[derive(Debug, Clone, Serialize)]
pub struct PIndependenceReport {
    /// Arities probed.
    pub arities: Vec<usize>,
    /// Limit-extrapolation estimate per arity.
    pub estimates: Vec<ResiduumEstimate>,
    /// Largest |ξ̂_p − ξ̂_q| over all pairs.
    pub max_pairwise_difference: Real,
    /// True when every pairwise difference is within 10× the combined
    /// uncertainties.
    pub all_within_uncertainty: bool,
}

fn working(x: &Real) -> u32 {
    x.prec().max(64)
}

fn check_interior(spec: &MeanSpec, x: &Real) -> Result<()> {
    if !spec.domain().contains(x) {
        return Err(Error::Domain(format!(
            "point {} outside domain {} of {}",
            x.to_decimal(Some(20)),
            spec.domain(),
            spec.name()
        )));
    }
    Ok(())
}

/// max(1, |x|) at x's precision.
fn length_scale(x: &Real) -> Real {
    let a = x.abs();
    if a > 1.0 {
        a
    } else {
        Real::one(x.prec())
    }
}

/// Padded roundoff bound for a chain of elementary operations.
fn roundoff_bound(value: &Real, w: u32) -> Real {
    (Real::one(64) + value.abs()) * Real::exp2i(8 - i64::from(w), 64)
}

/// num/den with an explicit check that the denominator is not numerically
/// zero relative to the numerator's scale.
fn ratio_checked(num: Real, den: Real, at: &Real) -> Result<Real> {
    let w = num.prec().max(den.prec()).max(64);
    let cfg = PrecisionConfig::new(w)?;
    let scale = Real::one(w) + num.abs();
    if den.is_zero() || cfg.effectively_zero(&den, &scale) {
        return Err(Error::ZeroDenominator {
            at: at.to_decimal(Some(20)),
        });
    }
    Ok(num / den)
}

/// ξ of a Gini mean: (α + β − 1)/x.
fn gini_residuum(alpha: f64, beta: f64, x: &Real, w: u32) -> Result<Real> {
    Real::from_f64(alpha + beta - 1.0, w).checked_div(x)
}

/// Closed-form residuum per family: Gini → (α+β−1)/x, quasiarithmetic →
/// f″/f′, Bajraktarević → Φ_{f,g}, quasideviation → ∂₁²E/∂₁E on the
/// diagonal (after its diagonal identities pass a finite-difference check).
pub fn residuum_analytic(spec: &MeanSpec, x: &Real) -> Result<ResiduumEstimate> {
    check_interior(spec, x)?;
    let w = working(x);
    let value = match spec.family() {
        MeanFamily::Arithmetic => Real::zero(w),
        MeanFamily::Geometric => gini_residuum(0.0, 0.0, x, w)?,
        MeanFamily::Power { alpha } => gini_residuum(*alpha, 0.0, x, w)?,
        MeanFamily::Gini { alpha, beta } => gini_residuum(*alpha, *beta, x, w)?,
        MeanFamily::QuasiArithmetic(f) => ratio_checked(f.d2(x)?, f.d1(x)?, x)?,
        MeanFamily::Bajraktarevic { f, g, .. } => bajraktarevic_invariants(f, g, x)?.0,
        MeanFamily::Quasideviation(e) => {
            // The formula is only valid if the provided partials are
            // consistent with E itself; flag rather than guess.
            check_diagonal_identities(e, x)?;
            ratio_checked(e.d11(x, x)?, e.d1(x, x)?, x)?
        }
        MeanFamily::Min | MeanFamily::Max => {
            return Err(Error::InvalidConfig(format!(
                "{} is not differentiable on the diagonal; it has no residuum",
                spec.name()
            )));
        }
    };
    let uncertainty = roundoff_bound(&value, w);
    Ok(ResiduumEstimate {
        value,
        uncertainty,
        method: Method::Analytic,
        p_used: 2,
    })
}

/// The Bajraktarević invariant pair at x:
///
/// ```text
/// Φ = (g f″ − f g″)/(g f′ − f g′),   Ψ = (g′f″ − f′g″)/(g f′ − f g′).
/// ```
///
/// Φ equals the residuum of B_{f,g}.
pub fn bajraktarevic_invariants(
    f: &GeneratorFunction,
    g: &GeneratorFunction,
    x: &Real,
) -> Result<(Real, Real)> {
    let (fv, f1, f2) = (f.eval(x)?, f.d1(x)?, f.d2(x)?);
    let (gv, g1, g2) = (g.eval(x)?, g.d1(x)?, g.d2(x)?);
    let den = &gv * &f1 - &fv * &g1;
    let phi_num = &gv * &f2 - &fv * &g2;
    let psi_num = &g1 * &f2 - &f1 * &g2;

    let w = working(x);
    let cfg = PrecisionConfig::new(w)?;
    let scale = Real::one(w) + phi_num.abs() + psi_num.abs();
    if den.is_zero() || cfg.effectively_zero(&den, &scale) {
        return Err(Error::ZeroDenominator {
            at: x.to_decimal(Some(20)),
        });
    }
    Ok((phi_num / &den, psi_num / &den))
}

/// Step for detached finite differences at x: 2^(−w/4)·max(1,|x|), shrunk
/// to keep x ± h strictly inside the domain.
fn fd_step(domain_room: Option<Real>, x: &Real, w: u32) -> Real {
    let mut h = Real::exp2i(-i64::from(w / 4), w) * length_scale(x);
    if let Some(d) = domain_room {
        let cap = d / 8u32;
        if h > cap {
            h = cap;
        }
    }
    h
}

/// Finite-difference check of the diagonal identities every smooth
/// deviation function satisfies by E(x,x) = 0:
///
/// ```text
/// (∂₁E + ∂₂E)(x,x) = 0,   (∂₁²E + 2∂₁∂₂E + ∂₂²E)(x,x) = 0.
/// ```
///
/// Only ∂₁E and ∂₁²E are part of the interface; the u-partials are
/// replaced by central differences of E and ∂₁E. A failure means the provided
/// partials are inconsistent with E, making the analytic residuum
/// unreliable.
pub fn check_diagonal_identities(e: &DeviationFunction, x: &Real) -> Result<()> {
    let w = working(x);
    let h = fd_step(e.domain().distance_to_boundary(x), x, w);
    let up = x + &h;
    let dn = x - &h;
    let two_h = &h * 2u32;
    let hh = &h * &h;

    let e_up = e.eval(x, &up)?;
    let e_dn = e.eval(x, &dn)?;
    let e_diag = e.eval(x, x)?;
    let d1_diag = e.d1(x, x)?;
    let d11_diag = e.d11(x, x)?;

    let d2_fd = (&e_up - &e_dn) / &two_h;
    let residual1 = &d1_diag + &d2_fd;
    let tol1 = (Real::one(w) + d1_diag.abs() + d2_fd.abs())
        * Real::exp2i(16 - i64::from(w / 2), 64);
    if residual1.abs() > tol1 {
        return Err(Error::DiagonalIdentity {
            which: 1,
            at: x.to_decimal(Some(20)),
            magnitude: residual1.abs().to_decimal(Some(6)),
        });
    }

    let d22_fd = (&e_up - &(&e_diag * 2u32) + &e_dn) / &hh;
    let d12_fd = (e.d1(x, &up)? - e.d1(x, &dn)?) / &two_h;
    let residual2 = &d11_diag + &(&d12_fd * 2u32) + &d22_fd;
    let tol2 = (Real::one(w) + d11_diag.abs() + (&d12_fd * 2u32).abs() + d22_fd.abs())
        * Real::exp2i(16 - i64::from(w / 2), 64);
    if residual2.abs() > tol2 {
        return Err(Error::DiagonalIdentity {
            which: 2,
            at: x.to_decimal(Some(20)),
            magnitude: residual2.abs().to_decimal(Some(6)),
        });
    }
    Ok(())
}

/// Richardson extrapolation of a sequence S_k = L + Σⱼ cⱼ·4^(−jk) (an h²
/// series sampled at h, h/2, h/4, …). Returns the table entry with the
/// smallest correction and that correction as its error estimate.
fn richardson_h2(series: &[Real]) -> (Real, Real) {
    assert!(series.len() >= 2, "extrapolation needs at least two levels");
    let mut prev_row: Vec<Real> = vec![series[0].clone()];
    let mut best_value = series[0].clone();
    let mut best_err: Option<Real> = None;

    for (k, s) in series.iter().enumerate().skip(1) {
        let mut row = vec![s.clone()];
        for j in 1..=k {
            let power = Real::exp2i(2 * j as i64, 64) - Real::one(64);
            let step = (&row[j - 1] - &prev_row[j - 1]) / power;
            row.push(&row[j - 1] + &step);
        }
        for j in 1..row.len() {
            let err_same = (&row[j] - &row[j - 1]).abs();
            let err_up = (&row[j] - &prev_row[j - 1]).abs();
            let err = if err_same > err_up { err_same } else { err_up };
            if best_err.as_ref().is_none_or(|b| err < *b) {
                best_value = row[j].clone();
                best_err = Some(err);
            }
        }
        prev_row = row;
    }
    (best_value, best_err.expect("table has at least one correction"))
}

/// Number of levels in the limit estimator's step schedule t_k = t₀·2^(−k).
const LIMIT_LEVELS: usize = 13;

/// Residuum via the diagonal directional limit
///
/// ```text
/// ξ_M(x) = lim_{t→0} (2p²/((p−1)t²))·(M(x+t, x, …, x) − x − t/p).
/// ```
///
/// The raw estimator at +t and −t is averaged — the odd expansion terms
/// cancel exactly, the t/p terms drop out algebraically — and the
/// remaining even series is Richardson-extrapolated.
pub fn residuum_limit(spec: &MeanSpec, p: usize, x: &Real) -> Result<ResiduumEstimate> {
    if p < 2 {
        return Err(Error::InvalidArity(p));
    }
    check_interior(spec, x)?;
    let w = working(x);
    let scale = length_scale(x).with_prec(w);

    let mut t0 = &scale * &Real::from_f64(1e-2, w);
    if let Some(d) = spec.domain().distance_to_boundary(x) {
        let cap = d / 2u32;
        if t0 > cap {
            t0 = cap;
        }
    }

    // 2p²/(p−1) · (M(x+t,x,…) + M(x−t,x,…) − 2x) / (2t²)
    let factor = Real::from_usize(2 * p * p, w) / Real::from_usize(p - 1, w);
    let mut series = Vec::with_capacity(LIMIT_LEVELS);
    let mut base = vec![x.with_prec(w); p];
    for k in 0..LIMIT_LEVELS {
        let t = &t0 * &Real::exp2i(-(k as i64), w);
        base[0] = x + &t;
        let m_plus = eval_mean(spec, &base)?;
        base[0] = x - &t;
        let m_minus = eval_mean(spec, &base)?;
        base[0] = x.with_prec(w);
        let numer = m_plus + m_minus - x * 2u32;
        let sym = &factor * &(numer / (&t * &t * 2u32));
        series.push(sym);
    }

    let (value, err) = richardson_h2(&series);
    // A smooth mean leaves corrections far below the residuum's natural
    // scale 1/max(1,|x|); a stalled table signals a non-smooth mean.
    let natural = scale.recip()?;
    let divergence_gate = {
        let m = value.abs();
        let m = if m > natural { m } else { natural };
        m * Real::exp2i(-24, 64)
    };
    if err > divergence_gate {
        return Err(Error::ExtrapolationDiverged {
            best_correction: err.to_decimal(Some(6)),
        });
    }
    let floor = (Real::one(64) + value.abs()) * Real::exp2i(60 - i64::from(w), 64);
    let uncertainty = if err > floor { err } else { floor };
    Ok(ResiduumEstimate {
        value,
        uncertainty,
        method: Method::LimitExtrapolation,
        p_used: p,
    })
}

/// Both Hessian-based residuum forms from central finite differences on
/// the diagonal:
///
/// ```text
/// ξ_M(x) = −p²·∂₁∂₂M(x·1)          (mixed form, first of the pair)
/// ξ_M(x) = (p²/(p−1))·∂₁²M(x·1)    (pure form, second)
/// ```
///
/// Each is computed at steps h and h/2 and Richardson-extrapolated; the
/// reported uncertainty combines the observed correction with the roundoff
/// amplification of the h² division. The two forms must agree within 10×
/// their combined uncertainties, else the mean is not symmetric-C² at x.
pub fn residuum_hessian(
    spec: &MeanSpec,
    p: usize,
    x: &Real,
) -> Result<(ResiduumEstimate, ResiduumEstimate)> {
    if p < 2 {
        return Err(Error::InvalidArity(p));
    }
    check_interior(spec, x)?;
    let w = working(x);
    let scale = length_scale(x).with_prec(w);
    let h = fd_step(spec.domain().distance_to_boundary(x), x, w);
    let half = &h / 2u32;

    let mixed_full = mixed_second_partial(spec, p, x, &h, w)?;
    let mixed_half = mixed_second_partial(spec, p, x, &half, w)?;
    let pure_full = pure_second_partial(spec, p, x, &h, w)?;
    let pure_half = pure_second_partial(spec, p, x, &half, w)?;

    let p2 = Real::from_usize(p * p, w);
    let mixed_scale = -&p2;
    let pure_scale = &p2 / &Real::from_usize(p - 1, w);

    let (mixed, unc_mixed) = two_level(&mixed_full, &mixed_half, &mixed_scale, &scale, &half, w);
    let (pure, unc_pure) = two_level(&pure_full, &pure_half, &pure_scale, &scale, &half, w);

    let diff = (&mixed - &pure).abs();
    let combined = (&unc_mixed + &unc_pure) * 10u32;
    if diff > combined {
        return Err(Error::HessianDisagreement {
            at: x.to_decimal(Some(20)),
            mixed: mixed.to_decimal(Some(30)),
            pure: pure.to_decimal(Some(30)),
        });
    }
    Ok((
        ResiduumEstimate {
            value: mixed,
            uncertainty: unc_mixed,
            method: Method::HessianFd,
            p_used: p,
        },
        ResiduumEstimate {
            value: pure,
            uncertainty: unc_pure,
            method: Method::HessianFd,
            p_used: p,
        },
    ))
}

/// ∂₁∂₂M(x·1) by the symmetric four-point stencil; M's symmetry collapses
/// the two off-diagonal corners into one evaluation:
/// (M(+h,+h) − 2M(+h,−h) + M(−h,−h)) / (4h²).
fn mixed_second_partial(
    spec: &MeanSpec,
    p: usize,
    x: &Real,
    h: &Real,
    w: u32,
) -> Result<Real> {
    let mut v = vec![x.with_prec(w); p];
    let up = x + h;
    let dn = x - h;
    v[0] = up.clone();
    v[1] = up;
    let a = eval_mean(spec, &v)?;
    v[1] = dn.clone();
    let b = eval_mean(spec, &v)?;
    v[0] = dn.clone();
    v[1] = dn;
    let c = eval_mean(spec, &v)?;
    Ok((a - b * 2u32 + c) / (&(h * h) * 4u32))
}

/// ∂₁²M(x·1) by the central stencil (M(+h) − 2x + M(−h)) / h²; the middle
/// term is exact by reflexivity.
fn pure_second_partial(spec: &MeanSpec, p: usize, x: &Real, h: &Real, w: u32) -> Result<Real> {
    let mut v = vec![x.with_prec(w); p];
    v[0] = x + h;
    let plus = eval_mean(spec, &v)?;
    v[0] = x - h;
    let minus = eval_mean(spec, &v)?;
    Ok((plus + minus - x * 2u32) / (h * h))
}

/// Two-level Richardson for an h² derivative estimate, with a roundoff
/// floor for the h⁻² amplification of mean-evaluation error.
fn two_level(
    full: &Real,
    half: &Real,
    multiplier: &Real,
    scale: &Real,
    h_small: &Real,
    w: u32,
) -> (Real, Real) {
    let v_full = multiplier * full;
    let v_half = multiplier * half;
    let extrapolated = (&(&v_half * 4u32) - &v_full) / 3u32;
    let correction = (&v_half - &v_full).abs() / 3u32;
    let roundoff = multiplier.abs() * scale * Real::exp2i(16 - i64::from(w), 64)
        / (h_small * h_small);
    let uncertainty = &correction + &roundoff;
    (extrapolated, uncertainty)
}

/// The probe's perturbation directions on the sup-norm unit sphere: all
/// signed unit vectors ±eᵢ plus all signed two-hot combinations
/// ±(eᵢ+eⱼ), ±(eᵢ−eⱼ), i < j — 2p² directions, covering pure and mixed
/// curvature (8 directions already at p = 2).
fn probe_directions(p: usize) -> Vec<Vec<i8>> {
    let mut dirs = Vec::with_capacity(2 * p * p);
    for i in 0..p {
        for sign in [1i8, -1] {
            let mut d = vec![0i8; p];
            d[i] = sign;
            dirs.push(d);
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            for (si, sj) in [(1i8, 1i8), (-1, -1), (1, -1), (-1, 1)] {
                let mut d = vec![0i8; p];
                d[i] = si;
                d[j] = sj;
                dirs.push(d);
            }
        }
    }
    dirs
}

/// Measures the decay of the expansion defect
///
/// ```text
/// |M(x·1 + s) − x − 𝔼s − ½·ξ_M(x)·Var(s)|
/// ```
///
/// over sup-norm spheres of the given radii (decreasing, ≥ 6 values
/// spanning ≥ 3 decades) and fits log(defect) = log λ + α·log r. A C³ mean
/// shows α ≈ 3; the arithmetic mean's defect vanishes identically and is
/// reported as `exact` with a +∞ exponent.
pub fn residuality_probe(
    spec: &MeanSpec,
    p: usize,
    x: &Real,
    radii: &[Real],
) -> Result<ResidualityReport> {
    if p < 2 {
        return Err(Error::InvalidArity(p));
    }
    check_interior(spec, x)?;
    if radii.len() < 6 {
        return Err(Error::InvalidConfig(format!(
            "residuality fit needs at least 6 radii, got {}",
            radii.len()
        )));
    }
    for pair in radii.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::InvalidConfig(
                "radii must be strictly decreasing".into(),
            ));
        }
    }
    let first = &radii[0];
    let last = &radii[radii.len() - 1];
    if !last.is_positive() {
        return Err(Error::InvalidConfig("radii must be positive".into()));
    }
    if first.to_f64() / last.to_f64() < 999.0 {
        return Err(Error::InvalidConfig(
            "radii must span at least 3 decades".into(),
        ));
    }
    let room_ok = {
        let up = x + first;
        let dn = x - first;
        spec.domain().contains(&up) && spec.domain().contains(&dn)
    };
    if !room_ok {
        return Err(Error::Domain(format!(
            "radius {} leaves no room inside {} around {}",
            first.to_decimal(Some(6)),
            spec.domain(),
            x.to_decimal(Some(20))
        )));
    }

    let w = working(x);
    let xi = residuum_analytic(spec, x)?.value;
    let dirs = probe_directions(p);
    let pr = Real::from_usize(p, w);
    let exact_tol = length_scale(x) * Real::exp2i(48 - i64::from(w), 64);

    let mut max_defects = Vec::with_capacity(radii.len());
    for r in radii {
        let mut worst = Real::zero(w);
        for d in &dirs {
            let s: Vec<Real> = d
                .iter()
                .map(|&c| Real::from_i64(i64::from(c), w) * r)
                .collect();
            let point: Vec<Real> = s.iter().map(|si| x + si).collect();
            let m = eval_mean(spec, &point)?;
            let mean_s = Real::sum(&s) / &pr;
            let mut var = Real::zero(w);
            for si in &s {
                let c = si - &mean_s;
                var = var + &c * &c;
            }
            var = var / &pr;
            let defect = (&m - x - &mean_s - &(&xi * &var) / 2u32).abs();
            if defect > worst {
                worst = defect;
            }
        }
        max_defects.push(worst);
    }

    if max_defects.iter().any(|d| *d <= exact_tol) {
        return Ok(ResidualityReport {
            fitted_exponent: Real::from_f64(f64::INFINITY, 64),
            fitted_scale: Real::zero(64),
            radii_used: radii.to_vec(),
            directions_used: dirs.len(),
            exact: true,
        });
    }

    // Least squares on (log r, log defect); logs are taken at full
    // precision first, so defects far below f64 range stay usable.
    let xs: Vec<f64> = radii
        .iter()
        .map(|r| r.ln().map(|v| v.to_f64()))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = max_defects
        .iter()
        .map(|d| d.ln().map(|v| v.to_f64()))
        .collect::<Result<_>>()?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    Ok(ResidualityReport {
        fitted_exponent: Real::from_f64(slope, 64),
        fitted_scale: Real::from_f64(intercept.exp(), 64),
        radii_used: radii.to_vec(),
        directions_used: dirs.len(),
        exact: false,
    })
}

/// Estimates ξ_M(x) with the limit estimator at each arity and compares
/// all pairs. For a symmetric, repetition-invariant mean the estimates
/// agree up to estimator error.
pub fn p_independence_check(
    spec: &MeanSpec,
    x: &Real,
    arities: &[usize],
) -> Result<PIndependenceReport> {
    if arities.len() < 2 {
        return Err(Error::InvalidConfig(
            "p-independence needs at least two arities".into(),
        ));
    }
    let mut estimates = Vec::with_capacity(arities.len());
    for &p in arities {
        estimates.push(residuum_limit(spec, p, x)?);
    }
    let mut max_diff = Real::zero(64);
    let mut all_ok = true;
    for i in 0..estimates.len() {
        for j in (i + 1)..estimates.len() {
            let diff = (&estimates[i].value - &estimates[j].value).abs();
            let budget = (&estimates[i].uncertainty + &estimates[j].uncertainty) * 10u32;
            if diff > budget {
                all_ok = false;
            }
            if diff > max_diff {
                max_diff = diff;
            }
        }
    }
    Ok(PIndependenceReport {
        arities: arities.to_vec(),
        estimates,
        max_pairwise_difference: max_diff,
        all_within_uncertainty: all_ok,
    })
}

#[cfg(test)]
mod tests;
