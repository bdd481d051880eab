//! The Gaussian Q-function and its exponential tangent bounds.
//!
//! For an anchor argument `w_hat`, the Q-function is sandwiched by a pair of
//! exponentials that touch it (value and slope) at the anchor:
//!
//! ```text
//! 1 - b(-w_hat) e^{ a(-w_hat) w } - c(-w_hat)  <=  Q(w)  <=  b(w_hat) e^{ -a(w_hat) w } + c(w_hat)
//! ```
//!
//! with `a(w) = max{ phi(w)/Q(w), w }`, `b(w) = e^{a w - w^2/2} / (sqrt(2 pi) a)`
//! and `c(w) = Q(w) - b e^{-a w}`. Since Q is log-concave and `a` is its
//! hazard rate, the upper exponential is tangent to Q in log-space and the
//! bound holds globally; the lower bound is its reflection through
//! `Q(w) = 1 - Q(-w)`.
//!
//! The lower branch is what the deception-rate surrogate uses: replacing an
//! erasure probability by its lower bound, anchored at the incumbent
//! blocklength, yields a surrogate objective that touches the true objective
//! at the anchor and never exceeds it.

use crate::erf::erfc;
use crate::error::{Error, Result};
use crate::metrics::{
    erasure_prob, evaluate, omega, CodeAllocation, ErasureProfile, LinkConfig,
};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.5066282746310002;

/// Smallest value `q_function` reports; avoids exact zeros poisoning logs
/// and ratios downstream.
pub const Q_FLOOR: f64 = 1e-300;
/// Largest value `q_function` reports, strictly below 1.
pub const Q_CEIL: f64 = 1.0 - 1e-16;

/// The Gaussian tail probability `Q(x) = P(N(0,1) > x)`, computed through
/// the complementary error function and clamped to `[Q_FLOOR, Q_CEIL]`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("x", x));
    }
    Ok((0.5 * erfc(x / SQRT_2)).clamp(Q_FLOOR, Q_CEIL))
}

fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Mills ratio `Q(x)/phi(x)` via the Laplace continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(...))))`; accurate for x >= 6.
fn mills_ratio_cf(x: f64) -> f64 {
    let mut t = 0.0;
    for k in (1..=80u32).rev() {
        t = k as f64 / (x + t);
    }
    1.0 / (x + t)
}

/// Hazard rate `phi(x)/Q(x)` of the standard normal. Direct evaluation for
/// x <= 6; the continued-fraction Mills ratio beyond, where Q(x) underflows
/// long before phi(x) does.
fn hazard_rate(x: f64) -> Result<f64> {
    if x <= 6.0 {
        Ok(gaussian_pdf(x) / q_function(x)?)
    } else {
        Ok(1.0 / mills_ratio_cf(x))
    }
}

/// Exponential-bound coefficients built at an anchor argument.
///
/// `anchor_omega` records the argument the coefficients were built at; for
/// lower-bound use it holds the negated anchor (see [`BoundCoeffs::lower_at`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub anchor_omega: f64,
}

/// Builds `(a, b, c)` at `omega_hat` for the upper-bound form
/// `b e^{-a w} + c`.
pub fn bound_coeffs(omega_hat: f64) -> Result<BoundCoeffs> {
    if !omega_hat.is_finite() {
        return Err(Error::domain("omega_hat", omega_hat));
    }
    let a = hazard_rate(omega_hat)?.max(omega_hat);
    let b = (a * omega_hat - 0.5 * omega_hat * omega_hat).exp() / (SQRT_2PI * a);
    let c = q_function(omega_hat)? - b * (-a * omega_hat).exp();
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || a <= 0.0 || b <= 0.0 {
        return Err(Error::Numeric(format!(
            "bound coefficients overflow at anchor {omega_hat}: a={a}, b={b}, c={c}"
        )));
    }
    Ok(BoundCoeffs { a, b, c, anchor_omega: omega_hat })
}

/// Largest anchor magnitude the coefficient formulas survive in f64; the
/// `b` coefficient carries a factor `e^{w^2/2}`, which overflows soon after.
/// Beyond the clamp the bound has saturated to the trivial 0/1 bound anyway
/// (Q is within 1e-300 of its limit), so clamping the anchor changes the
/// touch error by less than any tolerance in use.
const ANCHOR_CLAMP: f64 = 37.0;

impl BoundCoeffs {
    /// Coefficients for the lower bound touching Q at `omega_hat`. The
    /// negation required by the reflected bound happens here, so call sites
    /// pass the raw anchor argument.
    pub fn lower_at(omega_hat: f64) -> Result<Self> {
        bound_coeffs(-omega_hat.clamp(-ANCHOR_CLAMP, ANCHOR_CLAMP))
    }
}

/// Upper bound `b e^{-a w} + c`; `coeffs` built at the touch point.
pub fn q_upper_bound(w: f64, coeffs: &BoundCoeffs) -> f64 {
    coeffs.b * (-coeffs.a * w).exp() + coeffs.c
}

/// Lower bound `1 - b e^{a w} - c`, the reflection of the upper bound;
/// `coeffs` must be built at the negated touch point (see
/// [`BoundCoeffs::lower_at`]). May go below zero far from the anchor; the
/// caller clamps where a probability is required.
pub fn q_lower_bound(w: f64, coeffs: &BoundCoeffs) -> f64 {
    1.0 - coeffs.b * (coeffs.a * w).exp() - coeffs.c
}

/// Surrogate erasure probability: the lower Q-bound evaluated at
/// `omega(n, d, gamma)`. Equals the true erasure probability at the anchor
/// blocklength and never exceeds it elsewhere. Returned raw (unclamped).
pub fn epsilon_hat(n: f64, d: f64, gamma: f64, coeffs: &BoundCoeffs) -> Result<f64> {
    Ok(q_lower_bound(omega(n, d, gamma)?, coeffs))
}

/// An anchor point of the surrogate objective: the blocklengths it was
/// built at, the lower-bound coefficients for the two surrogate erasure
/// terms, and the metric snapshot at the anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundAnchor {
    pub n_m_hat: f64,
    pub n_k_hat: f64,
    pub d_m: u32,
    pub d_k: u32,
    /// Lower-bound coefficients for Bob's message erasure, anchored at
    /// `omega(n_m_hat, d_m, snr_bob)`.
    pub bob_m: BoundCoeffs,
    /// Lower-bound coefficients for Eve's key erasure, anchored at
    /// `omega(n_k_hat, d_k, snr_eve)`.
    pub eve_k: BoundCoeffs,
    pub profile: ErasureProfile,
}

impl BoundAnchor {
    pub fn new(link: &LinkConfig, d_m: u32, d_k: u32, n_m_hat: f64, n_k_hat: f64) -> Result<Self> {
        if d_k < 1 {
            return Err(Error::domain("d_k", d_k as f64));
        }
        let alloc = CodeAllocation::new(d_m, d_k, n_m_hat, n_k_hat)?;
        let bob_m = BoundCoeffs::lower_at(omega(n_m_hat, d_m as f64, link.snr_bob())?)?;
        let eve_k = BoundCoeffs::lower_at(omega(n_k_hat, d_k as f64, link.snr_eve())?)?;
        let profile = evaluate(link, &alloc)?;
        Ok(BoundAnchor { n_m_hat, n_k_hat, d_m, d_k, bob_m, eve_k, profile })
    }
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// The two factors of the surrogate deception rate at `(n_m, n_k)`:
/// `A = 1 - (1 - eps_hat_bob_m) * eps_bob_k` and
/// `B = (1 - eps_eve_m) * eps_hat_eve_k`, with the hatted terms clamped to
/// [0, 1] at this point of use.
pub fn surrogate_factors(
    alloc: &CodeAllocation,
    link: &LinkConfig,
    anchor: &BoundAnchor,
) -> Result<(f64, f64)> {
    if alloc.d_m != anchor.d_m || alloc.d_k != anchor.d_k {
        return Err(Error::Numeric(format!(
            "anchor payload ({}, {}) does not match allocation ({}, {})",
            anchor.d_m, anchor.d_k, alloc.d_m, alloc.d_k
        )));
    }
    let d_m = alloc.d_m as f64;
    let d_k = alloc.d_k as f64;
    let eps_hat_bm = clamp01(epsilon_hat(alloc.n_m, d_m, link.snr_bob(), &anchor.bob_m)?);
    let eps_hat_ek = clamp01(epsilon_hat(alloc.n_k, d_k, link.snr_eve(), &anchor.eve_k)?);
    let eps_bk = erasure_prob(alloc.n_k, d_k, link.snr_bob())?;
    let eps_em = erasure_prob(alloc.n_m, d_m, link.snr_eve())?;
    Ok((1.0 - (1.0 - eps_hat_bm) * eps_bk, (1.0 - eps_em) * eps_hat_ek))
}

/// The surrogate deception rate `A * B`: the true deception rate with Bob's
/// message erasure and Eve's key erasure replaced by their anchored lower
/// bounds. Touches the true rate at the anchor and lower-bounds it
/// everywhere else.
pub fn rd_surrogate(
    alloc: &CodeAllocation,
    link: &LinkConfig,
    anchor: &BoundAnchor,
) -> Result<f64> {
    let (a, b) = surrogate_factors(alloc, link, anchor)?;
    Ok(a * b)
}
