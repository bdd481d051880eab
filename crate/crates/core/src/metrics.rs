//! Closed-form finite-blocklength link metrics.
//!
//! Everything here is a pure function of its arguments: SNR, Shannon
//! capacity, channel dispersion, the erasure probability of a short packet
//! under the normal approximation, and the composite security metrics built
//! from the four per-receiver-per-component erasure probabilities (the
//! leakage-failure probability, the effective deception rate, and the
//! throughput).

use crate::error::{Error, Result};
use crate::qbounds::q_function;

pub const LN_2: f64 = std::f64::consts::LN_2;

/// Which end of the wiretap link a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Bob,
    Eve,
}

/// Deterministic per-scenario channel description: linear channel gains for
/// the legitimate receiver and the eavesdropper, transmit power and noise
/// power in mW. SNR is the dimensionless ratio `gain * power / noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub z_bob: f64,
    pub z_eve: f64,
    pub power: f64,
    pub noise: f64,
}

impl LinkConfig {
    pub fn new(z_bob: f64, z_eve: f64, power: f64, noise: f64) -> Result<Self> {
        for (what, v) in [
            ("z_bob", z_bob),
            ("z_eve", z_eve),
            ("power", power),
            ("noise", noise),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(what, v));
            }
        }
        let cfg = LinkConfig { z_bob, z_eve, power, noise };
        for rx in [Receiver::Bob, Receiver::Eve] {
            let snr = cfg.snr(rx);
            if !snr.is_finite() || snr <= 0.0 {
                return Err(Error::domain("snr", snr));
            }
        }
        Ok(cfg)
    }

    /// Builds a config from gains given in dB (the usual scenario notation).
    pub fn from_db(z_bob_db: f64, z_eve_db: f64, power: f64, noise: f64) -> Result<Self> {
        Self::new(db_to_linear(z_bob_db)?, db_to_linear(z_eve_db)?, power, noise)
    }

    pub fn snr(&self, rx: Receiver) -> f64 {
        let z = match rx {
            Receiver::Bob => self.z_bob,
            Receiver::Eve => self.z_eve,
        };
        z * self.power / self.noise
    }

    pub fn snr_bob(&self) -> f64 {
        self.snr(Receiver::Bob)
    }

    pub fn snr_eve(&self) -> f64 {
        self.snr(Receiver::Eve)
    }

    /// The same link with Bob's and Eve's channels exchanged.
    pub fn swapped(&self) -> LinkConfig {
        LinkConfig { z_bob: self.z_eve, z_eve: self.z_bob, ..*self }
    }
}

/// The decision variables: payload sizes in bits and blocklengths in channel
/// uses. Blocklengths are real-valued during the continuous relaxation and
/// integer at solver output. `d_k = 0` (with `n_k = 0`) selects the baseline
/// mode without deceptive ciphering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeAllocation {
    pub d_m: u32,
    pub d_k: u32,
    pub n_m: f64,
    pub n_k: f64,
}

impl CodeAllocation {
    pub fn new(d_m: u32, d_k: u32, n_m: f64, n_k: f64) -> Result<Self> {
        if d_m < 1 {
            return Err(Error::domain("d_m", d_m as f64));
        }
        if !n_m.is_finite() || n_m <= 0.0 {
            return Err(Error::domain("n_m", n_m));
        }
        if !n_k.is_finite() || n_k < 0.0 {
            return Err(Error::domain("n_k", n_k));
        }
        // n_k = 0 iff d_k = 0
        if (n_k == 0.0) != (d_k == 0) {
            return Err(Error::domain("n_k", n_k));
        }
        Ok(CodeAllocation { d_m, d_k, n_m, n_k })
    }

    pub fn is_baseline(&self) -> bool {
        self.d_k == 0
    }

    pub fn total_blocklength(&self) -> f64 {
        self.n_m + self.n_k
    }
}

/// Constraint thresholds: caps on the message erasure probabilities at both
/// receivers and on Bob's key erasure, a floor on Eve's key erasure, and a
/// throughput floor in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub eps_bob_m_max: f64,
    pub eps_eve_m_max: f64,
    pub eps_bob_k_max: f64,
    pub eps_eve_k_min: f64,
    pub throughput_min: f64,
}

impl Thresholds {
    pub fn new(
        eps_bob_m_max: f64,
        eps_eve_m_max: f64,
        eps_bob_k_max: f64,
        eps_eve_k_min: f64,
        throughput_min: f64,
    ) -> Result<Self> {
        for (what, v) in [
            ("eps_bob_m_max", eps_bob_m_max),
            ("eps_eve_m_max", eps_eve_m_max),
            ("eps_bob_k_max", eps_bob_k_max),
            ("eps_eve_k_min", eps_eve_k_min),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(what, v));
            }
        }
        if !throughput_min.is_finite() || throughput_min < 0.0 {
            return Err(Error::domain("throughput_min", throughput_min));
        }
        Ok(Thresholds {
            eps_bob_m_max,
            eps_eve_m_max,
            eps_bob_k_max,
            eps_eve_k_min,
            throughput_min,
        })
    }
}

impl Default for Thresholds {
    /// All erasure thresholds at 0.5 and a 0.1 bit-per-channel-use
    /// throughput floor.
    fn default() -> Self {
        Thresholds {
            eps_bob_m_max: 0.5,
            eps_eve_m_max: 0.5,
            eps_bob_k_max: 0.5,
            eps_eve_k_min: 0.5,
            throughput_min: 0.1,
        }
    }
}

/// The four erasure probabilities of a scenario point together with the
/// derived metrics. Recomputing the derived fields from the four erasure
/// fields reproduces them bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureProfile {
    pub eps_bob_m: f64,
    pub eps_bob_k: f64,
    pub eps_eve_m: f64,
    pub eps_eve_k: f64,
    pub eps_lf: f64,
    pub r_d: f64,
    pub throughput: f64,
}

/// Converts a decibel value to a linear ratio, `10^(x/10)`.
pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return Err(Error::domain("x_db", x_db));
    }
    Ok(10f64.powf(x_db / 10.0))
}

/// Shannon capacity `log2(1 + gamma)` in bits per channel use.
pub fn shannon_capacity(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::domain("gamma", gamma));
    }
    Ok((1.0 + gamma).log2())
}

/// Channel dispersion `1 - (1 + gamma)^-2`, in (0, 1).
pub fn dispersion(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::domain("gamma", gamma));
    }
    let t = 1.0 + gamma;
    Ok(1.0 - 1.0 / (t * t))
}

/// The normal-approximation Q-function argument,
/// `sqrt(n/V) * (C - d/n) * ln 2`. Negative exactly when the code rate `d/n`
/// exceeds capacity.
pub fn omega(n: f64, d: f64, gamma: f64) -> Result<f64> {
    if !n.is_finite() || n <= 0.0 {
        return Err(Error::domain("n", n));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain("d", d));
    }
    let cap = shannon_capacity(gamma)?;
    let disp = dispersion(gamma)?;
    Ok((n / disp).sqrt() * (cap - d / n) * LN_2)
}

/// Erasure probability of a `d`-bit payload in an `n`-use packet at SNR
/// `gamma`: `Q(omega(n, d, gamma))`, strictly inside (0, 1).
pub fn erasure_prob(n: f64, d: f64, gamma: f64) -> Result<f64> {
    q_function(omega(n, d, gamma)?)
}

/// Analytic derivative of `erasure_prob` with respect to the blocklength,
/// `dQ/domega * domega/dn`; always <= 0.
pub fn erasure_prob_grad(n: f64, d: f64, gamma: f64) -> Result<f64> {
    let w = omega(n, d, gamma)?;
    let cap = shannon_capacity(gamma)?;
    let disp = dispersion(gamma)?;
    // dQ/dw = -phi(w)
    let dq_dw = -(-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // dw/dn = (ln 2 / sqrt(V)) * (C / (2 sqrt(n)) + d / (2 n^(3/2)))
    let dw_dn = LN_2 / disp.sqrt() * (cap / (2.0 * n.sqrt()) + d / (2.0 * n.powf(1.5)));
    Ok(dq_dw * dw_dn)
}

/// Probability that a receiver fails to perceive the plaintext:
/// `1 - (1 - eps_m)(1 - eps_k)`.
pub fn non_perception(eps_m: f64, eps_k: f64) -> Result<f64> {
    for (what, v) in [("eps_m", eps_m), ("eps_k", eps_k)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(what, v));
        }
    }
    Ok(1.0 - (1.0 - eps_m) * (1.0 - eps_k))
}

/// Leakage-failure probability: the transmission fails when Bob does not
/// perceive the plaintext or Eve does,
/// `1 - (1-e_BM)(1-e_BK) * [1 - (1-e_EM)(1-e_EK)]`.
pub fn leakage_failure(
    eps_bob_m: f64,
    eps_bob_k: f64,
    eps_eve_m: f64,
    eps_eve_k: f64,
) -> Result<f64> {
    for (what, v) in [
        ("eps_bob_m", eps_bob_m),
        ("eps_bob_k", eps_bob_k),
        ("eps_eve_m", eps_eve_m),
        ("eps_eve_k", eps_eve_k),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(what, v));
        }
    }
    let bob_perceives = (1.0 - eps_bob_m) * (1.0 - eps_bob_k);
    let eve_misses = 1.0 - (1.0 - eps_eve_m) * (1.0 - eps_eve_k);
    Ok(1.0 - bob_perceives * eve_misses)
}

/// Effective deception rate: the probability that Eve, and not Bob, decodes
/// the ciphertext while losing the key,
/// `[1 - (1-e_BM) e_BK] * (1-e_EM) * e_EK`.
pub fn deception_rate(
    eps_bob_m: f64,
    eps_bob_k: f64,
    eps_eve_m: f64,
    eps_eve_k: f64,
) -> Result<f64> {
    for (what, v) in [
        ("eps_bob_m", eps_bob_m),
        ("eps_bob_k", eps_bob_k),
        ("eps_eve_m", eps_eve_m),
        ("eps_eve_k", eps_eve_k),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(what, v));
        }
    }
    Ok((1.0 - (1.0 - eps_bob_m) * eps_bob_k) * (1.0 - eps_eve_m) * eps_eve_k)
}

/// Throughput in bits per channel use, `(1 - eps_lf) * d_m / (n_m + n_k)`.
pub fn throughput(alloc: &CodeAllocation, eps_lf: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps_lf) {
        return Err(Error::domain("eps_lf", eps_lf));
    }
    let total = alloc.total_blocklength();
    if total <= 0.0 {
        return Err(Error::domain("n_m + n_k", total));
    }
    Ok((1.0 - eps_lf) * alloc.d_m as f64 / total)
}

/// Evaluates the full metric profile of a scenario point. In baseline mode
/// (`d_k = 0`) the key erasure probabilities are zero, which reduces the
/// non-perception and leakage-failure expressions to their message-only
/// forms and forces `r_d = 0`.
pub fn evaluate(link: &LinkConfig, alloc: &CodeAllocation) -> Result<ErasureProfile> {
    let d_m = alloc.d_m as f64;
    let d_k = alloc.d_k as f64;
    let eps_bob_m = erasure_prob(alloc.n_m, d_m, link.snr_bob())?;
    let eps_eve_m = erasure_prob(alloc.n_m, d_m, link.snr_eve())?;
    let (eps_bob_k, eps_eve_k) = if alloc.is_baseline() {
        (0.0, 0.0)
    } else {
        (
            erasure_prob(alloc.n_k, d_k, link.snr_bob())?,
            erasure_prob(alloc.n_k, d_k, link.snr_eve())?,
        )
    };
    let eps_lf = leakage_failure(eps_bob_m, eps_bob_k, eps_eve_m, eps_eve_k)?;
    let r_d = if alloc.is_baseline() {
        0.0
    } else {
        deception_rate(eps_bob_m, eps_bob_k, eps_eve_m, eps_eve_k)?
    };
    let throughput = throughput(alloc, eps_lf)?;
    Ok(ErasureProfile {
        eps_bob_m,
        eps_bob_k,
        eps_eve_m,
        eps_eve_k,
        eps_lf,
        r_d,
        throughput,
    })
}

/// Signed slack of each constraint; positive means satisfied with margin,
/// zero means boundary-tight, negative means violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSlack {
    pub bob_m: f64,
    pub eve_m: f64,
    pub bob_k: f64,
    pub eve_k: f64,
    pub throughput: f64,
}

/// Feasibility verdict of a profile against the thresholds (boundary
/// equality counts as feasible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub slack: ConstraintSlack,
}

/// Checks the threshold constraints. In baseline mode the key constraints
/// do not apply and report zero slack.
pub fn check_feasible(
    profile: &ErasureProfile,
    alloc: &CodeAllocation,
    th: &Thresholds,
) -> Feasibility {
    let slack = ConstraintSlack {
        bob_m: th.eps_bob_m_max - profile.eps_bob_m,
        eve_m: th.eps_eve_m_max - profile.eps_eve_m,
        bob_k: if alloc.is_baseline() { 0.0 } else { th.eps_bob_k_max - profile.eps_bob_k },
        eve_k: if alloc.is_baseline() { 0.0 } else { profile.eps_eve_k - th.eps_eve_k_min },
        throughput: profile.throughput - th.throughput_min,
    };
    let feasible = slack.bob_m >= 0.0
        && slack.eve_m >= 0.0
        && slack.bob_k >= 0.0
        && slack.eve_k >= 0.0
        && slack.throughput >= 0.0;
    Feasibility { feasible, slack }
}
