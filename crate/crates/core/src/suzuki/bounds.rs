//! Parameter selection and analytic error/cost bounds for `[S_2k(-it/r)]^r`.
//!
//! All bounds are expressed through the scaled time `tau = ‖H‖ t`. Operations
//! whose guarantees only hold inside the validity window
//! `eps <= 1 <= 2 m 5^(k-1) tau` report the window status instead of failing,
//! so sweeps can chart where a bound stops applying.

use serde::Serialize;

use super::plan::p_coefficient_dd;
use crate::error::{Error, Result};

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

fn order(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParameter(
            "order index k must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

fn five_pow(exp: f64) -> f64 {
    5f64.powf(exp)
}

/// `p_k = (4 - 4^(1/(2k-1)))^-1`, defined for `k >= 2`.
pub fn p_coefficient(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "p_k needs k >= 2, got {k}"
        )));
    }
    Ok(p_coefficient_dd(k).to_f64())
}

/// Number of exponentials in one merged slice, `2(m-1)5^(k-1) + 1`.
/// Saturates at `u64::MAX`.
pub fn exponential_count(k: u32, m: usize) -> u64 {
    assert!(k >= 1 && m >= 1, "exponential_count needs k, m >= 1");
    5u64.checked_pow(k - 1)
        .and_then(|p| p.checked_mul(2 * (m as u64 - 1)))
        .and_then(|v| v.checked_add(1))
        .unwrap_or(u64::MAX)
}

/// `eps <= 1 <= 2 m 5^(k-1) tau`.
pub fn theorem_window(k: u32, m: usize, tau: f64, eps: f64) -> bool {
    eps <= 1.0 && 1.0 <= 2.0 * m as f64 * five_pow(f64::from(k) - 1.0) * tau
}

/// `max(1, round(½ √(log_5(m tau / eps) + 1)))`.
pub fn choose_k(m: usize, tau: f64, eps: f64) -> Result<u32> {
    positive("m", m as f64)?;
    positive("tau", tau)?;
    positive("eps", eps)?;
    let inner = (m as f64 * tau / eps).log(5.0) + 1.0;
    if inner <= 0.0 {
        return Ok(1);
    }
    let k = (0.5 * inner.sqrt()).round();
    Ok(k.max(1.0) as u32)
}

/// `r = ⌈4 · 5^(k-1/2) (m tau)^(1+1/2k) / eps^(1/2k)⌉`.
pub fn choose_r(k: u32, m: usize, tau: f64, eps: f64) -> Result<u64> {
    order(k)?;
    positive("tau", tau)?;
    positive("eps", eps)?;
    let kf = f64::from(k);
    let mt = m as f64 * tau;
    let raw =
        4.0 * five_pow(kf - 0.5) * mt.powf(1.0 + 1.0 / (2.0 * kf)) / eps.powf(1.0 / (2.0 * kf));
    Ok((raw.ceil() as u64).max(1))
}

/// Exponential-count bound at fixed `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NexpBound {
    /// `2 m 5^(2k) (m tau)^(1+1/2k) / eps^(1/2k)`.
    pub bound: f64,
    /// Slices chosen by [`choose_r`].
    pub slices: u64,
    /// `2 m 5^(k-1) r`, the count the bound is meant to dominate.
    pub counted: f64,
    pub window_ok: bool,
}

pub fn nexp_bound(k: u32, m: usize, tau: f64, eps: f64) -> Result<NexpBound> {
    order(k)?;
    let kf = f64::from(k);
    let mt = m as f64 * tau;
    let bound = 2.0 * m as f64 * five_pow(2.0 * kf) * mt.powf(1.0 + 1.0 / (2.0 * kf))
        / eps.powf(1.0 / (2.0 * kf));
    let slices = choose_r(k, m, tau, eps)?;
    let counted = 2.0 * m as f64 * five_pow(kf - 1.0) * slices as f64;
    let window_ok = theorem_window(k, m, tau, eps);
    debug_assert!(
        !window_ok || counted <= bound,
        "ceiling accounting failed: {counted} > {bound}"
    );
    Ok(NexpBound {
        bound,
        slices,
        counted,
        window_ok,
    })
}

/// Bound with `k` chosen by [`choose_k`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBound {
    pub k: u32,
    /// `4 m² tau · exp(2 √(ln 5 · ln(m tau / eps)))`.
    pub bound: f64,
    /// `eps <= 1 <= m tau / 25`.
    pub window_ok: bool,
}

pub fn nexp_bound_optimal(m: usize, tau: f64, eps: f64) -> Result<OptimalBound> {
    let k = choose_k(m, tau, eps)?;
    let mf = m as f64;
    let log_ratio = (mf * tau / eps).ln().max(0.0);
    let bound = 4.0 * mf * mf * tau * (2.0 * (5f64.ln() * log_ratio).sqrt()).exp();
    let window_ok = eps <= 1.0 && 1.0 <= mf * tau / 25.0;
    Ok(OptimalBound {
        k,
        bound,
        window_ok,
    })
}

/// Both conditions under which the integrator bound holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Restriction {
    /// `4 m 5^(k-1) tau / r`, must be `<= 1`.
    pub step_ratio: f64,
    /// `(16/3)(2 · 5^(k-1) m tau)^(2k+1) / r^(2k)`, must be `<= 1`.
    pub remainder: f64,
}

impl Restriction {
    pub fn step_ok(&self) -> bool {
        self.step_ratio <= 1.0
    }

    pub fn remainder_ok(&self) -> bool {
        self.remainder <= 1.0
    }

    pub fn holds(&self) -> bool {
        self.step_ok() && self.remainder_ok()
    }
}

pub fn restriction(k: u32, m: usize, tau: f64, r: u64) -> Restriction {
    let kf = f64::from(k);
    let rf = r as f64;
    let base = 2.0 * five_pow(kf - 1.0) * m as f64 * tau;
    Restriction {
        step_ratio: 4.0 * m as f64 * five_pow(kf - 1.0) * tau / rf,
        remainder: (16.0 / 3.0) * base.powf(2.0 * kf + 1.0) / rf.powf(2.0 * kf),
    }
}

/// `true` iff both integrator restrictions hold.
pub fn restriction_check(k: u32, m: usize, tau: f64, r: u64) -> bool {
    restriction(k, m, tau, r).holds()
}

/// Spectral-norm error bound for `[S_2k(-it/r)]^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorBound {
    /// `5 (2 · 5^(k-1) m tau)^(2k+1) / r^(2k)`.
    pub bound: f64,
    /// `[1 + (8/3)(2 m 5^(k-1) tau / r)^(2k+1)]^r - 1`.
    pub pre_form: f64,
}

pub fn integrator_error_bound(k: u32, m: usize, tau: f64, r: u64) -> Result<IntegratorBound> {
    order(k)?;
    if r == 0 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be non-negative, got {tau}"
        )));
    }
    let check = restriction(k, m, tau, r);
    if !check.step_ok() {
        return Err(Error::RestrictionViolated(format!(
            "4 m 5^(k-1) tau / r = {} > 1",
            check.step_ratio
        )));
    }
    if !check.remainder_ok() {
        return Err(Error::RestrictionViolated(format!(
            "(16/3)(2 5^(k-1) m tau)^(2k+1) / r^(2k) = {} > 1",
            check.remainder
        )));
    }
    let kf = f64::from(k);
    let rf = r as f64;
    let base = 2.0 * five_pow(kf - 1.0) * m as f64 * tau;
    let bound = 5.0 * base.powf(2.0 * kf + 1.0) / rf.powf(2.0 * kf);
    let per_slice = (8.0 / 3.0) * (base / rf).powf(2.0 * kf + 1.0);
    let pre_form = (rf * per_slice.ln_1p()).exp_m1();
    Ok(IntegratorBound { bound, pre_form })
}
