//! The STDP-derived synaptic update.
//!
//! Activations are read as firing rates, so spike times go as the reciprocal
//! of the activation: `T_pre = 1/x`, `T_post = 1/p`, `ΔT = T_post - T_pre`.
//! In the timing domain the update follows
//!
//! ```text
//! ΔW ∝ ΔT / (T_pre² (T_pre - ΔT)²)
//! ```
//!
//! which, substituting the rates back in, becomes
//!
//! ```text
//! ΔW = η z x³ p (x - p) / ((2p - x)² + ε)
//! ```
//!
//! with `z = ±1` the associativity of the post-synaptic neuron.

use crate::error::{Error, Result};

/// Denominators below this magnitude are treated as poles of the timing curve.
pub const CURVE_POLE_TOLERANCE: f64 = 1e-12;

/// Association sign of a post-synaptic neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Scale and guards for [`stdp_delta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    /// Multiplier on the raw rule. Training leaves this at 1 and lets the
    /// optimizer's learning rate set the step size.
    pub eta: f64,
    /// Added to the squared denominator so the `2p = x` pole stays finite.
    pub epsilon: f64,
    /// Optional clamp on `|Δ|`. Off by default.
    pub delta_cap: Option<f64>,
}

impl Default for RuleParams {
    fn default() -> Self {
        Self {
            eta: 1.0,
            epsilon: 1e-9,
            delta_cap: None,
        }
    }
}

impl RuleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let Some(cap) = self.delta_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::Config(format!(
                    "delta_cap must be positive, got {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// Which sign sits in the denominator of the timing-domain curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveVariant {
    /// `ΔT / (T_pre² (T_pre - ΔT)²)`: the positive-ΔT lobe dominates.
    Corrected,
    /// `ΔT / (T_pre² (T_pre + ΔT)²)`: the direct substitution of the
    /// Hebbian core, whose asymmetry runs the wrong way.
    Uncorrected,
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// `x p (x - p)`: the Hebbian product times the timing sign, before the
/// asymmetry correction.
#[inline]
pub fn hebbian_core(x: f64, p: f64) -> f64 {
    x * p * (x - p)
}

/// Unchecked kernel shared by the scalar and layer-level entry points.
#[inline]
pub(crate) fn raw_delta(x: f64, p: f64, z: f64, params: &RuleParams) -> f64 {
    let gap = 2.0 * p - x;
    let d = params.eta * z * x * x * x * p * (x - p) / (gap * gap + params.epsilon);
    match params.delta_cap {
        Some(cap) => d.clamp(-cap, cap),
        None => d,
    }
}

/// Weight change for one synapse with pre-synaptic rate `x`, post-synaptic
/// rate `p` and post-synaptic association `z`.
pub fn stdp_delta(x: f64, p: f64, z: Sign, params: &RuleParams) -> Result<f64> {
    if !x.is_finite() || !p.is_finite() {
        return Err(Error::Domain(format!("non-finite rate (x = {x}, p = {p})")));
    }
    Ok(raw_delta(x, p, z.value(), params))
}

/// The weight change as a function of spike-time difference.
pub fn stdp_curve(delta_t: f64, t_pre: f64, variant: CurveVariant) -> Result<f64> {
    if !delta_t.is_finite() || !t_pre.is_finite() || t_pre <= 0.0 {
        return Err(Error::Domain(format!(
            "need finite delta_t and positive t_pre (delta_t = {delta_t}, t_pre = {t_pre})"
        )));
    }
    let shifted = match variant {
        CurveVariant::Corrected => t_pre - delta_t,
        CurveVariant::Uncorrected => t_pre + delta_t,
    };
    let denominator = t_pre * t_pre * shifted * shifted;
    if denominator.abs() < CURVE_POLE_TOLERANCE {
        return Err(Error::Singularity {
            delta_t,
            t_pre,
            denominator,
        });
    }
    Ok(delta_t / denominator)
}

/// One sampled point of both curve variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub delta_t: f64,
    pub corrected: f64,
    pub uncorrected: f64,
}

/// Samples both variants at `t_pre` over `[-limit, limit]` in `step`
/// increments. Grid points are computed as `i * step` so there is no
/// accumulated drift.
pub fn sample_curves(t_pre: f64, limit: f64, step: f64) -> Result<Vec<CurvePoint>> {
    if !(step > 0.0 && limit >= 0.0) {
        return Err(Error::Config(format!(
            "curve grid needs step > 0 and limit >= 0 (step = {step}, limit = {limit})"
        )));
    }
    let n = (limit / step + 1e-9).floor() as i64;
    (-n..=n)
        .map(|i| {
            let delta_t = i as f64 * step;
            Ok(CurvePoint {
                delta_t,
                corrected: stdp_curve(delta_t, t_pre, CurveVariant::Corrected)?,
                uncorrected: stdp_curve(delta_t, t_pre, CurveVariant::Uncorrected)?,
            })
        })
        .collect()
}
