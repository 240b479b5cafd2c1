//! Lower-bound calculators for worst-case regret.
//!
//! Every function returns a [`BoundValue`] in regret units (rounds times
//! reward). A bound whose value is not positive is flagged `vacuous`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub formula: &'static str,
    pub inputs: BTreeMap<&'static str, f64>,
    /// A weaker companion bound reported alongside (the `(1-1/K)T` form
    /// for ETC, the `0.07 (1-1/K) T` floor for UCB).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    pub vacuous: bool,
}

impl BoundValue {
    fn new(value: f64, formula: &'static str, inputs: &[(&'static str, f64)]) -> Self {
        BoundValue {
            value,
            formula,
            inputs: inputs.iter().copied().collect(),
            floor: None,
            vacuous: value.is_nan() || value <= 0.0,
        }
    }

    fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }
}

/// `T - m`, which dominates `(1 - 1/K) T` whenever `m <= T/K`.
pub fn etc_bound(horizon: usize, m: usize, arms: usize) -> Result<BoundValue> {
    if arms == 0 || m * arms > horizon {
        return Err(Error::precondition(format!("ETC bound needs m <= T/K (m = {m}, T = {horizon}, K = {arms})")));
    }
    let t = horizon as f64;
    Ok(BoundValue::new(t - m as f64, "etc:T-m", &[("T", t), ("m", m as f64), ("K", arms as f64)])
        .with_floor((1.0 - 1.0 / arms as f64) * t))
}

/// `T / (1 + (eps/K) T)`, the early-switch instance bound.
pub fn eg_bound_early(horizon: usize, arms: usize, eps: f64) -> BoundValue {
    let t = horizon as f64;
    BoundValue::new(
        t / (1.0 + eps / arms as f64 * t),
        "eg-early:T/(1+(eps/K)T)",
        &[("T", t), ("K", arms as f64), ("eps", eps)],
    )
}

/// `0.25 (T - sqrt(K T / eps))`, the mid-horizon instance bound.
pub fn eg_bound_mid(horizon: usize, arms: usize, eps: f64) -> Result<BoundValue> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::precondition(format!("eps = {eps} must lie in (0, 1]")));
    }
    let t = horizon as f64;
    Ok(BoundValue::new(
        0.25 * (t - (arms as f64 * t / eps).sqrt()),
        "eg-mid:0.25(T-sqrt(KT/eps))",
        &[("T", t), ("K", arms as f64), ("eps", eps)],
    ))
}

/// `T / 8`, valid for every `eps`.
pub fn eg_bound_combined(horizon: usize) -> BoundValue {
    let t = horizon as f64;
    BoundValue::new(t / 8.0, "eg:T/8", &[("T", t)])
}

/// `(1 - 1/K)(T - K c)(1 - delta)` for a concrete UCB construction.
pub fn ucb_bound_exact(horizon: usize, arms: usize, c: usize, delta: f64) -> BoundValue {
    let (t, k) = (horizon as f64, arms as f64);
    BoundValue::new(
        (1.0 - 1.0 / k) * (t - k * c as f64) * (1.0 - delta),
        "ucb:(1-1/K)(T-Kc)(1-delta)",
        &[("T", t), ("K", k), ("c", c as f64), ("delta", delta)],
    )
}

/// `0.07 (1 - 1/K) T`.
pub fn ucb_floor(horizon: usize, arms: usize) -> f64 {
    0.07 * (1.0 - 1.0 / arms as f64) * horizon as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// Second factor `1 - (K ln T / T)^(1/3)` as printed with the theorem.
    Printed,
    /// Second factor `1 - (4 K ln T / T)^(1/3)`, which is what
    /// `1 - alpha (T alpha / 2K)^(-1/3)` simplifies to.
    Corrected,
}

pub fn ucb_bound_closed(horizon: usize, arms: usize, form: ClosedForm) -> Result<BoundValue> {
    crate::forge::ucb_precondition(horizon, arms)?;
    let (t, k) = (horizon as f64, arms as f64);
    let ln = t.ln();
    let first = 1.0 - (2.0 * k * ln / t).cbrt();
    let (second, formula) = match form {
        ClosedForm::Printed => (1.0 - (k * ln / t).cbrt(), "ucb:closed-printed"),
        ClosedForm::Corrected => (1.0 - (4.0 * k * ln / t).cbrt(), "ucb:closed-corrected"),
    };
    Ok(BoundValue::new((1.0 - 1.0 / k) * t * first * second, formula, &[("T", t), ("K", k)])
        .with_floor(ucb_floor(horizon, arms)))
}

/// `sqrt(K d T) / 20` for any policy restarted every `T/d` rounds.
pub fn restart_stationary_bound(arms: usize, d: usize, horizon: usize) -> Result<BoundValue> {
    if d == 0 || arms * d > horizon {
        return Err(Error::precondition(format!("need K <= T/d (K = {arms}, d = {d}, T = {horizon})")));
    }
    let (k, dd, t) = (arms as f64, d as f64, horizon as f64);
    Ok(BoundValue::new((k * dd * t).sqrt() / 20.0, "restart:sqrt(KdT)/20", &[("K", k), ("d", dd), ("T", t)]))
}

/// Restarted-policy bound given a single-change rate `a`:
/// `(G/d) a T + (1 - G/d) sqrt(K d T) / 20` for `G <= d`, else `a T`.
pub fn restart_change_bound(a: f64, horizon: usize, d: usize, gamma: usize, arms: usize) -> Result<BoundValue> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::precondition(format!("rate a = {a} must lie in (0, 1]")));
    }
    if d == 0 {
        return Err(Error::precondition("d must be positive"));
    }
    let (t, dd, g, k) = (horizon as f64, d as f64, gamma as f64, arms as f64);
    let value = if gamma <= d {
        g / dd * a * t + (1.0 - g / dd) * (k * dd * t).sqrt() / 20.0
    } else {
        a * t
    };
    Ok(BoundValue::new(
        value,
        "restart:piecewise",
        &[("a", a), ("T", t), ("d", dd), ("gamma", g), ("K", k)],
    ))
}

/// Single-change regret rate of each restartable family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Etc,
    EpsGreedy,
    Ucb,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Etc, Family::EpsGreedy, Family::Ucb];

    /// `a` with worst-case single-change regret at least `a T`.
    pub fn rate(&self, arms: usize) -> f64 {
        let k = arms as f64;
        match self {
            Family::Etc => 1.0 - 1.0 / k,
            Family::EpsGreedy => 0.125,
            Family::Ucb => 0.07 * (1.0 - 1.0 / k),
        }
    }
}

/// Family-specific restart bound: [`restart_change_bound`] with the family rate.
pub fn restart_family_bound(family: Family, horizon: usize, d: usize, gamma: usize, arms: usize) -> Result<BoundValue> {
    restart_change_bound(family.rate(arms), horizon, d, gamma, arms)
}

/// The change-driven part `(min(d, G)/d) a T` alone.
pub fn restart_change_term(a: f64, horizon: usize, d: usize, gamma: usize) -> f64 {
    d.min(gamma) as f64 / d as f64 * a * horizon as f64
}
