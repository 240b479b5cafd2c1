//! Constructors for the single-change instances that trap each policy, and
//! the parameter algebra behind the UCB construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, RewardSpec};
use crate::policy::UcbVariant;

/// Confidence-radius scale `sqrt(2 ln T)`.
pub fn alpha(horizon: f64) -> f64 {
    (2.0 * horizon.ln()).max(0.0).sqrt()
}

/// `T > 4 K ln T`, required by the UCB construction.
pub fn ucb_precondition(horizon: usize, arms: usize) -> Result<()> {
    let t = horizon as f64;
    let need = 4.0 * arms as f64 * t.ln();
    if arms >= 2 && t > need {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "UCB construction needs T > 4K ln T, but 4*{arms}*ln({horizon}) = {need:.1} >= {horizon}"
        )))
    }
}

/// Admissible range `[(T a / 2K)^(2/3), (T a / K)^(2/3)]` for the per-arm
/// pre-change pull count `c`.
pub fn ucb_c_interval(horizon: usize, arms: usize) -> Result<(f64, f64)> {
    ucb_precondition(horizon, arms)?;
    let base = horizon as f64 * alpha(horizon as f64) / arms as f64;
    Ok(((base / 2.0).powf(2.0 / 3.0), base.powf(2.0 / 3.0)))
}

/// Lock-in test: after `K c` all-zero rounds and a change to `(1, delta, ..)`,
/// a non-optimal arm picked at the tie keeps the strictly largest index for
/// every `x = 1..=T-Kc`.
///
/// The known-horizon mode uses `ln T` throughout; the anytime mode uses
/// `ln(Kc + x)` at step `x`.
pub fn check_inertia_condition(c: usize, delta: f64, horizon: usize, arms: usize, variant: UcbVariant) -> bool {
    first_inertia_failure(c, delta, horizon, arms, variant).is_none()
}

/// The first `x` at which the lock-in inequality fails, if any.
/// Degenerate inputs (`c = 0` or `Kc + 1 > T`) report `Some(0)`.
pub fn first_inertia_failure(c: usize, delta: f64, horizon: usize, arms: usize, variant: UcbVariant) -> Option<usize> {
    let pre = arms * c;
    if c == 0 || pre + 1 > horizon {
        return Some(0);
    }
    let cf = c as f64;
    let known_log = (horizon as f64).ln();
    (1..=horizon - pre).find(|&x| {
        let log = match variant {
            UcbVariant::KnownHorizon => known_log,
            UcbVariant::Anytime => ((pre + x) as f64).ln(),
        };
        let n = cf + x as f64;
        let lhs = delta * x as f64 / n + (2.0 * log / n).sqrt();
        let rhs = (2.0 * log / cf).sqrt();
        lhs <= rhs
    })
}

/// Parameters of the UCB fooling instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcbForgeParams {
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "K")]
    pub arms: usize,
    pub alpha: f64,
    pub c: usize,
    pub delta: f64,
    /// First round with the post-change rewards, `K c + 1`.
    pub breakpoint: usize,
}

impl UcbForgeParams {
    /// Sidecar record written next to a forged UCB instance.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.alpha,
            "c": self.c,
            "delta": self.delta,
            "breakpoint": self.breakpoint,
        })
    }

    /// Rounds after the change, `T - K c`.
    pub fn tail(&self) -> usize {
        self.horizon - self.arms * self.c
    }

    /// The instance these parameters describe.
    pub fn instance(&self) -> Result<Instance> {
        let mut post = vec![self.delta; self.arms];
        post[0] = 1.0;
        Instance::from_phases(
            self.arms,
            0,
            &[(self.arms * self.c, vec![0.0; self.arms]), (self.tail(), post)],
        )
    }
}

/// All-zero rewards for `K c` rounds, then `(1, delta, ..., delta)` with the
/// smallest admissible integer `c` and `delta = alpha / sqrt(c)`.
pub fn forge_ucb(horizon: usize, arms: usize) -> Result<(Instance, UcbForgeParams)> {
    let (lo, hi) = ucb_c_interval(horizon, arms)?;
    let c = lo.ceil() as usize;
    assert!(
        (c as f64) <= hi,
        "no integer in [{lo}, {hi}] although T > 4K ln T holds"
    );
    let a = alpha(horizon as f64);
    let delta = a / (c as f64).sqrt();
    if delta.is_nan() || delta >= 1.0 || (c as f64) <= a * a {
        return Err(Error::precondition(format!("delta {delta} must be below 1 (c = {c}, alpha^2 = {})", a * a)));
    }
    if arms * c + 1 > horizon {
        return Err(Error::precondition("change point falls beyond the horizon"));
    }
    let params = UcbForgeParams { horizon, arms, alpha: a, c, delta, breakpoint: arms * c + 1 };
    for variant in [UcbVariant::KnownHorizon, UcbVariant::Anytime] {
        if let Some(x) = first_inertia_failure(c, delta, horizon, arms, variant) {
            return Err(Error::precondition(format!("lock-in condition ({variant:?}) fails at x = {x}")));
        }
    }
    Ok((params.instance()?, params))
}

/// `(0, ..., 0, 1)` during the `mK` exploration rounds, `(1, 0, ..., 0)` after.
pub fn forge_etc(horizon: usize, arms: usize, m: usize) -> Result<Instance> {
    if arms < 2 || m == 0 {
        return Err(Error::precondition("ETC construction needs K >= 2 and m >= 1"));
    }
    let explore = m * arms;
    if explore >= horizon {
        return Err(Error::precondition(format!(
            "mK = {explore} leaves no commit phase within T = {horizon}"
        )));
    }
    let mut pre = vec![0.0; arms];
    pre[arms - 1] = 1.0;
    let mut post = vec![0.0; arms];
    post[0] = 1.0;
    Instance::from_phases(arms, 0, &[(explore, pre), (horizon - explore, post)])
}

/// `(1, 0, ..., 0)` over the `K` initialization rounds (excluded from
/// regret), then `(0, 1, 0, ..., 0)`.
pub fn forge_eg_early(horizon: usize, arms: usize) -> Result<Instance> {
    if arms < 2 || horizon <= arms {
        return Err(Error::precondition(format!("need T > K (T = {horizon}, K = {arms})")));
    }
    let mut pre = vec![0.0; arms];
    pre[0] = 1.0;
    let mut post = vec![0.0; arms];
    post[1] = 1.0;
    Instance::from_phases(arms, arms, &[(arms, pre), (horizon - arms, post)])
}

/// `(0.5, 0, ..., 0)` for the first `T/2` rounds, then `(0.5, 1, 0, ..., 0)`.
pub fn forge_eg_mid(horizon: usize, arms: usize) -> Result<Instance> {
    if !horizon.is_multiple_of(2) {
        return Err(Error::precondition(format!("T = {horizon} must be even")));
    }
    if arms < 2 || horizon < 2 * arms {
        return Err(Error::precondition(format!("need T >= 2K (T = {horizon}, K = {arms})")));
    }
    let half = horizon / 2;
    let mut pre = vec![0.0; arms];
    pre[0] = 0.5;
    let mut post = pre.clone();
    post[1] = 1.0;
    Instance::from_phases(arms, 0, &[(half, pre), (half, post)])
}

/// Which single-change construction a composite embeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleChange {
    Ucb,
    Etc { m: usize },
    EgEarly,
    EgMid,
}

impl SingleChange {
    pub fn forge(&self, horizon: usize, arms: usize) -> Result<Instance> {
        match *self {
            SingleChange::Ucb => forge_ucb(horizon, arms).map(|(inst, _)| inst),
            SingleChange::Etc { m } => forge_etc(horizon, arms, m),
            SingleChange::EgEarly => forge_eg_early(horizon, arms),
            SingleChange::EgMid => forge_eg_mid(horizon, arms),
        }
    }
}

impl fmt::Display for SingleChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingleChange::Ucb => f.write_str("ucb"),
            SingleChange::Etc { m } => write!(f, "etc:m={m}"),
            SingleChange::EgEarly => f.write_str("eg-early"),
            SingleChange::EgMid => f.write_str("eg-mid"),
        }
    }
}

impl FromStr for SingleChange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ucb" => Ok(SingleChange::Ucb),
            "eg-early" => Ok(SingleChange::EgEarly),
            "eg-mid" => Ok(SingleChange::EgMid),
            other => match other.strip_prefix("etc:m=") {
                Some(m) => m
                    .parse()
                    .map(|m| SingleChange::Etc { m })
                    .map_err(|_| Error::precondition(format!("bad m in `{other}`"))),
                None => Err(Error::Unknown { what: "instance kind", name: other.to_string() }),
            },
        }
    }
}

/// Restart-aware instance: each of the first `min(d, gamma)` restart
/// segments (length `T/d`) holds a copy of the single-change construction
/// aligned with the segment start; the remaining rounds form one stationary
/// segment that continues the last copy's final rewards.
///
/// Consecutive copies differ at their shared boundary, so the instance has
/// `2 min(d, gamma) - 1` breakpoints (zero when `gamma = 0`, which yields an
/// all-zero stationary instance). Only the first copy's initialization
/// rounds are excluded from regret.
pub fn forge_restart_composite(horizon: usize, arms: usize, d: usize, gamma: usize, kind: SingleChange) -> Result<Instance> {
    if d == 0 || !horizon.is_multiple_of(d) {
        return Err(Error::precondition(format!("d = {d} must divide T = {horizon}")));
    }
    let len = horizon / d;
    let copies = d.min(gamma);
    if copies == 0 {
        return Instance::stationary(arms, horizon, vec![RewardSpec::det(0.0); arms]);
    }
    let block = kind.forge(len, arms)?;
    let mut segments = Vec::new();
    for i in 0..copies {
        segments.extend(block.shifted_segments(i * len));
    }
    if copies < d {
        let last = segments.last_mut().expect("copies > 0");
        last.end = horizon;
    }
    Instance::new(arms, horizon, block.init_rounds, segments)
}
