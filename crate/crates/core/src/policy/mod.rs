//! Bandit policies behind one object-safe interface.
//!
//! Every algorithm implements [`Policy`] and is registered by name in a
//! [`PolicyRegistry`]. A [`PolicySpec`] names an algorithm and its
//! parameters; its string form is the designation used on the command line
//! (`etc:m=20`, `eps-greedy:eps=0.1`, `ucb-known`, `ucb-anytime`,
//! `restart:d=4:ucb-known`).

mod etc;
mod greedy;
mod restart;
mod ties;
mod ucb;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use etc::{EtcKind, ExploreThenCommit};
pub use greedy::{EpsilonGreedy, EpsilonGreedyKind};
pub use restart::{restart_starts, RestartKind, Restarted};
pub use ties::{TieResolver, TieRule};
pub use ucb::{ucb_index, Ucb, UcbAnytimeKind, UcbKnownKind, UcbVariant};

/// Random stream type used for policy randomization and reward draws.
pub type Stream = ChaCha8Rng;

/// Which algorithm to run, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Etc { m: usize },
    EpsilonGreedy { eps: f64 },
    UcbKnownHorizon,
    UcbAnytime,
    Restarted { inner: Box<PolicySpec>, d: usize },
}

impl PolicySpec {
    /// Registry key of the algorithm.
    pub fn kind_name(&self) -> &'static str {
        match self {
            PolicySpec::Etc { .. } => "etc",
            PolicySpec::EpsilonGreedy { .. } => "eps-greedy",
            PolicySpec::UcbKnownHorizon => "ucb-known",
            PolicySpec::UcbAnytime => "ucb-anytime",
            PolicySpec::Restarted { .. } => "restart",
        }
    }

    pub fn restarted(inner: PolicySpec, d: usize) -> Self {
        PolicySpec::Restarted { inner: Box::new(inner), d }
    }

    pub fn uses_indices(&self) -> bool {
        match self {
            PolicySpec::UcbKnownHorizon | PolicySpec::UcbAnytime => true,
            PolicySpec::Restarted { inner, .. } => inner.uses_indices(),
            _ => false,
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Etc { m } => write!(f, "etc:m={m}"),
            PolicySpec::EpsilonGreedy { eps } => write!(f, "eps-greedy:eps={eps}"),
            PolicySpec::UcbKnownHorizon => f.write_str("ucb-known"),
            PolicySpec::UcbAnytime => f.write_str("ucb-anytime"),
            PolicySpec::Restarted { inner, d } => write!(f, "restart:d={d}:{inner}"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        registry().parse(s)
    }
}

/// Per-arm pull counts and reward sums.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArmStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl ArmStats {
    pub fn new(arms: usize) -> Self {
        ArmStats { counts: vec![0; arms], sums: vec![0.0; arms] }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical mean, `None` for an unpulled arm.
    pub fn mean(&self, arm: usize) -> Option<f64> {
        match self.counts[arm] {
            0 => None,
            n => Some(self.sums[arm] / n as f64),
        }
    }

    pub fn empirical_mean(&self, arm: usize) -> Result<f64> {
        self.mean(arm).ok_or(Error::UnpulledArm { arm })
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
    }
}

/// Round bookkeeping shared by the concrete policies.
#[derive(Clone, Debug)]
pub(crate) struct Ledger {
    pub horizon: usize,
    /// Round about to be played (1-based).
    pub t: usize,
    pub stats: ArmStats,
    pending: Option<usize>,
}

impl Ledger {
    pub fn new(arms: usize, horizon: usize) -> Self {
        Ledger { horizon, t: 1, stats: ArmStats::new(arms), pending: None }
    }

    pub fn arms(&self) -> usize {
        self.stats.arms()
    }

    pub fn begin(&self) -> Result<()> {
        if self.t > self.horizon {
            return Err(Error::EpisodeExhausted(self.horizon));
        }
        if self.pending.is_some() {
            return Err(Error::Policy("select_arm called twice without observe".into()));
        }
        Ok(())
    }

    pub fn chose(&mut self, arm: usize) -> usize {
        self.pending = Some(arm);
        arm
    }

    pub fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        check_reward(reward)?;
        match self.pending {
            Some(a) if a == arm => {}
            Some(a) => {
                return Err(Error::Policy(format!("observed arm {arm} but arm {a} was selected")))
            }
            None => return Err(Error::Policy("observe without a selected arm".into())),
        }
        self.pending = None;
        self.stats.record(arm, reward);
        self.t += 1;
        Ok(())
    }
}

pub(crate) fn check_reward(reward: f64) -> Result<()> {
    if (0.0..=1.0).contains(&reward) {
        Ok(())
    } else {
        Err(Error::Policy(format!("reward {reward} outside [0,1]")))
    }
}

/// Argmax over `values` with exact-equality ties sent to the resolver.
pub(crate) fn argmax(values: &[f64], tie: &mut TieResolver) -> usize {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut first = None;
    let mut ties = 0usize;
    for (k, &v) in values.iter().enumerate() {
        if v == max {
            first.get_or_insert(k);
            ties += 1;
        }
    }
    let first = first.unwrap_or(0);
    if ties <= 1 {
        return first;
    }
    let candidates: Vec<usize> = (0..values.len()).filter(|&k| values[k] == max).collect();
    tie.resolve(&candidates)
}

/// A running bandit algorithm: one episode, one thread.
pub trait Policy: Send + fmt::Debug {
    fn spec(&self) -> PolicySpec;

    fn arms(&self) -> usize;

    /// The round the next `select_arm` call plays.
    fn round(&self) -> usize;

    fn horizon(&self) -> usize;

    fn select_arm(&mut self, rng: &mut Stream, tie: &mut TieResolver) -> Result<usize>;

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()>;

    /// Statistics the next decision is based on (the current restart segment
    /// for restarted policies).
    fn stats(&self) -> &ArmStats;

    fn empirical_mean(&self, arm: usize) -> Result<f64> {
        self.stats().empirical_mean(arm)
    }

    /// Indices the next selection would compare, for index policies.
    fn indices(&self) -> Option<Vec<f64>> {
        None
    }

    fn committed_arm(&self) -> Option<usize> {
        None
    }
}

/// A registrable algorithm family.
pub trait PolicyKind: Send + Sync {
    fn name(&self) -> &'static str;

    /// Parses the designation text after `<name>` (and its `:`), if any.
    fn parse(&self, args: &str, registry: &PolicyRegistry) -> Result<PolicySpec>;

    fn build(
        &self,
        spec: &PolicySpec,
        arms: usize,
        horizon: usize,
        registry: &PolicyRegistry,
    ) -> Result<Box<dyn Policy>>;
}

pub struct PolicyRegistry {
    kinds: BTreeMap<&'static str, Box<dyn PolicyKind>>,
}

impl PolicyRegistry {
    pub fn empty() -> Self {
        PolicyRegistry { kinds: BTreeMap::new() }
    }

    pub fn register(&mut self, kind: Box<dyn PolicyKind>) {
        self.kinds.insert(kind.name(), kind);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.kinds.keys().copied()
    }

    fn kind(&self, name: &str) -> Result<&dyn PolicyKind> {
        self.kinds
            .get(name)
            .map(|k| k.as_ref())
            .ok_or_else(|| Error::Unknown { what: "policy", name: name.to_string() })
    }

    pub fn parse(&self, designation: &str) -> Result<PolicySpec> {
        let designation = designation.trim();
        let (name, args) = designation.split_once(':').unwrap_or((designation, ""));
        self.kind(name)?.parse(args, self)
    }

    pub fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize) -> Result<Box<dyn Policy>> {
        if arms < 2 {
            return Err(Error::Policy(format!("need at least 2 arms, got {arms}")));
        }
        if horizon == 0 {
            return Err(Error::Policy("horizon must be positive".into()));
        }
        self.kind(spec.kind_name())?.build(spec, arms, horizon, self)
    }
}

impl Default for PolicyRegistry {
    fn default() -> Self {
        let mut reg = PolicyRegistry::empty();
        reg.register(Box::new(EtcKind));
        reg.register(Box::new(EpsilonGreedyKind));
        reg.register(Box::new(UcbKnownKind));
        reg.register(Box::new(UcbAnytimeKind));
        reg.register(Box::new(RestartKind));
        reg
    }
}

/// Process-wide registry holding the built-in algorithms.
pub fn registry() -> &'static PolicyRegistry {
    static REGISTRY: OnceLock<PolicyRegistry> = OnceLock::new();
    REGISTRY.get_or_init(PolicyRegistry::default)
}

/// Fresh policy state for `arms` arms over `horizon` rounds.
pub fn init_policy(spec: &PolicySpec, arms: usize, horizon: usize) -> Result<Box<dyn Policy>> {
    registry().build(spec, arms, horizon)
}

/// Reads `key=value` out of a designation argument list.
pub(crate) fn param<T: FromStr>(args: &str, key: &str) -> Result<T> {
    for part in args.split([':', ',']) {
        if let Some((k, v)) = part.split_once('=') {
            if k.trim() == key {
                return v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Policy(format!("bad value `{v}` for {key}")));
            }
        }
    }
    Err(Error::Policy(format!("missing parameter `{key}`")))
}

pub(crate) fn no_args(name: &str, args: &str) -> Result<()> {
    if args.trim().is_empty() {
        Ok(())
    } else {
        Err(Error::Policy(format!("{name} takes no parameters, got `{args}`")))
    }
}
