use crate::error::{Error, Result};

use super::{argmax, no_args, ArmStats, Ledger, Policy, PolicyKind, PolicyRegistry, PolicySpec, Stream, TieResolver};

/// `mean + sqrt(2 * logterm / n)`, or `+inf` for an unpulled arm.
pub fn ucb_index(mean: f64, n: u64, logterm: f64) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        mean + (2.0 * logterm / n as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UcbVariant {
    /// Confidence radius uses `ln T`.
    KnownHorizon,
    /// Confidence radius uses `ln t`; the horizon is only used to end the episode.
    Anytime,
}

#[derive(Clone, Debug)]
pub struct Ucb {
    ledger: Ledger,
    variant: UcbVariant,
    scratch: Vec<f64>,
}

impl Ucb {
    pub fn new(variant: UcbVariant, arms: usize, horizon: usize) -> Self {
        Ucb { ledger: Ledger::new(arms, horizon), variant, scratch: vec![0.0; arms] }
    }

    pub fn variant(&self) -> UcbVariant {
        self.variant
    }

    fn logterm(&self) -> f64 {
        match self.variant {
            UcbVariant::KnownHorizon => (self.ledger.horizon as f64).ln(),
            UcbVariant::Anytime => (self.ledger.t as f64).ln(),
        }
    }

    fn fill_indices(&mut self) {
        let log = self.logterm();
        let stats = &self.ledger.stats;
        for (k, slot) in self.scratch.iter_mut().enumerate() {
            *slot = ucb_index(stats.mean(k).unwrap_or(0.0), stats.count(k), log);
        }
    }
}

impl Policy for Ucb {
    fn spec(&self) -> PolicySpec {
        match self.variant {
            UcbVariant::KnownHorizon => PolicySpec::UcbKnownHorizon,
            UcbVariant::Anytime => PolicySpec::UcbAnytime,
        }
    }

    fn arms(&self) -> usize {
        self.ledger.arms()
    }

    fn round(&self) -> usize {
        self.ledger.t
    }

    fn horizon(&self) -> usize {
        self.ledger.horizon
    }

    fn select_arm(&mut self, _rng: &mut Stream, tie: &mut TieResolver) -> Result<usize> {
        self.ledger.begin()?;
        self.fill_indices();
        let arm = argmax(&self.scratch, tie);
        Ok(self.ledger.chose(arm))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.ledger.observe(arm, reward)
    }

    fn stats(&self) -> &ArmStats {
        &self.ledger.stats
    }

    fn indices(&self) -> Option<Vec<f64>> {
        let log = self.logterm();
        let stats = &self.ledger.stats;
        Some((0..self.arms()).map(|k| ucb_index(stats.mean(k).unwrap_or(0.0), stats.count(k), log)).collect())
    }
}

pub struct UcbKnownKind;
pub struct UcbAnytimeKind;

fn build_ucb(variant: UcbVariant, spec: &PolicySpec, arms: usize, horizon: usize) -> Result<Box<dyn Policy>> {
    match (variant, spec) {
        (UcbVariant::KnownHorizon, PolicySpec::UcbKnownHorizon) | (UcbVariant::Anytime, PolicySpec::UcbAnytime) => {
            Ok(Box::new(Ucb::new(variant, arms, horizon)))
        }
        (_, other) => Err(Error::Policy(format!("UCB kind cannot build {other}"))),
    }
}

impl PolicyKind for UcbKnownKind {
    fn name(&self) -> &'static str {
        "ucb-known"
    }

    fn parse(&self, args: &str, _: &PolicyRegistry) -> Result<PolicySpec> {
        no_args(self.name(), args)?;
        Ok(PolicySpec::UcbKnownHorizon)
    }

    fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize, _: &PolicyRegistry) -> Result<Box<dyn Policy>> {
        build_ucb(UcbVariant::KnownHorizon, spec, arms, horizon)
    }
}

impl PolicyKind for UcbAnytimeKind {
    fn name(&self) -> &'static str {
        "ucb-anytime"
    }

    fn parse(&self, args: &str, _: &PolicyRegistry) -> Result<PolicySpec> {
        no_args(self.name(), args)?;
        Ok(PolicySpec::UcbAnytime)
    }

    fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize, _: &PolicyRegistry) -> Result<Box<dyn Policy>> {
        build_ucb(UcbVariant::Anytime, spec, arms, horizon)
    }
}
