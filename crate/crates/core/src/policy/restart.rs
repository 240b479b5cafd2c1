use crate::error::{Error, Result};

use super::{param, ArmStats, Policy, PolicyKind, PolicyRegistry, PolicySpec, Stream, TieResolver};

/// First round of each of the `d` restart segments: `floor(i*T/d) + 1`.
pub fn restart_starts(horizon: usize, d: usize) -> Vec<usize> {
    (0..d).map(|i| i * horizon / d + 1).collect()
}

/// Runs a fresh copy of the inner policy on each of `d` consecutive
/// sub-horizons. Each copy sees its segment length as its own horizon.
#[derive(Debug)]
pub struct Restarted {
    inner_spec: PolicySpec,
    horizon: usize,
    t: usize,
    starts: Vec<usize>,
    segment: usize,
    copies: Vec<Box<dyn Policy>>,
}

impl Restarted {
    pub fn new(inner: &PolicySpec, d: usize, arms: usize, horizon: usize, registry: &PolicyRegistry) -> Result<Self> {
        if d == 0 {
            return Err(Error::Policy("restart count d must be >= 1".into()));
        }
        if d > horizon {
            return Err(Error::Policy(format!("restart count {d} exceeds the horizon {horizon}")));
        }
        if matches!(inner, PolicySpec::Restarted { .. }) {
            return Err(Error::Policy("restart wrappers cannot be nested".into()));
        }
        let starts = restart_starts(horizon, d);
        let copies = (0..d)
            .map(|i| {
                let end = starts.get(i + 1).map_or(horizon, |s| s - 1);
                registry.build(inner, arms, end + 1 - starts[i])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Restarted { inner_spec: inner.clone(), horizon, t: 1, starts, segment: 0, copies })
    }

    pub fn segment_index(&self) -> usize {
        self.segment
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.copies.iter().map(|c| c.horizon()).collect()
    }

    fn current(&self) -> &dyn Policy {
        self.copies[self.segment].as_ref()
    }
}

impl Policy for Restarted {
    fn spec(&self) -> PolicySpec {
        PolicySpec::restarted(self.inner_spec.clone(), self.copies.len())
    }

    fn arms(&self) -> usize {
        self.current().arms()
    }

    fn round(&self) -> usize {
        self.t
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select_arm(&mut self, rng: &mut Stream, tie: &mut TieResolver) -> Result<usize> {
        if self.t > self.horizon {
            return Err(Error::EpisodeExhausted(self.horizon));
        }
        self.copies[self.segment].select_arm(rng, tie)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.copies[self.segment].observe(arm, reward)?;
        self.t += 1;
        if self.starts.get(self.segment + 1) == Some(&self.t) {
            self.segment += 1;
        }
        Ok(())
    }

    fn stats(&self) -> &ArmStats {
        self.current().stats()
    }

    fn indices(&self) -> Option<Vec<f64>> {
        self.current().indices()
    }

    fn committed_arm(&self) -> Option<usize> {
        self.current().committed_arm()
    }
}

pub struct RestartKind;

impl PolicyKind for RestartKind {
    fn name(&self) -> &'static str {
        "restart"
    }

    fn parse(&self, args: &str, registry: &PolicyRegistry) -> Result<PolicySpec> {
        let (head, inner) = args
            .split_once(':')
            .ok_or_else(|| Error::Policy("expected restart:d=<int>:<inner>".into()))?;
        let d: usize = param(head, "d")?;
        if d == 0 {
            return Err(Error::Policy("restart count d must be >= 1".into()));
        }
        let inner = registry.parse(inner)?;
        if matches!(inner, PolicySpec::Restarted { .. }) {
            return Err(Error::Policy("restart wrappers cannot be nested".into()));
        }
        Ok(PolicySpec::restarted(inner, d))
    }

    fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize, registry: &PolicyRegistry) -> Result<Box<dyn Policy>> {
        match spec {
            PolicySpec::Restarted { inner, d } => Ok(Box::new(Restarted::new(inner, *d, arms, horizon, registry)?)),
            other => Err(Error::Policy(format!("restart cannot build {other}"))),
        }
    }
}
