use crate::error::{Error, Result};

use super::{argmax, param, ArmStats, Ledger, Policy, PolicyKind, PolicyRegistry, PolicySpec, Stream, TieResolver};

/// Explore-then-commit: `m` round-robin pulls per arm, then the empirical
/// argmax for the rest of the episode.
#[derive(Clone, Debug)]
pub struct ExploreThenCommit {
    ledger: Ledger,
    m: usize,
    committed: Option<usize>,
    scratch: Vec<f64>,
}

impl ExploreThenCommit {
    pub fn new(m: usize, arms: usize, horizon: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Policy("ETC needs m >= 1".into()));
        }
        if m * arms > horizon {
            return Err(Error::Policy(format!(
                "ETC exploration of {} rounds exceeds the horizon {horizon}",
                m * arms
            )));
        }
        Ok(ExploreThenCommit { ledger: Ledger::new(arms, horizon), m, committed: None, scratch: vec![0.0; arms] })
    }

    pub fn exploration_rounds(&self) -> usize {
        self.m * self.ledger.arms()
    }
}

impl Policy for ExploreThenCommit {
    fn spec(&self) -> PolicySpec {
        PolicySpec::Etc { m: self.m }
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
        let t = self.ledger.t;
        let arms = self.ledger.arms();
        if t <= self.exploration_rounds() {
            return Ok(self.ledger.chose((t - 1) % arms));
        }
        let arm = match self.committed {
            Some(a) => a,
            None => {
                for k in 0..arms {
                    self.scratch[k] = self.ledger.stats.empirical_mean(k)?;
                }
                let a = argmax(&self.scratch, tie);
                self.committed = Some(a);
                a
            }
        };
        Ok(self.ledger.chose(arm))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.ledger.observe(arm, reward)
    }

    fn stats(&self) -> &ArmStats {
        &self.ledger.stats
    }

    fn committed_arm(&self) -> Option<usize> {
        self.committed
    }
}

pub struct EtcKind;

impl PolicyKind for EtcKind {
    fn name(&self) -> &'static str {
        "etc"
    }

    fn parse(&self, args: &str, _: &PolicyRegistry) -> Result<PolicySpec> {
        let m: usize = param(args, "m")?;
        if m == 0 {
            return Err(Error::Policy("ETC needs m >= 1".into()));
        }
        Ok(PolicySpec::Etc { m })
    }

    fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize, _: &PolicyRegistry) -> Result<Box<dyn Policy>> {
        match spec {
            PolicySpec::Etc { m } => Ok(Box::new(ExploreThenCommit::new(*m, arms, horizon)?)),
            other => Err(Error::Policy(format!("etc cannot build {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::TieRule;
    use rand::SeedableRng;

    fn streams() -> (Stream, TieResolver) {
        (Stream::seed_from_u64(0), TieResolver::new(TieRule::Uniform, Stream::seed_from_u64(1)))
    }

    #[test]
    fn exploration_schedule() {
        let p = ExploreThenCommit::new(20, 2, 1000).unwrap();
        assert_eq!(p.exploration_rounds(), 40);
        assert!(ExploreThenCommit::new(50, 2, 99).is_err());
    }

    #[test]
    fn commits_to_best_after_round_robin() {
        let (mut rng, mut tie) = streams();
        let mut p = ExploreThenCommit::new(1, 2, 10).unwrap();
        let rewards = [0.0, 1.0];
        for t in 1..=2 {
            let a = p.select_arm(&mut rng, &mut tie).unwrap();
            assert_eq!(a, t - 1);
            p.observe(a, rewards[a]).unwrap();
        }
        for _ in 3..=10 {
            let a = p.select_arm(&mut rng, &mut tie).unwrap();
            assert_eq!(a, 1);
            // the committed arm never changes, whatever it now pays
            p.observe(a, 0.0).unwrap();
        }
        assert_eq!(p.committed_arm(), Some(1));
    }

    #[test]
    fn round_robin_order_for_three_arms() {
        let (mut rng, mut tie) = streams();
        let mut p = ExploreThenCommit::new(2, 3, 20).unwrap();
        let picks: Vec<usize> = (0..6)
            .map(|_| {
                let a = p.select_arm(&mut rng, &mut tie).unwrap();
                p.observe(a, 0.5).unwrap();
                a
            })
            .collect();
        assert_eq!(picks, [0, 1, 2, 0, 1, 2]);
    }
}
