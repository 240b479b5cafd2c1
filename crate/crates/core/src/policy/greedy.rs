use rand::Rng;

use crate::error::{Error, Result};

use super::{argmax, param, ArmStats, Ledger, Policy, PolicyKind, PolicyRegistry, PolicySpec, Stream, TieResolver};

/// ε-greedy with a forced round-robin over the first `K` rounds so every
/// empirical mean is defined before the first greedy decision.
///
/// Exploration picks uniformly among all `K` arms, greedy arm included.
#[derive(Clone, Debug)]
pub struct EpsilonGreedy {
    ledger: Ledger,
    eps: f64,
    scratch: Vec<f64>,
}

impl EpsilonGreedy {
    pub fn new(eps: f64, arms: usize, horizon: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Policy(format!("eps {eps} outside [0,1]")));
        }
        Ok(EpsilonGreedy { ledger: Ledger::new(arms, horizon), eps, scratch: vec![0.0; arms] })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

impl Policy for EpsilonGreedy {
    fn spec(&self) -> PolicySpec {
        PolicySpec::EpsilonGreedy { eps: self.eps }
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

    fn select_arm(&mut self, rng: &mut Stream, tie: &mut TieResolver) -> Result<usize> {
        self.ledger.begin()?;
        let arms = self.ledger.arms();
        let t = self.ledger.t;
        if t <= arms {
            return Ok(self.ledger.chose(t - 1));
        }
        // one draw per round, so eps = 0 and eps = 1 consume the stream identically
        if rng.gen::<f64>() < self.eps {
            let arm = rng.gen_range(0..arms);
            return Ok(self.ledger.chose(arm));
        }
        for k in 0..arms {
            self.scratch[k] = self.ledger.stats.empirical_mean(k)?;
        }
        let arm = argmax(&self.scratch, tie);
        Ok(self.ledger.chose(arm))
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.ledger.observe(arm, reward)
    }

    fn stats(&self) -> &ArmStats {
        &self.ledger.stats
    }
}

pub struct EpsilonGreedyKind;

impl PolicyKind for EpsilonGreedyKind {
    fn name(&self) -> &'static str {
        "eps-greedy"
    }

    fn parse(&self, args: &str, _: &PolicyRegistry) -> Result<PolicySpec> {
        let eps: f64 = param(args, "eps")?;
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Policy(format!("eps {eps} outside [0,1]")));
        }
        Ok(PolicySpec::EpsilonGreedy { eps })
    }

    fn build(&self, spec: &PolicySpec, arms: usize, horizon: usize, _: &PolicyRegistry) -> Result<Box<dyn Policy>> {
        match spec {
            PolicySpec::EpsilonGreedy { eps } => Ok(Box::new(EpsilonGreedy::new(*eps, arms, horizon)?)),
            other => Err(Error::Policy(format!("eps-greedy cannot build {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::TieRule;
    use rand::SeedableRng;

    fn run(eps: f64, arms: usize, rounds: usize, rewards: &[f64], seed: u64) -> Vec<usize> {
        let mut p = EpsilonGreedy::new(eps, arms, rounds).unwrap();
        let mut rng = Stream::seed_from_u64(seed);
        let mut tie = TieResolver::new(TieRule::Uniform, Stream::seed_from_u64(seed + 1));
        (0..rounds)
            .map(|_| {
                let a = p.select_arm(&mut rng, &mut tie).unwrap();
                p.observe(a, rewards[a]).unwrap();
                a
            })
            .collect()
    }

    #[test]
    fn pure_greedy_exploits() {
        let picks = run(0.0, 2, 100, &[0.5, 0.4], 3);
        assert_eq!(&picks[..2], &[0, 1]);
        assert!(picks[2..].iter().all(|&a| a == 0));
    }

    #[test]
    fn full_exploration_is_uniform() {
        let n = 100_000;
        let picks = run(1.0, 4, n + 4, &[1.0, 0.0, 0.0, 0.0], 5);
        let mut counts = [0f64; 4];
        for &a in &picks[4..] {
            counts[a] += 1.0;
        }
        let expected = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 3 degrees of freedom, 0.999 quantile is 16.27
        assert!(chi2 < 16.27, "chi2 {chi2}, counts {counts:?}");
    }

    #[test]
    fn exploration_rate_per_arm() {
        // with arm 0 dominant, arm 1 is only reached by exploration at rate eps/K
        let n = 200_000;
        let picks = run(0.1, 2, n, &[1.0, 0.0], 8);
        let rate = picks[2..].iter().filter(|&&a| a == 1).count() as f64 / (n - 2) as f64;
        let sd = (0.05f64 * 0.95 / n as f64).sqrt();
        assert!((rate - 0.05).abs() < 4.0 * sd, "rate {rate}");
    }
}
