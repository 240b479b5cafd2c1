//! Piecewise-stationary instances, reward sampling and the per-round oracle.
//!
//! Rounds are 1-based and segment bounds are inclusive. Arms are 0-based in
//! the API; file formats and traces print them 1-based.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-round reward distribution of a single arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RewardSpec {
    #[serde(rename = "det")]
    Deterministic { value: f64 },
    #[serde(rename = "bernoulli")]
    Bernoulli { p: f64 },
}

impl RewardSpec {
    pub const fn det(value: f64) -> Self {
        RewardSpec::Deterministic { value }
    }

    pub const fn bernoulli(p: f64) -> Self {
        RewardSpec::Bernoulli { p }
    }

    pub fn expected(&self) -> f64 {
        match *self {
            RewardSpec::Deterministic { value } => value,
            RewardSpec::Bernoulli { p } => p,
        }
    }

    /// Draws a reward. Deterministic specs never touch the stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RewardSpec::Deterministic { value } => value,
            RewardSpec::Bernoulli { p } => {
                if rng.gen::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn in_range(&self) -> bool {
        let v = self.expected();
        (0.0..=1.0).contains(&v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub arms: Vec<RewardSpec>,
}

impl Segment {
    pub fn new(start: usize, end: usize, arms: Vec<RewardSpec>) -> Self {
        Segment { start, end, arms }
    }

    /// Segment whose arms are all deterministic with the given values.
    pub fn deterministic(start: usize, end: usize, values: &[f64]) -> Self {
        Segment::new(start, end, values.iter().map(|&v| RewardSpec::det(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn expected_rewards(&self) -> Vec<f64> {
        self.arms.iter().map(RewardSpec::expected).collect()
    }

    /// Lowest arm index attaining the maximal expected reward, with that reward.
    pub fn best(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, spec) in self.arms.iter().enumerate() {
            let mu = spec.expected();
            if mu > best.1 {
                best = (k, mu);
            }
        }
        best
    }
}

/// A bandit instance: `K` arms over rounds `1..=T`, described by contiguous
/// stationary segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(rename = "K")]
    pub arms: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Leading rounds excluded from regret.
    #[serde(default)]
    pub init_rounds: usize,
    pub segments: Vec<Segment>,
}

/// Outcome of [`Instance::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub breakpoints: usize,
    pub violations: Vec<String>,
}

impl Instance {
    /// Builds and validates an instance.
    pub fn new(arms: usize, horizon: usize, init_rounds: usize, segments: Vec<Segment>) -> Result<Self> {
        let inst = Instance { arms, horizon, init_rounds, segments };
        inst.ensure_valid()?;
        Ok(inst)
    }

    /// Deterministic instance from consecutive `(length, rewards)` phases starting at round 1.
    pub fn from_phases(arms: usize, init_rounds: usize, phases: &[(usize, Vec<f64>)]) -> Result<Self> {
        let mut segments = Vec::with_capacity(phases.len());
        let mut start = 1;
        for (len, values) in phases {
            if *len == 0 {
                return Err(Error::InvalidInstance("empty phase".into()));
            }
            segments.push(Segment::deterministic(start, start + len - 1, values));
            start += len;
        }
        Instance::new(arms, start - 1, init_rounds, segments)
    }

    pub fn stationary(arms: usize, horizon: usize, specs: Vec<RewardSpec>) -> Result<Self> {
        Instance::new(arms, horizon, 0, vec![Segment::new(1, horizon, specs)])
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.arms < 2 {
            violations.push(format!("arm count {} < 2", self.arms));
        }
        if self.horizon == 0 {
            violations.push("horizon is zero".to_string());
        }
        if self.init_rounds >= self.horizon.max(1) {
            violations.push(format!(
                "init_rounds {} must be below the horizon {}",
                self.init_rounds, self.horizon
            ));
        }
        if self.segments.is_empty() {
            violations.push("no segments".to_string());
        }

        let mut expected_start = 1;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.start > expected_start {
                violations.push(format!(
                    "gap at round {}",
                    if expected_start + 1 == seg.start {
                        expected_start.to_string()
                    } else {
                        format!("{}..{}", expected_start, seg.start - 1)
                    }
                ));
            } else if seg.start < expected_start {
                violations.push(format!("segment {} overlaps at round {}", i + 1, seg.start));
            }
            if seg.start == 0 {
                violations.push(format!("segment {} starts at round 0", i + 1));
            }
            if seg.end < seg.start {
                violations.push(format!("segment {} ends before it starts", i + 1));
            }
            if seg.arms.len() != self.arms {
                violations.push(format!(
                    "segment {} has {} arms, expected {}",
                    i + 1,
                    seg.arms.len(),
                    self.arms
                ));
            }
            for (k, spec) in seg.arms.iter().enumerate() {
                if !spec.in_range() {
                    violations.push(format!(
                        "segment {} arm {} reward {} outside [0,1]",
                        i + 1,
                        k + 1,
                        spec.expected()
                    ));
                }
            }
            if i > 0 && self.segments[i - 1].arms == seg.arms {
                violations.push(format!(
                    "segments {} and {} are identical (no change at round {})",
                    i,
                    i + 1,
                    seg.start
                ));
            }
            expected_start = seg.end.max(seg.start) + 1;
        }
        if let Some(last) = self.segments.last() {
            if last.end != self.horizon {
                violations.push(format!("last segment ends at {}, horizon is {}", last.end, self.horizon));
            }
        }

        ValidationReport {
            ok: violations.is_empty(),
            breakpoints: self.segments.len().saturating_sub(1),
            violations,
        }
    }

    /// Membership test for the class of instances with at most `budget` breakpoints.
    pub fn validate_with_budget(&self, budget: usize) -> ValidationReport {
        let mut report = self.validate();
        if report.breakpoints > budget {
            report
                .violations
                .push(format!("{} breakpoints exceed the budget of {}", report.breakpoints, budget));
            report.ok = false;
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.ok {
            Ok(())
        } else {
            Err(Error::InvalidInstance(report.violations.join("; ")))
        }
    }

    pub fn breakpoints(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    /// Round indices `start` of every segment after the first.
    pub fn breakpoint_rounds(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    fn check_round(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon {
            Err(Error::RoundOutOfRange { round: t, horizon: self.horizon })
        } else {
            Ok(())
        }
    }

    pub fn segment_at(&self, t: usize) -> Result<&Segment> {
        self.check_round(t)?;
        let idx = self.segments.partition_point(|s| s.end < t);
        self.segments
            .get(idx)
            .filter(|s| s.contains(t))
            .ok_or(Error::RoundOutOfRange { round: t, horizon: self.horizon })
    }

    pub fn expected_reward(&self, t: usize, arm: usize) -> Result<f64> {
        let seg = self.segment_at(t)?;
        seg.arms
            .get(arm)
            .map(RewardSpec::expected)
            .ok_or_else(|| Error::precondition(format!("arm {arm} out of range")))
    }

    /// Lowest-index arm with maximal expected reward at round `t`.
    pub fn optimal_arm(&self, t: usize) -> Result<usize> {
        Ok(self.segment_at(t)?.best().0)
    }

    /// Sum of the maximal expected reward over `from..=to`, skipping initialization rounds.
    pub fn oracle_cumulative_reward(&self, from: usize, to: usize) -> Result<f64> {
        if from == 0 || from > to || to > self.horizon {
            return Err(Error::precondition(format!(
                "invalid round range [{from}, {to}] for horizon {}",
                self.horizon
            )));
        }
        let lo = from.max(self.init_rounds + 1);
        let mut total = 0.0;
        for seg in &self.segments {
            let a = seg.start.max(lo);
            let b = seg.end.min(to);
            if a <= b {
                total += seg.best().1 * (b - a + 1) as f64;
            }
        }
        Ok(total)
    }

    /// Same instance shifted so that its round 1 becomes round `offset + 1`.
    pub(crate) fn shifted_segments(&self, offset: usize) -> Vec<Segment> {
        self.segments
            .iter()
            .map(|s| Segment::new(s.start + offset, s.end + offset, s.arms.clone()))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text)?;
        inst.ensure_valid()?;
        Ok(inst)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_phase(first: usize) -> Instance {
        Instance {
            arms: 2,
            horizon: 100,
            init_rounds: 0,
            segments: vec![
                Segment::deterministic(1, first, &[0.0, 1.0]),
                Segment::deterministic(first + 1, 100, &[1.0, 0.0]),
            ],
        }
    }

    #[test]
    fn stationary_instance_has_no_breakpoints() {
        let inst = Instance::stationary(2, 100, vec![RewardSpec::det(0.5), RewardSpec::det(0.0)]).unwrap();
        let report = inst.validate();
        assert!(report.ok);
        assert_eq!(report.breakpoints, 0);
    }

    #[test]
    fn one_change_is_one_breakpoint() {
        let report = two_phase(20).validate();
        assert!(report.ok, "{:?}", report.violations);
        assert_eq!(report.breakpoints, 1);
    }

    #[test]
    fn gap_is_reported() {
        let mut inst = two_phase(20);
        inst.segments[1].start = 22;
        let report = inst.validate();
        assert!(!report.ok);
        assert!(report.violations.iter().any(|v| v == "gap at round 21"), "{:?}", report.violations);
    }

    #[test]
    fn identical_neighbours_rejected() {
        let inst = Instance {
            arms: 2,
            horizon: 10,
            init_rounds: 0,
            segments: vec![
                Segment::deterministic(1, 5, &[0.5, 0.0]),
                Segment::deterministic(6, 10, &[0.5, 0.0]),
            ],
        };
        assert!(!inst.validate().ok);
    }

    #[test]
    fn coverage_and_arm_count_violations() {
        let inst = Instance {
            arms: 2,
            horizon: 50,
            init_rounds: 50,
            segments: vec![Segment::deterministic(2, 40, &[0.5, 0.0, 1.5])],
        };
        let report = inst.validate();
        assert!(!report.ok);
        assert!(report.violations.len() >= 4, "{:?}", report.violations);
    }

    #[test]
    fn budget_containment() {
        let inst = two_phase(20);
        assert!(!inst.validate_with_budget(0).ok);
        for budget in 1..5 {
            assert!(inst.validate_with_budget(budget).ok);
        }
    }

    #[test]
    fn expected_values() {
        assert_eq!(RewardSpec::det(0.38).expected(), 0.38);
        assert_eq!(RewardSpec::bernoulli(0.0).expected(), 0.0);
        assert_eq!(RewardSpec::bernoulli(0.5).expected(), 0.5);
    }

    #[test]
    fn optimal_arm_and_ties() {
        let inst = Instance::from_phases(3, 0, &[(5, vec![0.0, 0.0, 1.0]), (5, vec![1.0, 0.0, 0.0])]).unwrap();
        assert_eq!(inst.optimal_arm(1).unwrap(), 2);
        assert_eq!(inst.optimal_arm(6).unwrap(), 0);
        assert!(inst.optimal_arm(0).is_err());
        assert!(inst.optimal_arm(11).is_err());
        let flat = Instance::stationary(3, 4, vec![RewardSpec::det(0.5); 3]).unwrap();
        assert_eq!(flat.optimal_arm(2).unwrap(), 0);
    }

    #[test]
    fn oracle_sums() {
        let etc = Instance::from_phases(2, 0, &[(40, vec![0.0, 1.0]), (960, vec![1.0, 0.0])]).unwrap();
        let brute: f64 = (1..=1000).map(|t| etc.segment_at(t).unwrap().best().1).sum();
        assert_eq!(brute, 1000.0);
        assert_eq!(etc.oracle_cumulative_reward(1, 1000).unwrap(), 1000.0);

        let zero = Instance::stationary(2, 30, vec![RewardSpec::det(0.0); 2]).unwrap();
        assert_eq!(zero.oracle_cumulative_reward(1, 30).unwrap(), 0.0);

        let half = Instance::stationary(2, 100, vec![RewardSpec::det(0.5), RewardSpec::det(0.0)]).unwrap();
        assert_eq!(half.oracle_cumulative_reward(1, 100).unwrap(), 50.0);
        assert!(half.oracle_cumulative_reward(5, 4).is_err());
        assert!(half.oracle_cumulative_reward(1, 101).is_err());
    }

    #[test]
    fn init_rounds_contribute_nothing_to_oracle() {
        let inst = Instance::from_phases(2, 2, &[(2, vec![1.0, 0.0]), (8, vec![0.0, 1.0])]).unwrap();
        assert_eq!(inst.oracle_cumulative_reward(1, 10).unwrap(), 8.0);
        assert_eq!(inst.oracle_cumulative_reward(1, 2).unwrap(), 0.0);
    }

    #[test]
    fn sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(RewardSpec::det(1.0).sample(&mut rng), 1.0);
        assert_eq!(RewardSpec::bernoulli(1.0).sample(&mut rng), 1.0);

        let n = 100_000;
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| RewardSpec::bernoulli(0.5).sample(&mut rng)).collect::<Vec<_>>()
        };
        let a = draw(11);
        assert_eq!(a, draw(11));
        let mean = a.iter().sum::<f64>() / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn deterministic_sampling_leaves_stream_untouched() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        RewardSpec::det(0.2).sample(&mut a);
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }

    #[test]
    fn json_format() {
        let inst = Instance::new(
            2,
            10,
            0,
            vec![
                Segment::new(1, 4, vec![RewardSpec::det(0.0), RewardSpec::bernoulli(0.25)]),
                Segment::deterministic(5, 10, &[0.37935861, 1.0]),
            ],
        )
        .unwrap();
        let text = inst.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["K"], 2);
        assert_eq!(v["T"], 10);
        assert_eq!(v["init_rounds"], 0);
        assert_eq!(v["segments"][0]["arms"][0]["kind"], "det");
        assert_eq!(v["segments"][0]["arms"][1]["kind"], "bernoulli");
        assert_eq!(v["segments"][0]["arms"][1]["p"], 0.25);
        assert_eq!(Instance::from_json(&text).unwrap(), inst);

        let bad = r#"{"K":2,"T":10,"init_rounds":0,"segments":[{"start":1,"end":9,"arms":[{"kind":"det","value":0}]}]}"#;
        assert!(Instance::from_json(bad).is_err());
    }
}
