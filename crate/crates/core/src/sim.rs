//! Episode runner, regret accounting and Monte-Carlo estimation.
//!
//! Regret is booked in expected-reward units: each counted round adds the
//! best arm's expected reward minus the pulled arm's expected reward. For
//! deterministic instances this equals realized-reward regret.
//!
//! Randomness: replication `r` of an experiment seeded with `s` draws from
//! ChaCha8 keyed by `s`, on stream `3r` (policy), `3r + 1` (rewards) and
//! `3r + 2` (tie breaking). Results are reproducible on a given build and
//! independent of thread scheduling.

use std::io::Write;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::UcbForgeParams;
use crate::instance::Instance;
use crate::policy::{init_policy, Policy, PolicySpec, Stream, TieResolver, TieRule, UcbVariant};

/// The three random streams one episode owns.
#[derive(Clone, Debug)]
pub struct EpisodeStreams {
    pub policy: Stream,
    pub rewards: Stream,
    pub ties: TieResolver,
}

impl EpisodeStreams {
    pub fn new(seed: u64, replication: u64, rule: TieRule) -> Self {
        let stream = |role: u64| {
            let mut rng = Stream::seed_from_u64(seed);
            rng.set_stream(3 * replication + role);
            rng
        };
        EpisodeStreams { policy: stream(0), rewards: stream(1), ties: TieResolver::new(rule, stream(2)) }
    }
}

/// Per-round outcome handed to [`play`] observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub round: usize,
    pub arm: usize,
    pub reward: f64,
    pub oracle_arm: usize,
    pub oracle_mean: f64,
    /// Zero for initialization rounds.
    pub step_regret: f64,
    pub cum_regret: f64,
    pub counted: bool,
}

/// Plays `policy` through every round of `inst`, calling `visit` after each
/// observation. Returns the total regret.
pub fn play(
    inst: &Instance,
    policy: &mut dyn Policy,
    streams: &mut EpisodeStreams,
    mut visit: impl FnMut(&StepOutcome, &dyn Policy),
) -> Result<f64> {
    if policy.arms() != inst.arms {
        return Err(Error::Policy(format!(
            "policy has {} arms, instance has {}",
            policy.arms(),
            inst.arms
        )));
    }
    if policy.horizon() < inst.horizon {
        return Err(Error::Policy(format!(
            "policy horizon {} is shorter than the instance horizon {}",
            policy.horizon(),
            inst.horizon
        )));
    }
    let mut cum = 0.0;
    for seg in &inst.segments {
        let means = seg.expected_rewards();
        let (oracle_arm, oracle_mean) = seg.best();
        for round in seg.start..=seg.end {
            let arm = policy.select_arm(&mut streams.policy, &mut streams.ties)?;
            let reward = seg.arms[arm].sample(&mut streams.rewards);
            policy.observe(arm, reward)?;
            let counted = round > inst.init_rounds;
            let step_regret = if counted { oracle_mean - means[arm] } else { 0.0 };
            cum += step_regret;
            let step = StepOutcome { round, arm, reward, oracle_arm, oracle_mean, step_regret, cum_regret: cum, counted };
            visit(&step, &*policy);
        }
    }
    Ok(cum)
}

/// One recorded round, with optional belief traces.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub outcome: StepOutcome,
    /// Empirical means after the round's observation (`None` = unpulled).
    pub means: Option<Vec<Option<f64>>>,
    /// Index values the next selection compares, for index policies.
    pub indices: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub arms: usize,
    pub horizon: usize,
    pub init_rounds: usize,
    pub steps: Vec<Step>,
    pub regret: f64,
    /// Multi-way ties the resolver settled during the episode.
    pub ties_resolved: usize,
}

impl Trajectory {
    /// Arms pulled, in round order.
    pub fn arms_played(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.outcome.arm)
    }

    /// Regret of a fixed action sequence on a deterministic instance.
    pub fn replay(inst: &Instance, arms: &[usize]) -> Result<Trajectory> {
        inst.ensure_valid()?;
        if arms.len() != inst.horizon {
            return Err(Error::precondition(format!(
                "{} actions for a horizon of {}",
                arms.len(),
                inst.horizon
            )));
        }
        let mut cum = 0.0;
        let mut steps = Vec::with_capacity(arms.len());
        for (i, &arm) in arms.iter().enumerate() {
            let round = i + 1;
            let seg = inst.segment_at(round)?;
            let spec = seg
                .arms
                .get(arm)
                .ok_or_else(|| Error::precondition(format!("arm {arm} out of range")))?;
            let (oracle_arm, oracle_mean) = seg.best();
            let counted = round > inst.init_rounds;
            let step_regret = if counted { oracle_mean - spec.expected() } else { 0.0 };
            cum += step_regret;
            steps.push(Step {
                outcome: StepOutcome {
                    round,
                    arm,
                    reward: spec.expected(),
                    oracle_arm,
                    oracle_mean,
                    step_regret,
                    cum_regret: cum,
                    counted,
                },
                means: None,
                indices: None,
            });
        }
        Ok(Trajectory { arms: inst.arms, horizon: inst.horizon, init_rounds: inst.init_rounds, steps, regret: cum, ties_resolved: 0 })
    }
}

/// Runs one episode with streams derived from `seed` (replication 0).
pub fn run_episode(inst: &Instance, spec: &PolicySpec, seed: u64, tie: TieRule, trace: bool) -> Result<Trajectory> {
    inst.ensure_valid()?;
    let mut policy = init_policy(spec, inst.arms, inst.horizon)?;
    let mut streams = EpisodeStreams::new(seed, 0, tie);
    let mut steps = Vec::with_capacity(inst.horizon);
    let regret = play(inst, policy.as_mut(), &mut streams, |outcome, p| {
        let (means, indices) = if trace {
            let stats = p.stats();
            (Some((0..p.arms()).map(|k| stats.mean(k)).collect()), p.indices())
        } else {
            (None, None)
        };
        steps.push(Step { outcome: *outcome, means, indices });
    })?;
    Ok(Trajectory {
        arms: inst.arms,
        horizon: inst.horizon,
        init_rounds: inst.init_rounds,
        steps,
        regret,
        ties_resolved: streams.ties.consulted(),
    })
}

/// Regret of replication `rep` without recording the trajectory.
pub fn episode_regret(inst: &Instance, spec: &PolicySpec, seed: u64, rep: u64, tie: TieRule) -> Result<f64> {
    let mut policy = init_policy(spec, inst.arms, inst.horizon)?;
    let mut streams = EpisodeStreams::new(seed, rep, tie);
    play(inst, policy.as_mut(), &mut streams, |_, _| {})
}

/// Recomputes the regret total from a trajectory's records.
pub fn realized_regret(inst: &Instance, traj: &Trajectory) -> Result<f64> {
    if traj.arms != inst.arms || traj.horizon != inst.horizon || traj.steps.len() != inst.horizon {
        return Err(Error::precondition("trajectory does not match the instance"));
    }
    let mut cum = 0.0;
    for step in &traj.steps {
        let t = step.outcome.round;
        if t <= inst.init_rounds {
            continue;
        }
        let seg = inst.segment_at(t)?;
        cum += seg.best().1 - seg.arms[step.outcome.arm].expected();
    }
    Ok(cum)
}

/// Neumaier-compensated sum, accumulated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub seed: u64,
    pub ci95: (f64, f64),
}

impl RegretReport {
    /// Mean, `sd / sqrt(n)` and a normal 95% interval over `samples`.
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        let mean = if n == 0 { f64::NAN } else { compensated_sum(samples) / n as f64 };
        let stderr = if n < 2 {
            f64::NAN
        } else {
            let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
            (compensated_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        };
        RegretReport { mean, stderr, reps: n, seed, ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr) }
    }

    /// True when `value` lies within `sigmas` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, sigmas: f64) -> bool {
        (self.mean - value).abs() <= sigmas * self.stderr
    }
}

/// Evaluates `f(rep)` for `rep in 0..reps` in parallel, preserving order.
pub fn replicate<F>(reps: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

pub fn monte_carlo_regret(inst: &Instance, spec: &PolicySpec, reps: usize, seed: u64) -> Result<RegretReport> {
    monte_carlo_with(inst, spec, reps, seed, TieRule::Uniform)
}

pub fn monte_carlo_with(inst: &Instance, spec: &PolicySpec, reps: usize, seed: u64, tie: TieRule) -> Result<RegretReport> {
    if reps < 2 {
        return Err(Error::precondition("Monte-Carlo estimation needs at least 2 replications"));
    }
    inst.ensure_valid()?;
    // surface parameter errors once instead of per replication
    init_policy(spec, inst.arms, inst.horizon)?;
    let samples = replicate(reps, |rep| episode_regret(inst, spec, seed, rep, tie.clone()))?;
    Ok(RegretReport::from_samples(&samples, seed))
}

/// Exact expected regret of UCB on the UCB construction, obtained by forcing
/// each of the `K` branches of the tie at the change point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactUcb {
    pub value: f64,
    /// Regret of the branch in which arm `j` wins the tie.
    pub branches: Vec<f64>,
    /// `(1 - 1/K)(T - Kc)(1 - delta)`.
    pub closed_form: f64,
}

pub fn exact_ucb_regret(params: &UcbForgeParams, variant: UcbVariant) -> Result<ExactUcb> {
    let UcbForgeParams { horizon, arms, c, delta, breakpoint, .. } = *params;
    if let Some(x) = crate::forge::first_inertia_failure(c, delta, horizon, arms, variant) {
        return Err(Error::precondition(format!("lock-in condition fails at x = {x}")));
    }
    let inst = params.instance()?;
    let spec = match variant {
        UcbVariant::KnownHorizon => PolicySpec::UcbKnownHorizon,
        UcbVariant::Anytime => PolicySpec::UcbAnytime,
    };
    let locked = params.tail() as f64 * (1.0 - delta);
    let tol = 1e-9 * horizon as f64;
    let mut branches = Vec::with_capacity(arms);
    for j in 0..arms {
        let traj = run_episode(&inst, &spec, j as u64, TieRule::Fixed(j), false)?;
        let pre: f64 = traj.steps[..breakpoint - 1].iter().map(|s| s.outcome.step_regret).sum();
        if pre != 0.0 {
            return Err(Error::precondition(format!("branch {j}: pre-change regret {pre} is not zero")));
        }
        let tie_winner = traj.steps[breakpoint - 1].outcome.arm;
        if tie_winner != j {
            return Err(Error::precondition(format!("branch {j}: arm {tie_winner} won the change-point tie")));
        }
        let post = &traj.steps[breakpoint - 1..];
        let expected = if j == 0 { 0.0 } else { locked };
        if j != 0 && post.iter().any(|s| s.outcome.arm == 0) {
            return Err(Error::precondition(format!("branch {j}: optimal arm pulled after the change")));
        }
        if (traj.regret - expected).abs() > tol {
            return Err(Error::precondition(format!(
                "branch {j}: regret {} differs from {expected}",
                traj.regret
            )));
        }
        branches.push(traj.regret);
    }
    let value = compensated_sum(&branches) / arms as f64;
    Ok(ExactUcb { value, branches, closed_form: (1.0 - 1.0 / arms as f64) * locked })
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// Writes the per-round trace: `round, arm, reward, oracle_arm, oracle_mean,
/// step_regret, cum_regret`, then `mean_1..mean_K` and, for index policies,
/// `index_1..index_K`. Arms are 1-based; unpulled means are `nan` and
/// unpulled indices `inf`.
pub fn write_trace_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let k = traj.arms;
    let with_indices = traj.steps.iter().any(|s| s.indices.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["round", "arm", "reward", "oracle_arm", "oracle_mean", "step_regret", "cum_regret"].map(String::from).to_vec();
    header.extend((1..=k).map(|i| format!("mean_{i}")));
    if with_indices {
        header.extend((1..=k).map(|i| format!("index_{i}")));
    }
    w.write_record(&header)?;
    for step in &traj.steps {
        let o = &step.outcome;
        let mut row = vec![
            o.round.to_string(),
            (o.arm + 1).to_string(),
            fmt_num(o.reward),
            (o.oracle_arm + 1).to_string(),
            fmt_num(o.oracle_mean),
            fmt_num(o.step_regret),
            fmt_num(o.cum_regret),
        ];
        match &step.means {
            Some(means) => row.extend(means.iter().map(|m| fmt_num(m.unwrap_or(f64::NAN)))),
            None => row.extend(std::iter::repeat_n(String::new(), k)),
        }
        if with_indices {
            match &step.indices {
                Some(ix) => row.extend(ix.iter().map(|&v| fmt_num(v))),
                None => row.extend(std::iter::repeat_n(String::new(), k)),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
