//! Per-round data behind the three illustrative runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::forge;
use crate::policy::{PolicySpec, TieRule};
use crate::sim::{self, Trajectory};
use crate::DEFAULT_SEED;

/// 1: UCB indices on the UCB construction (T=1000, K=2), tie at the change
/// point resolved toward arm 2.
/// 2: ETC with m=10 on the ETC construction (T=100, K=2).
/// 3: ε-greedy with eps=0.1 on the mid-horizon construction (T=400, K=2).
pub fn figure_trajectory(id: u32, seed: u64) -> Result<Trajectory> {
    match id {
        1 => {
            let (inst, _) = forge::forge_ucb(1000, 2)?;
            sim::run_episode(&inst, &PolicySpec::UcbKnownHorizon, seed, TieRule::Fixed(1), true)
        }
        2 => {
            let inst = forge::forge_etc(100, 2, 10)?;
            sim::run_episode(&inst, &PolicySpec::Etc { m: 10 }, seed, TieRule::Uniform, true)
        }
        3 => {
            let inst = forge::forge_eg_mid(400, 2)?;
            sim::run_episode(&inst, &PolicySpec::EpsilonGreedy { eps: 0.1 }, seed, TieRule::Uniform, true)
        }
        other => Err(Error::Unknown { what: "figure id", name: other.to_string() }),
    }
}

pub fn write_figure_data<W: Write>(id: u32, seed: u64, out: W) -> Result<()> {
    sim::write_trace_csv(&figure_trajectory(id, seed)?, out)
}

/// Writes figure `id` as CSV to `path` using the default seed.
pub fn emit_figure_data(id: u32, path: &Path) -> Result<()> {
    let traj = figure_trajectory(id, DEFAULT_SEED)?;
    let mut out = BufWriter::new(File::create(path)?);
    sim::write_trace_csv(&traj, &mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ucb_figure_indices() {
        let traj = figure_trajectory(1, DEFAULT_SEED).unwrap();
        for step in &traj.steps[192..] {
            let ix = step.indices.as_ref().unwrap();
            assert!(ix[1] > ix[0], "round {}", step.outcome.round);
        }
    }

    #[test]
    fn etc_figure_commits_to_arm_two() {
        let traj = figure_trajectory(2, DEFAULT_SEED).unwrap();
        assert!(traj.steps[20..].iter().all(|s| s.outcome.arm == 1));
        assert_eq!(traj.regret, 90.0);
    }

    #[test]
    fn greedy_figure_means() {
        let traj = figure_trajectory(3, DEFAULT_SEED).unwrap();
        assert_eq!(traj.steps.len(), 400);
        assert!(traj.steps.iter().all(|s| s.means.as_ref().unwrap()[0] == Some(0.5)));
    }

    #[test]
    fn bad_id() {
        assert!(figure_trajectory(4, 0).is_err());
    }
}
