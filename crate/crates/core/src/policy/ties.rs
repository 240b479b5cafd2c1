use rand::Rng;

use super::Stream;

/// How argmax ties are broken.
///
/// `Uniform` is the faithful rule. `Fixed` and `Sequence` force particular
/// branches; when the forced arm is not among the tied arms (or a sequence
/// runs out) the resolver falls back to a uniform draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieRule {
    Uniform,
    Fixed(usize),
    Sequence(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct TieResolver {
    rule: TieRule,
    cursor: usize,
    rng: Stream,
    consulted: usize,
}

impl TieResolver {
    pub fn new(rule: TieRule, rng: Stream) -> Self {
        TieResolver { rule, cursor: 0, rng, consulted: 0 }
    }

    pub fn rule(&self) -> &TieRule {
        &self.rule
    }

    /// Number of genuine (multi-arm) ties resolved so far.
    pub fn consulted(&self) -> usize {
        self.consulted
    }

    /// Picks one of `candidates` (ascending arm indices, non-empty).
    pub fn resolve(&mut self, candidates: &[usize]) -> usize {
        debug_assert!(!candidates.is_empty());
        if candidates.len() == 1 {
            return candidates[0];
        }
        self.consulted += 1;
        let forced = match &self.rule {
            TieRule::Uniform => None,
            TieRule::Fixed(arm) => Some(*arm),
            TieRule::Sequence(arms) => {
                let next = arms.get(self.cursor).copied();
                if next.is_some() {
                    self.cursor += 1;
                }
                next
            }
        };
        match forced {
            Some(arm) if candidates.contains(&arm) => arm,
            _ => candidates[self.rng.gen_range(0..candidates.len())],
        }
    }
}
