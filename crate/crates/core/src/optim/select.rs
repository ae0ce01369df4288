use super::config::Selection;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// One planned inner step. Consecutive steps sharing a `round` touch disjoint
/// row pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlannedStep {
    pub pos: usize,
    pub round: Option<usize>,
}

/// Produces the index sequence of each epoch.
#[derive(Clone, Debug)]
pub struct Selector {
    rule: Selection,
    count: usize,
    time_positions: Vec<usize>,
    /// Row count for the disjoint-pair schedule.
    pair_rows: Option<usize>,
    rng: Rng,
}

const SELECTION_STREAM: u64 = 0x5E_1EC7;

impl Selector {
    /// `time_positions` is required for time-cyclic selection and `pair_rows`
    /// for the batched schedule, whose index set must be the strict pairs of
    /// `pair_rows` rows in enumeration order.
    pub fn new(
        rule: Selection,
        count: usize,
        time_positions: Option<Vec<usize>>,
        pair_rows: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("empty index set".into()));
        }
        let time_positions = match (rule, time_positions) {
            (Selection::TimeCyclic, Some(t)) if !t.is_empty() => t,
            (Selection::TimeCyclic, _) => {
                return Err(Error::InvalidConfig(
                    "time-cyclic selection needs a family with time coordinates".into(),
                ))
            }
            _ => Vec::new(),
        };
        if let Some(n) = pair_rows {
            if n < 2 || n * (n - 1) / 2 != count {
                return Err(Error::InvalidConfig("batched schedule needs a row-pair index set".into()));
            }
        }
        Ok(Self {
            rule,
            count,
            time_positions,
            pair_rows,
            rng: Rng::derived(seed, SELECTION_STREAM),
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The `inner` steps of epoch `k`.
    pub fn epoch_plan(&mut self, k: usize, inner: usize) -> Vec<PlannedStep> {
        let base = k * inner;
        match self.rule {
            Selection::Cyclic => (0..inner)
                .map(|s| PlannedStep {
                    pos: (base + s) % self.count,
                    round: None,
                })
                .collect(),
            Selection::TimeCyclic => {
                let t = &self.time_positions;
                (0..inner)
                    .map(|s| PlannedStep {
                        pos: t[(base + s) % t.len()],
                        round: None,
                    })
                    .collect()
            }
            Selection::UniformRandom => (0..inner)
                .map(|_| PlannedStep {
                    pos: self.rng.index(self.count),
                    round: None,
                })
                .collect(),
            Selection::WithoutReplacement => {
                let mut plan = Vec::with_capacity(inner);
                let mut block = 0;
                while plan.len() < inner {
                    let perm = match self.pair_rows {
                        Some(n) => self.tournament(n, block),
                        None => {
                            let mut p: Vec<usize> = (0..self.count).collect();
                            self.rng.shuffle(&mut p);
                            p.into_iter().map(|pos| PlannedStep { pos, round: None }).collect()
                        }
                    };
                    let take = (inner - plan.len()).min(perm.len());
                    plan.extend_from_slice(&perm[..take]);
                    block += 1;
                }
                plan
            }
        }
    }

    /// A random round-robin tournament on `n` rows: every pair appears once,
    /// and the pairs of a round are disjoint.
    fn tournament(&mut self, n: usize, block: usize) -> Vec<PlannedStep> {
        let mut players: Vec<Option<usize>> = (0..n).map(Some).collect();
        self.rng.shuffle(&mut players);
        if n % 2 == 1 {
            players.push(None);
        }
        let m = players.len();
        let mut rounds: Vec<Vec<usize>> = Vec::with_capacity(m - 1);
        for _ in 0..m - 1 {
            let round = (0..m / 2)
                .filter_map(|q| match (players[q], players[m - 1 - q]) {
                    (Some(a), Some(b)) => Some(strict_pair_pos(n, a.min(b), a.max(b))),
                    _ => None,
                })
                .collect();
            rounds.push(round);
            players[1..].rotate_right(1);
        }
        self.rng.shuffle(&mut rounds);
        let first_round = block * (m - 1);
        rounds
            .into_iter()
            .enumerate()
            .flat_map(|(r, pairs)| {
                pairs.into_iter().map(move |pos| PlannedStep {
                    pos,
                    round: Some(first_round + r),
                })
            })
            .collect()
    }
}

/// Position of `(i, j)`, `i < j < n`, in the row-major enumeration of strict pairs.
pub fn strict_pair_pos(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}
