//! Game records and the cross-game dataset.
//!
//! A [`GameRecord`] is both the in-memory history of one game and the line
//! format of the replay files, so the field names follow the replay schema.

use serde::{Deserialize, Serialize};

use crate::agent::DeliberationRecord;
use crate::game::{other, Action, BetEvent, GameState, Observation, Rank, Seat};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seats {
    #[serde(rename = "0")]
    pub seat0: String,
    #[serde(rename = "1")]
    pub seat1: String,
}

impl Seats {
    pub fn new(seat0: impl Into<String>, seat1: impl Into<String>) -> Seats {
        Seats {
            seat0: seat0.into(),
            seat1: seat1.into(),
        }
    }

    pub fn get(&self, seat: Seat) -> &str {
        if seat == 0 {
            &self.seat0
        } else {
            &self.seat1
        }
    }
}

/// The cards of a game. A field is `None` when it is hidden from the record's
/// reader (the opponent's hole without hindsight, or an unrevealed board).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealRecord {
    pub hole0: Option<Rank>,
    pub hole1: Option<Rank>,
    pub public: Option<Rank>,
}

impl DealRecord {
    pub fn hole(&self, seat: Seat) -> Option<Rank> {
        if seat == 0 {
            self.hole0
        } else {
            self.hole1
        }
    }

    pub fn set_hole(&mut self, seat: Seat, rank: Option<Rank>) {
        if seat == 0 {
            self.hole0 = rank;
        } else {
            self.hole1 = rank;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub seat: Seat,
    pub round: u8,
    pub legal: Vec<Action>,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deliberation: Option<DeliberationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema_version: u32,
    pub game_id: u64,
    pub seed: u64,
    pub seats: Seats,
    pub deal: DealRecord,
    pub steps: Vec<StepRecord>,
    pub payoffs: [i32; 2],
    pub hindsight: bool,
    /// Set on records held by an agent: the seat the agent played.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewer: Option<Seat>,
}

impl GameRecord {
    /// Builds the full record of a finished game.
    pub fn from_state(
        game_id: u64,
        seed: u64,
        seats: Seats,
        state: &GameState,
        deliberations: Vec<Option<DeliberationRecord>>,
        hindsight: bool,
    ) -> Option<GameRecord> {
        let payoffs = state.payoff().ok()?;
        let mut replay = GameState::with_deal(*state.deal(), state.betting().config);
        let mut steps = Vec::with_capacity(state.history().len());
        for (event, deliberation) in state.history().iter().zip(deliberations) {
            steps.push(StepRecord {
                seat: event.seat,
                round: event.round,
                legal: replay.legal_actions().ok()?,
                action: event.action,
                deliberation,
            });
            replay = replay.apply(event.action).ok()?;
        }
        Some(GameRecord {
            schema_version: SCHEMA_VERSION,
            game_id,
            seed,
            seats,
            deal: DealRecord {
                hole0: Some(state.hole(0).rank),
                hole1: Some(state.hole(1).rank),
                public: Some(state.deal().public.rank),
            },
            steps,
            payoffs,
            hindsight,
            viewer: None,
        })
    }

    pub fn events(&self) -> Vec<BetEvent> {
        self.steps
            .iter()
            .map(|s| BetEvent {
                seat: s.seat,
                round: s.round,
                action: s.action,
            })
            .collect()
    }

    /// True if the steps form a legal, finished betting sequence.
    pub fn is_terminal(&self) -> bool {
        let mut betting = crate::game::Betting::new(Default::default());
        for s in &self.steps {
            if betting.finished || s.seat != betting.to_act || !betting.legal_actions().contains(&s.action) {
                return false;
            }
            betting.apply(s.action);
        }
        betting.finished
    }

    pub fn reached_round_two(&self) -> bool {
        self.steps.iter().any(|s| s.round == 2)
    }

    /// True if the game ended with a fold (as opposed to a showdown).
    pub fn folded(&self) -> bool {
        self.steps.last().is_some_and(|s| s.action == Action::Fold)
    }

    /// The card the viewer's opponent held, when this record reveals it.
    pub fn hindsight_opponent_card(&self) -> Option<Rank> {
        self.viewer.and_then(|v| self.deal.hole(other(v)))
    }

    /// The record as `seat` may remember it: its own card, the board if it was
    /// revealed, the opponent's card only with hindsight, and only its own
    /// deliberations.
    pub fn perspective(&self, seat: Seat, hindsight: bool) -> GameRecord {
        let mut rec = self.clone();
        rec.viewer = Some(seat);
        rec.hindsight = hindsight;
        if !hindsight {
            rec.deal.set_hole(other(seat), None);
        }
        if !self.reached_round_two() {
            rec.deal.public = None;
        }
        for step in &mut rec.steps {
            if step.seat != seat {
                step.deliberation = None;
            }
        }
        rec
    }

    /// The observation `seat` had before step `index`, if its card is known.
    pub fn observation_at(&self, index: usize) -> Option<Observation> {
        let step = self.steps.get(index)?;
        let history: Vec<BetEvent> = self.events()[..index].to_vec();
        let mut betting = crate::game::Betting::new(Default::default());
        for e in &history {
            betting.apply(e.action);
        }
        Some(Observation {
            player: step.seat,
            private_card: self.deal.hole(step.seat)?,
            public_card: if step.round == 2 { self.deal.public } else { None },
            pot_contribution: betting.contributions,
            legal_actions: step.legal.clone(),
            round: step.round,
            betting_sequence_public: history,
        })
    }

    /// Drops raw prompts and completions from every deliberation.
    pub fn redacted(&self) -> GameRecord {
        let mut rec = self.clone();
        for step in &mut rec.steps {
            if let Some(d) = &mut step.deliberation {
                d.raw_prompts.clear();
                d.raw_completions.clear();
                d.redacted = true;
            }
        }
        rec
    }
}

/// All finished games of a match, in play order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchDataset {
    games: Vec<GameRecord>,
}

impl MatchDataset {
    pub fn new() -> MatchDataset {
        MatchDataset::default()
    }

    pub fn push(&mut self, record: GameRecord) {
        self.games.push(record);
    }

    pub fn games(&self) -> &[GameRecord] {
        &self.games
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::LeducConfig;

    fn finished(seed: u64, actions: &[Action]) -> GameRecord {
        let mut s = GameState::new(seed, LeducConfig::default());
        for &a in actions {
            s = s.apply(a).unwrap();
        }
        let n = s.history().len();
        GameRecord::from_state(seed, seed, Seats::new("a", "b"), &s, vec![None; n], true).unwrap()
    }

    #[test]
    fn records_zero_sum_payoffs() {
        let r = finished(4, &[Action::Raise, Action::Call, Action::Check, Action::Check]);
        assert_eq!(r.payoffs[0] + r.payoffs[1], 0);
        assert_eq!(r.steps.len(), 4);
        assert_eq!(r.steps[0].legal, vec![Action::Call, Action::Raise, Action::Fold]);
    }

    #[test]
    fn unfinished_game_has_no_record() {
        let s = GameState::new(1, LeducConfig::default());
        assert!(GameRecord::from_state(0, 1, Seats::new("a", "b"), &s, vec![], true).is_none());
    }

    #[test]
    fn perspective_masks_opponent_and_unrevealed_board() {
        let r = finished(2, &[Action::Fold]);
        let p = r.perspective(1, false);
        assert_eq!(p.deal.hole0, None);
        assert_eq!(p.deal.public, None);
        assert_eq!(p.hindsight_opponent_card(), None);
        let p = r.perspective(1, true);
        assert_eq!(p.hindsight_opponent_card(), r.deal.hole0);
    }

    #[test]
    fn observations_rebuild_from_steps() {
        let seed = 8;
        let actions = [Action::Call, Action::Raise, Action::Call, Action::Check, Action::Check];
        let r = finished(seed, &actions);
        let mut s = GameState::new(seed, LeducConfig::default());
        for (i, &a) in actions.iter().enumerate() {
            assert_eq!(r.observation_at(i).unwrap(), s.observe(s.to_act()).unwrap());
            s = s.apply(a).unwrap();
        }
    }
}
