//! Leduc Hold'em: a six-card, two-round limit poker game for two players.
//!
//! The engine is value-semantic. [`GameState::apply`] returns a new state and
//! never mutates the receiver, so states can be freely cloned, compared, and
//! shared across threads. A game is a pure function of its seed and the
//! sequence of actions applied to it.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("game over")]
    GameOver,
    #[error("illegal action {action}; legal actions are {}", fmt_actions(.legal))]
    IllegalAction { action: Action, legal: Vec<Action> },
    #[error("game is not over yet")]
    NotTerminal,
    #[error("invalid seat index {0}")]
    InvalidSeat(usize),
}

fn fmt_actions(actions: &[Action]) -> String {
    let names: Vec<_> = actions.iter().map(|a| a.name()).collect();
    format!("[{}]", names.join(", "))
}

/// A seat at the table. Seat 0 posts the small blind and acts first in both rounds.
pub type Seat = usize;

pub fn other(seat: Seat) -> Seat {
    1 - seat
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rank {
    Jack,
    Queen,
    King,
}

impl Rank {
    pub const ALL: [Rank; 3] = [Rank::Jack, Rank::Queen, Rank::King];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Rank {
        Rank::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            Rank::Jack => 'J',
            Rank::Queen => 'Q',
            Rank::King => 'K',
        }
    }

    pub fn from_letter(c: char) -> Option<Rank> {
        match c.to_ascii_uppercase() {
            'J' => Some(Rank::Jack),
            'Q' => Some(Rank::Queen),
            'K' => Some(Rank::King),
            _ => None,
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Rank::Jack => "Jack",
            Rank::Queen => "Queen",
            Rank::King => "King",
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

/// One physical card. The two copies of a rank only differ for deck accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Card {
    pub rank: Rank,
    pub copy_index: u8,
}

impl Card {
    pub fn new(rank: Rank, copy_index: u8) -> Card {
        Card { rank, copy_index }
    }
}

/// The full six-card deck in a fixed order.
pub fn deck() -> [Card; 6] {
    let mut cards = [Card::new(Rank::Jack, 0); 6];
    for (i, card) in cards.iter_mut().enumerate() {
        *card = Card::new(Rank::from_index(i / 2), (i % 2) as u8);
    }
    cards
}

/// Number of copies of each rank in the deck.
pub const COPIES_PER_RANK: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Call,
    Raise,
    Fold,
    Check,
}

impl Action {
    /// Canonical order, used by policy files and action tables.
    pub const ALL: [Action; 4] = [Action::Call, Action::Raise, Action::Fold, Action::Check];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Call => "call",
            Action::Raise => "raise",
            Action::Fold => "fold",
            Action::Check => "check",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Action::Call => 'c',
            Action::Raise => 'r',
            Action::Fold => 'f',
            Action::Check => 'k',
        }
    }

    pub fn from_letter(c: char) -> Option<Action> {
        match c {
            'c' => Some(Action::Call),
            'r' => Some(Action::Raise),
            'f' => Some(Action::Fold),
            'k' => Some(Action::Check),
            _ => None,
        }
    }

    /// Parses a case-insensitive action word ("call", "Raise", ...).
    pub fn parse(token: &str) -> Option<Action> {
        match token.trim().to_ascii_lowercase().as_str() {
            "call" => Some(Action::Call),
            "raise" => Some(Action::Raise),
            "fold" => Some(Action::Fold),
            "check" => Some(Action::Check),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Table stakes. The defaults give a per-game payoff between 1 and 14 chips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeducConfig {
    pub small_blind: u32,
    pub big_blind: u32,
    pub raise_sizes: [u32; 2],
    pub max_raises: u8,
}

impl Default for LeducConfig {
    fn default() -> Self {
        LeducConfig {
            small_blind: 1,
            big_blind: 2,
            raise_sizes: [2, 4],
            max_raises: 2,
        }
    }
}

/// A betting event as seen by both players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BetEvent {
    pub seat: Seat,
    pub round: u8,
    pub action: Action,
}

/// How the current betting round (or the whole game) ended after an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetOutcome {
    Continue,
    RoundClosed,
    Folded(Seat),
}

/// Public betting state, independent of the cards.
///
/// Shared by the game engine and the solver's public tree so that both walk
/// exactly the same betting rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Betting {
    pub config: LeducConfig,
    pub round: u8,
    pub contributions: [u32; 2],
    pub raises_this_round: u8,
    pub to_act: Seat,
    pub actions_this_round: u8,
    pub finished: bool,
}

impl Betting {
    pub fn new(config: LeducConfig) -> Betting {
        Betting {
            config,
            round: 1,
            contributions: [config.small_blind, config.big_blind],
            raises_this_round: 0,
            to_act: 0,
            actions_this_round: 0,
            finished: false,
        }
    }

    pub fn facing_bet(&self) -> bool {
        self.contributions[self.to_act] < self.contributions[other(self.to_act)]
    }

    /// Legal actions in canonical order. Empty once betting has finished.
    pub fn legal_actions(&self) -> Vec<Action> {
        if self.finished {
            return Vec::new();
        }
        let facing = self.facing_bet();
        let can_raise = self.raises_this_round < self.config.max_raises;
        Action::ALL
            .into_iter()
            .filter(|a| match a {
                Action::Call | Action::Fold => facing,
                Action::Check => !facing,
                Action::Raise => can_raise,
            })
            .collect()
    }

    pub fn raise_size(&self) -> u32 {
        self.config.raise_sizes[(self.round - 1) as usize]
    }

    /// Applies a legal action in place. The caller checks legality.
    pub fn apply(&mut self, action: Action) -> BetOutcome {
        let seat = self.to_act;
        let opp = other(seat);
        self.actions_this_round += 1;
        match action {
            Action::Fold => {
                self.finished = true;
                return BetOutcome::Folded(seat);
            }
            Action::Call => {
                self.contributions[seat] = self.contributions[opp];
            }
            Action::Raise => {
                self.contributions[seat] = self.contributions[opp] + self.raise_size();
                self.raises_this_round += 1;
            }
            Action::Check => {}
        }
        let settled = self.contributions[0] == self.contributions[1];
        if settled && self.actions_this_round >= 2 {
            if self.round == 1 {
                self.round = 2;
                self.raises_this_round = 0;
                self.actions_this_round = 0;
                self.to_act = 0;
            } else {
                self.finished = true;
            }
            BetOutcome::RoundClosed
        } else {
            self.to_act = opp;
            BetOutcome::Continue
        }
    }
}

/// The cards of one game: both hole cards plus the public card, drawn up front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deal {
    pub holes: [Card; 2],
    pub public: Card,
}

impl Deal {
    /// Deals from a seeded shuffle of the six-card deck.
    pub fn from_seed(seed: u64) -> Deal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cards = deck();
        cards.shuffle(&mut rng);
        Deal {
            holes: [cards[0], cards[1]],
            public: cards[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    Seat(Seat),
    Draw,
}

/// Showdown rule: pairing the public card wins, otherwise the higher rank wins.
pub fn showdown(holes: [Rank; 2], public: Rank) -> Winner {
    let pair0 = holes[0] == public;
    let pair1 = holes[1] == public;
    match (pair0, pair1) {
        (true, false) => Winner::Seat(0),
        (false, true) => Winner::Seat(1),
        _ => match holes[0].cmp(&holes[1]) {
            std::cmp::Ordering::Greater => Winner::Seat(0),
            std::cmp::Ordering::Less => Winner::Seat(1),
            std::cmp::Ordering::Equal => Winner::Draw,
        },
    }
}

/// Chips won by each seat when the pot goes to `winner`.
pub fn settle(contributions: [u32; 2], winner: Winner) -> [i32; 2] {
    let c = [contributions[0] as i32, contributions[1] as i32];
    match winner {
        Winner::Draw => [0, 0],
        Winner::Seat(w) => {
            let mut p = [0; 2];
            p[w] = c[other(w)];
            p[other(w)] = -c[other(w)];
            p
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    deal: Deal,
    betting: Betting,
    history: Vec<BetEvent>,
    winner: Option<Winner>,
    folded: Option<Seat>,
}

impl GameState {
    /// Fresh round-1 state with blinds posted and seat 0 to act.
    pub fn new(seed: u64, config: LeducConfig) -> GameState {
        GameState::with_deal(Deal::from_seed(seed), config)
    }

    pub fn with_deal(deal: Deal, config: LeducConfig) -> GameState {
        GameState {
            deal,
            betting: Betting::new(config),
            history: Vec::new(),
            winner: None,
            folded: None,
        }
    }

    pub fn deal(&self) -> &Deal {
        &self.deal
    }

    pub fn betting(&self) -> &Betting {
        &self.betting
    }

    pub fn round(&self) -> u8 {
        self.betting.round
    }

    pub fn to_act(&self) -> Seat {
        self.betting.to_act
    }

    pub fn hole(&self, seat: Seat) -> Card {
        self.deal.holes[seat]
    }

    /// The public card, once revealed. It stays hidden if the game ends in round 1.
    pub fn public_card(&self) -> Option<Card> {
        (self.betting.round == 2).then_some(self.deal.public)
    }

    pub fn contributions(&self) -> [u32; 2] {
        self.betting.contributions
    }

    pub fn raises_this_round(&self) -> u8 {
        self.betting.raises_this_round
    }

    pub fn history(&self) -> &[BetEvent] {
        &self.history
    }

    pub fn is_terminal(&self) -> bool {
        self.winner.is_some()
    }

    pub fn winner(&self) -> Option<Winner> {
        self.winner
    }

    pub fn folded_by(&self) -> Option<Seat> {
        self.folded
    }

    /// True when the game ended by comparing cards.
    pub fn went_to_showdown(&self) -> bool {
        self.is_terminal() && self.folded.is_none()
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, GameError> {
        if self.is_terminal() {
            return Err(GameError::GameOver);
        }
        Ok(self.betting.legal_actions())
    }

    pub fn apply(&self, action: Action) -> Result<GameState, GameError> {
        let legal = self.legal_actions()?;
        if !legal.contains(&action) {
            return Err(GameError::IllegalAction { action, legal });
        }
        let mut next = self.clone();
        next.history.push(BetEvent {
            seat: self.betting.to_act,
            round: self.betting.round,
            action,
        });
        match next.betting.apply(action) {
            BetOutcome::Continue => {}
            BetOutcome::Folded(seat) => {
                next.folded = Some(seat);
                next.winner = Some(Winner::Seat(other(seat)));
            }
            BetOutcome::RoundClosed => {
                if next.betting.finished {
                    let holes = [next.deal.holes[0].rank, next.deal.holes[1].rank];
                    next.winner = Some(showdown(holes, next.deal.public.rank));
                }
            }
        }
        Ok(next)
    }

    /// Per-seat chip result of a finished game. Always sums to zero.
    pub fn payoff(&self) -> Result<[i32; 2], GameError> {
        let winner = self.winner.ok_or(GameError::NotTerminal)?;
        Ok(settle(self.betting.contributions, winner))
    }

    pub fn observe(&self, seat: Seat) -> Result<Observation, GameError> {
        if seat > 1 {
            return Err(GameError::InvalidSeat(seat));
        }
        Ok(Observation {
            player: seat,
            private_card: self.deal.holes[seat].rank,
            public_card: self.public_card().map(|c| c.rank),
            pot_contribution: self.betting.contributions,
            legal_actions: self.legal_actions().unwrap_or_default(),
            round: self.betting.round,
            betting_sequence_public: self.history.clone(),
        })
    }
}

/// One player's imperfect view of the game. Holds no field for the opponent's card.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub player: Seat,
    pub private_card: Rank,
    pub public_card: Option<Rank>,
    pub pot_contribution: [u32; 2],
    pub legal_actions: Vec<Action>,
    pub round: u8,
    pub betting_sequence_public: Vec<BetEvent>,
}

impl Observation {
    pub fn facing_bet(&self) -> bool {
        self.pot_contribution[self.player] < self.pot_contribution[other(self.player)]
    }

    pub fn raises_this_round(&self) -> u8 {
        self.betting_sequence_public
            .iter()
            .filter(|e| e.round == self.round && e.action == Action::Raise)
            .count() as u8
    }

    pub fn is_legal(&self, action: Action) -> bool {
        self.legal_actions.contains(&action)
    }

    /// This player's most recent action in the game so far.
    pub fn my_last_action(&self) -> Option<Action> {
        last_action_of(&self.betting_sequence_public, self.player)
    }

    /// The opponent's most recent action in the game so far.
    pub fn opponent_last_action(&self) -> Option<Action> {
        last_action_of(&self.betting_sequence_public, other(self.player))
    }
}

pub fn last_action_of(events: &[BetEvent], seat: Seat) -> Option<Action> {
    events.iter().rev().find(|e| e.seat == seat).map(|e| e.action)
}

/// Betting context at each event of a public sequence: the state *before* the event.
pub fn replay_contexts(config: LeducConfig, events: &[BetEvent]) -> Vec<Betting> {
    let mut betting = Betting::new(config);
    let mut out = Vec::with_capacity(events.len());
    for e in events {
        out.push(betting.clone());
        betting.apply(e.action);
    }
    out
}
