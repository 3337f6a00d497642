//! Match protocols, action statistics, reports and replay files.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{Agent, AgentError, AgentSnapshot};
use crate::game::{other, Action, GameError, GameState, LeducConfig};
use crate::record::{GameRecord, Seats};

mod replay;
mod report;

pub use replay::{read_replays, write_replays, ReplayError};
pub use report::{emit_report, render_svg, ReportFiles};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("a match needs at least one game")]
    NoGames,
    #[error("no records to count")]
    EmptyRecords,
    #[error("game {game_id}: {source}")]
    Agent { game_id: u64, source: AgentError },
    #[error("game {game_id}: {source}")]
    Game { game_id: u64, source: GameError },
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("i/o error at {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    VariableSeeds,
    PositionSwap,
}

/// Share of each action among one agent's decisions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionShares {
    pub raise: f64,
    pub call: f64,
    pub fold: f64,
    pub check: f64,
    pub decisions: u64,
}

impl ActionShares {
    pub fn get(&self, action: Action) -> f64 {
        match action {
            Action::Raise => self.raise,
            Action::Call => self.call,
            Action::Fold => self.fold,
            Action::Check => self.check,
        }
    }

    pub fn total(&self) -> f64 {
        self.raise + self.call + self.fold + self.check
    }
}

/// One game from the point of view of the two agents (A first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub game_id: u64,
    pub leg: u8,
    pub seed: u64,
    /// Seat agent A played.
    pub a_seat: usize,
    pub payoffs: [i32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub agents: [String; 2],
    pub protocol: Protocol,
    pub n_games: usize,
    pub base_seed: u64,
    pub games: Vec<GameResult>,
    pub totals: [i64; 2],
    /// The agent with a positive total, if any.
    pub winner: Option<String>,
    pub action_shares: [ActionShares; 2],
    pub config: [AgentSnapshot; 2],
}

impl MatchReport {
    pub fn total_of(&self, name: &str) -> Option<i64> {
        self.agents.iter().position(|a| a == name).map(|i| self.totals[i])
    }
}

/// A finished match: the report and every game record as persisted.
#[derive(Debug, Clone)]
pub struct MatchOutcome {
    pub report: MatchReport,
    pub records: Vec<GameRecord>,
}

/// Names used in records and reports; identical names get an A/B suffix.
fn labels(a: &dyn Agent, b: &dyn Agent) -> [String; 2] {
    if a.name() == b.name() {
        [format!("{} (A)", a.name()), format!("{} (B)", b.name())]
    } else {
        [a.name().to_owned(), b.name().to_owned()]
    }
}

/// Plays one game. `agents[s]` sits at seat `s`; `slots[s]` is that agent's
/// stable index, used to derive its random stream.
pub fn play_game(
    agents: [&mut dyn Agent; 2],
    names: [&str; 2],
    slots: [u64; 2],
    game_id: u64,
    seed: u64,
    config: LeducConfig,
) -> Result<GameRecord, HarnessError> {
    let [a0, a1] = agents;
    let mut seats: [&mut dyn Agent; 2] = [a0, a1];
    let agent_err = |source| HarnessError::Agent { game_id, source };
    let game_err = |source| HarnessError::Game { game_id, source };
    let mut rngs = slots.map(|slot| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(slot + 1);
        rng
    });
    for (seat, agent) in seats.iter_mut().enumerate() {
        agent.begin_game(game_id, seat).map_err(agent_err)?;
    }
    let mut state = GameState::new(seed, config);
    let mut deliberations = Vec::new();
    while !state.is_terminal() {
        let seat = state.to_act();
        let obs = state.observe(seat).map_err(game_err)?;
        let decision = seats[seat].act(&obs, &mut rngs[seat]).map_err(agent_err)?;
        if !obs.is_legal(decision.action) {
            return Err(agent_err(AgentError::Illegal {
                action: decision.action,
                legal: obs.legal_actions,
            }));
        }
        deliberations.push(decision.deliberation);
        state = state.apply(decision.action).map_err(game_err)?;
    }
    let full = GameRecord::from_state(game_id, seed, Seats::new(names[0], names[1]), &state, deliberations, true)
        .expect("terminal state yields a record");
    for agent in seats.iter_mut() {
        agent.end_game(&full).map_err(agent_err)?;
    }
    let mut persisted = full;
    for (seat, agent) in seats.iter().enumerate() {
        if agent.is_adaptive() && !agent.hindsight() {
            persisted.deal.set_hole(other(seat), None);
            persisted.hindsight = false;
        }
    }
    Ok(persisted)
}

fn run(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    protocol: Protocol,
    n_games: usize,
    base_seed: u64,
    config: LeducConfig,
) -> Result<MatchOutcome, HarnessError> {
    if n_games == 0 {
        return Err(HarnessError::NoGames);
    }
    let names = labels(a, b);
    let legs: &[u8] = match protocol {
        Protocol::VariableSeeds => &[1],
        Protocol::PositionSwap => &[1, 2],
    };
    let mut records = Vec::new();
    let mut games = Vec::new();
    let mut game_id = 0u64;
    for &leg in legs {
        let a_seat = usize::from(leg == 2);
        for i in 0..n_games as u64 {
            let seed = base_seed.wrapping_add(i);
            let record = if a_seat == 0 {
                play_game([&mut *a, &mut *b], [&names[0], &names[1]], [0, 1], game_id, seed, config)?
            } else {
                play_game([&mut *b, &mut *a], [&names[1], &names[0]], [1, 0], game_id, seed, config)?
            };
            games.push(GameResult {
                game_id,
                leg,
                seed,
                a_seat,
                payoffs: [record.payoffs[a_seat], record.payoffs[1 - a_seat]],
            });
            records.push(record);
            game_id += 1;
        }
    }
    let totals = [0, 1].map(|i| games.iter().map(|g| i64::from(g.payoffs[i])).sum::<i64>());
    let shares = action_percentages(&records)?;
    let action_shares = [0, 1].map(|i| shares.get(&names[i]).copied().unwrap_or_default());
    let winner = (0..2).find(|&i| totals[i] > 0).map(|i| names[i].clone());
    let report = MatchReport {
        agents: names.clone(),
        protocol,
        n_games,
        base_seed,
        games,
        totals,
        winner,
        action_shares,
        config: [a.snapshot(), b.snapshot()],
    };
    Ok(MatchOutcome { report, records })
}

/// `n_games` games with seeds `base_seed + i`, agent A at seat 0.
pub fn run_variable_seeds(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    n_games: usize,
    base_seed: u64,
    config: LeducConfig,
) -> Result<MatchOutcome, HarnessError> {
    run(a, b, Protocol::VariableSeeds, n_games, base_seed, config)
}

/// Two legs over the same seeds: A at seat 0, then A at seat 1.
pub fn run_position_swap(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    n_games: usize,
    seed: u64,
    config: LeducConfig,
) -> Result<MatchOutcome, HarnessError> {
    run(a, b, Protocol::PositionSwap, n_games, seed, config)
}

/// Action shares per agent name over every decision in `records`.
pub fn action_percentages(records: &[GameRecord]) -> Result<BTreeMap<String, ActionShares>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    let mut counts: BTreeMap<String, [u64; 4]> = BTreeMap::new();
    for r in records {
        for s in &r.steps {
            counts.entry(r.seats.get(s.seat).to_owned()).or_default()[s.action.index()] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(name, c)| {
            let n: u64 = c.iter().sum();
            let share = |a: Action| c[a.index()] as f64 / n as f64;
            let shares = ActionShares {
                raise: share(Action::Raise),
                call: share(Action::Call),
                fold: share(Action::Fold),
                check: share(Action::Check),
                decisions: n,
            };
            (name, shares)
        })
        .collect())
}
