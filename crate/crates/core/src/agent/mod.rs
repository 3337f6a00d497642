//! The deliberating agent and the common interface every seat implements.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefDistribution, OpponentModel, PlanCandidate};
use crate::game::{Action, Observation, Seat};
use crate::llm::{LlmError, TemplateError};
use crate::opponents::Policy;
use crate::record::GameRecord;

pub mod analysis;
pub mod pipeline;
pub mod rules;

pub use pipeline::{
    analyze_game, end_game_update, fallback_action, interpret_observation, plan_and_evaluate, predict_cards, run_turn,
    DeliberationAgent, LlmSettings, Pipeline, Reasoner,
};
pub use rules::{ObsConversionRule, RuleDescription};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToMOrder {
    Zero,
    First,
    Second,
}

impl ToMOrder {
    pub const ALL: [ToMOrder; 3] = [ToMOrder::Zero, ToMOrder::First, ToMOrder::Second];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ToMOrder::Zero => "zero",
            ToMOrder::First => "first",
            ToMOrder::Second => "second",
        }
    }
}

impl fmt::Display for ToMOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ToMOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(ToMOrder::Zero),
            "first" | "1" => Ok(ToMOrder::First),
            "second" | "2" => Ok(ToMOrder::Second),
            other => Err(format!("unknown ToM order {other:?}; expected zero, first or second")),
        }
    }
}

/// Output of the per-game analysis stage.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisBundle {
    pub reflexion_text: String,
    pub behavior_pattern: OpponentModel,
    pub pattern_text: String,
    /// What the opponent probably believes about my play (second order only).
    pub opponent_belief_on_me: Option<String>,
    pub diagnostics: Vec<String>,
}

impl AnalysisBundle {
    /// The bundle of a player without history.
    pub fn empty() -> AnalysisBundle {
        AnalysisBundle {
            reflexion_text: String::new(),
            behavior_pattern: OpponentModel::uniform(),
            pattern_text: String::new(),
            opponent_belief_on_me: None,
            diagnostics: Vec::new(),
        }
    }
}

/// One decision's full reasoning trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliberationRecord {
    pub tom_order: ToMOrder,
    pub obs_text: String,
    pub belief: BeliefDistribution,
    pub belief_text: String,
    pub plans: Vec<PlanCandidate>,
    pub chosen: Action,
    pub fallback_used: bool,
    /// The exact evaluator's choice, recorded when a language model decided.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_choice: Option<Action>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raw_prompts: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raw_completions: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub redacted: bool,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("observation has no legal actions")]
    NoLegalActions,
    #[error("game record is not terminal")]
    NotTerminal,
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("agent returned illegal action {action} (legal: {legal:?})")]
    Illegal { action: Action, legal: Vec<Action> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub deliberation: Option<DeliberationRecord>,
}

/// Settings worth reporting alongside match results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tom_order: Option<ToMOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hindsight: Option<bool>,
    pub backend: String,
}

/// A seat at the table. Adaptive agents keep state across the games of a match.
pub trait Agent: Send {
    fn name(&self) -> &str;

    fn is_adaptive(&self) -> bool {
        false
    }

    /// Whether this agent gets to see the opponent's card after each game.
    fn hindsight(&self) -> bool {
        true
    }

    fn begin_game(&mut self, _game_id: u64, _seat: Seat) -> Result<(), AgentError> {
        Ok(())
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Result<Decision, AgentError>;

    /// Receives the full record of a finished game; agents mask what they
    /// should not remember.
    fn end_game(&mut self, _record: &GameRecord) -> Result<(), AgentError> {
        Ok(())
    }

    fn snapshot(&self) -> AgentSnapshot;
}

/// A stateless policy in a seat.
pub struct PolicyAgent {
    policy: Arc<dyn Policy>,
    kind: String,
}

impl PolicyAgent {
    pub fn new(policy: Arc<dyn Policy>) -> PolicyAgent {
        let kind = if policy.name().starts_with("cfr:") {
            "cfr".to_owned()
        } else {
            "archetype".to_owned()
        };
        PolicyAgent { policy, kind }
    }
}

impl Agent for PolicyAgent {
    fn name(&self) -> &str {
        self.policy.name()
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Result<Decision, AgentError> {
        if obs.legal_actions.is_empty() {
            return Err(AgentError::NoLegalActions);
        }
        Ok(Decision {
            action: self.policy.act(obs, rng),
            deliberation: None,
        })
    }

    fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            name: self.name().to_owned(),
            kind: self.kind.clone(),
            tom_order: None,
            hindsight: None,
            backend: "policy".into(),
        }
    }
}
