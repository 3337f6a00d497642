//! Scripted opponents and the common policy interface.
//!
//! The archetypes are small fixed tables that reproduce four behavioural
//! profiles of trained Leduc agents: a caller that never folds, a raiser that
//! bets every decent hand, a polarized bluffer, and a tight folder. Trained CFR
//! profiles plug in through the same [`Policy`] trait.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cfr::{CfrError, StrategyProfile};
use crate::dist::ActionDist;
use crate::game::{Action, Observation, Rank};

#[derive(Debug, Error)]
pub enum OpponentError {
    #[error("unknown archetype {0:?}; valid options are {valid}", valid = ARCHETYPE_NAMES.join(", "))]
    UnknownArchetype(String),
    #[error("failed to load CFR policy {path}: {source}")]
    Policy { path: String, source: CfrError },
}

/// A stationary (possibly stochastic) strategy.
pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Distribution over the legal actions of `obs`. Illegal actions get 0.
    fn distribution(&self, obs: &Observation) -> ActionDist;

    fn act(&self, obs: &Observation, rng: &mut dyn RngCore) -> Action {
        self.distribution(obs).sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HandStrength {
    Weak,
    Mid,
    Strong,
    Pair,
}

impl HandStrength {
    pub const ALL: [HandStrength; 4] = [
        HandStrength::Weak,
        HandStrength::Mid,
        HandStrength::Strong,
        HandStrength::Pair,
    ];

    pub fn of(own: Rank, public: Option<Rank>) -> HandStrength {
        if public == Some(own) {
            return HandStrength::Pair;
        }
        match own {
            Rank::Jack => HandStrength::Weak,
            Rank::Queen => HandStrength::Mid,
            Rank::King => HandStrength::Strong,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HandStrength::Weak => "weak",
            HandStrength::Mid => "mid",
            HandStrength::Strong => "strong",
            HandStrength::Pair => "pair",
        }
    }
}

/// Archetype intent before it is mapped onto the legal actions.
#[derive(Debug, Clone, Copy, Default)]
struct Intent {
    raise: f64,
    passive: f64,
    fold: f64,
}

impl Intent {
    fn new(raise: f64, passive: f64, fold: f64) -> Intent {
        Intent { raise, passive, fold }
    }

    fn resolve(self, obs: &Observation) -> ActionDist {
        ActionDist::from_pairs(&[
            (Action::Raise, self.raise),
            (Action::Call, self.passive),
            (Action::Fold, self.fold),
        ])
        .resolve_to(&obs.legal_actions)
    }
}

pub const ARCHETYPE_NAMES: [&str; 5] = [
    "always_caller",
    "aggressive_raiser",
    "polar_bluffer",
    "conservative_folder",
    "reactive_conservative_folder",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    AlwaysCaller,
    AggressiveRaiser,
    PolarBluffer,
    ConservativeFolder,
    /// The conservative folder, additionally swayed by the opponent's last
    /// action: it backs down after being raised and probes after passivity.
    ReactiveConservativeFolder,
}

impl Archetype {
    pub const ALL: [Archetype; 5] = [
        Archetype::AlwaysCaller,
        Archetype::AggressiveRaiser,
        Archetype::PolarBluffer,
        Archetype::ConservativeFolder,
        Archetype::ReactiveConservativeFolder,
    ];

    pub fn name(self) -> &'static str {
        ARCHETYPE_NAMES[self as usize]
    }

    fn intent(self, obs: &Observation) -> Intent {
        use HandStrength::*;
        let tier = HandStrength::of(obs.private_card, obs.public_card);
        let facing = obs.facing_bet();
        match self {
            Archetype::AlwaysCaller => Intent::new(0.0, 1.0, 0.0),
            Archetype::AggressiveRaiser => match tier {
                Weak => Intent::new(0.0, 1.0, 0.0),
                Mid | Strong | Pair => Intent::new(1.0, 0.0, 0.0),
            },
            Archetype::PolarBluffer => match tier {
                Weak if facing && obs.raises_this_round() >= 2 => Intent::new(0.0, 0.5, 0.5),
                Weak => Intent::new(0.8, 0.2, 0.0),
                Mid => Intent::new(0.2, 0.8, 0.0),
                Strong | Pair => Intent::new(1.0, 0.0, 0.0),
            },
            Archetype::ConservativeFolder => conservative(tier, facing),
            Archetype::ReactiveConservativeFolder => match (obs.opponent_last_action(), tier) {
                (Some(Action::Raise), Weak) if facing => Intent::new(0.0, 0.1, 0.9),
                (Some(Action::Raise), Mid) if facing => Intent::new(0.0, 0.4, 0.6),
                (Some(Action::Raise), Weak | Mid) => Intent::new(0.0, 1.0, 0.0),
                (Some(Action::Call | Action::Check), Weak) if !facing => Intent::new(0.5, 0.5, 0.0),
                (Some(Action::Call | Action::Check), Mid) if !facing => Intent::new(0.6, 0.4, 0.0),
                _ => conservative(tier, facing),
            },
        }
    }
}

fn conservative(tier: HandStrength, facing: bool) -> Intent {
    match tier {
        HandStrength::Weak if facing => Intent::new(0.0, 0.3, 0.7),
        HandStrength::Weak => Intent::new(0.0, 1.0, 0.0),
        HandStrength::Mid => Intent::new(0.2, 0.8, 0.0),
        HandStrength::Strong | HandStrength::Pair => Intent::new(0.7, 0.3, 0.0),
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Archetype {
    type Err = OpponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Archetype::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| OpponentError::UnknownArchetype(s.to_owned()))
    }
}

impl Policy for Archetype {
    fn name(&self) -> &str {
        Archetype::name(*self)
    }

    fn distribution(&self, obs: &Observation) -> ActionDist {
        self.intent(obs).resolve(obs)
    }
}

/// Looks up an archetype by its configuration name.
pub fn archetype(name: &str) -> Result<Archetype, OpponentError> {
    name.parse()
}

/// Plays the average strategy of a trained CFR profile.
#[derive(Debug, Clone)]
pub struct CfrPolicy {
    name: String,
    profile: Arc<StrategyProfile>,
}

impl CfrPolicy {
    pub fn new(name: impl Into<String>, profile: Arc<StrategyProfile>) -> CfrPolicy {
        CfrPolicy {
            name: name.into(),
            profile,
        }
    }

    pub fn load(path: &Path) -> Result<CfrPolicy, OpponentError> {
        let profile = StrategyProfile::load(path).map_err(|source| OpponentError::Policy {
            path: path.display().to_string(),
            source,
        })?;
        Ok(CfrPolicy::new(format!("cfr:{}", path.display()), Arc::new(profile)))
    }

    pub fn profile(&self) -> &StrategyProfile {
        &self.profile
    }
}

impl Policy for CfrPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn distribution(&self, obs: &Observation) -> ActionDist {
        self.profile.average_for_observation(obs)
    }
}

/// Resolves a policy name: an archetype name or `cfr:<policy-file-path>`.
pub fn policy_from_name(name: &str) -> Result<Arc<dyn Policy>, OpponentError> {
    if let Some(path) = name.strip_prefix("cfr:") {
        return Ok(Arc::new(CfrPolicy::load(Path::new(path))?));
    }
    Ok(Arc::new(archetype(name)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameState, LeducConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs_after(seed: u64, actions: &[Action]) -> Observation {
        let mut s = GameState::new(seed, LeducConfig::default());
        for &a in actions {
            s = s.apply(a).unwrap();
        }
        s.observe(s.to_act()).unwrap()
    }

    fn obs_with(own: Rank, actions: &[Action]) -> Observation {
        (0..200)
            .map(|seed| obs_after(seed, actions))
            .find(|o| o.private_card == own)
            .unwrap()
    }

    #[test]
    fn tiers() {
        assert_eq!(HandStrength::of(Rank::Jack, None), HandStrength::Weak);
        assert_eq!(HandStrength::of(Rank::Queen, Some(Rank::King)), HandStrength::Mid);
        assert_eq!(HandStrength::of(Rank::King, Some(Rank::Jack)), HandStrength::Strong);
        assert_eq!(HandStrength::of(Rank::Jack, Some(Rank::Jack)), HandStrength::Pair);
    }

    #[test]
    fn always_caller_calls_raises() {
        let o = obs_with(Rank::Jack, &[Action::Raise]);
        let d = Archetype::AlwaysCaller.distribution(&o);
        assert_eq!(d.get(Action::Call), 1.0);
    }

    #[test]
    fn aggressive_raiser_raises_strong() {
        let o = obs_with(Rank::King, &[]);
        let d = Archetype::AggressiveRaiser.distribution(&o);
        assert_eq!(d.get(Action::Raise), 1.0);
        // Raise cap reached: the mass moves to Call.
        let o = obs_with(Rank::King, &[Action::Raise, Action::Raise]);
        let d = Archetype::AggressiveRaiser.distribution(&o);
        assert_eq!(d.get(Action::Call), 1.0);
    }

    #[test]
    fn polar_bluffer_bluffs_weak_unfaced() {
        let o = obs_with(Rank::Jack, &[Action::Call]);
        assert!(!o.facing_bet());
        let d = Archetype::PolarBluffer.distribution(&o);
        assert!((d.get(Action::Raise) - 0.8).abs() < 1e-12);
        assert!((d.get(Action::Check) - 0.2).abs() < 1e-12);
        let o = obs_with(Rank::Jack, &[Action::Raise, Action::Raise]);
        let d = Archetype::PolarBluffer.distribution(&o);
        assert_eq!(d.get(Action::Fold), 0.5);
        assert_eq!(d.get(Action::Call), 0.5);
    }

    #[test]
    fn conservative_folder_folds_weak_and_checks_unfaced() {
        let o = obs_with(Rank::Jack, &[]);
        let d = Archetype::ConservativeFolder.distribution(&o);
        assert!((d.get(Action::Fold) - 0.7).abs() < 1e-12);
        let o = obs_with(Rank::Jack, &[Action::Call]);
        let d = Archetype::ConservativeFolder.distribution(&o);
        assert_eq!(d.get(Action::Check), 1.0);
    }

    #[test]
    fn reactive_folder_backs_down_after_a_raise() {
        let o = obs_with(Rank::Jack, &[Action::Raise]);
        let d = Archetype::ReactiveConservativeFolder.distribution(&o);
        assert!((d.get(Action::Fold) - 0.9).abs() < 1e-12);
        let o = obs_with(Rank::Jack, &[Action::Call]);
        let d = Archetype::ReactiveConservativeFolder.distribution(&o);
        assert!((d.get(Action::Raise) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_archetype_lists_options() {
        let err = archetype("bluffer").unwrap_err().to_string();
        assert!(err.contains("always_caller") && err.contains("conservative_folder"));
    }

    #[test]
    fn seeded_sampling_replays() {
        let o = obs_with(Rank::Queen, &[]);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| Archetype::PolarBluffer.act(&o, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(4), run(4));
    }
}
