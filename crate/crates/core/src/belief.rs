//! Exact belief and expected-value arithmetic behind a deliberation.
//!
//! Everything here is a pure function of its inputs and enumerates the
//! remaining game tree exactly: the opponent's hole card (weighted by belief),
//! the unseen public card, and the opponent's modelled responses. The agent
//! uses it as its reasoning backend, and the harness uses it to audit numbers
//! produced by a language model.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::ActionDist;
use crate::game::{
    replay_contexts, showdown, Action, BetEvent, BetOutcome, Betting, LeducConfig,
    Observation, Rank, Seat, Winner, COPIES_PER_RANK,
};
use crate::opponents::HandStrength;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BeliefError {
    #[error("no plan candidates to choose from")]
    NoCandidates,
}

/// Probability of each opponent hole rank, indexed J, Q, K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefDistribution {
    pub probs: [f64; 3],
}

impl BeliefDistribution {
    pub fn new(probs: [f64; 3]) -> BeliefDistribution {
        BeliefDistribution { probs }
    }

    /// Normalizes non-negative weights. Returns `None` if they sum to zero.
    pub fn from_weights(weights: [f64; 3]) -> Option<BeliefDistribution> {
        let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
        (total > 0.0).then(|| BeliefDistribution {
            probs: weights.map(|w| w.max(0.0) / total),
        })
    }

    pub fn point(rank: Rank) -> BeliefDistribution {
        let mut probs = [0.0; 3];
        probs[rank.index()] = 1.0;
        BeliefDistribution { probs }
    }

    pub fn get(&self, rank: Rank) -> f64 {
        self.probs[rank.index()]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= 1e-9 && self.probs.iter().all(|p| (0.0..=1.0).contains(p))
    }

    pub fn most_likely(&self) -> Rank {
        let mut best = Rank::Jack;
        for r in Rank::ALL {
            if self.get(r) > self.get(best) {
                best = r;
            }
        }
        best
    }
}

impl fmt::Display for BeliefDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = Rank::ALL
            .iter()
            .map(|r| format!("{} {:.0}%", r.word(), 100.0 * self.get(*r)))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// Copies of `rank` left in the deck once the listed cards are removed.
fn remaining(rank: Rank, removed: &[Rank]) -> f64 {
    let used = removed.iter().filter(|&&r| r == rank).count() as f64;
    (COPIES_PER_RANK as f64 - used).max(0.0)
}

/// Prior over the opponent's rank from the unseen cards alone.
pub fn card_prior(own: Rank, public: Option<Rank>) -> BeliefDistribution {
    let removed: Vec<Rank> = std::iter::once(own).chain(public).collect();
    BeliefDistribution::from_weights(Rank::ALL.map(|r| remaining(r, &removed)))
        .expect("at least one card remains")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelMode {
    Uniform,
    Static,
    Reactive,
}

/// What the modelled opponent sees when it acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecisionContext {
    pub tier: HandStrength,
    pub round: u8,
    pub facing: bool,
    /// The modeller's own most recent action in this game, if any.
    pub my_last: Option<Action>,
}

/// A table row key. `None` fields match anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowKey {
    pub tier: HandStrength,
    pub round: u8,
    pub facing: Option<bool>,
    pub my_last: Option<Option<Action>>,
}

impl RowKey {
    pub fn static_row(tier: HandStrength, round: u8, facing: bool) -> RowKey {
        RowKey {
            tier,
            round,
            facing: Some(facing),
            my_last: None,
        }
    }

    pub fn reactive_row(tier: HandStrength, round: u8, facing: bool, my_last: Option<Action>) -> RowKey {
        RowKey {
            tier,
            round,
            facing: Some(facing),
            my_last: Some(my_last),
        }
    }
}

/// Conditional action tendencies of the opponent.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentModel {
    pub mode: ModelMode,
    pub rows: BTreeMap<RowKey, ActionDist>,
}

impl OpponentModel {
    pub fn uniform() -> OpponentModel {
        OpponentModel {
            mode: ModelMode::Uniform,
            rows: BTreeMap::new(),
        }
    }

    pub fn new(mode: ModelMode) -> OpponentModel {
        OpponentModel {
            mode,
            rows: BTreeMap::new(),
        }
    }

    pub fn with_row(mut self, key: RowKey, dist: ActionDist) -> OpponentModel {
        self.rows.insert(key, dist);
        self
    }

    /// The modelled action distribution, mapped onto `legal`.
    ///
    /// Lookup goes from the most specific row to the least: reactive rows (for
    /// a Reactive model), then rows keyed by facing, then rows for the whole
    /// round. Without a matching row the opponent is assumed uniform.
    pub fn distribution(&self, ctx: &DecisionContext, legal: &[Action]) -> ActionDist {
        if self.mode == ModelMode::Uniform {
            return ActionDist::uniform(legal);
        }
        let mut candidates = Vec::with_capacity(4);
        if self.mode == ModelMode::Reactive {
            candidates.push(RowKey::reactive_row(ctx.tier, ctx.round, ctx.facing, ctx.my_last));
            candidates.push(RowKey {
                facing: None,
                ..RowKey::reactive_row(ctx.tier, ctx.round, ctx.facing, ctx.my_last)
            });
        }
        candidates.push(RowKey::static_row(ctx.tier, ctx.round, ctx.facing));
        candidates.push(RowKey {
            facing: None,
            ..RowKey::static_row(ctx.tier, ctx.round, ctx.facing)
        });
        candidates
            .iter()
            .find_map(|k| self.rows.get(k))
            .map(|d| d.resolve_to(legal))
            .unwrap_or_else(|| ActionDist::uniform(legal))
    }

    pub fn probability(&self, action: Action, ctx: &DecisionContext, legal: &[Action]) -> f64 {
        self.distribution(ctx, legal).get(action)
    }

    /// True when every row is a distribution (sums to 1 within 1e-9).
    pub fn rows_normalized(&self) -> bool {
        self.rows.values().all(|d| (d.total() - 1.0).abs() <= 1e-9)
    }
}

/// One opponent action observed in the current game, with its context.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedAction {
    pub action: Action,
    pub round: u8,
    pub public: Option<Rank>,
    pub facing: bool,
    pub my_last: Option<Action>,
    pub legal: Vec<Action>,
}

impl ObservedAction {
    pub fn context(&self, opponent_rank: Rank) -> DecisionContext {
        DecisionContext {
            tier: HandStrength::of(opponent_rank, self.public),
            round: self.round,
            facing: self.facing,
            my_last: self.my_last,
        }
    }
}

/// The opponent's actions so far, reconstructed from `obs`'s public sequence.
pub fn observed_opponent_actions(obs: &Observation) -> Vec<ObservedAction> {
    let me = obs.player;
    let events = &obs.betting_sequence_public;
    let contexts = replay_contexts(LeducConfig::default(), events);
    events
        .iter()
        .zip(contexts)
        .enumerate()
        .filter(|(_, (e, _))| e.seat != me)
        .map(|(i, (e, before))| ObservedAction {
            action: e.action,
            round: e.round,
            public: if e.round == 2 { obs.public_card } else { None },
            facing: before.facing_bet(),
            my_last: crate::game::last_action_of(&events[..i], me),
            legal: before.legal_actions(),
        })
        .collect()
}

/// Posterior plus a flag set when every likelihood was zero and the prior was kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub belief: BeliefDistribution,
    pub degenerate: bool,
}

/// Bayes update of `prior` on the observed opponent actions under `model`.
pub fn posterior(prior: &BeliefDistribution, model: &OpponentModel, observed: &[ObservedAction]) -> Posterior {
    let weights = Rank::ALL.map(|c| {
        observed.iter().fold(prior.get(c), |w, o| {
            w * model.probability(o.action, &o.context(c), &o.legal)
        })
    });
    match BeliefDistribution::from_weights(weights) {
        Some(belief) => Posterior {
            belief,
            degenerate: false,
        },
        None => {
            log::warn!("all opponent-card likelihoods are zero; keeping the prior");
            Posterior {
                belief: *prior,
                degenerate: true,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeRates {
    pub win: f64,
    pub lose: f64,
    pub draw: f64,
}

impl OutcomeRates {
    pub fn is_valid(&self) -> bool {
        let ok = |x: f64| (0.0..=1.0 + 1e-12).contains(&x);
        ok(self.win) && ok(self.lose) && ok(self.draw) && (self.win + self.lose + self.draw - 1.0).abs() <= 1e-9
    }
}

/// The decision point being planned, reconstructed from an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanView {
    pub me: Seat,
    pub own: Rank,
    pub public: Option<Rank>,
    pub betting: Betting,
    pub history: Vec<BetEvent>,
}

impl PlanView {
    pub fn from_observation(obs: &Observation) -> PlanView {
        let mut betting = Betting::new(LeducConfig::default());
        for e in &obs.betting_sequence_public {
            betting.apply(e.action);
        }
        PlanView {
            me: obs.player,
            own: obs.private_card,
            public: obs.public_card,
            betting,
            history: obs.betting_sequence_public.clone(),
        }
    }

    pub fn legal_actions(&self) -> Vec<Action> {
        self.betting.legal_actions()
    }

    pub fn my_contribution(&self) -> u32 {
        self.betting.contributions[self.me]
    }
}

/// My own moves after the planned action: check when possible, else call.
pub fn continuation(legal: &[Action]) -> Action {
    if legal.contains(&Action::Check) {
        Action::Check
    } else {
        Action::Call
    }
}

/// Win/lose/draw probabilities of playing `my_action` now and then following
/// [`continuation`], with the opponent acting according to `model`.
pub fn outcome_rates(
    view: &PlanView,
    belief: &BeliefDistribution,
    model: &OpponentModel,
    my_action: Action,
) -> OutcomeRates {
    let mut acc = OutcomeRates::default();
    if my_action == Action::Fold {
        acc.lose = 1.0;
        return acc;
    }
    for opp in Rank::ALL {
        let w = belief.get(opp);
        if w == 0.0 {
            continue;
        }
        let mut betting = view.betting.clone();
        let outcome = betting.apply(my_action);
        let walker = Walker { view, model, opp };
        walker.after(betting, outcome, view.public, Some(my_action), w, &mut acc);
    }
    acc
}

struct Walker<'a> {
    view: &'a PlanView,
    model: &'a OpponentModel,
    opp: Rank,
}

impl Walker<'_> {
    fn after(
        &self,
        betting: Betting,
        outcome: BetOutcome,
        public: Option<Rank>,
        my_last: Option<Action>,
        w: f64,
        acc: &mut OutcomeRates,
    ) {
        match outcome {
            BetOutcome::Folded(seat) if seat == self.view.me => acc.lose += w,
            BetOutcome::Folded(_) => acc.win += w,
            BetOutcome::RoundClosed if betting.finished => {
                let public = public.expect("showdown happens in round two");
                let mut holes = [self.opp; 2];
                holes[self.view.me] = self.view.own;
                match showdown(holes, public) {
                    Winner::Draw => acc.draw += w,
                    Winner::Seat(s) if s == self.view.me => acc.win += w,
                    Winner::Seat(_) => acc.lose += w,
                }
            }
            BetOutcome::RoundClosed => {
                let removed = [self.view.own, self.opp];
                for p in Rank::ALL {
                    let pw = remaining(p, &removed) / 4.0;
                    if pw > 0.0 {
                        self.node(betting.clone(), Some(p), my_last, w * pw, acc);
                    }
                }
            }
            BetOutcome::Continue => self.node(betting, public, my_last, w, acc),
        }
    }

    fn node(&self, betting: Betting, public: Option<Rank>, my_last: Option<Action>, w: f64, acc: &mut OutcomeRates) {
        let legal = betting.legal_actions();
        if betting.to_act == self.view.me {
            let action = continuation(&legal);
            let mut next = betting;
            let outcome = next.apply(action);
            self.after(next, outcome, public, Some(action), w, acc);
            return;
        }
        let ctx = DecisionContext {
            tier: HandStrength::of(self.opp, public),
            round: betting.round,
            facing: betting.facing_bet(),
            my_last,
        };
        for (action, p) in self.model.distribution(&ctx, &legal).support() {
            let mut next = betting.clone();
            let outcome = next.apply(action);
            self.after(next, outcome, public, my_last, w * p, acc);
        }
    }
}

/// Win payoff and lose payoff of a plan, in the half-pot convention: both equal
/// half of the pot once my action is in. Folding wins nothing and loses what I
/// have already put in.
pub fn plan_payoffs(view: &PlanView, my_action: Action) -> (f64, f64) {
    if my_action == Action::Fold {
        return (0.0, view.my_contribution() as f64);
    }
    let mut after = view.betting.clone();
    after.apply(my_action);
    let pot: u32 = after.contributions.iter().sum();
    let half = pot as f64 / 2.0;
    (half, half)
}

pub fn expected_gain(rates: &OutcomeRates, win_payoff: f64, lose_payoff: f64) -> f64 {
    rates.win * win_payoff - rates.lose * lose_payoff
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCandidate {
    pub action: Action,
    pub rates: OutcomeRates,
    pub win_payoff: f64,
    pub lose_payoff: f64,
    pub expected_gain: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
}

impl PlanCandidate {
    pub fn new(action: Action, rates: OutcomeRates, win_payoff: f64, lose_payoff: f64) -> PlanCandidate {
        PlanCandidate {
            action,
            rates,
            win_payoff,
            lose_payoff,
            expected_gain: expected_gain(&rates, win_payoff, lose_payoff),
            rationale: String::new(),
        }
    }

    /// Evaluates `action` at `view` with the given belief and model.
    pub fn evaluate(view: &PlanView, belief: &BeliefDistribution, model: &OpponentModel, action: Action) -> PlanCandidate {
        let rates = outcome_rates(view, belief, model, action);
        let (win, lose) = plan_payoffs(view, action);
        PlanCandidate::new(action, rates, win, lose)
    }
}

/// Tie-break priority, best first.
const PRIORITY: [Action; 4] = [Action::Check, Action::Call, Action::Raise, Action::Fold];

fn priority(a: Action) -> usize {
    PRIORITY.iter().position(|&p| p == a).expect("all actions ranked")
}

/// Picks the plan with the highest expected gain, using a (action, gain) view.
pub fn best_action(gains: &[(Action, f64)]) -> Result<Action, BeliefError> {
    gains
        .iter()
        .copied()
        .reduce(|best, cand| {
            if cand.1 > best.1 || (cand.1 == best.1 && priority(cand.0) < priority(best.0)) {
                cand
            } else {
                best
            }
        })
        .map(|(a, _)| a)
        .ok_or(BeliefError::NoCandidates)
}

pub fn best_plan(candidates: &[PlanCandidate]) -> Result<Action, BeliefError> {
    let gains: Vec<_> = candidates.iter().map(|c| (c.action, c.expected_gain)).collect();
    best_action(&gains)
}
