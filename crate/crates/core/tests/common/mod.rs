#![allow(dead_code)]

use leduc_tom::belief::{BeliefDistribution, DecisionContext, ModelMode, OpponentModel, RowKey};
use leduc_tom::dist::ActionDist;
use leduc_tom::game::{deck, Action, Card, Deal, GameState, LeducConfig, Observation, Rank};
use leduc_tom::opponents::HandStrength;
use rand::seq::IndexedRandom;
use rand::Rng;

/// Win, lose and draw probabilities by brute force over concrete cards,
/// playing full games with the engine.
pub fn naive_outcome_rates(
    obs: &Observation,
    belief: &BeliefDistribution,
    model: &OpponentModel,
    my_action: Action,
) -> [f64; 3] {
    let me = obs.player;
    let mut acc = [0.0; 3];
    let mine = Card::new(obs.private_card, 0);
    let mut rest: Vec<Card> = deck().into_iter().filter(|&c| c != mine).collect();
    let known_public = obs.public_card.map(|p| {
        let i = rest.iter().position(|c| c.rank == p).expect("a copy of the public rank is left");
        rest.remove(i)
    });
    for opp_rank in Rank::ALL {
        let w = belief.get(opp_rank);
        if w == 0.0 {
            continue;
        }
        let opp_cards: Vec<Card> = rest.iter().copied().filter(|c| c.rank == opp_rank).collect();
        let mut deals = Vec::new();
        for &opp in &opp_cards {
            match known_public {
                Some(public) => deals.push((opp, public)),
                None => {
                    for &public in rest.iter().filter(|&&c| c != opp) {
                        deals.push((opp, public));
                    }
                }
            }
        }
        let each = w / deals.len() as f64;
        for (opp, public) in deals {
            let mut holes = [opp; 2];
            holes[me] = mine;
            let mut state = GameState::with_deal(Deal { holes, public }, LeducConfig::default());
            for e in &obs.betting_sequence_public {
                state = state.apply(e.action).unwrap();
            }
            let state = state.apply(my_action).unwrap();
            simulate(&state, me, model, each, &mut acc);
        }
    }
    acc
}

fn simulate(state: &GameState, me: usize, model: &OpponentModel, w: f64, acc: &mut [f64; 3]) {
    if state.is_terminal() {
        let p = state.payoff().unwrap()[me];
        let slot = if p > 0 { 0 } else if p < 0 { 1 } else { 2 };
        acc[slot] += w;
        return;
    }
    let seat = state.to_act();
    let obs = state.observe(seat).unwrap();
    if seat == me {
        let a = if obs.is_legal(Action::Check) { Action::Check } else { Action::Call };
        simulate(&state.apply(a).unwrap(), me, model, w, acc);
        return;
    }
    let ctx = DecisionContext {
        tier: HandStrength::of(obs.private_card, obs.public_card),
        round: obs.round,
        facing: obs.facing_bet(),
        my_last: obs.opponent_last_action(),
    };
    let dist = model.distribution(&ctx, &obs.legal_actions);
    for a in Action::ALL {
        let p = dist.get(a);
        if p > 0.0 {
            simulate(&state.apply(a).unwrap(), me, model, w * p, acc);
        }
    }
}

pub fn random_dist<R: Rng>(rng: &mut R) -> ActionDist {
    let mut p = [0.0; 4];
    for x in &mut p {
        if rng.random_bool(0.75) {
            *x = rng.random::<f64>();
        }
    }
    if p.iter().sum::<f64>() == 0.0 {
        p[rng.random_range(0..4)] = 1.0;
    }
    let t: f64 = p.iter().sum();
    ActionDist(p.map(|x| x / t))
}

pub fn random_model<R: Rng>(rng: &mut R) -> OpponentModel {
    let mode = *[ModelMode::Uniform, ModelMode::Static, ModelMode::Reactive].choose(rng).unwrap();
    let mut model = OpponentModel::new(mode);
    let lasts = [None, Some(Action::Call), Some(Action::Raise), Some(Action::Check), Some(Action::Fold)];
    for tier in HandStrength::ALL {
        for round in [1, 2] {
            for facing in [None, Some(false), Some(true)] {
                if rng.random_bool(0.5) {
                    model = model.with_row(RowKey { tier, round, facing, my_last: None }, random_dist(rng));
                }
                for &last in &lasts {
                    if rng.random_bool(0.3) {
                        model = model.with_row(RowKey { tier, round, facing, my_last: Some(last) }, random_dist(rng));
                    }
                }
            }
        }
    }
    model
}

/// Belief with random weights on the ranks the opponent can still hold.
pub fn random_belief<R: Rng>(rng: &mut R, own: Rank, public: Option<Rank>) -> BeliefDistribution {
    let mut w = [0.0; 3];
    for r in Rank::ALL {
        let used = usize::from(r == own) + usize::from(public == Some(r));
        if used < 2 && rng.random_bool(0.8) {
            w[r.index()] = rng.random::<f64>() + 1e-3;
        }
    }
    if w.iter().sum::<f64>() == 0.0 {
        return leduc_tom::belief::card_prior(own, public);
    }
    BeliefDistribution::from_weights(w).unwrap()
}

/// A random non-terminal state, reached by random legal play.
pub fn random_state<R: Rng>(rng: &mut R) -> GameState {
    loop {
        let mut s = GameState::new(rng.random(), LeducConfig::default());
        let steps = rng.random_range(0..6);
        for _ in 0..steps {
            if s.is_terminal() {
                break;
            }
            let legal = s.legal_actions().unwrap();
            s = s.apply(*legal.choose(rng).unwrap()).unwrap();
        }
        if !s.is_terminal() {
            return s;
        }
    }
}
