//! Walks the exact belief pipeline for one decision: card prior, Bayes update
//! on the opponent's actions, outcome rates and expected gain per plan.
//!
//!     cargo run --example belief_math

use leduc_tom::belief::{
    best_plan, card_prior, observed_opponent_actions, posterior, ModelMode, OpponentModel, PlanCandidate, PlanView,
    RowKey,
};
use leduc_tom::dist::ActionDist;
use leduc_tom::game::{Action, GameState, LeducConfig};
use leduc_tom::opponents::HandStrength;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Seat 0 raises, seat 1 re-raises: what should seat 0 make of that?
    let state = GameState::new(3, LeducConfig::default())
        .apply(Action::Raise)?
        .apply(Action::Raise)?;
    let obs = state.observe(0)?;
    println!("I hold {}, legal {:?}", obs.private_card, obs.legal_actions);

    // An opponent who re-raises with strong hands and rarely with weak ones.
    let facing = |raise: f64| ActionDist::from_pairs(&[(Action::Raise, raise), (Action::Call, 1.0 - raise)]);
    let model = OpponentModel::new(ModelMode::Static)
        .with_row(RowKey::static_row(HandStrength::Strong, 1, true), facing(0.8))
        .with_row(RowKey::static_row(HandStrength::Mid, 1, true), facing(0.3))
        .with_row(RowKey::static_row(HandStrength::Weak, 1, true), facing(0.05));

    let prior = card_prior(obs.private_card, obs.public_card);
    let observed = observed_opponent_actions(&obs);
    let post = posterior(&prior, &model, &observed);
    println!("prior     {prior}");
    println!("posterior {}", post.belief);

    let view = PlanView::from_observation(&obs);
    let plans: Vec<PlanCandidate> = obs
        .legal_actions
        .iter()
        .map(|&a| PlanCandidate::evaluate(&view, &post.belief, &model, a))
        .collect();
    for p in &plans {
        println!(
            "{:<5} win {:.3} lose {:.3} draw {:.3}  +{} / -{}  gain {:+.3}",
            p.action.to_string(),
            p.rates.win,
            p.rates.lose,
            p.rates.draw,
            p.win_payoff,
            p.lose_payoff,
            p.expected_gain
        );
    }
    println!("best plan: {}", best_plan(&plans)?);
    Ok(())
}
