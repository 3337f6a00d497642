mod common;

use common::{naive_outcome_rates, random_belief, random_model, random_state};
use leduc_tom::belief::{
    best_plan, card_prior, observed_opponent_actions, outcome_rates, posterior, PlanCandidate, PlanView,
};
use leduc_tom::game::{GameState, LeducConfig, Rank};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn outcome_rates_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = 0;
    while cases < 10_000 {
        let state = random_state(&mut rng);
        let obs = state.observe(state.to_act()).unwrap();
        let belief = random_belief(&mut rng, obs.private_card, obs.public_card);
        let model = random_model(&mut rng);
        let view = PlanView::from_observation(&obs);
        for &a in &obs.legal_actions {
            let fast = outcome_rates(&view, &belief, &model, a);
            let slow = naive_outcome_rates(&obs, &belief, &model, a);
            for (x, y) in [fast.win, fast.lose, fast.draw].into_iter().zip(slow) {
                assert!((x - y).abs() <= 1e-12, "{obs:?} {a}: {fast:?} vs {slow:?}");
            }
            cases += 1;
        }
    }
}

#[test]
fn prior_counts_unseen_cards() {
    let b = card_prior(Rank::Jack, Some(Rank::Jack));
    assert_eq!(b.get(Rank::Jack), 0.0);
    assert_eq!(b.get(Rank::Queen), 0.5);
    let b = card_prior(Rank::King, Some(Rank::Queen));
    assert_eq!([b.get(Rank::Jack), b.get(Rank::Queen), b.get(Rank::King)], [0.5, 0.25, 0.25]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rates_and_posteriors_are_distributions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(&mut rng);
        let obs = state.observe(state.to_act()).unwrap();
        let model = random_model(&mut rng);
        let prior = card_prior(obs.private_card, obs.public_card);
        let post = posterior(&prior, &model, &observed_opponent_actions(&obs));
        prop_assert!(post.belief.is_normalized());
        let view = PlanView::from_observation(&obs);
        let plans: Vec<_> = obs
            .legal_actions
            .iter()
            .map(|&a| {
                let c = PlanCandidate::evaluate(&view, &post.belief, &model, a);
                assert!(c.rates.is_valid(), "{c:?}");
                c
            })
            .collect();
        let best = best_plan(&plans).unwrap();
        let top = plans.iter().map(|c| c.expected_gain).fold(f64::MIN, f64::max);
        prop_assert!(plans.iter().any(|c| c.action == best && c.expected_gain == top));
    }

    #[test]
    fn deals_never_repeat_a_card(seed in any::<u64>()) {
        let s = GameState::new(seed, LeducConfig::default());
        let d = s.deal();
        prop_assert!(d.holes[0] != d.holes[1] && d.public != d.holes[0] && d.public != d.holes[1]);
    }
}
