//! Plays one hand between two scripted opponents with the bare engine and
//! prints every decision point.
//!
//!     cargo run --example play_game -- 42

use leduc_tom::game::{GameState, LeducConfig};
use leduc_tom::opponents::{Archetype, Policy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let players = [Archetype::PolarBluffer, Archetype::ConservativeFolder];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::new(seed, LeducConfig::default());

    for seat in 0..2 {
        println!("seat {seat} ({}) holds {}", players[seat], state.hole(seat).rank);
    }
    while !state.is_terminal() {
        let seat = state.to_act();
        let obs = state.observe(seat)?;
        let action = players[seat].act(&obs, &mut rng);
        let board = obs.public_card.map_or("-".to_owned(), |r| r.to_string());
        println!(
            "round {} board {board:<5} pot {:?}  seat {seat} legal {:?} -> {action}",
            obs.round, obs.pot_contribution, obs.legal_actions
        );
        state = state.apply(action)?;
    }
    println!("board card was {}", state.deal().public.rank);
    println!("payoffs {:?}", state.payoff()?);
    Ok(())
}
