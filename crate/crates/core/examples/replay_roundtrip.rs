//! Writes a match to JSONL, reads it back, and renders the last game. The
//! agent plays without hindsight, so the opponent's card stays hidden.
//!
//!     cargo run --example replay_roundtrip

use std::sync::Arc;

use leduc_tom::agent::{DeliberationAgent, PolicyAgent, ToMOrder};
use leduc_tom::game::LeducConfig;
use leduc_tom::harness::{read_replays, run_variable_seeds, write_replays};
use leduc_tom::opponents::Archetype;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut me = DeliberationAgent::oracle(ToMOrder::First, false);
    let mut them = PolicyAgent::new(Arc::new(Archetype::AggressiveRaiser));
    let out = run_variable_seeds(&mut me, &mut them, 20, 5, LeducConfig::default())?;

    let dir = std::env::temp_dir().join("leduc-replay-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("replays.jsonl");
    write_replays(&out.records, &path, false)?;
    let back = read_replays(&path)?;
    println!("{} records written to {}, read back identical: {}", back.len(), path.display(), back == out.records);

    let game = &back[back.len() - 1];
    println!("game {} seed {} payoffs {:?}", game.game_id, game.seed, game.payoffs);
    for seat in 0..2 {
        let hole = |r: Option<_>| r.map_or("hidden".to_owned(), |r: leduc_tom::game::Rank| r.to_string());
        println!("  {} holds {}", game.seats.get(seat), hole(game.deal.hole(seat)));
    }
    for step in &game.steps {
        let why = step.deliberation.as_ref().map(|d| {
            let gains: Vec<String> = d.plans.iter().map(|p| format!("{} {:+.2}", p.action, p.expected_gain)).collect();
            format!("  belief [{}] plans [{}]", d.belief, gains.join(", "))
        });
        println!("  seat {} round {}: {}{}", step.seat, step.round, step.action, why.unwrap_or_default());
    }
    Ok(())
}
