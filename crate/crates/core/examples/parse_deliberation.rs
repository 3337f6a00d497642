//! Parses a free-text deliberation (a file, or a built-in sample) into its
//! sections, belief, per-plan gains and selected action.
//!
//!     cargo run --example parse_deliberation -- answer.txt call,raise,fold

use leduc_tom::belief::best_action;
use leduc_tom::game::Action;
use leduc_tom::llm::parse::split_sections;
use leduc_tom::llm::{parse_behavior_pattern, parse_deliberation};

const SAMPLE: &str = "\
Opponent's Pattern: When the opponent holds a King, he tends to raise (70%) or call (30%). \
When he holds a Jack, he tends to fold (60%) or call (40%).
Belief on the opponent's cards: He might hold a King (60%), a Queen (30%) or a Jack (10%).
Reasonable Plans: Plan 1: Call. Plan 2: Raise. Plan 3: Fold.
Estimate Expected Chips Gain for Each Plan: Plan 1: Call = -2.5 chips. Plan 2: Raise = -4.0 chips. Plan 3: Fold = -2.0 chips.
Plan Selection: Plan 3 (Fold).";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_owned(),
    };
    let legal: Vec<Action> = match args.next() {
        Some(list) => list.split(',').map(|t| Action::parse(t).ok_or(format!("unknown action {t:?}"))).collect::<Result<_, _>>()?,
        None => vec![Action::Call, Action::Raise, Action::Fold],
    };

    let sections = split_sections(&text);
    println!("sections: {:?}", sections.keys().collect::<Vec<_>>());
    if let Some(pattern) = sections.get("Pattern") {
        match parse_behavior_pattern(pattern) {
            Ok(model) => println!("opponent model: {} rows ({:?})", model.rows.len(), model.mode),
            Err(e) => println!("opponent model unreadable: {e}"),
        }
    }

    let parsed = parse_deliberation(&text, &legal)?;
    if let Some(b) = parsed.belief {
        let note = if parsed.belief_renormalized { " (renormalized)" } else { "" };
        println!("belief: {b}{note}");
    }
    for (action, gain) in &parsed.gains {
        println!("  {:<5} {gain:+}", action.to_string());
    }
    println!("selected: {}", parsed.selection);
    println!("highest stated gain: {}", best_action(&parsed.gains)?);
    Ok(())
}
