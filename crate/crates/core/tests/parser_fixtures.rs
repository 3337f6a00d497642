use leduc_tom::belief::{best_action, RowKey};
use leduc_tom::game::{Action, Rank};
use leduc_tom::llm::parse::{parse_belief, split_sections};
use leduc_tom::llm::{parse_behavior_pattern, parse_deliberation};
use leduc_tom::opponents::HandStrength;

const FIRST: &str = include_str!("fixtures/first_order_sample.txt");
const SECOND: &str = include_str!("fixtures/second_order_sample.txt");

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn first_order_sample_parses() {
    let p = parse_deliberation(FIRST, &[Action::Call, Action::Raise, Action::Fold]).unwrap();
    assert_eq!(p.gains, vec![(Action::Call, -9.4), (Action::Raise, -15.6), (Action::Fold, -8.0)]);
    assert_eq!(p.selection, Action::Fold);
    assert_eq!(best_action(&p.gains), Ok(Action::Fold));

    let belief = p.belief.expect("belief section");
    assert!(close(belief.get(Rank::King), 0.8));
    assert!(close(belief.get(Rank::Queen), 0.2));
    assert!(!p.belief_renormalized);
    for name in ["Pattern", "Belief", "Plans", "Rates", "Expected Gain", "Plan Selection"] {
        assert!(p.sections.contains_key(name), "missing {name}");
    }
}

#[test]
fn first_order_pattern_gives_static_rows() {
    let sections = split_sections(FIRST);
    let model = parse_behavior_pattern(&sections["Pattern"]).unwrap();
    let row = model.rows[&RowKey { tier: HandStrength::Strong, round: 1, facing: None, my_last: None }];
    assert!(close(row.get(Action::Raise), 0.7));
    assert!(close(row.get(Action::Call), 0.3));
    assert!(model.rows_normalized());
}

#[test]
fn second_order_sample_parses() {
    let p = parse_deliberation(SECOND, &[Action::Raise, Action::Fold, Action::Check]).unwrap();
    assert_eq!(p.gains, vec![(Action::Raise, 0.36), (Action::Fold, 0.0), (Action::Check, -1.44)]);
    assert_eq!(p.selection, Action::Raise);
    let belief = p.belief.expect("belief section");
    assert!(close(belief.get(Rank::Jack), 0.7));
    assert!(close(belief.get(Rank::Queen), 0.2));
    assert!(close(belief.get(Rank::King), 0.1));
    assert!(p.sections.contains_key("Guess"));
    assert!(p.sections.contains_key("Belief On Me"));
}

#[test]
fn second_order_pattern_has_reactive_rows() {
    let sections = split_sections(SECOND);
    let model = parse_behavior_pattern(&sections["Pattern"]).unwrap();
    assert!(model.rows.keys().any(|k| k.my_last.is_some()));
    assert!(model.rows_normalized());
}

#[test]
fn belief_ignores_sentences_without_percentages() {
    let (b, renorm) = parse_belief("He might hold a King. I think a King (60%) or a Queen (30%).").unwrap();
    assert!(renorm);
    assert!(close(b.get(Rank::King), 2.0 / 3.0));
}
