mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use common::{random_model, random_state};
use leduc_tom::agent::{
    end_game_update, run_turn, Agent, AnalysisBundle, DeliberationAgent, LlmSettings, Pipeline, PolicyAgent, Reasoner,
    ToMOrder,
};
use leduc_tom::belief::{best_plan, BeliefDistribution, ModelMode, OpponentModel};
use leduc_tom::game::{Action, GameState, LeducConfig};
use leduc_tom::harness::run_variable_seeds;
use leduc_tom::llm::fixture::FnBackend;
use leduc_tom::llm::parse::ParsedDeliberation;
use leduc_tom::llm::{render_canonical, CompletionRequest, LlmError};
use leduc_tom::opponents::Archetype;
use leduc_tom::record::{GameRecord, MatchDataset, Seats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bundle_with(model: OpponentModel) -> AnalysisBundle {
    AnalysisBundle {
        behavior_pattern: model,
        ..AnalysisBundle::empty()
    }
}

#[test]
fn oracle_turns_are_always_legal_and_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pipeline = Pipeline::new(Reasoner::Oracle);
    for i in 0..100_000 {
        let state = random_state(&mut rng);
        let obs = state.observe(state.to_act()).unwrap();
        let order = ToMOrder::ALL[i % 3];
        let bundle = bundle_with(random_model(&mut rng));
        let d = run_turn(&pipeline, order, &bundle, &obs).unwrap();
        assert!(obs.is_legal(d.chosen), "{obs:?} -> {}", d.chosen);
        assert_eq!(Ok(d.chosen), best_plan(&d.plans));
        assert_eq!(d.plans.len(), obs.legal_actions.len());
        assert!(d.belief.is_normalized());
        assert!(!d.fallback_used);
    }
}

fn valid_actions(prompt: &str) -> Vec<Action> {
    let line = prompt
        .lines()
        .find_map(|l| l.strip_prefix("You may take exactly one of these actions: "))
        .expect("plan prompts list the legal actions");
    line.split(", ").map(|t| Action::parse(t).unwrap()).collect()
}

fn llm(reply: impl Fn(&CompletionRequest) -> Result<String, LlmError> + Send + Sync + 'static) -> Reasoner {
    Reasoner::Llm(LlmSettings::new(Arc::new(FnBackend::new("scripted", reply)), "test-model"))
}

/// Answers every planning prompt by picking the last legal action.
fn scripted(req: &CompletionRequest) -> Result<String, LlmError> {
    if req.request_id.starts_with("observation") {
        return Ok("You hold a card.".into());
    }
    if req.request_id.starts_with("analysis") {
        return Ok("Opponent's Pattern: When the opponent holds a King, he tends to raise (70%) or call (30%).\n\
                   The opponent's guess on my game pattern: unclear.\nReflexion: keep going."
            .into());
    }
    let legal = valid_actions(&req.prompt);
    let gains: Vec<_> = legal.iter().enumerate().map(|(i, &a)| (a, i as f64)).collect();
    Ok(render_canonical(&ParsedDeliberation {
        sections: Default::default(),
        belief: Some(BeliefDistribution::new([0.5, 0.25, 0.25])),
        belief_renormalized: false,
        gains,
        selection: *legal.last().unwrap(),
    }))
}

#[test]
fn model_selection_is_used_and_audited() {
    let pipeline = Pipeline::new(llm(scripted));
    let obs = GameState::new(1, LeducConfig::default()).observe(0).unwrap();
    let d = run_turn(&pipeline, ToMOrder::First, &AnalysisBundle::empty(), &obs).unwrap();
    assert_eq!(d.chosen, *obs.legal_actions.last().unwrap());
    assert!(!d.fallback_used);
    assert!(d.oracle_choice.is_some());
    assert_eq!(d.raw_prompts.len(), 2);
    assert_eq!(d.raw_completions.len(), 2);
    assert_eq!(d.belief, BeliefDistribution::new([0.5, 0.25, 0.25]));
    assert_eq!(d.plans.len(), obs.legal_actions.len());
}

#[test]
fn unreadable_answers_fall_back_to_a_passive_action() {
    let calls = Arc::new(AtomicUsize::new(0));
    let seen = calls.clone();
    let pipeline = Pipeline::new(llm(move |req| {
        if req.request_id.starts_with("plan") {
            seen.fetch_add(1, Ordering::SeqCst);
        }
        Ok("I would rather not say.".into())
    }));
    let mut s = GameState::new(2, LeducConfig::default());
    let obs = s.observe(0).unwrap();
    let d = run_turn(&pipeline, ToMOrder::Zero, &AnalysisBundle::empty(), &obs).unwrap();
    assert!(d.fallback_used);
    assert_eq!(d.chosen, Action::Call);
    assert_eq!(calls.load(Ordering::SeqCst), 3);
    assert_eq!(d.diagnostics.len(), 3);

    s = s.apply(Action::Call).unwrap();
    let d = run_turn(&pipeline, ToMOrder::Zero, &AnalysisBundle::empty(), &s.observe(1).unwrap()).unwrap();
    assert!(d.fallback_used);
    assert_eq!(d.chosen, Action::Check);
}

#[test]
fn backend_errors_fall_back_too() {
    let pipeline = Pipeline::new(llm(|_| {
        Err(LlmError::Provider {
            status: 400,
            body: "bad request".into(),
        })
    }));
    let obs = GameState::new(3, LeducConfig::default()).observe(0).unwrap();
    let d = run_turn(&pipeline, ToMOrder::Second, &AnalysisBundle::empty(), &obs).unwrap();
    assert!(d.fallback_used);
    assert!(obs.is_legal(d.chosen));
    assert!(d.diagnostics.iter().any(|n| n.contains("observation prompt failed")));
}

#[test]
fn unreadable_analysis_degrades_to_order_zero() {
    let mut agent = DeliberationAgent::new(ToMOrder::Second, true, llm(|req| {
        if req.request_id.starts_with("analysis") {
            Ok("no idea".into())
        } else {
            scripted(req)
        }
    }));
    let mut them = PolicyAgent::new(Arc::new(Archetype::AlwaysCaller));
    run_variable_seeds(&mut agent, &mut them, 2, 0, LeducConfig::default()).unwrap();
    assert_eq!(agent.effective_order(), ToMOrder::Zero);
    assert!(!agent.bundle().diagnostics.is_empty());

    let mut agent = DeliberationAgent::new(ToMOrder::First, true, llm(scripted));
    run_variable_seeds(&mut agent, &mut them, 2, 0, LeducConfig::default()).unwrap();
    assert_eq!(agent.effective_order(), ToMOrder::First);
    assert_eq!(agent.bundle().behavior_pattern.mode, ModelMode::Static);
}

#[test]
fn first_game_plays_at_order_zero() {
    let mut agent = DeliberationAgent::oracle(ToMOrder::Second, true);
    agent.begin_game(0, 0).unwrap();
    assert_eq!(agent.effective_order(), ToMOrder::Zero);
}

#[test]
fn unfinished_games_are_rejected() {
    let s = GameState::new(4, LeducConfig::default()).apply(Action::Raise).unwrap().apply(Action::Call).unwrap();
    let s = s.apply(Action::Check).unwrap().apply(Action::Check).unwrap();
    let mut record = GameRecord::from_state(0, 4, Seats::new("a", "b"), &s, vec![None; 4], true).unwrap();
    let mut ds = MatchDataset::new();
    end_game_update(&mut ds, &record, 0, true).unwrap();
    record.steps.pop();
    assert!(end_game_update(&mut ds, &record, 0, true).is_err());
    assert_eq!(ds.len(), 1);
}

#[test]
fn hindsight_controls_what_the_agent_remembers() {
    for hindsight in [false, true] {
        let mut me = DeliberationAgent::oracle(ToMOrder::First, hindsight);
        let mut them = PolicyAgent::new(Arc::new(Archetype::AlwaysCaller));
        let out = run_variable_seeds(&mut me, &mut them, 20, 9, LeducConfig::default()).unwrap();
        for (kept, full) in me.dataset().games().iter().zip(&out.records) {
            assert_eq!(kept.deal.hole(1).is_some(), hindsight);
            assert_eq!(kept.deal.hole(0), full.deal.hole(0));
            assert_eq!(full.deal.hole(1).is_some(), hindsight);
        }
    }
}
