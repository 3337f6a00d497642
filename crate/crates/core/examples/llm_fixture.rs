//! Drives the language-model agent offline: a scripted backend is recorded to
//! a transcript, then the same match is replayed from the fixture with no
//! network access and produces byte-identical replays.
//!
//!     cargo run --example llm_fixture

use std::sync::Arc;

use leduc_tom::agent::{DeliberationAgent, LlmSettings, PolicyAgent, Reasoner, ToMOrder};
use leduc_tom::game::{Action, LeducConfig};
use leduc_tom::harness::{run_variable_seeds, write_replays};
use leduc_tom::llm::fixture::FnBackend;
use leduc_tom::llm::parse::ParsedDeliberation;
use leduc_tom::llm::{render_canonical, CompletionBackend, CompletionRequest, FixtureBackend, LlmError, RecordingBackend};
use leduc_tom::opponents::Archetype;

/// Stands in for a real model: a fixed opponent analysis, and plans that
/// always prefer the most passive legal action.
fn scripted(req: &CompletionRequest) -> Result<String, LlmError> {
    if req.request_id.starts_with("analysis") {
        return Ok("Opponent's Pattern: When the opponent holds a King, he tends to raise (80%) or call (20%). \
                   When he holds a Jack, he tends to fold (70%) or call (30%).\nReflexion: none yet."
            .into());
    }
    if !req.request_id.starts_with("plan") {
        return Ok("Noted.".into());
    }
    let legal: Vec<Action> = req
        .prompt
        .lines()
        .find_map(|l| l.strip_prefix("You may take exactly one of these actions: "))
        .unwrap_or_default()
        .split(", ")
        .filter_map(Action::parse)
        .collect();
    let rank = |a: &Action| [Action::Check, Action::Call, Action::Fold, Action::Raise].iter().position(|b| b == a);
    let pick = *legal.iter().min_by_key(|a| rank(a)).ok_or_else(|| LlmError::Config("no legal actions".into()))?;
    Ok(render_canonical(&ParsedDeliberation {
        sections: Default::default(),
        belief: None,
        belief_renormalized: false,
        gains: legal.iter().map(|&a| (a, if a == pick { 0.5 } else { -0.5 })).collect(),
        selection: pick,
    }))
}

fn play(backend: Arc<dyn CompletionBackend>, out: &std::path::Path) -> Result<i64, Box<dyn std::error::Error>> {
    let settings = LlmSettings::new(backend, "scripted");
    let mut me = DeliberationAgent::new(ToMOrder::First, true, Reasoner::Llm(settings));
    let mut them = PolicyAgent::new(Arc::new(Archetype::ConservativeFolder));
    let result = run_variable_seeds(&mut me, &mut them, 8, 3, LeducConfig::default())?;
    write_replays(&result.records, out, false)?;
    Ok(result.report.totals[0])
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("leduc-llm-fixture-example");
    std::fs::create_dir_all(&dir)?;
    let transcript = dir.join("transcript.jsonl");
    let _ = std::fs::remove_file(&transcript);

    let recorder = Arc::new(RecordingBackend::new(FnBackend::new("scripted", scripted), &transcript)?);
    let live = play(recorder.clone(), &dir.join("live.jsonl"))?;
    println!("live match total {live:+}, {} completions recorded", recorder.records().len());

    let fixture = Arc::new(FixtureBackend::load(&transcript)?);
    let replayed = play(fixture, &dir.join("replayed.jsonl"))?;
    let same = std::fs::read(dir.join("live.jsonl"))? == std::fs::read(dir.join("replayed.jsonl"))?;
    println!("fixture match total {replayed:+}, replays byte-identical: {same}");
    Ok(())
}
