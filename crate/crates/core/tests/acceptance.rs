//! Acceptance suite. Runs each criterion, prints one PASS/FAIL line per
//! criterion and fails if any required criterion fails. Criterion 10 needs a
//! live completion endpoint and runs only when `LEDUC_TOM_ONLINE=1`.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{naive_outcome_rates, random_belief, random_model, random_state};
use leduc_tom::agent::{DeliberationAgent, LlmSettings, PolicyAgent, Reasoner, ToMOrder};
use leduc_tom::belief::{best_action, expected_gain, outcome_rates, OutcomeRates, PlanView};
use leduc_tom::cfr::{self, CfrConfig};
use leduc_tom::game::{deck, other, Action, Deal, GameState, LeducConfig};
use leduc_tom::harness::{run_position_swap, run_variable_seeds, write_replays, MatchOutcome};
use leduc_tom::llm::fixture::FnBackend;
use leduc_tom::llm::parse::{split_sections, ParsedDeliberation};
use leduc_tom::llm::{
    parse_behavior_pattern, parse_deliberation, render_canonical, ChatClient, CompletionBackend, CompletionRequest,
    FixtureBackend, HttpConfig, LlmError, RecordingBackend,
};
use leduc_tom::opponents::Archetype;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn engine_exhaustiveness() -> Check {
    fn walk(s: &GameState, mags: &mut BTreeSet<i32>, cap: &mut u8, n: &mut usize) -> Result<(), String> {
        if s.is_terminal() {
            let p = s.payoff().map_err(|e| e.to_string())?;
            ensure(p[0] + p[1] == 0, format!("not zero-sum: {:?}", s.history()))?;
            if p[0] != 0 {
                mags.insert(p[0].abs());
            }
            *n += 1;
            return Ok(());
        }
        *cap = (*cap).max(s.raises_this_round());
        for a in s.legal_actions().map_err(|e| e.to_string())? {
            walk(&s.apply(a).map_err(|e| e.to_string())?, mags, cap, n)?;
        }
        Ok(())
    }
    let start = Instant::now();
    let (mut mags, mut cap, mut n) = (BTreeSet::new(), 0, 0);
    let cards = deck();
    for h0 in cards {
        for h1 in cards.into_iter().filter(|&c| c != h0) {
            for public in cards.into_iter().filter(|&c| c != h0 && c != h1) {
                let s = GameState::with_deal(Deal { holes: [h0, h1], public }, LeducConfig::default());
                walk(&s, &mut mags, &mut cap, &mut n)?;
            }
        }
    }
    ensure(cap <= 2, format!("raise cap exceeded: {cap}"))?;
    let (lo, hi) = (*mags.first().unwrap(), *mags.last().unwrap());
    ensure(lo == 1 && hi == 14, format!("payoff magnitudes span [{lo}, {hi}]"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{n} terminal histories over 120 deals, |payoff| in [{lo}, {hi}], {:.1?}", start.elapsed()))
}

const FIRST: &str = include_str!("fixtures/first_order_sample.txt");
const SECOND: &str = include_str!("fixtures/second_order_sample.txt");

fn ev_fixtures() -> Check {
    let start = Instant::now();
    let g = |w: f64, l: f64, wp: f64, lp: f64| expected_gain(&OutcomeRates { win: w, lose: l, draw: 1.0 - w - l }, wp, lp);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    ensure(close(g(0.0, 0.94, 10.0, 10.0), -9.4), "call gain != -9.4")?;
    ensure(close(g(0.0, 1.0, 0.0, 8.0), -8.0), "fold gain != -8")?;
    ensure(close(g(0.56, 0.44, 3.0, 3.0), 0.36), "raise gain != 0.36")?;
    ensure(close(g(0.14, 0.86, 2.0, 2.0), -1.44), "check gain != -1.44")?;
    // The printed raise gain (-15.6) does not follow from its own inputs.
    let raise_from_inputs = g(0.0, 0.94, 12.0, 12.0);

    let e1 = parse_deliberation(FIRST, &[Action::Call, Action::Raise, Action::Fold]).map_err(|e| e.to_string())?;
    ensure(e1.gain(Action::Raise) == Some(-15.6), "stated raise gain not read as -15.6")?;
    ensure(best_action(&e1.gains) == Ok(Action::Fold), "stated gains do not select Fold")?;
    let recomputed = [(Action::Call, -9.4), (Action::Raise, raise_from_inputs), (Action::Fold, -8.0)];
    ensure(best_action(&recomputed) == Ok(Action::Fold), "recomputed gains do not select Fold")?;
    let e2 = parse_deliberation(SECOND, &[Action::Raise, Action::Fold, Action::Check]).map_err(|e| e.to_string())?;
    ensure(best_action(&e2.gains) == Ok(Action::Raise), "second-order sample gains do not select Raise")?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "-9.4, -8, 0.36, -1.44 exact; -15.6 read from the sample (its inputs give {raise_from_inputs:.2}); Fold and Raise selected"
    ))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut cases, mut worst) = (0usize, 0.0f64);
    while cases < 10_000 {
        let state = random_state(&mut rng);
        let obs = state.observe(state.to_act()).map_err(|e| e.to_string())?;
        let belief = random_belief(&mut rng, obs.private_card, obs.public_card);
        let model = random_model(&mut rng);
        let view = PlanView::from_observation(&obs);
        for &a in &obs.legal_actions {
            let r = outcome_rates(&view, &belief, &model, a);
            let naive = naive_outcome_rates(&obs, &belief, &model, a);
            for (x, y) in [r.win, r.lose, r.draw].into_iter().zip(naive) {
                worst = worst.max((x - y).abs());
            }
            cases += 1;
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{cases} cases, max deviation {worst:.1e}, {:.1?}", start.elapsed()))
}

fn cfr_quality() -> Check {
    let start = Instant::now();
    let checkpoints = [100, 1_000, 10_000, 100_000];
    let mut values = Vec::new();
    cfr::train_with_checkpoints(100_000, CfrConfig::default(), &checkpoints, |_, p| values.push(cfr::nash_conv(p)))
        .map_err(|e| e.to_string())?;
    ensure(values.windows(2).all(|w| w[1] < w[0]), format!("not strictly decreasing: {values:?}"))?;
    ensure(values[3] < 0.05, format!("NashConv {:.4} at 1e5", values[3]))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(format!("NashConv {} ({:.1?})", shown.join(" > "), start.elapsed()))
}

fn swap_vs(order: ToMOrder, opponent: Archetype, games: usize) -> Result<MatchOutcome, String> {
    let mut me = DeliberationAgent::oracle(order, true);
    let mut them = PolicyAgent::new(Arc::new(opponent));
    run_position_swap(&mut me, &mut them, games, 7, LeducConfig::default()).map_err(|e| e.to_string())
}

fn tom_ordering() -> Check {
    let start = Instant::now();
    let mut totals = Vec::new();
    for order in ToMOrder::ALL {
        totals.push(swap_vs(order, Archetype::ReactiveConservativeFolder, 500)?.report.totals[0]);
    }
    let (zero, first, second) = (totals[0], totals[1], totals[2]);
    let msg = format!("second {second:+} > first {first:+} > zero {zero:+} over 1000 games");
    ensure(second > first && first > zero, format!("ordering violated: {msg}"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("{msg} ({:.1?})", start.elapsed()))
}

fn adaptability() -> Check {
    let start = Instant::now();
    let vs_folder = swap_vs(ToMOrder::Second, Archetype::ConservativeFolder, 500)?.report.action_shares[0].raise;
    let vs_raiser = swap_vs(ToMOrder::Second, Archetype::AggressiveRaiser, 500)?.report.action_shares[0].raise;
    let gap = 100.0 * (vs_folder - vs_raiser);
    let msg = format!(
        "raise share {:.1}% vs conservative_folder, {:.1}% vs aggressive_raiser (gap {gap:.1} pts)",
        100.0 * vs_folder,
        100.0 * vs_raiser
    );
    ensure(gap >= 10.0, msg.clone())?;
    Ok(format!("{msg} ({:.1?})", start.elapsed()))
}

fn protocol_integrity() -> Check {
    let start = Instant::now();
    let mut a = PolicyAgent::new(Arc::new(Archetype::PolarBluffer));
    let mut b = PolicyAgent::new(Arc::new(Archetype::AggressiveRaiser));
    let n = 100;
    let out = run_position_swap(&mut a, &mut b, n, 99, LeducConfig::default()).map_err(|e| e.to_string())?;
    let (leg1, leg2) = out.records.split_at(n);
    for (x, y) in leg1.iter().zip(leg2) {
        ensure(x.deal == y.deal && x.seed == y.seed, format!("game {} differs between legs", x.game_id))?;
        ensure(x.seats.get(0) == y.seats.get(1), "seats not swapped")?;
    }
    let mut c = DeliberationAgent::oracle(ToMOrder::Zero, true);
    let mut d = DeliberationAgent::oracle(ToMOrder::Zero, true);
    let mirror = run_position_swap(&mut c, &mut d, n, 99, LeducConfig::default()).map_err(|e| e.to_string())?;
    ensure(mirror.report.totals == [0, 0], format!("mirror totals {:?}", mirror.report.totals))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{n} paired games card-identical; mirrored policy totals 0 ({:.1?})", start.elapsed()))
}

fn hindsight_plumbing() -> Check {
    let start = Instant::now();
    for hindsight in [false, true] {
        let mut me = DeliberationAgent::oracle(ToMOrder::Second, hindsight);
        let mut them = PolicyAgent::new(Arc::new(Archetype::ConservativeFolder));
        let out = run_variable_seeds(&mut me, &mut them, 100, 500, LeducConfig::default()).map_err(|e| e.to_string())?;
        let me_seat = 0;
        for r in out.records.iter().chain(me.dataset().games()) {
            let shown = r.deal.hole(other(me_seat)).is_some();
            ensure(shown == hindsight, format!("game {}: opponent card shown={shown}, hindsight={hindsight}", r.game_id))?;
        }
        ensure(me.dataset().len() == 100, "dataset incomplete")?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("100 games per mode; opponent card hidden iff hindsight off ({:.1?})", start.elapsed()))
}

fn scripted(req: &CompletionRequest) -> Result<String, LlmError> {
    if !req.request_id.starts_with("plan") {
        return Ok(FIRST.to_owned());
    }
    let legal: Vec<Action> = req
        .prompt
        .lines()
        .find_map(|l| l.strip_prefix("You may take exactly one of these actions: "))
        .unwrap_or("")
        .split(", ")
        .filter_map(Action::parse)
        .collect();
    let pick = legal[req.prompt.len() % legal.len()];
    Ok(render_canonical(&ParsedDeliberation {
        sections: Default::default(),
        belief: None,
        belief_renormalized: false,
        gains: legal.iter().map(|&a| (a, if a == pick { 1.0 } else { -1.0 })).collect(),
        selection: pick,
    }))
}

fn fixture_match(backend: Arc<dyn CompletionBackend>, path: &std::path::Path) -> Result<(), String> {
    let mut me = DeliberationAgent::new(ToMOrder::Second, true, Reasoner::Llm(LlmSettings::new(backend, "fixture")));
    let mut them = PolicyAgent::new(Arc::new(Archetype::ConservativeFolder));
    let out = run_variable_seeds(&mut me, &mut them, 5, 0, LeducConfig::default()).map_err(|e| e.to_string())?;
    write_replays(&out.records, path, false).map_err(|e| e.to_string())
}

fn parser_fixtures() -> Check {
    let e1 = parse_deliberation(FIRST, &[Action::Call, Action::Raise, Action::Fold]).map_err(|e| e.to_string())?;
    ensure(
        e1.gains == [(Action::Call, -9.4), (Action::Raise, -15.6), (Action::Fold, -8.0)] && e1.selection == Action::Fold,
        format!("first-order sample parsed as {:?} / {}", e1.gains, e1.selection),
    )?;
    let e2 = parse_deliberation(SECOND, &[Action::Raise, Action::Fold, Action::Check]).map_err(|e| e.to_string())?;
    let b = e2.belief.ok_or("second-order sample belief missing")?;
    ensure(
        (b.probs[0] - 0.7).abs() < 1e-9 && (b.probs[1] - 0.2).abs() < 1e-9 && (b.probs[2] - 0.1).abs() < 1e-9,
        format!("second-order sample belief {b}"),
    )?;
    ensure(
        e2.gains == [(Action::Raise, 0.36), (Action::Fold, 0.0), (Action::Check, -1.44)] && e2.selection == Action::Raise,
        format!("second-order sample parsed as {:?} / {}", e2.gains, e2.selection),
    )?;
    let pattern = parse_behavior_pattern(&split_sections(FIRST)["Pattern"]).map_err(|e| e.to_string())?;
    ensure(pattern.rows.len() >= 6, "first-order sample pattern rows missing")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let transcript = dir.path().join("t.jsonl");
    let rec = RecordingBackend::new(FnBackend::new("scripted", scripted), &transcript).map_err(|e| e.to_string())?;
    fixture_match(Arc::new(rec), &dir.path().join("live.jsonl"))?;
    let fixture: Arc<dyn CompletionBackend> = Arc::new(FixtureBackend::load(&transcript).map_err(|e| e.to_string())?);
    fixture_match(fixture.clone(), &dir.path().join("a.jsonl"))?;
    fixture_match(fixture, &dir.path().join("b.jsonl"))?;
    let read = |n: &str| std::fs::read(dir.path().join(n)).map_err(|e| e.to_string());
    let live = read("live.jsonl")?;
    ensure(live == read("a.jsonl")? && live == read("b.jsonl")?, "fixture replay differs")?;
    Ok(format!("both deliberation samples parse as expected; fixture replay of a 5-game match is byte-identical ({} bytes)", live.len()))
}

fn online_check() -> Option<Check> {
    if std::env::var("LEDUC_TOM_ONLINE").ok().as_deref() != Some("1") {
        return None;
    }
    let run = || -> Check {
        let mut http = HttpConfig::default();
        if let Ok(e) = std::env::var("LEDUC_TOM_ENDPOINT") {
            http.endpoint = e;
        }
        let model = std::env::var("LEDUC_TOM_MODEL").unwrap_or_else(|_| "gpt-4-0613".into());
        let client = ChatClient::from_env(http).map_err(|e| e.to_string())?;
        let settings = LlmSettings::new(Arc::new(client), model);
        let mut me = DeliberationAgent::new(ToMOrder::Second, true, Reasoner::Llm(settings));
        let mut them = PolicyAgent::new(Arc::new(Archetype::ConservativeFolder));
        let out = run_variable_seeds(&mut me, &mut them, 10, 0, LeducConfig::default()).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        write_replays(&out.records, &dir.path().join("online.jsonl"), false).map_err(|e| e.to_string())?;
        let mine: Vec<_> = out.records.iter().flat_map(|r| &r.steps).filter_map(|s| s.deliberation.as_ref()).collect();
        ensure(mine.iter().all(|d| !d.raw_completions.is_empty()), "deliberation without completions")?;
        let fallbacks = mine.iter().filter(|d| d.fallback_used).count();
        Ok(format!("{} decisions, {fallbacks} fallbacks, total {:+}", mine.len(), out.report.totals[0]))
    };
    Some(run())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("engine exhaustiveness", engine_exhaustiveness),
        ("EV fixtures", ev_fixtures),
        ("oracle equivalence", oracle_equivalence),
        ("CFR quality", cfr_quality),
        ("ToM-order ordering", tom_ordering),
        ("adaptability", adaptability),
        ("protocol integrity", protocol_integrity),
        ("hindsight plumbing", hindsight_plumbing),
        ("parser fixtures", parser_fixtures),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    match online_check() {
        None => println!("criterion 10: SKIP  online LLM match (set LEDUC_TOM_ONLINE=1 and an API key to run)"),
        Some(Ok(detail)) => println!("criterion 10: PASS  online LLM match: {detail}"),
        Some(Err(detail)) => println!("criterion 10: FAIL  online LLM match (optional): {detail}"),
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
