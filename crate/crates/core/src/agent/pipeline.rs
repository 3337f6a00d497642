//! The per-game and per-turn stages of the deliberating agent.
//!
//! Every stage has an exact implementation computed from the game state and
//! the match history. With a language-model reasoner the same stages are
//! prompted instead; the exact results are still computed and recorded next
//! to the model's answers for auditing.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;

use super::analysis::{describe_model, my_pattern_summary, reflexion_summary, render_history, PatternTables, HISTORY_WINDOW};
use super::{Agent, AgentError, AgentSnapshot, AnalysisBundle, Decision, DeliberationRecord, ObsConversionRule, RuleDescription, ToMOrder};
use crate::belief::{
    best_plan, card_prior, observed_opponent_actions, posterior, BeliefDistribution, ModelMode, OpponentModel, PlanCandidate,
    PlanView,
};
use crate::game::{Action, BetEvent, Observation, Seat};
use crate::llm::parse::{plan_paragraphs, split_sections};
use crate::llm::{
    cache_key, parse_behavior_pattern, parse_deliberation, render_template, CompletionBackend, CompletionRequest, Template,
    TemplateSet,
};
use crate::record::{GameRecord, MatchDataset};

const FORMAT_REMINDER: &str = "\n\nFormat reminder: your previous answer could not be read. Use the labelled sections \
exactly as requested, give every expected gain as a single number after an equals sign, and end with \
\"Plan Selection:\" followed by one of the legal actions.";

const PATTERN_REMINDER: &str = "\n\nFormat reminder: your previous answer could not be read. Under \"Opponent's Pattern:\" \
write one sentence per card such as \"When the opponent holds a King, he tends to raise (70%) or call (30%).\"";

/// How a language model is called.
#[derive(Clone)]
pub struct LlmSettings {
    pub backend: Arc<dyn CompletionBackend>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts after an unreadable answer.
    pub parse_retries: u32,
}

impl LlmSettings {
    pub fn new(backend: Arc<dyn CompletionBackend>, model: impl Into<String>) -> LlmSettings {
        LlmSettings {
            backend,
            model: model.into(),
            temperature: 0.0,
            max_tokens: 1024,
            parse_retries: 2,
        }
    }
}

/// Where the reasoning comes from.
#[derive(Clone)]
pub enum Reasoner {
    Oracle,
    Llm(LlmSettings),
}

impl Reasoner {
    pub fn name(&self) -> String {
        match self {
            Reasoner::Oracle => "oracle".into(),
            Reasoner::Llm(s) => format!("{}:{}", s.backend.name(), s.model),
        }
    }
}

/// Prompts, completions and notes gathered while running a stage.
#[derive(Debug, Default)]
struct Trace {
    prompts: Vec<String>,
    completions: Vec<String>,
    diagnostics: Vec<String>,
}

/// Everything the stages need besides the game itself.
#[derive(Clone)]
pub struct Pipeline {
    pub rules: RuleDescription,
    pub conv: ObsConversionRule,
    pub templates: TemplateSet,
    pub reasoner: Reasoner,
}

impl Pipeline {
    pub fn new(reasoner: Reasoner) -> Pipeline {
        Pipeline {
            rules: RuleDescription::leduc(),
            conv: ObsConversionRule::leduc(),
            templates: TemplateSet::embedded(),
            reasoner,
        }
    }

    fn complete(
        &self,
        template: &Template,
        bindings: &BTreeMap<String, String>,
        attempt: u32,
        suffix: &str,
        trace: &mut Trace,
    ) -> Result<String, AgentError> {
        let Reasoner::Llm(s) = &self.reasoner else {
            unreachable!("only language-model reasoners send prompts");
        };
        let mut prompt = render_template(template, bindings)?;
        if attempt > 0 {
            prompt.push_str(suffix);
        }
        let mut keyed = bindings.clone();
        keyed.insert("__attempt".into(), attempt.to_string());
        let key = cache_key(template.id(), &keyed, &s.model, s.temperature);
        let request = CompletionRequest {
            prompt: prompt.clone(),
            model: s.model.clone(),
            temperature: s.temperature,
            max_tokens: s.max_tokens,
            request_id: format!("{}-{}", template.id(), &key[..12]),
            cache_key: Some(key),
        };
        trace.prompts.push(prompt);
        let response = s.backend.complete(&request)?;
        trace.completions.push(response.text.clone());
        Ok(response.text)
    }

    fn interpret(&self, obs: &Observation, trace: &mut Trace) -> String {
        let exact = interpret_observation(&self.rules, &self.conv, obs);
        if matches!(self.reasoner, Reasoner::Oracle) {
            return exact;
        }
        let bindings = bindings(&[
            ("rule", self.rules.render()),
            ("conversion_rule", self.conv.render()),
            ("observation", serde_json::to_string_pretty(obs).expect("observations serialize")),
        ]);
        match self.complete(&self.templates.observation, &bindings, 0, "", trace) {
            Ok(text) => text,
            Err(e) => {
                trace.diagnostics.push(format!("observation prompt failed ({e}); using the exact description"));
                exact
            }
        }
    }

    /// Runs the analysis stage for the next game.
    pub fn analyze(&self, dataset: &MatchDataset, order: ToMOrder) -> AnalysisBundle {
        let Reasoner::Llm(settings) = &self.reasoner else {
            return analyze_game(&self.rules, dataset, order);
        };
        let mut trace = Trace::default();
        let bindings = bindings(&[
            ("rule", self.rules.render()),
            ("history", render_history(dataset, HISTORY_WINDOW)),
        ]);
        let template = self.templates.analysis(order);
        let mut bundle = AnalysisBundle::empty();
        for attempt in 0..=settings.parse_retries {
            let text = match self.complete(template, &bindings, attempt, PATTERN_REMINDER, &mut trace) {
                Ok(t) => t,
                Err(e) => {
                    trace.diagnostics.push(format!("analysis prompt failed: {e}"));
                    continue;
                }
            };
            let sections = split_sections(&text);
            bundle.reflexion_text = sections.get("Reflexion").cloned().unwrap_or_else(|| text.clone());
            if order == ToMOrder::Zero {
                bundle.diagnostics = trace.diagnostics;
                return bundle;
            }
            let pattern_text = sections.get("Pattern").cloned().unwrap_or_else(|| text.clone());
            match parse_behavior_pattern(&pattern_text) {
                Ok(mut model) => {
                    model.mode = if order == ToMOrder::Second { ModelMode::Reactive } else { ModelMode::Static };
                    bundle.behavior_pattern = model;
                    bundle.pattern_text = pattern_text;
                    if order == ToMOrder::Second {
                        bundle.opponent_belief_on_me = Some(sections.get("Guess").cloned().unwrap_or_default());
                    }
                    bundle.diagnostics = trace.diagnostics;
                    return bundle;
                }
                Err(e) => trace.diagnostics.push(format!("unreadable behaviour pattern: {e}")),
            }
        }
        log::warn!("analysis failed after retries; planning at order zero for this game");
        trace.diagnostics.push("analysis failed after retries; planning at order zero for this game".into());
        bundle.diagnostics = trace.diagnostics;
        bundle
    }
}

fn bindings(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn seq_text(events: &[BetEvent], me: Seat) -> String {
    if events.is_empty() {
        return "none".into();
    }
    events
        .iter()
        .map(|e| {
            let who = if e.seat == me { "you" } else { "opponent" };
            format!("{who} {} (round {})", e.action.name(), e.round)
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn action_list(actions: &[Action]) -> String {
    actions.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ")
}

/// Deterministic plain-text description of an observation.
pub fn interpret_observation(rule: &RuleDescription, conv: &ObsConversionRule, obs: &Observation) -> String {
    debug_assert!(rule.is_complete());
    debug_assert!(conv.uncovered_fields(obs).is_empty());
    let me = obs.player;
    let public = match obs.public_card {
        Some(r) => format!("the public card is a {}", r.word()),
        None => "the public card is not revealed".into(),
    };
    format!(
        "You are player {me} and it is round {}. Your card is a {}; {public}. \
         You have put {} chips in the pot and your opponent has put {}. \
         Actions so far: {}. Your legal actions are: {}.",
        obs.round,
        obs.private_card.word(),
        obs.pot_contribution[me],
        obs.pot_contribution[1 - me],
        seq_text(&obs.betting_sequence_public, me),
        action_list(&obs.legal_actions),
    )
}

/// Exact analysis: smoothed frequency tables of the opponent's play, a
/// reflexion summary and, at second order, how my play looks to the opponent.
pub fn analyze_game(_rule: &RuleDescription, dataset: &MatchDataset, order: ToMOrder) -> AnalysisBundle {
    if dataset.is_empty() {
        return AnalysisBundle::empty();
    }
    let tables = PatternTables::from_dataset(dataset);
    let model = match order {
        ToMOrder::Zero => OpponentModel::uniform(),
        ToMOrder::First => tables.static_model(),
        ToMOrder::Second => tables.reactive_model(),
    };
    AnalysisBundle {
        reflexion_text: reflexion_summary(dataset),
        pattern_text: if order == ToMOrder::Zero { String::new() } else { describe_model(&model) },
        behavior_pattern: model,
        opponent_belief_on_me: (order == ToMOrder::Second).then(|| my_pattern_summary(dataset)),
        diagnostics: Vec::new(),
    }
}

/// The opponent model a given order may use.
fn model_for(bundle: &AnalysisBundle, order: ToMOrder) -> OpponentModel {
    match order {
        ToMOrder::Zero => OpponentModel::uniform(),
        ToMOrder::First if bundle.behavior_pattern.mode == ModelMode::Reactive => OpponentModel {
            mode: ModelMode::Static,
            rows: bundle.behavior_pattern.rows.clone(),
        },
        _ => bundle.behavior_pattern.clone(),
    }
}

/// Belief over the opponent's card: the card-counting prior at order zero,
/// otherwise its Bayes update on the opponent's actions in this game.
pub fn predict_cards(bundle: &AnalysisBundle, obs: &Observation, order: ToMOrder) -> (BeliefDistribution, String) {
    let prior = card_prior(obs.private_card, obs.public_card);
    if order == ToMOrder::Zero {
        return (prior, format!("Counting unseen cards: {prior}."));
    }
    let observed = observed_opponent_actions(obs);
    let model = model_for(bundle, order);
    let post = posterior(&prior, &model, &observed);
    let acts: Vec<_> = observed.iter().map(|o| format!("{} (round {})", o.action.name(), o.round)).collect();
    let mut text = format!("Counting unseen cards: {prior}.");
    if acts.is_empty() {
        text.push_str(" The opponent has not acted yet, so the prior stands.");
    } else {
        text.push_str(&format!(
            " The opponent played {}; under the {} pattern the belief becomes {}.",
            acts.join(", "),
            order,
            post.belief
        ));
    }
    if post.degenerate {
        text.push_str(" (No card explains these actions; keeping the prior.)");
    }
    (post.belief, text)
}

/// One candidate per legal action, scored exactly, and the best of them.
pub fn plan_and_evaluate(
    bundle: &AnalysisBundle,
    belief: &BeliefDistribution,
    obs: &Observation,
    order: ToMOrder,
) -> Result<(Vec<PlanCandidate>, Action), AgentError> {
    if obs.legal_actions.is_empty() {
        return Err(AgentError::NoLegalActions);
    }
    let view = PlanView::from_observation(obs);
    let model = model_for(bundle, order);
    let plans: Vec<PlanCandidate> = obs
        .legal_actions
        .iter()
        .map(|&a| {
            let mut c = PlanCandidate::evaluate(&view, belief, &model, a);
            c.rationale = format!(
                "{}: win {:.1}%, lose {:.1}%, draw {:.1}%; win payoff {}, lose payoff {}; expected gain {:.3}",
                a.name(),
                100.0 * c.rates.win,
                100.0 * c.rates.lose,
                100.0 * c.rates.draw,
                c.win_payoff,
                c.lose_payoff,
                c.expected_gain
            );
            c
        })
        .collect();
    let chosen = best_plan(&plans).map_err(|_| AgentError::NoLegalActions)?;
    Ok((plans, chosen))
}

/// Check when possible, else Call, else Fold.
pub fn fallback_action(legal: &[Action]) -> Action {
    [Action::Check, Action::Call, Action::Fold]
        .into_iter()
        .find(|a| legal.contains(a))
        .unwrap_or(legal[0])
}

/// One decision: interpret, predict, plan, select.
pub fn run_turn(
    pipeline: &Pipeline,
    order: ToMOrder,
    bundle: &AnalysisBundle,
    obs: &Observation,
) -> Result<DeliberationRecord, AgentError> {
    if obs.legal_actions.is_empty() {
        return Err(AgentError::NoLegalActions);
    }
    let mut trace = Trace::default();
    let obs_text = pipeline.interpret(obs, &mut trace);
    let (belief, belief_text) = predict_cards(bundle, obs, order);
    let (plans, chosen) = plan_and_evaluate(bundle, &belief, obs, order)?;

    let Reasoner::Llm(settings) = &pipeline.reasoner else {
        return Ok(DeliberationRecord {
            tom_order: order,
            obs_text,
            belief,
            belief_text,
            plans,
            chosen,
            fallback_used: false,
            oracle_choice: None,
            diagnostics: trace.diagnostics,
            raw_prompts: Vec::new(),
            raw_completions: Vec::new(),
            redacted: false,
        });
    };

    let prior = card_prior(obs.private_card, obs.public_card);
    let bindings = bindings(&[
        ("rule", pipeline.rules.render()),
        ("observation", obs_text.clone()),
        ("history", seq_text(&obs.betting_sequence_public, obs.player)),
        ("pattern", if bundle.pattern_text.is_empty() { "No pattern available.".into() } else { bundle.pattern_text.clone() }),
        ("my_pattern", bundle.opponent_belief_on_me.clone().unwrap_or_else(|| "Unknown.".into())),
        ("reflexion", if bundle.reflexion_text.is_empty() { "None yet.".into() } else { bundle.reflexion_text.clone() }),
        ("valid_actions", action_list(&obs.legal_actions)),
        ("belief", prior.to_string()),
    ]);
    let template = pipeline.templates.plan(order);
    let mut parsed = None;
    for attempt in 0..=settings.parse_retries {
        match pipeline.complete(template, &bindings, attempt, FORMAT_REMINDER, &mut trace) {
            Ok(text) => match parse_deliberation(&text, &obs.legal_actions) {
                Ok(p) => {
                    parsed = Some(p);
                    break;
                }
                Err(e) => trace.diagnostics.push(format!("attempt {}: {e}", attempt + 1)),
            },
            Err(e) => trace.diagnostics.push(format!("attempt {}: {e}", attempt + 1)),
        }
    }

    let Some(p) = parsed else {
        let action = fallback_action(&obs.legal_actions);
        log::warn!("no readable plan after retries; falling back to {action}");
        return Ok(DeliberationRecord {
            tom_order: order,
            obs_text,
            belief,
            belief_text,
            plans,
            chosen: action,
            fallback_used: true,
            oracle_choice: Some(chosen),
            diagnostics: trace.diagnostics,
            raw_prompts: trace.prompts,
            raw_completions: trace.completions,
            redacted: false,
        });
    };

    let stated_belief = p.belief.unwrap_or(belief);
    if p.belief_renormalized {
        trace.diagnostics.push("belief percentages did not total 100; renormalized".into());
    }
    let (audit, oracle_choice) = plan_and_evaluate(bundle, &stated_belief, obs, order)?;
    let paragraphs = p.sections.get("Plans").map(|t| plan_paragraphs(t)).unwrap_or_default();
    let stated: Vec<PlanCandidate> = p
        .gains
        .iter()
        .filter(|(a, _)| obs.legal_actions.contains(a))
        .map(|&(a, g)| {
            let exact = audit.iter().find(|c| c.action == a).expect("one audit plan per legal action");
            let mut rationale = format!("stated gain {g}; exact gain {:.3}", exact.expected_gain);
            if let Some((_, text)) = paragraphs.iter().find(|(b, _)| *b == a).filter(|(_, t)| !t.is_empty()) {
                rationale = format!("{text} ({rationale})");
            }
            PlanCandidate {
                expected_gain: g,
                rationale,
                ..exact.clone()
            }
        })
        .collect();
    if oracle_choice != p.selection {
        let gain = |a: Action| audit.iter().find(|c| c.action == a).map_or(0.0, |c| c.expected_gain);
        trace.diagnostics.push(format!(
            "exact evaluation prefers {oracle_choice} over the selected {} by {:.3} chips",
            p.selection,
            gain(oracle_choice) - gain(p.selection)
        ));
    }
    if best_plan(&stated).ok() != Some(p.selection) {
        trace.diagnostics.push("selection differs from the highest stated gain".into());
    }
    Ok(DeliberationRecord {
        tom_order: order,
        obs_text,
        belief: stated_belief,
        belief_text: p.sections.get("Belief").cloned().unwrap_or(belief_text),
        plans: stated,
        chosen: p.selection,
        fallback_used: false,
        oracle_choice: Some(oracle_choice),
        diagnostics: trace.diagnostics,
        raw_prompts: trace.prompts,
        raw_completions: trace.completions,
        redacted: false,
    })
}

/// Appends a finished game to the dataset, as `seat` may remember it.
pub fn end_game_update(dataset: &mut MatchDataset, record: &GameRecord, seat: Seat, hindsight: bool) -> Result<(), AgentError> {
    if !record.is_terminal() {
        return Err(AgentError::NotTerminal);
    }
    dataset.push(record.perspective(seat, hindsight));
    Ok(())
}

/// The theory-of-mind agent: analyzes the match before each game and
/// deliberates at every decision.
pub struct DeliberationAgent {
    name: String,
    order: ToMOrder,
    hindsight: bool,
    pipeline: Pipeline,
    dataset: MatchDataset,
    bundle: AnalysisBundle,
    effective: ToMOrder,
    seat: Seat,
}

impl DeliberationAgent {
    pub fn new(order: ToMOrder, hindsight: bool, reasoner: Reasoner) -> DeliberationAgent {
        let name = format!("{}({order})", if matches!(reasoner, Reasoner::Oracle) { "oracle" } else { "llm" });
        DeliberationAgent {
            name,
            order,
            hindsight,
            pipeline: Pipeline::new(reasoner),
            dataset: MatchDataset::new(),
            bundle: AnalysisBundle::empty(),
            effective: ToMOrder::Zero,
            seat: 0,
        }
    }

    pub fn oracle(order: ToMOrder, hindsight: bool) -> DeliberationAgent {
        DeliberationAgent::new(order, hindsight, Reasoner::Oracle)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> DeliberationAgent {
        self.name = name.into();
        self
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> DeliberationAgent {
        self.pipeline.templates = templates;
        self
    }

    pub fn order(&self) -> ToMOrder {
        self.order
    }

    /// The order used for the current game: zero without history or when the
    /// analysis could not be read.
    pub fn effective_order(&self) -> ToMOrder {
        self.effective
    }

    pub fn dataset(&self) -> &MatchDataset {
        &self.dataset
    }

    pub fn bundle(&self) -> &AnalysisBundle {
        &self.bundle
    }
}

impl Agent for DeliberationAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_adaptive(&self) -> bool {
        true
    }

    fn hindsight(&self) -> bool {
        self.hindsight
    }

    fn begin_game(&mut self, _game_id: u64, seat: Seat) -> Result<(), AgentError> {
        self.seat = seat;
        if self.dataset.is_empty() {
            self.bundle = AnalysisBundle::empty();
            self.effective = ToMOrder::Zero;
            return Ok(());
        }
        self.bundle = self.pipeline.analyze(&self.dataset, self.order);
        let degraded = self.order != ToMOrder::Zero && self.bundle.behavior_pattern.mode == ModelMode::Uniform;
        self.effective = if degraded { ToMOrder::Zero } else { self.order };
        Ok(())
    }

    fn act(&mut self, obs: &Observation, _rng: &mut dyn RngCore) -> Result<Decision, AgentError> {
        let record = run_turn(&self.pipeline, self.effective, &self.bundle, obs)?;
        if !obs.is_legal(record.chosen) {
            return Err(AgentError::Illegal {
                action: record.chosen,
                legal: obs.legal_actions.clone(),
            });
        }
        Ok(Decision {
            action: record.chosen,
            deliberation: Some(record),
        })
    }

    fn end_game(&mut self, record: &GameRecord) -> Result<(), AgentError> {
        end_game_update(&mut self.dataset, record, self.seat, self.hindsight)
    }

    fn snapshot(&self) -> AgentSnapshot {
        AgentSnapshot {
            name: self.name.clone(),
            kind: if matches!(self.pipeline.reasoner, Reasoner::Oracle) { "oracle".into() } else { "llm".into() },
            tom_order: Some(self.order),
            hindsight: Some(self.hindsight),
            backend: self.pipeline.reasoner.name(),
        }
    }
}
