//! Command-line front end: `eval`, `solve-cfr`, `replay` and `play`.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{
    interpret_observation, Agent, DeliberationAgent, LlmSettings, ObsConversionRule, PolicyAgent, Reasoner,
    RuleDescription, ToMOrder,
};
use crate::cfr::{self, CfrConfig};
use crate::game::{other, Action, GameState, LeducConfig, Seat};
use crate::harness::{emit_report, read_replays, run_position_swap, run_variable_seeds, write_replays, MatchOutcome};
use crate::llm::{ChatClient, CompletionBackend, FixtureBackend, HttpConfig, RecordingBackend, TemplateSet};
use crate::opponents::{archetype, CfrPolicy, ARCHETYPE_NAMES};
use crate::record::{GameRecord, Seats};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Failure while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Seeds,
    Swap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    /// `llm`, `oracle`, `cfr:<path>` or `archetype:<name>`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tom_order: Option<ToMOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hindsight: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Extra attempts after a failed request.
    pub retries: u32,
    /// Requests per minute.
    pub rate_limit: u32,
    pub key_env: String,
    /// Replay completions from a transcript instead of calling the endpoint.
    pub fixture: Option<PathBuf>,
    /// Record every completion to this transcript.
    pub record: Option<PathBuf>,
    /// Directory of prompt templates overriding the built-in ones.
    pub templates: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        let http = HttpConfig::default();
        LlmConfig {
            endpoint: http.endpoint,
            model: "gpt-4-0613".into(),
            temperature: 0.0,
            max_tokens: 1024,
            retries: http.max_attempts - 1,
            rate_limit: http.rate_limit,
            key_env: http.key_env,
            fixture: None,
            record: None,
            templates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub n_games: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            kind: ProtocolKind::Seeds,
            n_games: 100,
            seed: 0,
        }
    }
}

fn default_game() -> String {
    "leduc".into()
}

fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_game")]
    pub game: String,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub llm: LlmConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Strip raw prompts and completions from persisted replays.
    #[serde(default)]
    pub redact: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(config_err)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.game != "leduc" {
            return Err(CliError::Config(format!("game: unsupported game {:?}; only \"leduc\" is available", self.game)));
        }
        if self.agents.len() != 2 {
            return Err(CliError::Config(format!("agents: expected exactly two agents, found {}", self.agents.len())));
        }
        if self.protocol.n_games == 0 {
            return Err(CliError::Config("protocol.n_games: must be at least 1".into()));
        }
        for (i, spec) in self.agents.iter().enumerate() {
            spec.validate().map_err(|e| CliError::Config(format!("agents[{i}]: {e}")))?;
        }
        Ok(())
    }
}

impl AgentSpec {
    fn deliberates(&self) -> bool {
        matches!(self.kind.as_str(), "llm" | "oracle")
    }

    fn validate(&self) -> Result<(), String> {
        let kind = self.kind.as_str();
        if !self.deliberates() {
            if self.tom_order.is_some() {
                return Err(format!("tom_order only applies to llm and oracle agents, not {kind:?}"));
            }
            if self.hindsight.is_some() {
                return Err(format!("hindsight only applies to llm and oracle agents, not {kind:?}"));
            }
        }
        if let Some(name) = kind.strip_prefix("archetype:") {
            archetype(name).map_err(|e| e.to_string())?;
        } else if let Some(path) = kind.strip_prefix("cfr:") {
            if path.is_empty() {
                return Err("cfr agent needs a policy path (cfr:<path>)".into());
            }
        } else if !self.deliberates() {
            return Err(format!(
                "unknown agent kind {kind:?}; expected llm, oracle, cfr:<path> or archetype:<name> (archetypes: {})",
                ARCHETYPE_NAMES.join(", ")
            ));
        }
        Ok(())
    }
}

/// Builds both agents. Everything that can fail before play (missing keys,
/// unreadable policies or fixtures) fails here.
pub fn build_agents(config: &RunConfig) -> Result<Vec<Box<dyn Agent>>, CliError> {
    let mut backend: Option<Arc<dyn CompletionBackend>> = None;
    let mut agents = Vec::new();
    for spec in &config.agents {
        agents.push(build_agent(spec, &config.llm, &mut backend)?);
    }
    Ok(agents)
}

fn llm_backend(llm: &LlmConfig) -> Result<Arc<dyn CompletionBackend>, CliError> {
    let inner: Box<dyn CompletionBackend> = match &llm.fixture {
        Some(path) => Box::new(FixtureBackend::load(path).map_err(config_err)?),
        None => {
            let http = HttpConfig {
                endpoint: llm.endpoint.clone(),
                key_env: llm.key_env.clone(),
                max_attempts: llm.retries + 1,
                rate_limit: llm.rate_limit,
                ..HttpConfig::default()
            };
            Box::new(ChatClient::from_env(http).map_err(config_err)?)
        }
    };
    Ok(match &llm.record {
        Some(path) => Arc::new(RecordingBackend::new(inner, path).map_err(config_err)?),
        None => Arc::from(inner),
    })
}

fn build_agent(
    spec: &AgentSpec,
    llm: &LlmConfig,
    backend: &mut Option<Arc<dyn CompletionBackend>>,
) -> Result<Box<dyn Agent>, CliError> {
    let kind = spec.kind.as_str();
    if let Some(name) = kind.strip_prefix("archetype:") {
        return Ok(Box::new(PolicyAgent::new(Arc::new(archetype(name).map_err(config_err)?))));
    }
    if let Some(path) = kind.strip_prefix("cfr:") {
        return Ok(Box::new(PolicyAgent::new(Arc::new(CfrPolicy::load(Path::new(path)).map_err(config_err)?))));
    }
    let order = spec.tom_order.unwrap_or(ToMOrder::Second);
    let hindsight = spec.hindsight.unwrap_or(true);
    let mut agent = match kind {
        "oracle" => DeliberationAgent::oracle(order, hindsight),
        "llm" => {
            let backend = match backend {
                Some(b) => b.clone(),
                None => backend.insert(llm_backend(llm)?).clone(),
            };
            let settings = LlmSettings {
                backend,
                model: llm.model.clone(),
                temperature: llm.temperature,
                max_tokens: llm.max_tokens,
                parse_retries: 2,
            };
            let mut agent = DeliberationAgent::new(order, hindsight, Reasoner::Llm(settings));
            if let Some(dir) = &llm.templates {
                agent = agent.with_templates(TemplateSet::load_dir(dir).map_err(config_err)?);
            }
            agent
        }
        other => return Err(CliError::Config(format!("unknown agent kind {other:?}"))),
    };
    if let Some(name) = &spec.name {
        agent = agent.with_name(name.clone());
    }
    Ok(Box::new(agent))
}

#[derive(Debug, Parser)]
#[command(name = "leduc-tom", version, about = "Leduc Hold'em agents, CFR baseline and evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a match protocol and write replays and a report.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        protocol: Option<ProtocolKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the CFR baseline and save the average strategy.
    SolveCfr {
        #[arg(long)]
        iters: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one game of a replay file.
    Replay {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        game: u64,
        /// Also print raw prompts and completions.
        #[arg(long)]
        raw: bool,
    },
    /// Play against the agent configured for the other seat.
    Play {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        human_seat: u8,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parses arguments, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdin.lock(), &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Eval {
            config,
            games,
            seed,
            protocol,
            out: out_dir,
        } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(n) = games {
                config.protocol.n_games = n;
            }
            if let Some(s) = seed {
                config.protocol.seed = s;
            }
            if let Some(p) = protocol {
                config.protocol.kind = p;
            }
            if let Some(dir) = out_dir {
                config.out_dir = dir;
            }
            config.validate()?;
            cmd_eval(&config, out).map(drop)
        }
        Command::SolveCfr { iters, out: path } => cmd_solve_cfr(iters, &path, out),
        Command::Replay { file, game, raw } => cmd_replay(&file, game, raw, out),
        Command::Play {
            config,
            human_seat,
            seed,
        } => {
            let config = RunConfig::load(&config)?;
            let seed = seed.unwrap_or(config.protocol.seed);
            cmd_play(&config, usize::from(human_seat), seed, input, out).map(drop)
        }
    }
}

/// Runs the configured protocol, then writes `replays.jsonl`, the report
/// files and the resolved `config.toml` into the output directory.
pub fn cmd_eval(config: &RunConfig, out: &mut dyn Write) -> Result<MatchOutcome, CliError> {
    let mut agents = build_agents(config)?;
    let (a, b) = agents.split_at_mut(1);
    let (a, b) = (a[0].as_mut(), b[0].as_mut());
    let p = &config.protocol;
    let outcome = match p.kind {
        ProtocolKind::Seeds => run_variable_seeds(a, b, p.n_games, p.seed, LeducConfig::default()),
        ProtocolKind::Swap => run_position_swap(a, b, p.n_games, p.seed, LeducConfig::default()),
    }
    .map_err(runtime_err)?;
    std::fs::create_dir_all(&config.out_dir).map_err(runtime_err)?;
    write_replays(&outcome.records, &config.out_dir.join("replays.jsonl"), config.redact).map_err(runtime_err)?;
    emit_report(&outcome.report, &config.out_dir).map_err(runtime_err)?;
    let resolved = toml::to_string(config).map_err(runtime_err)?;
    std::fs::write(config.out_dir.join("config.toml"), resolved).map_err(runtime_err)?;
    let r = &outcome.report;
    let w = |e: std::io::Error| runtime_err(e);
    writeln!(out, "{} games ({:?})", r.games.len(), r.protocol).map_err(w)?;
    for (name, total) in r.agents.iter().zip(r.totals) {
        writeln!(out, "{name}: {total:+} chips").map_err(w)?;
    }
    writeln!(out, "winner: {}", r.winner.as_deref().unwrap_or("none")).map_err(w)?;
    writeln!(out, "wrote {}", config.out_dir.display()).map_err(w)?;
    Ok(outcome)
}

pub const CFR_CHECKPOINTS: [u64; 3] = [100, 1_000, 10_000];

/// Trains CFR, printing NashConv at each checkpoint reached and at the end.
pub fn cmd_solve_cfr(iters: u64, path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    if iters == 0 {
        return Err(CliError::Config("--iters must be at least 1".into()));
    }
    let start = Instant::now();
    let mut lines = Vec::new();
    let profile = cfr::train_with_checkpoints(iters, CfrConfig::default(), &CFR_CHECKPOINTS, |t, p| {
        lines.push(format!("iter {t:>9}  nash_conv {:.6}  ({:.1?})", cfr::nash_conv(p), start.elapsed()));
    })
    .map_err(config_err)?;
    let w = |e: std::io::Error| runtime_err(e);
    for l in lines {
        writeln!(out, "{l}").map_err(w)?;
    }
    writeln!(out, "final {iters:>8}  nash_conv {:.6}  ({:.1?})", cfr::nash_conv(&profile), start.elapsed()).map_err(w)?;
    profile.save(path).map_err(runtime_err)?;
    writeln!(out, "saved {} infosets to {}", profile.len(), path.display()).map_err(w)?;
    Ok(())
}

fn rank_or_hidden(r: Option<crate::game::Rank>) -> &'static str {
    r.map_or("hidden", |r| r.word())
}

/// Human-readable transcript of one recorded game.
pub fn render_game(record: &GameRecord, raw: bool) -> String {
    let mut s = String::new();
    s.push_str(&format!("game {} (seed {})\n", record.game_id, record.seed));
    for seat in 0..2 {
        s.push_str(&format!(
            "  seat {seat}: {} holding {}\n",
            record.seats.get(seat),
            rank_or_hidden(record.deal.hole(seat))
        ));
    }
    s.push_str(&format!("  public card: {}\n", rank_or_hidden(record.deal.public)));
    for (i, step) in record.steps.iter().enumerate() {
        s.push_str(&format!(
            "step {}: round {}, seat {} ({}) {}\n",
            i + 1,
            step.round,
            step.seat,
            record.seats.get(step.seat),
            step.action.name()
        ));
        let Some(d) = &step.deliberation else { continue };
        s.push_str(&format!("  [{} order]\n", d.tom_order));
        s.push_str(&format!("  Observation: {}\n", d.obs_text));
        s.push_str(&format!("  Belief: {}\n", d.belief_text));
        s.push_str("  Plans:\n");
        for p in &d.plans {
            s.push_str(&format!("    {}\n", p.rationale));
        }
        s.push_str(&format!("  Plan Selection: {}\n", d.chosen.name()));
        if d.fallback_used {
            s.push_str("  (fallback action; the model's answer could not be read)\n");
        }
        if let Some(o) = d.oracle_choice {
            s.push_str(&format!("  Exact evaluation choice: {}\n", o.name()));
        }
        for note in &d.diagnostics {
            s.push_str(&format!("  note: {note}\n"));
        }
        if d.redacted {
            s.push_str("  (prompts redacted)\n");
        } else if raw {
            for (p, c) in d.raw_prompts.iter().zip(&d.raw_completions) {
                s.push_str(&format!("  --- prompt ---\n{p}\n  --- completion ---\n{c}\n"));
            }
        }
    }
    s.push_str(&format!("payoffs: {:+} / {:+}\n", record.payoffs[0], record.payoffs[1]));
    s
}

pub fn cmd_replay(path: &Path, game_id: u64, raw: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let records = read_replays(path).map_err(config_err)?;
    let record = records
        .iter()
        .find(|r| r.game_id == game_id)
        .ok_or_else(|| CliError::Config(format!("game {game_id} not found in {} ({} games)", path.display(), records.len())))?;
    out.write_all(render_game(record, raw).as_bytes()).map_err(runtime_err)
}

enum HumanInput {
    Action(Action),
    Quit,
}

fn read_human(input: &mut dyn BufRead, out: &mut dyn Write, legal: &[Action]) -> Result<HumanInput, CliError> {
    let tokens = legal.iter().map(|a| a.name()).collect::<Vec<_>>().join(", ");
    loop {
        write!(out, "your action [{tokens}, quit]: ").map_err(runtime_err)?;
        out.flush().map_err(runtime_err)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(runtime_err)? == 0 {
            return Ok(HumanInput::Quit);
        }
        let token = line.trim();
        if matches!(token.to_ascii_lowercase().as_str(), "quit" | "q" | "exit") {
            return Ok(HumanInput::Quit);
        }
        match Action::parse(token) {
            Some(a) if legal.contains(&a) => return Ok(HumanInput::Action(a)),
            _ => writeln!(out, "{token:?} is not a legal action; choose one of: {tokens}").map_err(runtime_err)?,
        }
    }
}

/// Interactive games against the agent configured for the other seat, until
/// the human quits. Returns the human's total.
pub fn cmd_play(
    config: &RunConfig,
    human_seat: Seat,
    seed: u64,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<i64, CliError> {
    let mut agents = build_agents(config)?;
    let bot_seat = other(human_seat);
    let bot = agents.swap_remove(bot_seat);
    let mut bot = bot;
    let rules = RuleDescription::leduc();
    let conv = ObsConversionRule::leduc();
    let w = |e: std::io::Error| runtime_err(e);
    let mut total = 0i64;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut game_id = 0u64;
    'games: loop {
        let game_seed = seed.wrapping_add(game_id);
        writeln!(out, "\n=== game {} vs {} ===", game_id + 1, bot.name()).map_err(w)?;
        bot.begin_game(game_id, bot_seat).map_err(runtime_err)?;
        let mut state = GameState::new(game_seed, LeducConfig::default());
        let mut deliberations = Vec::new();
        while !state.is_terminal() {
            let seat = state.to_act();
            let obs = state.observe(seat).map_err(runtime_err)?;
            let action = if seat == human_seat {
                writeln!(out, "{}", interpret_observation(&rules, &conv, &obs)).map_err(w)?;
                match read_human(input, out, &obs.legal_actions)? {
                    HumanInput::Action(a) => {
                        deliberations.push(None);
                        a
                    }
                    HumanInput::Quit => break 'games,
                }
            } else {
                let d = bot.act(&obs, &mut rng).map_err(runtime_err)?;
                writeln!(out, "{} plays {}", bot.name(), d.action.name()).map_err(w)?;
                deliberations.push(d.deliberation);
                d.action
            };
            state = state.apply(action).map_err(runtime_err)?;
        }
        let seats = if human_seat == 0 { Seats::new("human", bot.name()) } else { Seats::new(bot.name(), "human") };
        let record = GameRecord::from_state(game_id, game_seed, seats, &state, deliberations, true)
            .expect("terminal state yields a record");
        bot.end_game(&record).map_err(runtime_err)?;
        let mine = record.payoffs[human_seat];
        total += i64::from(mine);
        writeln!(
            out,
            "{} held {}; public card {}. You {} {} chips (total {total:+}).",
            bot.name(),
            state.hole(bot_seat).rank.word(),
            if record.reached_round_two() { state.deal().public.rank.word() } else { "not revealed" },
            if mine >= 0 { "win" } else { "lose" },
            mine.abs()
        )
        .map_err(w)?;
        game_id += 1;
    }
    writeln!(out, "\nfinal total after {game_id} games: {total:+} chips").map_err(w)?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
        [[agents]]
        kind = "oracle"
        tom_order = "first"

        [[agents]]
        kind = "archetype:always_caller"
    "#;

    #[test]
    fn config_defaults_and_validation() {
        let c = RunConfig::from_toml(BASIC).unwrap();
        assert_eq!(c.game, "leduc");
        assert_eq!(c.protocol, ProtocolConfig::default());
        assert_eq!(c.agents[0].tom_order, Some(ToMOrder::First));

        let err = RunConfig::from_toml(&format!("{BASIC}\nbogus = 1")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let bad = BASIC.replace("always_caller", "nit");
        let err = RunConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("conservative_folder"), "{err}");

        let bad = format!("{BASIC}tom_order = \"second\"\n");
        let err = RunConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("tom_order"), "{err}");
    }

    #[test]
    fn play_reprompts_and_quits() {
        let config = RunConfig::from_toml(BASIC).unwrap();
        let mut input = std::io::Cursor::new("bet\nquit\n");
        let mut out = Vec::new();
        let total = cmd_play(&config, 0, 3, &mut input, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"bet\" is not a legal action"), "{text}");
        assert!(text.contains("final total after 0 games"), "{text}");
        assert_eq!(total, 0);
    }
}
