//! Parsers for free-text deliberations and behaviour patterns.
//!
//! Completions are loosely structured: labelled sections with prose in
//! between. The parsers locate section headings, then pull numbers out of the
//! sentences that carry them, ignoring everything else.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::belief::{BeliefDistribution, ModelMode, OpponentModel, RowKey};
use crate::dist::ActionDist;
use crate::game::{Action, Rank};
use crate::opponents::HandStrength;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing required section {0:?}")]
    MissingSection(&'static str),
    #[error("illegal selection {0:?}")]
    IllegalSelection(String),
    #[error("no action named in the plan selection")]
    NoSelection,
    #[error("non-numeric expected gain for plan {0}")]
    NonNumericGain(Action),
    #[error("no behaviour-pattern rows found")]
    NoPatternRows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDeliberation {
    /// Raw text of each recognized section, by canonical name.
    pub sections: BTreeMap<String, String>,
    pub belief: Option<BeliefDistribution>,
    /// Set when the stated percentages did not total 100 and were rescaled.
    pub belief_renormalized: bool,
    pub gains: Vec<(Action, f64)>,
    pub selection: Action,
}

impl ParsedDeliberation {
    pub fn gain(&self, action: Action) -> Option<f64> {
        self.gains.iter().find(|(a, _)| *a == action).map(|&(_, g)| g)
    }
}

fn re(pattern: &str) -> Regex {
    Regex::new(pattern).expect("static pattern")
}

static HEADINGS: LazyLock<Vec<(&'static str, Regex)>> = LazyLock::new(|| {
    vec![
        ("Pattern", re(r"(?i)opponent'?s (?:behaviou?r )?pattern\s*:")),
        ("Guess", re(r"(?i)guess on [^:\n]{0,40}?game pattern\s*:")),
        ("Reflexion", re(r"(?i)\breflexion\s*:")),
        ("Belief On Me", re(r"(?i)belief on my cards\s*:")),
        ("Belief", re(r"(?i)belief on (?:the opponent'?s|[a-z][\w-]*'s) cards\s*:")),
        ("Plans", re(r"(?i)(?:make )?reasonable plans\s*:")),
        ("Rates", re(r"(?i)estimate winning\s*/\s*lose\s*/\s*draw rates?[^:\n]{0,40}:")),
        ("Expected Gain", re(r"(?i)estimate expected chips? gain[^:\n]{0,30}:")),
        ("Plan Selection", re(r"(?i)plan selection\s*:")),
    ]
});

static MARKUP: LazyLock<Regex> = LazyLock::new(|| re(r"\\(?:textbf|textit|emph)\{|\*\*|__|[{}]"));

/// Strips emphasis markup and normalizes escaped percent signs and dashes.
fn normalize(text: &str) -> String {
    let t = text.replace("\\%", "%").replace(['\u{2212}', '\u{2013}'], "-");
    MARKUP.replace_all(&t, "").into_owned()
}

/// Splits text into labelled sections. Text before the first heading is
/// dropped; a heading that repeats has its bodies concatenated.
pub fn split_sections(text: &str) -> BTreeMap<String, String> {
    let text = normalize(text);
    let mut marks: Vec<(usize, usize, &str)> = Vec::new();
    for (name, rx) in HEADINGS.iter() {
        for m in rx.find_iter(&text) {
            if !marks.iter().any(|&(s, e, _)| m.start() < e && s < m.end()) {
                marks.push((m.start(), m.end(), name));
            }
        }
    }
    marks.sort();
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    for (i, &(_, end, name)) in marks.iter().enumerate() {
        let stop = marks.get(i + 1).map_or(text.len(), |m| m.0);
        let body = text[end..stop].trim();
        out.entry(name.to_owned())
            .and_modify(|s| {
                s.push('\n');
                s.push_str(body);
            })
            .or_insert_with(|| body.to_owned());
    }
    out
}

static SENTENCE_END: LazyLock<Regex> = LazyLock::new(|| re(r"[.!?;](?:\s+|$)|\n"));
static CARD_PCT: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)\b(jack|queen|king)s?\b\s*\(\s*(?:probability\s*(?:of\s*)?)?(\d+(?:\.\d+)?)\s*%(?:\s*probability)?\s*\)")
});

/// Reads the last sentence of `text` that assigns percentages to ranks.
pub fn parse_belief(text: &str) -> Option<(BeliefDistribution, bool)> {
    let text = normalize(text);
    let sentence = SENTENCE_END
        .split(&text)
        .filter(|s| CARD_PCT.is_match(s))
        .last()?;
    let mut pct = [0.0f64; 3];
    for c in CARD_PCT.captures_iter(sentence) {
        let rank = Rank::ALL
            .into_iter()
            .find(|r| r.word().eq_ignore_ascii_case(&c[1]))
            .expect("regex only matches rank words");
        pct[rank.index()] = c[2].parse().ok()?;
    }
    let total: f64 = pct.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let renormalized = (total - 100.0).abs() > 1e-6;
    if renormalized {
        log::warn!("belief percentages total {total}, renormalizing");
    }
    Some((BeliefDistribution::new(pct.map(|p| p / total)), renormalized))
}

static PLAN_HEAD: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)\bplan\s*\d+\s*(?:[:(\-]\s*)?(call|raise|fold|check)\b"));
static ASSIGNED: LazyLock<Regex> = LazyLock::new(|| re(r"=\s*(-?\s*\d+(?:\.\d+)?)?"));

/// Per-plan gains: the value after the last `=` of each plan's paragraph.
pub fn parse_gains(text: &str) -> Result<Vec<(Action, f64)>, ParseError> {
    let text = normalize(text);
    let heads: Vec<_> = PLAN_HEAD.captures_iter(&text).collect();
    let mut gains: Vec<(Action, f64)> = Vec::new();
    for (i, cap) in heads.iter().enumerate() {
        let action = Action::parse(&cap[1]).expect("regex only matches action names");
        let start = cap.get(0).expect("whole match").end();
        let stop = heads.get(i + 1).map_or(text.len(), |c| c.get(0).expect("whole match").start());
        let value = ASSIGNED
            .captures_iter(&text[start..stop])
            .last()
            .and_then(|c| c.get(1))
            .and_then(|m| m.as_str().replace(char::is_whitespace, "").parse::<f64>().ok())
            .ok_or(ParseError::NonNumericGain(action))?;
        gains.retain(|(a, _)| *a != action);
        gains.push((action, value));
    }
    Ok(gains)
}

/// Each plan's paragraph, keyed by the action it names. Later paragraphs for
/// the same action replace earlier ones.
pub fn plan_paragraphs(text: &str) -> Vec<(Action, String)> {
    let text = normalize(text);
    let heads: Vec<_> = PLAN_HEAD.captures_iter(&text).collect();
    let mut out: Vec<(Action, String)> = Vec::new();
    for (i, cap) in heads.iter().enumerate() {
        let action = Action::parse(&cap[1]).expect("regex only matches action names");
        let start = cap.get(0).expect("whole match").end();
        let stop = heads.get(i + 1).map_or(text.len(), |c| c.get(0).expect("whole match").start());
        let body = text[start..stop].trim_start_matches(|c: char| c == ')' || c == ':' || c == '-' || c.is_whitespace());
        out.retain(|(a, _)| *a != action);
        out.push((action, body.trim().to_owned()));
    }
    out
}

static DECISIVE: LazyLock<Vec<Regex>> = LazyLock::new(|| {
    vec![
        re(r"(?i)\bplan\s*\d+\s*\(\s*([a-z]+)\s*\)\s*(?:would be|is|will be|seems to be|appears to be)\s+(?:the\s+)?(?:best|optimal)"),
        re(r"(?i)\b(?:best|optimal) (?:plan|strategy|action|option|choice|move)\s+(?:for me\s+)?(?:here\s+)?(?:is|would be|will be)\s+(?:to\s+)?(?:plan\s*\d+\s*[:(\-]?\s*)?([a-z]+)"),
        re(r"(?i)\b([a-z]+)\)?\s+(?:would be|is)\s+the (?:best|optimal) (?:plan|strategy|action|option|choice|move)"),
        re(r"(?i)\b(?:selected action|final action|my action|decision)\s*(?:is|:)\s*(?:to\s+)?([a-z]+)"),
        re(r"(?i)^\s*(?:plan\s*\d+\s*[:(\-]?\s*)?([a-z]+)\)?\s*(?:[.!\n]|$)"),
    ]
});
static SOFT: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)\b(?:i|we)\s+(?:will|shall|should|choose to|decide to|would)\s+(call|raise|fold|check)\b"));

/// The selected action. A decisive phrase naming a non-action is an illegal selection.
pub fn parse_selection(text: &str, legal: &[Action]) -> Result<Action, ParseError> {
    let text = normalize(text);
    let word = DECISIVE
        .iter()
        .find_map(|rx| rx.captures(&text).map(|c| c[1].to_owned()))
        .or_else(|| SOFT.captures(&text).map(|c| c[1].to_owned()))
        .ok_or(ParseError::NoSelection)?;
    match Action::parse(&word) {
        Some(a) if legal.contains(&a) => Ok(a),
        _ => Err(ParseError::IllegalSelection(word.to_ascii_lowercase())),
    }
}

/// Parses a planning completion. Belief is optional; gains and a legal
/// selection are required.
pub fn parse_deliberation(text: &str, legal: &[Action]) -> Result<ParsedDeliberation, ParseError> {
    let sections = split_sections(text);
    let selection_text = sections.get("Plan Selection").ok_or(ParseError::MissingSection("Plan Selection"))?;
    let gain_text = sections.get("Expected Gain").ok_or(ParseError::MissingSection("Expected Gain"))?;
    let gains = parse_gains(gain_text)?;
    if gains.is_empty() {
        return Err(ParseError::MissingSection("Expected Gain"));
    }
    let selection = parse_selection(selection_text, legal)?;
    let (belief, belief_renormalized) = match sections.get("Belief").and_then(|b| parse_belief(b)) {
        Some((b, r)) => (Some(b), r),
        None => (None, false),
    };
    Ok(ParsedDeliberation {
        sections,
        belief,
        belief_renormalized,
        gains,
        selection,
    })
}

fn fmt_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Writes a deliberation in the canonical section layout the parser reads.
pub fn render_canonical(p: &ParsedDeliberation) -> String {
    let mut out = String::new();
    if let Some(b) = &p.belief {
        let parts: Vec<_> = Rank::ALL
            .iter()
            .map(|r| format!("{} ({}%)", r.word(), fmt_number(100.0 * b.get(*r))))
            .collect();
        out.push_str(&format!("Belief on the opponent's cards: {}.\n\n", parts.join(", ")));
    }
    out.push_str("Reasonable Plans:\n");
    for (i, (a, _)) in p.gains.iter().enumerate() {
        out.push_str(&format!("Plan {}: {}\n", i + 1, a.name()));
    }
    out.push_str("\nEstimate Expected Chips Gain for Each Plan:\n");
    for (i, (a, g)) in p.gains.iter().enumerate() {
        out.push_str(&format!("Plan {}: {} - Expected Chips Gain = {}\n", i + 1, a.name(), g));
    }
    out.push_str(&format!("\nPlan Selection: {}\n", p.selection.name()));
    out
}

static CLAUSE_END: LazyLock<Regex> = LazyLock::new(|| re(r"\.\s*-\s|\n|\s-\s|[.;:](?:\s+|$)"));
static HOLDS: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)\bhold(?:s|ing)?\s+(?:a|an|the)?\s*(jack|queen|king)"));
static ROUND_ONE: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)\b(?:1st|first)\s+round"));
static ROUND_TWO: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)\b(?:2nd|second)\s+round"));
static PUBLIC: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)public card is (?:a|an)?\s*(jack|queen|king)(?:\s*(?:,|or)\s*(?:a|an)?\s*(jack|queen|king))?(?:\s*(?:,|or)\s*(?:a|an)?\s*(jack|queen|king))?")
});
static ANY_PUBLIC: LazyLock<Regex> = LazyLock::new(|| re(r"(?i)regardless of the public card"));
static REACTS_TO: LazyLock<Regex> = LazyLock::new(|| {
    re(r"(?i)\bif (?:the opponent|my opponent|i|you)\s+(checks? or calls?|calls? or checks?|raises?|calls?|checks?)\b")
});
static PCT_PAREN: LazyLock<Regex> = LazyLock::new(|| re(r"\([^()%]*?(\d+(?:\.\d+)?)\s*%[^()]*\)"));
static ACTION_WORD: LazyLock<Regex> =
    LazyLock::new(|| re(r"(?i)\b(raise|call|fold|check)(?:s|es|ed|d|ing)?\b"));

fn rank_of(word: &str) -> Rank {
    Rank::ALL
        .into_iter()
        .find(|r| r.word().eq_ignore_ascii_case(word))
        .expect("regex only matches rank words")
}

/// Reads sentences like "When the opponent holds a King, he tends to raise
/// (70%) or call (30%)" into an opponent model. Clauses that also name one of
/// my actions ("if I raise in the first round, ...") become reactive rows.
pub fn parse_behavior_pattern(text: &str) -> Result<OpponentModel, ParseError> {
    let text = normalize(text);
    let mut holder: Option<Rank> = None;
    let mut round: u8 = 1;
    let mut rows: Vec<(RowKey, ActionDist)> = Vec::new();
    for clause in CLAUSE_END.split(&text) {
        if let Some(c) = HOLDS.captures(clause) {
            holder = Some(rank_of(&c[1]));
        }
        let r1 = ROUND_ONE.find(clause).map(|m| m.start());
        let r2 = ROUND_TWO.find(clause).map(|m| m.start());
        match (r1, r2) {
            (Some(a), Some(b)) => round = if a < b { 1 } else { 2 },
            (Some(_), None) => round = 1,
            (None, Some(_)) => round = 2,
            (None, None) => {}
        }
        let mut publics: Vec<Rank> = Vec::new();
        if ANY_PUBLIC.is_match(clause) {
            publics = Rank::ALL.to_vec();
        } else if let Some(c) = PUBLIC.captures(clause) {
            publics = (1..=3).filter_map(|i| c.get(i)).map(|m| rank_of(m.as_str())).collect();
        }
        let clause_round = if publics.is_empty() { round } else { 2 };

        let mut pairs = Vec::new();
        for m in PCT_PAREN.captures_iter(clause) {
            let at = m.get(0).expect("whole match").start();
            let Some(word) = ACTION_WORD.captures_iter(&clause[..at]).last() else {
                continue;
            };
            let action = Action::parse(&word[1]).expect("regex only matches action names");
            let p: f64 = m[1].parse().unwrap_or(0.0);
            pairs.push((action, p));
        }
        let (Some(rank), false) = (holder, pairs.is_empty()) else {
            continue;
        };
        let Some(dist) = normalized(&pairs) else {
            continue;
        };

        let reactive: Vec<Option<Action>> = match REACTS_TO.captures(clause) {
            Some(c) => {
                let verb = c[1].to_ascii_lowercase();
                let mut v = Vec::new();
                if verb.contains("check") {
                    v.push(Some(Action::Check));
                }
                if verb.contains("call") {
                    v.push(Some(Action::Call));
                }
                if verb.contains("raise") {
                    v.push(Some(Action::Raise));
                }
                v
            }
            None => Vec::new(),
        };

        let mut tiers = Vec::new();
        if clause_round == 1 {
            tiers.push(HandStrength::of(rank, None));
        } else {
            let boards = if publics.is_empty() { Rank::ALL.to_vec() } else { publics };
            for p in boards {
                let t = HandStrength::of(rank, Some(p));
                if !tiers.contains(&t) {
                    tiers.push(t);
                }
            }
        }
        for tier in tiers {
            let base = RowKey {
                tier,
                round: clause_round,
                facing: None,
                my_last: None,
            };
            if reactive.is_empty() {
                rows.push((base, dist));
            } else {
                for &last in &reactive {
                    rows.push((RowKey { my_last: Some(last), ..base }, dist));
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(ParseError::NoPatternRows);
    }
    let mode = if rows.iter().any(|(k, _)| k.my_last.is_some()) {
        ModelMode::Reactive
    } else {
        ModelMode::Static
    };
    let mut model = OpponentModel::new(mode);
    for (k, d) in rows {
        model.rows.insert(k, d);
    }
    Ok(model)
}

fn normalized(pairs: &[(Action, f64)]) -> Option<ActionDist> {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (total > 0.0).then(|| {
        let scaled: Vec<_> = pairs.iter().map(|&(a, p)| (a, p / total)).collect();
        ActionDist::from_pairs(&scaled)
    })
}
