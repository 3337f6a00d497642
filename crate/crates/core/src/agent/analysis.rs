//! Cross-game analysis computed directly from the match history: opponent
//! frequency tables, a reflexion summary, and rendered history for prompts.

use std::collections::BTreeMap;

use crate::belief::{card_prior, ModelMode, OpponentModel, RowKey};
use crate::dist::ActionDist;
use crate::game::{last_action_of, replay_contexts, showdown, Action, LeducConfig, Rank, Winner};
use crate::opponents::HandStrength;
use crate::record::{GameRecord, MatchDataset};

/// Games rendered one per line in prompts; older ones are aggregated.
pub const HISTORY_WINDOW: usize = 30;

/// Actions a table row ranges over: a player facing a bet may call, raise or
/// fold; otherwise it may check or raise.
pub fn row_actions(facing: bool) -> &'static [Action] {
    if facing {
        &[Action::Call, Action::Raise, Action::Fold]
    } else {
        &[Action::Check, Action::Raise]
    }
}

/// Weight of each opponent rank in a finished game, from the viewer's side.
///
/// With the opponent's card on record it is a point mass. Otherwise it is
/// the card-counting prior, restricted to ranks consistent with the showdown
/// result when there was one.
pub fn opponent_card_weights(record: &GameRecord) -> Option<[f64; 3]> {
    let viewer = record.viewer?;
    if let Some(c) = record.hindsight_opponent_card() {
        let mut w = [0.0; 3];
        w[c.index()] = 1.0;
        return Some(w);
    }
    let own = record.deal.hole(viewer)?;
    let public = record.deal.public.filter(|_| record.reached_round_two());
    let prior = card_prior(own, public).probs;
    if record.folded() {
        return Some(prior);
    }
    let Some(public) = public else {
        return Some(prior);
    };
    let mine = record.payoffs[viewer];
    let consistent = Rank::ALL.map(|c| {
        let mut holes = [c; 2];
        holes[viewer] = own;
        match showdown(holes, public) {
            Winner::Draw => mine == 0,
            Winner::Seat(s) if s == viewer => mine > 0,
            Winner::Seat(_) => mine < 0,
        }
    });
    let w: [f64; 3] = std::array::from_fn(|i| if consistent[i] { prior[i] } else { 0.0 });
    if w.iter().sum::<f64>() > 0.0 {
        Some(w)
    } else {
        Some(prior)
    }
}

/// Soft action counts of the opponent, keyed like model rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PatternTables {
    pub static_counts: BTreeMap<RowKey, [f64; 4]>,
    pub reactive_counts: BTreeMap<RowKey, [f64; 4]>,
}

impl PatternTables {
    pub fn from_dataset(dataset: &MatchDataset) -> PatternTables {
        let mut t = PatternTables::default();
        for rec in dataset.games() {
            t.add(rec);
        }
        t
    }

    pub fn add(&mut self, record: &GameRecord) {
        let (Some(viewer), Some(weights)) = (record.viewer, opponent_card_weights(record)) else {
            return;
        };
        let events = record.events();
        let contexts = replay_contexts(LeducConfig::default(), &events);
        for (i, (e, before)) in events.iter().zip(&contexts).enumerate() {
            if e.seat == viewer {
                continue;
            }
            let public = if e.round == 2 { record.deal.public } else { None };
            let facing = before.facing_bet();
            let my_last = last_action_of(&events[..i], viewer);
            for c in Rank::ALL {
                let w = weights[c.index()];
                if w <= 0.0 {
                    continue;
                }
                let tier = HandStrength::of(c, public);
                let s = self.static_counts.entry(RowKey::static_row(tier, e.round, facing)).or_default();
                s[e.action.index()] += w;
                let r = self
                    .reactive_counts
                    .entry(RowKey::reactive_row(tier, e.round, facing, my_last))
                    .or_default();
                r[e.action.index()] += w;
            }
        }
    }

    /// Laplace-smoothed row: (count + 1) / (total + number of row actions).
    pub fn smoothed(counts: &[f64; 4], facing: bool) -> ActionDist {
        let actions = row_actions(facing);
        let total: f64 = actions.iter().map(|a| counts[a.index()]).sum();
        let denom = total + actions.len() as f64;
        let pairs: Vec<_> = actions.iter().map(|&a| (a, (counts[a.index()] + 1.0) / denom)).collect();
        ActionDist::from_pairs(&pairs)
    }

    fn rows(counts: &BTreeMap<RowKey, [f64; 4]>) -> impl Iterator<Item = (RowKey, ActionDist)> + '_ {
        counts
            .iter()
            .map(|(k, c)| (*k, PatternTables::smoothed(c, k.facing.unwrap_or(false))))
    }

    pub fn static_model(&self) -> OpponentModel {
        let mut m = OpponentModel::new(ModelMode::Static);
        m.rows.extend(PatternTables::rows(&self.static_counts));
        m
    }

    /// Reactive rows plus the static rows as fallbacks.
    pub fn reactive_model(&self) -> OpponentModel {
        let mut m = OpponentModel::new(ModelMode::Reactive);
        m.rows.extend(PatternTables::rows(&self.static_counts));
        m.rows.extend(PatternTables::rows(&self.reactive_counts));
        m
    }
}

fn tier_phrase(tier: HandStrength) -> &'static str {
    match tier {
        HandStrength::Weak => "a Jack (no pair)",
        HandStrength::Mid => "a Queen (no pair)",
        HandStrength::Strong => "a King (no pair)",
        HandStrength::Pair => "a pair with the public card",
    }
}

fn my_last_phrase(last: Option<Action>) -> String {
    match last {
        None => "before I have acted".into(),
        Some(a) => format!("after I {}", past(a)),
    }
}

fn past(a: Action) -> &'static str {
    match a {
        Action::Call => "called",
        Action::Raise => "raised",
        Action::Fold => "folded",
        Action::Check => "checked",
    }
}

/// Describes model rows as sentences in the style the pattern parser reads.
pub fn describe_model(model: &OpponentModel) -> String {
    if model.rows.is_empty() {
        return "No history yet: assume the opponent picks each legal action with equal probability.".into();
    }
    let mut lines = Vec::new();
    for (k, d) in &model.rows {
        let round = if k.round == 1 { "first" } else { "second" };
        let facing = match k.facing {
            Some(true) => ", facing a bet",
            Some(false) => ", not facing a bet",
            None => "",
        };
        let reactive = match k.my_last {
            Some(last) => format!(" {}", my_last_phrase(last)),
            None => String::new(),
        };
        let parts: Vec<_> = d
            .support()
            .map(|(a, p)| format!("{} ({:.0}%)", a.name(), 100.0 * p))
            .collect();
        lines.push(format!(
            "- When the opponent holds {} in the {round} round{facing}{reactive}, he tends to {}.",
            tier_phrase(k.tier),
            parts.join(" or ")
        ));
    }
    lines.join("\n")
}

fn outcome_word(p: i32) -> &'static str {
    match p.signum() {
        1 => "won",
        -1 => "lost",
        _ => "drew",
    }
}

fn actions_string(record: &GameRecord, viewer: usize) -> String {
    let mut out = String::new();
    let mut round = 1;
    for s in &record.steps {
        if s.round != round {
            out.push_str(" / ");
            round = s.round;
        } else if !out.is_empty() {
            out.push(' ');
        }
        let who = if s.seat == viewer { "me" } else { "opp" };
        out.push_str(&format!("{who}:{}", s.action.name()));
    }
    out
}

fn card_or(r: Option<Rank>, missing: &str) -> String {
    r.map_or_else(|| missing.to_owned(), |r| r.word().to_owned())
}

/// One line per recent game, older games folded into a single aggregate.
pub fn render_history(dataset: &MatchDataset, window: usize) -> String {
    let games = dataset.games();
    if games.is_empty() {
        return "No previous games.".into();
    }
    let split = games.len().saturating_sub(window);
    let mut lines = Vec::new();
    if split > 0 {
        let (mut w, mut l, mut d, mut net) = (0, 0, 0, 0i64);
        for g in &games[..split] {
            let p = g.payoffs[g.viewer.unwrap_or(0)];
            net += p as i64;
            match p.signum() {
                1 => w += 1,
                -1 => l += 1,
                _ => d += 1,
            }
        }
        lines.push(format!("Games 1-{split}: won {w}, lost {l}, drew {d}, net {net:+} chips."));
    }
    for (i, g) in games.iter().enumerate().skip(split) {
        let v = g.viewer.unwrap_or(0);
        let opp = card_or(g.hindsight_opponent_card(), "unknown");
        let public = card_or(g.deal.public.filter(|_| g.reached_round_two()), "not revealed");
        let ending = if g.folded() { "fold" } else { "showdown" };
        lines.push(format!(
            "Game {} (seat {v}): my card {}, opponent card {opp}, public card {public}; {}; {} {:+} chips at {ending}.",
            i + 1,
            card_or(g.deal.hole(v), "?"),
            actions_string(g, v),
            outcome_word(g.payoffs[v]),
            g.payoffs[v],
        ));
    }
    lines.join("\n")
}

/// A structured summary of what won and lost chips so far.
pub fn reflexion_summary(dataset: &MatchDataset) -> String {
    let games = dataset.games();
    if games.is_empty() {
        return "No previous games to reflect on.".into();
    }
    let mine = |g: &GameRecord| g.payoffs[g.viewer.unwrap_or(0)] as i64;
    let net: i64 = games.iter().map(mine).sum();
    let won = games.iter().filter(|g| mine(g) > 0).count();
    let lost = games.iter().filter(|g| mine(g) < 0).count();
    let mut out = vec![format!(
        "Over {} games my net result is {net:+} chips ({won} won, {lost} lost, {} drawn).",
        games.len(),
        games.len() - won - lost
    )];

    let mut by_card = [(0usize, 0i64); 3];
    let (mut i_folded, mut they_folded, mut showdowns) = ((0, 0i64), (0, 0i64), (0, 0i64));
    for g in games {
        let v = g.viewer.unwrap_or(0);
        let p = mine(g);
        if let Some(c) = g.deal.hole(v) {
            by_card[c.index()].0 += 1;
            by_card[c.index()].1 += p;
        }
        let bucket = if !g.folded() {
            &mut showdowns
        } else if g.steps.last().is_some_and(|s| s.seat == v) {
            &mut i_folded
        } else {
            &mut they_folded
        };
        bucket.0 += 1;
        bucket.1 += p;
    }
    let cards: Vec<_> = Rank::ALL
        .iter()
        .filter(|r| by_card[r.index()].0 > 0)
        .map(|r| format!("{} {} games {:+}", r.word(), by_card[r.index()].0, by_card[r.index()].1))
        .collect();
    out.push(format!("By my card: {}.", cards.join("; ")));
    out.push(format!(
        "Showdowns: {} games {:+}. The opponent folded {} games ({:+}). I folded {} games ({:+}).",
        showdowns.0, showdowns.1, they_folded.0, they_folded.1, i_folded.0, i_folded.1
    ));

    if let Some((i, g)) = games.iter().enumerate().rev().take(HISTORY_WINDOW).min_by_key(|(_, g)| mine(g)) {
        if mine(g) < 0 {
            let v = g.viewer.unwrap_or(0);
            out.push(format!(
                "Costliest recent game: game {} with my {}, {:+} chips.",
                i + 1,
                card_or(g.deal.hole(v), "?"),
                mine(g)
            ));
        }
    }
    if showdowns.1 < 0 && showdowns.0 >= 3 {
        out.push("Lesson: I pay off too often at showdown; bet less with weak unpaired cards.".into());
    }
    if they_folded.0 * 3 >= games.len() {
        out.push("Lesson: the opponent folds often under pressure; raising wins pots without a showdown.".into());
    }
    if i_folded.1 < -(games.len() as i64) / 2 {
        out.push("Lesson: folding has been expensive; defend more often with middling cards.".into());
    }
    out.join("\n")
}

/// How my own play looks from the other side of the table: my action
/// frequencies by my card tier, round and facing status.
pub fn my_pattern_summary(dataset: &MatchDataset) -> String {
    let mut counts: BTreeMap<(HandStrength, u8, bool), [u32; 4]> = BTreeMap::new();
    for g in dataset.games() {
        let Some(v) = g.viewer else { continue };
        let Some(own) = g.deal.hole(v) else { continue };
        let events = g.events();
        let contexts = replay_contexts(LeducConfig::default(), &events);
        for (e, before) in events.iter().zip(&contexts) {
            if e.seat != v {
                continue;
            }
            let public = if e.round == 2 { g.deal.public } else { None };
            counts
                .entry((HandStrength::of(own, public), e.round, before.facing_bet()))
                .or_default()[e.action.index()] += 1;
        }
    }
    if counts.is_empty() {
        return "The opponent has not seen me play yet.".into();
    }
    let mut lines = Vec::new();
    for ((tier, round, facing), c) in counts {
        let total: u32 = c.iter().sum();
        let parts: Vec<_> = Action::ALL
            .iter()
            .filter(|a| c[a.index()] > 0)
            .map(|a| format!("{} ({:.0}%)", a.name(), 100.0 * c[a.index()] as f64 / total as f64))
            .collect();
        lines.push(format!(
            "- When I hold {} in round {round}{}, I tend to {}.",
            tier_phrase(tier),
            if facing { " facing a bet" } else { "" },
            parts.join(" or ")
        ));
    }
    lines.join("\n")
}
