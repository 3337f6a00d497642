//! Tabular vanilla CFR for Leduc Hold'em with exact chance enumeration.
//!
//! The solver walks the *public* betting tree once per traversal and carries
//! per-rank vectors for the hidden hole cards. Each node therefore processes a
//! 3x3 matrix of (seat 0 rank, seat 1 rank) weights instead of recursing per
//! deal. Card removal is handled by the chance weights: both copies of a rank
//! can be held by at most two of the three slots (two holes plus the board).

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::dist::ActionDist;
use crate::game::{
    other, settle, showdown, Action, BetEvent, BetOutcome, Betting, LeducConfig, Observation,
    Rank, Seat, Winner, COPIES_PER_RANK,
};

pub const POLICY_MAGIC: &[u8; 8] = b"SUSP-CFR";
pub const POLICY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CfrError {
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("not a policy file")]
    BadMagic,
    #[error("unsupported policy file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("malformed policy file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Identifies an information set: what the acting player knows.
///
/// Rendered as `seat|own|public|sequence`, e.g. `1|K|Q|rc/r`, where the
/// sequence uses one letter per action (`c`all, `r`aise, `f`old, chec`k`) and
/// `/` marks the start of round two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSetKey(String);

impl InfoSetKey {
    pub fn new(seat: Seat, own: Rank, public: Option<Rank>, events: &[BetEvent]) -> InfoSetKey {
        let mut seq = String::new();
        let mut round = 1;
        for e in events {
            if e.round != round {
                seq.push('/');
                round = e.round;
            }
            seq.push(e.action.letter());
        }
        if public.is_some() && round == 1 {
            seq.push('/');
        }
        let public = public.map_or('-', Rank::letter);
        InfoSetKey(format!("{seat}|{}|{public}|{seq}", own.letter()))
    }

    pub fn from_observation(obs: &Observation) -> InfoSetKey {
        InfoSetKey::new(
            obs.player,
            obs.private_card,
            obs.public_card,
            &obs.betting_sequence_public,
        )
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Parses a key string, validating that its betting sequence is legal and
    /// that `seat` is the player to act after it. Returns the legal actions.
    pub fn parse(s: &str) -> Option<(InfoSetKey, Vec<Action>)> {
        let mut parts = s.split('|');
        let seat: Seat = parts.next()?.parse().ok()?;
        let own = Rank::from_letter(parts.next()?.chars().next()?)?;
        let public_field = parts.next()?;
        let seq = parts.next()?;
        if parts.next().is_some() || seat > 1 {
            return None;
        }
        let public = match public_field {
            "-" => None,
            p if p.len() == 1 => Some(Rank::from_letter(p.chars().next()?)?),
            _ => return None,
        };
        let mut rounds = seq.split('/');
        let first = rounds.next()?;
        let second = rounds.next();
        if rounds.next().is_some() {
            return None;
        }
        let mut betting = Betting::new(LeducConfig::default());
        let mut events = Vec::new();
        for (round, letters) in [(1u8, Some(first)), (2u8, second)] {
            let Some(letters) = letters else { continue };
            if betting.round != round {
                return None;
            }
            for c in letters.chars() {
                let action = Action::from_letter(c)?;
                if betting.round != round || !betting.legal_actions().contains(&action) {
                    return None;
                }
                events.push(BetEvent {
                    seat: betting.to_act,
                    round,
                    action,
                });
                betting.apply(action);
            }
        }
        if betting.finished
            || betting.to_act != seat
            || (betting.round == 2) != public.is_some()
            || (betting.round == 2) != second.is_some()
        {
            return None;
        }
        let key = InfoSetKey::new(seat, own, public, &events);
        (key.0 == s).then(|| (key, betting.legal_actions()))
    }
}

impl fmt::Display for InfoSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoSetEntry {
    pub key: InfoSetKey,
    pub legal: Vec<Action>,
    pub regret_sum: [f64; 4],
    pub strategy_sum: [f64; 4],
}

impl InfoSetEntry {
    /// Regret matching over the legal actions.
    pub fn current_strategy(&self) -> ActionDist {
        let mut p = [0.0; 4];
        let mut total = 0.0;
        for a in &self.legal {
            let r = self.regret_sum[a.index()].max(0.0);
            p[a.index()] = r;
            total += r;
        }
        if total <= 0.0 {
            return ActionDist::uniform(&self.legal);
        }
        for a in &self.legal {
            p[a.index()] /= total;
        }
        ActionDist(p)
    }

    pub fn average_strategy(&self) -> ActionDist {
        let total: f64 = self.legal.iter().map(|a| self.strategy_sum[a.index()]).sum();
        if total <= 0.0 {
            return ActionDist::uniform(&self.legal);
        }
        let mut p = [0.0; 4];
        for a in &self.legal {
            p[a.index()] = self.strategy_sum[a.index()] / total;
        }
        ActionDist(p)
    }
}

/// Accumulated regrets and strategy weights for every information set.
#[derive(Debug)]
pub struct StrategyProfile {
    entries: Vec<InfoSetEntry>,
    index: HashMap<InfoSetKey, usize>,
    iterations: u64,
    unknown_lookups: AtomicU64,
}

impl Clone for StrategyProfile {
    fn clone(&self) -> Self {
        StrategyProfile {
            entries: self.entries.clone(),
            index: self.index.clone(),
            iterations: self.iterations,
            unknown_lookups: AtomicU64::new(self.unknown_lookups.load(Ordering::Relaxed)),
        }
    }
}

impl StrategyProfile {
    /// Zero-initialized profile covering every reachable information set.
    pub fn untrained() -> StrategyProfile {
        PublicTree::build(LeducConfig::default()).empty_profile()
    }

    fn from_entries(entries: Vec<InfoSetEntry>, iterations: u64) -> StrategyProfile {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key.clone(), i))
            .collect();
        StrategyProfile {
            entries,
            index,
            iterations,
            unknown_lookups: AtomicU64::new(0),
        }
    }

    pub fn entries(&self) -> &[InfoSetEntry] {
        &self.entries
    }

    pub fn entry(&self, key: &InfoSetKey) -> Option<&InfoSetEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of lookups that fell back to uniform because the key was unknown.
    pub fn unknown_lookups(&self) -> u64 {
        self.unknown_lookups.load(Ordering::Relaxed)
    }

    /// Average strategy at `key`. Unknown keys get the uniform distribution
    /// over `legal` and bump the diagnostic counter.
    pub fn average_strategy(&self, key: &InfoSetKey, legal: &[Action]) -> ActionDist {
        match self.entry(key) {
            Some(e) => e.average_strategy(),
            None => {
                self.unknown_lookups.fetch_add(1, Ordering::Relaxed);
                log::debug!("unknown infoset {key}, playing uniform");
                ActionDist::uniform(legal)
            }
        }
    }

    pub fn average_for_observation(&self, obs: &Observation) -> ActionDist {
        self.average_strategy(&InfoSetKey::from_observation(obs), &obs.legal_actions)
    }

    /// Builds a profile whose average strategy equals `strategy` at every infoset.
    pub fn from_strategy(mut strategy: impl FnMut(&InfoSetKey, &[Action]) -> ActionDist) -> Self {
        let mut profile = StrategyProfile::untrained();
        for e in &mut profile.entries {
            e.strategy_sum = strategy(&e.key, &e.legal).0;
        }
        profile
    }

    pub fn save(&self, path: &Path) -> Result<(), CfrError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<StrategyProfile, CfrError> {
        let bytes = std::fs::read(path)?;
        StrategyProfile::read_from(&mut bytes.as_slice())
    }

    /// Little-endian layout: magic, version (u32), infoset count (u32), then per
    /// infoset the key length (u32), key bytes, four f64 strategy sums and four
    /// f64 regret sums in canonical action order.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), CfrError> {
        w.write_all(POLICY_MAGIC)?;
        w.write_all(&POLICY_VERSION.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        for e in &self.entries {
            let key = e.key.as_str().as_bytes();
            w.write_all(&(key.len() as u32).to_le_bytes())?;
            w.write_all(key)?;
            for x in e.strategy_sum.iter().chain(e.regret_sum.iter()) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<StrategyProfile, CfrError> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic).map_err(|_| CfrError::BadMagic)?;
        if &magic != POLICY_MAGIC {
            return Err(CfrError::BadMagic);
        }
        let version = read_u32(r)?;
        if version != POLICY_VERSION {
            return Err(CfrError::VersionMismatch {
                found: version,
                expected: POLICY_VERSION,
            });
        }
        let count = read_u32(r)? as usize;
        if count > 100_000 {
            return Err(CfrError::Malformed(format!("implausible infoset count {count}")));
        }
        let mut entries = Vec::with_capacity(count);
        for i in 0..count {
            let len = read_u32(r)? as usize;
            if len > 256 {
                return Err(CfrError::Malformed(format!("infoset {i}: key length {len}")));
            }
            let mut key = vec![0u8; len];
            read_exact(r, &mut key)?;
            let key = String::from_utf8(key)
                .map_err(|_| CfrError::Malformed(format!("infoset {i}: key is not UTF-8")))?;
            let (key, legal) = InfoSetKey::parse(&key)
                .ok_or_else(|| CfrError::Malformed(format!("infoset {i}: bad key {key:?}")))?;
            let mut strategy_sum = [0.0; 4];
            let mut regret_sum = [0.0; 4];
            for x in strategy_sum.iter_mut().chain(regret_sum.iter_mut()) {
                let mut b = [0u8; 8];
                read_exact(r, &mut b)?;
                *x = f64::from_le_bytes(b);
            }
            entries.push(InfoSetEntry {
                key,
                legal,
                regret_sum,
                strategy_sum,
            });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(CfrError::Malformed("trailing bytes".into()));
        }
        Ok(StrategyProfile::from_entries(entries, 0))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), CfrError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => CfrError::Malformed("truncated file".into()),
        _ => CfrError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CfrError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[derive(Debug, Clone, Copy)]
pub struct CfrConfig {
    /// Update one seat per traversal using the other seat's freshest strategy.
    pub alternating: bool,
}

impl Default for CfrConfig {
    fn default() -> Self {
        CfrConfig { alternating: true }
    }
}

/// Runs vanilla CFR. `_seed` is accepted for interface symmetry with sampled
/// variants; chance is enumerated exactly so the result is fully deterministic.
pub fn train(iterations: u64, _seed: u64) -> Result<StrategyProfile, CfrError> {
    train_with_checkpoints(iterations, CfrConfig::default(), &[], |_, _| {})
}

/// Like [`train`], calling `on_checkpoint` after each iteration count listed in
/// `checkpoints`.
pub fn train_with_checkpoints(
    iterations: u64,
    config: CfrConfig,
    checkpoints: &[u64],
    mut on_checkpoint: impl FnMut(u64, &StrategyProfile),
) -> Result<StrategyProfile, CfrError> {
    if iterations == 0 {
        return Err(CfrError::ZeroIterations);
    }
    let tree = PublicTree::build(LeducConfig::default());
    let mut profile = tree.empty_profile();
    let mut current = vec![ActionDist::default(); profile.entries.len()];
    for t in 1..=iterations {
        if config.alternating {
            for seat in 0..2 {
                refresh(&profile, &mut current);
                tree.cfr_pass(&mut profile, &current, seat);
            }
        } else {
            refresh(&profile, &mut current);
            let snapshot = profile.clone();
            let mut updates = [snapshot.clone(), snapshot];
            for (seat, upd) in updates.iter_mut().enumerate() {
                tree.cfr_pass(upd, &current, seat);
            }
            for (i, e) in profile.entries.iter_mut().enumerate() {
                let own = tree.infoset_seat[i];
                *e = updates[own].entries[i].clone();
            }
        }
        profile.iterations = t;
        if checkpoints.contains(&t) {
            on_checkpoint(t, &profile);
        }
    }
    Ok(profile)
}

fn refresh(profile: &StrategyProfile, current: &mut [ActionDist]) {
    for (c, e) in current.iter_mut().zip(&profile.entries) {
        *c = e.current_strategy();
    }
}

/// Sum over both seats of the best-response gain against the average strategy.
pub fn nash_conv(profile: &StrategyProfile) -> f64 {
    let tree = PublicTree::build(LeducConfig::default());
    let avg = tree.average_strategies(profile);
    let br: f64 = (0..2).map(|seat| tree.best_response_value(&avg, seat)).sum();
    let value: f64 = (0..2).map(|seat| tree.profile_value(&avg, seat)).sum();
    (br - value).max(0.0)
}

/// Expected chips for `seat` when both seats follow the average strategy.
pub fn game_value(profile: &StrategyProfile, seat: Seat) -> f64 {
    let tree = PublicTree::build(LeducConfig::default());
    let avg = tree.average_strategies(profile);
    tree.profile_value(&avg, seat)
}

/// Best-response value for `seat` against the other seat's average strategy.
pub fn best_response_value(profile: &StrategyProfile, seat: Seat) -> f64 {
    let tree = PublicTree::build(LeducConfig::default());
    let avg = tree.average_strategies(profile);
    tree.best_response_value(&avg, seat)
}

type Joint = [[f64; 3]; 3];

/// Probability that seat 0 holds rank `a` and seat 1 holds rank `b`.
pub fn hole_weight(a: Rank, b: Rank) -> f64 {
    let c = COPIES_PER_RANK as f64;
    let second = if a == b { c - 1.0 } else { c };
    (c / 6.0) * (second / 5.0)
}

/// Probability that the board is `public` given both holes.
pub fn board_weight(holes: [Rank; 2], public: Rank) -> f64 {
    let used = holes.iter().filter(|&&h| h == public).count() as f64;
    (COPIES_PER_RANK as f64 - used) / 4.0
}

enum Node {
    Decision {
        seat: Seat,
        children: Vec<(Action, usize)>,
        /// Infoset index for each own rank.
        infosets: [usize; 3],
    },
    Chance {
        children: [usize; 3],
    },
    Fold {
        folder: Seat,
        contributions: [u32; 2],
    },
    Showdown {
        public: Rank,
        contributions: [u32; 2],
    },
}

struct PublicTree {
    nodes: Vec<Node>,
    keys: Vec<(InfoSetKey, Vec<Action>)>,
    infoset_seat: Vec<Seat>,
}

impl PublicTree {
    fn build(config: LeducConfig) -> PublicTree {
        let mut tree = PublicTree {
            nodes: Vec::new(),
            keys: Vec::new(),
            infoset_seat: Vec::new(),
        };
        tree.expand(Betting::new(config), None, &mut Vec::new());
        tree
    }

    fn expand(&mut self, betting: Betting, public: Option<Rank>, events: &mut Vec<BetEvent>) -> usize {
        let seat = betting.to_act;
        let legal = betting.legal_actions();
        let mut infosets = [0; 3];
        for r in Rank::ALL {
            infosets[r.index()] = self.keys.len();
            self.keys.push((InfoSetKey::new(seat, r, public, events), legal.clone()));
            self.infoset_seat.push(seat);
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Decision {
            seat,
            children: Vec::new(),
            infosets,
        });
        let mut children = Vec::with_capacity(legal.len());
        for action in legal {
            let mut next = betting.clone();
            events.push(BetEvent {
                seat,
                round: betting.round,
                action,
            });
            let child = match next.apply(action) {
                BetOutcome::Folded(folder) => self.push(Node::Fold {
                    folder,
                    contributions: next.contributions,
                }),
                BetOutcome::RoundClosed if next.finished => self.push(Node::Showdown {
                    public: public.expect("round two has a board"),
                    contributions: next.contributions,
                }),
                BetOutcome::RoundClosed => {
                    let chance = self.push(Node::Chance { children: [0; 3] });
                    let mut kids = [0; 3];
                    for r in Rank::ALL {
                        kids[r.index()] = self.expand(next.clone(), Some(r), events);
                    }
                    self.nodes[chance] = Node::Chance { children: kids };
                    chance
                }
                BetOutcome::Continue => self.expand(next, public, events),
            };
            events.pop();
            children.push((action, child));
        }
        if let Node::Decision { children: c, .. } = &mut self.nodes[id] {
            *c = children;
        }
        id
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn empty_profile(&self) -> StrategyProfile {
        let entries = self
            .keys
            .iter()
            .map(|(key, legal)| InfoSetEntry {
                key: key.clone(),
                legal: legal.clone(),
                regret_sum: [0.0; 4],
                strategy_sum: [0.0; 4],
            })
            .collect();
        StrategyProfile::from_entries(entries, 0)
    }

    fn root_weights() -> Joint {
        let mut m = [[0.0; 3]; 3];
        for a in Rank::ALL {
            for b in Rank::ALL {
                m[a.index()][b.index()] = hole_weight(a, b);
            }
        }
        m
    }

    fn average_strategies(&self, profile: &StrategyProfile) -> Vec<ActionDist> {
        self.keys
            .iter()
            .map(|(key, legal)| profile.average_strategy(key, legal))
            .collect()
    }

    fn cfr_pass(&self, profile: &mut StrategyProfile, current: &[ActionDist], traverser: Seat) {
        self.cfr_walk(0, Self::root_weights(), [1.0; 3], profile, current, traverser);
    }

    fn cfr_walk(
        &self,
        node: usize,
        m: Joint,
        own_reach: [f64; 3],
        profile: &mut StrategyProfile,
        current: &[ActionDist],
        traverser: Seat,
    ) -> [f64; 3] {
        match &self.nodes[node] {
            Node::Decision {
                seat,
                children,
                infosets,
            } if *seat == traverser => {
                let mut child_values = [[0.0; 3]; 3];
                for (k, &(action, child)) in children.iter().enumerate() {
                    let mut reach = own_reach;
                    for r in 0..3 {
                        reach[r] *= current[infosets[r]].get(action);
                    }
                    child_values[k] = self.cfr_walk(child, m, reach, profile, current, traverser);
                }
                let mut value = [0.0; 3];
                for r in 0..3 {
                    let sigma = &current[infosets[r]];
                    for (k, &(action, _)) in children.iter().enumerate() {
                        value[r] += sigma.get(action) * child_values[k][r];
                    }
                    let entry = &mut profile.entries[infosets[r]];
                    for (k, &(action, _)) in children.iter().enumerate() {
                        entry.regret_sum[action.index()] += child_values[k][r] - value[r];
                        entry.strategy_sum[action.index()] += own_reach[r] * sigma.get(action);
                    }
                }
                value
            }
            Node::Decision {
                seat,
                children,
                infosets,
            } => {
                let mut value = [0.0; 3];
                for &(action, child) in children {
                    let scaled = scale_opponent(m, *seat, |r| current[infosets[r]].get(action));
                    if is_zero(&scaled) {
                        continue;
                    }
                    let v = self.cfr_walk(child, scaled, own_reach, profile, current, traverser);
                    add(&mut value, &v);
                }
                value
            }
            Node::Chance { children } => {
                let mut value = [0.0; 3];
                for (p, &child) in children.iter().enumerate() {
                    let v = self.cfr_walk(child, board_scaled(m, p), own_reach, profile, current, traverser);
                    add(&mut value, &v);
                }
                value
            }
            terminal => terminal_values(terminal, &m, traverser),
        }
    }

    fn best_response_value(&self, avg: &[ActionDist], responder: Seat) -> f64 {
        self.eval_walk(0, Self::root_weights(), avg, responder, true)
            .iter()
            .sum()
    }

    fn profile_value(&self, avg: &[ActionDist], seat: Seat) -> f64 {
        self.eval_walk(0, Self::root_weights(), avg, seat, false)
            .iter()
            .sum()
    }

    /// Values for `seat`'s ranks, weighted by chance and the other seat's reach.
    /// With `best_response`, `seat` maximizes at each of its information sets.
    fn eval_walk(&self, node: usize, m: Joint, avg: &[ActionDist], seat: Seat, best_response: bool) -> [f64; 3] {
        match &self.nodes[node] {
            Node::Decision {
                seat: actor,
                children,
                infosets,
            } if *actor == seat => {
                let mut value = if best_response {
                    [f64::NEG_INFINITY; 3]
                } else {
                    [0.0; 3]
                };
                for &(action, child) in children {
                    let v = self.eval_walk(child, m, avg, seat, best_response);
                    for r in 0..3 {
                        if best_response {
                            value[r] = value[r].max(v[r]);
                        } else {
                            value[r] += avg[infosets[r]].get(action) * v[r];
                        }
                    }
                }
                value
            }
            Node::Decision {
                seat: actor,
                children,
                infosets,
            } => {
                let mut value = [0.0; 3];
                for &(action, child) in children {
                    let scaled = scale_opponent(m, *actor, |r| avg[infosets[r]].get(action));
                    let v = self.eval_walk(child, scaled, avg, seat, best_response);
                    add(&mut value, &v);
                }
                value
            }
            Node::Chance { children } => {
                let mut value = [0.0; 3];
                for (p, &child) in children.iter().enumerate() {
                    let v = self.eval_walk(child, board_scaled(m, p), avg, seat, best_response);
                    add(&mut value, &v);
                }
                value
            }
            terminal => terminal_values(terminal, &m, seat),
        }
    }
}

fn scale_opponent(m: Joint, actor: Seat, prob: impl Fn(usize) -> f64) -> Joint {
    let mut out = m;
    for a in 0..3 {
        for b in 0..3 {
            let r = if actor == 0 { a } else { b };
            out[a][b] *= prob(r);
        }
    }
    out
}

fn board_scaled(m: Joint, public: usize) -> Joint {
    let mut out = m;
    let p = Rank::from_index(public);
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] *= board_weight([Rank::from_index(a), Rank::from_index(b)], p);
        }
    }
    out
}

fn terminal_values(node: &Node, m: &Joint, seat: Seat) -> [f64; 3] {
    let mut value = [0.0; 3];
    for a in 0..3 {
        for b in 0..3 {
            let w = m[a][b];
            if w == 0.0 {
                continue;
            }
            let payoff = match node {
                Node::Fold {
                    folder,
                    contributions,
                } => settle(*contributions, Winner::Seat(other(*folder))),
                Node::Showdown {
                    public,
                    contributions,
                } => settle(
                    *contributions,
                    showdown([Rank::from_index(a), Rank::from_index(b)], *public),
                ),
                _ => unreachable!("not a terminal node"),
            };
            let own = if seat == 0 { a } else { b };
            value[own] += w * payoff[seat] as f64;
        }
    }
    value
}

fn add(acc: &mut [f64; 3], v: &[f64; 3]) {
    for r in 0..3 {
        acc[r] += v[r];
    }
}

fn is_zero(m: &Joint) -> bool {
    m.iter().flatten().all(|&x| x == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameState;

    #[test]
    fn chance_weights_normalize() {
        let total: f64 = Rank::ALL
            .iter()
            .flat_map(|&a| Rank::ALL.map(move |b| (a, b)))
            .map(|(a, b)| hole_weight(a, b) * Rank::ALL.iter().map(|&p| board_weight([a, b], p)).sum::<f64>())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn key_matches_engine_observation() {
        let s = GameState::new(7, LeducConfig::default());
        let s = s.apply(Action::Raise).unwrap().apply(Action::Call).unwrap();
        let obs = s.observe(0).unwrap();
        let key = InfoSetKey::from_observation(&obs);
        let public = obs.public_card.unwrap().letter();
        assert_eq!(key.as_str(), format!("0|{}|{}|rc/", obs.private_card.letter(), public));
        let (parsed, legal) = InfoSetKey::parse(key.as_str()).unwrap();
        assert_eq!(parsed, key);
        assert_eq!(legal, obs.legal_actions);
    }

    #[test]
    fn malformed_keys_are_rejected() {
        for bad in ["", "2|K|-|", "0|K|-|c", "0|X|-|", "1|K|Q|", "0|K|-|rc/", "0|K|-|f"] {
            assert!(InfoSetKey::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn untrained_profile_is_uniform() {
        let p = StrategyProfile::untrained();
        assert_eq!(p.len(), 288);
        for e in p.entries() {
            let d = e.average_strategy();
            assert!((d.total() - 1.0).abs() < 1e-9);
            assert_eq!(d, e.current_strategy());
            for a in &e.legal {
                assert!((d.get(*a) - 1.0 / e.legal.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_iterations_rejected() {
        assert!(matches!(train(0, 0), Err(CfrError::ZeroIterations)));
    }

    #[test]
    fn unknown_key_counts_and_falls_back() {
        let p = StrategyProfile::untrained();
        let key = InfoSetKey("0|K|-|zzz".into());
        let d = p.average_strategy(&key, &[Action::Call, Action::Fold]);
        assert_eq!(d.get(Action::Call), 0.5);
        assert_eq!(p.unknown_lookups(), 1);
    }

    #[test]
    fn simultaneous_updates_also_converge() {
        let cfg = CfrConfig { alternating: false };
        let early = train_with_checkpoints(20, cfg, &[], |_, _| {}).unwrap();
        let late = train_with_checkpoints(400, cfg, &[], |_, _| {}).unwrap();
        assert!(nash_conv(&late) < nash_conv(&early));
    }

    #[test]
    fn policy_bytes_round_trip() {
        let p = train(5, 0).unwrap();
        let mut buf = Vec::new();
        p.write_to(&mut buf).unwrap();
        let q = StrategyProfile::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(p.entries(), q.entries());
    }

    #[test]
    fn policy_header_errors() {
        let p = train(2, 0).unwrap();
        let mut buf = Vec::new();
        p.write_to(&mut buf).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        let err = StrategyProfile::read_from(&mut bad.as_slice()).unwrap_err();
        assert_eq!(err.to_string(), "not a policy file");

        let mut bad = buf.clone();
        bad[8] = 9;
        assert!(matches!(
            StrategyProfile::read_from(&mut bad.as_slice()),
            Err(CfrError::VersionMismatch { found: 9, .. })
        ));

        let truncated = &buf[..buf.len() - 3];
        assert!(matches!(
            StrategyProfile::read_from(&mut &truncated[..]),
            Err(CfrError::Malformed(_))
        ));

        let mut extra = buf.clone();
        extra.push(0);
        assert!(StrategyProfile::read_from(&mut extra.as_slice()).is_err());
    }
}
