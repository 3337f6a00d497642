//! Natural-language descriptions of the game and of the observation record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::game::{Action, Observation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDescription {
    pub general_rules: String,
    pub action_descriptions: BTreeMap<Action, String>,
    pub single_win_loss_rule: String,
    pub win_loss_payoff_rule: String,
    pub whole_win_loss_rule: String,
}

impl RuleDescription {
    pub fn leduc() -> RuleDescription {
        let actions = [
            (Action::Call, "Put in chips to match the opponent's bet."),
            (Action::Raise, "Match the opponent's bet and add a fixed amount: 2 chips in the first round, 4 in the second. At most two raises per round."),
            (Action::Fold, "Give up the game and lose the chips already in the pot."),
            (Action::Check, "Pass without betting; only possible when no bet is pending."),
        ];
        RuleDescription {
            general_rules: "Two players play a short poker game with a six-card deck: two Jacks, two Queens and two Kings. \
                Each player is dealt one private card. The first player posts a blind of 1 chip and the second a blind of 2. \
                After a first betting round one public card is revealed and a second betting round follows. \
                The first player acts first in both rounds."
                .into(),
            action_descriptions: actions.into_iter().map(|(a, d)| (a, d.to_owned())).collect(),
            single_win_loss_rule: "If a player folds, the other player wins. Otherwise, at showdown, a player whose private card \
                matches the public card wins; if neither matches, the higher rank wins (King > Queen > Jack); equal ranks draw."
                .into(),
            win_loss_payoff_rule: "The winner gains the chips the loser put in the pot; at showdown that is half of the pot. \
                A draw returns every chip. A single game moves between 1 and 14 chips."
                .into(),
            whole_win_loss_rule: "A match is many games against the same opponent; the goal is to finish with more chips than \
                you started with."
                .into(),
        }
    }

    pub fn is_complete(&self) -> bool {
        !self.general_rules.trim().is_empty()
            && !self.single_win_loss_rule.trim().is_empty()
            && !self.win_loss_payoff_rule.trim().is_empty()
            && !self.whole_win_loss_rule.trim().is_empty()
            && Action::ALL
                .iter()
                .all(|a| self.action_descriptions.get(a).is_some_and(|d| !d.trim().is_empty()))
    }

    pub fn render(&self) -> String {
        let mut out = format!("General rules: {}\n", self.general_rules);
        for (a, d) in &self.action_descriptions {
            out.push_str(&format!("- {}: {}\n", a.name(), d));
        }
        out.push_str(&format!(
            "Single-game win/loss: {}\nPayoff: {}\nWhole match: {}",
            self.single_win_loss_rule, self.win_loss_payoff_rule, self.whole_win_loss_rule
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsConversionRule {
    pub input_explanation: String,
    pub element_descriptions: BTreeMap<String, String>,
    pub conversion_tips: String,
}

impl ObsConversionRule {
    pub fn leduc() -> ObsConversionRule {
        let elements = [
            ("player", "Your seat: 0 acts first in each round, 1 acts second."),
            ("private_card", "Your private card: Jack, Queen or King."),
            ("public_card", "The public card, or null before the second round."),
            ("pot_contribution", "Chips put in the pot so far, indexed by seat."),
            ("legal_actions", "The actions you may take now."),
            ("round", "The betting round, 1 or 2."),
            ("betting_sequence_public", "Every action taken so far in this game, with the seat and round of each."),
        ];
        ObsConversionRule {
            input_explanation: "The observation is a JSON object describing what you can see at your turn. It never contains the opponent's card."
                .into(),
            element_descriptions: elements.into_iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect(),
            conversion_tips: "Name the cards by rank, say plainly when the public card is not revealed, state both pot \
                contributions, and list the legal actions. Do not speculate about the opponent's card."
                .into(),
        }
    }

    /// Names of observation fields without a description.
    pub fn uncovered_fields(&self, obs: &Observation) -> Vec<String> {
        let value = serde_json::to_value(obs).expect("observations serialize");
        value
            .as_object()
            .map(|o| o.keys().filter(|k| !self.element_descriptions.contains_key(*k)).cloned().collect())
            .unwrap_or_default()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.input_explanation);
        for (k, v) in &self.element_descriptions {
            out.push_str(&format!("- {k}: {v}\n"));
        }
        out.push_str(&self.conversion_tips);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameState, LeducConfig};

    #[test]
    fn leduc_descriptions_are_complete() {
        assert!(RuleDescription::leduc().is_complete());
        let obs = GameState::new(0, LeducConfig::default()).observe(0).unwrap();
        assert!(ObsConversionRule::leduc().uncovered_fields(&obs).is_empty());
        let mut partial = ObsConversionRule::leduc();
        partial.element_descriptions.remove("round");
        assert_eq!(partial.uncovered_fields(&obs), vec!["round".to_owned()]);
    }
}
