use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::Action;

/// A probability distribution over the four actions, indexed in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionDist(pub [f64; 4]);

impl ActionDist {
    pub fn uniform(legal: &[Action]) -> ActionDist {
        let mut p = [0.0; 4];
        if legal.is_empty() {
            return ActionDist(p);
        }
        let w = 1.0 / legal.len() as f64;
        for a in legal {
            p[a.index()] = w;
        }
        ActionDist(p)
    }

    pub fn point(action: Action) -> ActionDist {
        let mut p = [0.0; 4];
        p[action.index()] = 1.0;
        ActionDist(p)
    }

    pub fn from_pairs(pairs: &[(Action, f64)]) -> ActionDist {
        let mut p = [0.0; 4];
        for &(a, w) in pairs {
            p[a.index()] += w;
        }
        ActionDist(p)
    }

    pub fn get(&self, action: Action) -> f64 {
        self.0[action.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Zeroes illegal actions and renormalizes; falls back to uniform over
    /// `legal` when no legal action carries mass.
    pub fn restricted_to(&self, legal: &[Action]) -> ActionDist {
        let mut p = [0.0; 4];
        for a in legal {
            p[a.index()] = self.0[a.index()].max(0.0);
        }
        let total: f64 = p.iter().sum();
        if total <= 0.0 {
            return ActionDist::uniform(legal);
        }
        p.iter_mut().for_each(|x| *x /= total);
        ActionDist(p)
    }

    /// Maps mass onto `legal` the way a player would read a loose plan:
    /// Call and Check stand in for each other, an impossible Fold becomes the
    /// passive action, and an impossible Raise becomes a Call (or Check).
    pub fn resolve_to(&self, legal: &[Action]) -> ActionDist {
        let passive = if legal.contains(&Action::Call) {
            Action::Call
        } else {
            Action::Check
        };
        let mut p = [0.0; 4];
        for a in Action::ALL {
            let target = match a {
                Action::Call | Action::Check => passive,
                _ if legal.contains(&a) => a,
                _ => passive,
            };
            p[target.index()] += self.get(a).max(0.0);
        }
        ActionDist(p).restricted_to(legal)
    }

    pub fn support(&self) -> impl Iterator<Item = (Action, f64)> + '_ {
        Action::ALL
            .into_iter()
            .map(|a| (a, self.get(a)))
            .filter(|&(_, p)| p > 0.0)
    }

    /// Inverse-CDF sample. Always returns an action with positive mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        let total = self.total();
        let mut u = rng.random::<f64>() * total;
        let mut last = None;
        for (a, p) in self.support() {
            if u < p {
                return a;
            }
            u -= p;
            last = Some(a);
        }
        last.expect("sampling from an empty distribution")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn restriction_renormalizes() {
        let d = ActionDist::from_pairs(&[(Action::Raise, 0.5), (Action::Fold, 0.5)]);
        let r = d.restricted_to(&[Action::Raise, Action::Check]);
        assert_eq!(r.get(Action::Raise), 1.0);
        assert_eq!(r.get(Action::Fold), 0.0);
        let u = d.restricted_to(&[Action::Check]);
        assert_eq!(u.get(Action::Check), 1.0);
    }

    #[test]
    fn resolve_moves_passive_and_impossible_mass() {
        let d = ActionDist::from_pairs(&[(Action::Raise, 0.6), (Action::Call, 0.3), (Action::Fold, 0.1)]);
        let r = d.resolve_to(&[Action::Raise, Action::Check]);
        assert!((r.get(Action::Raise) - 0.6).abs() < 1e-12);
        assert!((r.get(Action::Check) - 0.4).abs() < 1e-12);
        let r = d.resolve_to(&[Action::Call, Action::Fold]);
        assert!((r.get(Action::Call) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn point_mass_ignores_rng() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = ActionDist::point(Action::Call);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut rng), Action::Call);
        }
    }
}
