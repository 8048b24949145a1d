//! Pareto-optimal pure profiles.

use std::cmp::Ordering;

use crate::game::{strictly_dominates, Game, PureProfile};

/// Pure profiles not strictly dominated by any other profile, in
/// lexicographic order, with their payoff vectors alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSet {
    pub profiles: Vec<PureProfile>,
    pub payoffs: Vec<Vec<f64>>,
}

impl ParetoSet {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn contains(&self, profile: &PureProfile) -> bool {
        self.profiles.binary_search(profile).is_ok()
    }

    pub fn position(&self, profile: &PureProfile) -> Option<usize> {
        self.profiles.binary_search(profile).ok()
    }

    pub fn num_players(&self) -> usize {
        self.payoffs.first().map_or(0, Vec::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureProfile, &[f64])> {
        self.profiles
            .iter()
            .zip(self.payoffs.iter().map(Vec::as_slice))
    }
}

/// Enumerates the Pareto-optimal pure profiles of `game`.
///
/// Profiles are visited in decreasing order of utility sum, ties broken by
/// decreasing payoff vector. A strict dominator always precedes what it
/// dominates in that order, and dominance is transitive, so comparing each
/// profile against the members kept so far is exact. Payoff-tied profiles
/// are all kept.
pub fn pareto_optimal_profiles(game: &Game) -> ParetoSet {
    let mut order: Vec<(usize, f64)> = (0..game.num_profiles())
        .map(|k| (k, game.utility_at(k).iter().sum()))
        .collect();
    order.sort_by(|(a, sa), (b, sb)| {
        sb.partial_cmp(sa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| compare_vectors(game.utility_at(*b), game.utility_at(*a)))
            .then_with(|| a.cmp(b))
    });

    let mut kept: Vec<usize> = Vec::new();
    for (k, _) in order {
        let u = game.utility_at(k);
        if !kept
            .iter()
            .any(|&j| strictly_dominates(game.utility_at(j), u))
        {
            kept.push(k);
        }
    }
    kept.sort_unstable();

    ParetoSet {
        profiles: kept.iter().map(|&k| game.profile_at(k)).collect(),
        payoffs: kept.iter().map(|&k| game.utility_at(k).to_vec()).collect(),
    }
}

fn compare_vectors(u: &[f64], v: &[f64]) -> Ordering {
    for (a, b) in u.iter().zip(v) {
        match a.partial_cmp(b) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}
