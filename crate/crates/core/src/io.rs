//! JSON file formats: games, joint distributions, variation families and
//! graphs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::clique::Graph;
use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, PureProfile, VariationFamily, VariationMap};

/// Environment variable overriding [`DEFAULT_MAX_PROFILES`].
pub const MAX_PROFILES_ENV: &str = "KANTIAN_SOLVE_MAX_PROFILES";
pub const DEFAULT_MAX_PROFILES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub players: usize,
    pub actions: Vec<Vec<String>>,
    pub payoffs: Vec<PayoffEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffEntry {
    pub profile: Vec<String>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionEntry {
    pub profile: Vec<String>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub maps: Vec<FamilyEntry>,
}

/// One variation map, given as `action -> image` over the common action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub label: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum GraphDocument {
    Wrapped { adjacency: Vec<Vec<usize>> },
    Lists(Vec<Vec<usize>>),
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        parse_error(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Profile cap from the environment, falling back to the default.
pub fn max_profiles() -> usize {
    std::env::var(MAX_PROFILES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_PROFILES)
}

pub fn parse_game(text: &str) -> Result<Game> {
    parse_game_with_limit(text, max_profiles())
}

pub fn parse_game_with_limit(text: &str, limit: usize) -> Result<Game> {
    let doc: GameDocument = from_json(text)?;
    game_from_document(&doc, limit)
}

pub fn game_from_document(doc: &GameDocument, limit: usize) -> Result<Game> {
    let n = doc.players;
    if n == 0 {
        return Err(parse_error("players", "a game needs at least one player"));
    }
    if doc.actions.len() != n {
        return Err(parse_error(
            "actions",
            format!("{} action lists for {n} players", doc.actions.len()),
        ));
    }
    let mut total: usize = 1;
    for (player, names) in doc.actions.iter().enumerate() {
        if names.is_empty() {
            return Err(parse_error(
                format!("actions[{player}]"),
                "player has no actions",
            ));
        }
        total = total.saturating_mul(names.len());
    }
    if total > limit {
        return Err(Error::SizeLimit(format!(
            "{total} pure profiles exceed the cap of {limit} (set {MAX_PROFILES_ENV} to raise it)"
        )));
    }

    let lookup: Vec<HashMap<&str, usize>> = doc
        .actions
        .iter()
        .map(|names| {
            names
                .iter()
                .enumerate()
                .map(|(k, a)| (a.as_str(), k))
                .collect()
        })
        .collect();
    let mut table: HashMap<Vec<usize>, Vec<f64>> = HashMap::with_capacity(doc.payoffs.len());
    for (k, entry) in doc.payoffs.iter().enumerate() {
        let location = format!("payoffs[{k}]");
        if entry.profile.len() != n {
            return Err(parse_error(
                location,
                format!("profile has {} actions, expected {n}", entry.profile.len()),
            ));
        }
        if entry.u.len() != n {
            return Err(parse_error(
                location,
                format!("utility vector has {} entries, expected {n}", entry.u.len()),
            ));
        }
        let mut choices = Vec::with_capacity(n);
        for (player, name) in entry.profile.iter().enumerate() {
            match lookup[player].get(name.as_str()) {
                Some(&a) => choices.push(a),
                None => {
                    return Err(parse_error(
                        location,
                        format!("unknown action '{name}' for player {player}"),
                    ))
                }
            }
        }
        if table.insert(choices, entry.u.clone()).is_some() {
            return Err(parse_error(
                location,
                format!("duplicate entry for profile {:?}", entry.profile),
            ));
        }
    }

    // Coverage: every profile must have an entry.
    let mut missing: Option<PureProfile> = None;
    let game = Game::from_fn(doc.actions.clone(), |profile| {
        match table.get(profile.choices()) {
            Some(u) => u.clone(),
            None => {
                missing.get_or_insert_with(|| profile.clone());
                vec![0.0; n]
            }
        }
    })
    .map_err(|e| match e {
        Error::InvalidGame(message) => parse_error("actions", message),
        other => other,
    })?;
    if let Some(profile) = missing {
        return Err(parse_error(
            "payoffs",
            format!("no entry for profile {:?}", game.profile_names(&profile)),
        ));
    }
    Ok(game)
}

pub fn to_document(game: &Game) -> GameDocument {
    GameDocument {
        players: game.num_players(),
        actions: game.actions().to_vec(),
        payoffs: game
            .profiles()
            .map(|profile| PayoffEntry {
                profile: game.profile_names(&profile),
                u: game.utility(&profile).expect("profile from game").to_vec(),
            })
            .collect(),
    }
}

/// Pretty-printed JSON; floats use the shortest representation that reads
/// back to the same value.
pub fn serialize_game(game: &Game) -> String {
    serde_json::to_string_pretty(&to_document(game)).expect("game documents always serialize")
}

pub fn parse_distribution(game: &Game, text: &str) -> Result<JointDistribution> {
    let entries: Vec<DistributionEntry> = from_json(text)?;
    let mut support = Vec::with_capacity(entries.len());
    for (k, entry) in entries.iter().enumerate() {
        let profile = game
            .profile_from_names(&entry.profile)
            .map_err(|e| parse_error(format!("[{k}]"), e.to_string()))?;
        support.push((profile, entry.p));
    }
    JointDistribution::new(support)
}

pub fn distribution_entries(game: &Game, dist: &JointDistribution) -> Vec<DistributionEntry> {
    dist.iter()
        .map(|(profile, p)| DistributionEntry {
            profile: game.profile_names(profile),
            p,
        })
        .collect()
}

/// Reads a variation family over the game's common action set. Every map
/// must be total.
pub fn parse_family(game: &Game, text: &str) -> Result<VariationFamily> {
    let doc: FamilyDocument = from_json(text)?;
    let actions = game.common_actions().ok_or_else(|| {
        Error::UnsupportedGame("variation families need identical action sets".into())
    })?;
    let index = |name: &str, location: &str| {
        actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| parse_error(location, format!("unknown action '{name}'")))
    };
    let mut maps = Vec::with_capacity(doc.maps.len());
    for (k, entry) in doc.maps.iter().enumerate() {
        let location = format!("maps[{k}]");
        for from in entry.map.keys() {
            index(from, &location)?;
        }
        let table = actions
            .iter()
            .map(|a| match entry.map.get(a) {
                Some(to) => index(to, &location),
                None => Err(parse_error(
                    location.as_str(),
                    format!("map '{}' does not cover action '{a}'", entry.label),
                )),
            })
            .collect::<Result<Vec<usize>>>()?;
        maps.push(VariationMap {
            label: entry.label.clone(),
            table,
        });
    }
    VariationFamily::new(actions.len(), maps)
}

/// Reads neighbor lists, either bare or under an `"adjacency"` key.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let lists = match from_json::<GraphDocument>(text)? {
        GraphDocument::Wrapped { adjacency } => adjacency,
        GraphDocument::Lists(lists) => lists,
    };
    Graph::from_adjacency_lists(&lists)
}
