//! Seeded generators for random structures and formulas.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cgs::{self, GameStructure, StateSpec, StructureSpec, TransitionSpec};
use crate::parser::{Formula, Players};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub states: usize,
    pub players: usize,
    /// Each player gets between 1 and `max_moves` moves at each state.
    pub max_moves: usize,
    pub propositions: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            states: 5,
            players: 2,
            max_moves: 2,
            propositions: 2,
        }
    }
}

pub fn player_name(i: usize) -> String {
    format!("{}", i + 1)
}

pub fn proposition_name(i: usize) -> String {
    format!("p{i}")
}

/// A random total structure with the given shape. State `i` is named `s{i}`.
pub fn random_structure<R: Rng + ?Sized>(rng: &mut R, params: &RandomParams) -> GameStructure {
    assert!(params.states >= 1 && params.players >= 1 && params.max_moves >= 1);
    let players: Vec<String> = (0..params.players).map(player_name).collect();
    let propositions: Vec<String> = (0..params.propositions).map(proposition_name).collect();
    let state_names: Vec<String> = (0..params.states).map(|i| format!("s{i}")).collect();

    let states = state_names
        .iter()
        .map(|name| StateSpec {
            name: name.clone(),
            labels: propositions
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect(),
        })
        .collect();

    let mut alternatives = vec![Vec::new(); params.states];
    let mut moves: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for player in &players {
        let table = moves.entry(player.clone()).or_default();
        for (q, name) in state_names.iter().enumerate() {
            let count = rng.gen_range(1..=params.max_moves);
            let listed: Vec<String> = (0..count).map(|m| format!("m{m}")).collect();
            alternatives[q].push(listed.clone());
            table.insert(name.clone(), listed);
        }
    }

    let mut transitions = Vec::new();
    for (q, alts) in alternatives.iter().enumerate() {
        let mut vectors: Vec<Vec<String>> = vec![Vec::new()];
        for alt in alts {
            vectors = vectors
                .into_iter()
                .flat_map(|prefix| {
                    alt.iter().map(move |m| {
                        let mut v = prefix.clone();
                        v.push(m.clone());
                        v
                    })
                })
                .collect();
        }
        for vector in vectors {
            transitions.push(TransitionSpec {
                from: state_names[q].clone(),
                vector,
                to: state_names.choose(rng).unwrap().clone(),
            });
        }
    }

    cgs::validate(&StructureSpec {
        players,
        propositions,
        states,
        moves,
        transitions,
    })
    .expect("generated structure is valid")
}

/// A random subset of the structure's players, as written in formulas.
pub fn random_players<R: Rng + ?Sized>(rng: &mut R, players: usize) -> Players {
    Players(
        (0..players)
            .filter(|_| rng.gen_bool(0.5))
            .map(player_name)
            .collect(),
    )
}

/// A random formula of depth at most `depth` over `p0..p{propositions}`
/// and players `1..=players`.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    propositions: usize,
    players: usize,
    depth: usize,
) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..8) {
        0 => Formula::True,
        1 => Formula::False,
        _ if propositions == 0 => Formula::True,
        _ => Formula::Atom(proposition_name(rng.gen_range(0..propositions))),
    };
    if depth <= 1 || rng.gen_range(0..4) == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_formula(rng, propositions, players, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::imply(sub(rng), sub(rng)),
        4 => Formula::next(random_players(rng, players), sub(rng)),
        5 => Formula::always(random_players(rng, players), sub(rng)),
        6 => Formula::eventually(random_players(rng, players), sub(rng)),
        _ => {
            let p = random_players(rng, players);
            Formula::until(p, sub(rng), sub(rng))
        }
    }
}
