//! Concurrent game structures.
//!
//! A [`GameStructure`] is the validated, immutable form of a model: players,
//! states, propositions with their labelling, the moves available to each
//! player at each state, and a transition function that is total on the full
//! product of those moves. Names are only kept for I/O; everything else is
//! addressed through dense integer ids.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::set::SatSet;

macro_rules! dense_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(u32);

        impl $name {
            pub fn new(index: usize) -> Self {
                $name(u32::try_from(index).expect("id overflows u32"))
            }

            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_id!(
    /// Index of a player in the structure's player list.
    PlayerId
);
dense_id!(
    /// Index of a state in the structure's state list.
    StateId
);
dense_id!(
    /// Index of a move symbol in the structure's move alphabet.
    MoveId
);
dense_id!(
    /// Index of a proposition.
    PropId
);

/// One move per player, in player order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MoveVector(pub Vec<MoveId>);

impl MoveVector {
    pub fn moves(&self) -> &[MoveId] {
        &self.0
    }
}

/// A set of players acting together. Members are kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(Vec<PlayerId>);

impl Coalition {
    pub fn new<I: IntoIterator<Item = PlayerId>>(members: I) -> Self {
        let mut members: Vec<_> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Coalition(members)
    }

    pub fn empty() -> Self {
        Coalition(Vec::new())
    }

    /// The grand coalition of a structure with `players` players.
    pub fn all(players: usize) -> Self {
        Coalition((0..players).map(PlayerId::new).collect())
    }

    pub fn members(&self) -> &[PlayerId] {
        &self.0
    }

    pub fn contains(&self, player: PlayerId) -> bool {
        self.0.binary_search(&player).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Coalition) -> bool {
        self.0.iter().all(|&p| other.contains(p))
    }
}

/// Unvalidated, name-based description of a structure.
///
/// This is the shape of a model document minus its version tag.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub players: Vec<String>,
    pub propositions: Vec<String>,
    pub states: Vec<StateSpec>,
    /// player name -> state name -> available moves
    pub moves: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub transitions: Vec<TransitionSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpec {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub from: String,
    pub vector: Vec<String>,
    pub to: String,
}

/// A single well-formedness violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("structure has no players")]
    EmptyPlayers,
    #[error("structure has no states")]
    EmptyStates,
    #[error("duplicate player `{0}`")]
    DuplicatePlayer(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate proposition `{0}`")]
    DuplicateProposition(String),
    #[error("moves given for unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("player `{player}` has no moves at state `{state}`")]
    EmptyAlternatives { player: String, state: String },
    #[error("player `{player}` lists move `{symbol}` twice at state `{state}`")]
    DuplicateMove {
        player: String,
        state: String,
        symbol: String,
    },
    #[error("invalid move symbol `{0}`: must be nonempty without whitespace")]
    InvalidMoveSymbol(String),
    #[error("state `{state}` is labelled with unknown proposition `{proposition}`")]
    UnknownProposition { state: String, proposition: String },
    #[error(
        "transition from `{state}` has vector {vector} of length {found}, expected {expected}"
    )]
    WrongVectorLength {
        state: String,
        vector: String,
        found: usize,
        expected: usize,
    },
    #[error("move `{symbol}` of player `{player}` is not available at state `{state}`")]
    UnknownMove {
        player: String,
        state: String,
        symbol: String,
    },
    #[error("duplicate transition for state `{state}` and vector {vector}")]
    DuplicateTransition { state: String, vector: String },
    #[error("missing transition for state `{state}` and vector {vector}")]
    MissingTransition { state: String, vector: String },
}

/// All violations found while validating one structure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Diagnostics(pub Vec<ValidationError>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, err) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{err}")?;
        }
        Ok(())
    }
}

impl Diagnostics {
    pub fn errors(&self) -> &[ValidationError] {
        &self.0
    }
}

/// Errors from accessors on a validated structure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CgsError {
    #[error("unknown state id {0}")]
    UnknownState(usize),
    #[error("unknown state `{0}`")]
    UnknownStateName(String),
    #[error("move vector {vector} is not available at state `{state}`")]
    UnknownMoveVector { state: String, vector: String },
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown move `{0}`")]
    UnknownMove(String),
}

#[derive(Debug, Clone)]
struct StateData {
    labels: Vec<PropId>,
    /// `alternatives[a]` is d_a(q) in listed order.
    alternatives: Vec<Vec<MoveId>>,
    /// Mixed-radix strides for each player, player 0 most significant.
    strides: Vec<usize>,
    /// Successor for each flat move-vector index.
    successors: Vec<StateId>,
}

/// A validated concurrent game structure.
#[derive(Debug, Clone)]
pub struct GameStructure {
    players: Vec<String>,
    states: Vec<String>,
    propositions: Vec<String>,
    moves: Vec<String>,
    data: Vec<StateData>,
    labelled: Vec<SatSet>,
    player_index: HashMap<String, PlayerId>,
    state_index: HashMap<String, StateId>,
    prop_index: HashMap<String, PropId>,
    move_index: HashMap<String, MoveId>,
    fingerprint: u64,
}

fn render_vector(symbols: &[impl AsRef<str>]) -> String {
    let parts: Vec<&str> = symbols.iter().map(AsRef::as_ref).collect();
    format!("<{}>", parts.join(","))
}

fn valid_symbol(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

/// Checks a structure description and builds the immutable structure.
///
/// Every violation is reported, not just the first.
pub fn validate(spec: &StructureSpec) -> Result<GameStructure, Diagnostics> {
    let mut errors = Vec::new();

    if spec.players.is_empty() {
        errors.push(ValidationError::EmptyPlayers);
    }
    if spec.states.is_empty() {
        errors.push(ValidationError::EmptyStates);
    }

    let mut player_index = HashMap::new();
    for (i, name) in spec.players.iter().enumerate() {
        if player_index
            .insert(name.clone(), PlayerId::new(i))
            .is_some()
        {
            errors.push(ValidationError::DuplicatePlayer(name.clone()));
        }
    }
    let mut state_index = HashMap::new();
    for (i, st) in spec.states.iter().enumerate() {
        if state_index
            .insert(st.name.clone(), StateId::new(i))
            .is_some()
        {
            errors.push(ValidationError::DuplicateState(st.name.clone()));
        }
    }
    let mut prop_index = HashMap::new();
    for (i, p) in spec.propositions.iter().enumerate() {
        if prop_index.insert(p.clone(), PropId::new(i)).is_some() {
            errors.push(ValidationError::DuplicateProposition(p.clone()));
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }

    let k = spec.players.len();
    let n = spec.states.len();

    for player in spec.moves.keys() {
        if !player_index.contains_key(player) {
            errors.push(ValidationError::UnknownPlayer(player.clone()));
        }
    }
    for per_state in spec.moves.values() {
        for state in per_state.keys() {
            if !state_index.contains_key(state) {
                errors.push(ValidationError::UnknownState(state.clone()));
            }
        }
    }

    // Intern move symbols in first-seen order: players, then states.
    let mut moves: Vec<String> = Vec::new();
    let mut move_index: HashMap<String, MoveId> = HashMap::new();
    let mut data: Vec<StateData> = Vec::with_capacity(n);
    let mut labelled = vec![SatSet::empty(n); spec.propositions.len()];

    for (qi, st) in spec.states.iter().enumerate() {
        let mut labels = Vec::new();
        for p in &st.labels {
            match prop_index.get(p) {
                Some(&id) => {
                    if !labels.contains(&id) {
                        labels.push(id);
                        labelled[id.index()].insert(StateId::new(qi));
                    }
                }
                None => errors.push(ValidationError::UnknownProposition {
                    state: st.name.clone(),
                    proposition: p.clone(),
                }),
            }
        }
        labels.sort_unstable();

        let mut alternatives = Vec::with_capacity(k);
        for player in &spec.players {
            let listed = spec
                .moves
                .get(player)
                .and_then(|m| m.get(&st.name))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            if listed.is_empty() {
                errors.push(ValidationError::EmptyAlternatives {
                    player: player.clone(),
                    state: st.name.clone(),
                });
            }
            let mut alt: Vec<MoveId> = Vec::with_capacity(listed.len());
            for sym in listed {
                if !valid_symbol(sym) {
                    errors.push(ValidationError::InvalidMoveSymbol(sym.clone()));
                    continue;
                }
                let id = *move_index.entry(sym.clone()).or_insert_with(|| {
                    moves.push(sym.clone());
                    MoveId::new(moves.len() - 1)
                });
                if alt.contains(&id) {
                    errors.push(ValidationError::DuplicateMove {
                        player: player.clone(),
                        state: st.name.clone(),
                        symbol: sym.clone(),
                    });
                } else {
                    alt.push(id);
                }
            }
            alternatives.push(alt);
        }

        let mut strides = vec![1usize; k];
        for a in (0..k.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * alternatives[a + 1].len().max(1);
        }
        let total: usize = alternatives.iter().map(|alt| alt.len()).product();
        data.push(StateData {
            labels,
            alternatives,
            strides,
            successors: Vec::with_capacity(total),
        });
    }

    // Fill transition tables; `None` marks a vector not yet covered.
    let mut tables: Vec<Vec<Option<StateId>>> = data
        .iter()
        .map(|d| vec![None; d.alternatives.iter().map(Vec::len).product()])
        .collect();

    for t in &spec.transitions {
        let Some(&from) = state_index.get(&t.from) else {
            errors.push(ValidationError::UnknownState(t.from.clone()));
            continue;
        };
        let Some(&to) = state_index.get(&t.to) else {
            errors.push(ValidationError::UnknownState(t.to.clone()));
            continue;
        };
        if t.vector.len() != k {
            errors.push(ValidationError::WrongVectorLength {
                state: t.from.clone(),
                vector: render_vector(&t.vector),
                found: t.vector.len(),
                expected: k,
            });
            continue;
        }
        let d = &data[from.index()];
        let mut flat = 0;
        let mut ok = true;
        for (a, sym) in t.vector.iter().enumerate() {
            let pos = move_index
                .get(sym)
                .and_then(|id| d.alternatives[a].iter().position(|m| m == id));
            match pos {
                Some(pos) => flat += pos * d.strides[a],
                None => {
                    errors.push(ValidationError::UnknownMove {
                        player: spec.players[a].clone(),
                        state: t.from.clone(),
                        symbol: sym.clone(),
                    });
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let slot = &mut tables[from.index()][flat];
        if slot.is_some() {
            errors.push(ValidationError::DuplicateTransition {
                state: t.from.clone(),
                vector: render_vector(&t.vector),
            });
        } else {
            *slot = Some(to);
        }
    }

    for (qi, table) in tables.iter().enumerate() {
        let d = &data[qi];
        if d.alternatives.iter().any(Vec::is_empty) {
            continue;
        }
        for (flat, slot) in table.iter().enumerate() {
            if slot.is_none() {
                let symbols: Vec<&str> = (0..k)
                    .map(|a| {
                        let pos = (flat / d.strides[a]) % d.alternatives[a].len();
                        moves[d.alternatives[a][pos].index()].as_str()
                    })
                    .collect();
                errors.push(ValidationError::MissingTransition {
                    state: spec.states[qi].name.clone(),
                    vector: render_vector(&symbols),
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }

    for (d, table) in data.iter_mut().zip(tables) {
        d.successors = table.into_iter().map(Option::unwrap).collect();
    }

    let mut structure = GameStructure {
        players: spec.players.clone(),
        states: spec.states.iter().map(|s| s.name.clone()).collect(),
        propositions: spec.propositions.clone(),
        moves,
        data,
        labelled,
        player_index,
        state_index,
        prop_index,
        move_index,
        fingerprint: 0,
    };
    structure.fingerprint = structure.compute_fingerprint();
    Ok(structure)
}

impl GameStructure {
    fn compute_fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.players.hash(&mut h);
        self.states.hash(&mut h);
        self.propositions.hash(&mut h);
        self.moves.hash(&mut h);
        for d in &self.data {
            d.labels.hash(&mut h);
            d.alternatives.hash(&mut h);
            d.successors.hash(&mut h);
        }
        h.finish()
    }

    /// Content hash identifying this structure; used to tie cached relations
    /// to the structure they were built from.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn player_names(&self) -> &[String] {
        &self.players
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn player_name(&self, a: PlayerId) -> &str {
        &self.players[a.index()]
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn move_symbol(&self, m: MoveId) -> &str {
        &self.moves[m.index()]
    }

    pub fn player_id(&self, name: &str) -> Option<PlayerId> {
        self.player_index.get(name).copied()
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn move_id(&self, symbol: &str) -> Option<MoveId> {
        self.move_index.get(symbol).copied()
    }

    pub fn state_ids(&self) -> impl ExactSizeIterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId::new)
    }

    pub fn player_ids(&self) -> impl ExactSizeIterator<Item = PlayerId> + '_ {
        (0..self.players.len()).map(PlayerId::new)
    }

    pub fn all_states(&self) -> SatSet {
        SatSet::full(self.num_states())
    }

    pub fn no_states(&self) -> SatSet {
        SatSet::empty(self.num_states())
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::all(self.num_players())
    }

    /// Resolves player names to a coalition.
    pub fn coalition<S: AsRef<str>>(&self, names: &[S]) -> Result<Coalition, CgsError> {
        names
            .iter()
            .map(|n| {
                self.player_id(n.as_ref())
                    .ok_or_else(|| CgsError::UnknownPlayer(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Coalition::new)
    }

    fn state_data(&self, q: StateId) -> Result<&StateData, CgsError> {
        self.data
            .get(q.index())
            .ok_or(CgsError::UnknownState(q.index()))
    }

    /// d_a(q): the moves available to `a` at `q`, in listed order.
    pub fn alternatives(&self, a: PlayerId, q: StateId) -> &[MoveId] {
        &self.data[q.index()].alternatives[a.index()]
    }

    /// Propositions true at `q`.
    pub fn labels(&self, q: StateId) -> impl Iterator<Item = &str> + '_ {
        self.data[q.index()]
            .labels
            .iter()
            .map(|p| self.propositions[p.index()].as_str())
    }

    pub fn has_label(&self, q: StateId, proposition: &str) -> bool {
        self.prop_index
            .get(proposition)
            .is_some_and(|p| self.labelled[p.index()].contains(q))
    }

    /// Number of move vectors at `q`, i.e. |d_1(q) x ... x d_k(q)|.
    pub fn vector_count(&self, q: StateId) -> usize {
        self.data[q.index()].successors.len()
    }

    /// Successor table at `q` indexed by flat move-vector index.
    pub(crate) fn successor_table(&self, q: StateId) -> &[StateId] {
        &self.data[q.index()].successors
    }

    pub(crate) fn stride(&self, q: StateId, a: PlayerId) -> usize {
        self.data[q.index()].strides[a.index()]
    }

    /// Decodes a flat index at `q` into the move vector it stands for.
    pub(crate) fn vector_at(&self, q: StateId, flat: usize) -> MoveVector {
        let d = &self.data[q.index()];
        MoveVector(
            d.alternatives
                .iter()
                .zip(&d.strides)
                .map(|(alt, &stride)| alt[(flat / stride) % alt.len()])
                .collect(),
        )
    }

    fn flat_index(&self, q: StateId, mv: &MoveVector) -> Option<usize> {
        let d = self.data.get(q.index())?;
        if mv.0.len() != d.alternatives.len() {
            return None;
        }
        let mut flat = 0;
        for ((m, alt), stride) in mv.0.iter().zip(&d.alternatives).zip(&d.strides) {
            flat += alt.iter().position(|x| x == m)? * stride;
        }
        Some(flat)
    }

    /// Builds a move vector from move symbols given in player order.
    pub fn vector<S: AsRef<str>>(&self, symbols: &[S]) -> Result<MoveVector, CgsError> {
        symbols
            .iter()
            .map(|s| {
                self.move_id(s.as_ref())
                    .ok_or_else(|| CgsError::UnknownMove(s.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(MoveVector)
    }

    pub fn render_vector(&self, mv: &MoveVector) -> String {
        let symbols: Vec<&str> = mv.0.iter().map(|&m| self.move_symbol(m)).collect();
        render_vector(&symbols)
    }

    /// D(q): every move vector at `q`, in mixed-radix order with player 0
    /// most significant.
    pub fn move_vectors(&self, q: StateId) -> Result<Vec<MoveVector>, CgsError> {
        let d = self.state_data(q)?;
        Ok((0..d.successors.len())
            .map(|flat| self.vector_at(q, flat))
            .collect())
    }

    /// δ(q, mv).
    pub fn successor(&self, q: StateId, mv: &MoveVector) -> Result<StateId, CgsError> {
        let d = self.state_data(q)?;
        match self.flat_index(q, mv) {
            Some(flat) => Ok(d.successors[flat]),
            None => Err(CgsError::UnknownMoveVector {
                state: self.state_name(q).to_string(),
                vector: mv
                    .0
                    .iter()
                    .map(|m| {
                        self.moves
                            .get(m.index())
                            .map_or_else(|| format!("#{}", m.index()), Clone::clone)
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            }),
        }
    }

    /// Every state reachable from `q` in one step.
    pub fn successors(&self, q: StateId) -> Result<SatSet, CgsError> {
        let d = self.state_data(q)?;
        Ok(SatSet::from_states(
            self.num_states(),
            d.successors.iter().copied(),
        ))
    }

    /// {q | p ∈ γ(q)}.
    pub fn states_labeled(&self, proposition: &str) -> Result<SatSet, CgsError> {
        self.prop_index
            .get(proposition)
            .map(|p| self.labelled[p.index()].clone())
            .ok_or_else(|| CgsError::UnknownProposition(proposition.to_string()))
    }

    /// Reconstructs a name-based description with transitions in state and
    /// move-vector order.
    pub fn to_spec(&self) -> StructureSpec {
        let mut moves: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
        for a in self.player_ids() {
            let per_state = moves.entry(self.player_name(a).to_string()).or_default();
            for q in self.state_ids() {
                per_state.insert(
                    self.state_name(q).to_string(),
                    self.alternatives(a, q)
                        .iter()
                        .map(|&m| self.move_symbol(m).to_string())
                        .collect(),
                );
            }
        }
        let mut transitions = Vec::new();
        for q in self.state_ids() {
            for (flat, &to) in self.successor_table(q).iter().enumerate() {
                let mv = self.vector_at(q, flat);
                transitions.push(TransitionSpec {
                    from: self.state_name(q).to_string(),
                    vector: mv
                        .0
                        .iter()
                        .map(|&m| self.move_symbol(m).to_string())
                        .collect(),
                    to: self.state_name(to).to_string(),
                });
            }
        }
        StructureSpec {
            players: self.players.clone(),
            propositions: self.propositions.clone(),
            states: self
                .state_ids()
                .map(|q| StateSpec {
                    name: self.state_name(q).to_string(),
                    labels: self.labels(q).map(str::to_string).collect(),
                })
                .collect(),
            moves,
            transitions,
        }
    }

    /// Structural equality ignoring fingerprints and interning order.
    pub fn same_as(&self, other: &GameStructure) -> bool {
        let canon = |s: &GameStructure| {
            let mut spec = s.to_spec();
            for st in &mut spec.states {
                st.labels.sort();
            }
            let set: HashSet<_> = spec
                .transitions
                .iter()
                .map(|t| (t.from.clone(), t.vector.clone(), t.to.clone()))
                .collect();
            (
                spec.players,
                spec.propositions,
                spec.states,
                spec.moves,
                set.into_iter().collect::<std::collections::BTreeSet<_>>(),
            )
        };
        canon(self) == canon(other)
    }
}
