//! The controllable predecessor operator `Pre(A, Θ)`.
//!
//! `Pre(A, Θ)` is the set of states at which coalition `A` has one joint move
//! that lands in `Θ` whatever the remaining players do. Two independent
//! backends compute it:
//!
//! * [`pre_direct`] enumerates, at each state, every coalition move and every
//!   completion by the opponents.
//! * [`pre_relational`] works on a flattened `(B, E, LABEL)` relation built
//!   once per coalition by [`build_relation`]: it selects the distinct
//!   `(B, LABEL)` pairs leading into `Θ`, the distinct pairs leading outside
//!   `Θ`, and keeps the sources of pairs in the first set that have no match
//!   in the second (a left anti-join on `(B, LABEL)`).

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::cgs::{Coalition, GameStructure, MoveId, PlayerId, StateId};
use crate::set::SatSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreError {
    #[error("state set ranges over {found} states but the structure has {expected}")]
    UnknownState { expected: usize, found: usize },
    #[error("relation was built for a different structure")]
    FingerprintMismatch,
    #[error("coalition refers to player {0} which is not in the structure")]
    UnknownPlayer(usize),
}

fn check_inputs(s: &GameStructure, a: &Coalition, theta: &SatSet) -> Result<(), PreError> {
    if theta.universe() != s.num_states() {
        return Err(PreError::UnknownState {
            expected: s.num_states(),
            found: theta.universe(),
        });
    }
    if let Some(p) = a.members().iter().find(|p| p.index() >= s.num_players()) {
        return Err(PreError::UnknownPlayer(p.index()));
    }
    Ok(())
}

/// Mixed-radix counter over the alternative positions of a group of players.
struct Odometer {
    radix: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(radix: Vec<usize>) -> Self {
        let done = radix.contains(&0);
        Odometer {
            digits: vec![0; radix.len()],
            radix,
            done,
        }
    }

    fn current(&self) -> Option<&[usize]> {
        (!self.done).then_some(self.digits.as_slice())
    }

    fn advance(&mut self) {
        for i in (0..self.radix.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radix[i] {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

/// Quantifier enumeration: ∃ coalition move ∀ completion, δ(q, ·) ∈ Θ.
pub fn pre_direct(s: &GameStructure, a: &Coalition, theta: &SatSet) -> Result<SatSet, PreError> {
    check_inputs(s, a, theta)?;
    let opponents: Vec<PlayerId> = s.player_ids().filter(|&p| !a.contains(p)).collect();
    let mut out = s.no_states();

    for q in s.state_ids() {
        let table = s.successor_table(q);
        let mut own = Odometer::new(
            a.members()
                .iter()
                .map(|&p| s.alternatives(p, q).len())
                .collect(),
        );
        let enforced = loop {
            let Some(choice) = own.current() else {
                break false;
            };
            let base: usize = a
                .members()
                .iter()
                .zip(choice)
                .map(|(&p, &pos)| pos * s.stride(q, p))
                .sum();

            let mut rest = Odometer::new(
                opponents
                    .iter()
                    .map(|&p| s.alternatives(p, q).len())
                    .collect(),
            );
            let mut all_inside = true;
            while let Some(completion) = rest.current() {
                let flat = base
                    + opponents
                        .iter()
                        .zip(completion)
                        .map(|(&p, &pos)| pos * s.stride(q, p))
                        .sum::<usize>();
                if !theta.contains(table[flat]) {
                    all_inside = false;
                    break;
                }
                rest.advance();
            }
            if all_inside {
                break true;
            }
            own.advance();
        };
        if enforced {
            out.insert(q);
        }
    }
    Ok(out)
}

/// Index into [`CoalitionRelation::labels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(u32);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One `(B, E, LABEL)` row of the model table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row {
    pub source: StateId,
    pub target: StateId,
    pub label: LabelId,
}

/// The transition relation projected onto a coalition's moves.
#[derive(Debug, Clone)]
pub struct CoalitionRelation {
    coalition: Coalition,
    fingerprint: u64,
    /// Coalition labels: one move per member, ascending player order.
    labels: Vec<Vec<MoveId>>,
    rows: Vec<Row>,
}

impl CoalitionRelation {
    pub fn coalition(&self) -> &Coalition {
        &self.coalition
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn label(&self, id: LabelId) -> &[MoveId] {
        &self.labels[id.index()]
    }
}

/// Flattens δ into distinct `(B, E, π_A(mv))` rows, sorted.
///
/// Panics if the coalition names a player the structure does not have.
pub fn build_relation(s: &GameStructure, a: &Coalition) -> CoalitionRelation {
    assert!(
        a.members().iter().all(|p| p.index() < s.num_players()),
        "coalition outside structure"
    );
    let mut label_ids: HashMap<Vec<MoveId>, LabelId> = HashMap::new();
    let mut labels = Vec::new();
    let mut rows = HashSet::new();

    for q in s.state_ids() {
        for (flat, &target) in s.successor_table(q).iter().enumerate() {
            let label: Vec<MoveId> = a
                .members()
                .iter()
                .map(|&p| {
                    let alt = s.alternatives(p, q);
                    alt[(flat / s.stride(q, p)) % alt.len()]
                })
                .collect();
            let id = *label_ids.entry(label).or_insert_with_key(|label| {
                labels.push(label.clone());
                LabelId(u32::try_from(labels.len() - 1).expect("too many labels"))
            });
            rows.insert(Row {
                source: q,
                target,
                label: id,
            });
        }
    }

    let mut rows: Vec<Row> = rows.into_iter().collect();
    rows.sort_unstable();
    CoalitionRelation {
        coalition: a.clone(),
        fingerprint: s.fingerprint(),
        labels,
        rows,
    }
}

type Key = (StateId, LabelId);

/// Rows of `left` whose key has no match in `right`.
fn anti_join<'a>(left: &'a HashSet<Key>, right: &'a HashSet<Key>) -> impl Iterator<Item = &'a Key> {
    left.iter().filter(move |key| !right.contains(key))
}

/// In-memory evaluation of the anti-join query plan over `rel`.
pub fn pre_relational(
    s: &GameStructure,
    rel: &CoalitionRelation,
    theta: &SatSet,
) -> Result<SatSet, PreError> {
    if rel.fingerprint != s.fingerprint() {
        return Err(PreError::FingerprintMismatch);
    }
    check_inputs(s, &rel.coalition, theta)?;

    // x: select distinct B, LABEL from model where E in Θ
    // y: select distinct B, LABEL from model where E not in Θ
    let mut x: HashSet<Key> = HashSet::new();
    let mut y: HashSet<Key> = HashSet::new();
    for row in &rel.rows {
        if theta.contains(row.target) {
            x.insert((row.source, row.label));
        } else {
            y.insert((row.source, row.label));
        }
    }

    // select distinct B from x left join y on (B, LABEL) where y is null
    let mut out = s.no_states();
    for &(source, _) in anti_join(&x, &y) {
        out.insert(source);
    }
    Ok(out)
}

/// Which `Pre` implementation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    Direct,
    #[default]
    Relational,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Direct => "direct",
            Backend::Relational => "relational",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Backend::Direct),
            "relational" => Ok(Backend::Relational),
            other => Err(format!(
                "unknown backend `{other}` (expected direct or relational)"
            )),
        }
    }
}

/// Relations keyed by structure fingerprint and coalition.
///
/// Safe to share between threads; the relation for a key is built at most
/// once per cache.
#[derive(Debug, Default)]
pub struct RelationCache {
    entries: Mutex<HashMap<(u64, Coalition), Arc<CoalitionRelation>>>,
}

impl RelationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, s: &GameStructure, a: &Coalition) -> Arc<CoalitionRelation> {
        let key = (s.fingerprint(), a.clone());
        let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        entries
            .entry(key)
            .or_insert_with(|| Arc::new(build_relation(s, a)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgs::tests::example;

    fn set(s: &GameStructure, names: &[&str]) -> SatSet {
        SatSet::from_states(s.num_states(), names.iter().map(|n| s.state_id(n).unwrap()))
    }

    fn both(s: &GameStructure, a: &Coalition, theta: &SatSet) -> SatSet {
        let direct = pre_direct(s, a, theta).unwrap();
        let rel = build_relation(s, a);
        assert_eq!(pre_relational(s, &rel, theta).unwrap(), direct);
        direct
    }

    #[test]
    fn player_one_forces_both_true() {
        let s = example();
        let a = s.coalition(&["1"]).unwrap();
        assert_eq!(both(&s, &a, &set(&s, &["q3"])), set(&s, &["q2", "q3"]));
    }

    #[test]
    fn player_two_forces_both_true() {
        let s = example();
        let a = s.coalition(&["2"]).unwrap();
        assert_eq!(both(&s, &a, &set(&s, &["q3"])), set(&s, &["q1", "q3"]));
    }

    #[test]
    fn empty_coalition_is_universal_next() {
        let s = example();
        assert_eq!(
            both(&s, &Coalition::empty(), &set(&s, &["q1", "q3"])),
            set(&s, &["q1", "q3"])
        );
    }

    #[test]
    fn extremes() {
        let s = example();
        for a in [
            Coalition::empty(),
            s.coalition(&["1"]).unwrap(),
            s.grand_coalition(),
        ] {
            assert!(both(&s, &a, &s.no_states()).is_empty());
            assert!(both(&s, &a, &s.all_states()).is_full());
        }
    }

    #[test]
    fn relation_rows_for_player_one() {
        let s = example();
        let a = s.coalition(&["1"]).unwrap();
        let rel = build_relation(&s, &a);
        let q0 = s.state_id("q0").unwrap();
        let mut rows: Vec<(String, String)> = rel
            .rows()
            .iter()
            .filter(|r| r.source == q0)
            .map(|r| {
                let label = rel.label(r.label);
                assert_eq!(label.len(), 1);
                (
                    s.state_name(r.target).to_string(),
                    s.move_symbol(label[0]).to_string(),
                )
            })
            .collect();
        rows.sort();
        let expected = [("q0", "L"), ("q1", "C"), ("q2", "L"), ("q3", "C")]
            .map(|(e, l)| (e.to_string(), l.to_string()));
        assert_eq!(rows, expected);
    }

    #[test]
    fn relation_row_counts() {
        let s = example();
        let empty = build_relation(&s, &Coalition::empty());
        assert_eq!(empty.rows().len(), 9);
        assert!(empty.rows().iter().all(|r| empty.label(r.label).is_empty()));

        let full = build_relation(&s, &s.grand_coalition());
        let vectors: usize = s.state_ids().map(|q| s.vector_count(q)).sum();
        assert_eq!(full.rows().len(), vectors);
    }

    #[test]
    fn mismatched_inputs() {
        let s = example();
        let a = s.coalition(&["1"]).unwrap();
        assert_eq!(
            pre_direct(&s, &a, &SatSet::empty(3)),
            Err(PreError::UnknownState {
                expected: 4,
                found: 3
            })
        );
        let mut spec = crate::cgs::tests::example_spec();
        spec.states[0].labels.push("x".into());
        let other = crate::cgs::validate(&spec).unwrap();
        let rel = build_relation(&other, &a);
        assert_eq!(
            pre_relational(&s, &rel, &s.all_states()),
            Err(PreError::FingerprintMismatch)
        );
    }

    #[test]
    fn cache_reuses_relations() {
        let s = example();
        let cache = RelationCache::new();
        let a = s.coalition(&["1"]).unwrap();
        let first = cache.get(&s, &a);
        let second = cache.get(&s, &a);
        assert!(Arc::ptr_eq(&first, &second));
        cache.get(&s, &Coalition::empty());
        assert_eq!(cache.len(), 2);
    }
}
