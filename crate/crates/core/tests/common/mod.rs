//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use atl_core::cgs::{GameStructure, MoveId, MoveVector, StateId};
use atl_core::parser::{Formula, Players};

// ---------------------------------------------------------------------------
// Tic-Tac-Toe, over raw cell arrays.

pub type Cells = [u8; 9];

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

pub fn has_line(cells: &Cells, p: u8) -> bool {
    LINES.iter().any(|l| l.iter().all(|&i| cells[i] == p))
}

pub fn is_over(cells: &Cells) -> bool {
    has_line(cells, 1) || has_line(cells, 2) || cells.iter().all(|&c| c != 0)
}

/// All (cells, turn) pairs reachable from the empty board.
pub fn enumerate_positions(first: u8) -> HashSet<(Cells, u8)> {
    let mut seen = HashSet::new();
    let mut stack = vec![([0u8; 9], first)];
    while let Some((cells, turn)) = stack.pop() {
        if !seen.insert((cells, turn)) || is_over(&cells) {
            continue;
        }
        for i in 0..9 {
            if cells[i] == 0 {
                let mut next = cells;
                next[i] = turn;
                stack.push((next, 3 - turn));
            }
        }
    }
    seen
}

/// Game value for player 1 under perfect play: 1 win, 0 draw, -1 loss.
pub struct Minimax {
    memo: HashMap<(Cells, u8), i8>,
}

impl Minimax {
    pub fn new() -> Self {
        Minimax {
            memo: HashMap::new(),
        }
    }

    pub fn value(&mut self, cells: Cells, turn: u8) -> i8 {
        if has_line(&cells, 1) {
            return 1;
        }
        if has_line(&cells, 2) {
            return -1;
        }
        if cells.iter().all(|&c| c != 0) {
            return 0;
        }
        if let Some(&v) = self.memo.get(&(cells, turn)) {
            return v;
        }
        let mut best = if turn == 1 { -2 } else { 2 };
        for i in 0..9 {
            if cells[i] == 0 {
                let mut next = cells;
                next[i] = turn;
                let v = self.value(next, 3 - turn);
                best = if turn == 1 { best.max(v) } else { best.min(v) };
            }
        }
        self.memo.insert((cells, turn), best);
        best
    }
}

/// Cells where `p` would complete a line right now.
pub fn winning_cells(cells: &Cells, p: u8) -> Vec<usize> {
    (0..9)
        .filter(|&i| {
            cells[i] == 0 && {
                let mut next = *cells;
                next[i] = p;
                has_line(&next, p)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// ATL by enumeration of memoryless coalition strategies.

fn coalition_of(s: &GameStructure, players: &Players) -> Vec<usize> {
    players
        .names()
        .iter()
        .map(|n| s.player_id(n).expect("known player").index())
        .collect()
}

fn product(lists: &[Vec<MoveId>]) -> Vec<Vec<MoveId>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&m| {
                    let mut v = prefix.clone();
                    v.push(m);
                    v
                })
            })
            .collect();
    }
    out
}

/// Successors of `q` when the coalition plays `choice` and everyone else
/// plays anything.
fn outcomes(s: &GameStructure, q: StateId, coalition: &[usize], choice: &[MoveId]) -> Vec<usize> {
    let lists: Vec<Vec<MoveId>> = s
        .player_ids()
        .map(|a| match coalition.iter().position(|&c| c == a.index()) {
            Some(k) => vec![choice[k]],
            None => s.alternatives(a, q).to_vec(),
        })
        .collect();
    let mut next: Vec<usize> = product(&lists)
        .into_iter()
        .map(|mv| s.successor(q, &MoveVector(mv)).unwrap().index())
        .collect();
    next.sort_unstable();
    next.dedup();
    next
}

enum Goal<'a> {
    Next(&'a [bool]),
    Always(&'a [bool]),
    Until(&'a [bool], &'a [bool]),
}

/// Whether every path from `q` in the graph `succ` meets the goal.
fn holds(succ: &[Vec<usize>], q: usize, goal: &Goal) -> bool {
    match goal {
        Goal::Next(phi) => succ[q].iter().all(|&r| phi[r]),
        Goal::Always(phi) => {
            let mut seen = vec![false; succ.len()];
            let mut stack = vec![q];
            while let Some(r) = stack.pop() {
                if seen[r] {
                    continue;
                }
                seen[r] = true;
                if !phi[r] {
                    return false;
                }
                stack.extend(&succ[r]);
            }
            true
        }
        Goal::Until(phi1, phi2) => {
            // Fails if some path leaves phi1 before phi2 or stays in
            // phi1 \ phi2 forever (a cycle there).
            #[derive(Clone, Copy, PartialEq)]
            enum Mark {
                New,
                Open,
                Done,
            }
            fn dfs(
                r: usize,
                succ: &[Vec<usize>],
                phi1: &[bool],
                phi2: &[bool],
                mark: &mut [Mark],
            ) -> bool {
                if phi2[r] {
                    return true;
                }
                if !phi1[r] {
                    return false;
                }
                match mark[r] {
                    Mark::Open => return false,
                    Mark::Done => return true,
                    Mark::New => {}
                }
                mark[r] = Mark::Open;
                for &t in &succ[r] {
                    if !dfs(t, succ, phi1, phi2, mark) {
                        return false;
                    }
                }
                mark[r] = Mark::Done;
                true
            }
            let mut mark = vec![Mark::New; succ.len()];
            dfs(q, succ, phi1, phi2, &mut mark)
        }
    }
}

/// States where some memoryless strategy of the coalition enforces `goal`.
fn enforce(s: &GameStructure, players: &Players, goal: Goal) -> Vec<bool> {
    let coalition = coalition_of(s, players);
    let n = s.num_states();
    let choices: Vec<Vec<Vec<MoveId>>> = s
        .state_ids()
        .map(|q| {
            let lists: Vec<Vec<MoveId>> = coalition
                .iter()
                .map(|&a| s.alternatives(atl_core::PlayerId::new(a), q).to_vec())
                .collect();
            product(&lists)
        })
        .collect();
    // Outcome sets per state and choice, computed once.
    let moves: Vec<Vec<Vec<usize>>> = s
        .state_ids()
        .map(|q| {
            choices[q.index()]
                .iter()
                .map(|c| outcomes(s, q, &coalition, c))
                .collect()
        })
        .collect();

    let mut result = vec![false; n];
    let mut pick = vec![0usize; n];
    loop {
        let succ: Vec<Vec<usize>> = (0..n).map(|q| moves[q][pick[q]].clone()).collect();
        for (q, r) in result.iter_mut().enumerate() {
            if !*r && holds(&succ, q, &goal) {
                *r = true;
            }
        }
        if result.iter().all(|&b| b) {
            return result;
        }
        // Next strategy, odometer style.
        let mut i = 0;
        loop {
            if i == n {
                return result;
            }
            pick[i] += 1;
            if pick[i] < moves[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Truth value of `f` at every state.
pub fn brute_eval(s: &GameStructure, f: &Formula) -> Vec<bool> {
    let n = s.num_states();
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(p) => s.state_ids().map(|q| s.labels(q).any(|l| l == p)).collect(),
        Formula::Not(a) => brute_eval(s, a).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => zip(s, a, b, |x, y| x && y),
        Formula::Or(a, b) => zip(s, a, b, |x, y| x || y),
        Formula::Imply(a, b) => zip(s, a, b, |x, y| !x || y),
        Formula::Next(p, a) => enforce(s, p, Goal::Next(&brute_eval(s, a))),
        Formula::Always(p, a) => enforce(s, p, Goal::Always(&brute_eval(s, a))),
        Formula::Eventually(p, a) => enforce(s, p, Goal::Until(&vec![true; n], &brute_eval(s, a))),
        Formula::Until(p, a, b) => enforce(s, p, Goal::Until(&brute_eval(s, a), &brute_eval(s, b))),
    }
}

fn zip(s: &GameStructure, a: &Formula, b: &Formula, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    brute_eval(s, a)
        .into_iter()
        .zip(brute_eval(s, b))
        .map(|(x, y)| op(x, y))
        .collect()
}

pub fn to_bools(set: &atl_core::SatSet) -> Vec<bool> {
    (0..set.universe())
        .map(|i| set.contains(StateId::new(i)))
        .collect()
}
