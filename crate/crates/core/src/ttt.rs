//! Tic-Tac-Toe as a turn-based synchronous game structure.
//!
//! Player `1` is the computer and player `2` the user. Cells are numbered
//!
//! ```text
//! 0 1 2
//! 3 4 5
//! 6 7 8
//! ```
//!
//! and hold `0` (empty), `1` or `2`. At every non-terminal state the player
//! to move has one move per empty cell, named `1..=k` for the k empty cells
//! in ascending order; the other player only has the idle move `0`.
//! Finished games keep their state forever through an idle self-loop.
//!
//! The computer picks its move by checking two formulas on the structure:
//! `<<1>>~ 111` (states from which it can force a win) and an avoid formula
//! for the user, `<<2>>@ 222` when the computer opened the game and
//! `<<2>>~ 222` when the user did.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::cgs::{self, GameStructure, StateId, StateSpec, StructureSpec, TransitionSpec};
use crate::engine::{CheckError, CheckOptions, Checker};
use crate::parser::{Formula, Players};
use crate::pre::Backend;
use crate::set::SatSet;

pub const COMPUTER: u8 = 1;
pub const USER: u8 = 2;

pub const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

pub const WIN_COMPUTER: &str = "111";
pub const WIN_USER: &str = "222";
pub const TURN_COMPUTER: &str = "turn1";
pub const TURN_USER: &str = "turn2";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TttError {
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("it is not the computer's turn")]
    NotComputersTurn,
    #[error("the game is over")]
    GameOver,
    #[error("cell {0} is out of range (cells are 0-8)")]
    CellOutOfRange(usize),
    #[error("cell {0} is already occupied")]
    OccupiedCell(usize),
    #[error(transparent)]
    Check(#[from] CheckError),
}

fn other(player: u8) -> u8 {
    3 - player
}

/// Fill count of a line: number of occupied cells among the three.
pub fn fill_count(values: [u8; 3]) -> u8 {
    values.iter().map(|&x| x.min(1)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineInfo {
    pub cells: [usize; 3],
    pub values: [u8; 3],
    pub fill: u8,
    /// Player owning all three cells, if any.
    pub winner: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineStatus {
    pub lines: [LineInfo; 8],
}

impl LineStatus {
    pub fn winners(&self) -> impl Iterator<Item = u8> + '_ {
        self.lines.iter().filter_map(|l| l.winner)
    }

    pub fn has_line(&self, player: u8) -> bool {
        self.winners().any(|w| w == player)
    }
}

/// A position with the player to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Board {
    cells: [u8; 9],
    turn: u8,
    first_mover: u8,
}

impl Board {
    pub fn empty(first_mover: u8) -> Board {
        assert!(first_mover == COMPUTER || first_mover == USER);
        Board {
            cells: [0; 9],
            turn: first_mover,
            first_mover,
        }
    }

    pub fn new(cells: [u8; 9], turn: u8, first_mover: u8) -> Result<Board, TttError> {
        let invalid = |msg: String| Err(TttError::InvalidBoard(msg));
        if ![COMPUTER, USER].contains(&first_mover) {
            return invalid(format!("first mover must be 1 or 2, got {first_mover}"));
        }
        if ![COMPUTER, USER].contains(&turn) {
            return invalid(format!("turn must be 1 or 2, got {turn}"));
        }
        if let Some(v) = cells.iter().find(|&&v| v > 2) {
            return invalid(format!("cell value {v} is not 0, 1 or 2"));
        }
        let count = |p: u8| cells.iter().filter(|&&v| v == p).count();
        let (first, second) = (count(first_mover), count(other(first_mover)));
        if first != second && first != second + 1 {
            return invalid(format!(
                "player {first_mover} moved first, so it must have as many pieces as the other player or one more"
            ));
        }
        let expected_turn = if first == second {
            first_mover
        } else {
            other(first_mover)
        };
        if turn != expected_turn {
            return invalid(format!("it must be player {expected_turn}'s turn"));
        }
        let board = Board {
            cells,
            turn,
            first_mover,
        };
        let status = board.line_status();
        if status.has_line(COMPUTER) && status.has_line(USER) {
            return invalid("both players have a completed line".into());
        }
        if let Some(w) = board.winner() {
            if w == turn {
                return invalid(format!("player {w} won but is also to move"));
            }
        }
        Ok(board)
    }

    /// Parses a 9-character string of `0`, `1` and `2`.
    pub fn parse(text: &str, turn: u8, first_mover: u8) -> Result<Board, TttError> {
        let digits: Vec<u8> = text
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                c => Err(TttError::InvalidBoard(format!(
                    "unexpected character {c:?}"
                ))),
            })
            .collect::<Result<_, _>>()?;
        let cells: [u8; 9] = digits
            .try_into()
            .map_err(|_| TttError::InvalidBoard("board must have exactly 9 cells".into()))?;
        Board::new(cells, turn, first_mover)
    }

    pub fn cells(&self) -> &[u8; 9] {
        &self.cells
    }

    pub fn turn(&self) -> u8 {
        self.turn
    }

    pub fn first_mover(&self) -> u8 {
        self.first_mover
    }

    pub fn encode(&self) -> String {
        self.cells.iter().map(|v| char::from(b'0' + v)).collect()
    }

    pub fn line_status(&self) -> LineStatus {
        let lines = LINES.map(|cells| {
            let values = cells.map(|i| self.cells[i]);
            let winner =
                (values[0] != 0 && values.iter().all(|&v| v == values[0])).then_some(values[0]);
            LineInfo {
                cells,
                values,
                fill: fill_count(values),
                winner,
            }
        });
        LineStatus { lines }
    }

    pub fn winner(&self) -> Option<u8> {
        self.line_status().winners().next()
    }

    /// Number of occupied cells, summing the fill counts of the three rows.
    pub fn occupied(&self) -> usize {
        self.line_status().lines[..3]
            .iter()
            .map(|l| l.fill as usize)
            .sum()
    }

    pub fn is_full(&self) -> bool {
        self.occupied() == 9
    }

    pub fn is_terminal(&self) -> bool {
        self.winner().is_some() || self.is_full()
    }

    pub fn empty_cells(&self) -> Vec<usize> {
        (0..9).filter(|&i| self.cells[i] == 0).collect()
    }

    /// The board after the player to move takes `cell`.
    pub fn play(&self, cell: usize) -> Result<Board, TttError> {
        if self.is_terminal() {
            return Err(TttError::GameOver);
        }
        if cell >= 9 {
            return Err(TttError::CellOutOfRange(cell));
        }
        if self.cells[cell] != 0 {
            return Err(TttError::OccupiedCell(cell));
        }
        let mut next = *self;
        next.cells[cell] = self.turn;
        next.turn = other(self.turn);
        Ok(next)
    }

    fn state_name(&self) -> String {
        format!("{}t{}", self.encode(), self.turn)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..3 {
            let cells: Vec<String> = (0..3)
                .map(|col| {
                    let i = row * 3 + col;
                    match self.cells[i] {
                        COMPUTER => "X".to_string(),
                        USER => "O".to_string(),
                        _ => i.to_string(),
                    }
                })
                .collect();
            writeln!(f, " {}", cells.join(" | "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Label states with the value string of every line (`"120"`, ...)
    /// instead of only the two win strings.
    pub full_labels: bool,
}

/// A generated structure together with the board behind each state.
#[derive(Debug, Clone)]
pub struct TttStructure {
    pub structure: GameStructure,
    boards: Vec<Board>,
    index: HashMap<Board, StateId>,
}

impl TttStructure {
    pub fn root(&self) -> StateId {
        StateId::new(0)
    }

    pub fn board(&self, q: StateId) -> &Board {
        &self.boards[q.index()]
    }

    pub fn state_of(&self, board: &Board) -> Option<StateId> {
        self.index.get(board).copied()
    }

    pub fn num_states(&self) -> usize {
        self.boards.len()
    }
}

fn all_line_strings() -> Vec<String> {
    let mut out = Vec::with_capacity(27);
    for a in 0..3u8 {
        for b in 0..3u8 {
            for c in 0..3u8 {
                out.push(format!("{a}{b}{c}"));
            }
        }
    }
    out
}

pub fn generate_structure(root: &Board) -> Result<TttStructure, TttError> {
    generate_structure_with(root, GenerateOptions::default())
}

/// Builds the structure of every position reachable from `root`.
///
/// State 0 is the root; the rest follow in breadth-first order.
pub fn generate_structure_with(
    root: &Board,
    options: GenerateOptions,
) -> Result<TttStructure, TttError> {
    let root = Board::new(root.cells, root.turn, root.first_mover)?;
    if root.winner().is_some() {
        return Err(TttError::InvalidBoard("the game is already decided".into()));
    }

    let mut boards = vec![root];
    let mut index = HashMap::from([(root, StateId::new(0))]);
    let mut queue = VecDeque::from([root]);
    while let Some(board) = queue.pop_front() {
        if board.is_terminal() {
            continue;
        }
        for cell in board.empty_cells() {
            let next = board.play(cell)?;
            index.entry(next).or_insert_with(|| {
                boards.push(next);
                queue.push_back(next);
                StateId::new(boards.len() - 1)
            });
        }
    }

    let players = vec![COMPUTER.to_string(), USER.to_string()];
    let mut propositions: Vec<String> = if options.full_labels {
        all_line_strings()
    } else {
        vec![WIN_COMPUTER.into(), WIN_USER.into()]
    };
    propositions.extend([TURN_COMPUTER.to_string(), TURN_USER.to_string()]);

    let names: Vec<String> = boards.iter().map(Board::state_name).collect();
    let mut states = Vec::with_capacity(boards.len());
    let mut transitions = Vec::new();
    let mut moves_of: [std::collections::BTreeMap<String, Vec<String>>; 2] = Default::default();
    let idle = || vec!["0".to_string()];

    for (board, name) in boards.iter().zip(&names) {
        let status = board.line_status();
        let mut labels: Vec<String> = if options.full_labels {
            let mut l: Vec<String> = status
                .lines
                .iter()
                .map(|l| l.values.iter().map(|v| char::from(b'0' + v)).collect())
                .collect();
            l.sort();
            l.dedup();
            l
        } else {
            [(COMPUTER, WIN_COMPUTER), (USER, WIN_USER)]
                .into_iter()
                .filter(|&(p, _)| status.has_line(p))
                .map(|(_, label)| label.to_string())
                .collect()
        };
        labels.push(
            if board.turn == COMPUTER {
                TURN_COMPUTER
            } else {
                TURN_USER
            }
            .into(),
        );
        states.push(StateSpec {
            name: name.clone(),
            labels,
        });

        if board.is_terminal() {
            for table in &mut moves_of {
                table.insert(name.clone(), idle());
            }
            transitions.push(TransitionSpec {
                from: name.clone(),
                vector: vec!["0".into(), "0".into()],
                to: name.clone(),
            });
            continue;
        }

        let mover = usize::from(board.turn - 1);
        let empties = board.empty_cells();
        let symbols: Vec<String> = (1..=empties.len()).map(|i| i.to_string()).collect();
        moves_of[mover].insert(name.clone(), symbols.clone());
        moves_of[1 - mover].insert(name.clone(), idle());
        for (symbol, &cell) in symbols.iter().zip(&empties) {
            let next = board.play(cell)?;
            let mut vector = vec!["0".to_string(), "0".to_string()];
            vector[mover] = symbol.clone();
            transitions.push(TransitionSpec {
                from: name.clone(),
                vector,
                to: names[index[&next].index()].clone(),
            });
        }
    }

    let [m1, m2] = moves_of;
    let spec = StructureSpec {
        players: players.clone(),
        propositions,
        states,
        moves: [(players[0].clone(), m1), (players[1].clone(), m2)]
            .into_iter()
            .collect(),
        transitions,
    };
    let structure = cgs::validate(&spec)
        .unwrap_or_else(|d| panic!("generated Tic-Tac-Toe structure is invalid: {d}"));
    Ok(TttStructure {
        structure,
        boards,
        index,
    })
}

pub fn winning_formula() -> Formula {
    Formula::eventually(Players::new(["1"]), Formula::atom(WIN_COMPUTER))
}

pub fn avoid_formula(first_mover: u8) -> Formula {
    let user = Players::new(["2"]);
    if first_mover == COMPUTER {
        Formula::next(user, Formula::atom(WIN_USER))
    } else {
        Formula::eventually(user, Formula::atom(WIN_USER))
    }
}

/// States from which the computer can force a win.
pub fn winning_set(ttt: &TttStructure, backend: Backend) -> Result<SatSet, TttError> {
    Ok(checker(ttt, backend).check(&winning_formula())?.satisfying)
}

/// States the computer should not move into. With the computer moving
/// first these are the states where the user wins on the next move.
pub fn avoid_set(
    ttt: &TttStructure,
    first_mover: u8,
    backend: Backend,
) -> Result<SatSet, TttError> {
    Ok(checker(ttt, backend)
        .check(&avoid_formula(first_mover))?
        .satisfying)
}

fn checker(ttt: &TttStructure, backend: Backend) -> Checker<'_> {
    Checker::new(
        &ttt.structure,
        CheckOptions {
            backend,
            ..Default::default()
        },
    )
}

/// Preference class of a candidate move; lower is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    /// The move completes a computer line.
    ImmediateWin = 0,
    /// The successor is winning for the computer and not in the avoid set.
    Winning = 1,
    /// The successor is outside the avoid set.
    Safe = 2,
    /// The user cannot win on the next move from the successor.
    Block = 3,
    /// Any legal move.
    Fallback = 4,
}

impl Tier {
    pub fn rank(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub cell: usize,
    pub tier: Tier,
}

/// Winning and avoid sets computed once over the structure of a root.
#[derive(Debug, Clone)]
pub struct Strategy {
    ttt: TttStructure,
    first_mover: u8,
    winning: SatSet,
    avoid: SatSet,
    threat: SatSet,
}

impl Strategy {
    pub fn new(root: &Board, backend: Backend) -> Result<Strategy, TttError> {
        let ttt = generate_structure(root)?;
        let winning = winning_set(&ttt, backend)?;
        let avoid = avoid_set(&ttt, root.first_mover, backend)?;
        let threat = avoid_set(&ttt, COMPUTER, backend)?;
        Ok(Strategy {
            ttt,
            first_mover: root.first_mover,
            winning,
            avoid,
            threat,
        })
    }

    /// Strategy for a whole game started by `first_mover`.
    pub fn for_game(first_mover: u8) -> Strategy {
        Strategy::new(&Board::empty(first_mover), Backend::Relational)
            .expect("empty board is a valid root")
    }

    pub fn structure(&self) -> &TttStructure {
        &self.ttt
    }

    pub fn first_mover(&self) -> u8 {
        self.first_mover
    }

    pub fn winning(&self) -> &SatSet {
        &self.winning
    }

    pub fn avoid(&self) -> &SatSet {
        &self.avoid
    }

    fn tier_of(&self, q: StateId) -> Tier {
        let s = &self.ttt.structure;
        if s.has_label(q, WIN_COMPUTER) {
            Tier::ImmediateWin
        } else if self.winning.contains(q) && !self.avoid.contains(q) {
            Tier::Winning
        } else if !self.avoid.contains(q) {
            Tier::Safe
        } else if !self.threat.contains(q) {
            Tier::Block
        } else {
            Tier::Fallback
        }
    }

    /// Ranks every legal move; ties go to the lowest cell.
    pub fn choose(&self, board: &Board) -> Result<Choice, TttError> {
        if board.is_terminal() {
            return Err(TttError::GameOver);
        }
        if board.turn != COMPUTER {
            return Err(TttError::NotComputersTurn);
        }
        if board.first_mover != self.first_mover {
            return Err(TttError::InvalidBoard(
                "board and strategy disagree on who moved first".into(),
            ));
        }
        let mut best: Option<Choice> = None;
        for cell in board.empty_cells() {
            let next = board.play(cell)?;
            let q = self.ttt.state_of(&next).ok_or_else(|| {
                TttError::InvalidBoard("board is not reachable from the strategy's root".into())
            })?;
            let tier = self.tier_of(q);
            if best.is_none_or(|b| tier < b.tier) {
                best = Some(Choice { cell, tier });
            }
        }
        best.ok_or(TttError::GameOver)
    }
}

/// Picks the computer's move by checking the formulas on the structure
/// rooted at `board`.
pub fn synthesize_move(board: &Board) -> Result<Choice, TttError> {
    if board.is_terminal() {
        return Err(TttError::GameOver);
    }
    if board.turn != COMPUTER {
        return Err(TttError::NotComputersTurn);
    }
    Strategy::new(board, Backend::Relational)?.choose(board)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    ComputerWins,
    UserWins,
    Draw,
}

impl Outcome {
    pub fn of(board: &Board) -> Option<Outcome> {
        match board.winner() {
            Some(COMPUTER) => Some(Outcome::ComputerWins),
            Some(_) => Some(Outcome::UserWins),
            None if board.is_full() => Some(Outcome::Draw),
            None => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ComputerWins => "computer wins",
            Outcome::UserWins => "user wins",
            Outcome::Draw => "draw",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// `(player, cell)` in play order.
    pub moves: Vec<(u8, usize)>,
    pub outcome: Outcome,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (player, cell) in &self.moves {
            let who = if *player == COMPUTER {
                "computer"
            } else {
                "user"
            };
            writeln!(f, "{who} {cell}")?;
        }
        write!(f, "{}", self.outcome)
    }
}

/// Plays one game to the end with both sides supplied as closures.
pub fn play_game(
    first_mover: u8,
    mut computer: impl FnMut(&Board) -> usize,
    mut user: impl FnMut(&Board) -> usize,
) -> Result<Transcript, TttError> {
    let mut board = Board::empty(first_mover);
    let mut moves = Vec::new();
    loop {
        if let Some(outcome) = Outcome::of(&board) {
            return Ok(Transcript { moves, outcome });
        }
        let cell = if board.turn == COMPUTER {
            computer(&board)
        } else {
            user(&board)
        };
        moves.push((board.turn, cell));
        board = board.play(cell)?;
    }
}

/// Text-mode game: reads the user's cells from `input`, prints the board
/// after every ply to `output`. Invalid cells are rejected with a reprompt.
pub fn play_interactive<R: BufRead, W: Write>(
    first_mover: u8,
    mut computer: impl FnMut(&Board) -> usize,
    mut input: R,
    mut output: W,
) -> io::Result<Transcript> {
    let mut board = Board::empty(first_mover);
    let mut moves = Vec::new();
    write!(output, "{board}")?;
    loop {
        if let Some(outcome) = Outcome::of(&board) {
            writeln!(output, "{outcome}")?;
            return Ok(Transcript { moves, outcome });
        }
        let cell = if board.turn == COMPUTER {
            let cell = computer(&board);
            writeln!(output, "computer plays {cell}")?;
            cell
        } else {
            loop {
                write!(output, "your move (0-8): ")?;
                output.flush()?;
                let mut line = String::new();
                if input.read_line(&mut line)? == 0 {
                    return Err(io::Error::new(
                        io::ErrorKind::UnexpectedEof,
                        "input ended before the game finished",
                    ));
                }
                match line.trim().parse::<usize>() {
                    Ok(cell) if cell < 9 && board.cells[cell] == 0 => break cell,
                    Ok(cell) if cell < 9 => writeln!(output, "cell {cell} is taken")?,
                    _ => writeln!(output, "enter an empty cell number from 0 to 8")?,
                }
            }
        };
        moves.push((board.turn, cell));
        board = board
            .play(cell)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        write!(output, "{board}")?;
    }
}
