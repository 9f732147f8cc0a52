//! Explicit-state model checking of Alternating-time Temporal Logic over
//! concurrent game structures.
//!
//! The pipeline is: load a model ([`io`]), validate it ([`cgs`]), parse a
//! formula ([`parser`]) and evaluate it bottom-up ([`engine`]), with temporal
//! operators reduced to fixpoints of the controllable predecessor ([`pre`]).
//! [`ttt`] builds Tic-Tac-Toe as a game structure and plays it using the
//! checker. [`pipeline`] runs the whole chain on raw input for front ends.

pub mod bench;
pub mod cgs;
pub mod engine;
pub mod io;
pub mod parser;
pub mod pipeline;
pub mod pre;
pub mod random;
pub mod set;
pub mod ttt;

pub use cgs::{Coalition, GameStructure, MoveVector, PlayerId, StateId};
pub use engine::{check, CheckError, CheckOptions, CheckResult, Checker};
pub use parser::{format, parse, Formula, ParseError};
pub use pre::Backend;
pub use set::SatSet;
