//! Timing runs over generated structures.

use std::io::Write;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cgs::GameStructure;
use crate::engine::{CheckError, CheckOptions, Checker};
use crate::parser::{format, Formula};
use crate::pre::Backend;
use crate::random::{random_structure, RandomParams};
use crate::set::SatSet;
use crate::ttt::{self, Board};

/// Cells played, alternately, to reach the TTT root at a given ply.
/// No prefix of it completes a line.
pub const OPENING: [usize; 8] = [0, 4, 8, 2, 6, 3, 5, 1];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// One TTT structure per ply, rooted after that many opening moves.
    Ttt { plies: Vec<usize>, first_mover: u8 },
    /// `count` random structures drawn from one seeded stream.
    Random {
        params: RandomParams,
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid generator spec: {0}")]
    InvalidGeneratorSpec(String),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("failed to write CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    /// `ply=N` or `random#N`; not part of the CSV.
    pub instance: String,
    pub states: usize,
    pub formula: String,
    pub backend: Backend,
    /// Median wall-clock time over the repetitions.
    pub milliseconds: f64,
    pub iterations: usize,
    pub satisfying: SatSet,
}

fn invalid(msg: impl Into<String>) -> BenchError {
    BenchError::InvalidGeneratorSpec(msg.into())
}

/// TTT position after the first `ply` opening moves.
pub fn ttt_root(ply: usize, first_mover: u8) -> Result<Board, BenchError> {
    if ply > OPENING.len() {
        return Err(invalid(format!("ply {ply} exceeds {}", OPENING.len())));
    }
    if first_mover != ttt::COMPUTER && first_mover != ttt::USER {
        return Err(invalid(format!(
            "first mover must be 1 or 2, got {first_mover}"
        )));
    }
    let mut board = Board::empty(first_mover);
    for &cell in &OPENING[..ply] {
        board = board.play(cell).map_err(|e| invalid(e.to_string()))?;
    }
    Ok(board)
}

/// The structures a spec describes, labeled.
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<(String, GameStructure)>, BenchError> {
    match spec {
        GeneratorSpec::Ttt { plies, first_mover } => {
            if plies.is_empty() {
                return Err(invalid("no plies given"));
            }
            plies
                .iter()
                .map(|&ply| {
                    let root = ttt_root(ply, *first_mover)?;
                    let generated =
                        ttt::generate_structure(&root).map_err(|e| invalid(e.to_string()))?;
                    Ok((format!("ply={ply}"), generated.structure))
                })
                .collect()
        }
        GeneratorSpec::Random {
            params,
            count,
            seed,
        } => {
            if *count == 0 {
                return Err(invalid("count must be positive"));
            }
            if params.states == 0 || params.players == 0 || params.max_moves == 0 {
                return Err(invalid("states, players and moves must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..*count)
                .map(|i| (format!("random#{i}"), random_structure(&mut rng, params)))
                .collect())
        }
    }
}

fn median(mut samples: Vec<Duration>) -> Duration {
    samples.sort_unstable();
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2
    }
}

/// Rows in instance, formula, backend order. Every repetition starts from
/// an empty relation cache.
pub fn run_bench(
    spec: &GeneratorSpec,
    formulas: &[Formula],
    repetitions: usize,
    backends: &[Backend],
) -> Result<Vec<BenchRow>, BenchError> {
    if repetitions == 0 {
        return Err(invalid("repetitions must be positive"));
    }
    if formulas.is_empty() || backends.is_empty() {
        return Err(invalid("at least one formula and one backend are required"));
    }
    let mut rows = Vec::new();
    for (instance, structure) in generate(spec)? {
        for formula in formulas {
            for &backend in backends {
                let mut times = Vec::with_capacity(repetitions);
                let mut last = None;
                for _ in 0..repetitions {
                    let checker = Checker::new(
                        &structure,
                        CheckOptions {
                            backend,
                            ..Default::default()
                        },
                    );
                    let result = checker.check(formula)?;
                    times.push(result.stats.elapsed);
                    last = Some(result);
                }
                let result = last.expect("at least one repetition");
                rows.push(BenchRow {
                    instance: instance.clone(),
                    states: structure.num_states(),
                    formula: format(formula),
                    backend,
                    milliseconds: median(times).as_secs_f64() * 1000.0,
                    iterations: result.stats.fixpoint_iterations,
                    satisfying: result.satisfying,
                });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: [&str; 5] = ["states", "formula", "backend", "milliseconds", "iterations"];

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record([
            row.states.to_string(),
            row.formula.clone(),
            row.backend.name().to_string(),
            format!("{:.3}", row.milliseconds),
            row.iterations.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
