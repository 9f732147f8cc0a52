use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use atl_core::bench::{self, GeneratorSpec};
use atl_core::engine::CheckOptions;
use atl_core::io::{load_model, IoError};
use atl_core::pipeline::{self, PipelineError};
use atl_core::random::RandomParams;
use atl_core::ttt::{self, Board, Strategy, TttError};
use atl_core::{parse, Backend, Formula};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Model checker for Alternating-time Temporal Logic.
#[derive(Debug, Parser)]
#[command(name = "atl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a model file is well formed.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Evaluate a formula and print the result document.
    Check(CheckArgs),
    /// Tic-Tac-Toe demo.
    #[command(subcommand)]
    Ttt(TttCommand),
    /// Time checks over generated structures and print CSV.
    Bench(BenchArgs),
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "ATL_PORT", default_value_t = atl_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Largest accepted request body in bytes.
        #[arg(long, default_value_t = atl_service::DEFAULT_BODY_LIMIT)]
        body_limit: usize,
    },
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    /// Formula text, or `@path` to read it from a file.
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Relational)]
    backend: BackendArg,
    /// Include the satisfying set of every subformula.
    #[arg(long)]
    trace: bool,
    /// Treat unknown propositions as false everywhere.
    #[arg(long)]
    lenient_atoms: bool,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum TttCommand {
    /// Play against the computer on the terminal.
    Play {
        #[arg(long, value_enum, default_value_t = FirstArg::User)]
        first: FirstArg,
    },
    /// Print the computer's move for a position.
    Synthesize {
        /// Nine digits, 0 empty, 1 computer, 2 user, cells 0-8 row by row.
        #[arg(long)]
        board: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        turn: u8,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        first: u8,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = GeneratorArg::Ttt)]
    generator: GeneratorArg,
    /// TTT roots, as plies into a fixed opening.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 3, 2, 1, 0])]
    plies: Vec<usize>,
    /// TTT first mover.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    first: u8,
    #[arg(long, default_value_t = 100)]
    states: usize,
    #[arg(long, default_value_t = 2)]
    players: usize,
    #[arg(long, default_value_t = 2)]
    moves: usize,
    #[arg(long, default_value_t = 2)]
    propositions: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Formulas to time (repeatable). Defaults depend on the generator.
    #[arg(long)]
    formula: Vec<String>,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Backends to time (repeatable); both when omitted.
    #[arg(long, value_enum)]
    backend: Vec<BackendArg>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Direct,
    Relational,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Direct => Backend::Direct,
            BackendArg::Relational => Backend::Relational,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FirstArg {
    User,
    Computer,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Ttt,
    Random,
}

/// Exit status plus the message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn pipeline(source: &str, e: &PipelineError) -> Self {
        let place = match &e.location {
            Some(loc) => format!("{source}: {:?} at {loc}", e.kind),
            None => format!("{source}: {:?}", e.kind),
        };
        let message = format!("{place}: {}", e.message);
        if e.kind.is_input_error() {
            Failure::input(message)
        } else {
            Failure::internal(message)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(bytes: &[u8], output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::internal(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::internal(format!("stdout: {e}"))),
    }
}

/// Inline text, or the contents of the file after a leading `@`.
fn formula_text(arg: &str) -> Result<(String, String), Failure> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let bytes = read(Path::new(path))?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Failure::input(format!("{path}: formula file is not UTF-8")))?;
            Ok((text.trim().to_string(), path.to_string()))
        }
        None => Ok((arg.to_string(), "formula".to_string())),
    }
}

fn validate(model: &Path) -> Result<(), Failure> {
    match load_model(&read(model)?) {
        Ok(s) => {
            println!(
                "{}: valid, {} states, {} players",
                model.display(),
                s.num_states(),
                s.num_players()
            );
            Ok(())
        }
        Err(IoError::Invalid(d)) => {
            let lines: Vec<String> = d
                .errors()
                .iter()
                .map(|e| format!("{}: {e}", model.display()))
                .collect();
            Err(Failure::input(lines.join("\n")))
        }
        Err(e) => Err(Failure::pipeline(
            &model.display().to_string(),
            &PipelineError::from(e),
        )),
    }
}

fn check(args: &CheckArgs) -> Result<(), Failure> {
    let model = read(&args.model)?;
    let (formula, formula_source) = formula_text(&args.formula)?;
    let options = CheckOptions {
        backend: args.backend.into(),
        trace: args.trace,
        lenient_atoms: args.lenient_atoms,
    };
    let out = pipeline::check_bytes(&model, &formula, options).map_err(|e| {
        let source = match e.kind {
            pipeline::ErrorKind::SyntaxError
            | pipeline::ErrorKind::UnknownProposition
            | pipeline::ErrorKind::UnknownPlayer => formula_source.clone(),
            _ => args.model.display().to_string(),
        };
        Failure::pipeline(&source, &e)
    })?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    emit(&out.document, args.output.as_deref())
}

fn ttt_failure(e: TttError) -> Failure {
    match e {
        TttError::Check(e) => Failure::internal(e.to_string()),
        e => Failure::input(e.to_string()),
    }
}

fn ttt(command: &TttCommand) -> Result<(), Failure> {
    match command {
        TttCommand::Play { first } => {
            let first = match first {
                FirstArg::User => ttt::USER,
                FirstArg::Computer => ttt::COMPUTER,
            };
            let strategy = Strategy::for_game(first);
            let stdin = io::stdin();
            ttt::play_interactive(
                first,
                |b| strategy.choose(b).expect("computer to move").cell,
                stdin.lock(),
                io::stdout(),
            )
            .map_err(|e| Failure::input(e.to_string()))?;
            Ok(())
        }
        TttCommand::Synthesize { board, turn, first } => {
            let board = Board::parse(board, *turn, *first).map_err(ttt_failure)?;
            let choice = ttt::synthesize_move(&board).map_err(ttt_failure)?;
            println!(
                "cell {} tier {} ({:?})",
                choice.cell,
                choice.tier.rank(),
                choice.tier
            );
            Ok(())
        }
    }
}

fn bench_formulas(args: &BenchArgs) -> Result<Vec<Formula>, Failure> {
    if !args.formula.is_empty() {
        return args
            .formula
            .iter()
            .map(|f| {
                let (text, source) = formula_text(f)?;
                parse(&text).map_err(|e| Failure::pipeline(&source, &e.into()))
            })
            .collect();
    }
    Ok(match args.generator {
        GeneratorArg::Ttt => vec![ttt::winning_formula(), ttt::avoid_formula(args.first)],
        GeneratorArg::Random => vec![parse("<<1>>~ p0").expect("valid formula")],
    })
}

fn run_bench(args: &BenchArgs) -> Result<(), Failure> {
    let spec = match args.generator {
        GeneratorArg::Ttt => GeneratorSpec::Ttt {
            plies: args.plies.clone(),
            first_mover: args.first,
        },
        GeneratorArg::Random => GeneratorSpec::Random {
            params: RandomParams {
                states: args.states,
                players: args.players,
                max_moves: args.moves,
                propositions: args.propositions,
            },
            count: args.count,
            seed: args.seed,
        },
    };
    let backends: Vec<Backend> = if args.backend.is_empty() {
        vec![Backend::Direct, Backend::Relational]
    } else {
        args.backend.iter().map(|&b| b.into()).collect()
    };
    let rows = bench::run_bench(&spec, &bench_formulas(args)?, args.repetitions, &backends)
        .map_err(|e| match e {
            bench::BenchError::InvalidGeneratorSpec(_) => Failure::input(e.to_string()),
            bench::BenchError::Check(ref c) => {
                Failure::pipeline("formula", &PipelineError::from(c.clone()))
            }
            e => Failure::internal(e.to_string()),
        })?;
    let mut csv = Vec::new();
    bench::write_csv(&rows, &mut csv).map_err(|e| Failure::internal(e.to_string()))?;
    emit(&csv, args.output.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { model } => validate(&model),
        Command::Check(args) => check(&args),
        Command::Ttt(command) => ttt(&command),
        Command::Bench(args) => run_bench(&args),
        Command::Serve {
            port,
            host,
            body_limit,
        } => {
            let addr = SocketAddr::new(host, port);
            eprintln!("listening on http://{addr}");
            atl_service::run(addr, atl_service::Config { body_limit })
                .map_err(|e| Failure::internal(format!("{addr}: {e}")))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
