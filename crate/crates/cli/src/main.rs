//! `critex`: exact repetition and recurrence measures of automatic sequences.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use critex_core::automaton::{AutomatonError, Dfa, Dfao};
use critex_core::exponents::{self, ExponentError, Measure, RecurrenceVerdict};
use critex_core::format::{self, Automaton, FormatError};
use critex_core::logic::{self, CompilationEnv, LogicError};
use critex_core::numeral::{DigitOrder, ExtRational};
use critex_core::oracle::{self, PrefixSample};
use critex_core::quotient::{self, QuotientError, Witness};

use report::RunReport;

#[derive(Parser)]
#[command(name = "critex", version, about = "Exact repetition measures of automatic sequences")]
struct Cli {
    /// Print a JSON object instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent of a sequence given as a 1-track DFAO.
    Exponent {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Critical)]
        which: Which,
    },
    /// Decide linear recurrence and compute the optimal constant.
    Recurrence { file: PathBuf },
    /// Supremum of numerator/denominator over a 2-track DFA.
    Sup { file: PathBuf },
    /// Largest special point of numerator/denominator over a 2-track DFA.
    Special { file: PathBuf },
    /// Evaluate a first-order formula over a sequence.
    ///
    /// Either `eval <formula> <file>` or `eval <file> --formula <formula>`.
    Eval {
        #[arg(num_args = 1..=2, required = true)]
        args: Vec<String>,
        #[arg(long)]
        formula: Option<String>,
        /// Free variables in track order, e.g. `q,p`.
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        /// Where to write the automaton of an open formula (default stdout).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Brute-force scans of a finite prefix.
    Oracle {
        #[command(subcommand)]
        scan: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// The first n terms.
    Prefix {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Largest exponent of a factor of the first n terms.
    Scan {
        file: PathBuf,
        #[arg(long, default_value_t = 16384)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        max_period: usize,
    },
    /// Largest exponent of a prefix of the first n terms.
    Ice {
        file: PathBuf,
        #[arg(long, default_value_t = 16384)]
        n: usize,
    },
    /// Largest gap/length ratio between consecutive occurrences.
    Recurrence {
        file: PathBuf,
        #[arg(long, default_value_t = 65536)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Critical,
    C1,
    C2,
    Ice1,
    Ice2,
    Dio,
}

impl From<Which> for Measure {
    fn from(w: Which) -> Measure {
        match w {
            Which::Critical => Measure::Critical,
            Which::C1 => Measure::C1,
            Which::C2 => Measure::C2,
            Which::Ice1 => Measure::Ice1,
            Which::Ice2 => Measure::Ice2,
            Which::Dio => Measure::Dio,
        }
    }
}

/// A failure with its exit code: 2 bad input, 3 unmet precondition, 4 internal.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<AutomatonError> for Failure {
    fn from(e: AutomatonError) -> Self {
        let code = match e {
            AutomatonError::TooManyStates(_) => 3,
            _ => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<LogicError> for Failure {
    fn from(e: LogicError) -> Self {
        match e {
            LogicError::Automaton(a) => a.into(),
            other => Failure::input(other),
        }
    }
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Self {
        match e {
            QuotientError::Automaton(a) => a.into(),
            QuotientError::Logic(l) => l.into(),
            QuotientError::Internal(_) | QuotientError::Numeral(_) => {
                Failure { code: 4, message: e.to_string() }
            }
            other => Failure { code: 3, message: other.to_string() },
        }
    }
}

impl From<ExponentError> for Failure {
    fn from(e: ExponentError) -> Self {
        match e {
            ExponentError::InvalidSequence(_) => Failure::input(e),
            ExponentError::Quotient(q) => q.into(),
            ExponentError::Logic(l) => l.into(),
            ExponentError::Automaton(a) => a.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::input(e)
    }
}

struct Input {
    automaton: Automaton,
    digest: String,
}

fn load(path: &Path) -> Result<Input, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::input(format!("{}: not UTF-8", path.display())))?;
    let automaton = format::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(Input { automaton, digest: report::digest(&bytes) })
}

/// A validated msd-first sequence automaton.
fn load_sequence(path: &Path) -> Result<(Dfao, String), Failure> {
    let input = load(path)?;
    match input.automaton {
        Automaton::Dfao(a) => Ok((exponents::normalize(&a)?, input.digest)),
        Automaton::Dfa(_) => Err(Failure::input(format!("{}: expected kind dfao", path.display()))),
    }
}

/// A canonical msd-first 2-track language.
fn load_pairs(path: &Path) -> Result<(Dfa, String), Failure> {
    let input = load(path)?;
    let dfa = match input.automaton {
        Automaton::Dfa(d) => d,
        Automaton::Dfao(_) => return Err(Failure::input(format!("{}: expected kind dfa", path.display()))),
    };
    if dfa.tracks() != 2 {
        return Err(Failure::input(format!("{}: expected 2 tracks, found {}", path.display(), dfa.tracks())));
    }
    let dfa = match dfa.order() {
        DigitOrder::Msd => dfa,
        DigitOrder::Lsd => dfa.reverse()?,
    };
    Ok((quotient::prepare(&dfa)?, input.digest))
}

fn push_witness(r: &mut RunReport, w: &Witness) {
    r.details.push("witness", w);
    if let Some((num, den)) = exponents::witness_pair(w) {
        r.details.push("witness-pair", format!("{num},{den}"));
    }
}

fn push_value(r: &mut RunReport, value: &ExtRational, attained: Option<bool>) {
    r.result.push("value", value);
    if let (ExtRational::Finite(_), Some(a)) = (value, attained) {
        r.result.push("attained", a);
    }
}

fn render_symbols(s: &PrefixSample) -> String {
    if s.symbols.iter().all(|&d| d < 10) {
        s.symbols.iter().map(|d| d.to_string()).collect()
    } else {
        s.symbols.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn sample(a: &Dfao, n: usize) -> Result<PrefixSample, Failure> {
    if n == 0 {
        return Err(Failure::input("--n must be at least 1"));
    }
    Ok(oracle::sequence_prefix(a, n)?)
}

fn run(command: &Command, echo: String) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut r = match command {
        Command::Exponent { file, which } => {
            let (a, digest) = load_sequence(file)?;
            let res = exponents::measure(&a, (*which).into())?;
            let mut r = RunReport::new(echo, Some(digest));
            push_value(&mut r, &res.value, res.attained);
            r.details.push("measure", res.measure);
            push_witness(&mut r, &res.witness);
            r.details.push("sequence-states", a.num_states());
            r.details.push("language-states", res.language.num_states());
            r
        }
        Command::Recurrence { file } => {
            let (a, digest) = load_sequence(file)?;
            let mut r = RunReport::new(echo, Some(digest));
            match exponents::linear_recurrence(&a)? {
                RecurrenceVerdict::NotRecurrent => {
                    r.result.push("linearly-recurrent", false);
                    r.result.push("reason", "not-recurrent");
                }
                RecurrenceVerdict::Recurrent(res) => {
                    let linear = res.value != ExtRational::Infinite;
                    r.result.push("linearly-recurrent", linear);
                    if linear {
                        push_value(&mut r, &res.value, res.attained);
                    } else {
                        r.result.push("reason", "unbounded-gaps");
                    }
                    push_witness(&mut r, &res.witness);
                    r.details.push("language-states", res.language.num_states());
                }
            }
            r.details.push("sequence-states", a.num_states());
            r
        }
        Command::Sup { file } => {
            let (dfa, digest) = load_pairs(file)?;
            let res = quotient::sup_quo(&dfa)?;
            let mut r = RunReport::new(echo, Some(digest));
            push_value(&mut r, &res.value, Some(res.attained));
            push_witness(&mut r, &res.witness);
            r.details.push("language-states", dfa.num_states());
            r
        }
        Command::Special { file } => {
            let (dfa, digest) = load_pairs(file)?;
            let res = quotient::largest_special_point(&dfa)?;
            let mut r = RunReport::new(echo, Some(digest));
            push_value(&mut r, &res.value, None);
            push_witness(&mut r, &Witness::Pump(res.pump));
            r.details.push("language-states", dfa.num_states());
            r
        }
        Command::Eval { args, formula, vars, dump } => {
            let (text, file) = match (formula, args.as_slice()) {
                (Some(f), [file]) => (f.clone(), file),
                (None, [f, file]) => (f.clone(), file),
                (Some(_), _) => return Err(Failure::input("eval --formula takes exactly one file")),
                (None, _) => return Err(Failure::input("eval needs a formula and a file")),
            };
            let (a, digest) = load_sequence(Path::new(file))?;
            let parsed = logic::parse(&text)?;
            let names: Vec<&str> = vars.iter().map(String::as_str).collect();
            let env = CompilationEnv::for_sequence(&a, &names);
            let mut r = RunReport::new(echo, Some(digest));
            if names.is_empty() {
                r.result.push("value", logic::evaluate_sentence(&parsed, &env)?);
            } else {
                let dfa = logic::compile(&parsed, &env)?;
                let text = format::write(&Automaton::Dfa(dfa.clone()));
                r.result.push("states", dfa.num_states());
                match dump {
                    Some(path) => {
                        std::fs::write(path, &text)
                            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                        r.details.push("dump", path.display());
                    }
                    None => r.body = Some(text),
                }
            }
            r
        }
        Command::Oracle { scan } => match scan {
            OracleCommand::Prefix { file, n } => {
                let (a, digest) = load_sequence(file)?;
                let s = sample(&a, *n)?;
                let mut r = RunReport::new(echo, Some(digest));
                r.result.push("prefix", render_symbols(&s));
                r
            }
            OracleCommand::Scan { file, n, max_period } => {
                let (a, digest) = load_sequence(file)?;
                if *max_period == 0 {
                    return Err(Failure::input("--max-period must be at least 1"));
                }
                let best = oracle::scan_max_exponent(&sample(&a, *n)?, *max_period)
                    .ok_or_else(|| Failure::input("empty sample"))?;
                let mut r = RunReport::new(echo, Some(digest));
                r.result.push("value", best.exponent());
                r.details.push("position", best.position);
                r.details.push("length", best.length);
                r.details.push("period", best.period);
                r
            }
            OracleCommand::Ice { file, n } => {
                let (a, digest) = load_sequence(file)?;
                let best = oracle::scan_ice(&sample(&a, *n)?).ok_or_else(|| Failure::input("empty sample"))?;
                let mut r = RunReport::new(echo, Some(digest));
                r.result.push("value", best.exponent());
                r.details.push("length", best.length);
                r.details.push("period", best.period);
                r
            }
            OracleCommand::Recurrence { file, n, max_len } => {
                let (a, digest) = load_sequence(file)?;
                let best = oracle::scan_recurrence(&sample(&a, *n)?, *max_len)
                    .ok_or_else(|| Failure::input("no factor occurs twice in the sample"))?;
                let mut r = RunReport::new(echo, Some(digest));
                r.result.push("value", best.ratio());
                r.details.push("position", best.position);
                r.details.push("length", best.length);
                r.details.push("gap", best.gap);
                r
            }
        },
    };
    r.elapsed = start.elapsed();
    Ok(r)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("CRITEX_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::input(format!("CRITEX_THREADS: not a number: {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 4, message: e.to_string() })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match configure_threads().and_then(|()| run(&cli.command, echo)) {
        Ok(r) => {
            print!("{}", r.render(cli.json));
            ExitCode::SUCCESS
        }
        Err(f) => {
            if cli.json {
                println!("{}", serde_json::json!({ "error": f.message, "exit_code": f.code }));
            }
            eprintln!("critex: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
