//! `condcompat`: compatibility of full conditional distributions from the
//! command line.
//!
//! Exit codes: 0 success / compatible, 1 incompatible, 2 invalid input,
//! 3 resource cap exceeded, 4 decider disagreement or internal error.

mod document;

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use condcompat::graph::enumerate_circuits_bruteforce;
use condcompat::{
    build_graph, build_matrix, check_compatibility_oracle, enumerate_induced_circuits, generators,
    minor_unimodularity_probe, reconstruct_joint, symmetry_orbits, CheckOptions, EnumerationCaps,
    Error, GeneratorSet, OrbitPartition, Rational, TheoremChecker, ValidatedProblem, Verdict,
};
use serde_json::json;

use document::ProblemDocument;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Cap(String),
    Bug(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Bug(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Cap(m) => write!(f, "resource cap exceeded: {m}"),
            CliError::Bug(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_cap() {
            CliError::Cap(e.to_string())
        } else if matches!(e, Error::DeciderDisagreement(_) | Error::Internal(_)) {
            CliError::Bug(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "condcompat",
    version,
    about = "Decide compatibility of full conditional distributions exactly"
)]
struct Cli {
    /// Abort circuit enumeration beyond this many circuits.
    #[arg(long, global = true, env = "CONDCOMPAT_MAX_CIRCUITS")]
    max_circuits: Option<usize>,
    /// Abort if an induced circuit longer than this (in edges) exists.
    #[arg(long, global = true, env = "CONDCOMPAT_MAX_LENGTH")]
    max_length: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the incidence matrix.
    Matrix {
        /// Problem document, or `-` for stdin.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
        format: MatrixFormat,
        /// Instead of the matrix, print a sampled minor probe with this many samples.
        #[arg(long)]
        probe: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the bipartite compatibility graph.
    Graph {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// List the induced circuits.
    Circuits {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        /// Use the exhaustive simple-cycle oracle instead.
        #[arg(long)]
        bruteforce: bool,
    },
    /// List the circuit binomials generating the compatibility ideal.
    Generators {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
        /// Group generators into symmetry orbits.
        #[arg(long)]
        orbits: bool,
    },
    /// Symmetry orbits of the generators.
    Orbits {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Decide compatibility of the arrays in the document.
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Report every violated generator, not just the first.
        #[arg(long)]
        all_witnesses: bool,
    },
    /// Reconstruct a joint distribution from compatible arrays.
    Reconstruct {
        input: PathBuf,
        /// Comma-separated positive component weights, e.g. `1,3`.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<String>>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MatrixFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TextFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Theorem,
    Oracle,
    Both,
}

struct Output {
    stdout: String,
    code: u8,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

fn read_input(path: &PathBuf) -> Result<ProblemDocument, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Invalid(format!("cannot read stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?
    };
    ProblemDocument::parse(&text)
}

fn caps_for(cli: &Cli, doc: &ProblemDocument) -> EnumerationCaps {
    let from_doc = doc.caps.unwrap_or_default();
    let defaults = EnumerationCaps::default();
    EnumerationCaps {
        max_circuits: cli
            .max_circuits
            .or(from_doc.max_circuits)
            .unwrap_or(defaults.max_circuits),
        max_length: cli
            .max_length
            .or(from_doc.max_length)
            .or(defaults.max_length),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    s
}

fn generator_listing(
    set: &GeneratorSet,
    problem: &ValidatedProblem,
    orbits: Option<&OrbitPartition>,
) -> String {
    let mut out = String::new();
    match orbits {
        Some(o) => {
            let _ = writeln!(out, "{} generators in {} orbits", set.len(), o.len());
        }
        None => {
            let _ = writeln!(out, "{} generators", set.len());
        }
    }
    for (degree, count) in set.degree_histogram() {
        let _ = writeln!(out, "degree {degree}: {count}");
    }
    match orbits {
        Some(o) => {
            for (k, orbit) in o.orbits.iter().enumerate() {
                let rep = &set.binomials[orbit.representative];
                let _ = writeln!(
                    out,
                    "orbit {} (size {}, degree {}): {}",
                    k + 1,
                    orbit.members.len(),
                    rep.degree(),
                    rep.render(problem)
                );
                for &m in &orbit.members {
                    let _ = writeln!(out, "  {}", set.binomials[m].render(problem));
                }
            }
        }
        None => {
            for b in &set.binomials {
                let _ = writeln!(out, "{}", b.render(problem));
            }
        }
    }
    out
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Matrix {
            input,
            format,
            probe,
            seed,
        } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let matrix = build_matrix(&problem)?;
            if let Some(samples) = probe {
                let report = minor_unimodularity_probe(&matrix, *samples, *seed)?;
                return Ok(Output::ok(pretty(
                    &serde_json::to_value(report).expect("json"),
                )));
            }
            Ok(Output::ok(match format {
                MatrixFormat::Csv => matrix.to_csv(),
                MatrixFormat::Json => pretty(&matrix.to_json()),
            }))
        }
        Command::Graph { input, format } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let graph = build_graph(&problem)?;
            Ok(Output::ok(match format {
                GraphFormat::Dot => graph.to_dot(),
                GraphFormat::Json => pretty(&graph.to_json()),
            }))
        }
        Command::Circuits {
            input,
            format,
            bruteforce,
        } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let caps = caps_for(cli, &doc);
            let graph = build_graph(&problem)?;
            let set = if *bruteforce {
                enumerate_circuits_bruteforce(&graph, caps)?
            } else {
                enumerate_induced_circuits(&graph, caps)?
            };
            Ok(Output::ok(match format {
                TextFormat::Json => pretty(&set.to_json(&graph)),
                TextFormat::Text => {
                    let mut out = format!("{} induced circuits\n", set.len());
                    for (len, count) in &set.histogram {
                        let _ = writeln!(out, "length {len}: {count}");
                    }
                    for c in &set.circuits {
                        let labels: Vec<String> = c
                            .vertices()
                            .iter()
                            .map(|&v| graph.label(v).short())
                            .collect();
                        let _ = writeln!(out, "{}", labels.join(" "));
                    }
                    out
                }
            }))
        }
        Command::Generators {
            input,
            format,
            orbits,
        } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let set = generators(&problem, caps_for(cli, &doc))?;
            let partition = if *orbits {
                Some(symmetry_orbits(&set, &problem)?)
            } else {
                None
            };
            Ok(Output::ok(match format {
                TextFormat::Text => generator_listing(&set, &problem, partition.as_ref()),
                TextFormat::Json => {
                    let mut value = set.to_json(&problem);
                    if let Some(p) = &partition {
                        value["orbits"] = p.to_json(&set, &problem)["orbits"].clone();
                    }
                    pretty(&value)
                }
            }))
        }
        Command::Orbits { input, format } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let set = generators(&problem, caps_for(cli, &doc))?;
            let partition = symmetry_orbits(&set, &problem)?;
            Ok(Output::ok(match format {
                TextFormat::Text => generator_listing(&set, &problem, Some(&partition)),
                TextFormat::Json => pretty(&partition.to_json(&set, &problem)),
            }))
        }
        Command::Check {
            input,
            mode,
            all_witnesses,
        } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let arrays = doc.arrays(&problem)?;
            let options = CheckOptions {
                all_witnesses: *all_witnesses,
            };
            let theorem = match mode {
                Mode::Oracle => None,
                _ => Some(
                    TheoremChecker::new(&problem, caps_for(cli, &doc))?.check(&arrays, options)?,
                ),
            };
            let oracle = match mode {
                Mode::Theorem => None,
                _ => Some(check_compatibility_oracle(&arrays, &problem)?),
            };
            let verdict: &Verdict = theorem
                .as_ref()
                .or(oracle.as_ref())
                .expect("one decider ran");
            let mut value = verdict.to_json(&problem);
            value["mode"] = json!(format!("{mode:?}").to_lowercase());
            if *all_witnesses && *mode != Mode::Oracle {
                let all: Vec<_> = verdict
                    .witness
                    .iter()
                    .chain(&verdict.extra_witnesses)
                    .map(|w| w.to_json(&problem))
                    .collect();
                value["all_witnesses"] = json!(all);
            }
            if let (Some(t), Some(o)) = (&theorem, &oracle) {
                if t.compatible != o.compatible {
                    return Err(CliError::Bug(format!(
                        "theorem checker says compatible={}, oracle says compatible={}",
                        t.compatible, o.compatible
                    )));
                }
                value["oracle_witness"] = json!(o.witness.as_ref().map(|w| w.to_json(&problem)));
            }
            Ok(Output {
                stdout: pretty(&value),
                code: if verdict.compatible { 0 } else { 1 },
            })
        }
        Command::Reconstruct { input, weights } => {
            let doc = read_input(input)?;
            let problem = doc.problem()?;
            let arrays = doc.arrays(&problem)?;
            let weights: Option<Vec<Rational>> = weights
                .as_ref()
                .map(|ws| {
                    ws.iter()
                        .map(|w| w.parse::<Rational>())
                        .collect::<Result<_, _>>()
                })
                .transpose()
                .map_err(|e| CliError::Invalid(format!("bad weight: {e}")))?;
            match reconstruct_joint(&arrays, &problem, weights.as_deref()) {
                Ok((joint, dof)) => Ok(Output::ok(pretty(&json!({
                    "joint": condcompat::decide::nest_rationals(joint.entries(), problem.dims()),
                    "dof": dof,
                })))),
                Err(Error::IncompatibleInput) => Ok(Output {
                    stdout: pretty(
                        &json!({ "joint": null, "error": "input conditionals are not compatible" }),
                    ),
                    code: 1,
                }),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(output.stdout.as_bytes());
            let _ = stdout.flush();
            ExitCode::from(output.code)
        }
        Err(e) => {
            eprintln!("condcompat: {e}");
            ExitCode::from(e.code())
        }
    }
}
