//! Command-line front end.
//!
//! Every command writes one JSON document to `--out` or standard output.
//! Exit status: 0 on success, 1 when `certify` or `model` finds the data
//! nonclassical, 2 on input errors, 3 when the row budget is exhausted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::elimination::{eliminate_all, to_original, EliminationOptions, IneqSystem, DEFAULT_ROW_BUDGET};
use crate::error::{Error, Result};
use crate::feasibility::{certify, evaluate, nc_bound, witness_to_inequality, DataScaling, NcInequality, Verdict};
use crate::fragment::{lump, square_bit_fragment, stabilizer_qubit_fragment, DataTable, GptFragment, LabeledMatrix};
use crate::identities::{identities, ProcessKind};
use crate::model::build_and_verify;
use crate::polytope::{enumerate_vertices, measurement_polytope, source_polytope};
use crate::rational::Rational;
use crate::robustness::robustness;
use crate::sampling::sample_tables;
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(
    name = "ncptm",
    version,
    about = "Exact noncontextuality certification for prepare-transform-measure scenarios"
)]
pub struct Cli {
    /// Write the JSON result here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Measurement,
    Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    StabilizerQubit,
    SquareBit,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generating set of linear operational identities
    Identities {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        kind: ProcessKind,
    },
    /// Vertices of an assignment polytope
    Polytope {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Decide whether a data table admits a noncontextual model
    Certify { scenario: PathBuf, data: PathBuf },
    /// Complete inequality set by Fourier-Motzkin elimination
    EnumerateInequalities {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ROW_BUDGET)]
        row_budget: usize,
        /// Eliminate the flag-convexified system and map the result back
        #[arg(long)]
        flag_convexified: bool,
        /// Compare the result with the feasibility program on this many random tables
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate an inequality on a data table
    Evaluate { inequality: PathBuf, data: PathBuf },
    /// Noncontextual bound of an inequality
    Bound { scenario: PathBuf, inequality: PathBuf },
    /// Build and verify a candidate ontological model
    Model { scenario: PathBuf, data: PathBuf },
    /// Compose two transformation stages into one
    Lump {
        scenario: PathBuf,
        /// JSON object {"first": [...], "second": [...]} of labeled matrices
        stages: PathBuf,
    },
    /// Write a built-in scenario and its predicted data
    Example {
        #[arg(value_enum)]
        name: Example,
    },
    /// Bracket the mixing weight at which the data become classical
    Robustness {
        scenario: PathBuf,
        data: PathBuf,
        /// Mixing target; the uniform table when absent
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value = "1/1024")]
        precision: Rational,
    },
}

#[derive(Deserialize)]
struct Stages {
    first: Vec<LabeledMatrix>,
    second: Vec<LabeledMatrix>,
}

#[derive(Serialize)]
struct CrossCheck {
    seed: u64,
    samples: usize,
    feasible: usize,
    disagreements: usize,
}

/// Result of a command: the JSON artifact and the exit status.
pub struct Outcome {
    pub code: u8,
    pub json: Value,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Outcome { code: 0, json }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_fragment(path: &Path) -> Result<GptFragment> {
    GptFragment::from_json(&read(path)?)
}

fn load_table(path: &Path) -> Result<DataTable> {
    DataTable::from_json(&read(path)?)
}

fn load_inequality(path: &Path) -> Result<NcInequality> {
    Ok(serde_json::from_str(&read(path)?)?)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Identities { scenario, kind } => {
            let f = load_fragment(scenario)?;
            Ok(Outcome::ok(serde_json::to_value(identities(&f, *kind)?)?))
        }
        Command::Polytope { scenario, which } => {
            let f = load_fragment(scenario)?;
            let h = match which {
                Which::Measurement => measurement_polytope(&f, &identities(&f, ProcessKind::Effects)?)?,
                Which::Source => source_polytope(&f, &identities(&f, ProcessKind::States)?)?,
            };
            Ok(Outcome::ok(serde_json::to_value(enumerate_vertices(&h)?)?))
        }
        Command::Certify { scenario, data } => {
            let sc = Scenario::new(load_fragment(scenario)?)?;
            let p = sc.program(&load_table(data)?)?;
            let r = certify(&p)?;
            Ok(match r.verdict {
                Verdict::Feasible => Outcome::ok(json!({ "verdict": r.verdict, "x": r.x })),
                Verdict::Infeasible => Outcome {
                    code: 1,
                    json: json!({
                        "verdict": r.verdict,
                        "witness_inequality": witness_to_inequality(&r, &p)?,
                        "violation": r.witness_value,
                    }),
                },
            })
        }
        Command::EnumerateInequalities {
            scenario,
            row_budget,
            flag_convexified,
            samples,
            seed,
        } => {
            let sc = Scenario::new(load_fragment(scenario)?)?;
            let scaling = if *flag_convexified {
                DataScaling::FlagConvexified
            } else {
                DataScaling::Original
            };
            let sys = IneqSystem::from_skeleton(&sc.skeleton(scaling)?);
            let opts = EliminationOptions {
                row_budget: *row_budget,
                ..EliminationOptions::default()
            };
            let mut e = eliminate_all(&sys, &opts)?;
            if *flag_convexified {
                e.inequalities = to_original(&e.inequalities, sc.num_states());
            }
            let mut json = json!({
                "inequalities": e.inequalities,
                "complete": e.complete,
                "diagnostics": e.diagnostics,
            });
            if *samples > 0 && e.complete {
                let sk = sc.skeleton(DataScaling::Original)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut check = CrossCheck {
                    seed: *seed,
                    samples: *samples,
                    feasible: 0,
                    disagreements: 0,
                };
                for s in sample_tables(&sk, &sc.fragment.measurements, *samples, &mut rng)? {
                    let feasible = certify(&sk.with_data(&s.table)?)?.is_feasible();
                    let mut satisfied = true;
                    for q in &e.inequalities {
                        satisfied &= evaluate(q, &s.table)?.satisfied;
                    }
                    check.feasible += feasible as usize;
                    check.disagreements += (feasible != satisfied) as usize;
                }
                if check.disagreements > 0 {
                    return Err(Error::Inconsistent(format!(
                        "inequality set disagrees with the feasibility program on {} of {} tables",
                        check.disagreements, check.samples
                    )));
                }
                json["cross_check"] = serde_json::to_value(check)?;
            }
            Ok(Outcome {
                code: if e.complete { 0 } else { 3 },
                json,
            })
        }
        Command::Evaluate { inequality, data } => {
            let q = load_inequality(inequality)?;
            Ok(Outcome::ok(serde_json::to_value(evaluate(&q, &load_table(data)?)?)?))
        }
        Command::Bound { scenario, inequality } => {
            let sc = Scenario::new(load_fragment(scenario)?)?;
            let q = load_inequality(inequality)?;
            let bound = nc_bound(&q, &sc.skeleton(DataScaling::Original)?)?;
            Ok(Outcome::ok(json!({ "bound": bound, "constant": q.constant })))
        }
        Command::Model { scenario, data } => {
            let sc = Scenario::new(load_fragment(scenario)?)?;
            let table = load_table(data)?;
            let p = sc.program(&table)?;
            let r = certify(&p)?;
            let Some(x) = r.x else {
                return Ok(Outcome {
                    code: 1,
                    json: json!({
                        "verdict": r.verdict,
                        "witness_inequality": witness_to_inequality(&r, &p)?,
                        "violation": r.witness_value,
                    }),
                });
            };
            let (model, report) = build_and_verify(&x, &sc.fragment, &table, &sc.phi, &sc.psi, sc.identity_sets())?;
            Ok(Outcome::ok(json!({ "model": model, "report": report })))
        }
        Command::Lump { scenario, stages } => {
            let base = load_fragment(scenario)?;
            let st: Stages = serde_json::from_str(&read(stages)?)?;
            Ok(Outcome::ok(serde_json::to_value(lump(&st.first, &st.second, &base)?)?))
        }
        Command::Example { name } => {
            let f = match name {
                Example::StabilizerQubit => stabilizer_qubit_fragment(),
                Example::SquareBit => square_bit_fragment(),
            };
            let data = f.predict()?;
            Ok(Outcome::ok(json!({ "scenario": f, "data": data })))
        }
        Command::Robustness {
            scenario,
            data,
            target,
            precision,
        } => {
            let sc = Scenario::new(load_fragment(scenario)?)?;
            let table = load_table(data)?;
            let target = match target {
                Some(path) => load_table(path)?,
                None => DataTable::uniform(&sc.fragment)?,
            };
            let bracket = robustness(&sc.skeleton(DataScaling::Original)?, &table, &target, precision)?;
            Ok(Outcome::ok(serde_json::to_value(bracket)?))
        }
    }
}

/// Writes the artifact. For `example` with `--out`, the path is a directory
/// that receives `scenario.json` and `data.json`.
fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    match (&cli.out, &cli.command) {
        (Some(dir), Command::Example { .. }) => {
            fs::create_dir_all(dir)?;
            fs::write(
                dir.join("scenario.json"),
                serde_json::to_string_pretty(&outcome.json["scenario"])?,
            )?;
            fs::write(
                dir.join("data.json"),
                serde_json::to_string_pretty(&outcome.json["data"])?,
            )?;
        }
        (Some(path), _) => fs::write(path, serde_json::to_string_pretty(&outcome.json)?)?,
        (None, _) => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", serde_json::to_string_pretty(&outcome.json)?)?;
        }
    }
    Ok(())
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        _ => 2,
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    let result = run(&cli).and_then(|o| emit(&cli, &o).map(|_| o.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
