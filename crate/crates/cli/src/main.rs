//! Single entry point binding all commands with JSON in/out and a
//! reproducibility manifest stamped on every report.
//!
//! Exit codes: 0 accept/success, 1 reject (or: violations found, bad
//! string found within budget, not frustration-free), 2 error, 64 usage.
//! Reports are JSON objects `{manifest, report}`; identical manifests
//! produce byte-identical output modulo the wall-time field.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num::ToPrimitive;
use serde_json::json;

use stoqwalk::circuit::{self, CompileOptions};
use stoqwalk::decompose;
use stoqwalk::expansion::{self, ExpansionOutcome};
use stoqwalk::format::{self, AnyInstance};
use stoqwalk::graph;
use stoqwalk::instance::{self, HamiltonianInstance, Term};
use stoqwalk::oracle::{self, Method};
use stoqwalk::verify::{self, VerifierConfig};
use stoqwalk::DitString;

#[derive(Parser)]
#[command(
    name = "stoqwalk",
    about = "Verification toolkit for uniform stoquastic local Hamiltonians and SetCSPs",
    version
)]
struct Cli {
    /// Worker threads for parallel trials (env: STOQWALK_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Base seed for randomized procedures (env: STOQWALK_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Numeric tolerance for decomposition analyses (env: STOQWALK_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file and report violations.
    Validate { file: PathBuf },
    /// Print groundspace classes of each term, or the non-uniformity
    /// diagnosis.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        term: Option<usize>,
    },
    /// Monte Carlo random-walk statistics from a start string.
    Walk {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Bounded-radius breadth-first search for a bad string.
    Bfs {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        radius: usize,
    },
    /// Run a decision procedure on a witness.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        witness: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Search radius (np), or the ball parameter t (negligible).
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Layered expansion from a start string: frustrated layers, light
    /// cone, and the reconstructed path.
    Expand {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        max_layers: Option<usize>,
        /// Include per-layer supports in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Exact ground-truth queries.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        what: OracleQuery,
    },
    /// Compile a reversible verification circuit into an instance.
    Compile {
        circuit: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        pinned: bool,
        #[arg(long)]
        degree_reduce: bool,
    },
    /// Convert between the Hamiltonian and SetCSP presentations.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Np,
    Ma,
    Pinned,
    Commuting,
    Negligible,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleQuery {
    Energy,
    Ff,
    Minunsat,
    Witness,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Setcsp,
    Hamiltonian,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Render clap's help/version normally, usage errors at 64.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Option<T> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let started = Instant::now();
    let seed = cli.seed.or_else(|| env_parse("STOQWALK_SEED")).unwrap_or(0);
    let tol = cli.tol.or_else(|| env_parse("STOQWALK_TOL")).unwrap_or(decompose::DEFAULT_TOL);
    let threads = cli.threads.or_else(|| env_parse("STOQWALK_THREADS"));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().ok();
    }

    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, command_name, report) = dispatch(&cli.command, seed, tol)?;
    let manifest = json!({
        "command": command_name,
        "arguments": args,
        "seed": seed,
        "tolerances": {
            "decompose": tol,
            "eigen_residual": oracle::RESIDUAL_TOL,
            "zero_energy": oracle::ZERO_ENERGY_TOL,
        },
        "wall_time_ms": started.elapsed().as_millis() as u64,
    });
    println!("{}", serde_json::to_string_pretty(&json!({ "manifest": manifest, "report": report }))?);
    Ok(code)
}

fn load_instance(path: &PathBuf) -> Result<HamiltonianInstance> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format::parse_instance(&bytes)?)
}

fn parse_start(s: &str) -> Result<DitString> {
    Ok(s.parse::<DitString>()?)
}

fn dispatch(
    command: &Command,
    seed: u64,
    tol: f64,
) -> Result<(ExitCode, &'static str, serde_json::Value)> {
    match command {
        Command::Validate { file } => {
            let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
            match format::parse_instance(&bytes) {
                Ok(inst) => {
                    let report = validation_report(&inst);
                    Ok((ExitCode::SUCCESS, "validate", report))
                }
                Err(e) => Ok((
                    ExitCode::from(1),
                    "validate",
                    json!({ "valid": false, "violations": [e.to_string()] }),
                )),
            }
        }
        Command::Decompose { file, term } => {
            let inst = load_instance(file)?;
            let indices: Vec<usize> = match term {
                Some(i) => {
                    if *i >= inst.num_terms() {
                        return Err(anyhow!("term {i} out of range ({} terms)", inst.num_terms()));
                    }
                    vec![*i]
                }
                None => (0..inst.num_terms()).collect(),
            };
            let mut all_uniform = true;
            let mut terms = Vec::new();
            for i in indices {
                let entry = match &inst.terms()[i] {
                    Term::Sets(_) => json!({
                        "term": i,
                        "uniform": true,
                        "classes": classes_json(inst.ground(i)?),
                        "source": "sets",
                    }),
                    Term::Matrix(m) => match decompose::decompose_term(m, inst.alphabet(), tol) {
                        Ok(classes) => json!({
                            "term": i,
                            "uniform": true,
                            "classes": classes.iter().map(|c| c.iter().map(|s| s.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                            "groundshift": m.shift,
                            "source": "matrix",
                        }),
                        Err(e) => {
                            all_uniform = false;
                            json!({ "term": i, "uniform": false, "diagnosis": e.to_string() })
                        }
                    },
                };
                terms.push(entry);
            }
            let code = if all_uniform { ExitCode::SUCCESS } else { ExitCode::from(1) };
            Ok((code, "decompose", json!({ "terms": terms })))
        }
        Command::Walk { file, start, steps, trials } => {
            let inst = load_instance(file)?;
            let x = parse_start(start)?;
            let steps = steps.unwrap_or(64 * inst.num_dits() * inst.num_terms());
            let report = verify::ma_verify(&inst, &x, steps, *trials, seed)?;
            let value = json!({
                "accept_rate": report.acceptance,
                "trials": report.trials,
                "steps": steps,
                "sample_reject_path": report.sample_reject,
            });
            Ok((ExitCode::SUCCESS, "walk", value))
        }
        Command::Bfs { file, start, radius } => {
            let inst = load_instance(file)?;
            let x = parse_start(start)?;
            let found = graph::bfs_to_bad(&x, &inst, *radius, graph::DEFAULT_FRONTIER_CAP)?;
            let code = if found.is_some() { ExitCode::from(1) } else { ExitCode::SUCCESS };
            Ok((code, "bfs", json!({ "radius": radius, "bad_path": found })))
        }
        Command::Verify { file, mode, witness, epsilon, radius, steps, trials } => {
            let inst = load_instance(file)?;
            let cfg = VerifierConfig {
                epsilon: *epsilon,
                radius: *radius,
                steps: *steps,
                trials: *trials,
                seed,
                frontier_cap: graph::DEFAULT_FRONTIER_CAP,
            };
            let need_witness = || -> Result<DitString> {
                witness
                    .as_deref()
                    .ok_or_else(|| anyhow!("--witness is required for this mode"))
                    .and_then(parse_start)
            };
            let (accept, value) = match mode {
                Mode::Np => {
                    let v = verify::np_verify(&inst, &need_witness()?, &cfg)?;
                    (v.is_accept(), json!({ "mode": "np", "verdict": v }))
                }
                Mode::Negligible => {
                    let t = radius.ok_or_else(|| anyhow!("--radius (= t) is required for negligible mode"))?;
                    let v = verify::negligible_verify(&inst, &need_witness()?, t, &cfg)?;
                    (v.is_accept(), json!({ "mode": "negligible", "t": t, "verdict": v }))
                }
                Mode::Pinned => {
                    let v = verify::pinned_verify(&inst, &cfg)?;
                    (v.is_accept(), json!({ "mode": "pinned", "verdict": v }))
                }
                Mode::Commuting => {
                    let v = verify::commuting_verify(&inst, &need_witness()?, &cfg)?;
                    (v.is_accept(), json!({ "mode": "commuting", "verdict": v }))
                }
                Mode::Ma => {
                    let report = verify::ma_verify_with(&inst, &need_witness()?, &cfg)?;
                    let accept = report.acceptance >= 2.0 / 3.0;
                    (accept, json!({ "mode": "ma", "report": report }))
                }
            };
            let code = if accept { ExitCode::SUCCESS } else { ExitCode::from(1) };
            Ok((code, "verify", value))
        }
        Command::Expand { file, start, epsilon, max_layers, trace } => {
            let inst = load_instance(file)?;
            let x = parse_start(start)?;
            let max_layers = match max_layers {
                Some(l) => *l,
                None => {
                    let bound = graph::theoretical_radius(
                        *epsilon,
                        inst.locality() as u32,
                        inst.degree() as u32,
                        inst.alphabet().q(),
                    )?;
                    bound.ell_star.min(1 << 20) as usize
                }
            };
            let run = expansion::layers_to_bad(&x, &inst, *epsilon, max_layers)?;
            let mut layer_rows = Vec::new();
            for (i, layer) in run.layers.iter().enumerate() {
                let mut row = json!({
                    "layer": i + 1,
                    "terms": layer.terms,
                    "support_size": run.supports[i + 1].len(),
                    "growth_factor": run.growth[i],
                });
                if *trace {
                    row["support"] = json!(run.supports[i + 1]
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>());
                }
                layer_rows.push(row);
            }
            let value = match &run.outcome {
                ExpansionOutcome::BadFound { bad, apex } => {
                    let cone = expansion::lightcone(&run.layers, *apex, &inst)?;
                    let path = expansion::reconstruct_path(&x, &cone, &inst)?;
                    json!({
                        "outcome": "bad_found",
                        "bad_string": bad.to_string(),
                        "apex_term": apex,
                        "layers": layer_rows,
                        "lightcone": cone.layers.iter().map(|l| l.terms.clone()).collect::<Vec<_>>(),
                        "path": path,
                    })
                }
                ExpansionOutcome::Exhausted => json!({
                    "outcome": "exhausted",
                    "layers": layer_rows,
                    "max_layers": max_layers,
                }),
            };
            let code = match run.outcome {
                ExpansionOutcome::BadFound { .. } => ExitCode::SUCCESS,
                ExpansionOutcome::Exhausted => ExitCode::from(1),
            };
            Ok((code, "expand", value))
        }
        Command::Oracle { file, what } => {
            let inst = load_instance(file)?;
            match what {
                OracleQuery::Energy => {
                    let dim = inst.alphabet().dim(inst.num_dits())?;
                    let method = if dim <= 1 << 10 { Method::Dense } else { Method::Iterative };
                    let report = oracle::ground_energy(&inst, method)?;
                    let value = json!({
                        "lambda_min": report.lambda_min,
                        "method": report.method,
                        "residual": report.residual,
                        "frustration_free": report.is_frustration_free(),
                    });
                    Ok((ExitCode::SUCCESS, "oracle", value))
                }
                OracleQuery::Ff => {
                    let cert = oracle::exact_frustration_free(&inst)?;
                    let value = json!({
                        "frustration_free": cert.frustration_free,
                        "component": cert.component.map(|c| c.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
                    });
                    let code = if cert.frustration_free { ExitCode::SUCCESS } else { ExitCode::from(1) };
                    Ok((code, "oracle", value))
                }
                OracleQuery::Minunsat => {
                    let csp = instance::to_setcsp(&inst)?;
                    let min = oracle::min_unsat_over_subsets(&csp)?;
                    let value = json!({
                        "min_unsat": min.to_string(),
                        "min_unsat_float": min.to_f64(),
                    });
                    Ok((ExitCode::SUCCESS, "oracle", value))
                }
                OracleQuery::Witness => {
                    let w = oracle::witness_from_groundstate(&inst)?;
                    Ok((ExitCode::SUCCESS, "oracle", json!({ "witness": w.to_string() })))
                }
            }
        }
        Command::Compile { circuit: path, output, pinned, degree_reduce } => {
            let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let mut c = circuit::parse_circuit(&bytes)?;
            if *degree_reduce {
                c = circuit::degree_reduce(&c)?;
            }
            let inst = circuit::compile(&c, CompileOptions { pinned: *pinned })?;
            std::fs::write(output, format::render_instance(&inst)?)
                .with_context(|| format!("writing {}", output.display()))?;
            let value = json!({
                "output": output.display().to_string(),
                "num_qubits": inst.num_dits(),
                "num_terms": inst.num_terms(),
                "k": inst.locality(),
                "d": inst.degree(),
                "max_wire_uses": circuit::max_wire_uses(&c),
                "entry_set": circuit::emitted_entry_set(&inst),
            });
            Ok((ExitCode::SUCCESS, "compile", value))
        }
        Command::Convert { file, to, output } => {
            let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
            let text = match (format::parse_any(&bytes)?, to) {
                (AnyInstance::Hamiltonian(h), Target::Setcsp) => {
                    format::render_setcsp(&instance::to_setcsp(&h)?)?
                }
                (AnyInstance::SetCsp(c), Target::Hamiltonian) => {
                    format::render_instance(&instance::from_setcsp(&c)?)?
                }
                (AnyInstance::Hamiltonian(h), Target::Hamiltonian) => format::render_instance(&h)?,
                (AnyInstance::SetCsp(c), Target::Setcsp) => format::render_setcsp(&c)?,
            };
            match output {
                Some(path) => std::fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{text}"),
            }
            Ok((ExitCode::SUCCESS, "convert", json!({ "written": output.is_some() })))
        }
    }
}

fn classes_json(ground: &stoqwalk::SetConstraint) -> serde_json::Value {
    json!(ground
        .classes
        .iter()
        .map(|c| c.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn validation_report(inst: &HamiltonianInstance) -> serde_json::Value {
    let mut per_qudit = vec![0usize; inst.num_dits()];
    for term in inst.terms() {
        for &q in term.qudits() {
            per_qudit[q] += 1;
        }
    }
    let shifts: Vec<serde_json::Value> = inst
        .terms()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t {
            Term::Matrix(m) if m.shift != 0.0 => {
                Some(json!({ "term": i, "groundshift": m.shift }))
            }
            _ => None,
        })
        .collect();
    let uniformity: Vec<serde_json::Value> = inst
        .uniformity_report()
        .iter()
        .enumerate()
        .map(|(i, r)| match r {
            Ok(_) => json!({ "term": i, "uniform": true }),
            Err(reason) => json!({ "term": i, "uniform": false, "diagnosis": reason }),
        })
        .collect();
    json!({
        "valid": true,
        "violations": [],
        "num_dits": inst.num_dits(),
        "num_terms": inst.num_terms(),
        "alphabet_size": inst.alphabet().q(),
        "declared_k": inst.locality(),
        "declared_d": inst.degree(),
        "max_observed_degree": per_qudit.iter().max(),
        "groundshifts": shifts,
        "uniformity": uniformity,
    })
}
