use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sosfold::ellipsoid::CcSettings;
use sosfold::iso::{self, CollapseRow, Graph};
use sosfold::json;
use sosfold::linalg::IndexSet;
use sosfold::lp::solve_lp;
use sosfold::rational::{format_rat, int, parse_rat};
use sosfold::sdp::{feasibility_eps_r, EpsRVerdict, SdpSet, SymSparse};
use sosfold::sos::{
    refutation_search_traced, RefutationStatus, RefutationVerdict, RefutationWitness, SearchOptions,
};
use sosfold::trace::Trace;
use sosfold::{Error, Rat};

#[derive(Parser)]
#[command(name = "sosfold", version, about = "Exact-rational ellipsoid, SOS refutation and WL tools")]
struct Cli {
    /// Write ellipsoid queries and refinements as JSON lines.
    #[arg(long, global = true, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Seed for randomized choices (only `fold-demo` draws randomness).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear programs.
    Lp {
        #[command(subcommand)]
        command: LpCommand,
    },
    /// Semidefinite feasibility.
    Sdp {
        #[command(subcommand)]
        command: SdpCommand,
    },
    /// Sum-of-squares refutations of 0/1 systems.
    Sos {
        #[command(subcommand)]
        command: SosCommand,
    },
    /// Graph isomorphism harness.
    Iso {
        #[command(subcommand)]
        command: IsoCommand,
    },
    /// Runs the folded ellipsoid on a permutation-symmetric semidefinite set.
    FoldDemo {
        /// Number of matrix rows.
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
}

#[derive(Subcommand)]
enum LpCommand {
    /// Minimizes the objective subject to `row . x <= rhs` over free variables.
    Solve { file: PathBuf },
}

#[derive(Subcommand)]
enum SdpCommand {
    /// Decides the (R, eps) question; repeat `--epsilon` for a decreasing schedule.
    Feas {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = rat_arg)]
        radius: Option<Rat>,
        #[arg(long, value_parser = rat_arg, required = true)]
        epsilon: Vec<Rat>,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Subcommand)]
enum SosCommand {
    Refute {
        #[arg(long)]
        system: PathBuf,
        /// Proof degree `2d`.
        #[arg(long)]
        degree: u32,
        /// Largest radius of the schedule 1, 2, 4, ...
        #[arg(long, value_parser = rat_arg)]
        radius_max: Option<Rat>,
        /// Skip the exact certificate search and use only the ellipsoid.
        #[arg(long)]
        ellipsoid_only: bool,
        #[arg(long, value_name = "FILE")]
        emit_certificate: Option<PathBuf>,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Subcommand)]
enum IsoCommand {
    Compare {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
        /// Largest proof degree `2D`.
        #[arg(long, default_value_t = 4)]
        max_degree: u32,
        #[arg(long, default_value_t = 4)]
        wl_cap: usize,
    },
    /// Runs `compare` on every pair file `{"id", "g", "h"}` in a directory.
    Collapse {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_degree: u32,
        #[arg(long, default_value_t = 4)]
        wl_cap: usize,
    },
    /// `C^k` equivalence.
    Wl {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct Limits {
    /// Per-segment ellipsoid iteration cap.
    #[arg(long)]
    iteration_cap: Option<u64>,
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::IndexMismatch(_) | Error::InvalidArgument(_) => Failure::Input(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

struct Outcome {
    report: Value,
    decided: bool,
}

impl Outcome {
    fn decided(report: Value) -> Self {
        Outcome { report, decided: true }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is the inconclusive code here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(msg) = set_threads(n) {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    let mut trace = Trace::default();
    let result = run(&cli, &mut trace);
    if let Some(path) = &cli.trace {
        if let Err(e) = fs::write(path, trace.to_json_lines()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    match result {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.report).expect("reports serialize"));
            ExitCode::from(if out.decided { 0 } else { 2 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Result<(), String> {
    if n == 1 {
        Ok(())
    } else {
        Err("built without the parallel feature; only --threads 1 is available".into())
    }
}

fn run(cli: &Cli, trace: &mut Trace) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Lp { command: LpCommand::Solve { file } } => {
            let lp = json::lp_from_json(&read_json(file)?).map_err(|e| in_file(file, e))?;
            let mut report = json::lp_verdict_to_json(&solve_lp(&lp));
            report["procedure"] = json!("simplex");
            Ok(Outcome::decided(report))
        }
        Command::Sdp { command: SdpCommand::Feas { input, radius, epsilon, limits } } => {
            let (set, file_radius) = json::sdp_from_json(&read_json(input)?).map_err(|e| in_file(input, e))?;
            let radius = radius
                .clone()
                .or(file_radius)
                .ok_or_else(|| Failure::Input("a radius is required, via --radius or \"R\"".into()))?;
            sdp_feas(&set, &radius, epsilon, limits, trace)
        }
        Command::Sos { command: SosCommand::Refute { system, degree, radius_max, ellipsoid_only, emit_certificate, limits } } => {
            let q = json::poly_system_from_json(&read_json(system)?).map_err(|e| in_file(system, e))?;
            let d = half_degree(*degree)?;
            let mut opts = SearchOptions { iteration_cap: limits.iteration_cap, ..SearchOptions::default() };
            if let Some(r) = radius_max {
                opts.radius_schedule = radius_schedule(r)?;
            }
            if *ellipsoid_only {
                opts.exact = None;
                opts.max_matrix_rows = usize::MAX;
            }
            let verdict = refutation_search_traced(&q, d, &opts, Some(trace))?;
            if let Some(path) = emit_certificate {
                let doc = witness_json(&verdict, &q.variables);
                write_json(path, &doc)?;
            }
            let decided = verdict.status != RefutationStatus::Inconclusive;
            Ok(Outcome { report: sos_report(&verdict, *degree), decided })
        }
        Command::Iso { command: IsoCommand::Compare { g, h, max_degree, wl_cap } } => {
            let (gg, hh) = (read_graph(g)?, read_graph(h)?);
            let row = iso::compare("pair", &gg, &hh, half_degree(*max_degree)?, *wl_cap, &SearchOptions::default())?;
            Ok(compare_report(&row))
        }
        Command::Iso { command: IsoCommand::Collapse { corpus, out, max_degree, wl_cap } } => {
            let pairs = read_corpus(corpus)?;
            let report = iso::collapse_experiment(&pairs, half_degree(*max_degree)?, *wl_cap, &SearchOptions::default())?;
            let table = serde_json::to_value(&report).expect("reports serialize");
            write_json(out, &table)?;
            let refuted = report.rows.iter().filter(|r| r.min_refuted_degree().is_some()).count();
            Ok(Outcome::decided(json!({
                "procedure": "collapse-experiment",
                "verdict": "COMPLETE",
                "pairs": report.rows.len(),
                "refuted_pairs": refuted,
                "ratios": table["ratios"],
            })))
        }
        Command::Iso { command: IsoCommand::Wl { g, h, k } } => {
            let (gg, hh) = (read_graph(g)?, read_graph(h)?);
            let eq = iso::wl_equivalent(&gg, &hh, *k)?;
            Ok(Outcome::decided(json!({
                "procedure": "weisfeiler-leman",
                "verdict": if eq { "EQUIVALENT" } else { "DISTINGUISHED" },
                "k": k,
            })))
        }
        Command::FoldDemo { size } => fold_demo(*size, cli.seed, trace),
    }
}

fn in_file(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    json::parse(&text).map_err(|e| in_file(path, e))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("reports serialize") + "\n";
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    json::graph_from_json(&read_json(path)?).map_err(|e| in_file(path, e))
}

fn read_corpus(dir: &Path) -> Result<Vec<(String, Graph, Graph)>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut pairs = Vec::new();
    for path in files {
        let v = read_json(&path)?;
        let id = match v.get("id").and_then(Value::as_str) {
            Some(id) => id.to_string(),
            None => path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
        };
        let part = |key: &str| -> Result<Graph, Failure> {
            let g = v.get(key).ok_or_else(|| Failure::Input(format!("{}: missing field \"{key}\"", path.display())))?;
            json::graph_from_json(g).map_err(|e| in_file(&path, e))
        };
        pairs.push((id, part("g")?, part("h")?));
    }
    Ok(pairs)
}

fn half_degree(degree: u32) -> Result<u32, Failure> {
    if degree == 0 || degree % 2 == 1 {
        return Err(Failure::Input(format!("degree must be a positive even number, got {degree}")));
    }
    Ok(degree / 2)
}

fn radius_schedule(max: &Rat) -> Result<Vec<Rat>, Failure> {
    if *max <= Rat::from_integer(0.into()) {
        return Err(Failure::Input("--radius-max must be positive".into()));
    }
    let mut out = Vec::new();
    let mut r = int(1);
    while r < *max {
        out.push(r.clone());
        r *= int(2);
    }
    out.push(max.clone());
    Ok(out)
}

fn sdp_feas(set: &SdpSet, radius: &Rat, schedule: &[Rat], limits: &Limits, trace: &mut Trace) -> Result<Outcome, Failure> {
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Input("repeated --epsilon values must be strictly decreasing".into()));
    }
    let settings = CcSettings { iteration_cap: limits.iteration_cap };
    let mut runs = Vec::new();
    for eps in schedule {
        let out = match feasibility_eps_r(set, radius, eps, &settings, Some(trace)) {
            Ok(o) => o,
            Err(Error::Config(msg)) => {
                return Ok(Outcome {
                    report: json!({ "procedure": "eps-R-feasibility", "verdict": "INCONCLUSIVE", "note": msg, "runs": runs }),
                    decided: false,
                })
            }
            Err(e) => return Err(e.into()),
        };
        let run = json!({
            "epsilon": format_rat(eps),
            "verdict": out.verdict.as_str(),
            "iterations": out.weak.iterations,
            "refinements": out.weak.refinements,
            "final_class_count": out.weak.final_class_count,
        });
        runs.push(run);
        let last = runs.len() == schedule.len();
        if out.verdict == EpsRVerdict::Bottom || last && schedule.len() == 1 {
            let mut report = json!({
                "procedure": "eps-R-feasibility",
                "verdict": out.verdict.as_str(),
                "radius": format_rat(radius),
                "epsilon": format_rat(eps),
                "trace": runs.last().cloned().expect("just pushed"),
            });
            if let Some(w) = &out.weak.witness {
                report["witness"] = json::ivec_to_json(w);
            }
            return Ok(Outcome::decided(report));
        }
    }
    Ok(Outcome {
        report: json!({
            "procedure": "eps-R-feasibility",
            "verdict": "INCONCLUSIVE",
            "note": "every epsilon in the schedule gave TOP",
            "runs": runs,
        }),
        decided: false,
    })
}

fn sos_report(v: &RefutationVerdict, degree: u32) -> Value {
    let procedure = match &v.witness {
        Some(RefutationWitness::Refutation { point: None, .. }) => "exact-certificate",
        Some(RefutationWitness::Refutation { point: Some(_), .. }) => "eps-R-feasibility",
        Some(RefutationWitness::PseudoExpectation { .. }) => "point-evaluation",
        None => "refutation-search",
    };
    let mut report = json!({ "procedure": procedure, "verdict": v.status.as_str(), "degree": degree });
    match &v.witness {
        Some(RefutationWitness::Refutation { epsilon, certificate, .. }) => {
            report["epsilon"] = json!(format_rat(epsilon));
            report["blocks"] = json!(certificate.blocks.iter().filter(|b| !b.entries.is_empty()).count());
        }
        Some(RefutationWitness::PseudoExpectation { assignments, .. }) => {
            report["assignments"] = json!(assignments.len());
        }
        None => report["note"] = json!(v.note),
    }
    if let Some(r) = &v.searched_radius {
        report["searched_radius"] = json!(format_rat(r));
    }
    report
}

fn witness_json(v: &RefutationVerdict, vars: &[String]) -> Value {
    match &v.witness {
        Some(RefutationWitness::Refutation { certificate, epsilon, .. }) => {
            let mut doc = json::certificate_to_json(certificate, vars, epsilon);
            doc["kind"] = json!("refutation");
            doc
        }
        Some(RefutationWitness::PseudoExpectation { functional, assignments }) => {
            let mut doc = json::pseudoexpectation_to_json(functional, vars);
            doc["kind"] = json!("pseudoexpectation");
            doc["assignments"] = json!(assignments
                .iter()
                .map(|x| x.iter().map(|&b| u8::from(b)).collect::<Vec<_>>())
                .collect::<Vec<_>>());
            doc
        }
        None => json!({ "kind": "none", "note": v.note }),
    }
}

fn compare_report(row: &CollapseRow) -> Outcome {
    let statuses: Vec<&str> = row.sos_status.iter().map(|s| s.status.as_str()).collect();
    let verdict = if statuses.contains(&"REFUTED") {
        "REFUTED"
    } else if !statuses.is_empty() && statuses.iter().all(|s| *s == "NOT_REFUTABLE") {
        "NOT_REFUTABLE"
    } else {
        "INCONCLUSIVE"
    };
    let mut report = serde_json::to_value(row).expect("rows serialize");
    report["procedure"] = json!("iso-compare");
    report["verdict"] = json!(verdict);
    Outcome { report, decided: verdict != "INCONCLUSIVE" }
}

/// `X_ii in [1, 2]` for every row: invariant under relabeling, so the folded
/// ellipsoid needs few classes.
fn fold_demo(size: usize, seed: u64, trace: &mut Trace) -> Result<Outcome, Failure> {
    if size == 0 {
        return Err(Failure::Input("--size must be positive".into()));
    }
    let mut labels: Vec<String> = (0..size).map(|i| format!("r{i}")).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let j = IndexSet::new(labels.clone())?;
    let mut set = SdpSet::new(j);
    for i in 0..size {
        set.add_constraint(format!("lower[{}]", labels[i]), SymSparse::from_entries([(i, i, int(-1))]), int(-1))?;
        set.add_constraint(format!("upper[{}]", labels[i]), SymSparse::from_entries([(i, i, int(1))]), int(2))?;
    }
    let eps = Rat::new(1.into(), 4.into());
    let out = feasibility_eps_r(&set, &int(2), &eps, &CcSettings::default(), Some(trace))?;
    Ok(Outcome::decided(json!({
        "procedure": "eps-R-feasibility",
        "verdict": out.verdict.as_str(),
        "labels": labels,
        "dimension": size * (size + 1) / 2,
        "final_class_count": out.weak.final_class_count,
        "iterations": out.weak.iterations,
        "refinements": out.weak.refinements,
    })))
}
