//! Command-line driver: one subcommand per workbench operation, JSON
//! reports on stdout (CSV for matrix and vector payloads on request).
//!
//! Exit status: 0 on success, 1 on domain errors (and failed verification
//! sweeps), 2 on usage errors.

use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use matgraph::counting::{self, CorpusSpec, CountData, CountKind, Level};
use matgraph::graph::{builtin, Graph};
use matgraph::graph6::parse_graph6;
use matgraph::matlang::{self, parse_expr, Value};
use matgraph::spectral::{spectral_response, FilterFitter, FilterSpec};
use matgraph::{cfg, g2n2, wl};
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

const KINDS: [&str; 9] = [
    "path2", "path3", "path4", "path5", "cycle3", "cycle4", "cycle5", "cycle6", "chordal",
];
const LEVELS: [&str; 3] = ["edge", "node", "graph"];
const TESTS: [&str; 2] = ["wl1", "fwl2"];
const FILTERS: [&str; 3] = ["lowpass", "highpass", "bandpass"];

#[derive(Parser)]
#[command(name = "matgraph", version, about = "Matrix-language graph workbench")]
struct Cli {
    /// Report format; csv applies to matrix and vector payloads.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cap on worker threads for sweep commands (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate expressions against a graph (inline text or a file with
    /// one expression per line).
    Eval {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        graph: String,
    },
    /// Enumerate a grammar's sentences up to a derivation depth.
    Sentences {
        #[arg(long, value_parser = PossibleValuesParser::new(cfg::PRESET_NAMES))]
        grammar: String,
        #[arg(long)]
        depth: usize,
    },
    /// Closed-form substructure counts.
    Count {
        #[arg(long, value_parser = PossibleValuesParser::new(KINDS))]
        kind: String,
        #[arg(long, value_parser = PossibleValuesParser::new(LEVELS))]
        level: String,
        #[arg(long)]
        graph: String,
    },
    /// Brute-force substructure counts by subgraph enumeration.
    Oracle {
        #[arg(long, value_parser = PossibleValuesParser::new(KINDS))]
        kind: String,
        #[arg(long, value_parser = PossibleValuesParser::new(LEVELS))]
        level: String,
        #[arg(long)]
        graph: String,
    },
    /// Refinement equivalence of a graph pair.
    Wl {
        #[arg(long, value_parser = PossibleValuesParser::new(TESTS))]
        test: String,
        #[arg(long)]
        pair: String,
    },
    /// Compare a pair by random-weight embeddings, or by enumerated
    /// grammar sentences when --grammar is given.
    Distinguish {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        /// Base seed; the sweep uses seed..seed+seeds.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = PossibleValuesParser::new(cfg::PRESET_NAMES))]
        grammar: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Polynomial filter fit on the normalized Laplacian.
    Spectral {
        #[arg(long, value_parser = PossibleValuesParser::new(FILTERS))]
        filter: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        graph: String,
    },
    /// Formula-versus-oracle counting sweep; exits 0 iff every check
    /// matches.
    VerifyCounting {
        /// Largest graph size; the corpus cycles through 6..=n.
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        graphs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Shape-soundness sweep; exits 0 iff no violations.
    VerifyShapes {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Ignore failure when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(cli.cmd, cli.format) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Runs one subcommand; `Ok(false)` marks a verification sweep that
/// completed with failures.
fn run(cmd: Cmd, format: Format) -> Result<bool, String> {
    match cmd {
        Cmd::Eval { expr, graph } => {
            let g = load_graph(&graph)?;
            let sources = expression_sources(&expr)?;
            let mut results = Vec::new();
            for text in &sources {
                let e = parse_expr(text).map_err(|e| e.to_string())?;
                let v = matlang::eval(&e, &g).map_err(|e| e.to_string())?;
                results.push(v);
            }
            if format == Format::Csv {
                for v in &results {
                    print!("{}", value_csv(v));
                }
            } else if results.len() == 1 {
                emit(&value_json(&results[0]));
            } else {
                emit(&serde_json::Value::Array(
                    results.iter().map(value_json).collect(),
                ));
            }
            Ok(true)
        }
        Cmd::Sentences { grammar, depth } => {
            let g = cfg::preset(&grammar).map_err(|e| e.to_string())?;
            let set = cfg::enumerate_sentences(&g, depth, cfg::DEFAULT_SENTENCE_LIMIT);
            emit(&serde_json::json!({
                "grammar": set.grammar,
                "depth": set.depth,
                "count": set.sentences.len(),
                "sentences": set.texts(),
            }));
            Ok(true)
        }
        Cmd::Count { kind, level, graph } => {
            let g = load_graph(&graph)?;
            let kind = CountKind::parse(&kind).map_err(|e| e.to_string())?;
            let level = Level::parse(&level).map_err(|e| e.to_string())?;
            let r = counting::count(kind, level, &g).map_err(|e| e.to_string())?;
            emit_count(&r, format);
            Ok(true)
        }
        Cmd::Oracle { kind, level, graph } => {
            let g = load_graph(&graph)?;
            let kind = CountKind::parse(&kind).map_err(|e| e.to_string())?;
            let level = Level::parse(&level).map_err(|e| e.to_string())?;
            let r = counting::oracle_count(kind, level, &g).map_err(|e| e.to_string())?;
            emit_count(&r, format);
            Ok(true)
        }
        Cmd::Wl { test, pair } => {
            let (g1, g2) = load_pair(&pair)?;
            let test = wl::Test::parse(&test).ok_or_else(|| format!("unknown test `{test}`"))?;
            let report = wl::equivalent(&g1, &g2, test).map_err(|e| e.to_string())?;
            emit(&serde_json::to_value(&report).expect("report serializes"));
            Ok(true)
        }
        Cmd::Distinguish {
            pair,
            seeds,
            threshold,
            seed,
            grammar,
            depth,
        } => {
            let (g1, g2) = load_pair(&pair)?;
            if let Some(name) = grammar {
                let gr = cfg::preset(&name).map_err(|e| e.to_string())?;
                let depth = depth.unwrap_or(4);
                let verdict = cfg::distinguish_by_sentences(
                    &g1,
                    &g2,
                    &gr,
                    depth,
                    cfg::DEFAULT_SENTENCE_LIMIT,
                )
                .map_err(|e| e.to_string())?;
                emit(&serde_json::to_value(&verdict).expect("verdict serializes"));
            } else {
                let seed_list: Vec<u64> = (seed..seed + seeds as u64).collect();
                let report = g2n2::distinguish(
                    &pair,
                    &g1,
                    &g2,
                    &g2n2::default_distinguish_configs(),
                    &seed_list,
                    threshold,
                )
                .map_err(|e| e.to_string())?;
                emit(&serde_json::to_value(&report).expect("report serializes"));
            }
            Ok(true)
        }
        Cmd::Spectral {
            filter,
            degree,
            graph,
        } => {
            let g = load_graph(&graph)?;
            let spec = FilterSpec::parse(&filter).map_err(|e| e.to_string())?;
            let mut fitter = FilterFitter::new(&g).map_err(|e| e.to_string())?;
            let fit = fitter.fit(&spec, degree).map_err(|e| e.to_string())?;
            if format == Format::Csv {
                let phi =
                    spectral_response(&fit.fitted, fitter.decomp()).map_err(|e| e.to_string())?;
                let lambdas = &fitter.decomp().lambdas;
                let mut out = String::from("lambda,omega,phi\n");
                for i in 0..lambdas.len() {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        lambdas[i],
                        spec.response(lambdas[i]),
                        phi[i]
                    );
                }
                print!("{out}");
            } else {
                let report = fit.to_report(&spec, degree);
                emit(&serde_json::to_value(&report).expect("report serializes"));
            }
            Ok(true)
        }
        Cmd::VerifyCounting { n, graphs, seed } => {
            if n < 6 {
                return Err("--n must be at least 6".into());
            }
            let spec = CorpusSpec {
                n_min: 6,
                n_max: n,
                graphs,
                seed,
            };
            let report = counting::verify_corpus(&spec).map_err(|e| e.to_string())?;
            let passed = report.passed;
            emit(&serde_json::to_value(&report).expect("report serializes"));
            Ok(passed)
        }
        Cmd::VerifyShapes { seed } => {
            let report = matlang::gen::verify_shapes(seed, 1000);
            let passed = report.passed;
            emit(&serde_json::to_value(&report).expect("report serializes"));
            Ok(passed)
        }
    }
}

fn emit(v: &serde_json::Value) {
    println!("{}", serde_json::to_string(v).expect("json serializes"));
}

/// Loads a graph from a graph6 file, falling back to builtin names.
fn load_graph(spec: &str) -> Result<Graph, String> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?;
        let line = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| format!("{spec}: no graph6 line found"))?;
        return parse_graph6(line).map_err(|e| format!("{spec}: {e}"));
    }
    builtin(spec).map_err(|e| e.to_string())
}

/// Resolves a pair spec: a named builtin pair or `lhs,rhs` sides.
fn load_pair(spec: &str) -> Result<(Graph, Graph), String> {
    match spec {
        "exppair" => Ok((builtin("cycle(6)").unwrap(), builtin("two_triangles").unwrap())),
        "srpair" => Ok((builtin("shrikhande").unwrap(), builtin("rook4x4").unwrap())),
        other => {
            let (lhs, rhs) = other
                .split_once(',')
                .ok_or_else(|| format!("pair `{other}` is not `exppair`, `srpair`, or `lhs,rhs`"))?;
            Ok((load_graph(lhs.trim())?, load_graph(rhs.trim())?))
        }
    }
}

/// One inline expression, or the non-empty lines of a file.
fn expression_sources(spec: &str) -> Result<Vec<String>, String> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?;
        let lines: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        if lines.is_empty() {
            return Err(format!("{spec}: no expressions found"));
        }
        return Ok(lines);
    }
    Ok(vec![spec.to_string()])
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Scalar(x) => serde_json::json!({"shape": "scalar", "value": x}),
        Value::ColVec(xs) => serde_json::json!({"shape": "colvec", "value": xs.to_vec()}),
        Value::RowVec(xs) => serde_json::json!({"shape": "rowvec", "value": xs.to_vec()}),
        Value::Matrix(m) => {
            let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
            serde_json::json!({"shape": "matrix", "value": rows})
        }
    }
}

fn value_csv(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Scalar(x) => {
            let _ = writeln!(out, "{x}");
        }
        Value::ColVec(xs) | Value::RowVec(xs) => {
            for x in xs {
                let _ = writeln!(out, "{x}");
            }
        }
        Value::Matrix(m) => {
            for row in m.rows() {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
    }
    out
}

fn emit_count(r: &counting::CountResult, format: Format) {
    if format == Format::Csv {
        let v = match &r.data {
            CountData::Scalar(x) => Value::Scalar(*x),
            CountData::Vector(xs) => Value::ColVec(xs.clone()),
            CountData::Matrix(m) => Value::Matrix(m.clone()),
        };
        print!("{}", value_csv(&v));
    } else {
        emit(&r.to_json());
    }
}
