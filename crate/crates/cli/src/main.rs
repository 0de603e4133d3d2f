use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::Value;

use viikit::cfpoly;
use viikit::fixtures::{self, Fixture, FixtureError};
use viikit::germ::{self, Germ};
use viikit::series::{self, FactorizationFixture};
use viikit::surface::{self, AnalysisReport, CurveConfiguration, Stage};
use viikit::Rational;

const PASS: u8 = 0;
const CHECK_FAILED: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "viikit", version, about = "Exact invariants of cycle-and-tree curve configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis pipeline on a configuration file.
    Analyze {
        file: PathBuf,
        /// Human-readable table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Polynomial identity suite.
    Poly {
        #[command(subcommand)]
        command: PolyCommand,
    },
    /// Germ index, reduction and cross-checks.
    Germ {
        #[command(subcommand)]
        command: GermCommand,
    },
    /// Series factorization verification.
    Series {
        #[command(subcommand)]
        command: SeriesCommand,
    },
    /// Enumerate configurations on a multiset of self-intersections.
    Search {
        /// Self-intersections, e.g. `-3,-3,-2`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        self_ints: Vec<i64>,
        #[arg(long)]
        det: Option<BigInt>,
        /// Multiset of anticanonical coefficients, e.g. `2,2,1`.
        #[arg(long, value_delimiter = ',')]
        anticanonical: Option<Vec<Rational>>,
    },
    /// Bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum PolyCommand {
    /// Check the identities symbolically and at random rational points.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=cfpoly::DEFAULT_ARITY_CAP as u64))]
        pmax: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "VIIKIT_SEED", default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum GermCommand {
    /// Print the index of a germ.
    Index { file: PathBuf },
    /// Reduce a germ; `q` defaults to its index.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        q: Option<u32>,
    },
    /// Compare torsion and index of a configuration and a germ.
    Crosscheck { configuration: PathBuf, germ: PathBuf },
}

#[derive(Subcommand)]
enum SeriesCommand {
    /// Verify a factorization fixture.
    Verify {
        file: PathBuf,
        #[arg(long)]
        order: Option<u32>,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// List bundled fixtures.
    List,
    /// Evaluate bundled fixtures against their expectations.
    Run {
        /// Only these fixtures.
        names: Vec<String>,
        /// Print full outcomes as JSON.
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure {
            code: CHECK_FAILED,
            message: message.into(),
        }
    }
}

impl From<FixtureError> for Failure {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Parse(_) => Failure::usage(e.to_string()),
            _ => Failure::check(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { file, table } => analyze(&file, table),
        Command::Poly {
            command: PolyCommand::Verify { pmax, trials, seed },
        } => poly_verify(pmax as usize, trials, seed),
        Command::Germ { command } => germ_cmd(command),
        Command::Series {
            command: SeriesCommand::Verify { file, order },
        } => series_verify(&file, order),
        Command::Search {
            self_ints,
            det,
            anticanonical,
        } => search(&self_ints, det.as_ref(), anticanonical.as_deref()),
        Command::Fixtures { command } => fixtures_cmd(command),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

/// Prints failed expectations to stderr; returns whether all held.
fn report_expectations(report: &Value, source: &Value) -> bool {
    let results = fixtures::check_expectations(report, &fixtures::expectations_from_value(source));
    for r in results.iter().filter(|r| !r.passed) {
        let actual = r.actual.as_ref().map_or("missing".to_string(), Value::to_string);
        eprintln!("expectation failed: {} expected {} got {} ({})", r.field, r.expected, actual, r.note);
    }
    results.iter().all(|r| r.passed)
}

fn analyze(path: &Path, table: bool) -> CmdResult {
    let source = read_json(path)?;
    let config: CurveConfiguration = fixtures::payload_from_value(&source)?;
    let search = source.pointer("/params/search").and_then(Value::as_bool).unwrap_or(false);
    let value = fixtures::configuration_report(&config, search)?;
    if table {
        let report = surface::analyze(&config).map_err(|e| Failure::check(e.to_string()))?;
        print!("{}", render_table(&report));
    } else {
        print_json(&value);
    }
    Ok(if report_expectations(&value, &source) { PASS } else { CHECK_FAILED })
}

fn stage_text<T>(stage: &Stage<T>, f: impl Fn(&T) -> String) -> String {
    match stage {
        Stage::Value(v) => f(v),
        Stage::Error(e) => format!("error ({}): {}", e.kind, e.message),
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn render_table(r: &AnalysisReport) -> String {
    let mut out = String::new();
    if let Some(name) = &r.name {
        let _ = writeln!(out, "configuration  {name}");
    }
    let width = r.labels.iter().map(|l| l.len()).max().unwrap_or(1).max(3);
    let _ = writeln!(out, "matrix");
    let _ = writeln!(
        out,
        "  {:w$} {}",
        "",
        r.labels.iter().map(|l| format!("{l:>width$}")).collect::<Vec<_>>().join(" "),
        w = width
    );
    for (label, row) in r.labels.iter().zip(&r.matrix) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
        let _ = writeln!(out, "  {label:>width$} {}", cells.join(" "));
    }
    let _ = writeln!(out, "det            {}", r.det);
    let _ = writeln!(out, "k              {}", stage_text(&r.k, |k| k.clone()));
    let _ = writeln!(
        out,
        "anticanonical  {}",
        stage_text(&r.anticanonical, |a| {
            let parts: Vec<String> = r
                .labels
                .iter()
                .filter_map(|l| a.lambda_by_label.get(l).map(|v| format!("{l}={v}")))
                .collect();
            format!("{}  (m = {})", parts.join(" "), a.m)
        })
    );
    let _ = writeln!(out, "delta          {}", stage_text(&r.delta, |d| format!("({})", join(d))));
    if let Stage::Value(eqs) = &r.equations {
        for e in eqs {
            let (a, b, c) = e.normalized();
            let sign = |v: i128| if v < 0 { format!("- {}", -v) } else { format!("+ {v}") };
            let _ = writeln!(
                out,
                "equation {:<5} {a}X^2 {}X {} = 0  (disc {})",
                e.index,
                sign(b),
                sign(c),
                b * b - 4 * a * c
            );
        }
    } else {
        let _ = writeln!(out, "equations      {}", stage_text(&r.equations, |_| String::new()));
    }
    match &r.solutions {
        Stage::Value(pair) => {
            for s in [&pair.plus, &pair.minus] {
                let _ = writeln!(out, "{:<14} alpha = ({})  mu = {}", format!("{:?}", s.branch).to_lowercase(), join(&s.alpha), s.mu);
            }
        }
        other => {
            let _ = writeln!(out, "solutions      {}", stage_text(other, |_| String::new()));
        }
    }
    if let Some(c) = &r.certificates {
        let _ = writeln!(out, "certificate    plus {:?}, minus {:?}", c.plus.verdict, c.minus.verdict);
    }
    if let Some(m) = &r.mu_vs_k {
        let rel = if m.equal { "=" } else { "!=" };
        let _ = writeln!(out, "mu+ vs k       {} {rel} {}", m.mu_plus, m.k);
    }
    out
}

fn poly_verify(pmax: usize, trials: usize, seed: u64) -> CmdResult {
    let report = cfpoly::verify_identities(pmax, trials, seed).map_err(|e| Failure::usage(e.to_string()))?;
    print_json(&report);
    Ok(if report.all_passed { PASS } else { CHECK_FAILED })
}

fn load_germ(path: &Path) -> Result<Germ, Failure> {
    Ok(fixtures::payload_from_value(&read_json(path)?)?)
}

fn germ_cmd(cmd: GermCommand) -> CmdResult {
    match cmd {
        GermCommand::Index { file } => {
            let g = load_germ(&file)?;
            g.validate().map_err(|e| Failure::check(e.to_string()))?;
            print_json(&serde_json::json!({ "k": g.k, "s": g.s, "index_m": g.index_m() }));
            Ok(PASS)
        }
        GermCommand::Reduce { file, q } => {
            let g = load_germ(&file)?;
            let q = q.unwrap_or_else(|| g.index_m());
            let report = germ::reduction_report(&g, q).map_err(|e| Failure::check(e.to_string()))?;
            print_json(&report);
            Ok(if report.passed() { PASS } else { CHECK_FAILED })
        }
        GermCommand::Crosscheck { configuration, germ } => {
            let config: CurveConfiguration = fixtures::payload_from_value(&read_json(&configuration)?)?;
            let g = load_germ(&germ)?;
            g.validate().map_err(|e| Failure::check(e.to_string()))?;
            let report = germ::cross_check(&config, &g);
            print_json(&report);
            Ok(if report.passed { PASS } else { CHECK_FAILED })
        }
    }
}

fn series_verify(path: &Path, order: Option<u32>) -> CmdResult {
    let source = read_json(path)?;
    let fixture: FactorizationFixture = fixtures::payload_from_value(&source)?;
    let order = order
        .or_else(|| source.pointer("/params/order").and_then(Value::as_u64).map(|o| o as u32))
        .unwrap_or(series::DEFAULT_ORDER);
    let report = series::verify_factorization(&fixture, order).map_err(|e| Failure::check(e.to_string()))?;
    print_json(&report);
    Ok(if report.passed { PASS } else { CHECK_FAILED })
}

fn search(self_ints: &[i64], det: Option<&BigInt>, anticanonical: Option<&[Rational]>) -> CmdResult {
    let found = surface::search_configurations(self_ints, det, anticanonical).map_err(|e| Failure::usage(e.to_string()))?;
    print_json(&serde_json::json!({ "count": found.len(), "matches": found }));
    Ok(if found.is_empty() { CHECK_FAILED } else { PASS })
}

fn fixtures_cmd(cmd: FixturesCommand) -> CmdResult {
    match cmd {
        FixturesCommand::List => {
            for f in fixtures::bundled() {
                println!("{:<24} {:?}", f.name, f.kind);
            }
            Ok(PASS)
        }
        FixturesCommand::Run { names, json } => {
            let selected: Vec<Fixture> = if names.is_empty() {
                fixtures::bundled()
            } else {
                names
                    .iter()
                    .map(|n| fixtures::find_bundled(n).ok_or_else(|| Failure::usage(format!("unknown fixture {n:?}"))))
                    .collect::<Result<_, _>>()?
            };
            let mut all_passed = true;
            let mut outcomes = Vec::new();
            for f in &selected {
                match fixtures::evaluate(f, &fixtures::find_bundled) {
                    Ok(o) => {
                        all_passed &= o.passed;
                        if !json {
                            let held = o.expectations.iter().filter(|e| e.passed).count();
                            let status = if o.passed { "PASS" } else { "FAIL" };
                            println!("{status} {:<24} {held}/{} expectations", o.name, o.expectations.len());
                            for e in o.expectations.iter().filter(|e| !e.passed) {
                                println!("     {} expected {} got {:?}", e.field, e.expected, e.actual);
                            }
                        }
                        outcomes.push(serde_json::to_value(&o).expect("outcome serializes"));
                    }
                    Err(e) => {
                        all_passed = false;
                        if !json {
                            println!("FAIL {:<24} {e}", f.name);
                        }
                        outcomes.push(serde_json::json!({ "name": f.name, "error": e.to_string() }));
                    }
                }
            }
            if json {
                print_json(&outcomes);
            }
            Ok(if all_passed { PASS } else { CHECK_FAILED })
        }
    }
}
