//! Batch command-line front end.
//!
//! Exit codes: 0 success or passing verdict, 1 statistical verdict failure,
//! 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::experiment::{
    certify_ap, no_apbp_experiment, plane_directions, singlet_ap_experiment, ApCertificate, ExperimentConfig,
    Scenario, DEFAULT_SIGMA_K,
};
use crate::geometry::{
    angle_between, optimal_witness, paper_witness_oriented, CaseLabel, Orientation, UnitVector3, WitnessReport,
};
use crate::quantum::{sample_prepared, sample_singlet, PreparedSource};
use crate::realism::{sample_lhv, LhvModel, MODEL_NAMES};
use crate::report::{certificate_rows, vector_field, write_plot, Summary, Table, CERTIFICATE_HEADER, CORRELATION_HEADER};
use crate::rng::RngStream;
use crate::sign::{
    boole_bell_lhs, boole_bell_lhs_prob, brute_force_max_lhs, coincidence_probability, correlation, SignSequence,
};

pub const DEFAULT_SEED: u64 = 0x00B0_01E5;

const EXIT_OK: i32 = 0;
const EXIT_VERDICT: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Text,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    /// Particles prepared along --axis with random signs u.
    Prepared,
    /// Alice's side of singlet pairs, Bob fixed along --axis; claimed axis is −axis.
    Singlet,
    /// Prepared particles certified against fresh independent signs.
    Independent,
}

#[derive(Debug, Parser)]
#[command(name = "boole-bell", version, about = "Boole–Bell inequality checks, spin-1/2 samplers and LHV counter-models")]
pub struct Cli {
    /// Base seed for every random stream (echoed in output).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample count (particles per direction) or sequence length.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Verdict threshold in standard errors.
    #[arg(long = "sigma-k", global = true)]
    pub sigma_k: Option<f64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to text for scalar commands and csv for tables.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Hidden-variable model.
    #[arg(long, global = true, default_value = "sign-circle", value_parser = MODEL_NAMES)]
    pub model: String,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON experiment configuration (seed, n, sigma_k, directions, scenario).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation and coincidence probability of two sign sequences.
    Correlate {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
    },
    /// Evaluate the Boole–Bell inequality on three sign sequences.
    CheckBoole {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
    },
    /// Exhaustive maximum of the Boole–Bell left-hand side for length --n (≤ 12).
    Bruteforce,
    /// Violation witness for two axes.
    Witness {
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        a: Option<UnitVector3>,
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        b: Option<UnitVector3>,
        /// Angle between a = x̂ and b in the xy-plane, degrees (instead of --a/--b).
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Axis the acute/obtuse witness is orthogonal to.
        #[arg(long = "orthogonal-to", value_enum, default_value = "a")]
        orthogonal_to: Axis,
        /// Also report the numerically optimal witness.
        #[arg(long)]
        optimal: bool,
        /// Sweep θ over 1°..179° instead of a single pair.
        #[arg(long)]
        sweep: bool,
        /// Write sweep plot series into this directory.
        #[arg(long = "plot-dir")]
        plot_dir: Option<PathBuf>,
    },
    /// Measure prepared particles along several directions.
    SimulatePrepared {
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true, default_value = "[1,0,0]")]
        axis: UnitVector3,
        /// Preparation signs u as a '+'/'-' string; random when absent.
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        /// Measurement directions as a JSON list of triples.
        #[arg(long, value_parser = parse_vector_list, allow_hyphen_values = true)]
        directions: Option<Vec<UnitVector3>>,
        /// Number of evenly spaced directions in a plane containing the axis.
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long = "dump-format", value_enum, default_value = "text")]
        dump_format: DumpFormat,
    },
    /// Sample singlet pairs at one or more angles.
    SimulateSinglet {
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        alpha: Option<UnitVector3>,
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        beta: Option<UnitVector3>,
        /// Comma-separated angles in degrees between α = x̂ and β in the xy-plane.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long = "dump-format", value_enum, default_value = "text")]
        dump_format: DumpFormat,
    },
    /// Run a local hidden-variable model.
    Lhv {
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        alpha: Option<UnitVector3>,
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        beta: Option<UnitVector3>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// Write λ of the first run as CSV.
        #[arg(long)]
        lambdas: Option<PathBuf>,
        /// Write correlation-vs-angle series (model, singlet, analytic) here.
        #[arg(long = "plot-dir")]
        plot_dir: Option<PathBuf>,
    },
    /// Certify a particle source as a-p.
    CertifyAp {
        #[arg(long, value_enum, default_value = "prepared")]
        source: SourceKind,
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true, default_value = "[0,0,1]")]
        axis: UnitVector3,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
    /// The no-a-p-and-b-p contradiction against an LHV model.
    Experiment {
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        a: Option<UnitVector3>,
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        b: Option<UnitVector3>,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long, value_enum, default_value = "hypothesis-1")]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    #[value(name = "hypothesis-1")]
    Hypothesis1,
    #[value(name = "hypothesis-2")]
    Hypothesis2,
}

fn parse_vector(s: &str) -> Result<UnitVector3, String> {
    serde_json::from_str(s).map_err(|e| format!("expected a JSON triple [x,y,z]: {e}"))
}

fn parse_vector_list(s: &str) -> Result<Vec<UnitVector3>, String> {
    serde_json::from_str(s).map_err(|e| format!("expected a JSON list of triples: {e}"))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot build thread pool: {e}"))),
        },
        None => execute(&cli),
    };
    match outcome {
        Ok(output) => match emit(&cli, &output.text) {
            Ok(()) => output.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

struct Output {
    text: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(DEFAULT_SEED)
}

fn parse_seq(s: &str) -> CliResult<SignSequence> {
    Ok(SignSequence::parse_text(s)?)
}

fn model(cli: &Cli) -> CliResult<LhvModel> {
    Ok(cli.model.parse()?)
}

fn execute(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Correlate { f, g } => correlate(cli, f, g),
        Command::CheckBoole { f, g, h } => check_boole(cli, f, g, h),
        Command::Bruteforce => bruteforce(cli),
        Command::Witness { a, b, theta, orthogonal_to, optimal, sweep, plot_dir } => {
            witness(cli, *a, *b, *theta, *orthogonal_to, *optimal, *sweep, plot_dir.as_deref())
        }
        Command::SimulatePrepared { axis, u, directions, count, dump, dump_format } => {
            simulate_prepared(cli, axis, u.as_deref(), directions.clone(), *count, dump.as_deref(), *dump_format)
        }
        Command::SimulateSinglet { alpha, beta, theta, dump, dump_format } => {
            simulate_singlet(cli, *alpha, *beta, theta.clone(), dump.as_deref(), *dump_format)
        }
        Command::Lhv { alpha, beta, theta, lambdas, plot_dir } => {
            lhv(cli, *alpha, *beta, theta.clone(), lambdas.as_deref(), plot_dir.as_deref())
        }
        Command::CertifyAp { source, axis, count } => certify(cli, *source, axis, *count),
        Command::Experiment { a, b, theta, scenario, count } => experiment(cli, *a, *b, *theta, *scenario, *count),
    }
}

fn json_summary<C: Serialize, B: Serialize>(command: &str, seed: u64, config: &C, body: B) -> String {
    Summary::new(command, seed, config, body).to_json()
}

fn correlate(cli: &Cli, f: &str, g: &str) -> CliResult<Output> {
    let (fs, gs) = (parse_seq(f)?, parse_seq(g)?);
    let c = correlation(&fs, &gs)?;
    let p = coincidence_probability(&fs, &gs)?;
    let text = match cli.format.unwrap_or(Format::Text) {
        Format::Text => format!("n={} sum={} correlation={:.6} coincidence={:.6}\n", c.n, c.sum, c.value, p),
        Format::Csv => {
            let mut t = Table::new(&["n", "sum", "correlation", "coincidence_probability"]);
            t.row([c.n.to_string(), c.sum.to_string(), c.value.to_string(), p.to_string()]);
            t.finish()
        }
        Format::Json => json_summary(
            "correlate",
            seed(cli),
            &json!({"f": f, "g": g}),
            json!({"n": c.n, "sum": c.sum, "correlation": c.value, "coincidence_probability": p}),
        ),
    };
    Ok(Output::ok(text))
}

fn check_boole(cli: &Cli, f: &str, g: &str, h: &str) -> CliResult<Output> {
    let (fs, gs, hs) = (parse_seq(f)?, parse_seq(g)?, parse_seq(h)?);
    let lhs = boole_bell_lhs(&fs, &gs, &hs)?;
    let prob = boole_bell_lhs_prob(&fs, &gs, &hs)?;
    let pass = lhs <= 1.0 && prob.holds();
    let verdict = if pass { "PASS" } else { "FAIL" };
    let text = match cli.format.unwrap_or(Format::Text) {
        Format::Text => format!(
            "lhs={lhs:.6} prob_lhs={:.6} prob_rhs={:.6} verdict={verdict}\n",
            prob.lhs, prob.rhs
        ),
        Format::Csv => {
            let mut t = Table::new(&["lhs", "prob_lhs", "prob_rhs", "verdict"]);
            t.row([lhs.to_string(), prob.lhs.to_string(), prob.rhs.to_string(), verdict.to_string()]);
            t.finish()
        }
        Format::Json => json_summary(
            "check-boole",
            seed(cli),
            &json!({"f": f, "g": g, "h": h}),
            json!({"lhs": lhs, "prob_lhs": prob.lhs, "prob_rhs": prob.rhs, "pass": pass}),
        ),
    };
    Ok(Output { text, code: if pass { EXIT_OK } else { EXIT_VERDICT } })
}

fn bruteforce(cli: &Cli) -> CliResult<Output> {
    let n = cli.n.unwrap_or(8);
    let max = brute_force_max_lhs(n)?;
    let text = match cli.format.unwrap_or(Format::Text) {
        Format::Text => format!("n={n} max_lhs={max:.6}\n"),
        Format::Csv => {
            let mut t = Table::new(&["n", "max_lhs"]);
            t.row([n.to_string(), max.to_string()]);
            t.finish()
        }
        Format::Json => json_summary(
            "bruteforce",
            seed(cli), &json!({"n": n}), json!({"max_lhs": max})),
    };
    Ok(Output::ok(text))
}

fn axes_from(a: Option<UnitVector3>, b: Option<UnitVector3>, theta: Option<f64>) -> CliResult<(UnitVector3, UnitVector3)> {
    match (a, b, theta) {
        (Some(a), Some(b), None) => Ok((a, b)),
        (None, None, Some(t)) => Ok((UnitVector3::X, UnitVector3::from_xy_degrees(t))),
        (None, None, None) => Err(CliError::Usage("give either --a and --b, or --theta".into())),
        _ => Err(CliError::Usage("--a/--b and --theta are mutually exclusive; --a needs --b".into())),
    }
}

#[derive(Serialize)]
struct WitnessOut {
    case: CaseLabel,
    theta_deg: f64,
    lhs: f64,
    assignment: crate::geometry::Assignment,
    alpha: UnitVector3,
}

impl From<&WitnessReport> for WitnessOut {
    fn from(w: &WitnessReport) -> Self {
        Self { case: w.case_label, theta_deg: w.theta.to_degrees(), lhs: w.lhs_value, assignment: w.assignment, alpha: w.alpha }
    }
}

#[allow(clippy::too_many_arguments)]
fn witness(
    cli: &Cli,
    a: Option<UnitVector3>,
    b: Option<UnitVector3>,
    theta: Option<f64>,
    orthogonal_to: Axis,
    optimal: bool,
    sweep: bool,
    plot_dir: Option<&Path>,
) -> CliResult<Output> {
    let orientation = match orthogonal_to {
        Axis::A => Orientation::OrthogonalToA,
        Axis::B => Orientation::OrthogonalToB,
    };
    if sweep {
        let mut rows = Vec::new();
        for d in 1..180 {
            let (a, b) = (UnitVector3::X, UnitVector3::from_xy_degrees(d as f64));
            rows.push((d as f64, paper_witness_oriented(&a, &b, orientation)?, optimal_witness(&a, &b)?));
        }
        if let Some(dir) = plot_dir {
            let constructive: Vec<(f64, f64)> = rows.iter().map(|(d, p, _)| (*d, p.lhs_value)).collect();
            let opt: Vec<(f64, f64)> = rows.iter().map(|(d, _, o)| (*d, o.lhs_value)).collect();
            write_plot(dir, "constructive_witness", "theta_deg", "lhs", &constructive)?;
            write_plot(dir, "optimal_witness", "theta_deg", "lhs", &opt)?;
        }
        let text = match cli.format.unwrap_or(Format::Csv) {
            Format::Json => {
                let body: Vec<_> = rows
                    .iter()
                    .map(|(d, p, o)| json!({"theta_deg": d, "constructive": WitnessOut::from(p), "optimal": WitnessOut::from(o)}))
                    .collect();
                json_summary(
            "witness",
            seed(cli), &json!({"sweep": true}), body)
            }
            _ => {
                let mut t = Table::new(&["theta_deg", "case", "constructive_lhs", "constructive_assignment", "optimal_lhs", "optimal_assignment"]);
                for (d, p, o) in &rows {
                    t.row([
                        d.to_string(),
                        p.case_label.to_string(),
                        p.lhs_value.to_string(),
                        p.assignment.to_string(),
                        o.lhs_value.to_string(),
                        o.assignment.to_string(),
                    ]);
                }
                t.finish()
            }
        };
        return Ok(Output::ok(text));
    }

    let (a, b) = axes_from(a, b, theta)?;
    let constructive = paper_witness_oriented(&a, &b, orientation)?;
    let best = if optimal { Some(optimal_witness(&a, &b)?) } else { None };
    let text = match cli.format.unwrap_or(Format::Text) {
        Format::Text => {
            let mut s = format!(
                "case={} theta_deg={:.6} lhs={:.6} assignment={} alpha={}\n",
                constructive.case_label,
                angle_between(&a, &b).to_degrees(),
                constructive.lhs_value,
                constructive.assignment,
                constructive.alpha
            );
            if let Some(o) = &best {
                s.push_str(&format!("optimal_lhs={:.6} optimal_assignment={} optimal_alpha={}\n", o.lhs_value, o.assignment, o.alpha));
            }
            s
        }
        Format::Csv => {
            let mut t = Table::new(&["kind", "case", "theta_deg", "lhs", "assignment", "alpha"]);
            for (kind, w) in std::iter::once(("constructive", &constructive)).chain(best.iter().map(|o| ("optimal", o))) {
                t.row([
                    kind.to_string(),
                    w.case_label.to_string(),
                    w.theta.to_degrees().to_string(),
                    w.lhs_value.to_string(),
                    w.assignment.to_string(),
                    vector_field(&w.alpha),
                ]);
            }
            t.finish()
        }
        Format::Json => json_summary(
            "witness",
            seed(cli),
            &json!({"a": a, "b": b}),
            json!({"constructive": WitnessOut::from(&constructive), "optimal": best.as_ref().map(WitnessOut::from)}),
        ),
    };
    Ok(Output::ok(text))
}

fn dump_sequence(dir: &Path, name: &str, seq: &SignSequence, format: DumpFormat) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    match format {
        DumpFormat::Text => std::fs::write(dir.join(format!("{name}.txt")), format!("{}\n", seq.to_text()))?,
        DumpFormat::Binary => std::fs::write(dir.join(format!("{name}.bin")), seq.to_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CorrelationRow {
    direction_alpha: UnitVector3,
    direction_beta: UnitVector3,
    n: usize,
    correlation: f64,
    stderr: f64,
}

fn correlation_table(rows: &[CorrelationRow]) -> String {
    let mut t = Table::new(&CORRELATION_HEADER);
    for r in rows {
        t.row([
            vector_field(&r.direction_alpha),
            vector_field(&r.direction_beta),
            r.n.to_string(),
            r.correlation.to_string(),
            r.stderr.to_string(),
        ]);
    }
    t.finish()
}

fn render_rows<C: Serialize>(cli: &Cli, command: &str, config: &C, rows: &[CorrelationRow]) -> String {
    match cli.format.unwrap_or(Format::Csv) {
        Format::Json => json_summary(command, seed(cli), config, rows),
        _ => correlation_table(rows),
    }
}

fn simulate_prepared(
    cli: &Cli,
    axis: &UnitVector3,
    u: Option<&str>,
    directions: Option<Vec<UnitVector3>>,
    count: usize,
    dump: Option<&Path>,
    dump_format: DumpFormat,
) -> CliResult<Output> {
    let seed = seed(cli);
    let u = match u {
        Some(text) => parse_seq(text)?,
        None => {
            let mut r = RngStream::new(seed, 0);
            SignSequence::from_fn(cli.n.unwrap_or(100_000), |_| r.bernoulli(0.5))?
        }
    };
    let directions = match directions {
        Some(d) => d,
        None => plane_directions(axis, &axis.any_orthogonal(), count.max(1))?,
    };
    let src = PreparedSource::new(*axis, u);
    if let Some(dir) = dump {
        dump_sequence(dir, "u", &src.u, dump_format)?;
    }
    let mut rows = Vec::with_capacity(directions.len());
    for (k, alpha) in directions.iter().enumerate() {
        let mut rng = RngStream::new(seed, 1 + k as u64);
        let x = sample_prepared(&src, alpha, &mut rng)?;
        if let Some(dir) = dump {
            dump_sequence(dir, &format!("x_{k:03}"), &x, dump_format)?;
        }
        let c = correlation(&src.u, &x)?;
        rows.push(CorrelationRow { direction_alpha: *alpha, direction_beta: *axis, n: c.n, correlation: c.value, stderr: c.stderr });
    }
    let config = json!({"seed": seed, "n": src.len(), "axis": axis, "directions": directions});
    Ok(Output::ok(render_rows(cli, "simulate-prepared", &config, &rows)))
}

fn direction_pairs(
    alpha: Option<UnitVector3>,
    beta: Option<UnitVector3>,
    theta: Option<Vec<f64>>,
    default_theta: &[f64],
) -> CliResult<Vec<(UnitVector3, UnitVector3)>> {
    match (alpha, beta, theta) {
        (Some(a), Some(b), None) => Ok(vec![(a, b)]),
        (None, None, t) => Ok(t
            .unwrap_or_else(|| default_theta.to_vec())
            .iter()
            .map(|d| (UnitVector3::X, UnitVector3::from_xy_degrees(*d)))
            .collect()),
        _ => Err(CliError::Usage("give --alpha and --beta together, or --theta".into())),
    }
}

fn simulate_singlet(
    cli: &Cli,
    alpha: Option<UnitVector3>,
    beta: Option<UnitVector3>,
    theta: Option<Vec<f64>>,
    dump: Option<&Path>,
    dump_format: DumpFormat,
) -> CliResult<Output> {
    let seed = seed(cli);
    let n = cli.n.unwrap_or(100_000);
    let pairs = direction_pairs(alpha, beta, theta, &[0.0, 30.0, 45.0, 60.0, 90.0, 120.0, 180.0])?;
    let mut rows = Vec::with_capacity(pairs.len());
    for (k, (a, b)) in pairs.iter().enumerate() {
        let mut rng = RngStream::new(seed, k as u64);
        let (sa, sb) = sample_singlet(a, b, n, &mut rng)?;
        if let Some(dir) = dump {
            dump_sequence(dir, &format!("a_{k:03}"), &sa, dump_format)?;
            dump_sequence(dir, &format!("b_{k:03}"), &sb, dump_format)?;
        }
        let c = correlation(&sa, &sb)?;
        rows.push(CorrelationRow { direction_alpha: *a, direction_beta: *b, n, correlation: c.value, stderr: c.stderr });
    }
    let pairs_json: Vec<_> = pairs.iter().map(|(a, b)| json!([a, b])).collect();
    let config = json!({"seed": seed, "n": n, "pairs": pairs_json});
    Ok(Output::ok(render_rows(cli, "simulate-singlet", &config, &rows)))
}

fn lhv(
    cli: &Cli,
    alpha: Option<UnitVector3>,
    beta: Option<UnitVector3>,
    theta: Option<Vec<f64>>,
    lambdas: Option<&Path>,
    plot_dir: Option<&Path>,
) -> CliResult<Output> {
    let seed = seed(cli);
    let n = cli.n.unwrap_or(100_000);
    let model = model(cli)?;
    let pairs = direction_pairs(alpha, beta, theta, &[0.0, 30.0, 45.0, 60.0, 90.0, 120.0, 180.0])?;
    let mut t = Table::new(&[
        "direction_alpha",
        "direction_beta",
        "n",
        "correlation",
        "stderr",
        "expected_lhv",
        "expected_singlet",
    ]);
    let mut json_rows = Vec::new();
    let mut series = (Vec::new(), Vec::new(), Vec::new());
    for (k, (a, b)) in pairs.iter().enumerate() {
        let mut rng = RngStream::new(seed, k as u64);
        let run = sample_lhv(&model, a, b, n, &mut rng)?;
        if k == 0 {
            if let Some(path) = lambdas {
                std::fs::write(path, run.lambdas_csv())?;
            }
        }
        let c = correlation(run.a(), run.b())?;
        let th = angle_between(a, b);
        let expected_lhv = -1.0 + 2.0 * th / std::f64::consts::PI;
        let expected_singlet = -a.dot(b);
        t.row([
            vector_field(a),
            vector_field(b),
            n.to_string(),
            c.value.to_string(),
            c.stderr.to_string(),
            expected_lhv.to_string(),
            expected_singlet.to_string(),
        ]);
        json_rows.push(json!({
            "direction_alpha": a, "direction_beta": b, "n": n, "correlation": c.value,
            "stderr": c.stderr, "expected_lhv": expected_lhv, "expected_singlet": expected_singlet,
        }));
        let deg = th.to_degrees();
        series.0.push((deg, c.value));
        series.1.push((deg, expected_lhv));
        series.2.push((deg, expected_singlet));
    }
    if let Some(dir) = plot_dir {
        write_plot(dir, "lhv_empirical", "theta_deg", "correlation", &series.0)?;
        write_plot(dir, "lhv_analytic", "theta_deg", "correlation", &series.1)?;
        write_plot(dir, "singlet_analytic", "theta_deg", "correlation", &series.2)?;
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let config = json!({"seed": seed, "n": n, "model": model.name(), "pairs": pairs.len()});
            json_summary("lhv", seed, &config, json_rows)
        }
        _ => t.finish(),
    };
    Ok(Output::ok(text))
}

/// Loads `--config` if given and applies explicit flag overrides.
fn experiment_config(cli: &Cli, default_directions: impl FnOnce() -> CliResult<Vec<UnitVector3>>) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => ExperimentConfig {
            seed: DEFAULT_SEED,
            n: 100_000,
            sigma_k: DEFAULT_SIGMA_K,
            directions: default_directions()?,
            scenario: Scenario::Boole,
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(k) = cli.sigma_k {
        cfg.sigma_k = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct CertificateSummary<'a> {
    source: &'a str,
    pass: bool,
    failing_rows: usize,
    worst_gap: Option<f64>,
    certificate: &'a ApCertificate,
}

fn certify(cli: &Cli, source: SourceKind, axis: &UnitVector3, count: usize) -> CliResult<Output> {
    let cfg = experiment_config(cli, || Ok(plane_directions(axis, &axis.any_orthogonal(), count.max(1))?))?;
    let (name, cert) = match source {
        SourceKind::Singlet => ("singlet", singlet_ap_experiment(axis, &cfg)?),
        SourceKind::Prepared | SourceKind::Independent => {
            let total = cfg.total_particles();
            let mut r = RngStream::new(cfg.seed, 0);
            let prep = SignSequence::from_fn(total, |_| r.bernoulli(0.5))?;
            let src = PreparedSource::new(*axis, prep.clone());
            if source == SourceKind::Prepared {
                ("prepared", certify_ap(&src, &prep, axis, &cfg)?)
            } else {
                let mut r = RngStream::new(cfg.seed, u64::MAX);
                let fresh = SignSequence::from_fn(total, |_| r.bernoulli(0.5))?;
                ("independent", certify_ap(&src, &fresh, axis, &cfg)?)
            }
        }
    };
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => json_summary(
            "certify-ap",
            cfg.seed,
            &cfg,
            CertificateSummary {
                source: name,
                pass: cert.pass,
                failing_rows: cert.failing_rows().count(),
                worst_gap: cert.worst_failure().map(|r| r.gap),
                certificate: &cert,
            },
        ),
        _ => {
            let mut t = Table::new(&CERTIFICATE_HEADER);
            certificate_rows(&mut t, name, &cert.axis_claimed, &cert.rows);
            t.finish()
        }
    };
    Ok(Output { text, code: if cert.pass { EXIT_OK } else { EXIT_VERDICT } })
}

fn experiment(
    cli: &Cli,
    a: Option<UnitVector3>,
    b: Option<UnitVector3>,
    theta: Option<f64>,
    scenario: ScenarioArg,
    count: usize,
) -> CliResult<Output> {
    let (a, b) = match (a, b, theta) {
        (None, None, None) => (UnitVector3::X, UnitVector3::Y),
        other => axes_from(other.0, other.1, other.2)?,
    };
    let model = model(cli)?;
    let mut cfg = experiment_config(cli, || Ok(plane_directions(&a, &b, count.max(1))?))?;
    if cli.config.is_none() {
        cfg.scenario = match scenario {
            ScenarioArg::Hypothesis1 => Scenario::Hypothesis1,
            ScenarioArg::Hypothesis2 => Scenario::Hypothesis2,
        };
    }
    let out = no_apbp_experiment(&a, &b, &model, &cfg)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let config = json!({"experiment": &cfg, "a": a, "b": b, "model": model.name()});
            let max_gap = out.report.max_gap();
            json_summary(
                "experiment",
                cfg.seed,
                &config,
                json!({
                    "contradiction": out.contradiction,
                    "certificate_u_pass": out.certificate_u.pass,
                    "certificate_v_pass": out.certificate_v.pass,
                    "target_lhs": out.report.target_lhs,
                    "empirical_lhs": out.report.empirical_lhs,
                    "margin_bound": out.report.margin_bound,
                    "max_gap": max_gap,
                    "gap_sum": out.report.gap_sum,
                    "report": &out.report,
                    "certificate_u": &out.certificate_u,
                    "certificate_v": &out.certificate_v,
                    "uv_rows": &out.uv_rows,
                }),
            )
        }
        _ => {
            let mut t = Table::new(&CERTIFICATE_HEADER);
            certificate_rows(&mut t, "u", &a, &out.certificate_u.rows);
            certificate_rows(&mut t, "v", &b, &out.certificate_v.rows);
            certificate_rows(&mut t, "uv", &a, &out.uv_rows);
            t.finish()
        }
    };
    let both_pass = out.certificate_u.pass && out.certificate_v.pass;
    Ok(Output { text, code: if both_pass { EXIT_OK } else { EXIT_VERDICT } })
}
