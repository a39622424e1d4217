//! `ddshap`: exact SHAP scores, model counts and gadget generators from the
//! command line.
//!
//! Results go to stdout, one `name<TAB>value` line each, values as exact
//! fractions `p/q`. Failures print one JSON object to stderr and exit with 1
//! (input read but invalid) or 2 (unreadable input or bad usage).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ddshap::circuit::{Circuit, DeterminismReport, Entity, FeatureSpace, ProductDistribution};
use ddshap::encoders::{encode_fbdd, encode_tree, EncodeError};
use ddshap::engine::{model_count_via_shap, shap_all, shap_score_smooth, EngineError};
use ddshap::formulas::{
    amplify, build_gnt, build_theta, build_theta_unchecked, gnt_shap_closed_form, gnt_shap_exact, FormulaError,
    GntParams,
};
use ddshap::io::{
    parse_fbdd, parse_graph, parse_nnf, parse_nnf_with_space, parse_sidecar, parse_tree, write_dnf, write_graph,
    write_nnf, write_sidecar, IoError, NnfOptions, Sidecar,
};
use ddshap::num::{format_fraction, Rational};
use ddshap::oracle::{shap_bruteforce_all, OracleError};
use ddshap::FeatureId;

/// Default bound for exhaustive determinism checks.
const DEFAULT_MAX_VARS: usize = 20;

#[derive(Parser)]
#[command(name = "ddshap", version, about = "Exact SHAP scores for deterministic and decomposable circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// SHAP score of every feature (or one) at the sidecar's entity.
    Score(ScoreArgs),
    /// Features by descending score; ties keep declaration order.
    Rank(ScoreArgs),
    /// Model count, recovered from the scores under the uniform distribution.
    Count(CircuitArgs),
    /// Decomposability and determinism report; exits 1 on a violation.
    Verify(VerifyArgs),
    /// Compile a decision tree (JSON) into NNF.
    EncodeDt {
        #[arg(long)]
        tree: PathBuf,
        /// Also write a uniform sidecar naming the features.
        #[arg(long)]
        sidecar_out: Option<PathBuf>,
    },
    /// Compile a free BDD (JSON) into NNF.
    EncodeFbdd {
        #[arg(long)]
        fbdd: PathBuf,
        /// Also write a uniform sidecar naming the features.
        #[arg(long)]
        sidecar_out: Option<PathBuf>,
    },
    /// Generate gadget formulas and graphs.
    #[command(subcommand)]
    Gen(Gen),
    /// Closed-form values.
    #[command(subcommand)]
    ClosedForm(ClosedForm),
}

#[derive(Args)]
struct CircuitArgs {
    /// NNF document.
    #[arg(long)]
    circuit: PathBuf,
    /// Features, entity and distribution; variable `i` is feature `i`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Accept determinism without a `c d-DNNF` line or an exhaustive check.
    #[arg(long)]
    trust_det: bool,
    /// Largest feature count for the exhaustive determinism check.
    #[arg(long, default_value_t = DEFAULT_MAX_VARS)]
    max_vars: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: CircuitArgs,
    /// Only this feature.
    #[arg(long)]
    feature: Option<String>,
    #[arg(long, value_enum, default_value_t = Algorithm::Dp)]
    algorithm: Algorithm,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    sidecar: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_VARS)]
    max_vars: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Dynamic program on the circuit as given.
    Dp,
    /// Smooth first, then the table recurrences.
    Smooth,
    /// Enumeration over subsets and entities.
    Brute,
}

#[derive(Subcommand)]
enum Gen {
    /// θ(G): one term `a ∧ b` per non-adjacent pair of nodes.
    Theta {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = FormulaFormat::Dnf)]
        format: FormulaFormat,
        /// Allow graphs with fewer than two isolated nodes.
        #[arg(long)]
        unchecked: bool,
    },
    /// G_{n,t}: t isolated nodes beside a clique on n − t nodes.
    Gnt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
    },
    /// G^r: every node blown up into an r-clique.
    Amplify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormulaFormat {
    Dnf,
    Nnf,
}

#[derive(Subcommand)]
enum ClosedForm {
    /// SHAP(¬θ(G_{n,t}) ∧ ¬x, e, x) as t/(n(n+1)2^n) + 1/((t+1)2^{t+1}).
    Gnt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        /// The enumeration-consistent value, which adds t/(2(n+1)2^n).
        #[arg(long)]
        exact: bool,
    },
}

/// Why a run failed; decides the exit code and the `"error"` field.
#[derive(Debug)]
enum Failure {
    /// Bad arguments or an unreadable file (exit 2).
    Usage(String),
    /// Input that does not parse (exit 2).
    Parse { message: String, line: Option<usize> },
    /// Input that parses but violates a requirement (exit 1).
    Invalid(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) | Failure::Parse { .. } => 2,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Usage(m) => json!({"error": "usage", "message": m}),
            Failure::Parse { message, line: Some(line) } => json!({"error": "parse", "message": message, "line": line}),
            Failure::Parse { message, line: None } => json!({"error": "parse", "message": message}),
            Failure::Invalid(m) => json!({"error": "validation", "message": m}),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let line = match &e {
            IoError::Parse { line, .. } | IoError::ForwardReference { line, .. } => Some(*line),
            _ => None,
        };
        if e.is_parse_error() {
            Failure::Parse { message: e.to_string(), line }
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Invalid(e.to_string())
            }
        }
    )*};
}
invalid_from!(EngineError, OracleError, FormulaError, EncodeError);

type Output = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_sidecar(path: Option<&Path>) -> Result<Option<Sidecar>, Failure> {
    path.map(|p| Ok(parse_sidecar(&read(p)?)?)).transpose()
}

fn load_circuit(path: &Path, space: Option<&FeatureSpace>) -> Result<Circuit, Failure> {
    let text = read(path)?;
    let options = NnfOptions::default();
    Ok(match space {
        Some(space) => parse_nnf_with_space(&text, space, options)?,
        None => parse_nnf(&text, options)?,
    })
}

/// Names the values of `e` as `name=value` pairs.
fn describe(space: &FeatureSpace, e: &Entity) -> String {
    space.features().map(|f| format!("{}={}", space.name(f), space.domain(f)[e.value(f)])).collect::<Vec<_>>().join(",")
}

/// Keeps a declared or verified circuit; otherwise trusts it on request or
/// checks determinism exhaustively.
fn establish(c: Circuit, trust: bool, max_vars: usize) -> Result<Circuit, Failure> {
    if c.determinism().is_established() {
        return Ok(c);
    }
    if trust {
        return Ok(c.trust_determinism());
    }
    let space = c.shared_space();
    c.verify_determinism(max_vars).map_err(|report| match report {
        DeterminismReport::Counterexample { gate, entity, .. } => Failure::Invalid(format!(
            "or-gate {gate} is not deterministic: two inputs accept {}",
            describe(&space, &entity)
        )),
        DeterminismReport::Skipped { vars, max_vars } => Failure::Invalid(format!(
            "determinism unverified: {vars} features exceed --max-vars {max_vars}; mark the document `c d-DNNF` or pass --trust-det"
        )),
        DeterminismReport::Ok => unreachable!("verification succeeded"),
    })
}

struct Scored {
    space: FeatureSpace,
    scores: Vec<Rational>,
}

fn compute_scores(args: &ScoreArgs) -> Result<Scored, Failure> {
    let side = load_sidecar(args.input.sidecar.as_deref())?
        .ok_or_else(|| Failure::Usage("scores need --sidecar with an entity and a distribution".into()))?;
    let e = side.entity.clone().ok_or_else(|| Failure::Invalid("sidecar has no \"entity\"".into()))?;
    let c = load_circuit(&args.input.circuit, Some(&side.space))?;
    let p = &side.distribution;
    let scores = match args.algorithm {
        Algorithm::Brute => shap_bruteforce_all(&c, p, &e)?,
        Algorithm::Dp => shap_all(&establish(c, args.input.trust_det, args.input.max_vars)?, p, &e)?.scores,
        Algorithm::Smooth => {
            let c = establish(c, args.input.trust_det, args.input.max_vars)?;
            side.space.features().map(|x| shap_score_smooth(&c, p, &e, x)).collect::<Result<_, _>>()?
        }
    };
    Ok(Scored { space: side.space, scores })
}

fn selected(space: &FeatureSpace, only: Option<&str>) -> Result<Vec<FeatureId>, Failure> {
    match only {
        None => Ok(space.features().collect()),
        Some(name) => {
            space.feature(name).map(|f| vec![f]).ok_or_else(|| Failure::Invalid(format!("unknown feature {name:?}")))
        }
    }
}

fn lines(space: &FeatureSpace, scores: &[Rational], order: &[FeatureId]) -> String {
    order.iter().map(|&f| format!("{}\t{}\n", space.name(f), format_fraction(&scores[f.0]))).collect()
}

fn score(args: &ScoreArgs) -> Output {
    let s = compute_scores(args)?;
    let order = selected(&s.space, args.feature.as_deref())?;
    Ok(lines(&s.space, &s.scores, &order))
}

fn rank(args: &ScoreArgs) -> Output {
    let s = compute_scores(args)?;
    let mut order = selected(&s.space, args.feature.as_deref())?;
    // Stable: equal scores keep declaration order.
    order.sort_by(|a, b| s.scores[b.0].cmp(&s.scores[a.0]));
    Ok(lines(&s.space, &s.scores, &order))
}

fn count(args: &CircuitArgs) -> Output {
    let side = load_sidecar(args.sidecar.as_deref())?;
    let c = load_circuit(&args.circuit, side.as_ref().map(|s| &s.space))?;
    let c = establish(c, args.trust_det, args.max_vars)?;
    // The identity holds at every entity; any one will do.
    let e = match side.and_then(|s| s.entity) {
        Some(e) => e,
        None => Entity::new(c.space(), vec![0; c.space().len()]).expect("value 0 is in every domain"),
    };
    Ok(format!("{}\n", model_count_via_shap(&c, &e)?))
}

fn verify(args: &VerifyArgs) -> Output {
    let side = load_sidecar(args.sidecar.as_deref())?;
    let c = load_circuit(&args.circuit, side.as_ref().map(|s| &s.space))?;
    let decomposability = c.check_decomposability();
    if let Some(gate) = decomposability.violations.first() {
        return Err(Failure::Invalid(format!("and-gate {gate} is not decomposable")));
    }
    let declared = c.determinism().is_established();
    let space = c.shared_space();
    match c.check_determinism_bruteforce(args.max_vars) {
        DeterminismReport::Ok => Ok(format!(
            "features\t{}\ngates\t{}\nedges\t{}\ndecomposable\tyes\ndeterministic\tyes\ndeclared\t{}\n",
            space.len(),
            c.num_gates(),
            c.size(),
            if declared { "yes" } else { "no" }
        )),
        DeterminismReport::Counterexample { gate, inputs, entity } => Err(Failure::Invalid(format!(
            "or-gate {gate} is not deterministic: inputs {} and {} both accept {}",
            inputs.0,
            inputs.1,
            describe(&space, &entity)
        ))),
        DeterminismReport::Skipped { vars, max_vars } => {
            Err(Failure::Invalid(format!("determinism not checked: {vars} features exceed --max-vars {max_vars}")))
        }
    }
}

fn emit_encoded(c: &Circuit, sidecar_out: Option<&Path>) -> Output {
    if let Some(path) = sidecar_out {
        let uniform = ProductDistribution::uniform(c.space());
        write_file(path, &write_sidecar(c.space(), None, &uniform))?;
    }
    Ok(write_nnf(c)?)
}

fn gen(command: &Gen) -> Output {
    match command {
        Gen::Theta { graph, format, unchecked } => {
            let g = parse_graph(&read(graph)?)?;
            let theta = if *unchecked { build_theta_unchecked(&g)? } else { build_theta(&g)? };
            Ok(match format {
                FormulaFormat::Dnf => write_dnf(&theta),
                FormulaFormat::Nnf => write_nnf(&theta.to_circuit())?,
            })
        }
        Gen::Gnt { n, t } => Ok(write_graph(&build_gnt(GntParams::new(*n, *t)?))),
        Gen::Amplify { graph, r } => Ok(write_graph(&amplify(&parse_graph(&read(graph)?)?, *r)?)),
    }
}

fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Score(args) => score(&args),
        Command::Rank(args) => rank(&args),
        Command::Count(args) => count(&args),
        Command::Verify(args) => verify(&args),
        Command::EncodeDt { tree, sidecar_out } => {
            emit_encoded(&encode_tree(&parse_tree(&read(&tree)?)?)?, sidecar_out.as_deref())
        }
        Command::EncodeFbdd { fbdd, sidecar_out } => {
            emit_encoded(&encode_fbdd(&parse_fbdd(&read(&fbdd)?)?)?, sidecar_out.as_deref())
        }
        Command::Gen(g) => gen(&g),
        Command::ClosedForm(ClosedForm::Gnt { n, t, exact }) => {
            let params = GntParams::new(n, t)?;
            let value = if exact { gnt_shap_exact(params) } else { gnt_shap_closed_form(params) };
            Ok(format!("{}\n", format_fraction(&value)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", failure.to_json());
            return ExitCode::from(failure.exit_code());
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code())
        }
    }
}
