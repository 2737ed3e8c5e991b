//! Command-line frontend for the `asyntop` library.
//!
//! Five subcommands: `validate` checks documents against the axioms,
//! `homology` computes signatures (with optional matrix dumps), `bisim`
//! refutes or certifies label-preserving bisimilarity, `construct` realizes
//! a scheme as a Petri net, and `snf` diagonalizes integer matrices.
//!
//! Exit codes: 0 for success (valid input, certified span), 1 for errors
//! and invalid inputs, 2 when bisimilarity is refuted, 3 when a bisimilarity
//! check is inconclusive.

mod load;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use asyntop::bisim::{self, Verdict};
use asyntop::construct::{fixture_scheme, net_from_scheme, verify_construction, FixtureExpr};
use asyntop::formats::{
    parse_matrix_blocks, render_matrix_block, DocKind, NetDoc, SchemeDoc, SpanDoc, SystemDoc,
};
use asyntop::homology::{boundary_matrix, homology, HomologySignature};
use asyntop::lts::LabelledAsyncSystem;
use asyntop::scheme::scheme_of_system;
use asyntop::snf::smith_normal_form;
use asyntop::StateId;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::load::{digest_text, read_input, resolve_kind, resolve_limits};
use crate::report::{emit, MatrixJson, SignatureJson};

#[derive(Parser)]
#[command(
    name = "asyntop",
    version,
    about = "Homology tools for asynchronous transition systems, Petri nets, and simplicial schemes"
)]
struct Cli {
    /// Emit a JSON run report on stdout instead of human-readable text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document for well-formedness and the transition system axioms
    Validate {
        /// Input document (JSON)
        path: PathBuf,

        /// Input kind; detected from the document's top-level fields by default
        #[arg(long = "type", value_enum)]
        kind: Option<InputKind>,
    },

    /// Homology signature of a scheme, or of the scheme derived from a system or net
    Homology {
        /// Input document (JSON)
        path: PathBuf,

        /// Input kind; detected from the document's top-level fields by default
        #[arg(long = "type", value_enum)]
        kind: Option<InputKind>,

        /// Use the residual system rooted at this reachable state
        #[arg(long)]
        state: Option<String>,

        /// Print each boundary matrix together with its Smith diagonal
        #[arg(long)]
        dump_matrices: bool,

        /// Net expansion limits as `maxStates,maxTokens`
        #[arg(long)]
        limits: Option<String>,
    },

    /// Compare two systems for label-preserving bisimilarity
    #[command(group(ArgGroup::new("mode").required(true).args(["refute", "certify"])))]
    Bisim {
        /// Left input document (system or net)
        left: PathBuf,

        /// Right input document (system or net)
        right: PathBuf,

        /// Search reachable layers for a homology signature difference
        #[arg(long)]
        refute: bool,

        /// Longest word length the refuter explores (default: total state count)
        #[arg(long, conflicts_with = "certify")]
        max_len: Option<usize>,

        /// Check a span of open morphisms read from this file
        #[arg(long, value_name = "SPAN")]
        certify: Option<PathBuf>,

        /// Net expansion limits as `maxStates,maxTokens`
        #[arg(long)]
        limits: Option<String>,
    },

    /// Build a Petri net whose reachable behaviour realizes a scheme
    Construct {
        /// Scheme file, or a fixture expression such as `sphere:2`,
        /// `rp2`, `wedge(sphere:1,sphere:1)`, `union(rp2,sphere:2)`
        input: String,

        /// Check that scheme, subdivision, and net homology signatures agree
        #[arg(long)]
        verify: bool,

        /// Net expansion limits as `maxStates,maxTokens`
        #[arg(long)]
        limits: Option<String>,
    },

    /// Smith normal form of every matrix in a plain-text file
    Snf {
        /// Matrix file: optional `name rows cols` headers, one row per line
        path: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    Lts,
    Net,
    Scheme,
}

impl From<InputKind> for DocKind {
    fn from(kind: InputKind) -> Self {
        match kind {
            InputKind::Lts => DocKind::System,
            InputKind::Net => DocKind::Net,
            InputKind::Scheme => DocKind::Scheme,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage mistakes exit 1; --help and --version exit 0. Clap's
            // default usage exit code (2) is reserved for refuted bisimilarity.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    };
    if !cli.json {
        eprintln!("elapsed: {:.1} ms", start.elapsed().as_secs_f64() * 1000.0);
    }
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<u8, String> {
    match &cli.command {
        Command::Validate { path, kind } => cmd_validate(cli.json, path, kind.map(Into::into)),
        Command::Homology {
            path,
            kind,
            state,
            dump_matrices,
            limits,
        } => cmd_homology(
            cli.json,
            path,
            kind.map(Into::into),
            state.as_deref(),
            *dump_matrices,
            limits.as_deref(),
        ),
        Command::Bisim {
            left,
            right,
            refute,
            max_len,
            certify,
            limits,
        } => cmd_bisim(
            cli.json,
            left,
            right,
            *refute,
            *max_len,
            certify.as_deref(),
            limits.as_deref(),
        ),
        Command::Construct {
            input,
            verify,
            limits,
        } => cmd_construct(cli.json, input, *verify, limits.as_deref()),
        Command::Snf { path } => cmd_snf(cli.json, path),
    }
}

#[derive(Serialize)]
struct ValidateResults {
    kind: &'static str,
    valid: bool,
    violations: Vec<String>,
}

fn cmd_validate(json: bool, path: &Path, declared: Option<DocKind>) -> Result<u8, String> {
    let (text, digest) = read_input(path)?;
    let kind = resolve_kind(&text, declared)?;
    let kind_name = kind_name(kind);
    let mut violations: Vec<String> = Vec::new();
    match kind {
        DocKind::System => {
            let built = SystemDoc::parse(&text)
                .map_err(|e| e.to_string())
                .and_then(|doc| doc.into_system().map_err(|e| e.to_string()));
            match built {
                Ok(system) => violations.extend(
                    system
                        .system()
                        .validate()
                        .violations()
                        .iter()
                        .map(|v| v.to_string()),
                ),
                Err(message) => violations.push(message),
            }
        }
        DocKind::Net => {
            let built = NetDoc::parse(&text)
                .map_err(|e| e.to_string())
                .and_then(|doc| doc.into_net().map_err(|e| e.to_string()));
            if let Err(message) = built {
                violations.push(message);
            }
        }
        DocKind::Scheme => {
            let built = SchemeDoc::parse(&text)
                .map_err(|e| e.to_string())
                .and_then(|doc| doc.into_scheme().map_err(|e| e.to_string()));
            if let Err(message) = built {
                violations.push(message);
            }
        }
    }
    let valid = violations.is_empty();
    let mut human = vec![format!(
        "{kind_name}: {}",
        if valid { "valid" } else { "invalid" }
    )];
    human.extend(violations.iter().map(|v| format!("  {v}")));
    emit(
        json,
        "validate",
        vec![digest],
        ValidateResults {
            kind: kind_name,
            valid,
            violations,
        },
        Vec::new(),
        &human,
    );
    Ok(u8::from(!valid))
}

#[derive(Serialize)]
struct HomologyResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<String>,
    signature: SignatureJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<Vec<MatrixJson>>,
}

fn cmd_homology(
    json: bool,
    path: &Path,
    declared: Option<DocKind>,
    state: Option<&str>,
    dump_matrices: bool,
    limits_flag: Option<&str>,
) -> Result<u8, String> {
    let (text, digest) = read_input(path)?;
    let kind = resolve_kind(&text, declared)?;
    let limits = resolve_limits(limits_flag)?;
    let mut warnings = Vec::new();
    let scheme = match kind {
        DocKind::Scheme => {
            if state.is_some() {
                return Err("--state requires a system or net input, not a scheme".into());
            }
            SchemeDoc::parse(&text)
                .map_err(|e| e.to_string())?
                .into_scheme()
                .map_err(|e| e.to_string())?
        }
        _ => {
            let system = load::load_system(&text, kind, &limits, &mut warnings)?;
            let report = system.system().validate();
            if let Some(first) = report.violations().first() {
                return Err(format!("input system fails validation: {first}"));
            }
            let system = match state {
                Some(name) => system
                    .residual(&StateId::new(name))
                    .map_err(|e| e.to_string())?,
                None => system,
            };
            scheme_of_system(&system)
        }
    };
    let signature = homology(&scheme);
    let mut human = vec![signature.to_string()];
    let matrices = dump_matrices.then(|| {
        let mut dumped = Vec::new();
        for degree in 1..=scheme.dimension().unwrap_or(0) {
            let matrix = boundary_matrix(&scheme, degree);
            let form = smith_normal_form(&matrix);
            let name = format!("d{degree}");
            human.push(String::new());
            human.push(
                render_matrix_block(&name, &matrix, Some(&form))
                    .trim_end()
                    .to_string(),
            );
            dumped.push(MatrixJson::new(&name, &matrix, &form));
        }
        dumped
    });
    emit(
        json,
        "homology",
        vec![digest],
        HomologyResults {
            state: state.map(str::to_string),
            signature: SignatureJson::new(&signature),
            matrices,
        },
        warnings,
        &human,
    );
    Ok(0)
}

#[derive(Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
enum VerdictJson {
    Certified,
    NotBisimilar {
        length: usize,
        witness: Vec<String>,
        side: String,
    },
    Inconclusive {
        reason: String,
    },
}

impl VerdictJson {
    fn new(verdict: &Verdict) -> Self {
        match verdict {
            Verdict::Certified => VerdictJson::Certified,
            Verdict::NotBisimilar {
                length,
                witness,
                side,
            } => VerdictJson::NotBisimilar {
                length: *length,
                witness: witness.iter().map(|e| e.to_string()).collect(),
                side: side.to_string(),
            },
            Verdict::Inconclusive { reason } => VerdictJson::Inconclusive {
                reason: reason.clone(),
            },
        }
    }
}

fn load_valid_system(
    name: &str,
    text: &str,
    limits: &asyntop::petri::Limits,
    warnings: &mut Vec<String>,
) -> Result<LabelledAsyncSystem, String> {
    let kind = resolve_kind(text, None)?;
    let system = load::load_system(text, kind, limits, warnings)
        .map_err(|e| format!("{name} input: {e}"))?;
    if let Some(first) = system.system().validate().violations().first() {
        return Err(format!("{name} system fails validation: {first}"));
    }
    Ok(system)
}

fn cmd_bisim(
    json: bool,
    left_path: &Path,
    right_path: &Path,
    refute: bool,
    max_len: Option<usize>,
    certify: Option<&Path>,
    limits_flag: Option<&str>,
) -> Result<u8, String> {
    let limits = resolve_limits(limits_flag)?;
    let (left_text, left_digest) = read_input(left_path)?;
    let (right_text, right_digest) = read_input(right_path)?;
    let mut warnings = Vec::new();
    let left = load_valid_system("left", &left_text, &limits, &mut warnings)?;
    let right = load_valid_system("right", &right_text, &limits, &mut warnings)?;
    let mut inputs = vec![left_digest, right_digest];
    let verdict = if refute {
        bisim::refute(&left, &right, max_len).map_err(|e| e.to_string())?
    } else {
        let span_path = certify.expect("clap requires exactly one of --refute/--certify");
        let (span_text, span_digest) = read_input(span_path)?;
        inputs.push(span_digest);
        let span = SpanDoc::parse(&span_text)
            .map_err(|e| e.to_string())?
            .into_span(left, right)
            .map_err(|e| e.to_string())?;
        bisim::certify(&span)
    };
    let code = match &verdict {
        Verdict::Certified => 0,
        Verdict::NotBisimilar { .. } => 2,
        Verdict::Inconclusive { .. } => 3,
    };
    emit(
        json,
        "bisim",
        inputs,
        VerdictJson::new(&verdict),
        warnings,
        &[verdict.to_string()],
    );
    Ok(code)
}

#[derive(Serialize)]
struct ConstructResults {
    net: NetDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerificationJson>,
}

#[derive(Serialize)]
struct VerificationJson {
    scheme: SignatureJson,
    subdivision: SignatureJson,
    net: SignatureJson,
    agrees: bool,
}

fn signature_line(signature: &HomologySignature) -> String {
    signature.to_string().replace('\n', ", ")
}

fn cmd_construct(
    json: bool,
    input: &str,
    verify: bool,
    limits_flag: Option<&str>,
) -> Result<u8, String> {
    let limits = resolve_limits(limits_flag)?;
    let path = Path::new(input);
    let (scheme, digest) = if path.is_file() {
        let (text, digest) = read_input(path)?;
        let scheme = SchemeDoc::parse(&text)
            .map_err(|e| e.to_string())?
            .into_scheme()
            .map_err(|e| e.to_string())?;
        (scheme, digest)
    } else {
        let expr: FixtureExpr = input.parse().map_err(|e| {
            format!("`{input}` is neither an existing file nor a fixture expression: {e}")
        })?;
        (fixture_scheme(&expr), digest_text(input, input))
    };
    let net = net_from_scheme(&scheme).map_err(|e| e.to_string())?;
    let net_doc = NetDoc::from(&net);
    let check = verify
        .then(|| verify_construction(&scheme, &limits))
        .transpose()
        .map_err(|e| e.to_string())?;
    let agrees = check.as_ref().map(|c| c.agrees());
    let net_json = serde_json::to_string_pretty(&net_doc).expect("net document serializes");
    let results = ConstructResults {
        net: net_doc,
        verification: check.as_ref().map(|c| VerificationJson {
            scheme: SignatureJson::new(&c.scheme_signature),
            subdivision: SignatureJson::new(&c.subdivision_signature),
            net: SignatureJson::new(&c.net_signature),
            agrees: c.agrees(),
        }),
    };
    // Human mode keeps stdout a pure net document so it can be piped into
    // the other subcommands; the verification summary goes to stderr.
    emit(
        json,
        "construct",
        vec![digest],
        results,
        Vec::new(),
        &[net_json],
    );
    if !json {
        if let Some(check) = &check {
            eprintln!("verification:");
            eprintln!("  scheme:      {}", signature_line(&check.scheme_signature));
            eprintln!(
                "  subdivision: {}",
                signature_line(&check.subdivision_signature)
            );
            eprintln!("  net:         {}", signature_line(&check.net_signature));
            eprintln!(
                "  {}",
                if check.agrees() {
                    "signatures agree"
                } else {
                    "signatures disagree"
                }
            );
        }
    }
    Ok(u8::from(agrees == Some(false)))
}

#[derive(Serialize)]
struct SnfResults {
    blocks: Vec<SnfBlockJson>,
}

#[derive(Serialize)]
struct SnfBlockJson {
    name: String,
    rows: usize,
    cols: usize,
    diagonal: Vec<String>,
    rank: usize,
}

fn cmd_snf(json: bool, path: &Path) -> Result<u8, String> {
    let (text, digest) = read_input(path)?;
    let blocks = parse_matrix_blocks(&text).map_err(|e| e.to_string())?;
    if blocks.is_empty() {
        return Err("no matrices found in input".into());
    }
    let mut human = Vec::new();
    let mut results = Vec::new();
    for (name, matrix) in &blocks {
        let form = smith_normal_form(matrix);
        let shown = if name.is_empty() { "matrix" } else { name };
        let diagonal: Vec<String> = form.diagonal().iter().map(|d| d.to_string()).collect();
        let rendered = if diagonal.is_empty() {
            "(empty)".to_string()
        } else {
            diagonal.join(" ")
        };
        human.push(format!(
            "{shown}: diagonal {rendered}, rank {}",
            form.rank()
        ));
        results.push(SnfBlockJson {
            name: shown.to_string(),
            rows: matrix.rows(),
            cols: matrix.cols(),
            diagonal,
            rank: form.rank(),
        });
    }
    emit(
        json,
        "snf",
        vec![digest],
        SnfResults { blocks: results },
        Vec::new(),
        &human,
    );
    Ok(0)
}

fn kind_name(kind: DocKind) -> &'static str {
    match kind {
        DocKind::System => "system",
        DocKind::Net => "net",
        DocKind::Scheme => "scheme",
    }
}
