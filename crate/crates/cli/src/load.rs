//! Input loading: reading documents, detecting their kind, resolving
//! exploration limits, and hashing inputs for the run report.

use asyntop::formats::{self, DocKind, NetDoc, SystemDoc};
use asyntop::lts::LabelledAsyncSystem;
use asyntop::petri::Limits;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

/// One input file as recorded in the report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn read_input(path: &Path) -> Result<(String, InputDigest), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
    let digest = digest_text(&path.display().to_string(), &text);
    Ok((text, digest))
}

/// Digest for inputs that are not files, such as fixture expressions.
pub fn digest_text(name: &str, text: &str) -> InputDigest {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let mut sha256 = String::new();
    for byte in hasher.finalize() {
        write!(sha256, "{byte:02x}").unwrap();
    }
    InputDigest {
        path: name.to_string(),
        sha256,
    }
}

/// The declared `--type` if given, otherwise detection by top-level field.
pub fn resolve_kind(text: &str, declared: Option<DocKind>) -> Result<DocKind, String> {
    match declared {
        Some(kind) => Ok(kind),
        None => formats::detect_kind(text).map_err(|e| e.to_string()),
    }
}

/// A system from either a system document or a net document (expanded
/// within `limits`); net expansion may drop never-enabled events, reported
/// as warnings.
pub fn load_system(
    text: &str,
    kind: DocKind,
    limits: &Limits,
    warnings: &mut Vec<String>,
) -> Result<LabelledAsyncSystem, String> {
    match kind {
        DocKind::System => Ok(SystemDoc::parse(text)
            .map_err(|e| e.to_string())?
            .into_system()
            .map_err(|e| e.to_string())?),
        DocKind::Net => {
            let net = NetDoc::parse(text)
                .map_err(|e| e.to_string())?
                .into_net()
                .map_err(|e| e.to_string())?;
            let expansion = net.expand(limits).map_err(|e| e.to_string())?;
            for event in &expansion.dropped_events {
                warnings.push(format!(
                    "event `{event}` never becomes enabled and was dropped"
                ));
            }
            Ok(expansion.system)
        }
        DocKind::Scheme => Err("expected a system or net document, found a scheme".into()),
    }
}

/// `--limits N,M` beats `CONCUR_HOMOLOGY_LIMITS=N,M` beats the defaults.
pub fn resolve_limits(flag: Option<&str>) -> Result<Limits, String> {
    let spec = match flag {
        Some(s) => Some(s.to_string()),
        None => std::env::var("CONCUR_HOMOLOGY_LIMITS").ok(),
    };
    let Some(spec) = spec else {
        return Ok(Limits::default());
    };
    let parts: Vec<&str> = spec.split(',').collect();
    let fail = || format!("limits must be `maxStates,maxTokens`, got `{spec}`");
    if parts.len() != 2 {
        return Err(fail());
    }
    let max_states: usize = parts[0].trim().parse().map_err(|_| fail())?;
    let max_tokens: u64 = parts[1].trim().parse().map_err(|_| fail())?;
    if max_states == 0 {
        return Err(format!("maxStates must be positive, got `{spec}`"));
    }
    Ok(Limits {
        max_states,
        max_tokens,
    })
}
