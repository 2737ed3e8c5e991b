//! Run reports and output emission.
//!
//! Every subcommand produces a result value plus human-readable lines. In
//! JSON mode the result is wrapped in a [`RunReport`] and printed as the
//! only stdout output; in human mode the lines go to stdout and warnings
//! go to stderr. Reports carry no timestamps, so identical inputs yield
//! byte-identical JSON; elapsed time is printed to stderr in human mode.

use asyntop::homology::HomologySignature;
use asyntop::snf::{IntegerMatrix, SmithForm};
use serde::Serialize;

use crate::load::InputDigest;

#[derive(Debug, Serialize)]
pub struct RunReport<T: Serialize> {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: T,
    pub warnings: Vec<String>,
}

/// A homology signature in report form: the rendered text plus one entry
/// per degree up to the last nontrivial group.
#[derive(Debug, Serialize)]
pub struct SignatureJson {
    pub rendered: String,
    pub groups: Vec<GroupJson>,
}

#[derive(Debug, Serialize)]
pub struct GroupJson {
    pub degree: usize,
    pub betti: usize,
    pub torsion: Vec<String>,
}

impl SignatureJson {
    pub fn new(signature: &HomologySignature) -> Self {
        SignatureJson {
            rendered: signature.to_string(),
            groups: signature
                .groups()
                .iter()
                .enumerate()
                .map(|(degree, group)| GroupJson {
                    degree,
                    betti: group.betti,
                    torsion: group.torsion.iter().map(|t| t.to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// One boundary matrix with its Smith diagonal, as dumped by
/// `homology --dump-matrices`.
#[derive(Debug, Serialize)]
pub struct MatrixJson {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
    pub snf_diagonal: Vec<String>,
    pub rank: usize,
}

impl MatrixJson {
    pub fn new(name: &str, matrix: &IntegerMatrix, form: &SmithForm) -> Self {
        let entries = (0..matrix.rows())
            .map(|i| {
                (0..matrix.cols())
                    .map(|j| matrix.get(i, j).to_string())
                    .collect()
            })
            .collect();
        MatrixJson {
            name: name.to_string(),
            rows: matrix.rows(),
            cols: matrix.cols(),
            entries,
            snf_diagonal: form.diagonal().iter().map(|d| d.to_string()).collect(),
            rank: form.rank(),
        }
    }
}

/// Prints either the human lines or the JSON report, per `json`.
pub fn emit<T: Serialize>(
    json: bool,
    command: &str,
    inputs: Vec<InputDigest>,
    results: T,
    warnings: Vec<String>,
    human: &[String],
) {
    if json {
        let report = RunReport {
            command: command.to_string(),
            inputs,
            results,
            warnings,
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        for line in human {
            println!("{line}");
        }
        for warning in &warnings {
            eprintln!("warning: {warning}");
        }
    }
}
