//! Helpers for driving the compiled binary from integration tests. Commands
//! run from the workspace root so the fixture paths in reports stay relative
//! and byte-stable.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root resolves")
}

/// Runs the binary with the given arguments, shielded from any ambient
/// limits override in the caller's environment.
pub fn asyntop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asyntop"))
        .args(args)
        .current_dir(workspace_root())
        .env_remove("CONCUR_HOMOLOGY_LIMITS")
        .output()
        .expect("binary launches")
}

/// Same as [`asyntop`] but with one environment variable set.
pub fn asyntop_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asyntop"))
        .args(args)
        .current_dir(workspace_root())
        .env_remove("CONCUR_HOMOLOGY_LIMITS")
        .env(key, value)
        .output()
        .expect("binary launches")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exits on its own")
}

/// Reads a file relative to the workspace root.
pub fn read_workspace_file(path: &str) -> String {
    let full = workspace_root().join(path);
    std::fs::read_to_string(&full).unwrap_or_else(|err| panic!("reading {full:?}: {err}"))
}

pub fn parse_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|err| {
        panic!(
            "stdout is not JSON ({err}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}
