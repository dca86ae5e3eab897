#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spectral_gnn::data::{planted_partition, write_cora_format, PlantedPartition};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-gnn"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// A synthetic corpus in the raw Cora layout, large enough for the standard
/// 140 / 500 / 1000 split. Returns the content and cites paths.
pub fn cora_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let spec = PlantedPartition {
        n_classes: 7,
        per_class: 235,
        n_features: 70,
        p_in: 0.012,
        p_out: 0.001,
        active_features: 6,
        signal: 0.5,
    };
    let ds = planted_partition(spec, 2024).expect("fixture spec is valid");
    let content = dir.join("fixture.content");
    let cites = dir.join("fixture.cites");
    write_cora_format(&ds, &content, &cites).expect("fixture is writable");
    (content, cites)
}

/// Parses the machine-readable error object a failed invocation prints.
pub fn error_object(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not an error object ({e}): {stderr}"))
}
