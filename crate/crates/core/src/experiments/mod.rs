//! Config-driven experiment runner producing deterministic CSV tables.

pub mod config;
mod runner;
pub mod table;
mod validate;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub use config::{
    BetaRule, BetaSpec, ComplexSpec, ExperimentConfig, ExperimentId, GridSettings, KindSpec, Overrides, RangeSpec,
    SimpleKind, ValidationGrid,
};
pub use runner::run_experiment;
pub use table::{write_atomic as write_file_atomic, Column, ColumnType, ResultTable, Value};
pub use validate::{validate_oracles, ValidationReport};

use crate::error::Result;

/// Float rendering used in every table: rounded to 12 significant digits, then
/// printed in the shortest form that reads back to the rounded value.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let exponent = rounded.abs().log10().floor();
    if (-5.0..16.0).contains(&exponent) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn stamp(table: &mut ResultTable, label: &str, hash: &str, dims: &BTreeSet<usize>) {
    table.set_provenance("experiment", label);
    table.set_provenance("config_sha256", hash);
    table.set_provenance("code_version", concat!("nfcs-core ", env!("CARGO_PKG_VERSION")));
    let dims: Vec<String> = dims.iter().map(usize::to_string).collect();
    table.set_provenance("truncation_dims", dims.join(" "));
}

/// Runs an experiment and writes its table into `out_dir`, returning the file path.
pub fn run_and_write(config: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    let table = run_experiment(config)?;
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(config.output_name());
    table.write_atomic(&path)?;
    Ok(path)
}
