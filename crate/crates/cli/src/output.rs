use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::commands::Report;
use crate::config::{Format, RunConfig};
use crate::failure::{CliResult, Failure};
use crate::input::parse_json;

/// Default directory for relative `--output` paths.
pub const OUTPUT_DIR_VAR: &str = "DISCERN_OUTPUT_DIR";

const CSV_CONFIG_PREFIX: &str = "# config: ";

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn render(config: &RunConfig, report: &Report) -> CliResult<String> {
    let fail = |e: &dyn std::fmt::Display| Failure::Invariant(format!("cannot serialize output: {e}"));
    match config.format {
        Format::Json => {
            let doc = serde_json::json!({ "config": config, "result": report.json });
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| fail(&e))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| Failure::Usage(format!("{:?} has no CSV output", config.command)))?;
            let echo = serde_json::to_string(config).map_err(|e| fail(&e))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(|e| fail(&e))?;
            for row in &table.rows {
                w.write_record(row).map_err(|e| fail(&e))?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| fail(&e))?).map_err(|e| fail(&e))?;
            Ok(format!("{CSV_CONFIG_PREFIX}{echo}\n{body}"))
        }
    }
}

pub fn resolve_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes to stdout, or atomically replaces `path` via a sibling temp file.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    let io = |p: &Path, e: std::io::Error| Failure::Input(format!("cannot write {}: {e}", p.display()));
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| io(Path::new("<stdout>"), e));
    };
    let path = resolve_path(path);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io(&dir, e))?;
    tmp.write_all(text.as_bytes()).and_then(|_| tmp.as_file().sync_all()).map_err(|e| io(&path, e))?;
    tmp.persist(&path).map_err(|e| io(&path, e.error))?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDocument {
    config: RunConfig,
    #[allow(dead_code)]
    result: serde_json::Value,
}

/// Recovers the config echoed in a JSON or CSV output.
pub fn load_echo(path: &Path) -> CliResult<RunConfig> {
    let path = resolve_path(path);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let origin = path.display().to_string();
    let config = match text.strip_prefix(CSV_CONFIG_PREFIX) {
        Some(rest) => parse_json::<RunConfig>(rest.lines().next().unwrap_or(""), &origin)?,
        None => parse_json::<JsonDocument>(&text, &origin)?.config,
    };
    config.validate()?;
    Ok(config)
}
