//! Problem input files: `{"states": {"v", "w"}, "observable", "priors": {"p1"}}`,
//! any subset. Complex numbers are `[re, im]` pairs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure};

/// Largest Hilbert-space dimension accepted from input or flags.
pub const MAX_DIM: usize = 64;

pub type Entries = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StatesInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Vec<Entries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<PriorsInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesInput {
    pub v: Entries,
    pub w: Entries,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorsInput {
    pub p1: f64,
}

/// Parses JSON text, naming the offending field on failure.
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let location = if path == "." { "document".to_string() } else { format!("field `{path}`") };
        Failure::Input(format!("{origin}: {location}: {}", e.inner()))
    })
}

pub fn load(path: &Path) -> CliResult<ProblemInput> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let input: ProblemInput = parse_json(&text, &path.display().to_string())?;
    validate(&input)?;
    Ok(input)
}

/// Shape checks that do not depend on tolerances.
pub fn validate(input: &ProblemInput) -> CliResult<()> {
    let bad = |m: String| Err(Failure::Input(m));
    if let Some(s) = &input.states {
        if s.v.len() != s.w.len() {
            return bad(format!("states.v has {} entries but states.w has {}", s.v.len(), s.w.len()));
        }
        if s.v.is_empty() || s.v.len() > MAX_DIM {
            return bad(format!("state dimension {} outside [1, {MAX_DIM}]", s.v.len()));
        }
    }
    if let Some(rows) = &input.observable {
        let n = rows.len();
        if n == 0 || n > MAX_DIM {
            return bad(format!("observable dimension {n} outside [1, {MAX_DIM}]"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return bad(format!("observable[{i}] has {} entries, expected {n}", r.len()));
        }
        if let Some(s) = &input.states {
            if s.v.len() != n {
                return bad(format!("observable is {n}x{n} but states have dimension {}", s.v.len()));
            }
        }
    }
    if let Some(p) = input.priors {
        if !(p.p1 > 0.0 && p.p1 < 1.0) {
            return bad(format!("priors.p1 = {} outside (0, 1)", p.p1));
        }
    }
    Ok(())
}
