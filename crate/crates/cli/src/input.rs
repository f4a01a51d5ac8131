use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use diagsynth::diagonal::DiagonalUnitary;

/// Reads a diagonal from JSON (`{"n": .., "lambda": [..]}` or a bare array)
/// or from text with one phase per line; `#` starts a comment.
pub fn read_diagonal(path: &Path) -> Result<DiagonalUnitary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trimmed = text.trim_start();
    let phases = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        parse_json(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        parse_lines(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    // Shape problems in a phase file are input errors, not numerical ones.
    DiagonalUnitary::from_phases(phases).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn parse_json(text: &str) -> Result<Vec<f64>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let (n, lambda) = match &value {
        serde_json::Value::Array(_) => (None, &value),
        serde_json::Value::Object(map) => (
            map.get("n").map(|v| v.as_u64().context("\"n\" must be a non-negative integer")).transpose()?,
            map.get("lambda").context("missing \"lambda\"")?,
        ),
        _ => bail!("expected an object or an array"),
    };
    let phases: Vec<f64> = serde_json::from_value(lambda.clone()).context("\"lambda\" must be an array of numbers")?;
    if let Some(n) = n {
        if n >= 63 || phases.len() as u64 != 1 << n {
            bail!("n = {n} needs 2^n phases, found {}", phases.len());
        }
    }
    Ok(phases)
}

fn parse_lines(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim().trim_end_matches(',')))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| l.parse::<f64>().with_context(|| format!("line {}: {l:?} is not a number", i + 1)))
        .collect()
}
