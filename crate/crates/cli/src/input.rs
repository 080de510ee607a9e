//! Line-oriented system files, matrix files and direction strings.

use std::path::Path;

use newtonscope::poly::{parse_polynomial, IntMatrix, PolySystem};
use newtonscope::Rational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn at(line: usize, message: impl Into<String>) -> InputError {
    InputError::Line { line, message: message.into() }
}

pub fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })
}

/// A parsed system file.
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub system: PolySystem,
    /// Indices of the variables projected away.
    pub project: Vec<usize>,
    pub seed: Option<u64>,
}

impl SystemFile {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        Self::parse(&read(path)?)
    }

    /// Parses `vars:`, `eq:`, `project:` and `seed:` lines. Blank lines and
    /// text after `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut vars: Option<(usize, Vec<String>)> = None;
        let mut eqs: Vec<(usize, String)> = Vec::new();
        let mut project: Option<(usize, Vec<String>)> = None;
        let mut seed = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once(':').ok_or_else(|| at(line, "expected `key: value`"))?;
            let value = value.trim();
            match key.trim() {
                "vars" => {
                    if vars.is_some() {
                        return Err(at(line, "variables declared twice"));
                    }
                    let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                    if names.is_empty() {
                        return Err(at(line, "no variables"));
                    }
                    if let Some(bad) = names.iter().find(|n| !is_identifier(n)) {
                        return Err(at(line, format!("`{bad}` is not a variable name")));
                    }
                    if let Some(dup) = names.iter().enumerate().find(|(k, n)| names[..*k].contains(n)) {
                        return Err(at(line, format!("variable `{}` declared twice", dup.1)));
                    }
                    vars = Some((line, names));
                }
                "eq" => eqs.push((line, value.to_string())),
                "project" => project = Some((line, value.split_whitespace().map(str::to_string).collect())),
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| at(line, format!("bad seed: {e}")))?),
                other => return Err(at(line, format!("unknown key `{other}`"))),
            }
        }
        let (_, names) = vars.ok_or_else(|| InputError::Invalid("missing `vars:` line".into()))?;
        if eqs.is_empty() {
            return Err(InputError::Invalid("no `eq:` lines".into()));
        }
        let polys = eqs
            .iter()
            .map(|(line, text)| parse_polynomial(text, &names).map_err(|e| at(*line, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let system = PolySystem::new(names.clone(), polys).map_err(|e| InputError::Invalid(e.to_string()))?;
        let project = match project {
            None => Vec::new(),
            Some((line, dropped)) => dropped
                .iter()
                .map(|d| names.iter().position(|n| n == d).ok_or_else(|| at(line, format!("unknown variable `{d}`"))))
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(Self { system, project, seed })
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses a comma-separated list of rationals such as `3/2,-1`.
pub fn parse_direction(text: &str) -> Result<Vec<Rational>, InputError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<Rational>().map_err(|_| InputError::Invalid(format!("`{t}` is not a rational number")))
        })
        .collect()
}

/// Parses a square integer matrix, one whitespace-separated row per line.
pub fn parse_matrix(text: &str) -> Result<IntMatrix, InputError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>().map_err(|_| at(i + 1, format!("`{t}` is not an integer"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    IntMatrix::from_rows(rows).map_err(|e| InputError::Invalid(e.to_string()))
}
