//! INI-style study configuration.
//!
//! ```text
//! [study]
//! study = oscillating
//! k = 4, 8, 16, 32
//! p = 2
//! t = 1
//!
//! [grid]
//! cells = 16
//! ```
//!
//! Only `study` and the study's parameter list (`k`, `kappa`, `h` or
//! `times`) are required; every other key falls back to the study preset,
//! and [`echo_config`] writes all of them back out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use krlab::experiments::{StudyConfig, StudyId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}` in [{section}]{}", suggestion(.nearest))]
    UnknownKey { line: usize, section: String, key: String, nearest: Option<String> },

    #[error("line {line}: `{key}` belongs in [{expected}], not [{section}]")]
    WrongSection { line: usize, key: String, section: String, expected: &'static str },

    #[error("line {line}: unknown section [{section}]{}", suggestion(.nearest))]
    UnknownSection { line: usize, section: String, nearest: Option<String> },

    #[error("line {line}: `{key}` {message}")]
    Value { line: usize, key: String, message: String },

    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    Duplicate { line: usize, key: String, first: usize },

    #[error("missing required key `{0}`")]
    Missing(String),

    #[error("unknown override key `{key}`{}", suggestion(.nearest))]
    UnknownOverride { key: String, nearest: Option<String> },

    #[error("override `{0}` must have the form key=value")]
    Override(String),

    #[error("invalid configuration: {0}")]
    Invalid(#[from] krlab::Error),
}

fn suggestion(nearest: &Option<String>) -> String {
    nearest.as_ref().map(|n| format!("; did you mean `{n}`?")).unwrap_or_default()
}

pub const SECTIONS: [&str; 4] = ["study", "grid", "field", "output"];

/// Every key with its section. Of `k`, `kappa`, `h` and `times` only the
/// chosen study's list key is accepted.
const KEYS: &[(&str, &str)] = &[
    ("study", "study"),
    ("study", "k"),
    ("study", "kappa"),
    ("study", "h"),
    ("study", "times"),
    ("study", "p"),
    ("study", "t"),
    ("study", "delta0"),
    ("grid", "cells"),
    ("grid", "periodic"),
    ("grid", "cfl"),
    ("grid", "measure_cells"),
    ("grid", "ensemble"),
    ("grid", "flow_dt"),
    ("field", "field"),
    ("field", "compare_field"),
    ("field", "initial"),
    ("field", "smooth_initial"),
    ("output", "dir"),
];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, k)| *k == key).map(|(s, _)| *s)
}

fn nearest<'a>(word: &str, candidates: impl Iterator<Item = &'a str>) -> Option<String> {
    candidates
        .map(|c| (strsim::damerau_levenshtein(word, c), c))
        .filter(|&(d, c)| d <= 2.max(c.len() / 3))
        .min()
        .map(|(_, c)| c.to_string())
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Raw `key = value` pairs with the line they came from; line 0 marks a
/// command-line override.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut section: Option<&str> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line: line_no, message: format!("unclosed section `{line}`") })?
                    .trim();
                section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| {
                    ConfigError::UnknownSection {
                        line: line_no,
                        section: name.to_string(),
                        nearest: nearest(name, SECTIONS.iter().copied()),
                    }
                })?);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let section = section.ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("`{key}` appears before any [section]"),
            })?;
            match section_of(key) {
                Some(s) if s == section => {}
                Some(expected) => {
                    return Err(ConfigError::WrongSection {
                        line: line_no,
                        key: key.to_string(),
                        section: section.to_string(),
                        expected,
                    })
                }
                None => {
                    let in_section = KEYS.iter().filter(|(s, _)| *s == section).map(|(_, k)| *k);
                    return Err(ConfigError::UnknownKey {
                        line: line_no,
                        section: section.to_string(),
                        key: key.to_string(),
                        nearest: nearest(key, in_section),
                    });
                }
            }
            if let Some(first) = raw.entries.get(key) {
                return Err(ConfigError::Duplicate { line: line_no, key: key.to_string(), first: first.line });
            }
            raw.entries.insert(key.to_string(), Entry { line: line_no, value: value.to_string() });
        }
        Ok(raw)
    }

    /// Applies a `key=value` override, replacing any value from the file.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        let key = key.trim();
        if section_of(key).is_none() {
            return Err(ConfigError::UnknownOverride {
                key: key.to_string(),
                nearest: nearest(key, KEYS.iter().map(|(_, k)| *k)),
            });
        }
        self.entries.insert(key.to_string(), Entry { line: 0, value: value.trim().to_string() });
        Ok(())
    }

    /// Builds and validates the configuration.
    pub fn build(&self) -> Result<StudyConfig, ConfigError> {
        let study_entry = self.entries.get("study").ok_or_else(|| ConfigError::Missing("study".into()))?;
        let study: StudyId = study_entry.value.parse().map_err(|_| ConfigError::Value {
            line: study_entry.line,
            key: "study".into(),
            message: format!(
                "must be one of {}{}",
                StudyId::ALL.map(|s| s.name()).join(", "),
                suggestion(&nearest(&study_entry.value, StudyId::ALL.iter().map(|s| s.name())))
            ),
        })?;
        let own = study.parameter_key();
        for other in StudyId::ALL.map(|s| s.parameter_key()) {
            if other != own {
                if let Some(e) = self.entries.get(other) {
                    return Err(ConfigError::Value {
                        line: e.line,
                        key: other.into(),
                        message: format!("does not apply to the {study} study, which sweeps `{own}`"),
                    });
                }
            }
        }

        let mut c = StudyConfig::preset(study);
        let params = self.entries.get(own).ok_or_else(|| ConfigError::Missing(own.into()))?;
        c.parameters = parse_list(own, params)?;
        self.read("p", &mut c.p)?;
        self.read("t", &mut c.t)?;
        self.read("delta0", &mut c.delta0)?;
        self.read("cells", &mut c.cells)?;
        self.read("periodic", &mut c.periodic)?;
        self.read("cfl", &mut c.cfl)?;
        self.read("measure_cells", &mut c.measure_cells)?;
        self.read("ensemble", &mut c.ensemble)?;
        self.read("flow_dt", &mut c.flow_dt)?;
        self.read("field", &mut c.field)?;
        self.read("compare_field", &mut c.compare_field)?;
        self.read("initial", &mut c.initial)?;
        self.read("smooth_initial", &mut c.smooth_initial)?;
        self.read("dir", &mut c.output)?;
        c.validate()?;
        Ok(c)
    }

    fn read<T>(&self, key: &str, slot: &mut T) -> Result<(), ConfigError>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some(e) = self.entries.get(key) {
            *slot = e.value.parse().map_err(|err: T::Err| ConfigError::Value {
                line: e.line,
                key: key.into(),
                message: format!("cannot parse `{}`: {err}", e.value),
            })?;
        }
        Ok(())
    }
}

fn parse_list(key: &str, e: &Entry) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| ConfigError::Value {
                line: e.line,
                key: key.into(),
                message: format!("expects a comma-separated list of numbers, got `{}`", v.trim()),
            })
        })
        .collect()
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<StudyConfig, ConfigError> {
    RawConfig::parse(text)?.build()
}

/// Writes every key of `config`, defaults included, in the file format.
/// Parsing the output yields `config` again.
pub fn echo_config(config: &StudyConfig) -> String {
    let list: Vec<String> = config.parameters.iter().map(f64::to_string).collect();
    let mut s = String::new();
    let _ = writeln!(s, "[study]");
    let _ = writeln!(s, "study = {}", config.study);
    let _ = writeln!(s, "{} = {}", config.study.parameter_key(), list.join(", "));
    let _ = writeln!(s, "p = {}", config.p);
    let _ = writeln!(s, "t = {}", config.t);
    let _ = writeln!(s, "delta0 = {}", config.delta0);
    let _ = writeln!(s, "\n[grid]");
    let _ = writeln!(s, "cells = {}", config.cells);
    let _ = writeln!(s, "periodic = {}", config.periodic);
    let _ = writeln!(s, "cfl = {}", config.cfl);
    let _ = writeln!(s, "measure_cells = {}", config.measure_cells);
    let _ = writeln!(s, "ensemble = {}", config.ensemble);
    let _ = writeln!(s, "flow_dt = {}", config.flow_dt);
    let _ = writeln!(s, "\n[field]");
    let _ = writeln!(s, "field = {}", config.field);
    let _ = writeln!(s, "compare_field = {}", config.compare_field);
    let _ = writeln!(s, "initial = {}", config.initial);
    let _ = writeln!(s, "smooth_initial = {}", config.smooth_initial);
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "dir = {}", config.output.display());
    s
}

/// Output directory: the command-line choice wins over `[output] dir`.
pub fn output_dir(config: &StudyConfig, cli: Option<PathBuf>) -> PathBuf {
    cli.unwrap_or_else(|| config.output.clone())
}
