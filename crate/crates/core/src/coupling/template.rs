use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use super::shortest;
use crate::error::{Error, Result};

/// Solver configuration text with `{{name}}` placeholders, rendered to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTemplate {
    pub text: String,
    /// Path of the rendered file, relative to the actuation work directory.
    pub target: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TemplateValue {
    Number(f64),
    Text(String),
}

impl From<f64> for TemplateValue {
    fn from(v: f64) -> Self {
        TemplateValue::Number(v)
    }
}

impl From<&str> for TemplateValue {
    fn from(v: &str) -> Self {
        TemplateValue::Text(v.to_owned())
    }
}

impl From<String> for TemplateValue {
    fn from(v: String) -> Self {
        TemplateValue::Text(v)
    }
}

impl TemplateValue {
    fn render(&self) -> String {
        match self {
            TemplateValue::Number(v) => shortest(*v),
            TemplateValue::Text(s) => s.clone(),
        }
    }
}

enum Piece<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        let after = &rest[open + 2..];
        let Some(close) = after.find("}}") else {
            break;
        };
        out.push(Piece::Literal(&rest[..open]));
        out.push(Piece::Slot(after[..close].trim()));
        rest = &after[close + 2..];
    }
    out.push(Piece::Literal(rest));
    out
}

/// Distinct placeholder names in order of first appearance.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    pieces(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Slot(name) if seen.insert(name) => Some(name.to_owned()),
            _ => None,
        })
        .collect()
}

pub fn render_template(tpl: &SolverTemplate, values: &BTreeMap<String, TemplateValue>) -> Result<String> {
    let parts = pieces(&tpl.text);
    let missing: BTreeSet<String> = parts
        .iter()
        .filter_map(|p| match p {
            Piece::Slot(name) if !values.contains_key(*name) => Some((*name).to_owned()),
            _ => None,
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::Template {
            names: missing.into_iter().collect(),
        });
    }
    let mut out = String::with_capacity(tpl.text.len() + 32);
    for p in parts {
        match p {
            Piece::Literal(s) => out.push_str(s),
            Piece::Slot(name) => out.push_str(&values[name].render()),
        }
    }
    Ok(out)
}
