//! Minimal sectioned `key = value` text format shared by the config and curve files.
//!
//! ```text
//! # comment
//! [section]
//! key = value   # trailing comment
//! ```
//!
//! Keys may repeat (curve files list several `halfspace` lines), and sections
//! may repeat (one `[curve]` per capability curve), so the document keeps
//! everything in file order.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KvError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    Invalid { key: String, line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    fn qualified(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry, KvError> {
        self.get(key).ok_or_else(|| KvError::Missing { key: self.qualified(key) })
    }

    pub fn f64(&self, key: &str) -> Result<f64, KvError> {
        let e = self.require(key)?;
        parse_f64(e, &self.qualified(key))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, KvError> {
        match self.get(key) {
            Some(e) => parse_f64(e, &self.qualified(key)),
            None => Ok(default),
        }
    }

    /// Builds a bound-violation error pointing at `key`'s line.
    pub fn invalid(&self, key: &str, msg: impl Into<String>) -> KvError {
        KvError::Invalid {
            key: self.qualified(key),
            line: self.get(key).map_or(self.line, |e| e.line),
            msg: msg.into(),
        }
    }
}

pub fn parse_f64(e: &Entry, qualified: &str) -> Result<f64, KvError> {
    match e.value.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(KvError::Invalid {
            key: qualified.to_string(),
            line: e.line,
            msg: format!("expected a finite number, got `{}`", e.value),
        }),
    }
}

/// Parses whitespace-separated numbers, e.g. `halfspace = 1 0 0.95`.
pub fn parse_f64_list(e: &Entry, qualified: &str, expected: usize) -> Result<Vec<f64>, KvError> {
    let vals: Vec<&str> = e.value.split_whitespace().collect();
    if vals.len() != expected {
        return Err(KvError::Invalid {
            key: qualified.to_string(),
            line: e.line,
            msg: format!("expected {expected} numbers, got {}", vals.len()),
        });
    }
    vals.iter()
        .map(|v| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(KvError::Invalid {
                key: qualified.to_string(),
                line: e.line,
                msg: format!("`{v}` is not a finite number"),
            }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| KvError::Syntax {
                    line,
                    msg: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(KvError::Syntax { line, msg: "empty section name".into() });
                }
                sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| KvError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(KvError::Syntax { line, msg: "empty key".into() });
            }
            let section = sections.last_mut().ok_or_else(|| KvError::Syntax {
                line,
                msg: format!("key `{key}` appears before any [section]"),
            })?;
            section.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
        }
        Ok(Self { sections })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn require_section(&self, name: &str) -> Result<&Section, KvError> {
        self.section(name).ok_or_else(|| KvError::Missing { key: format!("[{name}]") })
    }

    pub fn sections_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_repeats() {
        let doc = Document::parse(
            "# header\n[a]\nx = 1.5 # trailing\n\n[curve]\nhalfspace = 1 0 0.9\nhalfspace = 0 1 0.8\n[curve]\ndisk = 0 0 1\n",
        )
        .unwrap();
        assert_eq!(doc.sections.len(), 3);
        let a = doc.section("a").unwrap();
        assert_eq!(a.f64("x").unwrap(), 1.5);
        assert_eq!(a.get("x").unwrap().line, 3);
        assert_eq!(doc.sections_named("curve").count(), 2);
        assert_eq!(doc.sections[1].all("halfspace").count(), 2);
    }

    #[test]
    fn key_before_section_is_an_error() {
        let err = Document::parse("x = 1\n").unwrap_err();
        assert!(matches!(err, KvError::Syntax { line: 1, .. }));
    }

    #[test]
    fn bad_number_names_key_and_line() {
        let doc = Document::parse("[control]\n\neta = abc\n").unwrap();
        let err = doc.section("control").unwrap().f64("eta").unwrap_err();
        assert_eq!(
            err,
            KvError::Invalid { key: "control.eta".into(), line: 3, msg: "expected a finite number, got `abc`".into() }
        );
    }

    #[test]
    fn missing_key_is_qualified() {
        let doc = Document::parse("[base]\ns_va = 1\n").unwrap();
        let err = doc.section("base").unwrap().f64("vdc_v").unwrap_err();
        assert_eq!(err, KvError::Missing { key: "base.vdc_v".into() });
    }
}
