//! Path-tagged YAML validation. Readers walk a parsed `serde_yaml::Value`,
//! record every problem with its dotted path (`actors[0].trigger.distance_m`)
//! and keep going, so a config author sees all mistakes at once instead of
//! one per run. Unknown keys suggest the nearest known spelling.

use serde_yaml::{Mapping, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    Parse(String),
    UnknownField {
        path: String,
        field: String,
        suggestion: Option<String>,
    },
    MissingField {
        path: String,
        field: String,
    },
    TypeMismatch {
        path: String,
        expected: &'static str,
        got: String,
    },
    RangeViolation {
        path: String,
        value: String,
        bound: String,
    },
    BadEnum {
        path: String,
        value: String,
        allowed: String,
    },
    Conflict {
        path: String,
        detail: String,
    },
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Issue::Parse(e) => write!(f, "not valid yaml: {e}"),
            Issue::UnknownField {
                path,
                field,
                suggestion,
            } => {
                write!(f, "{path}: unknown field '{field}'")?;
                if let Some(s) = suggestion {
                    write!(f, ", did you mean '{s}'?")?;
                }
                Ok(())
            }
            Issue::MissingField { path, field } => {
                write!(f, "{path}: missing required field '{field}'")
            }
            Issue::TypeMismatch {
                path,
                expected,
                got,
            } => write!(f, "{path}: expected {expected}, got {got}"),
            Issue::RangeViolation { path, value, bound } => {
                write!(f, "{path}: value {value} violates {bound}")
            }
            Issue::BadEnum {
                path,
                value,
                allowed,
            } => write!(f, "{path}: '{value}' is not one of [{allowed}]"),
            Issue::Conflict { path, detail } => write!(f, "{path}: {detail}"),
        }
    }
}

fn type_name(value: &Value) -> String {
    match value {
        Value::Null => "null".into(),
        Value::Bool(_) => "bool".into(),
        Value::Number(_) => "number".into(),
        Value::String(_) => "string".into(),
        Value::Sequence(_) => "sequence".into(),
        Value::Mapping(_) => "mapping".into(),
        Value::Tagged(_) => "tagged value".into(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Issue collector plus typed readers. Every reader returns `Option`; a
/// `None` means the issue was recorded and walking can continue.
#[derive(Debug, Default)]
pub struct Validator {
    issues: Vec<Issue>,
}

impl Validator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, issue: Issue) {
        self.issues.push(issue);
    }

    pub fn conflict(&mut self, path: &str, detail: impl Into<String>) {
        self.issues.push(Issue::Conflict {
            path: path.to_string(),
            detail: detail.into(),
        });
    }

    pub fn has_issues(&self) -> bool {
        !self.issues.is_empty()
    }

    /// Close out: the parsed value survives only with a clean slate.
    pub fn finish<T>(self, value: Option<T>) -> Result<T, Vec<Issue>> {
        match (self.issues.is_empty(), value) {
            (true, Some(v)) => Ok(v),
            (true, None) => Err(vec![Issue::Parse("validation produced no value".into())]),
            (false, _) => Err(self.issues),
        }
    }

    pub fn mapping<'a>(&mut self, value: &'a Value, path: &str) -> Option<&'a Mapping> {
        match value {
            Value::Mapping(m) => Some(m),
            Value::Null => Some(EMPTY_MAPPING.get_or_init(Mapping::new)),
            other => {
                self.push(Issue::TypeMismatch {
                    path: path.to_string(),
                    expected: "mapping",
                    got: type_name(other),
                });
                None
            }
        }
    }

    pub fn sequence<'a>(&mut self, value: &'a Value, path: &str) -> Option<&'a Vec<Value>> {
        match value {
            Value::Sequence(s) => Some(s),
            other => {
                self.push(Issue::TypeMismatch {
                    path: path.to_string(),
                    expected: "sequence",
                    got: type_name(other),
                });
                None
            }
        }
    }

    /// Flag any key outside `known`, suggesting the closest spelling.
    pub fn check_unknown(&mut self, map: &Mapping, path: &str, known: &[&str]) {
        for key in map.keys() {
            let name = match key {
                Value::String(s) => s.clone(),
                other => {
                    self.push(Issue::TypeMismatch {
                        path: path.to_string(),
                        expected: "string key",
                        got: type_name(other),
                    });
                    continue;
                }
            };
            if known.contains(&name.as_str()) {
                continue;
            }
            let suggestion = known
                .iter()
                .map(|k| (strsim::levenshtein(&name, k), *k))
                .min()
                .filter(|(d, _)| *d <= 3)
                .map(|(_, k)| k.to_string());
            self.push(Issue::UnknownField {
                path: path.to_string(),
                field: name,
                suggestion,
            });
        }
    }

    pub fn get<'a>(&self, map: &'a Mapping, key: &str) -> Option<&'a Value> {
        map.get(Value::String(key.to_string()))
    }

    pub fn require<'a>(&mut self, map: &'a Mapping, path: &str, key: &str) -> Option<&'a Value> {
        let found = self.get(map, key);
        if found.is_none() {
            self.push(Issue::MissingField {
                path: path.to_string(),
                field: key.to_string(),
            });
        }
        found
    }

    pub fn string(&mut self, value: &Value, path: &str) -> Option<String> {
        match value {
            Value::String(s) => Some(s.clone()),
            other => {
                self.push(Issue::TypeMismatch {
                    path: path.to_string(),
                    expected: "string",
                    got: type_name(other),
                });
                None
            }
        }
    }

    pub fn boolean(&mut self, value: &Value, path: &str) -> Option<bool> {
        match value {
            Value::Bool(b) => Some(*b),
            other => {
                self.push(Issue::TypeMismatch {
                    path: path.to_string(),
                    expected: "bool",
                    got: type_name(other),
                });
                None
            }
        }
    }

    pub fn f64_in(&mut self, value: &Value, path: &str, min: f64, max: f64) -> Option<f64> {
        let n = match value {
            Value::Number(n) => n.as_f64(),
            _ => None,
        };
        let Some(n) = n else {
            self.push(Issue::TypeMismatch {
                path: path.to_string(),
                expected: "number",
                got: type_name(value),
            });
            return None;
        };
        if !n.is_finite() || n < min || n > max {
            self.push(Issue::RangeViolation {
                path: path.to_string(),
                value: n.to_string(),
                bound: format!("[{min}, {max}]"),
            });
            return None;
        }
        Some(n)
    }

    pub fn u64_in(&mut self, value: &Value, path: &str, min: u64, max: u64) -> Option<u64> {
        let n = match value {
            Value::Number(n) => n.as_u64(),
            _ => None,
        };
        let Some(n) = n else {
            self.push(Issue::TypeMismatch {
                path: path.to_string(),
                expected: "non-negative integer",
                got: type_name(value),
            });
            return None;
        };
        if n < min || n > max {
            self.push(Issue::RangeViolation {
                path: path.to_string(),
                value: n.to_string(),
                bound: format!("[{min}, {max}]"),
            });
            return None;
        }
        Some(n)
    }

    /// A string restricted to a known vocabulary.
    pub fn one_of(&mut self, value: &Value, path: &str, allowed: &[&str]) -> Option<String> {
        let s = self.string(value, path)?;
        if allowed.contains(&s.as_str()) {
            Some(s)
        } else {
            self.push(Issue::BadEnum {
                path: path.to_string(),
                value: s,
                allowed: allowed.join(", "),
            });
            None
        }
    }

    /// Optional field helpers: read and validate when present.
    pub fn opt_f64_in(
        &mut self,
        map: &Mapping,
        path: &str,
        key: &str,
        min: f64,
        max: f64,
    ) -> Option<f64> {
        let value = self.get(map, key)?;
        self.f64_in(value, &join(path, key), min, max)
    }

    pub fn opt_u64_in(
        &mut self,
        map: &Mapping,
        path: &str,
        key: &str,
        min: u64,
        max: u64,
    ) -> Option<u64> {
        let value = self.get(map, key)?;
        self.u64_in(value, &join(path, key), min, max)
    }

    pub fn opt_string(&mut self, map: &Mapping, path: &str, key: &str) -> Option<String> {
        let value = self.get(map, key)?;
        self.string(value, &join(path, key))
    }

    pub fn opt_bool(&mut self, map: &Mapping, path: &str, key: &str) -> Option<bool> {
        let value = self.get(map, key)?;
        self.boolean(value, &join(path, key))
    }

    pub fn opt_one_of(
        &mut self,
        map: &Mapping,
        path: &str,
        key: &str,
        allowed: &[&str],
    ) -> Option<String> {
        let value = self.get(map, key)?;
        self.one_of(value, &join(path, key), allowed)
    }
}

static EMPTY_MAPPING: std::sync::OnceLock<Mapping> = std::sync::OnceLock::new();

/// Dotted child path.
pub fn child(path: &str, key: &str) -> String {
    join(path, key)
}

/// Indexed child path for sequences.
pub fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}
