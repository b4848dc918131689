use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::disjunctive;
use super::formula::{param_var, Formula, RECURSION_VAR};
use super::parser::parse;
use super::SyntaxError;

/// Classification of a connective body against the two disjunctive grammars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisjClass {
    Forward,
    Backward,
    None,
}

impl DisjClass {
    pub fn is_disjunctive(self) -> bool {
        self != DisjClass::None
    }
}

impl fmt::Display for DisjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisjClass::Forward => "forward",
            DisjClass::Backward => "backward",
            DisjClass::None => "none",
        })
    }
}

/// An `n`-place fixpoint connective `χ(x, q1..qn)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FixpointConnective {
    name: String,
    arity: usize,
    body: Formula,
    guarded: bool,
    class: DisjClass,
}

impl FixpointConnective {
    /// Checks the body (no `♯`, only `x` and `q1..qn`, positive in `x`) and
    /// caches the guardedness and disjunctiveness flags.
    pub fn new(name: impl Into<String>, arity: usize, body: Formula) -> Result<Self, SyntaxError> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(SyntaxError::BadConnective {
                name,
                reason: "names use letters, digits and underscores".into(),
            });
        }
        if !body.is_sharp_free() {
            return Err(SyntaxError::BadConnective {
                name,
                reason: "body may not contain fixpoint connectives".into(),
            });
        }
        let allowed: Vec<String> = std::iter::once(RECURSION_VAR.to_string())
            .chain((1..=arity).map(param_var))
            .collect();
        if let Some(v) = body.vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(SyntaxError::BadConnective {
                name,
                reason: format!("variable {v} is neither x nor a parameter q1..q{arity}"),
            });
        }
        if !body.is_positive_in(RECURSION_VAR) {
            return Err(SyntaxError::BadConnective {
                name,
                reason: "body is not positive in x".into(),
            });
        }
        let guarded = body.is_guarded_in(RECURSION_VAR);
        let class = disjunctive::classify_body(&body);
        Ok(FixpointConnective {
            name,
            arity,
            body,
            guarded,
            class,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn body(&self) -> &Formula {
        &self.body
    }

    pub fn is_guarded(&self) -> bool {
        self.guarded
    }

    pub fn class(&self) -> DisjClass {
        self.class
    }

    /// `χ(φ, θ1..θn)`: simultaneous substitution into the body.
    pub fn apply(&self, x: &Formula, args: &[Formula]) -> Formula {
        assert_eq!(args.len(), self.arity, "arity mismatch for {}", self.name);
        let mut map = BTreeMap::new();
        map.insert(RECURSION_VAR.to_string(), x.clone());
        for (i, a) in args.iter().enumerate() {
            map.insert(param_var(i + 1), a.clone());
        }
        self.body.substitute(&map)
    }
}

/// Result of [`is_guarded`] on a connective; kept as a free function to
/// mirror the other classifiers.
pub fn is_guarded(chi: &FixpointConnective) -> bool {
    chi.is_guarded()
}

pub fn classify_disjunctive(chi: &FixpointConnective) -> DisjClass {
    chi.class()
}

/// One entry of a connective definitions file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveDef {
    pub name: String,
    pub arity: usize,
    pub body: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DefsFile {
    One(ConnectiveDef),
    Many(Vec<ConnectiveDef>),
}

/// Named connectives available to the parser.
#[derive(Clone, Debug, Default)]
pub struct ConnectiveTable {
    map: BTreeMap<String, Arc<FixpointConnective>>,
}

impl ConnectiveTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, chi: FixpointConnective) -> Arc<FixpointConnective> {
        let arc = Arc::new(chi);
        self.map.insert(arc.name().to_string(), arc.clone());
        arc
    }

    /// Parses `body` (over `x, q1..qn`) and registers the connective.
    pub fn define(&mut self, name: &str, arity: usize, body: &str) -> Result<Arc<FixpointConnective>, SyntaxError> {
        let body = parse(body, &ConnectiveTable::new())?;
        Ok(self.insert(FixpointConnective::new(name, arity, body)?))
    }

    pub fn get(&self, name: &str) -> Option<&Arc<FixpointConnective>> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<FixpointConnective>> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Reads a definitions file: a single object or an array of objects with
    /// `name`, `arity` and `body`.
    pub fn from_json(text: &str) -> Result<Self, SyntaxError> {
        let file: DefsFile = serde_json::from_str(text).map_err(|e| SyntaxError::Defs(e.to_string()))?;
        let defs = match file {
            DefsFile::One(d) => vec![d],
            DefsFile::Many(v) => v,
        };
        let mut table = ConnectiveTable::new();
        for d in defs {
            table.define(&d.name, d.arity, &d.body)?;
        }
        Ok(table)
    }

    pub fn to_defs(&self) -> Vec<ConnectiveDef> {
        self.map
            .values()
            .map(|c| ConnectiveDef {
                name: c.name().to_string(),
                arity: c.arity(),
                body: c.body().to_string(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conn(body: &str, arity: usize) -> FixpointConnective {
        FixpointConnective::new("c", arity, parse(body, &ConnectiveTable::new()).unwrap()).unwrap()
    }

    #[test]
    fn guardedness_examples() {
        assert!(conn("q1 | <F>x", 1).is_guarded());
        assert!(!conn("x", 0).is_guarded());
        assert!(!conn("(x & q1) | <F>x", 1).is_guarded());
    }

    #[test]
    fn rejects_negative_and_foreign_vars() {
        let t = ConnectiveTable::new();
        assert!(FixpointConnective::new("c", 1, parse("~x | q1", &t).unwrap()).is_err());
        assert!(FixpointConnective::new("c", 1, parse("x | q2", &t).unwrap()).is_err());
    }

    #[test]
    fn defs_file_forms() {
        let one = ConnectiveTable::from_json(r#"{"name":"eu","arity":2,"body":"q2 | (q1 & <F>x)"}"#).unwrap();
        assert_eq!(one.get("eu").unwrap().arity(), 2);
        let many = ConnectiveTable::from_json(
            r#"[{"name":"a","arity":1,"body":"[F]x | q1"},{"name":"b","arity":1,"body":"[B]x | q1"}]"#,
        )
        .unwrap();
        assert_eq!(many.get("a").unwrap().class(), DisjClass::Forward);
        assert_eq!(many.get("b").unwrap().class(), DisjClass::Backward);
    }

    #[test]
    fn apply_substitutes_simultaneously() {
        let c = conn("q1 | <F>x", 1);
        let got = c.apply(&Formula::var("q1"), &[Formula::var("p")]);
        assert_eq!(got, Formula::or(Formula::var("p"), Formula::dia_f(Formula::var("q1"))));
    }
}
