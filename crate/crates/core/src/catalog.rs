//! Relation schemas: attribute names and kinds, keys, declared dependencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constraints::FunctionalDependency;
use crate::error::{Error, Result};
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Base,
    View,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub key: Option<BTreeSet<String>>,
    #[serde(default)]
    pub fds: Vec<FunctionalDependency>,
    pub kind: RelationKind,
}

impl CatalogEntry {
    pub fn base(name: &str, attributes: &[(&str, ValueKind)]) -> CatalogEntry {
        CatalogEntry {
            name: name.to_string(),
            attributes: attributes
                .iter()
                .map(|(n, k)| Attribute {
                    name: n.to_string(),
                    kind: *k,
                })
                .collect(),
            key: None,
            fds: Vec::new(),
            kind: RelationKind::Base,
        }
    }

    pub fn with_key(mut self, key: &[&str]) -> CatalogEntry {
        self.key = Some(key.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_fd(mut self, lhs: &[&str], rhs: &str) -> CatalogEntry {
        self.fds.push(FunctionalDependency::new(lhs.iter().copied(), rhs));
        self
    }

    pub fn attribute_names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn has_attribute(&self, name: &str) -> bool {
        self.attributes.iter().any(|a| a.name == name)
    }

    pub fn kind_of(&self, name: &str) -> Option<ValueKind> {
        self.attributes.iter().find(|a| a.name == name).map(|a| a.kind)
    }

    /// Checks attribute uniqueness and that key and FD attributes exist.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for a in &self.attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!(
                    "attribute `{}` repeated in `{}`",
                    a.name, self.name
                )));
            }
        }
        let unknown = |attr: &str| Error::UnknownAttribute {
            relation: self.name.clone(),
            attribute: attr.to_string(),
        };
        if let Some(key) = &self.key {
            if let Some(a) = key.iter().find(|a| !seen.contains(a.as_str())) {
                return Err(unknown(a));
            }
        }
        for fd in &self.fds {
            for a in fd.determinant.iter().chain(std::iter::once(&fd.dependent)) {
                if !seen.contains(a.as_str()) {
                    return Err(unknown(a));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    entries: BTreeMap<String, CatalogEntry>,
}

impl Catalog {
    pub fn new() -> Catalog {
        Catalog::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = CatalogEntry>) -> Result<Catalog> {
        let mut c = Catalog::new();
        for e in entries {
            c.insert(e)?;
        }
        Ok(c)
    }

    pub fn insert(&mut self, entry: CatalogEntry) -> Result<()> {
        entry.validate()?;
        self.entries.insert(entry.name.clone(), entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&CatalogEntry> {
        self.get(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.values()
    }

    /// Parses the sidecar catalog format, one relation per line:
    /// `Name; a:text, b:int; key: a, b; fd: a -> b`.
    pub fn parse(text: &str) -> Result<Catalog> {
        let mut catalog = Catalog::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Dataset(format!("catalog line {}: {m}", lineno + 1));
            let mut parts = line.split(';').map(str::trim);
            let name = parts.next().filter(|s| !s.is_empty()).ok_or_else(|| err("missing name"))?;
            let attrs = parts.next().ok_or_else(|| err("missing attribute list"))?;
            let mut attributes = Vec::new();
            for spec in attrs.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (n, k) = spec
                    .split_once(':')
                    .ok_or_else(|| err("attribute must be written name:kind"))?;
                let kind = ValueKind::parse(k).ok_or_else(|| err(&format!("unknown kind `{}`", k.trim())))?;
                attributes.push(Attribute {
                    name: n.trim().to_string(),
                    kind,
                });
            }
            let mut entry = CatalogEntry {
                name: name.to_string(),
                attributes,
                key: None,
                fds: Vec::new(),
                kind: RelationKind::Base,
            };
            for clause in parts.filter(|s| !s.is_empty()) {
                let (tag, body) = clause
                    .split_once(':')
                    .ok_or_else(|| err("clause must start with `key:` or `fd:`"))?;
                match tag.trim() {
                    "key" => {
                        entry.key = Some(split_names(body).collect());
                    }
                    "fd" => {
                        let (lhs, rhs) = body.split_once("->").ok_or_else(|| err("fd needs `->`"))?;
                        for r in split_names(rhs) {
                            entry.fds.push(FunctionalDependency::new(split_names(lhs), &r));
                        }
                    }
                    other => return Err(err(&format!("unknown clause `{other}`"))),
                }
            }
            catalog.insert(entry)?;
        }
        Ok(catalog)
    }
}

fn split_names(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.entries.values().filter(|e| e.kind == RelationKind::Base) {
            let attrs: Vec<String> = e
                .attributes
                .iter()
                .map(|a| format!("{}:{}", a.name, a.kind))
                .collect();
            write!(f, "{}; {}", e.name, attrs.join(", "))?;
            if let Some(k) = &e.key {
                let k: Vec<&str> = k.iter().map(String::as_str).collect();
                write!(f, "; key: {}", k.join(", "))?;
            }
            for fd in &e.fds {
                let l: Vec<&str> = fd.determinant.iter().map(String::as_str).collect();
                write!(f, "; fd: {} -> {}", l.join(", "), fd.dependent)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
