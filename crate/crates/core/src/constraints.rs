//! Keys, functional dependencies and attribute closure.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, CatalogEntry};
use crate::ir::{CmpOp, Operand, Predicate, Rule, RuleKind, TableAtom};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FunctionalDependency {
    pub determinant: BTreeSet<String>,
    pub dependent: String,
}

impl FunctionalDependency {
    pub fn new<S: AsRef<str>>(lhs: impl IntoIterator<Item = S>, rhs: &str) -> FunctionalDependency {
        FunctionalDependency {
            determinant: lhs.into_iter().map(|s| s.as_ref().to_string()).collect(),
            dependent: rhs.to_string(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.determinant.contains(&self.dependent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyFact {
    pub relation: String,
    pub key: BTreeSet<String>,
}

/// Group-by columns of an SPJA rule form a key of its head; SPJ rules get none.
pub fn infer_view_key(rule: &Rule) -> Option<KeyFact> {
    match rule.kind() {
        RuleKind::Spja => Some(KeyFact {
            relation: rule.head.clone(),
            key: rule.plain_columns().into_iter().collect(),
        }),
        RuleKind::Spj => None,
    }
}

/// FDs contributed by one atom, over its exposed names: the key determines
/// every exposed attribute, declared FDs are renamed.
pub fn atom_fds(
    atom: &TableAtom,
    key: Option<&BTreeSet<String>>,
    declared: &[FunctionalDependency],
) -> Vec<FunctionalDependency> {
    let rename = |s: &str| atom.exposed_name(s).unwrap_or(s).to_string();
    let mut out = Vec::new();
    if let Some(key) = key {
        let lhs: BTreeSet<String> = key.iter().map(|k| rename(k)).collect();
        for (_, exp) in &atom.columns {
            out.push(FunctionalDependency {
                determinant: lhs.clone(),
                dependent: exp.clone(),
            });
        }
    }
    for fd in declared {
        out.push(FunctionalDependency {
            determinant: fd.determinant.iter().map(|a| rename(a)).collect(),
            dependent: rename(&fd.dependent),
        });
    }
    out.retain(|fd| !fd.is_trivial());
    out
}

/// `a = b` yields a→b and b→a; `a = c` for a constant yields ∅→a.
pub fn predicate_fds(pred: &Predicate) -> Vec<FunctionalDependency> {
    if pred.op != CmpOp::Eq {
        return Vec::new();
    }
    let none: [&str; 0] = [];
    match (&pred.left, &pred.right) {
        (Operand::Attr(a), Operand::Attr(b)) if a != b => vec![
            FunctionalDependency::new([a], b),
            FunctionalDependency::new([b], a),
        ],
        (Operand::Attr(a), Operand::Const(_)) | (Operand::Const(_), Operand::Attr(a)) => {
            vec![FunctionalDependency::new(none, a)]
        }
        _ => Vec::new(),
    }
}

fn entry_key<'a>(entry: &'a CatalogEntry, view_keys: &'a [KeyFact]) -> Option<&'a BTreeSet<String>> {
    view_keys
        .iter()
        .find(|k| k.relation == entry.name)
        .map(|k| &k.key)
        .or(entry.key.as_ref())
}

/// FDs over a rule body's exposed names: atom keys (catalog keys, or
/// `view_keys` for views), declared FDs, and equality predicates.
pub fn derive_body_fds(rule: &Rule, catalog: &Catalog, view_keys: &[KeyFact]) -> Vec<FunctionalDependency> {
    let mut out = Vec::new();
    for atom in &rule.atoms {
        if let Some(entry) = catalog.get(&atom.relation) {
            out.extend(atom_fds(atom, entry_key(entry, view_keys), &entry.fds));
        }
    }
    for p in &rule.predicates {
        out.extend(predicate_fds(p));
    }
    out.sort();
    out.dedup();
    out
}

pub fn closure(attrs: &BTreeSet<String>, fds: &[FunctionalDependency]) -> BTreeSet<String> {
    let mut out = attrs.clone();
    loop {
        let before = out.len();
        for fd in fds {
            if !out.contains(&fd.dependent) && fd.determinant.is_subset(&out) {
                out.insert(fd.dependent.clone());
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

pub fn holds_fd(lhs: &BTreeSet<String>, c: &str, fds: &[FunctionalDependency]) -> bool {
    lhs.contains(c) || closure(lhs, fds).contains(c)
}
