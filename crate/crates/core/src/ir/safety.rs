use std::collections::BTreeSet;

use super::ast::{HeadColumn, Rule};
use crate::catalog::Catalog;
use crate::error::{Error, Result};

/// Head and predicate attributes that no body atom exposes, in first-use order.
pub fn unsafe_attributes(rule: &Rule, catalog: &Catalog) -> Result<Vec<String>> {
    let mut exposed = BTreeSet::new();
    for atom in &rule.atoms {
        let entry = catalog.require(&atom.relation)?;
        for (src, exp) in &atom.columns {
            if !entry.has_attribute(src) {
                return Err(Error::UnknownAttribute {
                    relation: atom.relation.clone(),
                    attribute: src.clone(),
                });
            }
            exposed.insert(exp.as_str());
        }
    }
    let mut missing: Vec<String> = Vec::new();
    let mut need = |a: &str| {
        if !exposed.contains(a) && !missing.iter().any(|m| m == a) {
            missing.push(a.to_string());
        }
    };
    for c in &rule.head_columns {
        match c {
            HeadColumn::Plain(a) => need(a),
            HeadColumn::Aggregate { input, .. } => need(input),
        }
    }
    for p in &rule.predicates {
        for a in p.attributes() {
            need(&a);
        }
    }
    Ok(missing)
}

pub fn check_safety(rule: &Rule, catalog: &Catalog) -> Result<()> {
    let missing = unsafe_attributes(rule, catalog)?;
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Unsafe {
            rule: rule.head.clone(),
            attributes: missing,
        })
    }
}
