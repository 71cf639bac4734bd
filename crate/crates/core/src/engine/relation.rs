use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::value::Value;

pub type Row = Vec<Value>;

/// A named set of rows over an ordered attribute list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    name: String,
    attributes: Vec<String>,
    rows: BTreeSet<Row>,
}

impl RelationInstance {
    pub fn new<S: Into<String>>(name: impl Into<String>, attributes: impl IntoIterator<Item = S>) -> Self {
        RelationInstance {
            name: name.into(),
            attributes: attributes.into_iter().map(Into::into).collect(),
            rows: BTreeSet::new(),
        }
    }

    pub fn empty_like(entry: &CatalogEntry) -> Self {
        RelationInstance::new(&entry.name, entry.attribute_names())
    }

    pub fn from_rows<S: Into<String>>(
        name: impl Into<String>,
        attributes: impl IntoIterator<Item = S>,
        rows: impl IntoIterator<Item = Row>,
    ) -> Result<Self> {
        let mut r = RelationInstance::new(name, attributes);
        for row in rows {
            r.insert(row)?;
        }
        Ok(r)
    }

    /// Inserts a row; returns false if it was already present.
    pub fn insert(&mut self, row: Row) -> Result<bool> {
        if row.len() != self.attributes.len() {
            return Err(Error::Schema(format!(
                "`{}` expects {} values, got {}",
                self.name,
                self.attributes.len(),
                row.len()
            )));
        }
        Ok(self.rows.insert(row))
    }

    pub(crate) fn insert_unchecked(&mut self, row: Row) {
        debug_assert_eq!(row.len(), self.attributes.len());
        self.rows.insert(row);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn rows(&self) -> &BTreeSet<Row> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &[Value]) -> bool {
        self.rows.contains(row)
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == attr)
    }

    pub fn positions(&self, attrs: &[String]) -> Result<Vec<usize>> {
        attrs
            .iter()
            .map(|a| {
                self.position(a).ok_or_else(|| Error::UnknownAttribute {
                    relation: self.name.clone(),
                    attribute: a.clone(),
                })
            })
            .collect()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Projection with duplicate elimination.
    pub fn project(&self, attrs: &[String]) -> Result<RelationInstance> {
        let pos = self.positions(attrs)?;
        let mut out = RelationInstance::new(&self.name, attrs.iter().cloned());
        for row in &self.rows {
            out.rows.insert(pos.iter().map(|&p| row[p].clone()).collect());
        }
        Ok(out)
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> RelationInstance {
        RelationInstance {
            name: self.name.clone(),
            attributes: self
                .attributes
                .iter()
                .map(|a| map.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect(),
            rows: self.rows.clone(),
        }
    }

    /// Same attributes (in any order) and every row present in `other`.
    pub fn is_subset_of(&self, other: &RelationInstance) -> bool {
        let Ok(pos) = other.positions(&self.attributes) else {
            return false;
        };
        if self.attributes.len() != other.attributes.len() {
            return false;
        }
        let other_rows: HashSet<Row> = other
            .rows
            .iter()
            .map(|r| pos.iter().map(|&p| r[p].clone()).collect())
            .collect();
        self.rows.iter().all(|r| other_rows.contains(r))
    }

    /// Set equality up to attribute order.
    pub fn same_rows(&self, other: &RelationInstance) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// Fails if two rows agree on `key`.
    pub fn check_key(&self, key: &BTreeSet<String>) -> Result<()> {
        let key: Vec<String> = key.iter().cloned().collect();
        let pos = self.positions(&key)?;
        let mut seen: HashMap<Vec<&Value>, &Row> = HashMap::new();
        for row in &self.rows {
            let k: Vec<&Value> = pos.iter().map(|&p| &row[p]).collect();
            if let Some(prev) = seen.insert(k, row) {
                return Err(Error::ConstraintViolation {
                    relation: self.name.clone(),
                    constraint: format!("key ({})", key.join(", ")),
                    detail: format!("{} and {}", fmt_row(prev), fmt_row(row)),
                });
            }
        }
        Ok(())
    }

    pub fn check_fd(&self, lhs: &BTreeSet<String>, rhs: &str) -> Result<()> {
        let lhs_v: Vec<String> = lhs.iter().cloned().collect();
        let pos = self.positions(&lhs_v)?;
        let r = self.positions(&[rhs.to_string()])?[0];
        let mut seen: HashMap<Vec<&Value>, &Value> = HashMap::new();
        for row in &self.rows {
            let k: Vec<&Value> = pos.iter().map(|&p| &row[p]).collect();
            if let Some(prev) = seen.insert(k, &row[r]) {
                if *prev != row[r] {
                    return Err(Error::ConstraintViolation {
                        relation: self.name.clone(),
                        constraint: format!("{} -> {rhs}", lhs_v.join(", ")),
                        detail: fmt_row(row),
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn fmt_row(row: &[Value]) -> String {
    let parts: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for RelationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}({})", self.name, self.attributes.join(", "))?;
        for row in &self.rows {
            writeln!(f, "  {}", fmt_row(row))?;
        }
        Ok(())
    }
}

/// Rows of `rel` that agree with some row of `probe` on all shared
/// attributes. With nothing shared, a non-empty probe keeps every row.
pub fn semijoin(rel: &RelationInstance, probe: &RelationInstance) -> RelationInstance {
    let shared: Vec<String> = rel
        .attributes
        .iter()
        .filter(|a| probe.position(a).is_some())
        .cloned()
        .collect();
    let mut out = RelationInstance::new(&rel.name, rel.attributes.iter().cloned());
    if probe.is_empty() {
        return out;
    }
    let rp = rel.positions(&shared).expect("shared attributes exist");
    let pp = probe.positions(&shared).expect("shared attributes exist");
    let keys: HashSet<Vec<&Value>> = probe
        .rows
        .iter()
        .map(|r| pp.iter().map(|&p| &r[p]).collect())
        .collect();
    for row in &rel.rows {
        let k: Vec<&Value> = rp.iter().map(|&p| &row[p]).collect();
        if keys.contains(&k) {
            out.rows.insert(row.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(name: &str, attrs: &[&str], rows: &[&[i64]]) -> RelationInstance {
        RelationInstance::from_rows(
            name,
            attrs.iter().copied(),
            rows.iter().map(|r| r.iter().map(|&v| Value::Int(v)).collect()),
        )
        .unwrap()
    }

    #[test]
    fn semijoin_cases() {
        let r = rel("r", &["a", "b"], &[&[1, 2], &[2, 3]]);
        let p = rel("p", &["b", "c"], &[&[2, 9]]);
        assert_eq!(semijoin(&r, &p).len(), 1);
        assert_eq!(semijoin(&r, &r), r);
        let empty = RelationInstance::new("e", ["b"]);
        assert!(semijoin(&r, &empty).is_empty());
        let unrelated = rel("u", &["z"], &[&[0]]);
        assert_eq!(semijoin(&r, &unrelated).len(), 2);
    }

    #[test]
    fn keys_and_fds() {
        let r = rel("r", &["a", "b"], &[&[1, 2], &[1, 3]]);
        let key: BTreeSet<String> = ["a".to_string()].into();
        assert!(r.check_key(&key).is_err());
        assert!(r.check_fd(&key, "b").is_err());
        let ok = rel("r", &["a", "b"], &[&[1, 2], &[2, 2]]);
        assert!(ok.check_key(&key).is_ok());
        assert!(ok.project(&["b".into()]).unwrap().len() == 1);
        assert!(r.insert_row_arity_checked());
    }

    impl RelationInstance {
        fn insert_row_arity_checked(&self) -> bool {
            let mut c = self.clone();
            c.insert(vec![Value::Int(1)]).is_err()
        }
    }

    #[test]
    fn subset_ignores_column_order() {
        let a = rel("a", &["x", "y"], &[&[1, 2]]);
        let b = rel("b", &["y", "x"], &[&[2, 1], &[5, 5]]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(!a.same_rows(&b));
    }
}
