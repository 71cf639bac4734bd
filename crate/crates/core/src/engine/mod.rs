//! Set-semantics evaluation of rules and programs.

mod eval;
mod join;
mod relation;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use eval::{aggregate, eval_body, eval_program, eval_rule, head_from_bindings};
pub use join::{join_all, Bindings, JoinInput};
pub use relation::{fmt_row, semijoin, RelationInstance, Row};

use crate::catalog::Catalog;
use crate::error::{Error, Result};

/// Relation instances by name. Instances are shared, so cloning a database
/// or overriding one relation is cheap.
#[derive(Debug, Clone, Default)]
pub struct Database {
    catalog: Catalog,
    relations: BTreeMap<String, Arc<RelationInstance>>,
}

impl Database {
    pub fn new(catalog: Catalog) -> Database {
        Database {
            catalog,
            relations: BTreeMap::new(),
        }
    }

    /// Adds a base instance after checking it against its catalog entry:
    /// attribute names in order, value kinds, key and declared FDs.
    pub fn insert(&mut self, rel: RelationInstance) -> Result<()> {
        let entry = self.catalog.require(rel.name())?;
        if rel.attributes() != entry.attribute_names().as_slice() {
            return Err(Error::Schema(format!(
                "`{}` has attributes ({}), catalog says ({})",
                rel.name(),
                rel.attributes().join(", "),
                entry.attribute_names().join(", ")
            )));
        }
        for row in rel.rows() {
            for (v, a) in row.iter().zip(&entry.attributes) {
                if v.kind() != a.kind {
                    return Err(Error::Schema(format!(
                        "`{}`.{} expects {}, got {} value `{v}`",
                        rel.name(),
                        a.name,
                        a.kind,
                        v.kind()
                    )));
                }
            }
        }
        if let Some(key) = &entry.key {
            rel.check_key(key)?;
        }
        for fd in &entry.fds {
            rel.check_fd(&fd.determinant, &fd.dependent)?;
        }
        self.relations.insert(rel.name().to_string(), Arc::new(rel));
        Ok(())
    }

    /// Stores an instance without validation (derived relations).
    pub fn put(&mut self, rel: RelationInstance) {
        self.relations.insert(rel.name().to_string(), Arc::new(rel));
    }

    pub fn put_shared(&mut self, rel: Arc<RelationInstance>) {
        self.relations.insert(rel.name().to_string(), rel);
    }

    pub fn get(&self, name: &str) -> Option<&RelationInstance> {
        self.relations.get(name).map(|r| r.as_ref())
    }

    pub fn get_shared(&self, name: &str) -> Option<Arc<RelationInstance>> {
        self.relations.get(name).cloned()
    }

    pub fn require(&self, name: &str) -> Result<&RelationInstance> {
        self.get(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationInstance> {
        self.relations.values().map(|r| r.as_ref())
    }

    /// A copy in which `rel` replaces the instance of the same name.
    pub fn with_relation(&self, rel: RelationInstance) -> Database {
        let mut db = self.clone();
        db.put(rel);
        db
    }

    pub fn with_catalog(&self, catalog: Catalog) -> Database {
        Database {
            catalog,
            relations: self.relations.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogEntry;
    use crate::ir::parse_program;
    use crate::value::Value;
    use crate::value::ValueKind::{Int, Text};

    fn t(s: &str) -> Value {
        Value::text(s)
    }

    fn table1() -> Database {
        let c = Catalog::from_entries([
            CatalogEntry::base("Customers", &[("c_key", Text), ("c_name", Text), ("c_address", Text)])
                .with_key(&["c_key"]),
            CatalogEntry::base("Orders", &[("o_key", Text), ("c_key", Text), ("o_date", Text)])
                .with_key(&["o_key"]),
            CatalogEntry::base("Lineitem", &[("o_key", Text), ("linenum", Text), ("qty", Int)])
                .with_key(&["o_key", "linenum"]),
            CatalogEntry::base("T", &[("A", Int)]),
        ])
        .unwrap();
        let mut db = Database::new(c);
        db.insert(
            RelationInstance::from_rows(
                "Customers",
                ["c_key", "c_name", "c_address"],
                [vec![t("c1"), t("n1"), t("a1")]],
            )
            .unwrap(),
        )
        .unwrap();
        db.insert(
            RelationInstance::from_rows(
                "Orders",
                ["o_key", "c_key", "o_date"],
                [vec![t("o1"), t("c1"), t("d1")], vec![t("o2"), t("c1"), t("d2")]],
            )
            .unwrap(),
        )
        .unwrap();
        let li = [("o1", "l1", 200), ("o1", "l2", 150), ("o2", "l1", 100), ("o2", "l2", 160)];
        db.insert(
            RelationInstance::from_rows(
                "Lineitem",
                ["o_key", "linenum", "qty"],
                li.iter().map(|(o, l, q)| vec![t(o), t(l), Value::Int(*q)]),
            )
            .unwrap(),
        )
        .unwrap();
        db.insert(RelationInstance::new("T", ["A"])).unwrap();
        db
    }

    const Q18: &str = "Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.\n\
        R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :- \
        Customers, Orders, Lineitem@1, Q18_tmp, t_sum_qty > 300.";

    #[test]
    fn q18_over_table1() {
        let db = table1();
        let p = parse_program(Q18, db.catalog()).unwrap();
        let out = eval_program(&p, &db).unwrap();
        let tmp = out.require("Q18_tmp").unwrap();
        assert_eq!(tmp.len(), 2);
        assert!(tmp.contains(&[t("o1"), Value::Int(350)]));
        assert!(tmp.contains(&[t("o2"), Value::Int(260)]));
        let r = out.require("R").unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.contains(&[t("n1"), t("c1"), t("o1"), t("d1"), Value::Int(350)]));
    }

    #[test]
    fn join_order_does_not_matter() {
        let db = table1();
        let a = parse_program(Q18, db.catalog()).unwrap();
        let b = parse_program(
            "Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.\n\
             R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :- \
             Q18_tmp, t_sum_qty > 300, Lineitem@1, Orders, Customers.",
            db.catalog(),
        )
        .unwrap();
        let ra = eval_program(&a, &db).unwrap();
        let rb = eval_program(&b, &db).unwrap();
        assert_eq!(ra.require("R").unwrap(), rb.require("R").unwrap());
    }

    #[test]
    fn empty_input_and_bad_inserts() {
        let db = table1();
        let p = parse_program("R(A) :- T(A).", db.catalog()).unwrap();
        assert!(eval_program(&p, &db).unwrap().require("R").unwrap().is_empty());
        let mut db2 = db.clone();
        let dup = RelationInstance::from_rows(
            "Orders",
            ["o_key", "c_key", "o_date"],
            [vec![t("o1"), t("c1"), t("d1")], vec![t("o1"), t("c2"), t("d1")]],
        )
        .unwrap();
        assert!(db2.insert(dup).is_err());
        let wrong_kind = RelationInstance::from_rows("T", ["A"], [vec![t("x")]]).unwrap();
        assert!(db2.insert(wrong_kind).is_err());
    }

    #[test]
    fn sum_over_text_is_rejected() {
        let db = table1();
        let p = parse_program("R(o_key, sum(o_date) as s) :- Orders.", db.catalog()).unwrap();
        assert!(eval_program(&p, &db).is_err());
    }
}
