//! Hand-sized databases and programs shared by tests, the harness and the CLI.

use std::collections::BTreeSet;

use crate::catalog::{Catalog, CatalogEntry};
use crate::engine::{Database, RelationInstance};
use crate::error::Result;
use crate::ir::{parse_program, OccurrenceId, Program};
use crate::value::Value;
use crate::value::ValueKind::{self, Int, Text};

use super::datagen::gen_minitpch;

pub const Q18: &str = "\
% simplified TPC-H Q18
Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.
R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :-
    Customers, Orders, Lineitem@1, Q18_tmp, t_sum_qty > 300.
";

pub const ILLUSTRATION_1: &str = "R(A, C) :- T1, T2, T3, T4, T5, T6.";

pub const ILLUSTRATION_2: &str = "\
R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :-
    Customers, Orders, Lineitem, Q18_tmp, t_sum_qty > 300.
";

pub fn tpch_catalog(date_kind: ValueKind) -> Catalog {
    Catalog::from_entries([
        CatalogEntry::base("Customers", &[("c_key", Text), ("c_name", Text), ("c_address", Text)])
            .with_key(&["c_key"]),
        CatalogEntry::base("Orders", &[("o_key", Text), ("c_key", Text), ("o_date", date_kind)])
            .with_key(&["o_key"]),
        CatalogEntry::base("Lineitem", &[("o_key", Text), ("linenum", Text), ("qty", Int)])
            .with_key(&["o_key", "linenum"]),
    ])
    .expect("static catalog")
}

fn t(s: &str) -> Value {
    Value::text(s)
}

fn load(db: &mut Database, name: &str, attrs: &[&str], rows: Vec<Vec<Value>>) -> Result<()> {
    db.insert(RelationInstance::from_rows(name, attrs.iter().copied(), rows)?)
}

/// The three running-example tables. Order dates are the opaque labels d1
/// and d2, so `o_date` is text here.
pub fn table1() -> Database {
    let mut db = Database::new(tpch_catalog(Text));
    load(&mut db, "Customers", &["c_key", "c_name", "c_address"], vec![vec![t("c1"), t("n1"), t("a1")]]).unwrap();
    load(
        &mut db,
        "Orders",
        &["o_key", "c_key", "o_date"],
        vec![vec![t("o1"), t("c1"), t("d1")], vec![t("o2"), t("c1"), t("d2")]],
    )
    .unwrap();
    let li = [("o1", "l1", 200), ("o1", "l2", 150), ("o2", "l1", 100), ("o2", "l2", 160)];
    load(
        &mut db,
        "Lineitem",
        &["o_key", "linenum", "qty"],
        li.iter().map(|(o, l, q)| vec![t(o), t(l), Value::Int(*q)]).collect(),
    )
    .unwrap();
    db
}

pub fn q18(db: &Database) -> Program {
    parse_program(Q18, db.catalog()).expect("fixture program")
}

/// The inner Lineitem occurrence of Q18.
pub fn inner_lineitem() -> OccurrenceId {
    OccurrenceId::new("Q18_tmp", "Lineitem2")
}

pub fn worked_plan() -> BTreeSet<OccurrenceId> {
    [inner_lineitem()].into()
}

pub fn illustration1_catalog() -> Catalog {
    Catalog::from_entries([
        CatalogEntry::base("T1", &[("A", Int), ("B", Int), ("C", Int), ("D", Int)]),
        CatalogEntry::base("T2", &[("B", Int)]),
        CatalogEntry::base("T3", &[("C", Int), ("Z", Int)]),
        CatalogEntry::base("T4", &[("D", Int), ("E", Int)]).with_fd(&["D"], "E"),
        CatalogEntry::base("T5", &[("E", Int), ("Y", Int)]),
        CatalogEntry::base("T6", &[("A", Int)]),
    ])
    .expect("static catalog")
}

pub fn illustration1() -> Database {
    let mut db = Database::new(illustration1_catalog());
    let ints = |rows: &[&[i64]]| -> Vec<Vec<Value>> {
        rows.iter().map(|r| r.iter().map(|&v| Value::Int(v)).collect()).collect()
    };
    load(&mut db, "T1", &["A", "B", "C", "D"], ints(&[&[1, 1, 1, 1], &[1, 2, 1, 2], &[2, 1, 2, 1], &[3, 3, 3, 3]])).unwrap();
    load(&mut db, "T2", &["B"], ints(&[&[1], &[2]])).unwrap();
    load(&mut db, "T3", &["C", "Z"], ints(&[&[1, 5], &[1, 6], &[2, 5], &[3, 5]])).unwrap();
    load(&mut db, "T4", &["D", "E"], ints(&[&[1, 10], &[2, 20], &[3, 30]])).unwrap();
    load(&mut db, "T5", &["E", "Y"], ints(&[&[10, 7], &[20, 8], &[10, 9]])).unwrap();
    load(&mut db, "T6", &["A"], ints(&[&[1], &[2], &[3]])).unwrap();
    db
}

/// Table 1 plus Q18_tmp stored as a keyed base table, for the single-rule form.
pub fn illustration2() -> Database {
    let base = table1();
    let mut catalog = base.catalog().clone();
    catalog
        .insert(CatalogEntry::base("Q18_tmp", &[("o_key", Text), ("t_sum_qty", Int)]).with_key(&["o_key"]))
        .unwrap();
    let mut db = Database::new(catalog);
    for r in base.relations() {
        db.insert(r.clone()).unwrap();
    }
    load(
        &mut db,
        "Q18_tmp",
        &["o_key", "t_sum_qty"],
        vec![vec![t("o1"), Value::Int(350)], vec![t("o2"), Value::Int(260)]],
    )
    .unwrap();
    db
}

/// Generated mini TPC-H data plus a keyless `Tag(o_key, tag)` table.
pub fn synthetic_db(seed: u64) -> Database {
    let gen = gen_minitpch(4, 8, 24, seed);
    let mut catalog = gen.catalog().clone();
    catalog
        .insert(CatalogEntry::base("Tag", &[("o_key", Text), ("tag", Text)]))
        .unwrap();
    let mut db = Database::new(catalog);
    for r in gen.relations() {
        db.insert(r.clone()).unwrap();
    }
    let orders = gen.require("Orders").unwrap();
    let mut tags = Vec::new();
    for (i, row) in orders.rows().iter().enumerate() {
        tags.push(vec![row[0].clone(), t(&format!("t{}", i % 3))]);
        if i % 2 == 0 {
            tags.push(vec![row[0].clone(), t("hot")]);
        }
    }
    load(&mut db, "Tag", &["o_key", "tag"], tags).unwrap();
    db
}

/// A named program with its data. `prunable` marks fixtures where the pruned
/// queries keep strictly fewer atoms than the full-body ones in total.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub program: &'static str,
    pub db: Database,
    pub prunable: bool,
    /// Occurrences whose keys are materialized, when the fixture pins a plan.
    pub plan: Option<BTreeSet<OccurrenceId>>,
}

impl Fixture {
    pub fn parse(&self) -> Result<Program> {
        parse_program(self.program, self.db.catalog())
    }
}

pub const SYNTHETIC: [(&str, &str, bool); 8] = [
    ("single_table", "R(c_key, c_name) :- Customers.", false),
    ("exposed_attrs_drop", "R(o_key, tag, o_date) :- Orders, Tag.", true),
    ("key_attrs_keep_target", "R(c_key, o_key) :- Customers, Orders.", true),
    (
        "predicate_drop",
        "V(o_key, sum(qty) as s) :- Lineitem.\nR(o_key, c_key) :- Orders, V, s > 100.",
        true,
    ),
    (
        "case2_three_level",
        "A1(o_key, linenum, qty) :- Lineitem, qty > 10.\n\
         A2(o_key, sum(qty) as tq) :- A1.\n\
         R(c_key, o_key, tq) :- Orders, A2.",
        true,
    ),
    ("keyless_chain", "R(tag) :- Tag, Orders.", false),
    (
        "self_join",
        "R(o_key, l1, l2) :- Lineitem@1(linenum as l1, qty as q1), Lineitem@2(linenum as l2, qty as q2), q1 < q2.",
        true,
    ),
    (
        "equality_constant",
        "R(o_key, c_name) :- Orders, Customers, c_key = 'c1'.",
        true,
    ),
];

/// Q18, both illustrations, the worked plan and the synthetic programs.
pub fn corpus() -> Vec<Fixture> {
    let mut out = vec![
        Fixture {
            name: "q18",
            program: Q18,
            db: table1(),
            prunable: true,
            plan: None,
        },
        Fixture {
            name: "illustration1",
            program: ILLUSTRATION_1,
            db: illustration1(),
            prunable: true,
            plan: None,
        },
        Fixture {
            name: "illustration2",
            program: ILLUSTRATION_2,
            db: illustration2(),
            prunable: true,
            plan: None,
        },
        Fixture {
            name: "worked_plan",
            program: Q18,
            db: table1(),
            prunable: true,
            plan: Some(worked_plan()),
        },
    ];
    let db = synthetic_db(11);
    for (name, program, prunable) in SYNTHETIC {
        out.push(Fixture {
            name,
            program,
            db: db.clone(),
            prunable,
            plan: None,
        });
    }
    out
}

/// Mini TPC-H at the given scale with generated ISO dates.
pub fn generated_q18(customers: usize, orders: usize, lineitems: usize, seed: u64) -> (Database, Program) {
    let db = gen_minitpch(customers, orders, lineitems, seed);
    let p = parse_program(Q18, db.catalog()).expect("fixture program");
    (db, p)
}
