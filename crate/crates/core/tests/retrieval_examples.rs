mod common;

use std::collections::BTreeSet;

use provex::bench::{illustration1, inner_lineitem, q18, table1, worked_plan, ILLUSTRATION_1};
use provex::catalog::{Catalog, CatalogEntry};
use provex::engine::{eval_program, Database, RelationInstance};
use provex::error::Error;
use provex::hybrid::{
    answer_from_rk, build_plan, eager_provenance, hybrid_retrieval, keyed_occurrences, materialize, o2_provenance,
    qualified, rk_restrict, select_plan, EagerStore, Objective, PlanOptions, RowCount, RK_NAME,
};
use provex::ir::{parse_program, OccurrenceId};
use provex::provgen::{
    baseline_retrieval, naive_provenance, optimized_retrieval, provenance, retrieval_chain, Selection, Strategy,
};
use provex::value::{Value, ValueKind::Int};

use common::rows_in;

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn occ(rule: &str, label: &str) -> OccurrenceId {
    OccurrenceId::new(rule, label)
}

fn q18_evaluated() -> (Database, provex::ir::Program, Database) {
    let db = table1();
    let p = q18(&db);
    let ev = eval_program(&p, &db).unwrap();
    (db, p, ev)
}

#[test]
fn baseline_bodies_keep_everything() {
    let (_, p, _) = q18_evaluated();
    let w = baseline_retrieval(&p, &occ("R", "Customers")).unwrap();
    assert_eq!(w.canonical_body(), strs(&["R'", "Customers", "Lineitem1", "Orders", "Q18_tmp"]));
    assert_eq!(w.retained_predicates.len(), 1);
    assert_eq!(w.join_count(), 4);

    let c = Catalog::from_entries([CatalogEntry::base("T", &[("A", Int)])]).unwrap();
    let single = parse_program("R(A) :- T(A).", &c).unwrap();
    assert_eq!(baseline_retrieval(&single, &occ("R", "T")).unwrap().canonical_body(), strs(&["R'", "T"]));

    let db1 = illustration1();
    let p1 = parse_program(ILLUSTRATION_1, db1.catalog()).unwrap();
    assert_eq!(baseline_retrieval(&p1, &occ("R", "T3")).unwrap().join_count(), 6);
}

#[test]
fn optimized_bodies_and_join_counts() {
    let (_, p, _) = q18_evaluated();
    let q = optimized_retrieval(&p, &occ("R", "Q18_tmp")).unwrap();
    assert_eq!(q.canonical_body(), strs(&["R'", "Q18_tmp"]));
    assert!(q.retained_predicates.is_empty());
    assert_eq!(optimized_retrieval(&p, &occ("R", "Customers")).unwrap().join_count(), 1);
    // Inner Lineitem: R' -> PQ18_tmp, then PQ18_tmp -> Lineitem.
    let chain = retrieval_chain(&p, &inner_lineitem(), true).unwrap();
    assert_eq!(chain.steps.len(), 2);
    assert_eq!(chain.steps[1].canonical_body(), strs(&["PQ18_tmp", "Lineitem2"]));

    let db1 = illustration1();
    let p1 = parse_program(ILLUSTRATION_1, db1.catalog()).unwrap();
    let t6 = optimized_retrieval(&p1, &occ("R", "T6")).unwrap();
    assert_eq!(t6.join_count(), 0);
    assert!(!t6.joins_target());
}

#[test]
fn optimized_queries_agree_on_illustration_data() {
    let db = illustration1();
    let p = parse_program(ILLUSTRATION_1, db.catalog()).unwrap();
    let ev = eval_program(&p, &db).unwrap();
    let r = ev.require("R").unwrap();
    assert!(!r.is_empty());
    let sel = Selection::all(r);
    for o in p.base_occurrences() {
        let want = naive_provenance(&p, &o, sel.instance(), &ev).unwrap();
        for s in [Strategy::W, Strategy::O1] {
            let (got, _) = provenance(&p, &o, &sel, s, &ev).unwrap();
            assert!(got.same_rows(&want), "{s} {o}");
        }
    }
}

#[test]
fn naive_examples_and_selection_membership() {
    let (_, p, ev) = q18_evaluated();
    let r = ev.require("R").unwrap();
    let got = naive_provenance(&p, &occ("R", "Orders"), r, &ev).unwrap();
    assert_eq!(
        rows_in(&got, &strs(&["o_key", "c_key", "o_date"])),
        [vec![Value::text("o1"), Value::text("c1"), Value::text("d1")]].into()
    );
    let empty = Selection::empty(r);
    assert!(naive_provenance(&p, &occ("R", "Orders"), empty.instance(), &ev).unwrap().is_empty());
    for s in [Strategy::W, Strategy::O1] {
        assert!(provenance(&p, &inner_lineitem(), &empty, s, &ev).unwrap().0.is_empty());
    }

    let mut fake = RelationInstance::new("R", r.attributes().to_vec());
    fake.insert(vec![
        Value::text("n9"),
        Value::text("c9"),
        Value::text("o9"),
        Value::text("d9"),
        Value::Int(1),
    ])
    .unwrap();
    assert!(matches!(
        naive_provenance(&p, &occ("R", "Orders"), &fake, &ev),
        Err(Error::NotInResult { .. })
    ));
    assert!(matches!(Selection::new(r, fake.rows().iter().cloned()), Err(Error::NotInResult { .. })));
    assert!(matches!(
        optimized_retrieval(&p, &occ("R", "Nope")),
        Err(Error::UnknownOccurrence(_))
    ));
}

#[test]
fn plan_shapes() {
    let (_, p, ev) = q18_evaluated();
    let a_r = p.final_rule().head_attributes();

    let worked = build_plan(&p, &worked_plan()).unwrap();
    let mut want = a_r.clone();
    want.push("linenum2".into());
    assert_eq!(worked.rk_schema, want);
    assert_eq!(worked.rk_rule.head, RK_NAME);
    assert_eq!(worked.vk_rules.len(), 1);
    assert_eq!(worked.vk_rules[0].head, "Q18_tmpK");
    // RK reduces to R joined with Q18_tmpK.
    assert_eq!(worked.rk_rule.source.relation, "R");
    let rk_body: Vec<&str> = worked.rk_rule.atoms.iter().map(|a| a.relation.as_str()).collect();
    assert_eq!(rk_body, ["Q18_tmpK"]);
    assert_eq!(worked.rk_rule.join_count(), 1);

    let none = build_plan(&p, &BTreeSet::new()).unwrap();
    assert_eq!(none.rk_schema, a_r);
    let rk = materialize(&none, &ev).unwrap();
    assert!(rk.same_rows(ev.require("R").unwrap()));
    assert!(answer_from_rk(&p, &rk).unwrap().same_rows(&rk));

    let customers = build_plan(&p, &[occ("R", "Customers")].into()).unwrap();
    assert_eq!(customers.rk_schema, a_r);

    assert!(build_plan(&p, &[occ("R", "Q18_tmp")].into()).is_err());
    assert_eq!(keyed_occurrences(&p).len(), 4);
}

#[test]
fn materialization_is_idempotent_and_restricts() {
    let (_, p, ev) = q18_evaluated();
    let plan = build_plan(&p, &worked_plan()).unwrap();
    let a = materialize(&plan, &ev).unwrap();
    let b = materialize(&plan, &ev).unwrap();
    assert_eq!(a.rows(), b.rows());
    let r = ev.require("R").unwrap();
    assert_eq!(rk_restrict(r, &a).len(), 2);
    assert!(rk_restrict(&Selection::empty(r).instance().clone(), &a).is_empty());
    assert!(rk_restrict(r, &a).same_rows(&a));
}

#[test]
fn hybrid_cases() {
    let (_, p, ev) = q18_evaluated();
    let plan = build_plan(&p, &worked_plan()).unwrap();
    let rk = materialize(&plan, &ev).unwrap();
    let sel = Selection::all(ev.require("R").unwrap());

    let (rows, stats) = o2_provenance(&p, &plan, &rk, &inner_lineitem(), &sel, &ev).unwrap();
    assert_eq!((stats.case, stats.join_count), (Some(1), 1));
    assert_eq!(rows.len(), 2);
    let (chain, case) = hybrid_retrieval(&p, &plan, &occ("R", "Orders")).unwrap();
    assert_eq!(case, 1);
    assert_eq!(chain.last().canonical_body(), strs(&["RK'", "Orders"]));

    // Without materialized keys, Case 2 repeats O1's queries.
    let none = build_plan(&p, &BTreeSet::new()).unwrap();
    let (chain, case) = hybrid_retrieval(&p, &none, &inner_lineitem()).unwrap();
    let o1 = retrieval_chain(&p, &inner_lineitem(), true).unwrap();
    assert_eq!(case, 2);
    assert_eq!(chain.steps.len(), o1.steps.len());
    for (a, b) in chain.steps.iter().zip(&o1.steps) {
        assert_eq!(a.canonical_body()[1..], b.canonical_body()[1..]);
        assert_eq!(a.retained_predicates, b.retained_predicates);
    }
}

#[test]
fn eager_store_layout_and_lookups() {
    let (_, p, ev) = q18_evaluated();
    let store = EagerStore::materialize(&p, &ev).unwrap();
    let top = store.top().attributes();
    for a in p.final_rule().head_attributes() {
        assert!(top.contains(&a));
    }
    for (o, attr) in [(occ("R", "Customers"), "c_address"), (inner_lineitem(), "linenum")] {
        assert!(top.contains(&qualified(&o, attr)), "{}", qualified(&o, attr));
    }
    assert!(store.answer().unwrap().same_rows(ev.require("R").unwrap()));
    let r = ev.require("R").unwrap();
    let (rows, stats) = eager_provenance(&p, &store, &occ("R", "Customers"), &Selection::all(r)).unwrap();
    assert_eq!(stats.join_count, 1);
    assert_eq!(
        rows_in(&rows, &strs(&["c_key", "c_name", "c_address"])),
        [vec![Value::text("c1"), Value::text("n1"), Value::text("a1")]].into()
    );
    assert!(eager_provenance(&p, &store, &occ("R", "Customers"), &Selection::empty(r))
        .unwrap()
        .0
        .is_empty());
}

#[test]
fn plan_selection_options() {
    let (_, p, ev) = q18_evaluated();
    let default = select_plan(&p, &ev, &PlanOptions::default()).unwrap();
    assert_eq!(default.candidates.len(), 16);
    assert_eq!(default.plan.chosen, worked_plan());

    // The plain ratio rewards the join saving less than it charges for the
    // doubled RK, so the empty plan wins there.
    let ratio = select_plan(
        &p,
        &ev,
        &PlanOptions {
            objective: Objective::Ratio,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(ratio.plan.chosen.is_empty());

    let estimate = select_plan(
        &p,
        &ev,
        &PlanOptions {
            rows: RowCount::Estimate,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(estimate.plan.chosen, worked_plan());
    let capped = select_plan(
        &p,
        &ev,
        &PlanOptions {
            max_cost_ratio: Some(1.into()),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(capped.best.cost <= 1.into());
    assert!(!capped.plan.chosen.contains(&inner_lineitem()));
}

#[test]
fn plan_enumeration_is_guarded() {
    let mut entries = Vec::new();
    let mut atoms = Vec::new();
    for i in 0..13 {
        entries.push(CatalogEntry::base(&format!("T{i}"), &[("k", Int)]).with_key(&["k"]));
        atoms.push(format!("T{i}"));
    }
    let c = Catalog::from_entries(entries).unwrap();
    let p = parse_program(&format!("R(k) :- {}.", atoms.join(", ")), &c).unwrap();
    let mut db = Database::new(c);
    for i in 0..13 {
        db.insert(RelationInstance::from_rows(format!("T{i}"), ["k"], vec![vec![Value::Int(1)]]).unwrap())
            .unwrap();
    }
    let db = eval_program(&p, &db).unwrap();
    assert!(matches!(
        select_plan(&p, &db, &PlanOptions::default()),
        Err(Error::TooManyOccurrences { n: 13, limit: 12 })
    ));
}
