//! Random (program, database) generation and a brute-force reference that
//! shares no evaluation code with the library: derivations are enumerated by
//! backtracking over atom rows, and provenance is read off the derivations
//! that produce a selected row.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use provex::catalog::{Catalog, CatalogEntry};
use provex::engine::{Database, RelationInstance};
use provex::ir::{AggFn, CmpOp, HeadColumn, OccurrenceId, Operand, Program, Rule};
use provex::value::{Value, ValueKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Row = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub attrs: Vec<String>,
    pub rows: BTreeSet<Row>,
}

impl Table {
    pub fn from_instance(rel: &RelationInstance) -> Table {
        Table {
            attrs: rel.attributes().to_vec(),
            rows: rel.rows().clone(),
        }
    }

    /// Rows reordered to `attrs`.
    pub fn reordered(&self, attrs: &[String]) -> BTreeSet<Row> {
        let pos: Vec<usize> = attrs
            .iter()
            .map(|a| self.attrs.iter().position(|b| b == a).unwrap_or_else(|| panic!("no column {a}")))
            .collect();
        self.rows.iter().map(|r| pos.iter().map(|&p| r[p].clone()).collect()).collect()
    }
}

/// Rows of a library relation in the column order `attrs`.
pub fn rows_in(rel: &RelationInstance, attrs: &[String]) -> BTreeSet<Row> {
    Table::from_instance(rel).reordered(attrs)
}

const ATTRS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn int(v: &Value) -> i64 {
    match v {
        Value::Int(i) => *i,
        other => panic!("generator only produces integers, got {other:?}"),
    }
}

fn holds(op: CmpOp, l: i64, r: i64) -> bool {
    match op {
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Ge => l >= r,
        CmpOp::Gt => l > r,
    }
}

type Binding = BTreeMap<String, Value>;

/// Every consistent assignment of one row per atom that satisfies the
/// predicates. `inputs[i]` is the instance for atom i, with source columns.
pub fn derivations(rule: &Rule, inputs: &[&Table]) -> Vec<Binding> {
    fn go(rule: &Rule, inputs: &[&Table], i: usize, cur: &mut Binding, out: &mut Vec<Binding>) {
        if i == rule.atoms.len() {
            let ok = rule.predicates.iter().all(|p| {
                let val = |o: &Operand| match o {
                    Operand::Attr(a) => int(&cur[a]),
                    Operand::Const(c) => int(c),
                };
                holds(p.op, val(&p.left), val(&p.right))
            });
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        let atom = &rule.atoms[i];
        let table = inputs[i];
        'rows: for row in &table.rows {
            let mut added = Vec::new();
            for (src, exp) in &atom.columns {
                let p = table.attrs.iter().position(|a| a == src).expect("source column");
                match cur.get(exp) {
                    Some(v) if v != &row[p] => {
                        for a in &added {
                            cur.remove(a);
                        }
                        continue 'rows;
                    }
                    Some(_) => {}
                    None => {
                        cur.insert(exp.clone(), row[p].clone());
                        added.push(exp.clone());
                    }
                }
            }
            go(rule, inputs, i + 1, cur, out);
            for a in &added {
                cur.remove(a);
            }
        }
    }
    let mut out = Vec::new();
    go(rule, inputs, 0, &mut Binding::new(), &mut out);
    out
}

fn group_key(rule: &Rule, d: &Binding) -> Row {
    rule.plain_columns().iter().map(|c| d[c].clone()).collect()
}

/// The head instance computed from the derivations.
pub fn head_of(rule: &Rule, ds: &[Binding]) -> Table {
    let attrs = rule.head_attributes();
    let mut groups: BTreeMap<Row, Vec<&Binding>> = BTreeMap::new();
    for d in ds {
        groups.entry(group_key(rule, d)).or_default().push(d);
    }
    let mut rows = BTreeSet::new();
    for (key, members) in groups {
        let mut k = key.into_iter();
        let row = rule
            .head_columns
            .iter()
            .map(|c| match c {
                HeadColumn::Plain(_) => k.next().expect("plain value"),
                HeadColumn::Aggregate { func, input, .. } => {
                    let xs: Vec<i64> = members.iter().map(|d| int(&d[input])).collect();
                    Value::Int(match func {
                        AggFn::Sum => xs.iter().sum(),
                        AggFn::Count => xs.len() as i64,
                        AggFn::Min => *xs.iter().min().unwrap(),
                        AggFn::Max => *xs.iter().max().unwrap(),
                        AggFn::Avg => panic!("generator does not emit avg"),
                    })
                }
            })
            .collect();
        rows.insert(row);
    }
    Table { attrs, rows }
}

/// Base tables of `db` plus every head, evaluated by brute force.
pub fn eval_all(program: &Program, db: &Database) -> BTreeMap<String, Table> {
    let mut tables: BTreeMap<String, Table> = db
        .relations()
        .map(|r| (r.name().to_string(), Table::from_instance(r)))
        .collect();
    for rule in program.rules() {
        let inputs: Vec<&Table> = rule.atoms.iter().map(|a| &tables[&a.relation]).collect();
        let head = head_of(rule, &derivations(rule, &inputs));
        tables.insert(rule.head.clone(), head);
    }
    tables
}

/// Occurrences from the final rule down to `occ`, found by walking rule
/// heads back to the atoms that reference them.
pub fn path(program: &Program, occ: &OccurrenceId) -> Vec<OccurrenceId> {
    let mut out = vec![occ.clone()];
    let mut head = occ.rule.clone();
    while head != program.result_name() {
        let parent = program
            .rules()
            .iter()
            .find_map(|r| {
                r.atoms
                    .iter()
                    .find(|a| a.relation == head)
                    .map(|a| OccurrenceId::new(r.head.clone(), a.label.clone()))
            })
            .expect("every view is used");
        head = parent.rule.clone();
        out.push(parent);
    }
    out.reverse();
    out
}

/// Rows of the occurrence's relation (in its schema order) taking part in a
/// derivation of some selected row of the rule's head.
pub fn step_provenance(rule: &Rule, label: &str, tables: &BTreeMap<String, Table>, selected: &BTreeSet<Row>) -> Table {
    let inputs: Vec<&Table> = rule.atoms.iter().map(|a| &tables[&a.relation]).collect();
    let head_attrs = rule.head_attributes();
    let plain = rule.plain_columns();
    let keys: BTreeSet<Row> = selected
        .iter()
        .map(|r| {
            plain
                .iter()
                .map(|c| r[head_attrs.iter().position(|h| h == c).unwrap()].clone())
                .collect()
        })
        .collect();
    let atom = rule.atoms.iter().find(|a| a.label == label).expect("label");
    let schema = tables[&atom.relation].attrs.clone();
    let mut rows = BTreeSet::new();
    for d in derivations(rule, &inputs) {
        if keys.contains(&group_key(rule, &d)) {
            rows.insert(
                schema
                    .iter()
                    .map(|s| d[atom.exposed_name(s).expect("exposed")].clone())
                    .collect(),
            );
        }
    }
    Table { attrs: schema, rows }
}

/// Reference provenance of any occurrence for `selected` rows of R.
pub fn reference_provenance(
    program: &Program,
    tables: &BTreeMap<String, Table>,
    occ: &OccurrenceId,
    selected: &BTreeSet<Row>,
) -> Table {
    let mut sel = selected.clone();
    let mut last = None;
    for step in path(program, occ) {
        let rule = program.rules().iter().find(|r| r.head == step.rule).unwrap();
        let t = step_provenance(rule, &step.label, tables, &sel);
        sel = t.rows.clone();
        last = Some(t);
    }
    last.expect("non-empty path")
}

/// A random catalog, consistent database and program text.
pub struct RandomCase {
    pub seed: u64,
    pub db: Database,
    pub text: String,
}

/// Retries with derived seeds (up to 30 times) until R is non-empty.
pub fn random_case(seed: u64) -> RandomCase {
    for attempt in 0..30u64 {
        let case = random_case_once(seed, seed.wrapping_mul(1_000_003).wrapping_add(attempt));
        let Ok(program) = provex::ir::parse_program(&case.text, case.db.catalog()) else {
            return case;
        };
        if !eval_all(&program, &case.db)[program.result_name()].rows.is_empty() {
            return case;
        }
    }
    random_case_once(seed, seed)
}

fn random_case_once(seed: u64, stream: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let n_base = rng.gen_range(2..=4);
    let mut entries = Vec::new();
    let mut data = Vec::new();
    for i in 0..n_base {
        let name = format!("B{i}");
        let arity = rng.gen_range(1..=4);
        let mut attrs: Vec<&str> = ATTRS.to_vec();
        attrs.shuffle(&mut rng);
        attrs.truncate(arity);
        let cols: Vec<(&str, ValueKind)> = attrs.iter().map(|a| (*a, ValueKind::Int)).collect();
        let mut entry = CatalogEntry::base(&name, &cols);
        let key: Option<Vec<&str>> = if rng.gen_bool(0.6) {
            let n = rng.gen_range(1..=arity);
            Some(attrs[..n].to_vec())
        } else {
            None
        };
        if let Some(k) = &key {
            entry = entry.with_key(k);
        }
        let mut fd = None;
        if arity >= 2 && rng.gen_bool(0.3) {
            let lhs = attrs[arity - 1];
            let rhs = attrs[rng.gen_range(0..arity - 1)];
            let covered = key.as_ref().is_some_and(|k| k.contains(&rhs));
            if !covered {
                entry = entry.with_fd(&[lhs], rhs);
                fd = Some((arity - 1, attrs.iter().position(|a| *a == rhs).unwrap()));
            }
        }
        let n_rows = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=10) };
        let mut by_key: BTreeMap<Row, Row> = BTreeMap::new();
        for _ in 0..n_rows {
            let mut row: Row = (0..arity).map(|_| Value::Int(rng.gen_range(0..4))).collect();
            if let Some((l, r)) = fd {
                row[r] = Value::Int((int(&row[l]) * 7 + 1) % 4);
            }
            let k = match &key {
                Some(k) => row[..k.len()].to_vec(),
                None => row.clone(),
            };
            by_key.entry(k).or_insert(row);
        }
        data.push((name, attrs.iter().map(|a| a.to_string()).collect::<Vec<_>>(), by_key.into_values().collect::<Vec<_>>()));
        entries.push(entry);
    }
    let catalog = Catalog::from_entries(entries).expect("generated catalog");
    let mut db = Database::new(catalog);
    for (name, attrs, rows) in data {
        db.insert(RelationInstance::from_rows(name, attrs, rows).unwrap()).expect("generated data is consistent");
    }

    let n_rules = rng.gen_range(1..=4);
    let mut pool: Vec<(String, Vec<String>)> = Vec::new();
    let mut text = String::new();
    for i in 0..n_rules {
        let last = i == n_rules - 1;
        let head = if last { "R".to_string() } else { format!("V{i}") };
        let views: Vec<(String, Vec<String>)> = if last {
            std::mem::take(&mut pool)
        } else if !pool.is_empty() && rng.gen_bool(0.5) {
            vec![pool.remove(rng.gen_range(0..pool.len()))]
        } else {
            Vec::new()
        };
        let n_base_atoms = if views.is_empty() {
            rng.gen_range(1..=3)
        } else {
            rng.gen_range(0..=(5 - views.len()).min(2))
        };
        let mut atoms = Vec::new();
        let mut exposed: BTreeSet<String> = BTreeSet::new();
        let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..n_base_atoms {
            let b = rng.gen_range(0..n_base);
            let n = uses.entry(b).or_insert(0);
            *n += 1;
            let entry = db.catalog().get(&format!("B{b}")).unwrap();
            match *n {
                1 => {
                    exposed.extend(entry.attribute_names());
                    atoms.push(format!("B{b}"));
                }
                2 => {
                    let mut listed = Vec::new();
                    for a in entry.attribute_names() {
                        if rng.gen_bool(0.7) {
                            listed.push(format!("{a} as {a}x"));
                            exposed.insert(format!("{a}x"));
                        } else {
                            exposed.insert(a.to_string());
                        }
                    }
                    if listed.is_empty() {
                        atoms.push(format!("B{b}@2"));
                    } else {
                        atoms.push(format!("B{b}@2({})", listed.join(", ")));
                    }
                }
                _ => {}
            }
        }
        for (v, attrs) in &views {
            atoms.push(v.clone());
            exposed.extend(attrs.iter().cloned());
        }
        let exposed: Vec<String> = exposed.into_iter().collect();
        let mut shuffled = exposed.clone();
        shuffled.shuffle(&mut rng);
        let aggregate_only = rng.gen_bool(0.08);
        let n_plain = if aggregate_only { 0 } else { rng.gen_range(1..=shuffled.len().min(3)) };
        let plain: Vec<String> = shuffled[..n_plain].to_vec();
        let mut head_cols: Vec<String> = plain.clone();
        let mut head_attrs = plain.clone();
        let rest: Vec<&String> = shuffled[n_plain..].iter().collect();
        if (aggregate_only || rng.gen_bool(0.35)) && !rest.is_empty() {
            let func = ["sum", "count", "min", "max"][rng.gen_range(0..4)];
            let input = rest[rng.gen_range(0..rest.len())];
            let out = format!("s{i}");
            head_cols.push(format!("{func}({input}) as {out}"));
            head_attrs.push(out);
        } else if aggregate_only {
            head_cols = vec![shuffled[0].clone()];
            head_attrs = head_cols.clone();
        }
        let mut preds = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let x = &exposed[rng.gen_range(0..exposed.len())];
            let op = ["<", "<=", "=", "!=", ">=", ">"][rng.gen_range(0..6)];
            if exposed.len() > 1 && rng.gen_bool(0.3) {
                let y = exposed.iter().filter(|y| *y != x).nth(rng.gen_range(0..exposed.len() - 1)).unwrap();
                preds.push(format!("{x} {op} {y}"));
            } else {
                preds.push(format!("{x} {op} {}", rng.gen_range(0..4)));
            }
        }
        let mut body = atoms;
        body.extend(preds);
        text.push_str(&format!("{head}({}) :- {}.\n", head_cols.join(", "), body.join(", ")));
        if !last {
            pool.push((head, head_attrs));
        }
    }
    RandomCase { seed, db, text }
}

/// Random subset of `rows`: one case in eight selects nothing, one in eight
/// everything, the rest at least one row.
pub fn random_selection(rows: &BTreeSet<Row>, seed: u64) -> BTreeSet<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    match rng.gen_range(0..8) {
        0 => BTreeSet::new(),
        1 => rows.clone(),
        _ => {
            let mut out: BTreeSet<Row> = rows.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if let Some(r) = rows.iter().nth(rng.gen_range(0..rows.len().max(1))) {
                out.insert(r.clone());
            }
            out
        }
    }
}

pub mod suite {
    use super::*;
    use provex::engine::eval_program;
    use provex::explore::{PlanMode, Prepared};
    use provex::hybrid::{keyed_occurrences, PlanOptions};
    use provex::ir::parse_program;
    use provex::provgen::{oracle_provenance, provenance, Selection, Strategy};

    #[derive(Debug, Default, Clone)]
    pub struct Summary {
        pub cases: usize,
        pub comparisons: usize,
        pub o2_plans: usize,
        pub nonempty_selections: usize,
        pub multi_rule: usize,
    }

    fn check(cond: bool, seed: u64, text: &str, what: String) -> Result<(), String> {
        if cond {
            Ok(())
        } else {
            Err(format!("seed {seed}: {what}\nprogram:\n{text}"))
        }
    }

    /// Up to `k` distinct subsets of `n` items, always including the empty one.
    fn sample_masks(n: usize, k: usize, seed: u64) -> Vec<u64> {
        let total = 1u64 << n;
        if total <= k as u64 {
            return (0..total).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a7);
        let mut out = BTreeSet::from([0u64]);
        while out.len() < k {
            out.insert(rng.gen_range(0..total));
        }
        out.into_iter().collect()
    }

    /// Every check on one random case.
    pub fn run_case(seed: u64, summary: &mut Summary) -> Result<(), String> {
        let case = random_case(seed);
        let text = case.text.as_str();
        let e = |err: provex::error::Error| format!("seed {seed}: {err}\nprogram:\n{text}");
        let program = parse_program(text, case.db.catalog()).map_err(e)?;
        let tables = eval_all(&program, &case.db);
        let evaluated = eval_program(&program, &case.db).map_err(e)?;
        for rule in program.rules() {
            let want = &tables[&rule.head];
            let got = rows_in(evaluated.require(&rule.head).map_err(e)?, &want.attrs);
            check(got == want.rows, seed, text, format!("{} evaluates differently", rule.head))?;
        }
        let r = &tables[program.result_name()];
        let selected = random_selection(&r.rows, seed);
        let result = evaluated.require(program.result_name()).map_err(e)?;
        let r_attrs = result.attributes().to_vec();
        let sel_rows: Vec<Row> = Table { attrs: r.attrs.clone(), rows: selected.clone() }
            .reordered(&r_attrs)
            .into_iter()
            .collect();
        let selection = Selection::new(result, sel_rows).map_err(e)?;

        let options = PlanOptions::default();
        let mut prepared = Vec::new();
        for s in [Strategy::W, Strategy::O1, Strategy::G] {
            prepared.push(Prepared::new(program.clone(), &case.db, s, &PlanMode::Auto, &options).map_err(e)?);
        }
        let keyed = keyed_occurrences(&program);
        for mask in sample_masks(keyed.len(), 8, seed) {
            let set: BTreeSet<OccurrenceId> = keyed
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, o)| o.clone())
                .collect();
            prepared.push(
                Prepared::new(program.clone(), &case.db, Strategy::O2, &PlanMode::Explicit(set), &options)
                    .map_err(e)?,
            );
            summary.o2_plans += 1;
        }
        for p in &prepared {
            check(
                rows_in(p.result(), &r.attrs) == r.rows,
                seed,
                text,
                format!("{} answers R differently", p.strategy()),
            )?;
        }

        for occ in program.base_occurrences() {
            let want = reference_provenance(&program, &tables, &occ, &selected);
            let lib = oracle_provenance(&program, &occ, selection.instance(), &evaluated).map_err(e)?;
            check(rows_in(&lib, &want.attrs) == want.rows, seed, text, format!("naive provenance of {occ}"))?;
            let relation = &program.atom(&occ).map_err(e)?.relation;
            let instance = &tables[relation];
            let mut o1_joins = None;
            for p in &prepared {
                let (rows, stats) = p.provenance(&occ, &selection).map_err(e)?;
                let got = rows_in(&rows, &want.attrs);
                summary.comparisons += 1;
                check(
                    got == want.rows,
                    seed,
                    text,
                    format!("{} provenance of {occ}: got {got:?}, want {:?}", p.strategy(), want.rows),
                )?;
                check(got.is_subset(&instance.rows), seed, text, format!("{occ} is not sound"))?;
                if p.strategy() == Strategy::O1 {
                    o1_joins = Some(stats.join_count);
                }
                if stats.case == Some(1) {
                    let o1 = o1_joins.expect("O1 runs before O2");
                    check(
                        stats.join_count <= o1,
                        seed,
                        text,
                        format!("Case 1 for {occ} joins {} > O1 {o1}", stats.join_count),
                    )?;
                }
            }
        }

        // View occurrences under W and O1, then replay every rule from the
        // O1 provenance of its atoms.
        let mut o1_prov: BTreeMap<OccurrenceId, Table> = BTreeMap::new();
        for info in program.occurrences() {
            let want = reference_provenance(&program, &tables, &info.id, &selected);
            for p in &prepared[..2] {
                let (rows, _) = provenance(&program, &info.id, &selection, p.strategy(), &evaluated).map_err(e)?;
                let got = rows_in(&rows, &want.attrs);
                check(got == want.rows, seed, text, format!("{} provenance of {}", p.strategy(), info.id))?;
                if p.strategy() == Strategy::O1 {
                    o1_prov.insert(info.id.clone(), Table { attrs: want.attrs.clone(), rows: got });
                }
            }
        }
        for rule in program.rules() {
            let selected_here = if rule.head == program.result_name() {
                selected.clone()
            } else {
                let parent = program.parent_of(&rule.head).expect("used view").clone();
                o1_prov[&parent].reordered(&rule.head_attributes())
            };
            let inputs: Vec<&Table> = rule
                .atoms
                .iter()
                .map(|a| &o1_prov[&OccurrenceId::new(rule.head.clone(), a.label.clone())])
                .collect();
            let replayed = head_of(rule, &derivations(rule, &inputs));
            check(
                selected_here.is_subset(&replayed.reordered(&rule.head_attributes())),
                seed,
                text,
                format!("replaying {} misses selected rows", rule.head),
            )?;
        }

        summary.cases += 1;
        if !selected.is_empty() {
            summary.nonempty_selections += 1;
        }
        if program.rules().len() > 1 {
            summary.multi_rule += 1;
        }
        Ok(())
    }

    pub fn run(seeds: std::ops::Range<u64>) -> Result<Summary, String> {
        let mut summary = Summary::default();
        for seed in seeds {
            run_case(seed, &mut summary)?;
        }
        Ok(summary)
    }
}
