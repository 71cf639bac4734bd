use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{Attribute, Catalog, CatalogEntry, RelationKind};
use crate::constraints::FunctionalDependency;
use crate::engine::{join_all, Database, JoinInput, RelationInstance};
use crate::error::{Error, Result};
use crate::ir::{rhs_attributes, OccurrenceId, Predicate, Program, Rule, TableAtom};
use crate::provgen::prune_body;

/// A key attribute of a chosen occurrence that does not reach the result
/// through plain head columns, added to RK under `name`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraColumn {
    pub occurrence: OccurrenceId,
    pub source: String,
    pub name: String,
}

/// A rule whose head columns may rename body attributes:
/// `head(body as out, ...) :- source, atoms, predicates.`
/// `source` is the atom over the rule's own head (V for VK, R for RK).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyRule {
    pub head: String,
    pub columns: Vec<(String, String)>,
    pub source: TableAtom,
    pub atoms: Vec<TableAtom>,
    pub predicates: Vec<Predicate>,
}

impl KeyRule {
    pub fn attributes(&self) -> Vec<String> {
        self.columns.iter().map(|(_, o)| o.clone()).collect()
    }

    /// Relation references besides the source atom.
    pub fn join_count(&self) -> usize {
        self.atoms.len()
    }

    pub(crate) fn evaluate(&self, db: &Database) -> Result<RelationInstance> {
        let mut inputs = vec![JoinInput::atom(db.require(&self.source.relation)?, &self.source)?];
        for a in &self.atoms {
            inputs.push(JoinInput::atom(db.require(&a.relation)?, a)?);
        }
        join_all(&inputs, &self.predicates)?.project(&self.head, &self.columns)
    }
}

impl fmt::Display for KeyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self
            .columns
            .iter()
            .map(|(b, o)| if b == o { b.clone() } else { format!("{b} as {o}") })
            .collect();
        write!(f, "{}({}) :- {}", self.head, head.join(", "), self.source.relation)?;
        for a in &self.atoms {
            write!(f, ", {a}")?;
        }
        for p in &self.predicates {
            write!(f, ", {p}")?;
        }
        f.write_str(".")
    }
}

/// Which occurrence keys are folded into RK, and the rules that build it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaterializationPlan {
    pub chosen: BTreeSet<OccurrenceId>,
    pub extras: Vec<ExtraColumn>,
    /// For every keyed base occurrence: key attribute → column of RK holding
    /// it, when it has one (carried result column or extra).
    pub key_columns: BTreeMap<OccurrenceId, BTreeMap<String, String>>,
    /// Bottom-up; only views whose subtree contributes extras.
    pub vk_rules: Vec<KeyRule>,
    pub rk_rule: KeyRule,
    pub rk_schema: Vec<String>,
    /// Program catalog plus entries for the VK relations.
    pub catalog: Catalog,
}

pub const RK_NAME: &str = "RK";

impl MaterializationPlan {
    /// Occurrences whose whole key is available in RK.
    pub fn key_covered(&self, occ: &OccurrenceId, program: &Program) -> bool {
        let Ok(atom) = program.atom(occ) else { return false };
        if program.is_view(&atom.relation) {
            return false;
        }
        let Some(key) = program.catalog().get(&atom.relation).and_then(|e| e.key.as_ref()) else {
            return false;
        };
        let cols = self.key_columns.get(occ);
        key.iter().all(|k| cols.is_some_and(|c| c.contains_key(k)))
    }

    /// Extras of chosen occurrences in the final rule, as (RK column, body name).
    pub(crate) fn top_level_extras(&self, program: &Program) -> Vec<(String, String)> {
        let top = program.result_name();
        self.extras
            .iter()
            .filter(|e| e.occurrence.rule == top)
            .filter_map(|e| {
                let atom = program.atom(&e.occurrence).ok()?;
                Some((e.name.clone(), atom.exposed_name(&e.source)?.to_string()))
            })
            .collect()
    }

    pub fn chosen_names(&self) -> Vec<String> {
        self.chosen.iter().map(|o| o.to_string()).collect()
    }
}

/// The result column carrying `name` (exposed in `rule`) up to the final
/// head through plain head columns, if any.
fn carry(program: &Program, rule: &str, name: &str) -> Option<String> {
    let mut rule = program.rule(rule)?;
    let mut name = name.to_string();
    loop {
        if !rule.plain_columns().contains(&name) {
            return None;
        }
        match program.parent_of(&rule.head) {
            None => return Some(name),
            Some(p) => {
                let atom = program.atom(p).ok()?;
                name = atom.exposed_name(&name)?.to_string();
                rule = program.rule(&p.rule)?;
            }
        }
    }
}

fn key_of<'a>(program: &'a Program, atom: &TableAtom) -> Option<&'a BTreeSet<String>> {
    if program.is_view(&atom.relation) {
        return None;
    }
    program.catalog().get(&atom.relation)?.key.as_ref()
}

/// Base occurrences that have a declared key; only these can be chosen.
pub fn keyed_occurrences(program: &Program) -> Vec<OccurrenceId> {
    program
        .base_occurrences()
        .into_iter()
        .filter(|o| program.atom(o).ok().and_then(|a| key_of(program, a)).is_some())
        .collect()
}

fn vk_name(head: &str) -> String {
    format!("{head}K")
}

struct Builder<'a> {
    program: &'a Program,
    chosen: &'a BTreeSet<OccurrenceId>,
    extras: &'a [ExtraColumn],
    catalog: Catalog,
    vk_rules: Vec<KeyRule>,
}

impl Builder<'_> {
    fn extras_below(&self, head: &str) -> Vec<ExtraColumn> {
        self.extras
            .iter()
            .filter(|e| {
                let mut cur = e.occurrence.rule.as_str();
                loop {
                    if cur == head {
                        return true;
                    }
                    match self.program.parent_of(cur) {
                        Some(p) => cur = &p.rule,
                        None => return false,
                    }
                }
            })
            .cloned()
            .collect()
    }

    /// Builds the key rule for `rule`, recursing into views first. Returns
    /// `None` when nothing below `rule` adds a column.
    fn build(&mut self, rule: &Rule, head: String) -> Result<Option<KeyRule>> {
        let extras = self.extras_below(&rule.head);
        if extras.is_empty() {
            return Ok(None);
        }
        let mut atoms = Vec::with_capacity(rule.atoms.len());
        let mut targets = Vec::new();
        for (i, atom) in rule.atoms.iter().enumerate() {
            if let Some(view) = self.program.rule(&atom.relation) {
                let name = vk_name(&view.head);
                if let Some(k) = self.build(view, name.clone())? {
                    let mut columns = atom.columns.clone();
                    for e in self.extras_below(&view.head) {
                        columns.push((e.name.clone(), e.name.clone()));
                    }
                    self.vk_rules.push(k);
                    atoms.push(TableAtom {
                        relation: name,
                        alias: atom.alias.clone(),
                        label: atom.label.clone(),
                        listed: atom.listed.clone(),
                        columns,
                    });
                    targets.push(i);
                    continue;
                }
            }
            let occ = OccurrenceId::new(&rule.head, &atom.label);
            if self.chosen.contains(&occ) && extras.iter().any(|e| e.occurrence == occ) {
                targets.push(i);
            }
            atoms.push(atom.clone());
        }
        let body = Rule {
            head: head.clone(),
            head_columns: Vec::new(),
            atoms,
            predicates: rule.predicates.clone(),
        };
        let sel: BTreeSet<String> = rule.plain_columns().into_iter().collect();
        let kept = prune_body(&body, &self.catalog, &sel, &targets);

        let mut columns: Vec<(String, String)> =
            rule.head_attributes().into_iter().map(|a| (a.clone(), a)).collect();
        for e in &extras {
            let body_name = if e.occurrence.rule == rule.head {
                let atom = rule.atom(&e.occurrence.label).expect("validated occurrence");
                atom.exposed_name(&e.source).expect("key attribute").to_string()
            } else {
                e.name.clone()
            };
            columns.push((body_name, e.name.clone()));
        }
        let source = TableAtom {
            relation: rule.head.clone(),
            alias: rule.head.clone(),
            label: rule.head.clone(),
            listed: Vec::new(),
            columns: rule.head_attributes().into_iter().map(|a| (a.clone(), a)).collect(),
        };
        let k = KeyRule {
            head: head.clone(),
            columns,
            source,
            atoms: kept.atoms.iter().map(|&i| body.atoms[i].clone()).collect(),
            predicates: kept.predicates.iter().map(|&i| body.predicates[i].clone()).collect(),
        };
        if self.program.parent_of(&rule.head).is_some() {
            self.register_vk(rule, &k, &extras)?;
        }
        Ok(Some(k))
    }

    fn register_vk(&mut self, rule: &Rule, k: &KeyRule, extras: &[ExtraColumn]) -> Result<()> {
        if self.catalog.contains(&k.head) {
            return Err(Error::Plan(format!("relation name `{}` is already taken", k.head)));
        }
        let view = self.catalog.require(&rule.head)?.clone();
        let mut attributes = view.attributes.clone();
        for e in extras {
            let atom = self.program.atom(&e.occurrence)?;
            let kind = self
                .catalog
                .require(&atom.relation)?
                .kind_of(&e.source)
                .ok_or_else(|| Error::Plan(format!("no kind for {}", e.name)))?;
            attributes.push(Attribute {
                name: e.name.clone(),
                kind,
            });
        }
        let plain = rule.plain_columns();
        let mut key: BTreeSet<String> = plain.iter().cloned().collect();
        key.extend(extras.iter().map(|e| e.name.clone()));
        let fds = rule
            .head_columns
            .iter()
            .filter(|c| !c.is_plain())
            .map(|c| FunctionalDependency::new(plain.iter(), c.output()))
            .collect();
        self.catalog.insert(CatalogEntry {
            name: k.head.clone(),
            attributes,
            key: Some(key),
            fds,
            kind: RelationKind::View,
        })
    }
}

/// Builds the VK and RK rules for the chosen base occurrences.
pub fn build_plan(program: &Program, chosen: &BTreeSet<OccurrenceId>) -> Result<MaterializationPlan> {
    let keyed: BTreeSet<OccurrenceId> = keyed_occurrences(program).into_iter().collect();
    for occ in chosen {
        let atom = program.atom(occ)?;
        if program.is_view(&atom.relation) {
            return Err(Error::Plan(format!("{occ} is a view occurrence; only base keys can be added")));
        }
        if !keyed.contains(occ) {
            return Err(Error::Plan(format!("{occ} has no declared key")));
        }
    }
    let a_r = program.final_rule().head_attributes();
    let mut taken: BTreeSet<String> = a_r.iter().cloned().collect();
    for r in program.rules() {
        taken.extend(rhs_attributes(r));
        taken.extend(r.head_attributes());
    }

    let mut extras = Vec::new();
    let mut key_columns = BTreeMap::new();
    for info in program.occurrences() {
        let occ = info.id;
        if !keyed.contains(&occ) {
            continue;
        }
        let atom = program.atom(&occ)?;
        let key = key_of(program, atom).expect("keyed");
        let mut cols = BTreeMap::new();
        for k in key {
            let exposed = atom.exposed_name(k).expect("key attribute exposed");
            if let Some(c) = carry(program, &occ.rule, exposed) {
                cols.insert(k.clone(), c);
            } else if chosen.contains(&occ) {
                let name = format!("{k}{}", atom.alias);
                if a_r.contains(&name) || program.rules().iter().any(|r| rhs_attributes(r).contains(&name)) {
                    return Err(Error::Plan(format!(
                        "added column `{name}` for {occ} collides with an existing name; alias the occurrence differently"
                    )));
                }
                // Another occurrence already added this name: qualify by rule.
                let name = if extras.iter().any(|e: &ExtraColumn| e.name == name) {
                    format!("{name}_{}", occ.rule)
                } else {
                    name
                };
                if !taken.insert(name.clone()) {
                    return Err(Error::Plan(format!(
                        "added column `{name}` for {occ} collides with an existing name; alias the occurrence differently"
                    )));
                }
                cols.insert(k.clone(), name.clone());
                extras.push(ExtraColumn {
                    occurrence: occ.clone(),
                    source: k.clone(),
                    name,
                });
            }
        }
        key_columns.insert(occ, cols);
    }

    let mut b = Builder {
        program,
        chosen,
        extras: &extras,
        catalog: program.catalog().clone(),
        vk_rules: Vec::new(),
    };
    let final_rule = program.final_rule();
    let rk_rule = match b.build(final_rule, RK_NAME.to_string())? {
        Some(k) => k,
        None => KeyRule {
            head: RK_NAME.to_string(),
            columns: a_r.iter().map(|a| (a.clone(), a.clone())).collect(),
            source: TableAtom {
                relation: final_rule.head.clone(),
                alias: final_rule.head.clone(),
                label: final_rule.head.clone(),
                listed: Vec::new(),
                columns: a_r.iter().map(|a| (a.clone(), a.clone())).collect(),
            },
            atoms: Vec::new(),
            predicates: Vec::new(),
        },
    };
    let rk_schema = rk_rule.attributes();
    let Builder { vk_rules, catalog, .. } = b;
    Ok(MaterializationPlan {
        chosen: chosen.clone(),
        extras,
        key_columns,
        vk_rules,
        rk_rule,
        rk_schema,
        catalog,
    })
}
