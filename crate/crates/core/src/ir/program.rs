use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{AggFn, HeadColumn, Rule, TableAtom};
use super::parser::{parse_rules, RawAtom, RawRule};
use super::safety::check_safety;
use crate::catalog::{Attribute, Catalog, CatalogEntry, RelationKind};
use crate::constraints::infer_view_key;
use crate::error::{Error, Result};
use crate::value::ValueKind;

/// A body atom identified by the rule it appears in and its label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccurrenceId {
    pub rule: String,
    pub label: String,
}

impl OccurrenceId {
    pub fn new(rule: impl Into<String>, label: impl Into<String>) -> OccurrenceId {
        OccurrenceId {
            rule: rule.into(),
            label: label.into(),
        }
    }
}

impl fmt::Display for OccurrenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.rule, self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceInfo {
    pub id: OccurrenceId,
    pub relation: String,
    pub is_view: bool,
    /// 0 for atoms of the final rule, 1 for atoms of views it uses, ...
    pub depth: usize,
}

/// An ordered list of rules; the last rule's head is the query result R.
///
/// Views are tree-shaped: every non-final head is used by exactly one atom of
/// a later rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    catalog: Catalog,
    parents: BTreeMap<String, OccurrenceId>,
}

impl Program {
    /// Parses and validates `text` against the base relations in `catalog`.
    pub fn parse(text: &str, catalog: &Catalog) -> Result<Program> {
        let raw = parse_rules(text)?;
        let mut catalog = catalog.clone();
        let later: BTreeSet<&str> = raw.iter().map(|r| r.head.as_str()).collect();
        let mut defined: BTreeSet<String> = BTreeSet::new();
        let mut rules = Vec::new();
        for r in &raw {
            if defined.contains(&r.head) {
                return Err(Error::DuplicateHead(r.head.clone()));
            }
            if catalog.contains(&r.head) {
                return Err(Error::InvalidProgram(format!(
                    "head `{}` clashes with a base relation",
                    r.head
                )));
            }
            let rule = resolve_rule(r, &catalog, &later)?;
            check_safety(&rule, &catalog)?;
            catalog.insert(view_entry(&rule, &catalog)?)?;
            defined.insert(rule.head.clone());
            rules.push(rule);
        }
        Program::from_rules(rules, catalog)
    }

    /// Builds a program from already resolved rules. `catalog` must contain
    /// the base relations and a view entry for every head.
    pub fn from_rules(rules: Vec<Rule>, catalog: Catalog) -> Result<Program> {
        if rules.is_empty() {
            return Err(Error::InvalidProgram("a program needs at least one rule".into()));
        }
        let heads: BTreeSet<&str> = rules.iter().map(|r| r.head.as_str()).collect();
        let mut parents: BTreeMap<String, OccurrenceId> = BTreeMap::new();
        for rule in &rules {
            for atom in &rule.atoms {
                if heads.contains(atom.relation.as_str()) {
                    let occ = OccurrenceId::new(&rule.head, &atom.label);
                    if let Some(prev) = parents.insert(atom.relation.clone(), occ.clone()) {
                        return Err(Error::InvalidProgram(format!(
                            "view `{}` is used twice ({prev} and {occ}); define a copy per use",
                            atom.relation
                        )));
                    }
                }
            }
        }
        for rule in &rules[..rules.len() - 1] {
            if !parents.contains_key(&rule.head) {
                return Err(Error::InvalidProgram(format!(
                    "view `{}` is never used",
                    rule.head
                )));
            }
        }
        Ok(Program {
            rules,
            catalog,
            parents,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn final_rule(&self) -> &Rule {
        self.rules.last().expect("validated non-empty")
    }

    pub fn result_name(&self) -> &str {
        &self.final_rule().head
    }

    pub fn rule(&self, head: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.head == head)
    }

    pub fn require_rule(&self, head: &str) -> Result<&Rule> {
        self.rule(head)
            .ok_or_else(|| Error::UnknownRelation(head.to_string()))
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn is_view(&self, relation: &str) -> bool {
        self.rule(relation).is_some()
    }

    /// The atom through which view `head` is used, if `head` is not final.
    pub fn parent_of(&self, head: &str) -> Option<&OccurrenceId> {
        self.parents.get(head)
    }

    pub fn atom(&self, occ: &OccurrenceId) -> Result<&TableAtom> {
        self.rule(&occ.rule)
            .and_then(|r| r.atom(&occ.label))
            .ok_or_else(|| Error::UnknownOccurrence(occ.to_string()))
    }

    pub fn depth_of(&self, head: &str) -> usize {
        let mut d = 0;
        let mut cur = head;
        while let Some(p) = self.parents.get(cur) {
            d += 1;
            cur = &p.rule;
        }
        d
    }

    /// Every occurrence, depth-first from the final rule, body order.
    pub fn occurrences(&self) -> Vec<OccurrenceInfo> {
        let mut out = Vec::new();
        self.walk(self.final_rule(), 0, &mut out);
        out
    }

    fn walk(&self, rule: &Rule, depth: usize, out: &mut Vec<OccurrenceInfo>) {
        for atom in &rule.atoms {
            let is_view = self.is_view(&atom.relation);
            out.push(OccurrenceInfo {
                id: OccurrenceId::new(&rule.head, &atom.label),
                relation: atom.relation.clone(),
                is_view,
                depth,
            });
            if let Some(v) = self.rule(&atom.relation) {
                self.walk(v, depth + 1, out);
            }
        }
    }

    pub fn base_occurrences(&self) -> Vec<OccurrenceId> {
        self.occurrences()
            .into_iter()
            .filter(|o| !o.is_view)
            .map(|o| o.id)
            .collect()
    }

    /// Resolves `Head.Label`, a label unique across the program, or a
    /// relation that occurs once.
    pub fn resolve_occurrence(&self, name: &str) -> Result<OccurrenceId> {
        if let Some((rule, label)) = name.split_once('.') {
            let occ = OccurrenceId::new(rule, label);
            self.atom(&occ)?;
            return Ok(occ);
        }
        let occs = self.occurrences();
        let mut hits: Vec<OccurrenceId> = occs.iter().filter(|o| o.id.label == name).map(|o| o.id.clone()).collect();
        if hits.is_empty() {
            hits = occs.into_iter().filter(|o| o.relation == name).map(|o| o.id).collect();
        }
        match hits.len() {
            0 => Err(Error::UnknownOccurrence(name.to_string())),
            1 => Ok(hits.into_iter().next().unwrap()),
            _ => Err(Error::AmbiguousOccurrence(name.to_string())),
        }
    }

    /// View occurrences leading from the final rule down to `occ`, followed
    /// by `occ` itself.
    pub fn path_to(&self, occ: &OccurrenceId) -> Result<Vec<OccurrenceId>> {
        self.atom(occ)?;
        let mut path = vec![occ.clone()];
        let mut cur = occ.rule.as_str();
        while let Some(p) = self.parents.get(cur) {
            path.push(p.clone());
            cur = &p.rule;
        }
        path.reverse();
        Ok(path)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn resolve_rule(raw: &RawRule, catalog: &Catalog, all_heads: &BTreeSet<&str>) -> Result<Rule> {
    let mut atoms: Vec<TableAtom> = Vec::new();
    for ra in &raw.atoms {
        let atom = resolve_atom(ra, catalog, all_heads)?;
        if atoms.iter().any(|a| a.label == atom.label) {
            return Err(ra.pos.error(format!(
                "occurrence label `{}` used twice; give one of them an alias with @",
                atom.label
            )));
        }
        atoms.push(atom);
    }
    let exposed: BTreeSet<String> = atoms.iter().flat_map(|a| a.exposed()).collect();
    let mut outputs = BTreeSet::new();
    for c in &raw.head_columns {
        if !outputs.insert(c.output().to_string()) {
            return Err(raw
                .pos
                .error(format!("head column `{}` appears twice", c.output())));
        }
        if let HeadColumn::Aggregate { output, .. } = c {
            if exposed.contains(output) {
                return Err(raw.pos.error(format!(
                    "aggregate output `{output}` collides with a body attribute"
                )));
            }
        }
    }
    Ok(Rule {
        head: raw.head.clone(),
        head_columns: raw.head_columns.clone(),
        atoms,
        predicates: raw.predicates.iter().map(|(p, _)| p.clone()).collect(),
    })
}

fn resolve_atom(ra: &RawAtom, catalog: &Catalog, all_heads: &BTreeSet<&str>) -> Result<TableAtom> {
    let entry = match catalog.get(&ra.relation) {
        Some(e) => e,
        None if all_heads.contains(ra.relation.as_str()) => {
            return Err(Error::ForwardReference(ra.relation.clone()))
        }
        None => return Err(Error::UnknownRelation(ra.relation.clone())),
    };
    let mut renames: BTreeMap<&str, &str> = BTreeMap::new();
    for (src, exp) in &ra.listed {
        if !entry.has_attribute(src) {
            return Err(Error::UnknownAttribute {
                relation: ra.relation.clone(),
                attribute: src.clone(),
            });
        }
        if renames.insert(src, exp).is_some() {
            return Err(ra.pos.error(format!("column `{src}` listed twice")));
        }
    }
    let columns: Vec<(String, String)> = entry
        .attributes
        .iter()
        .map(|a| {
            let exp = renames.get(a.name.as_str()).copied().unwrap_or(&a.name);
            (a.name.clone(), exp.to_string())
        })
        .collect();
    let mut seen = BTreeSet::new();
    for (_, e) in &columns {
        if !seen.insert(e) {
            return Err(ra.pos.error(format!(
                "atom `{}` exposes `{e}` twice",
                ra.relation
            )));
        }
    }
    let alias = ra.alias.clone().unwrap_or_else(|| ra.relation.clone());
    Ok(TableAtom {
        label: TableAtom::label_for(&ra.relation, &alias),
        relation: ra.relation.clone(),
        alias,
        listed: ra.listed.clone(),
        columns,
    })
}

/// Kind of an exposed body attribute (first atom exposing it).
pub(crate) fn exposed_kind(rule: &Rule, catalog: &Catalog, name: &str) -> Option<ValueKind> {
    rule.atoms.iter().find_map(|a| {
        let src = a.source_name(name)?;
        catalog.get(&a.relation)?.kind_of(src)
    })
}

/// The catalog entry describing a rule's head as a relation.
pub fn view_entry(rule: &Rule, catalog: &Catalog) -> Result<CatalogEntry> {
    let mut attributes = Vec::new();
    for c in &rule.head_columns {
        let kind = match c {
            HeadColumn::Plain(a) => exposed_kind(rule, catalog, a),
            HeadColumn::Aggregate { func, input, .. } => match func {
                AggFn::Count => Some(ValueKind::Int),
                AggFn::Avg => Some(ValueKind::Decimal),
                _ => exposed_kind(rule, catalog, input),
            },
        };
        let kind = kind.ok_or_else(|| Error::Unsafe {
            rule: rule.head.clone(),
            attributes: vec![c.output().to_string()],
        })?;
        attributes.push(Attribute {
            name: c.output().to_string(),
            kind,
        });
    }
    Ok(CatalogEntry {
        name: rule.head.clone(),
        attributes,
        key: infer_view_key(rule).map(|k| k.key),
        fds: Vec::new(),
        kind: RelationKind::View,
    })
}
