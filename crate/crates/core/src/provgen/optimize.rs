use std::collections::BTreeSet;

use super::query::{ProvQuery, RetrievalChain};
use crate::catalog::Catalog;
use crate::constraints::{atom_fds, closure, predicate_fds, FunctionalDependency};
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program, Rule, TableAtom};

/// Indices of the atoms and predicates a pruned body keeps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pruned {
    pub atoms: BTreeSet<usize>,
    pub predicates: BTreeSet<usize>,
}

fn exposed_key(atom: &TableAtom, catalog: &Catalog) -> Option<BTreeSet<String>> {
    let key = catalog.get(&atom.relation)?.key.as_ref()?;
    Some(
        key.iter()
            .map(|k| atom.exposed_name(k).unwrap_or(k).to_string())
            .collect(),
    )
}

fn fds_of(atom: &TableAtom, catalog: &Catalog) -> Vec<FunctionalDependency> {
    match catalog.get(&atom.relation) {
        Some(e) => atom_fds(atom, e.key.as_ref(), &e.fds),
        None => Vec::new(),
    }
}

/// Body reduction for a selection exposing `sel` (names in the rule body).
///
/// Starting from `targets`, an attribute C exposed by a kept atom but not
/// functionally determined by `sel` (using the FDs of kept atoms and kept
/// equality predicates) forces in every other atom exposing C. A predicate
/// is kept when it mentions such an attribute; a kept predicate forces in
/// the atoms providing its attributes that `sel` does not provide.
pub fn prune_body(rule: &Rule, catalog: &Catalog, sel: &BTreeSet<String>, targets: &[usize]) -> Pruned {
    let mut kept = Pruned {
        atoms: targets.iter().copied().collect(),
        predicates: BTreeSet::new(),
    };
    loop {
        let mut fds = Vec::new();
        for &i in &kept.atoms {
            fds.extend(fds_of(&rule.atoms[i], catalog));
        }
        for &p in &kept.predicates {
            fds.extend(predicate_fds(&rule.predicates[p]));
        }
        let clo = closure(sel, &fds);
        let exposed: BTreeSet<String> = kept
            .atoms
            .iter()
            .flat_map(|&i| rule.atoms[i].exposed())
            .collect();
        let undetermined: BTreeSet<&String> = exposed.iter().filter(|c| !clo.contains(*c)).collect();
        let mut changed = false;
        for (p, pred) in rule.predicates.iter().enumerate() {
            if !kept.predicates.contains(&p) && pred.attributes().iter().any(|a| undetermined.contains(a)) {
                kept.predicates.insert(p);
                changed = true;
            }
        }
        let mut needed: BTreeSet<String> = undetermined.into_iter().cloned().collect();
        for &p in &kept.predicates {
            for a in rule.predicates[p].attributes() {
                if !exposed.contains(&a) && !sel.contains(&a) {
                    needed.insert(a);
                }
            }
        }
        for (i, atom) in rule.atoms.iter().enumerate() {
            if !kept.atoms.contains(&i) && atom.columns.iter().any(|(_, e)| needed.contains(e)) {
                kept.atoms.insert(i);
                changed = true;
            }
        }
        if !changed {
            return kept;
        }
    }
}

/// Pruning for a single target: the key shortcut, the projection shortcut,
/// then [`prune_body`].
pub fn prune_for_target(rule: &Rule, catalog: &Catalog, sel: &BTreeSet<String>, target: usize) -> Pruned {
    let atom = &rule.atoms[target];
    if let Some(key) = exposed_key(atom, catalog) {
        if key.is_subset(sel) {
            return Pruned {
                atoms: [target].into(),
                predicates: BTreeSet::new(),
            };
        }
    }
    if atom.exposed().is_subset(sel) {
        return Pruned::default();
    }
    prune_body(rule, catalog, sel, &[target])
}

fn target_index(rule: &Rule, occ: &OccurrenceId) -> Result<usize> {
    if rule.head != occ.rule {
        return Err(Error::UnknownOccurrence(occ.to_string()));
    }
    rule.atom_index(&occ.label)
        .ok_or_else(|| Error::UnknownOccurrence(occ.to_string()))
}

fn head_selection(rule: &Rule) -> Vec<(String, String)> {
    rule.head_attributes().into_iter().map(|a| (a.clone(), a)).collect()
}

fn assemble(
    rule: &Rule,
    target: usize,
    source: String,
    selection_columns: Vec<(String, String)>,
    kept: &Pruned,
) -> ProvQuery {
    ProvQuery {
        target: OccurrenceId::new(&rule.head, &rule.atoms[target].label),
        rule: rule.head.clone(),
        selection_source: source,
        selection_columns,
        retained_atoms: kept.atoms.iter().map(|&i| rule.atoms[i].clone()).collect(),
        retained_predicates: kept.predicates.iter().map(|&i| rule.predicates[i].clone()).collect(),
        target_atom: rule.atoms[target].clone(),
    }
}

fn selection_name(rule: &Rule, program: &Program) -> String {
    if rule.head == program.result_name() {
        format!("{}'", rule.head)
    } else {
        format!("P{}", program.parent_of(&rule.head).map(|p| p.label.as_str()).unwrap_or(&rule.head))
    }
}

/// The full-body query: selection, every atom, every predicate.
pub fn baseline_retrieval(program: &Program, occ: &OccurrenceId) -> Result<ProvQuery> {
    let rule = program.require_rule(&occ.rule)?;
    let t = target_index(rule, occ)?;
    let kept = Pruned {
        atoms: (0..rule.atoms.len()).collect(),
        predicates: (0..rule.predicates.len()).collect(),
    };
    Ok(assemble(rule, t, selection_name(rule, program), head_selection(rule), &kept))
}

/// The pruned query for one step, driven by the rule's own head rows.
pub fn optimized_retrieval(program: &Program, occ: &OccurrenceId) -> Result<ProvQuery> {
    let rule = program.require_rule(&occ.rule)?;
    let t = target_index(rule, occ)?;
    let sel: BTreeSet<String> = rule.plain_columns().into_iter().collect();
    let kept = prune_for_target(rule, program.catalog(), &sel, t);
    Ok(assemble(rule, t, selection_name(rule, program), head_selection(rule), &kept))
}

/// Like [`optimized_retrieval`] with an arbitrary selection relation whose
/// columns map to body names through `selection_columns`.
pub fn optimized_with_selection(
    rule: &Rule,
    catalog: &Catalog,
    target: usize,
    source: String,
    selection_columns: Vec<(String, String)>,
) -> ProvQuery {
    let body = crate::ir::rhs_attributes(rule);
    let sel: BTreeSet<String> = selection_columns
        .iter()
        .map(|(_, e)| e.clone())
        .filter(|e| body.contains(e))
        .collect();
    let kept = prune_for_target(rule, catalog, &sel, target);
    assemble(rule, target, source, selection_columns, &kept)
}

pub(crate) fn step_query(program: &Program, occ: &OccurrenceId, optimize: bool) -> Result<ProvQuery> {
    if optimize {
        optimized_retrieval(program, occ)
    } else {
        baseline_retrieval(program, occ)
    }
}

/// One query per step from the final rule down to `occ`.
pub fn retrieval_chain(program: &Program, occ: &OccurrenceId, optimize: bool) -> Result<RetrievalChain> {
    let steps = program
        .path_to(occ)?
        .iter()
        .map(|o| step_query(program, o, optimize))
        .collect::<Result<_>>()?;
    Ok(RetrievalChain { steps })
}
