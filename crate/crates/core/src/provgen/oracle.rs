use crate::engine::{eval_body, join_all, semijoin, Database, JoinInput, RelationInstance};
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program};

/// Provenance of `occ` for rows selected from its own rule's head:
/// PView = head ⋈ body, restricted to the selection, projected onto the
/// occurrence's columns. `db` must hold the evaluated program.
pub fn naive_provenance(
    program: &Program,
    occ: &OccurrenceId,
    selection: &RelationInstance,
    db: &Database,
) -> Result<RelationInstance> {
    let rule = program.require_rule(&occ.rule)?;
    let atom = rule
        .atom(&occ.label)
        .ok_or_else(|| Error::UnknownOccurrence(occ.to_string()))?;
    let head = db.require(&rule.head)?;
    if !selection.is_subset_of(head) {
        let row = selection
            .rows()
            .iter()
            .find(|r| !head.contains(r))
            .map(|r| crate::engine::fmt_row(r))
            .unwrap_or_default();
        return Err(Error::NotInResult {
            relation: rule.head.clone(),
            row,
        });
    }
    let body = eval_body(rule, db)?;
    let cols: Vec<(String, String)> = body.attributes.iter().map(|a| (a.clone(), a.clone())).collect();
    let body = body.project("RHS", &cols)?;
    let pview = join_all(&[JoinInput::whole(head), JoinInput::whole(&body)], &[])?;
    let all: Vec<(String, String)> = pview.attributes.iter().map(|a| (a.clone(), a.clone())).collect();
    let pview = pview.project("PView", &all)?;
    let picked = semijoin(&pview, selection);
    let out: Vec<(String, String)> = atom
        .columns
        .iter()
        .map(|(src, exp)| (exp.clone(), src.clone()))
        .collect();
    let b = join_all(&[JoinInput::whole(&picked)], &[])?;
    b.project(&format!("P{}", atom.label), &out)
}

/// Provenance of any occurrence for rows selected from the final result,
/// descending through the views on its path.
pub fn oracle_provenance(
    program: &Program,
    occ: &OccurrenceId,
    selection: &RelationInstance,
    db: &Database,
) -> Result<RelationInstance> {
    let mut cur = selection.clone();
    for step in program.path_to(occ)? {
        cur = naive_provenance(program, &step, &cur, db)?;
    }
    Ok(cur)
}
