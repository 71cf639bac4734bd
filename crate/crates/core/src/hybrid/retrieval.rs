use super::plan::MaterializationPlan;
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program};
use crate::provgen::{optimized_with_selection, ProvQuery, RetrievalChain};

pub const RK_RESTRICTED: &str = "RK'";

/// Retrieval against RK'. Case 1: the occurrence's whole key is in RK, so
/// one join with the table suffices. Case 2: pruned queries, starting from
/// RK' in the final rule and descending through the views.
pub fn hybrid_retrieval(
    program: &Program,
    plan: &MaterializationPlan,
    occ: &OccurrenceId,
) -> Result<(RetrievalChain, u8)> {
    let atom = program.atom(occ)?.clone();
    if plan.key_covered(occ, program) {
        let cols = &plan.key_columns[occ];
        let selection_columns = cols
            .iter()
            .map(|(src, rk_col)| {
                let exposed = atom.exposed_name(src).expect("key attribute").to_string();
                (rk_col.clone(), exposed)
            })
            .collect();
        let q = ProvQuery {
            target: occ.clone(),
            rule: occ.rule.clone(),
            selection_source: RK_RESTRICTED.to_string(),
            selection_columns,
            retained_atoms: vec![atom.clone()],
            retained_predicates: Vec::new(),
            target_atom: atom,
        };
        return Ok((RetrievalChain { steps: vec![q] }, 1));
    }
    let path = program.path_to(occ)?;
    let mut steps = Vec::with_capacity(path.len());
    for (i, step) in path.iter().enumerate() {
        let rule = program.require_rule(&step.rule)?;
        let t = rule
            .atom_index(&step.label)
            .ok_or_else(|| Error::UnknownOccurrence(step.to_string()))?;
        let mut cols: Vec<(String, String)> =
            rule.head_attributes().into_iter().map(|a| (a.clone(), a)).collect();
        let source = if i == 0 {
            cols.extend(plan.top_level_extras(program));
            RK_RESTRICTED.to_string()
        } else {
            format!("P{}", path[i - 1].label)
        };
        steps.push(optimized_with_selection(rule, program.catalog(), t, source, cols));
    }
    Ok((RetrievalChain { steps }, 2))
}
