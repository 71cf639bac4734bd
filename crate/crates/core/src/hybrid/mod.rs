//! Materialization strategies: the eager provenance store (G) and result-key
//! materialization with pruned retrieval (O2), plus plan selection.

mod cost;
mod eager;
mod materialize;
mod plan;
mod retrieval;

use std::time::Instant;

pub use cost::{
    occurrence_costs, score_plan, select_plan, Candidate, Objective, OccurrenceCost, PlanOptions,
    PlanReport, PlanSelection, PlanStats, RowCount, DEFAULT_MAX_OCCURRENCES,
};
pub use eager::{qualified, EagerStore};
pub use materialize::{answer_from_rk, materialize, rk_restrict};
pub use plan::{build_plan, keyed_occurrences, ExtraColumn, KeyRule, MaterializationPlan, RK_NAME};
pub use retrieval::{hybrid_retrieval, RK_RESTRICTED};

use crate::engine::{Database, RelationInstance};
use crate::error::Result;
use crate::ir::{OccurrenceId, Program};
use crate::provgen::{micros, ProvStats, Selection, Strategy};

/// O2 provenance of `occ`; `db` holds the evaluated program, `rk` the
/// materialized result keys.
pub fn o2_provenance(
    program: &Program,
    plan: &MaterializationPlan,
    rk: &RelationInstance,
    occ: &OccurrenceId,
    selection: &Selection,
    db: &Database,
) -> Result<(RelationInstance, ProvStats)> {
    let start = Instant::now();
    let (chain, case) = hybrid_retrieval(program, plan, occ)?;
    let rk_sel = rk_restrict(selection.instance(), rk);
    let rows = chain.evaluate(&rk_sel, db)?;
    Ok((
        rows,
        ProvStats {
            strategy: Strategy::O2,
            join_count: chain.join_count(),
            retained_atoms: chain.retained_atoms(),
            steps: chain.steps.len(),
            case: Some(case),
            elapsed_us: micros(start),
        },
    ))
}

/// G provenance of `occ`: a lookup in the eager store.
pub fn eager_provenance(
    program: &Program,
    store: &EagerStore,
    occ: &OccurrenceId,
    selection: &Selection,
) -> Result<(RelationInstance, ProvStats)> {
    let start = Instant::now();
    let rows = store.retrieve(program, occ, selection.instance())?;
    Ok((
        rows,
        ProvStats {
            strategy: Strategy::G,
            join_count: 1,
            retained_atoms: 1,
            steps: 1,
            case: None,
            elapsed_us: micros(start),
        },
    ))
}
