use super::plan::MaterializationPlan;
use crate::engine::{semijoin, Database, RelationInstance};
use crate::error::Result;
use crate::ir::Program;

/// Evaluates the VK rules (kept only in a scratch copy) and returns RK.
/// `db` must hold the evaluated program.
pub fn materialize(plan: &MaterializationPlan, db: &Database) -> Result<RelationInstance> {
    if plan.vk_rules.is_empty() && plan.rk_rule.atoms.is_empty() {
        return plan.rk_rule.evaluate(db);
    }
    let mut scratch = db.with_catalog(plan.catalog.clone());
    for vk in &plan.vk_rules {
        let inst = vk.evaluate(&scratch)?;
        scratch.put(inst);
    }
    plan.rk_rule.evaluate(&scratch)
}

/// `OQ(A_R) :- RK.`
pub fn answer_from_rk(program: &Program, rk: &RelationInstance) -> Result<RelationInstance> {
    let a_r = program.final_rule().head_attributes();
    Ok(rk.project(&a_r)?.with_name(program.result_name()))
}

/// `RK' :- R', RK.`
pub fn rk_restrict(selection: &RelationInstance, rk: &RelationInstance) -> RelationInstance {
    semijoin(rk, selection).with_name("RK'")
}
