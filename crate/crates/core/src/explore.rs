//! A program prepared under one strategy, and the exploration session the
//! service drives: result rows, a registered selection, provenance lookups.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{eval_program, Database, RelationInstance};
use crate::error::{Error, Result};
use crate::hybrid::{
    answer_from_rk, build_plan, eager_provenance, materialize, o2_provenance, select_plan, EagerStore,
    MaterializationPlan, PlanOptions, PlanReport,
};
use crate::ir::{parse_program, OccurrenceId, Program};
use crate::provgen::{micros, provenance, ProvStats, Selection, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PlanMode {
    /// Pick the plan with `select_plan`.
    #[default]
    Auto,
    /// Materialize nothing beyond R.
    None,
    Explicit(BTreeSet<OccurrenceId>),
}

/// A program evaluated once under a strategy, with whatever that strategy
/// materializes.
#[derive(Debug, Clone)]
pub struct Prepared {
    program: Program,
    db: Database,
    strategy: Strategy,
    result: RelationInstance,
    plan: Option<MaterializationPlan>,
    plan_report: Option<PlanReport>,
    rk: Option<RelationInstance>,
    eager: Option<EagerStore>,
    oq_us: u64,
    plan_us: u64,
}

impl Prepared {
    /// Evaluates `program` over base data `base`. For G and O2 the timed
    /// original-query time includes the materialization; plan selection is
    /// timed separately.
    pub fn new(
        program: Program,
        base: &Database,
        strategy: Strategy,
        mode: &PlanMode,
        options: &PlanOptions,
    ) -> Result<Prepared> {
        let mut plan = None;
        let mut plan_report = None;
        let plan_start = Instant::now();
        if strategy == Strategy::O2 {
            let evaluated = eval_program(&program, base)?;
            let (p, report) = match mode {
                PlanMode::Auto => {
                    let sel = select_plan(&program, &evaluated, options)?;
                    let report = PlanReport::new(&sel.plan, &sel.best, options.objective);
                    (sel.plan, report)
                }
                PlanMode::None => {
                    let p = build_plan(&program, &BTreeSet::new())?;
                    let report = PlanReport::for_plan(&program, &evaluated, &p, options)?;
                    (p, report)
                }
                PlanMode::Explicit(set) => {
                    let p = build_plan(&program, set)?;
                    let report = PlanReport::for_plan(&program, &evaluated, &p, options)?;
                    (p, report)
                }
            };
            plan = Some(p);
            plan_report = Some(report);
        }
        let plan_us = if strategy == Strategy::O2 { micros(plan_start) } else { 0 };
        let start = Instant::now();
        let db = eval_program(&program, base)?;
        let mut rk = None;
        let mut eager = None;
        let result = match strategy {
            Strategy::W | Strategy::O1 => db.require(program.result_name())?.clone(),
            Strategy::G => {
                let store = EagerStore::materialize(&program, &db)?;
                let r = store.answer()?;
                eager = Some(store);
                r
            }
            Strategy::O2 => {
                let k = materialize(plan.as_ref().expect("set above"), &db)?;
                let r = answer_from_rk(&program, &k)?;
                rk = Some(k);
                r
            }
        };
        let oq_us = micros(start);
        Ok(Prepared {
            program,
            db,
            strategy,
            result,
            plan,
            plan_report,
            rk,
            eager,
            oq_us,
            plan_us,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// The evaluated database (base relations plus every head).
    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn result(&self) -> &RelationInstance {
        &self.result
    }

    pub fn plan(&self) -> Option<&MaterializationPlan> {
        self.plan.as_ref()
    }

    pub fn plan_report(&self) -> Option<&PlanReport> {
        self.plan_report.as_ref()
    }

    pub fn rk(&self) -> Option<&RelationInstance> {
        self.rk.as_ref()
    }

    pub fn eager(&self) -> Option<&EagerStore> {
        self.eager.as_ref()
    }

    /// Microseconds spent computing the original result (and materializing).
    pub fn oq_us(&self) -> u64 {
        self.oq_us
    }

    /// Microseconds spent choosing and reporting the O2 plan.
    pub fn plan_us(&self) -> u64 {
        self.plan_us
    }

    pub fn provenance(&self, occ: &OccurrenceId, selection: &Selection) -> Result<(RelationInstance, ProvStats)> {
        match self.strategy {
            Strategy::W | Strategy::O1 => provenance(&self.program, occ, selection, self.strategy, &self.db),
            Strategy::G => eager_provenance(&self.program, self.eager.as_ref().expect("materialized"), occ, selection),
            Strategy::O2 => o2_provenance(
                &self.program,
                self.plan.as_ref().expect("planned"),
                self.rk.as_ref().expect("materialized"),
                occ,
                selection,
                &self.db,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceEntry {
    /// Unique `Head.Label` name.
    pub id: String,
    pub rule: String,
    pub label: String,
    pub relation: String,
    pub is_view: bool,
    pub depth: usize,
    /// The whole key is held by RK (O2 sessions only).
    pub key_covered: bool,
}

/// Exploration state: a prepared program plus the current selection.
#[derive(Debug, Clone)]
pub struct Session {
    prepared: Prepared,
    selection: Option<Selection>,
}

impl Session {
    pub fn create(
        base: &Database,
        program_text: &str,
        strategy: Strategy,
        mode: &PlanMode,
        options: &PlanOptions,
    ) -> Result<Session> {
        let program = parse_program(program_text, base.catalog())?;
        Ok(Session::from_prepared(Prepared::new(program, base, strategy, mode, options)?))
    }

    /// A session over an already prepared program, with no selection.
    pub fn from_prepared(prepared: Prepared) -> Session {
        Session {
            prepared,
            selection: None,
        }
    }

    pub fn prepared(&self) -> &Prepared {
        &self.prepared
    }

    pub fn result(&self) -> &RelationInstance {
        self.prepared.result()
    }

    pub fn selection(&self) -> Option<&Selection> {
        self.selection.as_ref()
    }

    /// Replaces the selection; every tuple must be a row of the result.
    pub fn select_rows(&mut self, tuples: &[Vec<String>]) -> Result<usize> {
        let sel = Selection::from_literals(self.prepared.result(), tuples)?;
        let n = sel.len();
        self.selection = Some(sel);
        Ok(n)
    }

    pub fn resolve(&self, name: &str) -> Result<OccurrenceId> {
        self.prepared.program().resolve_occurrence(name)
    }

    /// Fails with [`Error::NoSelection`] until a selection is registered.
    pub fn provenance(&self, occurrence: &str) -> Result<(RelationInstance, ProvStats)> {
        let occ = self.resolve(occurrence)?;
        let sel = self.selection.as_ref().ok_or(Error::NoSelection)?;
        self.prepared.provenance(&occ, sel)
    }

    pub fn occurrences(&self) -> Vec<OccurrenceEntry> {
        let program = self.prepared.program();
        program
            .occurrences()
            .into_iter()
            .map(|o| OccurrenceEntry {
                id: o.id.to_string(),
                key_covered: self
                    .prepared
                    .plan()
                    .is_some_and(|p| p.key_covered(&o.id, program)),
                rule: o.id.rule,
                label: o.id.label,
                relation: o.relation,
                is_view: o.is_view,
                depth: o.depth,
            })
            .collect()
    }
}
