use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::materialize::materialize;
use super::plan::{build_plan, keyed_occurrences, MaterializationPlan};
use super::retrieval::hybrid_retrieval;
use crate::engine::Database;
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program};
use crate::provgen::retrieval_chain;

pub const DEFAULT_MAX_OCCURRENCES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStats {
    pub rows_r: usize,
    pub rows_rk: usize,
    pub joins_without: Decimal,
    pub joins_with: Decimal,
}

impl PlanStats {
    /// `(1 + joins_without) / (1 + joins_with)`
    pub fn benefit(&self) -> Decimal {
        (Decimal::ONE + self.joins_without) / (Decimal::ONE + self.joins_with)
    }

    /// `rows_RK / rows_R`; an empty result costs nothing extra.
    pub fn cost(&self) -> Decimal {
        if self.rows_r == 0 {
            Decimal::ONE
        } else {
            Decimal::from(self.rows_rk as u64) / Decimal::from(self.rows_r as u64)
        }
    }
}

/// How candidate plans are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Largest join benefit; ties go to the smaller RK.
    #[default]
    BenefitThenCost,
    /// Largest benefit / cost.
    Ratio,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Objective> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "benefit_then_cost" | "benefit" => Ok(Objective::BenefitThenCost),
            "ratio" => Ok(Objective::Ratio),
            other => Err(Error::Plan(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowCount {
    /// Materialize every candidate and count.
    #[default]
    Exact,
    /// rows_R times the per-occurrence fan-out of the added keys.
    Estimate,
}

#[derive(Debug, Clone, Default)]
pub struct PlanOptions {
    pub objective: Objective,
    pub rows: RowCount,
    /// Candidates with cost above this are skipped (the empty plan never is).
    pub max_cost_ratio: Option<Decimal>,
    /// Per-occurrence weights on join counts; missing entries weigh 1.
    pub weights: BTreeMap<OccurrenceId, Decimal>,
    /// Lifts the limit on keyed occurrences.
    pub allow_large: bool,
}

pub fn score_plan(stats: &PlanStats, objective: Objective) -> Decimal {
    match objective {
        Objective::BenefitThenCost => stats.benefit(),
        Objective::Ratio => {
            let c = stats.cost();
            if c.is_zero() {
                stats.benefit()
            } else {
                stats.benefit() / c
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceCost {
    pub occurrence: String,
    pub case: u8,
    pub joins_without: usize,
    pub joins_with: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub chosen: Vec<String>,
    pub stats: PlanStats,
    pub benefit: Decimal,
    pub cost: Decimal,
    pub score: Decimal,
    pub occurrences: Vec<OccurrenceCost>,
    #[serde(skip)]
    pub(crate) set: BTreeSet<OccurrenceId>,
}

/// Join counts per base occurrence under `plan` and without materialization.
pub fn occurrence_costs(program: &Program, plan: &MaterializationPlan) -> Result<Vec<OccurrenceCost>> {
    program
        .base_occurrences()
        .iter()
        .map(|occ| {
            let (chain, case) = hybrid_retrieval(program, plan, occ)?;
            Ok(OccurrenceCost {
                occurrence: occ.to_string(),
                case,
                joins_without: retrieval_chain(program, occ, true)?.join_count(),
                joins_with: chain.join_count(),
            })
        })
        .collect()
}

fn estimate_rows(program: &Program, plan: &MaterializationPlan, db: &Database, rows_r: usize) -> Result<usize> {
    let mut est = rows_r as f64;
    for occ in &plan.chosen {
        if !plan.extras.iter().any(|e| &e.occurrence == occ) {
            continue;
        }
        let atom = program.atom(occ)?;
        let rel = db.require(&atom.relation)?;
        let carried: Vec<String> = plan.key_columns[occ]
            .keys()
            .filter(|k| !plan.extras.iter().any(|e| &e.occurrence == occ && &e.source == *k))
            .cloned()
            .collect();
        let pos = rel.positions(&carried)?;
        let groups: HashSet<Vec<&crate::value::Value>> =
            rel.rows().iter().map(|r| pos.iter().map(|&p| &r[p]).collect()).collect();
        let g = groups.len().max(1) as f64;
        est *= (rel.len() as f64 / g).max(1.0);
    }
    Ok((est.round() as usize).max(rows_r))
}

fn evaluate(
    program: &Program,
    db: &Database,
    set: BTreeSet<OccurrenceId>,
    options: &PlanOptions,
    rows_r: usize,
) -> Result<Candidate> {
    let plan = build_plan(program, &set)?;
    let rows_rk = match options.rows {
        RowCount::Exact => materialize(&plan, db)?.len(),
        RowCount::Estimate => estimate_rows(program, &plan, db, rows_r)?,
    };
    let occurrences = occurrence_costs(program, &plan)?;
    let weight = |o: &str| {
        options
            .weights
            .iter()
            .find(|(k, _)| k.to_string() == o)
            .map(|(_, w)| *w)
            .unwrap_or(Decimal::ONE)
    };
    let mut without = Decimal::ZERO;
    let mut with = Decimal::ZERO;
    for o in &occurrences {
        let w = weight(&o.occurrence);
        without += w * Decimal::from(o.joins_without as u64);
        with += w * Decimal::from(o.joins_with as u64);
    }
    let stats = PlanStats {
        rows_r,
        rows_rk,
        joins_without: without,
        joins_with: with,
    };
    Ok(Candidate {
        chosen: set.iter().map(|o| o.to_string()).collect(),
        benefit: stats.benefit(),
        cost: stats.cost(),
        score: score_plan(&stats, options.objective),
        stats,
        occurrences,
        set,
    })
}

/// Total order used to pick the winner; `Less` means `a` is preferred.
pub(crate) fn preference(a: &Candidate, b: &Candidate, objective: Objective) -> Ordering {
    let primary = b.score.cmp(&a.score);
    let secondary = match objective {
        Objective::BenefitThenCost => a.cost.cmp(&b.cost),
        Objective::Ratio => Ordering::Equal,
    };
    primary
        .then(secondary)
        .then(a.set.len().cmp(&b.set.len()))
        .then_with(|| a.set.iter().cmp(b.set.iter()))
}

#[derive(Debug, Clone)]
pub struct PlanSelection {
    pub plan: MaterializationPlan,
    pub best: Candidate,
    /// Every evaluated candidate, in subset order.
    pub candidates: Vec<Candidate>,
}

/// Evaluates every subset of the keyed base occurrences and keeps the best.
/// `db` must hold the evaluated program.
pub fn select_plan(program: &Program, db: &Database, options: &PlanOptions) -> Result<PlanSelection> {
    let occs = keyed_occurrences(program);
    let n = occs.len();
    if n > DEFAULT_MAX_OCCURRENCES && !options.allow_large {
        return Err(Error::TooManyOccurrences {
            n,
            limit: DEFAULT_MAX_OCCURRENCES,
        });
    }
    if n >= 63 {
        return Err(Error::TooManyOccurrences { n, limit: 62 });
    }
    let rows_r = db.require(program.result_name())?.len();
    let candidates: Vec<Candidate> = (0u64..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let set: BTreeSet<OccurrenceId> = occs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, o)| o.clone())
                .collect();
            evaluate(program, db, set, options, rows_r)
        })
        .collect::<Result<_>>()?;
    let best = candidates
        .iter()
        .filter(|c| {
            c.set.is_empty() || options.max_cost_ratio.is_none_or(|m| c.cost <= m)
        })
        .min_by(|a, b| preference(a, b, options.objective))
        .expect("the empty plan is always a candidate")
        .clone();
    let plan = build_plan(program, &best.set)?;
    Ok(PlanSelection {
        plan,
        best,
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanReport {
    pub chosen: Vec<String>,
    pub a_rk: Vec<String>,
    pub rk_rule: String,
    pub vk_rules: Vec<String>,
    pub occurrences: Vec<OccurrenceCost>,
    pub rows_r: usize,
    pub rows_rk: usize,
    pub joins_without: Decimal,
    pub joins_with: Decimal,
    pub benefit: Decimal,
    pub cost: Decimal,
    pub score: Decimal,
    pub objective: Objective,
}

impl PlanReport {
    pub fn new(plan: &MaterializationPlan, candidate: &Candidate, objective: Objective) -> PlanReport {
        PlanReport {
            chosen: plan.chosen_names(),
            a_rk: plan.rk_schema.clone(),
            rk_rule: plan.rk_rule.to_string(),
            vk_rules: plan.vk_rules.iter().map(|r| r.to_string()).collect(),
            occurrences: candidate.occurrences.clone(),
            rows_r: candidate.stats.rows_r,
            rows_rk: candidate.stats.rows_rk,
            joins_without: candidate.stats.joins_without,
            joins_with: candidate.stats.joins_with,
            benefit: candidate.benefit,
            cost: candidate.cost,
            score: candidate.score,
            objective,
        }
    }

    /// Report for a fixed plan, computing its statistics.
    pub fn for_plan(program: &Program, db: &Database, plan: &MaterializationPlan, options: &PlanOptions) -> Result<PlanReport> {
        let rows_r = db.require(program.result_name())?.len();
        let c = evaluate(program, db, plan.chosen.clone(), options, rows_r)?;
        Ok(PlanReport::new(plan, &c, options.objective))
    }
}
