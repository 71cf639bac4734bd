use std::collections::BTreeMap;

use crate::engine::{Database, RelationInstance};
use crate::error::{Error, Result};
use crate::explore::{PlanMode, Prepared};
use crate::hybrid::PlanOptions;
use crate::ir::Program;
use crate::provgen::{oracle_provenance, Selection, Strategy};

use super::report::{BenchCell, BenchReport};

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub strategies: Vec<Strategy>,
    /// Timed repetitions per measurement; the median is reported.
    pub reps: usize,
    pub plan: PlanMode,
    pub plan_options: PlanOptions,
    /// Compare every provenance answer with the reference definition.
    pub check: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            strategies: Strategy::ALL.to_vec(),
            reps: 3,
            plan: PlanMode::Auto,
            plan_options: PlanOptions::default(),
            check: true,
        }
    }
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    if xs.is_empty() {
        0
    } else {
        xs[xs.len() / 2]
    }
}

/// The first row of R, or nothing when R is empty.
fn first_row(result: &RelationInstance) -> Result<Selection> {
    Selection::new(result, result.rows().iter().next().cloned())
}

/// Runs each program under each strategy over base data `db`.
pub fn run_suite(db: &Database, programs: &[(String, Program)], options: &SuiteOptions) -> Result<BenchReport> {
    let reps = options.reps.max(1);
    let mut cells = Vec::new();
    for (name, program) in programs {
        for &strategy in &options.strategies {
            let mut oq = Vec::with_capacity(reps);
            let mut plan = Vec::with_capacity(reps);
            let mut prepared = None;
            for _ in 0..reps {
                let p = Prepared::new(program.clone(), db, strategy, &options.plan, &options.plan_options)?;
                oq.push(p.oq_us());
                plan.push(p.plan_us());
                prepared = Some(p);
            }
            let prepared = prepared.expect("reps >= 1");
            let result = prepared.result();
            let selection = first_row(result)?;
            let mut provenance_us = BTreeMap::new();
            let mut join_counts = BTreeMap::new();
            for occ in program.base_occurrences() {
                let mut times = Vec::with_capacity(reps);
                let mut last = None;
                for _ in 0..reps {
                    let (rows, stats) = prepared.provenance(&occ, &selection)?;
                    times.push(stats.elapsed_us);
                    join_counts.insert(occ.to_string(), stats.join_count);
                    last = Some(rows);
                }
                if options.check {
                    let got = last.expect("reps >= 1");
                    let want = oracle_provenance(program, &occ, selection.instance(), prepared.database())?;
                    if !got.same_rows(&want) {
                        return Err(Error::OracleMismatch(format!(
                            "{name} under {strategy}: {occ} returned {} rows, expected {}",
                            got.len(),
                            want.len()
                        )));
                    }
                }
                provenance_us.insert(occ.to_string(), median(times));
            }
            let ap_us = if provenance_us.is_empty() {
                0
            } else {
                let total: u64 = provenance_us.values().sum();
                (total as f64 / provenance_us.len() as f64).round() as u64
            };
            let rows_rk = match strategy {
                Strategy::O2 => prepared.rk().map(|r| r.len()),
                Strategy::G => prepared.eager().map(|e| e.top().len()),
                _ => None,
            };
            cells.push(BenchCell {
                query: name.clone(),
                strategy,
                oq_us: median(oq),
                plan_us: median(plan),
                mp_us: provenance_us.values().copied().min().unwrap_or(0),
                provenance_us,
                ap_us,
                join_counts,
                rows_r: result.len(),
                rows_rk,
            });
        }
    }
    Ok(BenchReport { cells })
}
