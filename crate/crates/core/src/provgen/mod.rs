//! Provenance retrieval without materialization: the reference definition,
//! the full-body queries (W) and the pruned queries (O1).

mod optimize;
mod oracle;
mod query;
mod selection;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use optimize::{
    baseline_retrieval, optimized_retrieval, optimized_with_selection, prune_body, prune_for_target,
    retrieval_chain, Pruned,
};
pub use oracle::{naive_provenance, oracle_provenance};
pub use query::{ProvQuery, RetrievalChain};
pub use selection::Selection;

use crate::engine::{Database, RelationInstance};
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Full rule bodies, no materialization.
    W,
    /// Pruned rule bodies, no materialization.
    O1,
    /// Fully materialized provenance views.
    G,
    /// Materialized result keys plus pruned retrieval.
    O2,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::W, Strategy::O1, Strategy::G, Strategy::O2];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::W => "W",
            Strategy::O1 => "O1",
            Strategy::G => "G",
            Strategy::O2 => "O2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s.trim().to_ascii_uppercase().as_str() {
            "W" => Ok(Strategy::W),
            "O1" => Ok(Strategy::O1),
            "G" => Ok(Strategy::G),
            "O2" => Ok(Strategy::O2),
            other => Err(Error::InvalidProgram(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvStats {
    pub strategy: Strategy,
    pub join_count: usize,
    pub retained_atoms: usize,
    pub steps: usize,
    /// 1 or 2 for hybrid retrieval.
    pub case: Option<u8>,
    pub elapsed_us: u64,
}

pub(crate) fn micros(start: Instant) -> u64 {
    start.elapsed().as_micros().min(u64::MAX as u128) as u64
}

/// W or O1 provenance of `occ` for rows selected from the final result.
/// `db` must hold the evaluated program.
pub fn provenance(
    program: &Program,
    occ: &OccurrenceId,
    selection: &Selection,
    strategy: Strategy,
    db: &Database,
) -> Result<(RelationInstance, ProvStats)> {
    let optimize = match strategy {
        Strategy::W => false,
        Strategy::O1 => true,
        other => {
            return Err(Error::Plan(format!(
                "strategy {other} needs a materialized store; use the hybrid module"
            )))
        }
    };
    if selection.relation() != program.result_name() {
        return Err(Error::InvalidProgram(format!(
            "selection is over `{}`, expected `{}`",
            selection.relation(),
            program.result_name()
        )));
    }
    let start = Instant::now();
    let chain = retrieval_chain(program, occ, optimize)?;
    let rows = chain.evaluate(selection.instance(), db)?;
    Ok((
        rows,
        ProvStats {
            strategy,
            join_count: chain.join_count(),
            retained_atoms: chain.retained_atoms(),
            steps: chain.steps.len(),
            case: None,
            elapsed_us: micros(start),
        },
    ))
}
